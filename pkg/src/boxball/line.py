"""Record-anchored assembly of excursion sequences and stationary samplers.

A configuration with a record at the origin is equivalent to its doubly
infinite excursion sequence.  Palm samplers draw i.i.d. excursions and
concatenate them; the anti-Palm sampler tilts the block covering the origin
by its length and places the origin uniformly inside it, producing a window
of the translation-invariant measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import BallConfig, Excursion, excursions_of
from .errors import PreconditionError
from .measures import (
    SlotFill,
    SolitonWeights,
    _as_rng,
    fill_from_weights,
    mean_record_gap,
    sample_excursions,
)


@dataclass(frozen=True)
class AnchoredConfig:
    """Configuration plus the positions of its records, with record 0 at box 0.

    ``records[j]`` is the position of record ``i_lo + j``; excursion i lives
    strictly between records i and i + 1.
    """

    config: BallConfig
    i_lo: int
    records: tuple[int, ...]

    def __post_init__(self):
        if not self.records:
            raise PreconditionError("at least one record is required")
        if self.i_lo > 0 or self.i_lo + len(self.records) <= 0:
            raise PreconditionError("the record window must contain index 0")
        if self.records[-self.i_lo] != 0:
            raise PreconditionError("record 0 must sit at the origin")

    def record(self, i: int) -> int:
        j = i - self.i_lo
        if not 0 <= j < len(self.records):
            raise PreconditionError(f"record {i} outside the stored window")
        return self.records[j]

    @property
    def i_hi(self) -> int:
        """Largest excursion index covered by the stored records."""
        return self.i_lo + len(self.records) - 2

    def to_json_dict(self) -> dict:
        return {
            "origin": self.config.origin,
            "balls": self.config.to_string(),
            "i_lo": self.i_lo,
            "records": list(self.records),
        }


def assemble(excursions: Sequence[Excursion], i_lo: int = 0) -> AnchoredConfig:
    """Concatenate excursions, separated by records, with record 0 at box 0.

    Excursion ``i_lo + t`` occupies the ``2 n`` boxes after record
    ``i_lo + t``; consecutive records are ``2 n + 1`` apart.
    """
    if i_lo > 0 or i_lo + len(excursions) < 1:
        raise PreconditionError("the excursion window must contain index 0")
    start = -sum(2 * e.n + 1 for e in excursions[: -i_lo])
    records = [start]
    bits: list[int] = []
    for e in excursions:
        bits.append(0)
        bits.extend(e.balls())
        records.append(records[-1] + 2 * e.n + 1)
    bits.append(0)
    return AnchoredConfig(BallConfig(start, tuple(bits)), i_lo, tuple(records))


def anchor(config: BallConfig) -> AnchoredConfig:
    """Wrap a configuration with a record at 0 in its record index map."""
    i_lo, excs = excursions_of(config)
    return assemble(excs, i_lo) if excs else assemble([Excursion()], 0)


def extract_excursions(anchored: AnchoredConfig) -> tuple[int, tuple[Excursion, ...]]:
    """Indexed excursions of the configuration; inverse of :func:`assemble`."""
    return excursions_of(anchored.config)


# ---------------------------------------------------------------------------
# Palm samplers
# ---------------------------------------------------------------------------

def sample_palm(
    weights: SolitonWeights, num_excursions: int, rng, fill: SlotFill | None = None
) -> AnchoredConfig:
    """i.i.d. excursions with the normalized weight law, assembled at record 0."""
    rng = _as_rng(rng)
    if fill is None:
        fill = fill_from_weights(weights)
    excs = sample_excursions(weights, num_excursions, rng, fill)
    return assemble(excs, 0)


def bernoulli_excursions(lam: float, size: int, rng) -> list[Excursion]:
    """Excursions of a walk stepping up with probability lam, in bulk.

    Simulates i.i.d. boxes right of a record and cuts at the running strict
    minima of the walk; vectorized over a growing buffer.
    """
    if not 0 <= lam < 0.5:
        raise PreconditionError("lambda must lie in [0, 1/2)")
    rng = _as_rng(rng)
    if lam == 0.0:
        return [Excursion()] * size
    mean_len = 1.0 / (1 - 2 * lam)
    out: list[Excursion] = []
    carry = np.empty(0, dtype=np.int64)  # steps since the last record
    while len(out) < size:
        chunk = int((size - len(out) + 16) * mean_len * 1.3) + 64
        fresh = np.where(rng.random(chunk) < lam, 1, -1)
        steps = np.concatenate((carry, fresh))
        walk = np.cumsum(steps)
        prev_min = np.minimum.accumulate(np.concatenate(([0], walk)))[:-1]
        rec = np.flatnonzero(walk < prev_min)
        if rec.size == 0:
            carry = steps
            continue
        bounds = np.concatenate(([-1], rec))
        for a, b in zip(bounds, bounds[1:]):
            out.append(Excursion(tuple(int(s) for s in steps[a + 1 : b])))
            if len(out) == size:
                break
        carry = steps[rec[-1] + 1 :]
    return out


def markov_excursions(q_matrix: Sequence[Sequence[float]], size: int, rng) -> list[Excursion]:
    """Excursions of a stationary two-state chain restarted after each record.

    Each excursion runs the chain from the empty record state until the walk
    first goes below its start, dropping that final record step.
    """
    q = [[float(v) for v in row] for row in q_matrix]
    if not q[0][1] < q[1][0]:
        raise PreconditionError("need Q(0,1) < Q(1,0) for density below 1/2")
    rng = _as_rng(rng)
    up_from = (q[0][1], q[1][1])
    out: list[Excursion] = []
    buf = rng.random(max(4096, 8 * size))
    pos = 0
    for _ in range(size):
        steps: list[int] = []
        state = 0
        height = 0
        while True:
            if pos == len(buf):
                buf = rng.random(len(buf))
                pos = 0
            state = 1 if buf[pos] < up_from[state] else 0
            pos += 1
            if state == 1:
                height += 1
                steps.append(1)
            else:
                if height == 0:
                    break  # this empty box is the next record
                height -= 1
                steps.append(-1)
        out.append(Excursion(tuple(steps)))
    return out


def sample_bernoulli_palm(lam: float, num_excursions: int, rng) -> AnchoredConfig:
    """Palm sample of the product measure: i.i.d. walk excursions, assembled."""
    return assemble(bernoulli_excursions(lam, num_excursions, rng), 0)


def sample_markov_palm(
    q_matrix: Sequence[Sequence[float]], num_excursions: int, rng
) -> AnchoredConfig:
    """Palm sample of the stationary two-state chain measure."""
    return assemble(markov_excursions(q_matrix, num_excursions, rng), 0)


# ---------------------------------------------------------------------------
# anti-Palm sampler
# ---------------------------------------------------------------------------

def sample_anti_palm(
    weights: SolitonWeights,
    n_boxes: int,
    rng,
    block_cap: int = 2001,
    report: dict | None = None,
) -> BallConfig:
    """Translation-invariant window: boxes ``0 .. n_boxes - 1`` carry the
    stationary law of the assembled measure.

    The block (record plus excursion) covering the origin is drawn by
    rejection with acceptance proportional to its box count, capped at
    ``block_cap`` boxes; the origin lands uniformly inside it and further
    i.i.d. excursions extend the window on both sides.  The returned window
    spans whole excursions, so it may start before box 0 and end past
    ``n_boxes - 1``.  When ``report`` is supplied it receives the number of
    proposals, the number of cap clips, and the resulting bias bound.
    """
    if n_boxes < 1:
        raise PreconditionError("n_boxes must be >= 1")
    rng = _as_rng(rng)
    fill = fill_from_weights(weights)
    kappa = mean_record_gap(weights)
    if not math.isfinite(kappa):
        raise PreconditionError("mean record gap diverges; no stationary version")

    proposals = 0
    clipped = 0
    origin_block: Excursion | None = None
    while origin_block is None:
        batch = max(16, int(2 * block_cap / kappa))
        for exc in sample_excursions(weights, batch, rng, fill):
            proposals += 1
            boxes = 2 * exc.n + 1
            accept = boxes / block_cap
            if accept > 1.0:
                clipped += 1
                accept = 1.0
            if rng.random() < accept:
                origin_block = exc
                break
    if report is not None:
        report["proposals"] = proposals
        report["clipped"] = clipped
        report["block_cap"] = block_cap
        # mass of blocks longer than the cap, crudely dominated
        report["bias_bound"] = clipped / max(proposals, 1)

    block_boxes = 2 * origin_block.n + 1
    offset = int(rng.integers(block_boxes))  # the block's record sits at -offset
    pieces = [origin_block]
    right_record = -offset + block_boxes
    while right_record < n_boxes:
        batch = sample_excursions(
            weights, max(4, int((n_boxes - right_record) / kappa)), rng, fill
        )
        for exc in batch:
            pieces.append(exc)
            right_record += 2 * exc.n + 1
            if right_record >= n_boxes:
                break
    anchored = assemble(pieces, 0)
    return anchored.config.shifted(-offset)
