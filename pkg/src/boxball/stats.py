"""Statistical verification: geometric marginals, independence, invariance.

Chi-square machinery is deliberately plain: observed/expected bins with tails
merged until every expected count reaches the standard validity threshold,
p-values from the chi-square survival function.  All tests are deterministic
given their seed and parameters.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .core import BallConfig, config_soliton_counts, evolve, record_positions
from .errors import InsufficientDataError, PreconditionError
from .line import sample_anti_palm
from .measures import GeometricLaw, SolitonWeights, _as_rng
from .slots import ComponentArray, decompose

_MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class GofReport:
    """Chi-square test summary with the merged observed/expected bins."""

    statistic: float
    dof: int
    p_value: float
    bins: tuple[tuple[str, float, float], ...]
    max_dev_se: float | None = None

    @property
    def passed(self) -> bool:
        """Convenience gate at the pre-registered significance 1e-3."""
        return self.p_value > 1e-3

    def to_json_dict(self) -> dict:
        out = {
            "statistic": self.statistic,
            "dof": self.dof,
            "p_value": self.p_value,
            "bins": [list(b) for b in self.bins],
        }
        if self.max_dev_se is not None:
            out["max_dev_se"] = self.max_dev_se
        return out


def _chi_square(observed: Sequence[float], expected: Sequence[float], labels) -> GofReport:
    """Merge trailing bins until all expected counts clear the threshold."""
    obs = list(observed)
    exp = list(expected)
    labs = [str(l) for l in labels]
    while len(obs) > 2 and (exp[-1] < _MIN_EXPECTED or exp[-2] < _MIN_EXPECTED):
        exp[-2] += exp[-1]
        exp.pop()
        obs[-2] += obs[-1]
        obs.pop()
        labs.pop()
        labs[-1] = f"{labs[-1]}+"
    if len(obs) < 2:
        raise InsufficientDataError("fewer than two usable bins")
    stat = sum((o - e) ** 2 / e for o, e in zip(obs, exp))
    dof = len(obs) - 1
    p = float(sps.chi2.sf(stat, dof))
    return GofReport(stat, dof, p, tuple(zip(labs, obs, exp)))


def geometric_gof(
    components: ComponentArray, k: int, p_expected: float, min_labels: int = 1000
) -> GofReport:
    """Goodness of fit of row k against Geometric(p_expected)."""
    _, values = components.row(k)
    if len(values) < min_labels:
        raise InsufficientDataError(
            f"row {k} has {len(values)} labels, need {min_labels}"
        )
    law = GeometricLaw(p_expected)
    n = len(values)
    vmax = max(values)
    counts = Counter(values)
    observed = [counts.get(j, 0) for j in range(vmax + 1)]
    expected = [n * law.pmf(j) for j in range(vmax + 1)]
    # the final cell absorbs the entire remaining tail mass
    expected.append(n * (1 - law.p) ** (vmax + 1))
    observed.append(0)
    return _chi_square(observed, expected, list(range(vmax + 1)) + [f">{vmax}"])


PairSpec = tuple[tuple[int, int], tuple[int, int]]


def _pair_samples(
    components: ComponentArray, pair: PairSpec
) -> tuple[list[int], list[int]]:
    (k, a), (l, b) = pair
    _, row_k = components.row(k)
    _, row_l = components.row(l)
    xs: list[int] = []
    ys: list[int] = []
    if k == l:
        stride = max(a, b) + 1  # disjoint windows keep the pairs independent
        t = 0
        while t + stride <= len(row_k):
            xs.append(row_k[t + a])
            ys.append(row_k[t + b])
            t += stride
    else:
        m = min(len(row_k) - a, len(row_l) - b)
        for t in range(m):
            xs.append(row_k[t + a])
            ys.append(row_l[t + b])
    return xs, ys


def independence_test(
    components: ComponentArray, pairs: Sequence[PairSpec], min_pairs: int = 1000
) -> dict[PairSpec, GofReport]:
    """Chi-square independence tests on joint histograms of entry pairs.

    A pair ``((k, a), (l, b))`` tests entries at lags a and b of rows k and
    l; same-row pairs are read from disjoint windows so the sampled pairs
    stay mutually independent.  Values are capped so every expected cell
    clears the validity threshold.
    """
    out: dict[PairSpec, GofReport] = {}
    for pair in pairs:
        xs, ys = _pair_samples(components, pair)
        n = len(xs)
        if n < min_pairs:
            raise InsufficientDataError(f"pair {pair}: {n} samples, need {min_pairs}")
        if len(set(xs)) < 2 or len(set(ys)) < 2:
            raise InsufficientDataError(f"pair {pair}: a coordinate is constant")
        xcap = _cap_for(xs, n)
        ycap = _cap_for(ys, n)
        table = np.zeros((xcap + 1, ycap + 1))
        for x, y in zip(xs, ys):
            table[min(x, xcap), min(y, ycap)] += 1
        while True:
            rows = table.sum(axis=1)
            cols = table.sum(axis=0)
            expected = np.outer(rows, cols) / n
            if expected.min() >= _MIN_EXPECTED or min(table.shape) <= 2:
                break
            if table.shape[0] > 2 and (
                table.shape[1] <= 2 or rows[-1] <= cols[-1]
            ):
                table[-2] += table[-1]
                table = table[:-1]
            else:
                table[:, -2] += table[:, -1]
                table = table[:, :-1]
        stat = float(((table - expected) ** 2 / expected).sum())
        dof = (table.shape[0] - 1) * (table.shape[1] - 1)
        if dof < 1:
            raise InsufficientDataError(f"pair {pair}: degenerate table")
        p = float(sps.chi2.sf(stat, dof))
        bins = tuple(
            (f"({i},{j})", float(table[i, j]), float(expected[i, j]))
            for i in range(table.shape[0])
            for j in range(table.shape[1])
        )
        out[pair] = GofReport(stat, dof, p, bins)
    return out


def _cap_for(values: Sequence[int], n: int) -> int:
    counts = Counter(values)
    cap = 0
    running = n
    while running - counts.get(cap, 0) >= _MIN_EXPECTED and cap < max(values or [0]):
        running -= counts.get(cap, 0)
        cap += 1
    return max(cap, 1)


# ---------------------------------------------------------------------------
# dynamics invariance
# ---------------------------------------------------------------------------

def block_frequencies(bits: Sequence[int], block_len: int) -> tuple[Counter, int]:
    """Counts of non-overlapping 0/1 blocks; returns (counter, sample size)."""
    counter: Counter = Counter()
    n = 0
    for t in range(0, len(bits) - block_len + 1, block_len):
        counter[tuple(bits[t : t + block_len])] += 1
        n += 1
    return counter, n


def t_invariance_test(
    weights: SolitonWeights,
    steps: int,
    block_len: int,
    n_boxes: int,
    rng,
) -> GofReport:
    """Block-frequency comparison of a stationary window before and after evolution.

    Draws an anti-Palm window, evolves it, and compares the frequencies of
    all non-overlapping blocks over the interior.  The report carries a
    two-sample chi-square and the maximum per-block deviation in Monte-Carlo
    standard errors; exact invariance is replaced by this desk-scale proxy.
    """
    if steps < 1:
        raise PreconditionError("steps must be >= 1")
    rng = _as_rng(rng)
    config = sample_anti_palm(weights, n_boxes, rng)
    evolved = config
    max_soliton = 0
    for _ in range(steps):
        evolved = evolve(evolved)
    if steps > 1:
        # one evolution step is exact right of the leftmost record; deeper
        # iterations can leak boundary effects inward, so trim a margin
        counts = config_soliton_counts(config)
        max_soliton = max(counts, default=0)
    margin = steps * max_soliton * 2
    if margin + block_len > n_boxes:
        raise PreconditionError("window too small for the interior margin")
    before = [config.occupied(z) for z in range(margin, n_boxes)]
    after = [evolved.occupied(z) for z in range(margin, n_boxes)]
    obs_a, n_a = block_frequencies(before, block_len)
    obs_b, n_b = block_frequencies(after, block_len)
    patterns = sorted(set(obs_a) | set(obs_b))
    max_dev = 0.0
    stat = 0.0
    dof = 0
    bins = []
    for pat in patterns:
        o_a, o_b = obs_a.get(pat, 0), obs_b.get(pat, 0)
        p_a, p_b = o_a / n_a, o_b / n_b
        se = math.sqrt(
            p_a * (1 - p_a) / n_a + p_b * (1 - p_b) / n_b
        )
        if se > 0:
            max_dev = max(max_dev, abs(p_a - p_b) / se)
        pooled = (o_a + o_b) / (n_a + n_b)
        e_a, e_b = n_a * pooled, n_b * pooled
        if min(e_a, e_b) >= _MIN_EXPECTED:
            stat += (o_a - e_a) ** 2 / e_a + (o_b - e_b) ** 2 / e_b
            dof += 1
        bins.append(("".join(map(str, pat)), float(o_a), float(o_b)))
    dof = max(dof - 1, 1)
    p = float(sps.chi2.sf(stat, dof))
    return GofReport(stat, dof, p, tuple(bins), max_dev_se=max_dev)


# ---------------------------------------------------------------------------
# component shift under evolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftReport:
    """Whether each trimmed component row is conserved, and its label offset."""

    ok: bool
    offsets: dict[int, int | None] = field(default_factory=dict)


def component_shift_check(config: BallConfig) -> ShiftReport:
    """Check that evolution only translates each component row.

    Decomposes the configuration and its image, anchoring the image at its
    nearest record at or left of the origin, and compares the rows with
    zero padding stripped.
    """
    before = decompose(config)
    image = evolve(config)
    recs = record_positions(image)
    anchor_at = max((r for r in recs if r <= 0), default=recs[0])
    after = decompose(image.shifted(-anchor_at))
    sizes = sorted(set(before.sizes()) | set(after.sizes()))
    ok = True
    offsets: dict[int, int | None] = {}
    for k in sizes:
        t_before = before.trimmed().row(k)
        t_after = after.trimmed().row(k)
        if t_before[1] != t_after[1]:
            ok = False
            offsets[k] = None
        elif t_before[1] == ():
            offsets[k] = None
        else:
            offsets[k] = t_after[0] - t_before[0]
    return ShiftReport(ok, offsets)
