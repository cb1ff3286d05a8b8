"""Ball configurations, walks, records, carrier dynamics, and soliton identification.

A configuration is a 0/1 occupancy of the integer lattice with finite support,
stored as a window of bits plus implicit zero padding.  The associated walk
steps up at occupied boxes and down at empty ones; its strict running minima
are the records, which split the configuration into finite excursions.  The
Takahashi-Satsuma algorithm identifies the conserved solitons of an excursion
by repeatedly pairing the leftmost smallest run with the start of its
successor run.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import PreconditionError, ValidationError


# ---------------------------------------------------------------------------
# configurations and walks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BallConfig:
    """Finite occupancy window; every box outside the window is empty.

    ``bits[i]`` is the content of box ``origin + i``.
    """

    origin: int = 1
    bits: tuple[int, ...] = ()

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValidationError("box contents must be 0 or 1")

    @classmethod
    def from_string(cls, text: str, origin: int = 1) -> BallConfig:
        text = text.strip()
        if not set(text) <= {"0", "1"}:
            raise ValidationError(f"ball string must be over 0/1, got {text!r}")
        return cls(origin, tuple(int(c) for c in text))

    def to_string(self) -> str:
        return "".join(map(str, self.bits))

    @property
    def end(self) -> int:
        """Last window box; ``origin - 1`` when the window is empty."""
        return self.origin + len(self.bits) - 1

    def occupied(self, z: int) -> int:
        if self.origin <= z <= self.end:
            return self.bits[z - self.origin]
        return 0

    def ball_count(self) -> int:
        return sum(self.bits)

    def ball_boxes(self) -> tuple[int, ...]:
        return tuple(self.origin + i for i, b in enumerate(self.bits) if b)

    def shifted(self, delta: int) -> BallConfig:
        return BallConfig(self.origin + delta, self.bits)

    def trimmed(self) -> BallConfig:
        """Minimal window covering the support (canonical form for equality)."""
        balls = self.ball_boxes()
        if not balls:
            return BallConfig(1, ())
        lo, hi = balls[0], balls[-1]
        return BallConfig(lo, self.bits[lo - self.origin : hi - self.origin + 1])


@dataclass(frozen=True)
class Walk:
    """Height process of a configuration: one +/-1 step per window box.

    ``base`` is the height just left of the window, normalized so the height
    at box 0 is zero.
    """

    origin: int
    base: int
    steps: tuple[int, ...]

    def heights(self) -> tuple[int, ...]:
        """Heights at boxes ``origin - 1 .. origin - 1 + len(steps)``."""
        out = [self.base]
        for s in self.steps:
            out.append(out[-1] + s)
        return tuple(out)


def walk_from_balls(config: BallConfig) -> Walk:
    """Walk with step ``2 * bit - 1`` per box, anchored so height(0) = 0."""
    balls_upto_0 = sum(
        b for i, b in enumerate(config.bits) if config.origin + i <= 0
    )
    base = -2 * balls_upto_0 - (config.origin - 1)
    return Walk(config.origin, base, tuple(2 * b - 1 for b in config.bits))


def balls_from_walk(walk: Walk) -> BallConfig:
    """Inverse of :func:`walk_from_balls`."""
    if any(s not in (-1, 1) for s in walk.steps):
        raise ValidationError("walk steps must be +/-1")
    return BallConfig(walk.origin, tuple((s + 1) // 2 for s in walk.steps))


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

def record_positions(config: BallConfig) -> tuple[int, ...]:
    """All records in ``[origin - 1, R]`` where R is the first record past the window.

    Every box left of ``origin - 1`` is a record, and so is every box right
    of the last returned position; the returned range is therefore a complete
    description of the record set.
    """
    walk = walk_from_balls(config)
    heights = walk.heights()
    out = [config.origin - 1]
    running = heights[0]
    for i, h in enumerate(heights[1:]):
        if h < running:
            out.append(config.origin + i)
            running = h
    first_right = config.end + (heights[-1] - running) + 1
    if first_right > config.end:
        out.append(first_right)
    return tuple(out)


def record_position(config: BallConfig, i: int) -> int:
    """Position of record ``i``: the first box where the walk reaches ``-i``."""
    recs = record_positions(config)
    heights = walk_from_balls(config).heights()

    def height_at(z: int) -> int:
        if z <= config.origin - 1:
            return heights[0] + (config.origin - 1 - z)
        if z <= config.end:
            return heights[z - (config.origin - 1)]
        return heights[-1] - (z - config.end)

    index_of = {r: -height_at(r) for r in recs}
    left_i, right_i = index_of[recs[0]], index_of[recs[-1]]
    if i <= left_i:
        return recs[0] - (left_i - i)
    if i >= right_i:
        return recs[-1] + (i - right_i)
    for r in recs:
        if index_of[r] == i:
            return r
    raise PreconditionError(f"record {i} not located")


def is_record(config: BallConfig, z: int) -> bool:
    recs = record_positions(config)
    if z < recs[0] or z > recs[-1]:
        return True
    return z in set(recs)


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

def evolve(config: BallConfig, steps: int = 1) -> BallConfig:
    """One carrier sweep per step: records stay empty, every other box flips.

    The output window keeps the input origin and grows to the right as far
    as balls travel.
    """
    if steps < 0:
        raise PreconditionError("steps must be >= 0")
    out = config
    for _ in range(steps):
        recs = record_positions(out)
        rec_set = set(recs)
        hi = recs[-1] - 1
        bits = [
            0 if z in rec_set else 1 - out.occupied(z)
            for z in range(out.origin, hi + 1)
        ]
        while len(bits) > len(out.bits) and bits and bits[-1] == 0:
            bits.pop()
        out = BallConfig(out.origin, tuple(bits))
    return out


def carrier_trace(config: BallConfig) -> tuple[int, ...]:
    """Carrier load after visiting each box, starting empty left of the window.

    The trace covers the window and, if the carrier is still loaded at the
    window end, continues until it has deposited everything, so the final
    load is always zero.
    """
    loads = []
    load = 0
    for b in config.bits:
        load = load + 1 if b else max(load - 1, 0)
        loads.append(load)
    while load > 0:
        load -= 1
        loads.append(load)
    return tuple(loads)


# ---------------------------------------------------------------------------
# excursions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Excursion:
    """Nonnegative +/-1 walk segment from 0 back to 0, of length ``2n``."""

    steps: tuple[int, ...] = ()

    def __post_init__(self):
        h = 0
        for s in self.steps:
            if s not in (-1, 1):
                raise ValidationError("excursion steps must be +/-1")
            h += s
            if h < 0:
                raise ValidationError("excursion dips below zero")
        if h != 0:
            raise ValidationError("excursion must end at height zero")

    @classmethod
    def from_balls(cls, balls: Sequence[int]) -> Excursion:
        return cls(tuple(2 * int(b) - 1 for b in balls))

    @classmethod
    def from_string(cls, text: str) -> Excursion:
        return cls.from_balls([int(c) for c in text.strip()])

    @property
    def n(self) -> int:
        """Half-length: the number of balls."""
        return len(self.steps) // 2

    def balls(self) -> tuple[int, ...]:
        return tuple((s + 1) // 2 for s in self.steps)

    def ball_string(self) -> str:
        return "".join(str((s + 1) // 2) for s in self.steps)

    def heights(self) -> tuple[int, ...]:
        out = [0]
        for s in self.steps:
            out.append(out[-1] + s)
        return tuple(out)

    def to_config(self, origin: int = 1) -> BallConfig:
        """Ball configuration occupying boxes ``origin .. origin + 2n - 1``."""
        return BallConfig(origin, self.balls())


EMPTY_EXCURSION = Excursion()


def excursions_of(config: BallConfig) -> tuple[int, tuple[Excursion, ...]]:
    """Split a configuration with a record at 0 into its indexed excursions.

    Returns ``(i_lo, excursions)`` where excursion ``i_lo + j`` lies between
    records ``i_lo + j`` and ``i_lo + j + 1``; the covered range spans the
    whole support, and every excursion outside it is empty.
    """
    recs = record_positions(config)
    if 0 < recs[0]:
        recs = tuple(range(0, recs[0])) + recs  # implicit records left of the window
    elif 0 > recs[-1]:
        recs = recs + tuple(range(recs[-1] + 1, 1))  # implicit records to the right
    elif 0 not in set(recs):
        raise PreconditionError("box 0 must be a record")
    i_lo = -(sum(1 for r in recs if r < 0))
    out = []
    for a, b in zip(recs, recs[1:]):
        out.append(Excursion.from_balls([config.occupied(z) for z in range(a + 1, b)]))
    return i_lo, tuple(out)


# ---------------------------------------------------------------------------
# Takahashi-Satsuma soliton identification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Soliton:
    """k balls plus k empty boxes, heads and tails each strictly increasing."""

    k: int
    head: tuple[int, ...]
    tail: tuple[int, ...]

    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.head + self.tail))


class _Run:
    """Node of the doubly-linked run list used by the decomposition."""

    __slots__ = ("value", "boxes", "prev", "next", "infinite", "virtual_next")

    def __init__(self, value, boxes, infinite=False, virtual_next=None):
        self.value = value
        self.boxes = deque(boxes)
        self.prev = None
        self.next = None
        self.infinite = infinite
        self.virtual_next = virtual_next  # next synthesized box position

    @property
    def size(self) -> int:
        return len(self.boxes)

    def first_box(self) -> int:
        return self.boxes[0]

    def take_first(self, k: int) -> list[int]:
        out = []
        for _ in range(k):
            if self.boxes:
                out.append(self.boxes.popleft())
            else:
                if not self.infinite:
                    raise PreconditionError("run exhausted; not an excursion")
                out.append(self.virtual_next)
                self.virtual_next += 1
        return out


def soliton_decompose(excursion: Excursion) -> tuple[Soliton, ...]:
    """Unique soliton decomposition of an excursion.

    Repeatedly selects the leftmost smallest finite run, pairs its k boxes
    with the first k boxes of the successor run, and removes both from the
    configuration.  Runs are maintained incrementally in a linked list with a
    lazily invalidated heap rather than rescanned, so degenerate inputs stay
    near O(n log n).
    """
    balls = excursion.balls()
    L = len(balls)
    left = _Run(0, (), infinite=True)
    right = _Run(0, (), infinite=True, virtual_next=L + 1)
    runs: list[_Run] = [left]
    for pos, val in enumerate(balls, start=1):
        if runs[-1].value == val:
            runs[-1].boxes.append(pos)
        else:
            runs.append(_Run(val, [pos]))
    if runs[-1].value == 0:
        right.boxes = runs.pop().boxes
        right.virtual_next = L + 1
    runs.append(right)
    for a, b in zip(runs, runs[1:]):
        a.next = b
        b.prev = a

    heap: list[tuple[int, int, int]] = []
    alive: dict[int, _Run] = {}

    def push(run: _Run) -> None:
        if run.infinite or run.size == 0:
            return
        alive[id(run)] = run
        heapq.heappush(heap, (run.size, run.first_box(), id(run)))

    for r in runs:
        push(r)

    solitons = []
    while heap:
        size, first, rid = heapq.heappop(heap)
        run = alive.get(rid)
        if run is None or run.size != size or run.first_box() != first:
            continue  # stale heap entry
        succ = run.next
        taken = succ.take_first(size)
        boxes = list(run.boxes)
        if run.value == 1:
            head, tail = boxes, taken
        else:
            head, tail = taken, boxes
        solitons.append(Soliton(size, tuple(head), tuple(tail)))
        # unlink the consumed run; its neighbours now touch and, unless the
        # successor was consumed entirely, carry the same value and merge
        alive.pop(rid, None)
        prev = run.prev
        prev.next = succ
        succ.prev = prev
        if succ.size == 0 and not succ.infinite:
            alive.pop(id(succ), None)
            nxt = succ.next
            prev.next = nxt
            nxt.prev = prev
        else:
            alive.pop(id(succ), None)
            alive.pop(id(prev), None)
            if prev.infinite:
                prev.boxes.extend(succ.boxes)
                if succ.infinite:
                    prev.virtual_next = succ.virtual_next
                nxt = succ.next
                prev.next = nxt
                if nxt is not None:
                    nxt.prev = prev
            elif succ.infinite:
                succ.boxes.extendleft(reversed(prev.boxes))
                p2 = prev.prev
                p2.next = succ
                succ.prev = p2
            else:
                prev.boxes.extend(succ.boxes)
                nxt = succ.next
                prev.next = nxt
                nxt.prev = prev
                push(prev)
    return tuple(sorted(solitons, key=lambda s: (min(s.support()), s.k)))


def soliton_counts(excursion: Excursion) -> dict[int, int]:
    """Number of k-solitons per size k; sizes with zero count are omitted."""
    counts: dict[int, int] = {}
    for sol in soliton_decompose(excursion):
        counts[sol.k] = counts.get(sol.k, 0) + 1
    return counts


def config_soliton_counts(config: BallConfig) -> dict[int, int]:
    """Soliton counts of a full configuration, accumulated per excursion."""
    base = config if is_record(config, 0) else config.shifted(-record_positions(config)[0])
    _, excs = excursions_of(base)
    counts: dict[int, int] = {}
    for exc in excs:
        for k, c in soliton_counts(exc).items():
            counts[k] = counts.get(k, 0) + c
    return counts


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def catalan_number(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def narayana_number(n: int, k: int) -> int:
    """Count of excursions of half-length n with exactly k peaks."""
    if not 1 <= k <= n:
        return 0
    return math.comb(n, k) * math.comb(n, k - 1) // n


def enumerate_excursions(n: int) -> Iterator[Excursion]:
    """All excursions of half-length n, via the first-return decomposition."""

    def paths(m: int) -> Iterator[tuple[int, ...]]:
        if m == 0:
            yield ()
            return
        for i in range(m):
            for inner in paths(i):
                for rest in paths(m - 1 - i):
                    yield (1,) + inner + (-1,) + rest

    for p in paths(n):
        yield Excursion(p)
