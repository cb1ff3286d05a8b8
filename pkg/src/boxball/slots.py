"""Slot enumeration, slot diagrams, and the excursion <-> diagram bijection.

A k-slot of an excursion is the left record or any head/tail box of depth at
least k inside a strictly larger soliton.  The slot diagram of an excursion
records, per size k, how many k-solitons are appended to (lie strictly
between) consecutive k-slots.  Diagrams of consecutive excursions concatenate
row-wise into the component array of a full configuration.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .core import (
    BallConfig,
    Excursion,
    Soliton,
    excursions_of,
    soliton_decompose,
)
from .errors import PreconditionError, ValidationError


# ---------------------------------------------------------------------------
# slot diagrams
# ---------------------------------------------------------------------------

def slot_sizes(counts_by_level: Sequence[int]) -> tuple[int, ...]:
    """Slot counts (s_1, ..., s_M) implied by soliton totals per size.

    ``counts_by_level[k - 1]`` is the number of k-solitons.  Each m-soliton
    contributes ``2 * (m - k)`` k-slots for every k < m, on top of the single
    record slot.
    """
    M = len(counts_by_level)
    out = []
    for k in range(1, M + 1):
        out.append(
            1 + sum(2 * (m - k) * counts_by_level[m - 1] for m in range(k + 1, M + 1))
        )
    return tuple(out)


@dataclass(frozen=True)
class SlotDiagram:
    """Rows ``rows[k - 1] = (x_k(0), ..., x_k(s_k - 1))`` for k = 1 .. M.

    Rows above M are implicit: one slot, zero solitons.  The empty diagram
    has no rows.
    """

    rows: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        self.validate()

    def validate(self) -> None:
        rows = self.rows
        if any(v < 0 or v != int(v) for row in rows for v in row):
            raise ValidationError("slot counts must be nonnegative integers")
        if not rows:
            return
        if len(rows[-1]) != 1 or rows[-1][0] <= 0:
            raise ValidationError(
                "top row must be a single positive count (maximal size attained)"
            )
        expected = slot_sizes([sum(r) for r in rows])
        for k, row in enumerate(rows, start=1):
            if len(row) != expected[k - 1]:
                raise ValidationError(
                    f"row {k} has {len(row)} slots, consistency requires {expected[k - 1]}"
                )

    @property
    def max_size(self) -> int:
        """Largest soliton size M; 0 for the empty diagram."""
        return len(self.rows)

    def slot_count(self, k: int) -> int:
        """s_k: number of k-slots (1 for every k >= M)."""
        if k > len(self.rows):
            return 1
        return len(self.rows[k - 1])

    def solitons(self, k: int) -> int:
        """Total number of k-solitons encoded."""
        if k > len(self.rows):
            return 0
        return sum(self.rows[k - 1])

    @property
    def half_length(self) -> int:
        """n of the encoded excursion."""
        return sum(k * sum(row) for k, row in enumerate(self.rows, start=1))

    def counts(self) -> dict[int, int]:
        return {
            k: sum(row) for k, row in enumerate(self.rows, start=1) if sum(row) > 0
        }

    def reflected(self) -> SlotDiagram:
        """Reverse every row (the diagram of the mirrored excursion)."""
        return SlotDiagram(tuple(tuple(reversed(r)) for r in self.rows))

    def to_json(self) -> str:
        return json.dumps({"M": self.max_size, "rows": [list(r) for r in self.rows]})

    @classmethod
    def from_json(cls, text: str | bytes) -> SlotDiagram:
        try:
            doc = json.loads(text)
            rows = doc["rows"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValidationError(f"bad slot diagram JSON: {exc}") from exc
        diagram = cls(tuple(tuple(int(v) for v in row) for row in rows))
        if "M" in doc and int(doc["M"]) != diagram.max_size:
            raise ValidationError("declared M does not match rows")
        return diagram


EMPTY_DIAGRAM = SlotDiagram()


# ---------------------------------------------------------------------------
# slots of an excursion
# ---------------------------------------------------------------------------

def _slots_from_solitons(solitons: Iterable[Soliton], k: int) -> list[int]:
    """Positions of the k-slots: the left record at 0 plus deep boxes."""
    out = [0]
    for sol in solitons:
        if sol.k > k:
            out.extend(sol.head[k:])
            out.extend(sol.tail[k:])
    out.sort()
    return out


def slot_positions(excursion: Excursion, k: int) -> tuple[int, ...]:
    """Positions of k-slots, left record first (position 0)."""
    if k < 1:
        raise PreconditionError("k must be >= 1")
    return tuple(_slots_from_solitons(soliton_decompose(excursion), k))


def diagram_from_excursion(excursion: Excursion) -> SlotDiagram:
    """Slot diagram encoding an excursion: top-down count of appended solitons."""
    solitons = soliton_decompose(excursion)
    if not solitons:
        return EMPTY_DIAGRAM
    M = max(s.k for s in solitons)
    right_record = 2 * excursion.n + 1
    rows: list[tuple[int, ...]] = [()] * M
    for k in range(M, 0, -1):
        pos = _slots_from_solitons(solitons, k)
        row = [0] * len(pos)
        for sol in solitons:
            if sol.k != k:
                continue
            lo = min(sol.head[0], sol.tail[0])
            hi = max(sol.head[-1], sol.tail[-1])
            j = bisect.bisect_left(pos, lo) - 1
            nxt = pos[j + 1] if j + 1 < len(pos) else right_record
            if not (pos[j] < lo and hi < nxt):
                raise ValidationError(
                    f"{k}-soliton support not contained between consecutive slots"
                )
            row[j] += 1
        rows[k - 1] = tuple(row)
    return SlotDiagram(tuple(rows))


# ---------------------------------------------------------------------------
# building excursions from diagrams
# ---------------------------------------------------------------------------

class _Builder:
    """Grows an excursion by soliton insertions, tracking soliton coordinates.

    Tracking avoids re-identifying solitons after every insertion; the
    excursion <-> diagram round-trip tests pin this against the independent
    decomposition route.
    """

    __slots__ = ("bits", "solitons")

    def __init__(self):
        self.bits: list[int] = []
        self.solitons: list[list] = []  # [k, head list, tail list]

    def slots(self, k: int) -> list[int]:
        out = [0]
        for m, head, tail in self.solitons:
            if m > k:
                out.extend(head[k:])
                out.extend(tail[k:])
        out.sort()
        return out

    def insert(self, k: int, u: int) -> None:
        """Insert one k-soliton right after position u (a k-slot)."""
        val = self.bits[u - 1] if u >= 1 else 0
        for _, head, tail in self.solitons:
            for coords in (head, tail):
                for i, c in enumerate(coords):
                    if c > u:
                        coords[i] = c + 2 * k
        first = list(range(u + 1, u + k + 1))
        second = list(range(u + k + 1, u + 2 * k + 1))
        if val == 0:
            head, tail = first, second
        else:
            tail, head = first, second
        self.solitons.append([k, head, tail])
        self.bits[u:u] = [1 - val] * k + [val] * k


def excursion_from_diagram(diagram: SlotDiagram) -> Excursion:
    """Inverse of :func:`diagram_from_excursion`.

    Works top-down from the largest size; within one size, slots are filled
    from the highest label to the lowest, so previously computed slot
    positions stay valid.
    """
    diagram.validate()
    builder = _Builder()
    for k in range(diagram.max_size, 0, -1):
        row = diagram.rows[k - 1]
        pos = builder.slots(k)
        if len(pos) != len(row):
            raise ValidationError("slot count mismatch while rebuilding")
        for j in range(len(row) - 1, -1, -1):
            for _ in range(row[j]):
                builder.insert(k, pos[j])
    return Excursion.from_balls(builder.bits)


def insert_soliton(config: BallConfig, k: int, j: int) -> BallConfig:
    """Insert one k-soliton at k-slot j of a configuration with no smaller solitons.

    The configuration is read as an excursion whose left record sits at
    ``origin - 1``.
    """
    if k < 1:
        raise PreconditionError("k must be >= 1")
    try:
        exc = Excursion.from_balls(config.bits)
    except ValidationError as e:
        raise PreconditionError(f"window is not an excursion image: {e}") from e
    solitons = soliton_decompose(exc)
    if any(s.k < k for s in solitons):
        raise PreconditionError(f"configuration contains solitons smaller than {k}")
    pos = _slots_from_solitons(solitons, k)
    if not 0 <= j < len(pos):
        raise PreconditionError(f"slot index {j} out of range (s_k = {len(pos)})")
    u = pos[j]
    bits = list(config.bits)
    val = bits[u - 1] if u >= 1 else 0
    bits[u:u] = [1 - val] * k + [val] * k
    return BallConfig(config.origin, tuple(bits))


# ---------------------------------------------------------------------------
# component arrays
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentArray:
    """Windowed rows ``row k = (offset, values)``: values[j] counts k-solitons
    appended to k-slot ``offset + j`` of a configuration; zero outside.
    """

    rows: tuple[tuple[int, int, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        seen = set()
        for k, _, values in self.rows:
            if k < 1 or k in seen:
                raise ValidationError("rows must have distinct sizes k >= 1")
            seen.add(k)
            if any(v < 0 for v in values):
                raise ValidationError("component counts must be >= 0")
        object.__setattr__(self, "rows", tuple(sorted(self.rows)))

    @classmethod
    def from_dict(cls, data: Mapping[int, tuple[int, Sequence[int]]]) -> ComponentArray:
        return cls(
            tuple((k, off, tuple(vals)) for k, (off, vals) in sorted(data.items()))
        )

    def sizes(self) -> tuple[int, ...]:
        return tuple(k for k, _, _ in self.rows)

    def row(self, k: int) -> tuple[int, tuple[int, ...]]:
        for kk, off, values in self.rows:
            if kk == k:
                return off, values
        return 0, ()

    def value(self, k: int, j: int) -> int:
        off, values = self.row(k)
        if off <= j < off + len(values):
            return values[j - off]
        return 0

    def trimmed(self) -> ComponentArray:
        """Drop zero rows and strip leading/trailing zeros of each row."""
        rows = []
        for k, off, values in self.rows:
            nz = [j for j, v in enumerate(values) if v]
            if not nz:
                continue
            rows.append((k, off + nz[0], tuple(values[nz[0] : nz[-1] + 1])))
        return ComponentArray(tuple(rows))

    def same_as(self, other: ComponentArray) -> bool:
        """Equality up to zero padding."""
        return self.trimmed() == other.trimmed()

    def to_json(self) -> str:
        return json.dumps(
            {
                str(k): {"offset": off, "values": list(vals)}
                for k, off, vals in self.rows
            }
        )

    @classmethod
    def from_json(cls, text: str | bytes) -> ComponentArray:
        try:
            doc = json.loads(text)
            rows = tuple(
                (int(k), int(entry["offset"]), tuple(int(v) for v in entry["values"]))
                for k, entry in doc.items()
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad component array JSON: {exc}") from exc
        return cls(rows)


def concat_diagrams(
    diagrams: Sequence[SlotDiagram], i_lo: int = 0
) -> ComponentArray:
    """Join the rows of consecutive slot diagrams into one component array.

    Diagram ``i_lo + t`` occupies, on row k, the ``s_k`` labels starting at
    the cumulative slot count of its predecessors; diagram 0 starts at label
    0.  Empty diagrams, including those implicit outside the window, consume
    one label per row.
    """
    K = max((d.max_size for d in diagrams), default=0)
    i_hi = i_lo + len(diagrams) - 1
    rows = []
    for k in range(1, K + 1):
        if i_lo <= 0:
            in_window = diagrams[: min(-i_lo, len(diagrams))]
            gap = max(0, -(i_hi + 1))  # implicit empties between the window and 0
            offset = -(sum(d.slot_count(k) for d in in_window) + gap)
        else:
            offset = i_lo  # implicit empties at indices 0 .. i_lo - 1
        values: list[int] = []
        for d in diagrams:
            if k <= d.max_size:
                values.extend(d.rows[k - 1])
            else:
                values.append(0)
        rows.append((k, offset, tuple(values)))
    return ComponentArray(tuple(rows))


class _RowCursor:
    """Reads one component row left-to-right (or mirrored) from its window."""

    __slots__ = ("values", "offset", "pos", "mirror")

    def __init__(self, offset: int, values: tuple[int, ...], mirror: bool):
        self.values = values
        self.offset = offset
        self.pos = 0
        self.mirror = mirror

    def peek(self, j: int) -> int:
        label = -1 - (self.pos + j) if self.mirror else self.pos + j
        idx = label - self.offset
        if 0 <= idx < len(self.values):
            return self.values[idx]
        return 0

    def advance(self, count: int) -> None:
        self.pos += count

    def exhausted(self) -> bool:
        """True when every remaining readable label holds a zero."""
        if self.mirror:
            hi = -self.pos - self.offset  # labels <= -1-pos live at indices < hi
            if hi <= 0:
                return True
            return all(v == 0 for v in self.values[: min(hi, len(self.values))])
        lo = self.pos - self.offset
        if lo >= len(self.values):
            return True
        return all(v == 0 for v in self.values[max(lo, 0) :])


def _read_diagrams(cursors: dict[int, _RowCursor]) -> list[SlotDiagram]:
    out = []
    while any(not c.exhausted() for c in cursors.values()):
        m = 0
        for k, cur in cursors.items():
            if cur.peek(0) > 0:
                m = max(m, k)
        if m == 0:
            for cur in cursors.values():
                cur.advance(1)
            out.append(EMPTY_DIAGRAM)
            continue
        counts = [0] * m
        counts[m - 1] = cursors[m].peek(0)
        rows: list[tuple[int, ...]] = [()] * m
        rows[m - 1] = (counts[m - 1],)
        for k in range(m - 1, 0, -1):
            s_k = 1 + sum(2 * (l - k) * counts[l - 1] for l in range(k + 1, m + 1))
            cur = cursors.get(k)
            row = tuple(cur.peek(j) if cur else 0 for j in range(s_k))
            rows[k - 1] = row
            counts[k - 1] = sum(row)
        for k, cur in cursors.items():
            cur.advance(len(rows[k - 1]) if k <= m else 1)
        out.append(SlotDiagram(tuple(rows)))
    return out


def diagrams_from_components(
    components: ComponentArray,
) -> tuple[int, tuple[SlotDiagram, ...]]:
    """Split a component array back into per-excursion slot diagrams.

    Nonnegative indices are read left-to-right starting at label 0; negative
    ones come from the mirrored array, each recovered diagram reflected back.
    Returns ``(i_lo, diagrams)`` covering every diagram that consumes a
    nonzero entry; all others are empty.
    """
    right = {
        k: _RowCursor(off, vals, mirror=False) for k, off, vals in components.rows
    }
    left = {
        k: _RowCursor(off, vals, mirror=True) for k, off, vals in components.rows
    }
    right_diagrams = _read_diagrams(right)
    left_diagrams = [d.reflected() for d in _read_diagrams(left)]
    diagrams = tuple(reversed(left_diagrams)) + tuple(right_diagrams)
    return -len(left_diagrams), diagrams


# ---------------------------------------------------------------------------
# full configurations
# ---------------------------------------------------------------------------

def decompose(config: BallConfig) -> ComponentArray:
    """Component array of a configuration with a record at box 0.

    Computed exactly as defined: per-excursion slot diagrams, concatenated.
    """
    i_lo, excs = excursions_of(config)
    return concat_diagrams([diagram_from_excursion(e) for e in excs], i_lo)


def reconstruct(components: ComponentArray) -> BallConfig:
    """Configuration with record 0 at the origin whose decomposition is given.

    Inverse of :func:`decompose` up to zero padding of the array window.
    """
    i_lo, diagrams = diagrams_from_components(components)
    excs = [excursion_from_diagram(d) for d in diagrams]
    start = -sum(2 * e.n + 1 for e in excs[: -i_lo])
    bits: list[int] = []
    for e in excs:
        bits.append(0)
        bits.extend(e.balls())
    bits.append(0)
    return BallConfig(start, tuple(bits))
