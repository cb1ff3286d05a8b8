"""Excursion measures: soliton-weight and geometric-slot parameterizations.

The first family weighs an excursion by ``prod_k alpha_k^(number of
k-solitons)`` and normalizes by the partition function Z.  The second fills
each k-slot with a Geometric(1 - q_k) number of k-solitons, top row
conditioned positive.  The two families coincide under an explicit, invertible
parameter transform, which this module implements together with partition
functions (closed form and series oracles), exact samplers, and the expected
slot-count recursion.

Probabilities are accumulated in log space; the parameter transform runs on
direct running products for precision, falling back to logs on underflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Excursion, catalan_number, narayana_number, soliton_counts
from .errors import DivergenceError, PreconditionError, ValidationError
from .slots import SlotDiagram, excursion_from_diagram

_TAIL_TOL = 1e-12
_MAX_LEVELS = 5000


# ---------------------------------------------------------------------------
# parameter families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometricLaw:
    """P(Y = j) = p * (1 - p)^j on j = 0, 1, 2, ...; mean (1 - p) / p."""

    p: float

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValidationError("geometric parameter must lie in (0, 1]")

    def pmf(self, j: int) -> float:
        return self.p * (1 - self.p) ** j if j >= 0 else 0.0

    @property
    def mean(self) -> float:
        return (1 - self.p) / self.p

    def sample(self, rng: np.random.Generator, size: int | None = None):
        return rng.geometric(self.p, size=size) - 1


@dataclass(frozen=True)
class GeometricTail:
    """Analytic continuation ``alpha_k = coef * ratio**k`` past the explicit head.

    ``partition`` is the exact partition function of the full weight family
    and ``fill_ratio`` a strict upper bound on consecutive slot-parameter
    ratios q_{k+1} / q_k, both known in closed form for the supported tails.
    """

    coef: float
    ratio: float
    partition: float
    fill_ratio: float

    def alpha(self, k: int) -> float:
        return self.coef * self.ratio**k


@dataclass(frozen=True)
class SolitonWeights:
    """Per-size weights alpha_k in [0, 1): an explicit head plus optional tail."""

    head: tuple[float, ...] = ()
    tail: GeometricTail | None = None

    def __post_init__(self):
        if any(not 0 <= a < 1 for a in self.head):
            raise ValidationError("weights must lie in [0, 1)")
        if self.tail is None:
            head = self.head
            while head and head[-1] == 0.0:
                head = head[:-1]
            object.__setattr__(self, "head", head)

    def alpha(self, k: int) -> float:
        if k < 1:
            raise PreconditionError("sizes are k >= 1")
        if k <= len(self.head):
            return self.head[k - 1]
        if self.tail is None:
            return 0.0
        return self.tail.alpha(k)

    @property
    def finite_support(self) -> bool:
        return self.tail is None

    def truncated(self, K: int) -> SolitonWeights:
        return SolitonWeights(tuple(self.alpha(k) for k in range(1, K + 1)))


def explicit_weights(values: Sequence[float]) -> SolitonWeights:
    return SolitonWeights(tuple(float(v) for v in values))


def bernoulli_weights(lam: float) -> SolitonWeights:
    """Weights of the excursion law of a walk stepping up with probability lam.

    ``alpha_k = (lam (1 - lam))^k``; the partition function is 1 / (1 - lam).
    Requires ``lam < 1/2`` so the mean excursion length stays finite.
    """
    if not 0 <= lam < 0.5:
        raise PreconditionError("lambda must lie in [0, 1/2)")
    if lam == 0:
        return SolitonWeights(())
    beta = lam * (1 - lam)
    return SolitonWeights(
        (),
        GeometricTail(
            coef=1.0,
            ratio=beta,
            partition=1.0 / (1 - lam),
            fill_ratio=lam / (1 - lam),
        ),
    )


def markov_weights(q_matrix: Sequence[Sequence[float]]) -> SolitonWeights:
    """Weights of the excursion law of a stationary two-state chain.

    For transition matrix Q with Q(0,1) < Q(1,0) (ball density below 1/2):
    ``alpha_k = a b^k`` with ``a = Q(0,1)Q(1,0) / (Q(1,1)Q(0,0))`` and
    ``b = Q(1,1)Q(0,0)``; the partition function is 1 / Q(0,0).
    """
    q = [[float(v) for v in row] for row in q_matrix]
    if len(q) != 2 or any(len(row) != 2 for row in q):
        raise ValidationError("transition matrix must be 2x2")
    if any(v < 0 for row in q for v in row):
        raise ValidationError("transition probabilities must be >= 0")
    if abs(sum(q[0]) - 1) > 1e-12 or abs(sum(q[1]) - 1) > 1e-12:
        raise ValidationError("rows must sum to 1")
    q00, q01 = q[0]
    q10, q11 = q[1]
    if not q01 < q10:
        raise PreconditionError("need Q(0,1) < Q(1,0) for density below 1/2")
    if q11 == 0.0:
        # no two consecutive balls: only 1-solitons, alpha_1 = lim a b
        return SolitonWeights((q01 * q10,))
    a = q01 * q10 / (q11 * q00)
    b = q11 * q00
    return SolitonWeights(
        (),
        GeometricTail(coef=a, ratio=b, partition=1.0 / q00, fill_ratio=q11 / q00),
    )


def weights_from_params_json(text: str | bytes) -> SolitonWeights:
    """Parameter file loader: bernoulli / markov / explicit families."""
    try:
        doc = json.loads(text)
        family = doc["family"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValidationError(f"bad parameter JSON: {exc}") from exc
    if family == "bernoulli":
        return bernoulli_weights(float(doc["lambda"]))
    if family == "markov":
        return markov_weights(doc["Q"])
    if family == "explicit":
        return explicit_weights(doc["alpha"])
    raise ValidationError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# the parameter transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlotFill:
    """Finite vector of slot parameters q_k in [0, 1); zero beyond the support."""

    q: tuple[float, ...] = ()

    def __post_init__(self):
        if any(not 0 <= v < 1 for v in self.q):
            raise ValidationError("slot parameters must lie in [0, 1)")
        q = self.q
        while q and q[-1] == 0.0:
            q = q[:-1]
        object.__setattr__(self, "q", q)

    @property
    def levels(self) -> int:
        return len(self.q)

    def at(self, k: int) -> float:
        return self.q[k - 1] if 1 <= k <= len(self.q) else 0.0

    def mean_fill(self, k: int) -> float:
        """Mean number of solitons per k-slot: q_k / (1 - q_k)."""
        qk = self.at(k)
        return qk / (1 - qk)


def fill_from_weights(
    weights: SolitonWeights, levels: int | None = None, tol: float = _TAIL_TOL
) -> SlotFill:
    """Slot parameters of the weight family: q_1 = alpha_1 and
    ``q_k = alpha_k / prod_{j<k} (1 - q_j)^(2(k-j))``.

    With an analytic tail the truncation level is chosen so the dropped mass
    ``sum_{k > K} q_k`` is provably below ``tol``; raises when some q_k >= 1
    (diverging partition function, weights outside the admissible set at this
    truncation).
    """
    if levels is None and weights.finite_support:
        levels = len(weights.head)
    out = []
    prod = 1.0  # prod_{j<=k} (1 - q_j)
    denom = 1.0  # prod_{j<k} (1 - q_j)^(2(k-j)) for the current k
    log_prod = 0.0  # log-space shadows, used when the products underflow
    log_denom = 0.0
    k = 0
    while True:
        k += 1
        if levels is not None and k > levels:
            break
        if levels is None and k > _MAX_LEVELS:
            raise DivergenceError("slot parameters do not decay; truncation failed")
        a = weights.alpha(k)
        if a == 0.0:
            qk = 0.0
        else:
            qk = a / denom if denom > 0.0 else math.exp(math.log(a) - log_denom)
            if qk >= 1.0:
                raise DivergenceError(
                    f"q_{k} >= 1: weights outside the admissible set "
                    f"(checked up to level {k})"
                )
        out.append(qk)
        prod *= 1.0 - qk
        denom *= prod * prod
        log_prod += math.log1p(-qk)
        log_denom += 2 * log_prod
        if levels is None and weights.tail is not None:
            r = weights.tail.fill_ratio
            if qk == 0.0 or (r < 1 and qk * r / (1 - r) < tol):
                break
    return SlotFill(tuple(out))


def weights_from_fill(fill: SlotFill) -> SolitonWeights:
    """Inverse transform: ``alpha_k = q_k prod_{l<k} (1 - q_l)^(2(k-l))``."""
    out = []
    prod = 1.0
    factor = 1.0
    for k in range(1, fill.levels + 1):
        qk = fill.at(k)
        out.append(qk * factor)
        prod *= 1.0 - qk
        factor *= prod * prod
    return SolitonWeights(tuple(out))


def shift_weights(alpha: Sequence[float]) -> tuple[float, ...]:
    """One application of the level-shift operator:
    ``(theta alpha)_k = alpha_{k+1} / (1 - alpha_1)^(2k)``.

    Iterating it exposes the slot parameters as q_k = (theta^(k-1) alpha)_1.
    """
    if not alpha:
        return ()
    a1 = alpha[0]
    if not 0 <= a1 < 1:
        raise DivergenceError("leading weight must lie in [0, 1)")
    return tuple(
        alpha[k + 1] / (1 - a1) ** (2 * (k + 1)) for k in range(len(alpha) - 1)
    )


def in_admissible_set(weights: SolitonWeights, levels: int | None = None) -> bool:
    """Whether the partition function converges, checked up to truncation.

    For explicit finite vectors this is exact; analytic tails use their known
    geometric decay.  Membership of arbitrary infinite families can only be
    certified up to the inspected level.
    """
    try:
        fill_from_weights(weights, levels)
        return True
    except DivergenceError:
        return False


# ---------------------------------------------------------------------------
# partition functions
# ---------------------------------------------------------------------------

def log_partition(weights: SolitonWeights, levels: int | None = None) -> float:
    fill = fill_from_weights(weights, levels)
    return -sum(math.log1p(-q) for q in fill.q)


def partition_function(weights: SolitonWeights, levels: int | None = None) -> float:
    """Z as the closed product ``prod_k (1 - q_k)^(-1)`` over the transform."""
    return math.exp(log_partition(weights, levels))


def partition_level(weights: SolitonWeights, m: int, levels: int | None = None) -> float:
    """Total weight of excursions whose largest soliton has size m.

    ``Z^0 = 1`` and ``Z^m = q_m prod_{j<=m} (1 - q_j)^(-1)``; the levels sum
    back to Z.
    """
    if m == 0:
        return 1.0
    fill = fill_from_weights(weights, levels)
    if m > fill.levels:
        return 0.0
    log_z = math.log(fill.at(m)) if fill.at(m) > 0 else -math.inf
    log_z -= sum(math.log1p(-fill.at(j)) for j in range(1, m + 1))
    return math.exp(log_z)


@dataclass(frozen=True)
class SeriesResult:
    """Partial sum over excursions of half-length <= n_max plus a tail bound."""

    value: float
    tail_bound: float
    n_max: int


def _profile_series(alpha: tuple[float, ...], n_max: int) -> float:
    """Sum of excursion weights grouped by soliton-count profile.

    A profile (n_1, ..., n_K) occurs in exactly ``prod_k C(n_k + s_k - 1,
    n_k)`` excursions, with s_k the slot counts implied by the higher levels;
    the grouped sum avoids enumerating excursions one by one.
    """
    K = len(alpha)
    total = 0.0

    def rec(k: int, budget: int, weight: float, counts: list[int]) -> None:
        nonlocal total
        if k == 0:
            total += weight
            return
        a = alpha[k - 1]
        s_k = 1 + sum(2 * (m - k) * counts[m - 1] for m in range(k + 1, K + 1))
        limit = budget // k if a > 0 else 0
        for n_k in range(limit + 1):
            counts[k - 1] = n_k
            w = weight * a**n_k * math.comb(n_k + s_k - 1, n_k)
            if w == 0.0 and n_k > 0:
                break
            rec(k - 1, budget - k * n_k, w, counts)
        counts[k - 1] = 0

    rec(K, n_max, 1.0, [0] * K)
    return total


def partition_series(weights: SolitonWeights, n_max: int) -> SeriesResult:
    """Desk-scale series oracle for Z, summing half-lengths up to ``n_max``.

    Uses the Catalan series for pure-geometric weights, the Narayana series
    for two-parameter geometric weights, and the profile-grouped sum for
    explicit finite vectors.  The tail bound is strict in every case.
    """
    if n_max < 0:
        raise PreconditionError("n_max must be >= 0")
    tail = weights.tail
    if tail is not None and tail.coef == 1.0:
        # weight of an excursion of half-length n is ratio^n: Catalan series
        beta = tail.ratio
        value = sum(catalan_number(n) * beta**n for n in range(n_max + 1))
        if 4 * beta >= 1:
            bound = math.inf
        else:
            bound = catalan_number(n_max + 1) * beta ** (n_max + 1) / (1 - 4 * beta)
        return SeriesResult(value, bound, n_max)
    if tail is not None:
        # weight is coef^(#solitons) * ratio^n; solitons of an excursion are
        # its peaks, counted by the Narayana triangle
        a, b = tail.coef, tail.ratio
        value = 1.0
        for n in range(1, n_max + 1):
            value += b**n * sum(
                narayana_number(n, k) * a**k for k in range(1, n + 1)
            )
        rho = b * (1 + math.sqrt(a)) ** 2
        if rho >= 1:
            bound = math.inf
        else:
            bound = (
                math.sqrt(a)
                * rho ** (n_max + 1)
                / ((n_max + 1) * (1 - rho))
            )
        return SeriesResult(value, bound, n_max)
    alpha = weights.head
    value = _profile_series(alpha, n_max)
    beta = max((a ** (1.0 / k) for k, a in enumerate(alpha, start=1)), default=0.0)
    if beta == 0.0:
        bound = 0.0
    elif 4 * beta >= 1:
        bound = math.inf
    else:
        bound = catalan_number(n_max + 1) * beta ** (n_max + 1) / (1 - 4 * beta)
    return SeriesResult(value, bound, n_max)


def mean_soliton_counts(weights: SolitonWeights, n_max: int) -> dict[int, float]:
    """Series estimate of the mean number of k-solitons per excursion.

    No closed form is available; this enumerates soliton-count profiles up to
    half-length ``n_max`` and normalizes by the matching partial sum.
    """
    alpha = tuple(
        weights.alpha(k) for k in range(1, max(n_max, len(weights.head)) + 1)
    )
    alpha = explicit_weights(alpha).head
    K = len(alpha)
    total = 0.0
    sums: dict[int, float] = {}

    def rec(k: int, budget: int, weight: float, counts: list[int]) -> None:
        nonlocal total
        if k == 0:
            total += weight
            for kk, c in enumerate(counts, start=1):
                if c:
                    sums[kk] = sums.get(kk, 0.0) + c * weight
            return
        a = alpha[k - 1]
        s_k = 1 + sum(2 * (m - k) * counts[m - 1] for m in range(k + 1, K + 1))
        limit = budget // k if a > 0 else 0
        for n_k in range(limit + 1):
            counts[k - 1] = n_k
            w = weight * a**n_k * math.comb(n_k + s_k - 1, n_k)
            if w == 0.0 and n_k > 0:
                break
            rec(k - 1, budget - k * n_k, w, counts)
        counts[k - 1] = 0

    rec(K, n_max, 1.0, [0] * K)
    return {k: v / total for k, v in sums.items()}


# ---------------------------------------------------------------------------
# probabilities
# ---------------------------------------------------------------------------

def excursion_prob(
    weights: SolitonWeights, excursion: Excursion, levels: int | None = None
) -> float:
    """Normalized weight ``prod_k alpha_k^(n_k) / Z`` of one excursion."""
    log_p = -log_partition(weights, levels)
    for k, n_k in soliton_counts(excursion).items():
        a = weights.alpha(k)
        if a == 0.0:
            return 0.0
        log_p += n_k * math.log(a)
    return math.exp(log_p)


def diagram_prob(fill: SlotFill, diagram: SlotDiagram) -> float:
    """Probability ``prod_k q_k^(|x_k|) (1 - q_k)^(s_k)`` of one slot diagram."""
    log_p = 0.0
    for k in range(1, max(fill.levels, diagram.max_size) + 1):
        qk = fill.at(k)
        n_k = diagram.solitons(k)
        if n_k > 0:
            if qk == 0.0:
                return 0.0
            log_p += n_k * math.log(qk)
        log_p += diagram.slot_count(k) * math.log1p(-qk)
    return math.exp(log_p)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def max_size_distribution(fill: SlotFill) -> np.ndarray:
    """P(M = m) = q_m * prod_{l > m} (1 - q_l) for m = 0 .. levels, q_0 = 1."""
    K = fill.levels
    probs = np.empty(K + 1)
    suffix = 1.0
    for m in range(K, -1, -1):
        qm = 1.0 if m == 0 else fill.at(m)
        probs[m] = qm * suffix
        if m > 0:
            suffix *= 1 - fill.at(m)
    total = probs.sum()
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-9):
        raise ValidationError("max-size distribution does not normalize")
    return probs / total


def sample_diagram(fill: SlotFill, rng) -> SlotDiagram:
    """One slot diagram with the geometric row law.

    Chooses the maximal size M, then the top count (geometric conditioned
    positive), then each lower row as s_k independent geometric draws.
    """
    return sample_diagrams(fill, 1, rng)[0]


def sample_diagrams(fill: SlotFill, size: int, rng) -> list[SlotDiagram]:
    rng = _as_rng(rng)
    probs = max_size_distribution(fill)
    ms = rng.choice(fill.levels + 1, size=size, p=probs)
    out = []
    for m in ms:
        m = int(m)
        if m == 0:
            out.append(SlotDiagram())
            continue
        rows: list[tuple[int, ...]] = [()] * m
        rows[m - 1] = (int(rng.geometric(1 - fill.at(m))),)
        counts = [0] * m
        counts[m - 1] = rows[m - 1][0]
        for k in range(m - 1, 0, -1):
            s_k = 1 + sum(2 * (l - k) * counts[l - 1] for l in range(k + 1, m + 1))
            qk = fill.at(k)
            if qk == 0.0:
                row = (0,) * s_k
            else:
                row = tuple(int(v) for v in rng.geometric(1 - qk, size=s_k) - 1)
            rows[k - 1] = row
            counts[k - 1] = sum(row)
        out.append(SlotDiagram(tuple(rows)))
    return out


def sample_excursion(weights: SolitonWeights, rng, fill: SlotFill | None = None) -> Excursion:
    """One excursion with the normalized weight law, drawn through its diagram."""
    if fill is None:
        fill = fill_from_weights(weights)
    return excursion_from_diagram(sample_diagram(fill, rng))


def sample_excursions(
    weights: SolitonWeights, size: int, rng, fill: SlotFill | None = None
) -> list[Excursion]:
    if fill is None:
        fill = fill_from_weights(weights)
    cache: dict[tuple, Excursion] = {}
    out = []
    for diagram in sample_diagrams(fill, size, rng):
        key = diagram.rows
        exc = cache.get(key)
        if exc is None:
            exc = excursion_from_diagram(diagram)
            if len(cache) < 4096:
                cache[key] = exc
        out.append(exc)
    return out


# ---------------------------------------------------------------------------
# expected slot counts
# ---------------------------------------------------------------------------

def expected_slot_counts(fill: SlotFill) -> tuple[tuple[float, ...], float]:
    """Mean slot counts (beta_0, ..., beta_K) and the mean excursion length.

    Solves ``beta_k = 1 + sum_{l>k} 2 (l-k) m_l beta_l`` by back substitution
    from the zero tail; ``beta_0 - 1`` equals the mean excursion length
    ``sum_k 2 k m_k beta_k``.
    """
    K = fill.levels
    betas = [0.0] * (K + 1)
    acc = 0.0  # sum_{l>k} m_l beta_l
    acc_l = 0.0  # sum_{l>k} l m_l beta_l
    for k in range(K, -1, -1):
        b = 1.0 + 2 * acc_l - 2 * k * acc
        betas[k] = b
        if k >= 1:
            m_k = fill.mean_fill(k)
            acc += m_k * b
            acc_l += k * m_k * b
    mean_size = 2 * acc_l
    return tuple(betas), mean_size


def mean_record_gap(weights: SolitonWeights, levels: int | None = None) -> float:
    """Mean distance between consecutive records: one plus the mean excursion length."""
    _, mean_size = expected_slot_counts(fill_from_weights(weights, levels))
    return 1.0 + mean_size


def ball_density(weights: SolitonWeights, levels: int | None = None) -> float:
    """Stationary ball density (kappa - 1) / (2 kappa) of the assembled line."""
    kappa = mean_record_gap(weights, levels)
    return (kappa - 1) / (2 * kappa)
