import pytest
from hypothesis import given
import hypothesis.strategies as st

from boxball import (
    BallConfig,
    Excursion,
    PreconditionError,
    ValidationError,
    balls_from_walk,
    carrier_trace,
    catalan_number,
    config_soliton_counts,
    enumerate_excursions,
    evolve,
    excursions_of,
    is_record,
    record_position,
    record_positions,
    soliton_counts,
    soliton_decompose,
    walk_from_balls,
)

import oracles

CARRIER_INPUT = "01101011010001111010000"
CARRIER_LOAD = "01212123232101234343210"
CARRIER_OUTPUT = "00010100101110000101111"

# excursion of the sample decomposition figure, rebuilt from its slot diagram
FIG_EXCURSION = "1110110010110000"


configs = st.builds(
    BallConfig,
    origin=st.integers(-8, 8),
    bits=st.lists(st.integers(0, 1), max_size=40).map(tuple),
)


# ---------------------------------------------------------------------------
# walks
# ---------------------------------------------------------------------------

def test_walk_of_empty_config_descends():
    walk = walk_from_balls(BallConfig(1, (0, 0, 0)))
    assert walk.steps == (-1, -1, -1)
    assert walk.heights() == (0, -1, -2, -3)


def test_walk_of_single_soliton_returns():
    walk = walk_from_balls(BallConfig(1, (1, 0)))
    assert walk.steps == (1, -1)
    assert walk.heights()[0] == walk.heights()[-1] == 0


def test_walk_partial_minima_at_records():
    cfg = BallConfig.from_string(CARRIER_INPUT)
    heights = walk_from_balls(cfg).heights()
    # hand oracle: strict new minima, scanning left to right
    running = heights[0]
    minima = []
    for i, h in enumerate(heights[1:]):
        if h < running:
            minima.append(cfg.origin + i)
            running = h
    recs = record_positions(cfg)
    assert [r for r in recs if cfg.origin <= r <= cfg.end] == minima


@given(configs)
def test_walk_round_trip(cfg):
    assert balls_from_walk(walk_from_balls(cfg)) == cfg


@given(configs)
def test_walk_normalized_at_origin(cfg):
    walk = walk_from_balls(cfg)
    # height at box 0, wherever the window sits; boxes outside it step down
    if 0 < cfg.origin - 1:
        height = walk.base + (cfg.origin - 1)
    elif 0 > cfg.end:
        height = walk.heights()[-1] - (0 - cfg.end)
    else:
        height = walk.heights()[0 - (cfg.origin - 1)]
    assert height == 0


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

def test_records_empty_config():
    assert record_positions(BallConfig(1, ())) == (0, 1)
    assert is_record(BallConfig(1, ()), -17)
    assert is_record(BallConfig(1, ()), 23)


def test_records_two_soliton_block():
    cfg = BallConfig.from_string("1100", origin=1)
    recs = record_positions(cfg)
    assert recs == (0, 5)
    assert not any(is_record(cfg, z) for z in (1, 2, 3, 4))
    assert is_record(cfg, 5) and is_record(cfg, 0) and is_record(cfg, -3)


def test_records_single_excursion_figure():
    cfg = BallConfig.from_string(FIG_EXCURSION)
    recs = record_positions(cfg)
    assert recs == (0, 17)  # one excursion between two records


@given(configs)
def test_records_match_naive_scan(cfg):
    assert list(record_positions(cfg)) == oracles.naive_records(
        list(cfg.bits), cfg.origin
    )


def test_record_position_enumeration():
    cfg = BallConfig.from_string("1100", origin=1)
    assert record_position(cfg, 0) == 0
    assert record_position(cfg, -2) == -2
    assert record_position(cfg, 1) == 5
    assert record_position(cfg, 4) == 8


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

def test_evolve_carrier_example():
    cfg = BallConfig.from_string(CARRIER_INPUT)
    assert evolve(cfg).to_string() == CARRIER_OUTPUT


def test_evolve_empty_fixed_point():
    assert evolve(BallConfig(1, ())) == BallConfig(1, ())


def test_evolve_free_soliton_speed():
    cfg = BallConfig.from_string("1100000000")
    for t in range(1, 4):
        cfg = evolve(cfg)
        assert cfg.trimmed().ball_boxes() == (1 + 2 * t, 2 + 2 * t)


@given(configs)
def test_evolve_matches_naive(cfg):
    origin, bits = oracles.naive_evolve(list(cfg.bits), cfg.origin)
    assert evolve(cfg) == BallConfig(origin, tuple(bits))


@given(configs)
def test_records_stay_empty_after_evolve(cfg):
    out = evolve(cfg)
    for r in record_positions(cfg):
        assert cfg.occupied(r) == 0
        assert out.occupied(r) == 0


@given(configs)
def test_balls_balance_between_records(cfg):
    recs = record_positions(cfg)
    for a, b in zip(recs, recs[1:]):
        segment = [cfg.occupied(z) for z in range(a + 1, b)]
        assert sum(segment) * 2 == len(segment)


def test_carrier_trace_example():
    trace = carrier_trace(BallConfig.from_string(CARRIER_INPUT))
    assert "".join(map(str, trace)) == CARRIER_LOAD


def test_carrier_trace_small_cases():
    assert carrier_trace(BallConfig.from_string("1100")) == (1, 2, 1, 0)
    assert carrier_trace(BallConfig(1, (0, 0))) == (0, 0)


@given(configs)
def test_carrier_trace_ends_empty(cfg):
    trace = carrier_trace(cfg)
    assert not trace or trace[-1] == 0


@given(configs)
def test_soliton_conservation(cfg):
    assert config_soliton_counts(cfg) == config_soliton_counts(evolve(cfg))


# ---------------------------------------------------------------------------
# soliton identification
# ---------------------------------------------------------------------------

def test_empty_excursion_has_no_solitons():
    assert soliton_decompose(Excursion()) == ()
    assert soliton_counts(Excursion()) == {}


def test_pure_run_pair_is_one_soliton():
    sols = soliton_decompose(Excursion.from_string("111000"))
    assert len(sols) == 1
    assert sols[0].k == 3
    assert sols[0].head == (1, 2, 3) and sols[0].tail == (4, 5, 6)


def test_figure_decomposition():
    counts = soliton_counts(Excursion.from_string(FIG_EXCURSION))
    assert counts == {1: 2, 2: 1, 4: 1}


def test_worked_example_counts():
    worked = "10101011101010101001001100111010100010"
    assert soliton_counts(Excursion.from_string(worked)) == {1: 11, 2: 1, 3: 2}


def test_soliton_head_tail_values():
    for string in ("110100", "10", FIG_EXCURSION, "1011001100"):
        exc = Excursion.from_string(string)
        for sol in soliton_decompose(exc):
            assert all(exc.balls()[h - 1] == 1 for h in sol.head)
            assert all(exc.balls()[t - 1] == 0 for t in sol.tail)
            assert max(sol.head) < min(sol.tail) or max(sol.tail) < min(sol.head)


excursions_medium = st.integers(0, 6).flatmap(
    lambda n: st.sampled_from([Excursion(p) for p in oracles.dyck_paths(n)])
)


@given(excursions_medium)
def test_decomposition_matches_naive(exc):
    got = [(s.k, s.head, s.tail) for s in soliton_decompose(exc)]
    assert got == oracles.naive_solitons(list(exc.balls()))


@given(excursions_medium)
def test_supports_partition_excursion_boxes(exc):
    boxes = sorted(b for s in soliton_decompose(exc) for b in s.support())
    assert boxes == list(range(1, 2 * exc.n + 1))
    assert sum(2 * s.k for s in soliton_decompose(exc)) == 2 * exc.n


@given(excursions_medium, st.integers(0, 3), st.integers(0, 3))
def test_decomposition_padding_invariant(exc, left, right):
    padded = BallConfig(1, (0,) * left + exc.balls() + (0,) * right)
    base, excs = excursions_of(padded)
    nonempty = [e for e in excs if e.n]
    assert [e.steps for e in nonempty] in ([exc.steps], [])
    if nonempty:
        assert soliton_counts(nonempty[0]) == soliton_counts(exc)


def test_all_excursions_counted_by_catalan():
    for n in range(9):
        assert sum(1 for _ in enumerate_excursions(n)) == catalan_number(n)


def test_excursion_validation():
    with pytest.raises(ValidationError):
        Excursion((1, -1, -1, 1))
    with pytest.raises(ValidationError):
        Excursion((1,))
    with pytest.raises(ValidationError):
        Excursion.from_string("0")


def test_excursions_of_requires_record_at_origin():
    with pytest.raises(PreconditionError):
        excursions_of(BallConfig(0, (1, 1, 0, 0)))


def test_excursions_of_splits_blocks():
    cfg = BallConfig.from_string("10001100")
    i_lo, excs = excursions_of(cfg)
    assert i_lo == 0
    assert [e.ball_string() for e in excs] == ["10", "", "1100"]


def test_excursions_of_window_left_of_origin():
    cfg = BallConfig(-6, (1, 0))
    i_lo, excs = excursions_of(cfg)
    assert i_lo < 0
    assert [e.ball_string() for e in excs if e.n] == ["10"]
