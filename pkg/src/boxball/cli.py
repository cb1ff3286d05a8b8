"""Command-line surface: evolve, decompose, reconstruct, sample, verify, render, params.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 invalid
input data, 4 precondition violation.  All randomized commands require an
explicit ``--seed`` and are deterministic given it; ``--jobs`` only changes
how chunks are executed, never the result.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from . import __version__
from .core import (
    BallConfig,
    Excursion,
    carrier_trace,
    catalan_number,
    enumerate_excursions,
    evolve,
    excursions_of,
    record_positions,
    soliton_decompose,
)
from .errors import BoxBallError, PreconditionError, ValidationError
from .line import (
    assemble,
    bernoulli_excursions,
    markov_excursions,
    sample_anti_palm,
    sample_excursions,
)
from .measures import (
    SolitonWeights,
    bernoulli_weights,
    expected_slot_counts,
    explicit_weights,
    fill_from_weights,
    markov_weights,
    partition_function,
    partition_series,
    weights_from_params_json,
)
from .slots import (
    ComponentArray,
    concat_diagrams,
    decompose,
    diagram_from_excursion,
    excursion_from_diagram,
    reconstruct,
    slot_positions,
)
from .stats import (
    component_shift_check,
    geometric_gof,
    independence_test,
    t_invariance_test,
)

_EXIT_VERIFY = 1
_EXIT_DATA = 3
_EXIT_PRECONDITION = 4

_COLORS = {1: 35, 2: 31, 3: 32, 4: 34}  # purple, red, green, blue
_EXTRA_COLORS = (36, 33, 95, 91)


def _fail(exc: BoxBallError) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(_EXIT_PRECONDITION if isinstance(exc, PreconditionError) else _EXIT_DATA)


def _read_config(text: str | None, path: str | None, origin: int) -> BallConfig:
    if (text is None) == (path is None):
        raise ValidationError("provide a ball string either inline or via --in")
    if path is not None:
        with click.open_file(path) as fh:
            text = fh.read()
    if text == "-":
        text = sys.stdin.read()
    return BallConfig.from_string(text, origin)


def _emit(doc: dict, out: str | None) -> None:
    doc = {"v": 1, **doc}
    data = json.dumps(doc, indent=2)
    if out:
        with click.open_file(out, "w") as fh:
            fh.write(data + "\n")
    else:
        click.echo(data)


def _weights_from_flags(measure, lam, q_matrix, alpha, params) -> SolitonWeights:
    if params:
        with click.open_file(params) as fh:
            return weights_from_params_json(fh.read())
    if measure == "bernoulli":
        if lam is None:
            raise ValidationError("--lambda is required for the bernoulli measure")
        return bernoulli_weights(lam)
    if measure == "markov":
        if q_matrix is None:
            raise ValidationError("--Q is required for the markov measure")
        return markov_weights(json.loads(q_matrix))
    if measure == "explicit":
        if alpha is None:
            raise ValidationError("--alpha is required for the explicit measure")
        return explicit_weights([float(v) for v in alpha.split(",")])
    raise ValidationError(f"unknown measure {measure!r}")


def _measure_options(fn):
    fn = click.option("--params", type=click.Path(exists=True), default=None,
                      help="JSON parameter file (overrides the flags below).")(fn)
    fn = click.option("--alpha", default=None, help="comma-separated explicit weights")(fn)
    fn = click.option("--Q", "q_matrix", default=None,
                      help='2x2 transition matrix as JSON, e.g. "[[0.8,0.2],[0.6,0.4]]"')(fn)
    fn = click.option("--lambda", "lam", type=float, default=None, help="ball density")(fn)
    fn = click.option("--measure", type=click.Choice(["bernoulli", "markov", "explicit"]),
                      default="bernoulli", show_default=True)(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Box-ball system toolkit: dynamics, soliton calculus, random excursions."""


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

@main.command("evolve")
@click.argument("config", required=False)
@click.option("--in", "path", type=click.Path(exists=True), default=None)
@click.option("--origin", type=int, default=1, show_default=True)
@click.option("--steps", type=int, default=1, show_default=True)
@click.option("--trace", is_flag=True, help="also print the carrier load per sweep")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--out", type=click.Path(), default=None)
def evolve_cmd(config, path, origin, steps, trace, fmt, out):
    """Apply the carrier sweep STEPS times to a ball string."""
    try:
        cfg = _read_config(config, path, origin)
        states = [cfg]
        traces = []
        for _ in range(steps):
            traces.append(carrier_trace(states[-1]))
            states.append(evolve(states[-1]))
        if fmt == "json":
            _emit(
                {
                    "origin": cfg.origin,
                    "input": cfg.to_string(),
                    "steps": steps,
                    "output": states[-1].to_string(),
                    "output_origin": states[-1].origin,
                    "traces": [list(t) for t in traces] if trace else None,
                },
                out,
            )
            return
        lines = []
        for i, state in enumerate(states):
            lines.append(state.to_string())
            if trace and i < len(traces):
                lines.append("".join(str(v % 10) for v in traces[i]))
        text = "\n".join(lines if trace else [states[-1].to_string()])
        if out:
            with click.open_file(out, "w") as fh:
                fh.write(text + "\n")
        else:
            click.echo(text)
    except BoxBallError as exc:
        _fail(exc)


@main.command("decompose")
@click.argument("config", required=False)
@click.option("--in", "path", type=click.Path(exists=True), default=None)
@click.option("--origin", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="json")
@click.option("--out", type=click.Path(), default=None)
def decompose_cmd(config, path, origin, fmt, out):
    """Solitons, slot diagrams, and components of a ball string."""
    try:
        cfg = _read_config(config, path, origin)
        i_lo, excs = excursions_of(cfg)
        diagrams = [diagram_from_excursion(e) for e in excs]
        components = concat_diagrams(diagrams, i_lo)
        solitons = []
        slots = []
        recs = record_positions(cfg)
        for i, exc in enumerate(excs):
            base = recs[0] + sum(2 * e.n + 1 for e in excs[:i])
            for sol in soliton_decompose(exc):
                solitons.append(
                    {
                        "k": sol.k,
                        "head": [base + h for h in sol.head],
                        "tail": [base + t for t in sol.tail],
                    }
                )
            slots.append(
                {
                    str(k): [base + p for p in slot_positions(exc, k)]
                    for k in range(1, diagrams[i].max_size + 1)
                }
            )
        doc = {
            "origin": cfg.origin,
            "balls": cfg.to_string(),
            "i_lo": i_lo,
            "solitons": solitons,
            "slots": slots,
            "diagrams": [json.loads(d.to_json()) for d in diagrams],
            "components": json.loads(components.to_json()),
        }
        if fmt == "json":
            _emit(doc, out)
        else:
            click.echo(f"excursions: {len(excs)} (first index {i_lo})")
            click.echo("records: " + " ".join(map(str, recs)))
            for sol in solitons:
                click.echo(f"  {sol['k']}-soliton head={sol['head']} tail={sol['tail']}")
            click.echo(f"components: {components.to_json()}")
    except BoxBallError as exc:
        _fail(exc)


@main.command("reconstruct")
@click.argument("source", required=False)
@click.option("--in", "path", type=click.Path(exists=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--out", type=click.Path(), default=None)
def reconstruct_cmd(source, path, fmt, out):
    """Rebuild the ball string from a decompose JSON document (or stdin)."""
    try:
        if path is not None:
            with click.open_file(path) as fh:
                text = fh.read()
        elif source in (None, "-"):
            text = sys.stdin.read()
        else:
            text = source
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"bad JSON input: {exc}") from exc
        payload = doc.get("components", doc) if isinstance(doc, dict) else doc
        components = ComponentArray.from_json(json.dumps(payload))
        full = reconstruct(components)
        # strip the boundary record boxes so decompose | reconstruct is the
        # identity on the ball string
        cfg = BallConfig(full.origin + 1, full.bits[1:-1])
        if fmt == "json":
            _emit({"origin": cfg.origin, "balls": cfg.to_string()}, out)
        else:
            click.echo(f"{cfg.origin} {cfg.to_string()}")
    except BoxBallError as exc:
        _fail(exc)


@main.command("render")
@click.argument("config", required=False)
@click.option("--in", "path", type=click.Path(exists=True), default=None)
@click.option("--origin", type=int, default=1, show_default=True)
@click.option("--color/--no-color", default=None, help="default: color on a terminal")
def render_cmd(config, path, origin, color):
    """ASCII rendering with one color class per soliton size.

    Records print as dots; each soliton's boxes print in the color of its
    size (purple 1, red 2, green 3, blue 4, then a rotating palette).
    """
    try:
        cfg = _read_config(config, path, origin)
        i_lo, excs = excursions_of(cfg)
        recs = record_positions(cfg)
        class_of: dict[int, int] = {}
        for i, exc in enumerate(excs):
            base = recs[0] + sum(2 * e.n + 1 for e in excs[:i])
            for sol in soliton_decompose(exc):
                for box in sol.support():
                    class_of[base + box] = sol.k
        if color is None:
            color = sys.stdout.isatty()
        chars = []
        classes = []
        for z in range(recs[0], recs[-1] + 1):
            k = class_of.get(z)
            ch = str(cfg.occupied(z))
            if k is None:
                chars.append("." if cfg.occupied(z) == 0 else ch)
                classes.append(".")
            else:
                code = _COLORS.get(k, _EXTRA_COLORS[k % len(_EXTRA_COLORS)])
                chars.append(f"\x1b[{code}m{ch}\x1b[0m" if color else ch)
                classes.append(str(k % 10))
        click.echo("".join(chars))
        if not color:
            click.echo("".join(classes))
    except BoxBallError as exc:
        _fail(exc)


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

@main.command("params")
@_measure_options
@click.option("--levels", type=int, default=None, help="truncation level for q")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--out", type=click.Path(), default=None)
def params_cmd(measure, lam, q_matrix, alpha, params, levels, fmt, out):
    """Partition function, slot parameters, and mean sizes of a measure."""
    try:
        weights = _weights_from_flags(measure, lam, q_matrix, alpha, params)
        fill = fill_from_weights(weights, levels)
        z = partition_function(weights, levels)
        betas, mean_size = expected_slot_counts(fill)
        kappa = 1 + mean_size
        lam_out = (kappa - 1) / (2 * kappa)
        doc = {
            "Z": z,
            "q": list(fill.q),
            "beta0": betas[0],
            "kappa": kappa,
            "lambda": lam_out,
        }
        if fmt == "json":
            _emit(doc, out)
        else:
            click.echo(f"Z      = {z:.12g}")
            click.echo("q      = " + ", ".join(f"{v:.12g}" for v in fill.q[:12]))
            click.echo(f"beta0  = {betas[0]:.12g}")
            click.echo(f"kappa  = {kappa:.12g}")
            click.echo(f"lambda = {lam_out:.12g}")
    except BoxBallError as exc:
        _fail(exc)


def _chunk_sizes(total: int, chunks: int = 16) -> list[int]:
    base = total // chunks
    out = [base] * chunks
    for i in range(total - base * chunks):
        out[i] += 1
    return [c for c in out if c]


def _sampler_for(weights_or_kind, lam, q_matrix):
    if weights_or_kind == "bernoulli":
        return lambda size, rng: bernoulli_excursions(lam, size, rng)
    if weights_or_kind == "markov":
        q = json.loads(q_matrix)
        return lambda size, rng: markov_excursions(q, size, rng)
    weights = weights_or_kind
    fill = fill_from_weights(weights)
    return lambda size, rng: sample_excursions(weights, size, rng, fill)


def _parallel_excursions(sampler, total: int, seed: int, jobs: int) -> list[Excursion]:
    """Fixed chunking keyed by (seed, chunk index): output independent of jobs."""
    sizes = _chunk_sizes(total)

    def run(args):
        idx, size = args
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(idx,)))
        return sampler(size, rng)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(run, enumerate(sizes)))
    else:
        parts = [run(x) for x in enumerate(sizes)]
    return [e for part in parts for e in part]


@main.command("sample")
@_measure_options
@click.option("--excursions", "num", type=int, default=1000, show_default=True)
@click.option("--anti-palm", is_flag=True, help="stationary window instead of record-anchored")
@click.option("--boxes", type=int, default=None, help="window size for --anti-palm")
@click.option("--seed", type=int, required=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
@click.option("--out", type=click.Path(), default=None)
def sample_cmd(measure, lam, q_matrix, alpha, params, num, anti_palm, boxes, seed, jobs, fmt, out):
    """Draw a random configuration; prints the ball string and its records."""
    try:
        weights = _weights_from_flags(measure, lam, q_matrix, alpha, params)
        if anti_palm:
            rng = np.random.default_rng(seed)
            cfg = sample_anti_palm(weights, boxes or 1000, rng)
            anchored = None
        else:
            if params or measure == "explicit":
                sampler = _sampler_for(weights, None, None)
            else:
                sampler = _sampler_for(measure, lam, q_matrix)
            excs = _parallel_excursions(sampler, num, seed, jobs)
            anchored = assemble(excs, 0)
            cfg = anchored.config
        if fmt == "json":
            doc = (
                anchored.to_json_dict()
                if anchored is not None
                else {"origin": cfg.origin, "balls": cfg.to_string()}
            )
            _emit(doc, out)
        else:
            recs = record_positions(cfg)
            text = f"{cfg.origin} {cfg.to_string()}\n" + " ".join(map(str, recs))
            if out:
                with click.open_file(out, "w") as fh:
                    fh.write(text + "\n")
            else:
                click.echo(text)
    except BoxBallError as exc:
        _fail(exc)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@main.group("verify")
def verify_group() -> None:
    """Statistical and exact checks; nonzero exit on failure."""


def _verify_exit(doc: dict, passed: bool, out: str | None) -> None:
    doc["passed"] = bool(passed)
    _emit(doc, out)
    sys.exit(0 if passed else _EXIT_VERIFY)


@verify_group.command("geometric")
@_measure_options
@click.option("--excursions", "num", type=int, default=100_000, show_default=True)
@click.option("--level", "k", type=int, default=1, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--significance", type=float, default=1e-3, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def verify_geometric(measure, lam, q_matrix, alpha, params, num, k, seed, jobs, significance, out):
    """Row k of a record-anchored sample against its geometric law."""
    try:
        weights = _weights_from_flags(measure, lam, q_matrix, alpha, params)
        fill = fill_from_weights(weights)
        sampler = (
            _sampler_for(measure, lam, q_matrix)
            if measure in ("bernoulli", "markov") and not params
            else _sampler_for(weights, None, None)
        )
        excs = _parallel_excursions(sampler, num, seed, jobs)
        components = decompose(assemble(excs, 0).config)
        report = geometric_gof(components, k, 1 - fill.at(k))
        _verify_exit(
            {"check": "geometric", "level": k, "report": report.to_json_dict()},
            report.p_value > significance,
            out,
        )
    except BoxBallError as exc:
        _fail(exc)


@verify_group.command("independence")
@_measure_options
@click.option("--excursions", "num", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--significance", type=float, default=1e-3, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def verify_independence(measure, lam, q_matrix, alpha, params, num, seed, jobs, significance, out):
    """Independence of component entries: same-row lag and cross-row pairs."""
    try:
        weights = _weights_from_flags(measure, lam, q_matrix, alpha, params)
        sampler = (
            _sampler_for(measure, lam, q_matrix)
            if measure in ("bernoulli", "markov") and not params
            else _sampler_for(weights, None, None)
        )
        excs = _parallel_excursions(sampler, num, seed, jobs)
        components = decompose(assemble(excs, 0).config)
        pairs = [((1, 0), (1, 1)), ((1, 0), (2, 0))]
        reports = independence_test(components, pairs)
        passed = all(r.p_value > significance for r in reports.values())
        _verify_exit(
            {
                "check": "independence",
                "reports": {str(p): r.to_json_dict() for p, r in reports.items()},
            },
            passed,
            out,
        )
    except BoxBallError as exc:
        _fail(exc)


@verify_group.command("t-invariance")
@_measure_options
@click.option("--boxes", type=int, default=200_000, show_default=True)
@click.option("--steps", type=int, default=1, show_default=True)
@click.option("--block-len", type=int, default=4, show_default=True)
@click.option("--max-se", type=float, default=4.0, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), default=None)
def verify_t_invariance(measure, lam, q_matrix, alpha, params, boxes, steps, block_len, max_se, seed, out):
    """Block frequencies before and after evolution on a stationary window."""
    try:
        weights = _weights_from_flags(measure, lam, q_matrix, alpha, params)
        report = t_invariance_test(weights, steps, block_len, boxes, np.random.default_rng(seed))
        _verify_exit(
            {"check": "t-invariance", "report": report.to_json_dict()},
            report.max_dev_se is not None and report.max_dev_se <= max_se,
            out,
        )
    except BoxBallError as exc:
        _fail(exc)


@verify_group.command("shift")
@click.option("--configs", type=int, default=1000, show_default=True)
@click.option("--max-boxes", type=int, default=200, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(), default=None)
def verify_shift(configs, max_boxes, seed, out):
    """Component rows of random configurations shift but never change under evolution."""
    try:
        from .core import config_soliton_counts

        rng = np.random.default_rng(seed)
        failures = 0
        for _ in range(configs):
            length = int(rng.integers(1, max_boxes + 1))
            density = rng.uniform(0.05, 0.45)
            cfg = BallConfig(1, tuple(int(v) for v in (rng.random(length) < density)))
            report = component_shift_check(cfg)
            conserved = config_soliton_counts(cfg) == config_soliton_counts(evolve(cfg))
            if not (report.ok and conserved):
                failures += 1
        _verify_exit(
            {"check": "shift", "configs": configs, "failures": failures},
            failures == 0,
            out,
        )
    except BoxBallError as exc:
        _fail(exc)


@verify_group.command("bijections")
@click.option("--n-max", type=int, default=6, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def verify_bijections(n_max, out):
    """Exact excursion <-> diagram round trips over all excursions up to n-max."""
    try:
        total = 0
        failures = 0
        for n in range(n_max + 1):
            count = 0
            for exc in enumerate_excursions(n):
                count += 1
                total += 1
                diagram = diagram_from_excursion(exc)
                if excursion_from_diagram(diagram) != exc:
                    failures += 1
            if count != catalan_number(n):
                failures += 1
        _verify_exit(
            {"check": "bijections", "excursions": total, "failures": failures},
            failures == 0,
            out,
        )
    except BoxBallError as exc:
        _fail(exc)


@verify_group.command("partition")
@_measure_options
@click.option("--n-max", type=int, default=40, show_default=True)
@click.option("--tolerance", type=float, default=1e-6, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def verify_partition(measure, lam, q_matrix, alpha, params, n_max, tolerance, out):
    """Series partition sum against the closed-form product."""
    try:
        weights = _weights_from_flags(measure, lam, q_matrix, alpha, params)
        series = partition_series(weights, n_max)
        closed = partition_function(weights)
        gap = abs(series.value - closed)
        _verify_exit(
            {
                "check": "partition",
                "series": series.value,
                "closed": closed,
                "gap": gap,
                "tail_bound": series.tail_bound,
                "n_max": n_max,
            },
            gap <= tolerance,
            out,
        )
    except BoxBallError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
