"""Command line front end.

Subcommands cover the closed-form layer (threshold, identities), the
level-set law of the disk Green function (lemma31), the concentrating
family (sequence), and the variational search (maximize, lambda-scan).
Reports are plain text with a deterministic '# key=value' header so that
identical invocations produce byte-identical output; floats print with
17 significant digits.

Only the closed-form layer is imported at module load.  The numerical
subcommands import their machinery inside the handler, which keeps the
closed-form commands comfortably under a second of startup.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import __version__
from .core import (
    ProblemParams,
    concentration_threshold,
    harmonic_binomial_identity,
    inverse_binomial_identity,
    moser_constant,
)
from .errors import DomainError, MtlabError


class CliUsageError(Exception):
    """Bad command line input that argparse itself cannot catch."""


def _parse_float_list(text: str, resolution: int | None = None) -> list[float]:
    text = text.strip()
    if not text:
        raise CliUsageError("empty value list")
    if ":" in text:
        parts = text.split(":")
        try:
            numbers = [float(p) for p in parts]
        except ValueError as exc:
            raise CliUsageError(f"bad range {text!r}") from exc
        if len(parts) == 2:
            start, stop = numbers
            if resolution is None:
                raise CliUsageError(
                    f"range {text!r} needs an explicit step or --resolution"
                )
            if resolution < 2 or stop <= start:
                raise CliUsageError(f"cannot sample {text!r} at {resolution} points")
            span = stop - start
            return [start + span * i / (resolution - 1) for i in range(resolution)]
        if len(parts) == 3:
            start, stop, step = numbers
            if step <= 0.0:
                raise CliUsageError(f"step must be positive in {text!r}")
            ratio = (stop - start) / step
            count = round(ratio)
            if count < 0 or abs(ratio - count) > 1e-8 * max(1.0, abs(ratio)):
                raise CliUsageError(f"step does not divide the range in {text!r}")
            return [start + i * step for i in range(count + 1)]
        raise CliUsageError(f"bad range {text!r}")
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise CliUsageError(f"bad value list {text!r}") from exc


def _parse_int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        raise CliUsageError("empty value list")
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise CliUsageError(f"bad range {text!r}")
        try:
            numbers = [int(p) for p in parts]
        except ValueError as exc:
            raise CliUsageError(f"bad range {text!r}") from exc
        step = numbers[2] if len(numbers) == 3 else 1
        if step <= 0:
            raise CliUsageError(f"step must be positive in {text!r}")
        start, stop = numbers[0], numbers[1]
        return list(range(start, stop + 1, step))
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise CliUsageError(f"bad value list {text!r}") from exc


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, Fraction)):
        return str(value)
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _jsonable(value):
    if isinstance(value, Fraction):
        return str(value)
    return value


def _emit(command: str, params: dict, columns, rows, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "command": command,
            "mtlab": __version__,
            "params": {k: _jsonable(v) for k, v in params.items()},
            "rows": [
                {k: _jsonable(v) for k, v in row.items()} for row in rows
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    lines = [f"# mtlab={__version__}", f"# command={command}"]
    for key in sorted(params):
        lines.append(f"# {key}={_format_cell(params[key])}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_format_cell(row[col]) for col in columns))
    return "\n".join(lines) + "\n"


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="ascii") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            loaded = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliUsageError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(loaded, dict):
        raise CliUsageError(f"config {path!r} must hold a JSON object")
    return loaded


def _opt(args, config: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _resolve_workers(args, config: dict) -> int:
    value = _opt(args, config, "workers", None)
    if value is None:
        env = os.environ.get("MT_LAB_WORKERS", "").strip()
        if env:
            try:
                value = int(env)
            except ValueError as exc:
                raise CliUsageError(f"bad MT_LAB_WORKERS value {env!r}") from exc
        else:
            value = 1
    value = int(value)
    if value < 1:
        raise CliUsageError("worker count must be at least 1")
    return value


def _cmd_threshold(args) -> int:
    config = _load_config(args.config)
    sp = float(_opt(args, config, "sp", 0.0))
    mu = _opt(args, config, "mu", None)
    offset = None if mu is None else float(mu)
    value = concentration_threshold(args.n, pole_regular_value=sp, offset=offset)
    params = {"mu": offset if offset is not None else "ball-volume", "n": args.n, "sp": sp}
    text = _emit("threshold", params, ["n", "threshold"], [{"n": args.n, "threshold": value}], args.format)
    _write(text, args.out)
    return 0


def _cmd_identities(args) -> int:
    dims = _parse_int_list(args.n)
    orders = _parse_int_list(args.m)
    rows = []
    all_pass = True
    for n in dims:
        lhs, rhs = harmonic_binomial_identity(n)
        ok = lhs == rhs
        all_pass &= ok
        rows.append({"kind": "harmonic-binomial", "index": n, "lhs": lhs, "rhs": rhs, "pass": ok})
    for m in orders:
        lhs, rhs = inverse_binomial_identity(m)
        ok = lhs == rhs
        all_pass &= ok
        rows.append({"kind": "inverse-binomial", "index": m, "lhs": lhs, "rhs": rhs, "pass": ok})
    params = {"m": args.m, "n": args.n}
    text = _emit("identities", params, ["kind", "index", "lhs", "rhs", "pass"], rows, args.format)
    _write(text, args.out)
    return 0 if all_pass else 1


def _cmd_lemma31(args) -> int:
    from .green import DiskGreen

    config = _load_config(args.config)
    resolution = _opt(args, config, "resolution", None)
    levels = _parse_float_list(args.t, None if resolution is None else int(resolution))
    pole = float(_opt(args, config, "pole", 0.0))
    green = DiskGreen(args.n, pole)
    rows = green.level_law_report(levels)
    params = {
        "n": args.n,
        "pole": pole,
        "t": ",".join("%.17g" % level for level in levels),
    }
    columns = ["t", "lhs", "rhs", "ratio", "defect_scaled"]
    text = _emit("lemma31", params, columns, rows, args.format)
    _write(text, args.out)
    return 0


def _cmd_sequence(args) -> int:
    from .bubbles import excess_report

    config = _load_config(args.config)
    eps_values = _parse_float_list(args.eps)
    tol = float(_opt(args, config, "tol", 1e-10))
    rows = excess_report(args.n, args.m, eps_values, tol=tol)
    params = {
        "eps": ",".join("%.17g" % e for e in eps_values),
        "m": args.m,
        "n": args.n,
        "tol": tol,
    }
    columns = ["eps", "L", "C", "Lambda", "value", "excess", "scaled_excess"]
    text = _emit("sequence", params, columns, rows, args.format)
    _write(text, args.out)
    return 0


def _optimizer_config(args, config: dict):
    from .optimize import OptimizerConfig

    seeds = _opt(args, config, "seeds", "0.01,0.001")
    if isinstance(seeds, str):
        seed_scales = tuple(_parse_float_list(seeds))
    else:
        seed_scales = tuple(float(s) for s in seeds)
    return OptimizerConfig(
        knot_count=int(_opt(args, config, "knots", 400)),
        t_max=float(_opt(args, config, "tmax", 60.0)),
        grad_tol=float(_opt(args, config, "grad_tol", 1e-7)),
        max_iter=int(_opt(args, config, "max_iter", 5000)),
        seed_scales=seed_scales,
        rng_seed=int(_opt(args, config, "rng_seed", 0)),
    )


def _maximize_row(theta: float, result, params: ProblemParams, tol: float) -> dict:
    import numpy as np

    return {
        "theta": theta,
        "value": result.value,
        "excess": result.value - concentration_threshold(params.n),
        "peak": float(np.max(np.abs(result.profile.values))),
        "conc_fraction": result.profile.concentration_fraction(params, 0.1, tol=tol),
        "grad_norm": result.grad_norm,
        "iterations": result.iterations,
        "converged": result.converged,
        "seed": result.seed_name,
    }


def _cmd_maximize(args) -> int:
    from .optimize import continuation_path, maximize

    config = _load_config(args.config)
    optimizer = _optimizer_config(args, config)
    lam = float(_opt(args, config, "lam", 1.0))
    tol = float(_opt(args, config, "tol", 1e-10))
    thetas_text = _opt(args, config, "thetas", "1")
    thetas = (
        [float(t) for t in thetas_text]
        if isinstance(thetas_text, list)
        else _parse_float_list(str(thetas_text))
    )
    rows = []
    if thetas == [1.0]:
        params = ProblemParams(args.n, args.m, lam)
        result = maximize(params, optimizer)
        rows.append(_maximize_row(1.0, result, params, tol))
        final = result
    else:
        path = continuation_path(args.n, args.m, lam, thetas, optimizer)
        for theta, result in path:
            params = ProblemParams(args.n, args.m, lam, beta=theta * moser_constant(args.n))
            rows.append(_maximize_row(theta, result, params, tol))
        final = path[-1][1]
    if args.save_profile:
        final.profile.save(args.save_profile)
    params_header = {
        "grad_tol": optimizer.grad_tol,
        "knots": optimizer.knot_count,
        "lambda": lam,
        "m": args.m,
        "max_iter": optimizer.max_iter,
        "n": args.n,
        "rng_seed": optimizer.rng_seed,
        "seeds": ",".join("%.17g" % s for s in optimizer.seed_scales),
        "thetas": ",".join("%.17g" % t for t in thetas),
        "tmax": optimizer.t_max,
        "tol": tol,
    }
    columns = [
        "theta",
        "value",
        "excess",
        "peak",
        "conc_fraction",
        "grad_norm",
        "iterations",
        "converged",
        "seed",
    ]
    text = _emit("maximize", params_header, columns, rows, args.format)
    _write(text, args.out)
    return 0


def _cmd_lambda_scan(args) -> int:
    from .optimize import crossing_estimate, lambda_scan

    config = _load_config(args.config)
    optimizer = _optimizer_config(args, config)
    lambdas = _parse_float_list(args.lam)
    theta = float(_opt(args, config, "theta", 1.0))
    workers = _resolve_workers(args, config)
    rows = lambda_scan(
        args.n, args.m, lambdas, theta=theta, config=optimizer, workers=workers
    )
    crossing = crossing_estimate(rows, args.n)
    params_header = {
        "crossing": "none" if crossing is None else crossing,
        "grad_tol": optimizer.grad_tol,
        "knots": optimizer.knot_count,
        "lambda": ",".join("%.17g" % lam for lam in lambdas),
        "m": args.m,
        "max_iter": optimizer.max_iter,
        "n": args.n,
        "rng_seed": optimizer.rng_seed,
        "seeds": ",".join("%.17g" % s for s in optimizer.seed_scales),
        "theta": theta,
        "tmax": optimizer.t_max,
    }
    columns = ["lambda", "value", "excess", "peak", "conc_fraction", "converged"]
    text = _emit("lambda-scan", params_header, columns, rows, args.format)
    _write(text, args.out)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="report format"
    )
    parser.add_argument("--config", help="JSON file with fallback option values")


def _add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--knots", type=int, help="knot count of the search grid")
    parser.add_argument("--tmax", type=float, help="horizon of the search grid")
    parser.add_argument("--max-iter", dest="max_iter", type=int, help="ascent iteration cap")
    parser.add_argument("--grad-tol", dest="grad_tol", type=float, help="gradient stopping norm")
    parser.add_argument("--seeds", help="comma list of family scales used as seeds")
    parser.add_argument("--rng-seed", dest="rng_seed", type=int, help="noise seed")
    parser.add_argument("--tol", type=float, help="integration tolerance for reports")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtlab",
        description="numerical laboratory for the critical growth functional",
    )
    parser.add_argument("--version", action="version", version=f"mtlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="concentration threshold value")
    p.add_argument("--n", type=int, required=True, help="dimension")
    p.add_argument("--sp", type=float, help="regular part of the Green function at the pole")
    p.add_argument("--mu", type=float, help="additive offset, defaults to the ball volume")
    _add_common(p)
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("identities", help="exact combinatorial identity checks")
    p.add_argument("--n", default="2:12", help="dimension range, e.g. 2:12 or 2,3,5")
    p.add_argument("--m", default="0:12", help="order range")
    _add_common(p)
    p.set_defaults(func=_cmd_identities)

    p = sub.add_parser("lemma31", help="level-set law of the Green function")
    p.add_argument("--n", type=int, default=2, help="dimension")
    p.add_argument("--pole", type=float, help="pole offset, dimension two only")
    p.add_argument("--t", required=True, help="levels: comma list or start:stop:step")
    p.add_argument("--resolution", type=int, help="point count for a start:stop range")
    _add_common(p)
    p.set_defaults(func=_cmd_lemma31)

    p = sub.add_parser("sequence", help="concentrating family diagnostics")
    p.add_argument("--n", type=int, required=True, help="dimension")
    p.add_argument("--m", type=int, required=True, help="perturbation order")
    p.add_argument("--eps", required=True, help="scales: comma list or start:stop:step")
    p.add_argument("--tol", type=float, help="integration tolerance")
    _add_common(p)
    p.set_defaults(func=_cmd_sequence)

    p = sub.add_parser("maximize", help="search for the best unit-energy profile")
    p.add_argument("--n", type=int, required=True, help="dimension")
    p.add_argument("--m", type=int, required=True, help="perturbation order")
    p.add_argument("--lambda", dest="lam", type=float, help="perturbation weight")
    p.add_argument("--thetas", help="growth ratios for continuation, e.g. 0.6,0.8,1")
    p.add_argument("--save-profile", dest="save_profile", help="write the best profile here")
    _add_optimizer_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_maximize)

    p = sub.add_parser("lambda-scan", help="portfolio scan over perturbation weights")
    p.add_argument("--n", type=int, required=True, help="dimension")
    p.add_argument("--m", type=int, required=True, help="perturbation order")
    p.add_argument("--lambda", dest="lam", required=True, help="weights: comma list or start:stop:step")
    p.add_argument("--theta", type=float, help="growth ratio, default critical")
    p.add_argument("--workers", type=int, help="parallel maximizations, or MT_LAB_WORKERS")
    _add_optimizer_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_lambda_scan)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliUsageError as exc:
        print(f"mtlab: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"mtlab: {exc}", file=sys.stderr)
        return 2
    except MtlabError as exc:
        print(f"mtlab: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"mtlab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
