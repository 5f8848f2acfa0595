"""Command-line front end: curves, generic bounds, verification, simulation.

Curves are emitted as CSV with the header ``D,C,exactness``; structured
results are emitted as JSON.  Every run is deterministic given its full
flag set (including the seed), and all numbers are printed with 12
significant digits.  When writing to files, each output is accompanied by
a ``<file>.manifest.json`` sidecar carrying the command, parameters, seed,
version, and timestamp; JSON printed to stdout embeds the same manifest
with a null timestamp so identical invocations stay byte-identical.

Exit codes: 0 success, 1 verification failure, 2 input validation error,
3 internal solver failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys

import numpy as np

from . import __version__, backend
from .bounds import (
    LOWER,
    UPPER_SEQ,
    UPPER_SYM,
    SolverConfig,
    bound_curves,
    degraded_curve,
    feasible_distortion_interval,
)
from .channel import (
    BinaryIsacParams,
    GaussianIsacParams,
    degradedness,
    load_channel,
)
from .closed_form import (
    binary_capacity_distortion,
    binary_distortion_range,
    gaussian_capacity_logloss,
    gaussian_distortion_range_logloss,
    mse_capacity,
    mse_distortion_range,
)
from .errors import DomainError, UsageError
from .extremal import (
    second_derivative_check_j,
    verify_binary_extremal,
    verify_gaussian_epi_variant,
    verify_j_shape,
    verify_rg_curvature,
)
from .sim import run_binary_coded, run_binary_genie, run_gaussian_genie

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_SOLVER_FAILED = 3


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _round_floats(obj):
    """Round every float to 12 significant digits for stable JSON output."""
    if isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            return str(obj)
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return _round_floats(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _round_floats(obj.tolist())
    return obj


def _manifest(args: argparse.Namespace, with_timestamp: bool) -> dict:
    params = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "out") and v is not None
    }
    command = args.command
    for selector in ("suite", "family"):
        if getattr(args, selector, None):
            command = f"{command} {getattr(args, selector)}"
    return {
        "command": command,
        "params": params,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat()
        if with_timestamp
        else None,
    }


def _default_seed() -> int:
    raw = os.environ.get("ISACCD_SEED", "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"ISACCD_SEED must be an integer, got {raw!r}") from exc


def _emit_csv(rows, args) -> None:
    lines = ["D,C,exactness"]
    lines += [f"{_fmt(d)},{_fmt(c)},{ex}" for d, c, ex in rows]
    text = "\n".join(lines) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        _write_sidecar(args.out, args)
    else:
        sys.stdout.write(text)


def _emit_json(doc: dict, args, path=None) -> None:
    out_path = path if path is not None else getattr(args, "out", None)
    doc = dict(doc)
    doc["manifest"] = _manifest(args, with_timestamp=False)
    text = json.dumps(_round_floats(doc), indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
        _write_sidecar(out_path, args)
    else:
        sys.stdout.write(text)


def _write_sidecar(path: str, args) -> None:
    with open(f"{path}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(_round_floats(_manifest(args, with_timestamp=True)), fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_curve_binary(args) -> int:
    params = BinaryIsacParams(args.beta1, args.beta2, args.betaS)
    rng = binary_distortion_range(params)
    grid = np.linspace(rng.d_min, rng.d_max, args.grid)
    rows = []
    for d in grid:
        pt = binary_capacity_distortion(params, float(d), loss=args.loss)
        rows.append((pt.d, pt.c, pt.exactness))
    _emit_csv(rows, args)
    return EXIT_OK


def cmd_curve_gaussian(args) -> int:
    params = GaussianIsacParams(args.n1, args.n2, args.ns, args.p)
    if args.metric == "logloss":
        rng = gaussian_distortion_range_logloss(params)
        evaluate = lambda d: gaussian_capacity_logloss(params, d)  # noqa: E731
    else:
        rng = mse_distortion_range(params)
        evaluate = lambda d: mse_capacity(params, d)  # noqa: E731
    grid = np.linspace(rng.d_min, rng.d_max, args.grid)
    rows = []
    for d in grid:
        pt = evaluate(float(d))
        rows.append((pt.d, pt.c, pt.exactness))
    _emit_csv(rows, args)
    return EXIT_OK


def _curve_payload(curve) -> dict:
    return {
        "kind": curve.kind,
        "points": [[p.d, p.c, p.exactness] for p in curve.points],
        "diagnostics": curve.diagnostics,
    }


def cmd_bounds(args) -> int:
    ch = load_channel(args.channel)
    cfg = SolverConfig(
        multistarts=args.multistarts,
        max_iters=args.iters,
        seed=args.seed,
    )
    if args.d_min is not None and args.d_max is not None:
        grid = np.linspace(args.d_min, args.d_max, args.grid)
    else:
        interval = feasible_distortion_interval(ch)
        span = interval.d_max - interval.d_min
        # keep strictly inside the numerically determined interval
        pad = max(1e-9, 1e-9 * max(abs(span), 1.0))
        grid = np.linspace(interval.d_min + pad, interval.d_max, args.grid)

    kinds = [LOWER]
    if args.upper in ("sym", "both"):
        kinds.append(UPPER_SYM)
    if args.upper in ("seq", "both"):
        kinds.append(UPPER_SEQ)
    curves = bound_curves(ch, grid, cfg, kinds=kinds)

    verdict = degradedness(ch)
    report: dict = {
        "degradedness": verdict.to_dict(),
        "grid": list(map(float, grid)),
        "curves": {},
        "backend": backend.backend_name(),
    }
    degraded = verdict.direction != "neither"
    for kind, curve in curves.items():
        payload = _curve_payload(curve)
        if kind in (UPPER_SYM, UPPER_SEQ):
            payload["label"] = (
                "degraded case: heuristic evaluation made tight by the "
                "corollary shortcut"
                if degraded
                else "heuristic evaluation"
            )
        report["curves"][kind] = payload
    exact = degraded_curve(ch, grid, cfg) if degraded else None
    if exact is not None:
        report["curves"]["degraded_exact"] = _curve_payload(exact)

    if args.out:
        emitted = list(curves.items())
        if exact is not None:
            emitted.append(("degraded_exact", exact))
        for kind, curve in emitted:
            rows = [(p.d, p.c, p.exactness) for p in curve.points]
            csv_args = argparse.Namespace(**{**vars(args), "out": f"{args.out}_{kind}.csv"})
            _emit_csv(rows, csv_args)
        _emit_json(report, args, path=f"{args.out}_report.json")
    else:
        _emit_json(report, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = args.seed
    if args.suite == "binary-extremal":
        params = BinaryIsacParams(args.beta1, args.beta2, args.betaS)
        report = verify_binary_extremal(
            params, args.lambdas, n_samples=args.samples, seed=seed
        )
    elif args.suite == "gaussian-epi":
        params = GaussianIsacParams(args.n1, args.n2, args.ns, args.p)
        report = verify_gaussian_epi_variant(params, n_samples=args.samples, seed=seed)
    elif args.suite == "curvature":
        params = GaussianIsacParams(args.n1, args.n2, args.ns, args.p)
        report = verify_rg_curvature(params)
    elif args.suite == "j-shape":
        params = BinaryIsacParams(args.beta1, args.beta2, args.betaS)
        shape = verify_j_shape(params, args.lambdas)
        curv = [
            second_derivative_check_j(params, lam).to_dict() for lam in args.lambdas
        ]
        doc = {"suite": args.suite, "report": shape.to_dict(), "curvature": curv}
        _emit_json(doc, args)
        ok = shape.passed and all(c["passed"] for c in curv)
        return EXIT_OK if ok else EXIT_VERIFY_FAILED
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown verify suite {args.suite!r}")
    _emit_json({"suite": args.suite, "report": report.to_dict()}, args)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_simulate(args) -> int:
    if args.family == "binary-genie":
        params = BinaryIsacParams(args.beta1, args.beta2, args.betaS)
        result = run_binary_genie(params, args.alpha, args.n, args.trials, args.seed)
    elif args.family == "binary-coded":
        params = BinaryIsacParams(args.beta1, args.beta2, args.betaS)
        result = run_binary_coded(
            params, args.alpha, args.n, args.r1, args.r2, args.trials, args.seed
        )
    elif args.family == "gaussian-genie":
        params = GaussianIsacParams(args.n1, args.n2, args.ns, args.p)
        result = run_gaussian_genie(
            params, args.pprime, args.n, args.trials, args.seed, metric=args.metric
        )
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown simulation family {args.family!r}")
    _emit_json({"result": result.to_dict()}, args)
    return EXIT_OK


def _add_binary_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta1", type=float, required=True, help="communication crossover")
    p.add_argument("--beta2", type=float, required=True, help="sensing crossover")
    p.add_argument("--betaS", type=float, required=True, help="state bias")


def _add_gaussian_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n1", type=float, required=True, help="communication noise variance")
    p.add_argument("--n2", type=float, required=True, help="sensing noise variance")
    p.add_argument("--ns", type=float, required=True, help="state variance")
    p.add_argument("--p", type=float, required=True, help="transmit power budget")


def _lambda_list(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad multiplier list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isaccd",
        description="Capacity-distortion limits of ISAC channels under logarithmic loss",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    default_seed = _default_seed()

    p = sub.add_parser("curve-binary", help="closed-form binary tradeoff curve (CSV)")
    _add_binary_params(p)
    p.add_argument("--grid", type=int, default=50, help="number of distortion points")
    p.add_argument("--loss", choices=("symbol", "sequence"), default="symbol")
    p.add_argument("--out", help="write CSV here (with manifest sidecar)")
    p.set_defaults(func=cmd_curve_binary)

    p = sub.add_parser("curve-gaussian", help="closed-form Gaussian tradeoff curve (CSV)")
    _add_gaussian_params(p)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--metric", choices=("logloss", "mse"), default="logloss")
    p.add_argument("--out", help="write CSV here (with manifest sidecar)")
    p.set_defaults(func=cmd_curve_gaussian)

    p = sub.add_parser("bounds", help="generic bound curves from a channel-spec JSON file")
    p.add_argument("--channel", required=True, help="channel-spec JSON path")
    p.add_argument("--grid", type=int, default=9)
    p.add_argument("--d-min", type=float, dest="d_min")
    p.add_argument("--d-max", type=float, dest="d_max")
    p.add_argument("--upper", choices=("none", "sym", "seq", "both"), default="sym")
    p.add_argument("--multistarts", type=int, default=64)
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--out", help="output prefix for CSV/JSON files")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify", help="run a numerical verification suite (JSON)")
    p.add_argument(
        "suite", choices=("binary-extremal", "gaussian-epi", "curvature", "j-shape")
    )
    p.add_argument("--beta1", type=float, default=0.18)
    p.add_argument("--beta2", type=float, default=0.2)
    p.add_argument("--betaS", type=float, default=0.1)
    p.add_argument("--n1", type=float, default=1.5)
    p.add_argument("--n2", type=float, default=2.0)
    p.add_argument("--ns", type=float, default=1.0)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--lambdas", type=_lambda_list, default=[0.0, 0.3, 1.0, 2.0])
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo superposition-coding run (JSON)")
    p.add_argument(
        "family", choices=("binary-genie", "binary-coded", "gaussian-genie")
    )
    p.add_argument("--beta1", type=float, default=0.18)
    p.add_argument("--beta2", type=float, default=0.2)
    p.add_argument("--betaS", type=float, default=0.1)
    p.add_argument("--n1", type=float, default=1.5)
    p.add_argument("--n2", type=float, default=2.0)
    p.add_argument("--ns", type=float, default=1.0)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.25, help="binary split parameter")
    p.add_argument("--pprime", type=float, default=0.0, help="Gaussian satellite power")
    p.add_argument("--r1", type=float, default=0.0, help="cloud-center rate (coded)")
    p.add_argument("--r2", type=float, default=0.0, help="satellite rate (coded)")
    p.add_argument("--n", type=int, default=100000, help="blocklength")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--metric", choices=("logloss", "mse"), default="logloss")
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except RuntimeError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILED


if __name__ == "__main__":
    sys.exit(main())
