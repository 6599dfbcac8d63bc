"""Command-line front end.

Commands: ``point``, ``sweep``, ``min``, ``validate`` and ``figure1``.
Flag values override values read from ``--config`` (a flat ``key = value``
file using the flag names), which override the per-command defaults.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 validation failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .coverage import DeficitBreakdown, Scenario, deficits
from .minimizer import MinSearchConfig, grid_points, min_table, standard_grid
from .montecarlo import MonteCarloConfig, compare, simulate_reduced
from .quadrature import DEFAULT_CONFIG, QuadratureError
from .svgplot import line_panels

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4

SWEEP_COLUMNS = DeficitBreakdown.FIELDS
MIN_COLUMNS = (
    "m", "rho", "coverage_nominal", "test_size", "gamma_star",
    "min_coverage", "d_wm_at_min", "d_rd_at_min",
)
MAX_SWEEP_POINTS = 1_000_000

# dest -> converter; values may come from flags or the config file
FLAGS = {
    "m": str, "rho": str, "coverage": str, "test_size": str,
    "gamma": float, "gamma_min": float, "gamma_max": float, "step": float,
    "abs_tol": float, "reps": int, "seed": int, "streams": int,
    "format": str, "out": str,
}

DEFAULTS = {
    "point": dict(m="40", rho="0.6", coverage="0.95", test_size="0.1", gamma=2.0, format="json"),
    "sweep": dict(m="40", rho="0.6", coverage="0.95", test_size="0.1",
                  gamma_min=0.0, gamma_max=10.0, step=0.1, format="csv"),
    "min": dict(m="1,2,5,10,40,100", rho="0,0.3,0.6,0.8", coverage="0.9,0.95,0.98",
                test_size="0.02,0.05,0.1", gamma_max=15.0, step=0.05, format="csv"),
    "validate": dict(m="40", rho="0.6", coverage="0.95", test_size="0.1", gamma=2.0,
                     reps=10_000_000, seed=42, streams=1, format="text"),
    "figure1": dict(m="40", rho="0.3,0.6,0.8", coverage="0.95", test_size="0.1",
                    gamma_min=0.0, gamma_max=10.0, step=0.1, format="svg"),
}
FORMATS = {
    "point": ("json", "csv"),
    "sweep": ("csv", "json", "svg"),
    "min": ("csv", "json"),
    "validate": ("text", "json"),
    "figure1": ("svg", "csv"),
}


class UsageError(Exception):
    pass


def _num(v) -> str:
    return f"{v:.12g}"


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    g = shared.add_argument_group("shared options")
    g.add_argument("--m", help="residual degrees of freedom n - p (comma list for min)")
    g.add_argument("--rho", help="correlation of the two estimators (comma list for min/figure1)")
    g.add_argument("--coverage", help="nominal coverage 1 - alpha (comma list for min)")
    g.add_argument("--test-size", help="size of the preliminary t test (comma list for min)")
    g.add_argument("--gamma", type=float, help="scaled constraint violation")
    g.add_argument("--gamma-min", type=float)
    g.add_argument("--gamma-max", type=float, help="sweep end point / search bound for min")
    g.add_argument("--step", type=float, help="sweep step / coarse search step for min")
    g.add_argument("--abs-tol", type=float, help="absolute quadrature tolerance")
    g.add_argument("--reps", type=int, help="Monte Carlo replications")
    g.add_argument("--seed", type=int, help="Monte Carlo seed (u64)")
    g.add_argument("--streams", type=int, help="parallel worker streams")
    g.add_argument("--format", help="csv | json | svg (| text for validate)")
    g.add_argument("--out", help="output path (default: stdout)")
    g.add_argument("--config", help="flat key = value file mirroring the flag names")

    parser = argparse.ArgumentParser(
        prog="selcover",
        description="Coverage of confidence intervals after a preliminary t test.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("point", parents=[shared], help="full deficit breakdown at one gamma (JSON)")
    sub.add_parser("sweep", parents=[shared], help="breakdown over a gamma grid")
    sub.add_parser("min", parents=[shared], help="minimum coverage over gamma for a scenario grid")
    sub.add_parser("validate", parents=[shared], help="Monte Carlo check of the quadrature values")
    sub.add_parser("figure1", parents=[shared], help="d_wm, d_rd and coverage curves for several rho")
    return parser


def read_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = line.split("=", 1)
        else:
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = parts
        key = key.strip().lstrip("-").replace("-", "_")
        if key not in FLAGS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = FLAGS[key](value.strip())
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value.strip()!r}") from exc
    return values


def resolve(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS[args.command])
    opts.update(abs_tol=DEFAULT_CONFIG.abs_tol, streams=1, out=None)
    if args.config:
        opts.update(read_config(args.config))
    for key in FLAGS:
        v = getattr(args, key, None)
        if v is not None:
            opts[key] = v
    if opts["format"] not in FORMATS[args.command]:
        raise UsageError(
            f"--format {opts['format']} not available for {args.command} "
            f"(choose from {', '.join(FORMATS[args.command])})"
        )
    if opts["streams"] < 1:
        raise UsageError("--streams must be at least 1")
    if not opts["abs_tol"] > 0:
        raise UsageError("--abs-tol must be positive")
    return opts


def _floats(text, name) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad value for --{name}: {text!r}") from exc


def _single(opts, key, conv=float):
    vals = _floats(opts[key], key.replace("_", "-"))
    if len(vals) != 1:
        raise UsageError(f"--{key.replace('_', '-')} takes a single value for this command")
    v = vals[0]
    if conv is int:
        if v != int(v):
            raise UsageError(f"--{key} must be an integer")
        return int(v)
    return v


def _scenario(opts, rho=None) -> Scenario:
    try:
        return Scenario(
            m=_single(opts, "m", int),
            rho=_single(opts, "rho") if rho is None else rho,
            nominal_coverage=_single(opts, "coverage"),
            test_size=_single(opts, "test_size"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _quad(opts):
    return DEFAULT_CONFIG.with_abs_tol(opts["abs_tol"])


def _provenance(command, opts, keys) -> str:
    parts = ["selcover", command]
    for k in keys:
        v = opts[k]
        parts.append(f"--{k.replace('_', '-')} {v if isinstance(v, str) else _num(v)}")
    return " ".join(parts)


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from exc


def _sweep_grid(opts) -> list[float]:
    lo, hi, step = opts["gamma_min"], opts["gamma_max"], opts["step"]
    if not lo >= 0:
        raise UsageError("--gamma-min must be >= 0")
    if not hi >= lo:
        raise UsageError("--gamma-max must be >= --gamma-min")
    if not step > 0:
        raise UsageError("--step must be positive")
    if (hi - lo) / step > MAX_SWEEP_POINTS:
        raise UsageError("sweep grid too large")
    return grid_points(lo, hi, step) if hi > lo else [lo]


def _evaluate(scenario, gammas, quad, streams) -> list[DeficitBreakdown]:
    if streams <= 1:
        return [deficits(scenario, g, quad) for g in gammas]
    with ThreadPoolExecutor(max_workers=streams) as pool:
        return list(pool.map(lambda g: deficits(scenario, g, quad), gammas))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else _num(v) for v in row) + "\n")
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def cmd_point(opts) -> int:
    scenario = _scenario(opts)
    quad = _quad(opts)
    b = deficits(scenario, opts["gamma"], quad)
    if opts["format"] == "csv":
        text = _csv(SWEEP_COLUMNS, [[getattr(b, f) for f in SWEEP_COLUMNS]])
    else:
        text = _json({
            "scenario": {
                "m": scenario.m, "rho": scenario.rho,
                "coverage": scenario.nominal_coverage, "test_size": scenario.test_size,
            },
            "breakdown": b.as_dict(),
            "quadrature": quad.as_dict(),
        })
    _emit(text, opts["out"])
    return EXIT_OK


def _panels(curves):
    """curves: list of (label, breakdowns)."""
    def series(attr):
        return [(label, [b.gamma for b in bs], [getattr(b, attr) for b in bs]) for label, bs in curves]

    return [
        ("D_wm (wrong model)", series("d_wm")),
        ("D_rd (data re-use)", series("d_rd")),
        ("coverage of K", series("coverage_K")),
    ]


def cmd_sweep(opts) -> int:
    scenario = _scenario(opts)
    gammas = _sweep_grid(opts)
    rows = _evaluate(scenario, gammas, _quad(opts), opts["streams"])
    fmt = opts["format"]
    if fmt == "csv":
        text = _csv(SWEEP_COLUMNS, [[getattr(b, f) for f in SWEEP_COLUMNS] for b in rows])
    elif fmt == "json":
        text = _json([b.as_dict() for b in rows])
    else:
        keys = ("m", "rho", "coverage", "test_size", "gamma_min", "gamma_max", "step", "abs_tol")
        text = line_panels(
            _panels([(f"rho = {scenario.rho:g}", rows)]),
            xlabel="|gamma|",
            metadata=_provenance("sweep", opts, keys),
            title=f"m = {scenario.m}, nominal {scenario.nominal_coverage:g}, test size {scenario.test_size:g}",
        )
    _emit(text, opts["out"])
    return EXIT_OK


def cmd_figure1(opts) -> int:
    rhos = _floats(opts["rho"], "rho")
    gammas = _sweep_grid(opts)
    quad = _quad(opts)
    curves = []
    for rho in rhos:
        scenario = _scenario(opts, rho=rho)
        curves.append((f"|rho| = {abs(rho):g}", _evaluate(scenario, gammas, quad, opts["streams"])))
    if opts["format"] == "csv":
        rows = []
        for rho, (_, bs) in zip(rhos, curves):
            rows.extend([rho] + [getattr(b, f) for f in SWEEP_COLUMNS] for b in bs)
        text = _csv(("rho",) + SWEEP_COLUMNS, rows)
    else:
        keys = ("m", "rho", "coverage", "test_size", "gamma_min", "gamma_max", "step", "abs_tol")
        text = line_panels(
            _panels(curves), xlabel="|gamma|", metadata=_provenance("figure1", opts, keys),
            title="deficits and coverage as functions of |gamma|",
        )
    _emit(text, opts["out"])
    return EXIT_OK


def cmd_min(opts) -> int:
    ms = _floats(opts["m"], "m")
    if any(m != int(m) for m in ms):
        raise UsageError("--m values must be integers")
    try:
        scenarios = standard_grid(
            ms=[int(m) for m in ms],
            rhos=_floats(opts["rho"], "rho"),
            coverages=_floats(opts["coverage"], "coverage"),
            test_sizes=_floats(opts["test_size"], "test-size"),
        )
        search = MinSearchConfig(gamma_max=opts["gamma_max"], coarse_step=opts["step"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    results = min_table(scenarios, search, _quad(opts), workers=opts["streams"])
    if results and not any(r.ok for r in results):
        for r in results:
            print(f"error: {r.scenario}: {r.error}", file=sys.stderr)
        return EXIT_NUMERIC

    def row(r):
        s = r.scenario
        if not r.ok:
            return [s.m, s.rho, s.nominal_coverage, s.test_size, "", "", "", ""]
        b = r.breakdown_at_min
        return [s.m, s.rho, s.nominal_coverage, s.test_size, r.gamma_star, r.min_coverage, b.d_wm, b.d_rd]

    any_error = any(not r.ok for r in results)
    if opts["format"] == "json":
        text = _json([
            dict(zip(MIN_COLUMNS, row(r)), **({"error": r.error} if not r.ok else {}))
            for r in results
        ])
    else:
        header = MIN_COLUMNS + (("error",) if any_error else ())
        rows = [row(r) + ([r.error or ""] if any_error else []) for r in results]
        text = _csv(header, rows)
    _emit(text, opts["out"])
    return EXIT_OK


def cmd_validate(opts) -> int:
    scenario = _scenario(opts)
    quad = _quad(opts)
    gamma = opts["gamma"]
    try:
        mc = MonteCarloConfig(replications=opts["reps"], seed=opts["seed"], stream_count=opts["streams"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    breakdown = deficits(scenario, gamma, quad)
    estimates = simulate_reduced(scenario, gamma, mc)
    rows = compare(estimates, breakdown, quad.abs_tol)
    passed = all(r.passed for r in rows)
    if opts["format"] == "json":
        text = _json({
            "scenario": {"m": scenario.m, "rho": scenario.rho, "coverage": scenario.nominal_coverage,
                         "test_size": scenario.test_size, "gamma": gamma},
            "replications": mc.replications,
            "seed": mc.seed,
            "abs_tol": quad.abs_tol,
            "fields": [
                {"field": r.field, "quadrature": r.quadrature, "estimate": r.estimate, "se": r.se,
                 "z": r.z if math.isfinite(r.z) else str(r.z), "resolved": r.resolved,
                 "passed": r.passed}
                for r in rows
            ],
            "passed": passed,
        })
    else:
        lines = [
            f"scenario: m={scenario.m} rho={_num(scenario.rho)} coverage={_num(scenario.nominal_coverage)} "
            f"test_size={_num(scenario.test_size)} gamma={_num(gamma)}",
            f"replications={mc.replications} seed={mc.seed} abs_tol={_num(quad.abs_tol)}",
            f"{'field':<16}{'quadrature':>16}{'estimate':>16}{'se':>14}{'z':>9}  status",
        ]
        for r in rows:
            status = "ok" if r.passed else ("UNRESOLVED" if not r.resolved else "FAIL")
            lines.append(
                f"{r.field:<16}{r.quadrature:>16.10f}{r.estimate:>16.10f}{r.se:>14.3e}{r.z:>9.3f}  {status}"
            )
        lines.append(f"result: {'PASS' if passed else 'FAIL'}")
        text = "\n".join(lines) + "\n"
    _emit(text, opts["out"])
    return EXIT_OK if passed else EXIT_VALIDATION


COMMANDS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "min": cmd_min,
    "validate": cmd_validate,
    "figure1": cmd_figure1,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve(args)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"selcover {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as exc:
        print(f"selcover {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
