"""Command line: generate points, fit, run the baseline, compare methods.

    ellipsoid-fit generate --axes 5 3 1 --angles 0 0 0 -n 6 --seed 1 -o pts.csv
    ellipsoid-fit fit pts.csv -o report.json
    ellipsoid-fit baseline pts.csv -o baseline.json
    ellipsoid-fit compare --axes 10 3 1 --angles 50 60 40 --trials 50 -o summary.csv

Exit codes: 0 success, 1 usage, 2 fit failed or not converged, 3 I/O.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .errors import EllipsoidFitError, FitFailedError, InvalidInputError
from .fit import FitConfig, FitReport, describe, fit_ellipsoid, single_pass_fit
from .orientation import angle_difference
from .synth import SynthSpec, generate

SCHEMA = "ellipsoid-fit-report/1"
EXIT_OK, EXIT_USAGE, EXIT_FIT, EXIT_IO = 0, 1, 2, 3
METHODS = {"iterative": fit_ellipsoid, "single-pass": single_pass_fit}
TRACE_COLUMNS = [
    "outer_iter", "inner_k", "omega", "off_diag_norm",
    "abs_err_A", "abs_err_B", "abs_err_C",
    "abs_err_alpha", "abs_err_beta", "abs_err_gamma",
]

log = logging.getLogger("ellipsoid_fit")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- file formats

def write_points(path, points) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("x,y,z\n")
        for x, y, z in np.asarray(points, dtype=float):
            fh.write(f"{x:.17g},{y:.17g},{z:.17g}\n")


def read_points(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "y", "z"]:
        raise InvalidInputError(f"{path}: expected header 'x,y,z'")
    try:
        pts = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc
    if pts.ndim != 2 or pts.shape[1:] != (3,):
        raise InvalidInputError(f"{path}: every row needs three coordinates")
    return pts


def report_to_dict(report: FitReport, manifest: dict | None = None) -> dict:
    g = report.geometry
    return {
        "schema": SCHEMA,
        "method": report.method,
        "converged": bool(report.converged),
        "semi_axes": list(g.semi_axes),
        "euler_deg": list(g.euler_deg),
        "center": list(g.center),
        "chi": g.chi,
        "degenerate_axes": g.degenerate_axes,
        "gimbal_lock": g.gimbal_lock,
        "fisher": report.fisher_original_frame.tolist(),
        "rotation": report.rotation.tolist(),
        "outer_iterations": report.outer_iterations,
        "inner_iterations": report.inner_iterations,
        "init_fallback": report.init_fallback,
        "trace": [
            {
                "outer_iter": r.outer_iter,
                "k_used": r.k_used,
                "omega": r.omega,
                "off_diag_norm": r.off_diag_norm,
                "inner_iterations": r.inner_iterations,
                "accepted": r.accepted,
                "ellipsoid": r.ellipsoid,
            }
            for r in report.per_iteration_trace
        ],
        "manifest": manifest or {},
    }


def read_report(path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if data.get("schema") != SCHEMA:
        raise InvalidInputError(f"{path}: unsupported report schema {data.get('schema')!r}")
    return data


def _dump_json(obj, out) -> None:
    text = json.dumps(obj, indent=2, allow_nan=True)
    if out is None or str(out) == "-":
        print(text)
    else:
        Path(out).write_text(text + "\n")


def _manifest(command, args, config=None, inputs=(), outputs=(), started=None) -> dict:
    return {
        "command": command,
        "argv": sys.argv[1:],
        "config": config or {},
        "seed": getattr(args, "seed", None),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs if p not in (None, "-")],
        "wall_time_s": None if started is None else time.perf_counter() - started,
        "version": __version__,
    }


# ---------------------------------------------------------------- arguments

def _add_spec_args(p):
    p.add_argument("--spec", type=Path, help="JSON file with SynthSpec fields")
    p.add_argument("--axes", type=float, nargs=3, metavar=("A", "B", "C"))
    p.add_argument("--angles", type=float, nargs=3, metavar=("ALPHA", "BETA", "GAMMA"),
                   default=None, help="Euler angles in degrees")
    p.add_argument("-n", "--n-points", type=int, default=None)
    p.add_argument("--noise", type=float, default=None, help="Gaussian noise sigma")
    p.add_argument("--seed", type=int, default=None)


def _spec_from_args(args) -> SynthSpec:
    fields = {}
    if args.spec is not None:
        fields = json.loads(Path(args.spec).read_text())
    if args.axes is not None:
        fields["semi_axes"] = args.axes
    if args.angles is not None:
        fields["euler_deg"] = args.angles
    if args.n_points is not None:
        fields["n_points"] = args.n_points
    if args.noise is not None:
        fields["noise_sigma"] = args.noise
    if args.seed is not None:
        fields["seed"] = args.seed
    if "semi_axes" not in fields:
        raise UsageError("give --axes or a --spec file with semi_axes")
    return SynthSpec.from_dict(fields)


def _add_fit_args(p):
    p.add_argument("points", type=Path, help="points CSV (header x,y,z)")
    p.add_argument("-o", "--out", default=None, help="report JSON (default stdout)")
    p.add_argument("--seed", type=int, default=0, help="seed for the random initial frame")
    p.add_argument("--init", choices=["random", "fisher", "identity"], default="random")
    p.add_argument("--k-max", type=float, default=1e10)
    p.add_argument("--max-outer", type=int, default=100)
    p.add_argument("--off-diag-tol", type=float, default=1e-8)
    p.add_argument("--trace-tol", type=float, default=1e-6)
    p.add_argument("--fit-center", action="store_true",
                   help="also fit the center (needs >= 9 points)")
    order = p.add_mutually_exclusive_group()
    order.add_argument("--axis-order", choices=["descending", "ascending"], default="descending")
    order.add_argument("--reference-axes", type=float, nargs=3, metavar=("A", "B", "C"),
                       help="label body axes like these reference semi-axes")


def _config_from_args(args) -> FitConfig:
    order = tuple(args.reference_axes) if args.reference_axes else args.axis_order
    return FitConfig(
        k_max=args.k_max,
        max_outer_iterations=args.max_outer,
        off_diag_tol=args.off_diag_tol,
        trace_tol=args.trace_tol,
        init_mode=args.init,
        rng_seed=args.seed,
        fit_center=args.fit_center,
        axis_order=order,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ellipsoid-fit", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample points on a synthetic ellipsoid")
    _add_spec_args(g)
    g.add_argument("-o", "--out", type=Path, required=True, help="points CSV to write")

    for name, helptext in (("fit", "iterative fit"), ("baseline", "single-pass fit")):
        _add_fit_args(sub.add_parser(name, help=helptext))

    c = sub.add_parser("compare", help="recovery errors over repeated trials")
    _add_spec_args(c)
    c.add_argument("--methods", default="iterative,single-pass",
                   help="comma separated subset of: " + ", ".join(METHODS))
    c.add_argument("--trials", type=int, default=10)
    c.add_argument("--init", choices=["random", "fisher", "identity"], default="random")
    c.add_argument("--reports", type=Path, nargs="+",
                   help="summarize existing report JSON files instead of fitting")
    c.add_argument("-o", "--out", type=Path, default=None, help="summary CSV (default stdout)")
    c.add_argument("--emit-trace", type=Path, default=None, metavar="DIR",
                   help="write one per-iteration trace CSV per method and trial")
    return parser


# ---------------------------------------------------------------- commands

def cmd_generate(args) -> int:
    started = time.perf_counter()
    spec = _spec_from_args(args)
    pts = generate(spec)
    write_points(args.out, pts)
    manifest = _manifest("generate", args, asdict(spec), outputs=[args.out], started=started)
    manifest["seed"] = spec.seed
    Path(str(args.out) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(json.dumps(manifest, indent=2))
    return EXIT_OK


def _cmd_fit(args, method: str) -> int:
    started = time.perf_counter()
    pts = read_points(args.points)
    cfg = _config_from_args(args)
    config = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()}
    try:
        report = METHODS[method](pts, cfg)
    except FitFailedError as exc:
        manifest = _manifest(method, args, config, [args.points], [args.out], started)
        _dump_json({"schema": SCHEMA, "method": method, "converged": False,
                    "error": str(exc), "diagnostics": exc.diagnostics,
                    "manifest": manifest}, args.out)
        return EXIT_FIT
    manifest = _manifest(method, args, config, [args.points], [args.out], started)
    _dump_json(report_to_dict(report, manifest), args.out)
    return EXIT_OK if report.converged else EXIT_FIT


def cmd_fit(args) -> int:
    return _cmd_fit(args, "iterative")


def cmd_baseline(args) -> int:
    return _cmd_fit(args, "single-pass")


def _errors(semi_axes, euler_deg, spec: SynthSpec) -> dict:
    truth_ax = np.asarray(spec.semi_axes)
    ax = np.asarray(semi_axes)
    rel = np.abs(ax - truth_ax) / truth_ax
    ang = [angle_difference(a, b) for a, b in zip(euler_deg, spec.euler_deg)]
    return {
        "err_A": float(rel[0]), "err_B": float(rel[1]), "err_C": float(rel[2]),
        "err_alpha": ang[0], "err_beta": ang[1], "err_gamma": ang[2],
        "max_axis_err": float(rel.max()), "max_angle_err": float(max(ang)),
    }


def trace_rows(report: FitReport, spec: SynthSpec) -> list[dict]:
    """Per-iteration absolute errors against the generating parameters."""
    rows = []
    truth = np.asarray(spec.semi_axes)
    for rec in report.per_iteration_trace:
        row = {"outer_iter": rec.outer_iter, "inner_k": rec.k_used, "omega": rec.omega,
               "off_diag_norm": rec.off_diag_norm}
        try:
            if not rec.ellipsoid:
                raise EllipsoidFitError("not an ellipsoid")
            g = describe(rec.eigenvalues, rec.rotation, rec.center, report.points,
                         spec.semi_axes)
            errs = np.abs(np.asarray(g.semi_axes) - truth)
            angs = [angle_difference(a, b) for a, b in zip(g.euler_deg, spec.euler_deg)]
        except EllipsoidFitError:
            errs, angs = [np.nan] * 3, [np.nan] * 3
        row.update(zip(TRACE_COLUMNS[4:], [*map(float, errs), *map(float, angs)]))
        rows.append(row)
    return rows


SUMMARY_COLUMNS = [
    "method", "trial", "seed", "converged", "outer_iterations", "inner_iterations",
    "A", "B", "C", "alpha", "beta", "gamma",
    "err_A", "err_B", "err_C", "err_alpha", "err_beta", "err_gamma",
    "max_axis_err", "max_angle_err",
]


def _summary_row(method, trial, seed, converged, outer, inner, axes, angles, spec):
    row = {"method": method, "trial": trial, "seed": seed, "converged": int(converged),
           "outer_iterations": outer, "inner_iterations": inner,
           **dict(zip(["A", "B", "C"], axes)), **dict(zip(["alpha", "beta", "gamma"], angles))}
    row.update(_errors(axes, angles, spec))
    return row


def _aggregate(rows: list[dict]) -> list[dict]:
    out = []
    numeric = SUMMARY_COLUMNS[3:]
    for method in dict.fromkeys(r["method"] for r in rows):
        sub = [r for r in rows if r["method"] == method and r["trial"] not in ("median", "max")]
        for stat, fn in (("median", np.nanmedian), ("max", np.nanmax)):
            agg = {"method": method, "trial": stat, "seed": ""}
            for col in numeric:
                agg[col] = float(fn([float(r[col]) for r in sub]))
            if stat == "max":
                agg["converged"] = sum(int(r["converged"]) for r in sub)
            out.append(agg)
    return out


def _write_csv(rows, columns, out) -> None:
    fh = sys.stdout if out is None else open(out, "w", newline="")
    try:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                        for k, v in r.items()})
    finally:
        if out is not None:
            fh.close()


def cmd_compare(args) -> int:
    started = time.perf_counter()
    spec = _spec_from_args(args)
    rows = []
    if args.reports:
        for i, path in enumerate(args.reports):
            rep = read_report(path)
            rows.append(_summary_row(rep["method"], i, "", rep["converged"],
                                     rep["outer_iterations"], rep["inner_iterations"],
                                     rep["semi_axes"], rep["euler_deg"], spec))
    else:
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        unknown = [m for m in methods if m not in METHODS]
        if unknown or not methods:
            raise UsageError(f"unknown methods: {unknown}")
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        if args.emit_trace is not None:
            args.emit_trace.mkdir(parents=True, exist_ok=True)
        for trial in range(args.trials):
            seed = spec.seed + trial
            tspec = spec.with_seed(seed)
            pts = generate(tspec)
            cfg = FitConfig(init_mode=args.init, rng_seed=seed, axis_order=spec.semi_axes)
            for method in methods:
                try:
                    rep = METHODS[method](pts, cfg)
                except FitFailedError:
                    rows.append({"method": method, "trial": trial, "seed": seed, "converged": 0,
                                 **{c: np.nan for c in SUMMARY_COLUMNS[4:]}})
                    continue
                g = rep.geometry
                rows.append(_summary_row(method, trial, seed, rep.converged, rep.outer_iterations,
                                         rep.inner_iterations, g.semi_axes, g.euler_deg, tspec))
                if args.emit_trace is not None:
                    _write_csv(trace_rows(rep, tspec), TRACE_COLUMNS,
                               args.emit_trace / f"trace_{method}_{trial:03d}.csv")
    rows += _aggregate(rows)
    _write_csv(rows, SUMMARY_COLUMNS, args.out)
    if args.out is not None:
        manifest = _manifest("compare", args, asdict(spec), outputs=[args.out], started=started)
        Path(str(args.out) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "fit": cmd_fit, "baseline": cmd_baseline,
            "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ellipsoid-fit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidInputError as exc:
        print(f"ellipsoid-fit: {exc}", file=sys.stderr)
        return EXIT_IO if args.command != "generate" else EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"ellipsoid-fit: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
