"""Command-line interface.

Subcommands: test (graph TV two-sample test), chisq (binned count
discrepancy), binned (torus-graph TV on cells), gof (goodness of fit
against a reference sample), regtest (regression residuals over a
covariate graph), simulate (draw a design's samples to CSV), power
(ROC AUC study table).

File formats: CSV with a header row, coordinate columns x1..xd, an
optional label column with values "x"/"y", values written with 17
significant digits.  Reports are JSON with the test-report fields plus
"schema" and the volatile "runtime_ms".  Exit codes: 0 completed
(regardless of the decision), 2 usage/parse/I-O error, 3 disconnected
graph (with a remediation hint).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from typing import Optional, Sequence

import numpy as np

from .data import TwoSample, build_two_sample
from .exceptions import GraphDisconnected, GraphTVError
from .graphs import bin_partition
from .inference import (
    GraphSpec,
    PermutationPlan,
    TestReport,
    binned_graph_tv_test,
    chi_squared_test,
    gof_test,
    permutation_test,
    regression_test,
)
from .simulate import (
    LocalizedAlternative,
    StatMethod,
    StudyConfig,
    run_power_study,
    sample_illustrative,
    sample_localized,
)

SCHEMA_VERSION = 1
THREADS_ENV = "GRAPHTV_THREADS"


class CLIError(Exception):
    """Usage or input error; mapped to exit code 2."""


def _fmt(v: float) -> str:
    return "%.17g" % float(v)


def _write_csv(path: Optional[str], header: list[str], rows) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    finally:
        if path:
            fh.close()


def _read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rdr = csv.reader(fh)
            header = next(rdr, None)
            rows = [r for r in rdr if r]
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc}") from exc
    if header is None:
        raise CLIError(f"{path}: empty file")
    return [h.strip() for h in header], rows


def read_points_csv(
    path: str, label_column: Optional[str] = None
) -> tuple[np.ndarray, Optional[list[str]]]:
    """Read an x1..xd coordinate CSV; optionally also a label column."""
    header, rows = _read_csv(path)
    coord_cols = []
    i = 1
    while f"x{i}" in header:
        coord_cols.append(header.index(f"x{i}"))
        i += 1
    if not coord_cols:
        raise CLIError(f"{path}: no coordinate columns x1..xd in header {header}")
    if not rows:
        raise CLIError(f"{path}: no data rows")
    try:
        pts = np.array(
            [[float(r[c]) for c in coord_cols] for r in rows], dtype=np.float64
        )
    except (ValueError, IndexError) as exc:
        raise CLIError(f"{path}: malformed row: {exc}") from exc
    labels = None
    if label_column is not None:
        if label_column not in header:
            raise CLIError(f"{path}: no column named {label_column!r}")
        lc = header.index(label_column)
        try:
            labels = [r[lc] for r in rows]
        except IndexError as exc:
            raise CLIError(f"{path}: malformed row: {exc}") from exc
    return pts, labels


def write_points_csv(
    path: Optional[str],
    pts: np.ndarray,
    labels: Optional[Sequence[str]] = None,
    label_name: str = "label",
) -> None:
    """Write points (and optional labels) in the x1..xd CSV format."""
    pts = np.atleast_2d(pts)
    d = pts.shape[1]
    header = [f"x{i + 1}" for i in range(d)]
    if labels is not None:
        header.append(label_name)
        rows = [[_fmt(v) for v in p] + [lab] for p, lab in zip(pts, labels)]
    else:
        rows = [[_fmt(v) for v in p] for p in pts]
    _write_csv(path, header, rows)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise CLIError(f"invalid {THREADS_ENV} value {env!r}") from exc
    return 1


def _graph_spec(args) -> GraphSpec:
    # Exactly one graph spec may be active; default is 10-NN.
    if args.knn is not None and args.eps is not None:
        raise CLIError("choose exactly one of --knn and --eps")
    if args.eps is not None:
        if args.eps == "auto":
            return GraphSpec(kind="eps", eps=None, density_bound=args.B_density)
        try:
            eps = float(args.eps)
        except ValueError as exc:
            raise CLIError(f"invalid --eps value {args.eps!r}") from exc
        return GraphSpec(kind="eps", eps=eps, density_bound=args.B_density)
    return GraphSpec(kind="knn", k=args.knn if args.knn is not None else 10)


def _split_labels(pts: np.ndarray, labels: list[str], path: str) -> TwoSample:
    seen = list(dict.fromkeys(labels))
    if len(seen) != 2:
        raise CLIError(
            f"{path}: label column must hold exactly two distinct values, got {seen}"
        )
    x_lab = "x" if set(seen) == {"x", "y"} else seen[0]
    mask = np.asarray([v == x_lab for v in labels], dtype=bool)
    return build_two_sample(pts[mask], pts[~mask])


def _load_two_sample(args) -> TwoSample:
    if args.data is not None:
        if args.x is not None or args.y is not None:
            raise CLIError("--data cannot be combined with --x/--y")
        label_column = args.label_column or "label"
        pts, labels = read_points_csv(args.data, label_column=label_column)
        return _split_labels(pts, labels, args.data)
    if args.x is None or args.y is None:
        raise CLIError("provide --x and --y, or --data with --label-column")
    px, _ = read_points_csv(args.x)
    py, _ = read_points_csv(args.y)
    if px.shape[1] != py.shape[1]:
        raise CLIError("--x and --y dimensions disagree")
    return build_two_sample(px, py)


def _emit_report(report: TestReport, out: Optional[str], t0: float) -> None:
    payload = dict(report.to_dict())
    payload["schema"] = SCHEMA_VERSION
    payload["runtime_ms"] = int(round((time.perf_counter() - t0) * 1000.0))
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_witness_points(
    path: str, pts: np.ndarray, labels: Sequence[str], member: np.ndarray
) -> None:
    d = pts.shape[1]
    header = [f"x{i + 1}" for i in range(d)] + ["label", "in_witness"]
    rows = [
        [_fmt(v) for v in p] + [lab, "1" if m else "0"]
        for p, lab, m in zip(pts, labels, member)
    ]
    _write_csv(path, header, rows)


def _pooled_labels(ts: TwoSample) -> list[str]:
    return ["x"] * ts.n1 + ["y"] * ts.n2


def _witness_mask(n: int, witness) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    if witness:
        mask[list(witness)] = True
    return mask


def cmd_test(args) -> int:
    t0 = time.perf_counter()
    ts = _load_two_sample(args)
    spec = _graph_spec(args)
    g, meta = spec.build(ts)
    report = permutation_test(
        ts,
        g,
        PermutationPlan(args.B, args.seed),
        alpha=args.alpha,
        n_threads=_threads(args),
        graph_meta=meta,
    )
    _emit_report(report, args.out, t0)
    if args.witness_out:
        mask = _witness_mask(ts.n, report.witness)
        _write_witness_points(args.witness_out, ts.points, _pooled_labels(ts), mask)
    return 0


def cmd_chisq(args) -> int:
    t0 = time.perf_counter()
    ts = _load_two_sample(args)
    report = chi_squared_test(
        ts,
        args.bin,
        PermutationPlan(args.B, args.seed),
        alpha=args.alpha,
        n_threads=_threads(args),
    )
    _emit_report(report, args.out, t0)
    return 0


def cmd_binned(args) -> int:
    t0 = time.perf_counter()
    ts = _load_two_sample(args)
    report = binned_graph_tv_test(
        ts,
        args.bin,
        PermutationPlan(args.B, args.seed),
        alpha=args.alpha,
        n_threads=_threads(args),
    )
    _emit_report(report, args.out, t0)
    if args.witness_out:
        # Witness cells are mapped back to points: a point is in the
        # witness iff its cell is.
        binning = bin_partition(ts, args.bin)
        cell_mask = _witness_mask(binning.n_cells, report.witness)
        mask = cell_mask[binning.cell_index_of]
        _write_witness_points(args.witness_out, ts.points, _pooled_labels(ts), mask)
    return 0


def cmd_gof(args) -> int:
    t0 = time.perf_counter()
    if args.x is None or args.reference is None:
        raise CLIError("gof requires --x and --reference")
    pts, _ = read_points_csv(args.x)
    ref, _ = read_points_csv(args.reference)
    if pts.shape[1] != ref.shape[1]:
        raise CLIError("--x and --reference dimensions disagree")
    report = gof_test(
        pts,
        ref,
        graph=_graph_spec(args),
        plan=PermutationPlan(args.B, args.seed),
        alpha=args.alpha,
        n_threads=_threads(args),
    )
    _emit_report(report, args.out, t0)
    if args.witness_out:
        pooled = np.vstack([pts, ref])
        labels = ["x"] * len(pts) + ["y"] * len(ref)
        mask = _witness_mask(len(pooled), report.witness)
        _write_witness_points(args.witness_out, pooled, labels, mask)
    return 0


def cmd_regtest(args) -> int:
    t0 = time.perf_counter()
    if args.data is None:
        raise CLIError("regtest requires --data with a residual column")
    pts, res_text = read_points_csv(args.data, label_column=args.residual_column)
    try:
        residuals = [float(v) for v in res_text]
    except ValueError as exc:
        raise CLIError(f"non-numeric residual: {exc}") from exc
    spec = _graph_spec(args)
    g, meta = spec.build(pts)
    report = regression_test(
        pts,
        residuals,
        g,
        PermutationPlan(args.B, args.seed),
        alpha=args.alpha,
        n_threads=_threads(args),
        graph_meta=meta,
    )
    _emit_report(report, args.out, t0)
    if args.witness_out:
        mask = _witness_mask(len(pts), report.witness)
        _write_witness_points(args.witness_out, pts, res_text, mask)
    return 0


def _parse_center(text: str, name: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise CLIError(f"invalid {name} {text!r}") from exc


def _parse_cube_index(text: Optional[str], d: int) -> tuple[int, ...]:
    if text is None:
        return (1,) * d
    try:
        j = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise CLIError(f"invalid --cube-index {text!r}") from exc
    return j


def cmd_simulate(args) -> int:
    if args.design == "localized":
        alt = LocalizedAlternative(
            d=args.d,
            eta=args.eta,
            s=args.s,
            cube_index=_parse_cube_index(args.cube_index, args.d),
        )
        pts = sample_localized(args.n, alt, args.seed)
        write_points_csv(args.out, pts)
        return 0
    ts = sample_illustrative(
        args.n1,
        args.n2,
        args.seed,
        pi_mix=args.pi,
        eta_ball=args.ball,
        x_p=_parse_center(args.x_center, "--x-center"),
        x_q=_parse_center(args.y_center, "--y-center"),
    )
    write_points_csv(args.out, ts.points, labels=_pooled_labels(ts))
    return 0


def _parse_method(text: str) -> StatMethod:
    kind, _, param = text.partition(":")
    try:
        if kind == "knn":
            return StatMethod(
                "graph_tv", graph=GraphSpec(kind="knn", k=int(param) if param else 10)
            )
        if kind == "eps":
            eps = None if param in ("", "auto") else float(param)
            return StatMethod("graph_tv", graph=GraphSpec(kind="eps", eps=eps))
        if kind == "binned":
            return StatMethod("binned_graph_tv", binwidth=float(param))
        if kind == "chisq":
            return StatMethod("chi_squared", binwidth=float(param))
    except ValueError as exc:
        raise CLIError(f"invalid --method {text!r}: {exc}") from exc
    raise CLIError(
        f"unknown method {text!r}; use knn:K, eps:V, eps:auto, binned:W, or chisq:W"
    )


def cmd_power(args) -> int:
    methods = tuple(_parse_method(m) for m in (args.method or ["knn:10"]))
    alternative = None
    if args.design == "localized":
        alternative = LocalizedAlternative(
            d=args.d,
            eta=args.eta,
            s=args.s,
            cube_index=_parse_cube_index(args.cube_index, args.d),
        )
    cfg = StudyConfig(
        design=args.design,
        n1=args.n1,
        n2=args.n2,
        trials=args.trials,
        methods=methods,
        seed=args.seed,
        alternative=alternative,
        pi_mix=args.pi,
        eta_ball=args.ball,
        x_p=_parse_center(args.x_center, "--x-center"),
        x_q=_parse_center(args.y_center, "--y-center"),
    )
    rows = run_power_study(cfg)
    header = ["design", "method", "eta", "s", "auc", "trials", "n1", "n2", "seed"]
    out_rows = []
    for r in rows:
        out_rows.append(
            [
                r["design"],
                r["method"],
                "" if r["eta"] is None else _fmt(r["eta"]),
                "" if r["s"] is None else _fmt(r["s"]),
                _fmt(r["auc"]),
                str(r["trials"]),
                str(r["n1"]),
                str(r["n2"]),
                str(r["seed"]),
            ]
        )
    _write_csv(args.out, header, out_rows)
    return 0


def _add_io_flags(p: argparse.ArgumentParser, witness: bool = True) -> None:
    p.add_argument("--x", help="CSV of the first sample (columns x1..xd)")
    p.add_argument("--y", help="CSV of the second sample")
    p.add_argument("--data", help="single pooled CSV with a label column")
    p.add_argument(
        "--label-column",
        help='label column name for --data (default "label"; values "x"/"y")',
    )
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    if witness:
        p.add_argument(
            "--witness-out",
            help="write the witness as CSV (coordinates, label, in_witness)",
        )


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--knn", type=int, help="k-nearest-neighbor graph (default k=10)")
    p.add_argument("--eps", help='neighborhood radius, a number or "auto"')
    p.add_argument(
        "--B-density",
        dest="B_density",
        type=float,
        default=2.0,
        help="density bound used by --eps auto (default 2)",
    )


def _add_test_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--B", type=int, default=199, help="permutations (default 199)")
    p.add_argument("--alpha", type=float, default=0.05, help="level (default 0.05)")
    p.add_argument("--seed", type=int, default=0, help="seed (default 0)")
    p.add_argument(
        "--threads",
        type=int,
        help=f"worker threads (default: ${THREADS_ENV} or 1; flag wins)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphtv",
        description="Graph total-variation IPM two-sample testing toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="graph TV IPM two-sample test")
    _add_io_flags(p)
    _add_graph_flags(p)
    _add_test_flags(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("chisq", help="binned count-discrepancy test")
    _add_io_flags(p, witness=False)
    p.add_argument("--bin", type=float, required=True, help="binwidth in (0, 1]")
    _add_test_flags(p)
    p.set_defaults(func=cmd_chisq)

    p = sub.add_parser("binned", help="binned graph TV test on the torus grid")
    _add_io_flags(p)
    p.add_argument("--bin", type=float, required=True, help="binwidth in (0, 1]")
    _add_test_flags(p)
    p.set_defaults(func=cmd_binned)

    p = sub.add_parser("gof", help="goodness of fit against a reference sample")
    p.add_argument("--x", required=True, help="CSV of the observed sample")
    p.add_argument("--reference", required=True, help="CSV of null-model draws")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument(
        "--witness-out",
        help="write the witness as CSV (coordinates, label, in_witness)",
    )
    _add_graph_flags(p)
    _add_test_flags(p)
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("regtest", help="regression residual test over covariates")
    p.add_argument("--data", required=True, help="CSV with x1..xd and residuals")
    p.add_argument(
        "--residual-column",
        default="residual",
        help='residual column name (default "residual")',
    )
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument(
        "--witness-out",
        help="write the witness as CSV (coordinates, residual, in_witness)",
    )
    _add_graph_flags(p)
    _add_test_flags(p)
    p.set_defaults(func=cmd_regtest)

    p = sub.add_parser("simulate", help="draw a design's samples to CSV")
    p.add_argument(
        "--design", choices=["localized", "illustrative"], default="localized"
    )
    p.add_argument("--n", type=int, default=100, help="points (localized design)")
    p.add_argument("--d", type=int, default=2, help="dimension (localized design)")
    p.add_argument("--eta", type=float, default=0.1, help="cube side length")
    p.add_argument("--s", type=float, default=1.0, help="signal strength in [0, 2]")
    p.add_argument("--cube-index", help='perturbed cube, e.g. "1,1" (default all 1)')
    p.add_argument("--n1", type=int, default=100, help="X size (illustrative)")
    p.add_argument("--n2", type=int, default=100, help="Y size (illustrative)")
    p.add_argument("--pi", type=float, default=0.02, help="mixture weight")
    p.add_argument("--ball", type=float, default=0.5, help="contaminant ball radius")
    p.add_argument("--x-center", default="1,5", help="X ball center")
    p.add_argument("--y-center", default="5,1", help="Y ball center")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("power", help="ROC AUC power study")
    p.add_argument(
        "--design", choices=["localized", "illustrative"], default="localized"
    )
    p.add_argument(
        "--method",
        action="append",
        help="knn:K | eps:V | eps:auto | binned:W | chisq:W (repeatable)",
    )
    p.add_argument("--n1", type=int, default=100)
    p.add_argument("--n2", type=int, default=100)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--cube-index", help='perturbed cube, e.g. "1,1" (default all 1)')
    p.add_argument("--pi", type=float, default=0.02)
    p.add_argument("--ball", type=float, default=0.5)
    p.add_argument("--x-center", default="1,5")
    p.add_argument("--y-center", default="5,1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_power)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GraphDisconnected as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CLIError, GraphTVError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
