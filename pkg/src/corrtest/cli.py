"""Command-line front end.

Subcommands: ``test`` runs one hypothesis test on CSV data, ``simulate``
runs type-I-error tables or power curves, ``combined`` runs the
simultaneous covariance/correlation comparison of two groups.  Every
output embeds a manifest (command, configuration echo, seed, version,
input digests) and is byte-reproducible for a fixed seed; wall-clock
timing goes to stderr only.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 internal numerical error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time

import numpy as np

from . import __version__
from .combined import coordinate_labels, contrast_statistic, equicoordinate_test, taylor_combined_test
from .errors import (
    ArgumentError,
    ConfigError,
    CorrTestError,
    DegenerateDataError,
    DegenerateHypothesisError,
    DimensionError,
    NumericalError,
    TransformDomainError,
)
from .estimators import GroupSample
from .hypotheses import (
    equal_correlation_matrices,
    equal_correlations,
    given_correlation,
    identity_correlation,
    load_custom_csv,
)
from .matops import Dims
from .methods import METHODS, run_method
from .quadform import DEFAULT_MC_REPS
from .resampling import DEFAULT_BOOT_REPS
from .simlab import (
    DISTRIBUTIONS,
    SCENARIOS,
    DESK_BOOT_REPS,
    DESK_MC_REPS,
    DESK_RUNS,
    DistributionSpec,
    power_curve,
    scenario,
    type1_experiment,
)

HYPOTHESES = (
    "equal-corr-matrices",
    "identity-corr",
    "given-corr",
    "equal-correlations",
    "custom",
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def read_csv_matrix(path: str) -> np.ndarray:
    """Read a numeric CSV (one row per subject); a non-numeric first row
    is treated as a header."""
    rows: list[list[float]] = []
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DegenerateDataError(f"{path}: cannot open ({exc.strerror})") from None
    with fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            try:
                values = [float(cell) for cell in record]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise DegenerateDataError(
                    f"{path}: line {lineno}: non-numeric value"
                ) from None
            rows.append(values)
    if not rows:
        raise DegenerateDataError(f"{path}: no data rows")
    width = len(rows[0])
    for offset, row in enumerate(rows):
        if len(row) != width:
            raise DegenerateDataError(
                f"{path}: inconsistent column count near data row {offset + 1}"
            )
    return np.asarray(rows, dtype=float)


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def build_manifest(command: str, config: dict, seed: int, inputs: list[str]) -> dict:
    return {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "inputs": [{"path": p, "sha256": _sha256(p)} for p in inputs],
    }


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_document(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _csv_document(manifest: dict, header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _load_groups(paths: list[str]) -> list[GroupSample]:
    groups = [GroupSample(read_csv_matrix(p)) for p in paths]
    d = groups[0].d
    for path, g in zip(paths[1:], groups[1:]):
        if g.d != d:
            raise DegenerateDataError(
                f"{path}: has {g.d} columns, but {paths[0]} has {d}"
            )
    return groups


def _build_hypothesis(args, a: int, d: int):
    dims = Dims(d, a=a)
    name = args.hypothesis
    if name == "equal-corr-matrices":
        return equal_correlation_matrices(a, dims)
    if name in ("identity-corr", "equal-correlations", "given-corr") and a != 1:
        raise ConfigError(f"hypothesis {name!r} is a one-group hypothesis, got {a} groups")
    if name == "identity-corr":
        return identity_correlation(dims)
    if name == "equal-correlations":
        return equal_correlations(dims)
    if name == "given-corr":
        if not args.hypothesis_file:
            raise ConfigError("--hypothesis given-corr needs --hypothesis-file <R.csv>")
        return given_correlation(read_csv_matrix(args.hypothesis_file))
    if not args.hypothesis_file:
        raise ConfigError("--hypothesis custom needs --hypothesis-file <[C|zeta].csv>")
    return load_custom_csv(args.hypothesis_file, a=a, dims=dims)


def cmd_test(args) -> int:
    groups = _load_groups(args.data)
    h = _build_hypothesis(args, a=len(groups), d=groups[0].d)
    reps = args.boot if args.method.startswith(("ats-par", "ats-wild")) else args.reps
    report = run_method(
        args.method, groups, h, alpha=args.alpha, reps=reps, seed=args.seed
    )
    inputs = list(args.data) + ([args.hypothesis_file] if args.hypothesis_file else [])
    manifest = build_manifest(
        "test",
        {
            "hypothesis": args.hypothesis,
            "method": args.method,
            "alpha": args.alpha,
            "reps": reps,
            "groups": len(groups),
        },
        args.seed,
        inputs,
    )
    _emit(_json_document({"schema": 1, "manifest": manifest, "report": report.to_dict()}),
          args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    methods = tuple(args.method) if args.method else ("ats-par",)
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; expected one of {METHODS}")
    sc = scenario(
        args.scenario,
        dist=DistributionSpec(args.dist),
        n=args.n,
        d=args.d,
        methods=methods,
        runs=args.runs,
        mc_reps=args.reps,
        boot_reps=args.boot,
        alpha=args.alpha,
        seed=args.seed,
    )
    config = {
        "scenario": args.scenario,
        "dist": args.dist,
        "n": sc.N,
        "d": args.d,
        "methods": list(methods),
        "runs": args.runs,
        "reps": args.reps,
        "boot": args.boot,
        "alpha": args.alpha,
    }
    if args.delta_grid:
        deltas = [float(x) for x in args.delta_grid.split(",") if x.strip()]
        rows = power_curve(sc, deltas, n_jobs=args.jobs)
        config["delta_grid"] = deltas
        manifest = build_manifest("simulate", config, args.seed, [])
        header = ["scenario", "distribution", "N", "method", "delta", "runs", "rate", "se"]
        body = [
            [r["scenario"], r["distribution"], str(r["N"]), r["method"],
             f"{r['delta']:g}", str(r["runs"]), f"{r['rate']:.6f}", f"{r['se']:.6f}"]
            for r in rows
        ]
    else:
        rows = type1_experiment(sc, n_jobs=args.jobs)
        manifest = build_manifest("simulate", config, args.seed, [])
        header = ["scenario", "distribution", "N", "method", "runs", "rate", "se", "in_band"]
        body = [
            [r["scenario"], r["distribution"], str(r["N"]), r["method"], str(r["runs"]),
             f"{r['rate']:.6f}", f"{r['se']:.6f}", str(r["in_band"]).lower()]
            for r in rows
        ]
    _emit(_csv_document(manifest, header, body), args.out)
    return EXIT_OK


def cmd_combined(args) -> int:
    groups = _load_groups(args.data)
    if len(groups) != 2:
        raise ConfigError(f"the combined test needs exactly 2 data files, got {len(groups)}")
    if args.procedure == "equicoordinate":
        cs = contrast_statistic(groups[0], groups[1])
        verdict = equicoordinate_test(cs, alpha=args.alpha, reps=args.reps, seed=args.seed)
    else:
        verdict = taylor_combined_test(
            groups[0], groups[1], alpha=args.alpha, reps=args.reps, seed=args.seed
        )
    labels = coordinate_labels(groups[0].d)
    manifest = build_manifest(
        "combined",
        {"procedure": args.procedure, "alpha": args.alpha, "reps": args.reps},
        args.seed,
        list(args.data),
    )
    payload = {
        "schema": 1,
        "manifest": manifest,
        "verdict": {
            "reject_any": verdict.reject_any,
            "classification": verdict.classification,
            "flagged_coordinates": [
                {"coordinate": j, "label": labels[j - 1]} for j in verdict.flagged_coordinates
            ],
            "beta_tilde": verdict.beta_tilde,
            "z_quantile": verdict.z_quantile,
            "per_coordinate_quantiles": [float(q) for q in verdict.per_coordinate_quantiles],
        },
    }
    _emit(_json_document(payload), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrtest",
        description="Hypothesis tests on correlation matrices of independent groups.",
    )
    parser.add_argument("--version", action="version", version=f"corrtest {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="test a hypothesis on CSV data")
    p_test.add_argument("--data", action="append", required=True,
                        help="CSV file with one group's data (repeat per group)")
    p_test.add_argument("--hypothesis", choices=HYPOTHESES, required=True)
    p_test.add_argument("--hypothesis-file",
                        help="CSV with the target matrix R (given-corr) or [C|zeta] (custom)")
    p_test.add_argument("--method", choices=METHODS, default="ats-par")
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--reps", type=int, default=DEFAULT_MC_REPS,
                        help="Monte-Carlo replicates (ats-mc, atsfz-mc, ats-tay)")
    p_test.add_argument("--boot", type=int, default=DEFAULT_BOOT_REPS,
                        help="bootstrap replicates (ats-par, ats-wild)")
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--out", help="write JSON here instead of stdout")
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="run a simulation study")
    p_sim.add_argument("--scenario", choices=SCENARIOS, required=True)
    p_sim.add_argument("--dist", choices=DISTRIBUTIONS, default="normal")
    p_sim.add_argument("--n", type=int, help="total sample size N")
    p_sim.add_argument("--d", type=int, default=5, help="observation dimension")
    p_sim.add_argument("--method", action="append",
                       help="method tag (repeatable); default ats-par")
    p_sim.add_argument("--runs", type=int, default=DESK_RUNS)
    p_sim.add_argument("--reps", type=int, default=DESK_MC_REPS,
                       help="Monte-Carlo replicates per run")
    p_sim.add_argument("--boot", type=int, default=DESK_BOOT_REPS,
                       help="bootstrap replicates per run")
    p_sim.add_argument("--alpha", type=float, default=0.05)
    p_sim.add_argument("--delta-grid",
                       help="comma-separated deltas; presence switches to a power curve")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--jobs", type=int, default=None,
                       help="worker processes (default: CORRTEST_THREADS or 1)")
    p_sim.add_argument("--out", help="write CSV here instead of stdout")
    p_sim.set_defaults(func=cmd_simulate)

    p_comb = sub.add_parser("combined", help="combined covariance/correlation comparison")
    p_comb.add_argument("--data", action="append", required=True,
                        help="CSV file per group (exactly two)")
    p_comb.add_argument("--procedure", choices=("taylor", "equicoordinate"),
                        default="taylor")
    p_comb.add_argument("--alpha", type=float, default=0.05)
    p_comb.add_argument("--reps", type=int, default=1000)
    p_comb.add_argument("--seed", type=int, default=0)
    p_comb.add_argument("--out", help="write JSON here instead of stdout")
    p_comb.set_defaults(func=cmd_combined)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        code = args.func(args)
    except (ConfigError,) as exc:
        print(f"corrtest: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateDataError, DimensionError, TransformDomainError,
            DegenerateHypothesisError) as exc:
        print(f"corrtest: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ArgumentError as exc:
        print(f"corrtest: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"corrtest: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CorrTestError as exc:
        print(f"corrtest: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(f"corrtest: completed in {time.perf_counter() - started:.2f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
