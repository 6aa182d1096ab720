"""Command-line entry point.

Subcommands: reflect, solve, orbit-census, law, ocone-check, counterexample,
discretize, cf-check, simulate, test-reflect, test-independence.  Reports are
JSON (default) or CSV, embed the resolved configuration and seed, and can be
rendered as figures with --plot DIR.  Exit codes: 0 success/accept, 1
verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import plots
from .bridge import (
    QVRecord,
    SampledContinuousPath,
    StepFunction,
    cf_ocone_test_arrays,
    convergence_order,
    discretize,
    sup_gap,
)
from .counterexamples import (
    ce1_invariance_report,
    ce1_law,
    ce2_invariance_report,
    ce2_law,
    support_rows,
)
from .laws import (
    PathLaw,
    bernoulli_walk_spec,
    enumerate_law,
    laws_equal,
    ocone_check,
    ocone_time_change_spec,
    pushforward_reflect,
    table_spec,
    zero_process_spec,
)
from .montecarlo import (
    SamplerSpec,
    cf_increment_arrays,
    ocone_independence_test,
    reflect_two_sample_test,
    sample,
)
from .paths import exit_reflect, parse_path, parse_walk, reflect, to_text
from .solver import apply_word, orbit_graph, solve

SEED_ENV = "OCONEWALK_SEED"

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for key, val in obj.items():
            yield from _flatten(val, f"{prefix}{key}." if prefix else f"{key}.")
    elif isinstance(obj, (list, tuple)):
        yield prefix[:-1], json.dumps(obj)
    else:
        yield prefix[:-1], obj


def emit(report: dict, args, rows: list[dict] | None = None) -> None:
    """Write a report as JSON or CSV to --output (stdout by default).

    ``rows`` provides a native tabular form for CSV output; without it the
    report is flattened into key,value lines.
    """
    fmt = getattr(args, "format", None) or "json"
    if fmt == "csv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        else:
            writer = csv.writer(buf)
            writer.writerow(["key", "value"])
            writer.writerows(_flatten(report))
        text = buf.getvalue()
    else:
        text = json.dumps(report, indent=2, default=str) + "\n"
    out = getattr(args, "output", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config(args, **extra) -> dict:
    skip = {"func", "output", "plot", "format"}
    cfg = {
        k: v for k, v in sorted(vars(args).items())
        if k not in skip and v is not None and not callable(v)
    }
    cfg.update(extra)
    return cfg


# ---------------------------------------------------------------------------
# subcommand handlers

def cmd_reflect(args) -> int:
    path = parse_path(args.path)
    result = exit_reflect(path, args.level) if args.exit else reflect(path, args.level)
    if args.format or args.output:
        emit(
            {
                "config": _config(args),
                "path": to_text(path),
                "level": args.level,
                "exit_reflection": bool(args.exit),
                "result": to_text(result),
            },
            args,
        )
    else:
        print(to_text(result, with_horizon=False))
    return EXIT_OK


def cmd_solve(args) -> int:
    s = parse_walk(args.s)
    t = parse_walk(args.t)
    if args.shortest:
        word = orbit_graph(s.horizon).shortest_word(s, t)
        if word is None:
            print("targets not connected under levels {0,1,2}", file=sys.stderr)
            return EXIT_VERIFICATION
    else:
        word = solve(s, t)
    verified = apply_word(s, word) == t
    report = {
        "config": _config(args),
        "m": s.horizon,
        "s": to_text(s, with_horizon=False),
        "t": to_text(t, with_horizon=False),
        "word": list(word),
        "verified": verified,
    }
    emit(report, args)
    if args.plot:
        plots.plot_paths([s, t], args.plot, "solve", title="source and target")
    return EXIT_OK if verified else EXIT_VERIFICATION


def cmd_orbit_census(args) -> int:
    levels = tuple(int(x) for x in args.levels.split(","))
    rows = []
    for m in range(1, args.m_max + 1):
        graph = orbit_graph(m, levels, cap=max(args.m_max, 12))
        rows.append(graph.census_row(with_diameters=args.diameters))
    report = {"config": _config(args), "census": rows}
    emit(report, args, rows=rows)
    if args.plot:
        plots.plot_census(rows, args.plot)
    return EXIT_OK


def _law_from_args(args) -> tuple[PathLaw, str]:
    name = args.spec
    if name == "bernoulli":
        return enumerate_law(bernoulli_walk_spec(), args.m), name
    if name == "zero":
        return enumerate_law(zero_process_spec(), args.m), name
    if name == "ce1":
        return ce1_law(args.m), name
    if name == "ce2":
        return ce2_law(args.m), name
    if name == "ocone":
        if not args.time_change:
            raise ValueError("--time-change FILE required for the ocone spec")
        tc = PathLaw.loads(Path(args.time_change).read_text())
        return enumerate_law(ocone_time_change_spec(tc), args.m), name
    if name == "file":
        if not args.law_file:
            raise ValueError("--law-file FILE required for the file spec")
        law = PathLaw.loads(Path(args.law_file).read_text())
        return enumerate_law(table_spec(law), law.horizon), name
    raise ValueError(f"unknown law spec {name!r}")


def cmd_law(args) -> int:
    law, name = _law_from_args(args)
    report = {
        "config": _config(args),
        "spec": name,
        "m": law.horizon,
        "support_size": len(law),
        "law": law.to_json_obj(),
    }
    failures = 0
    if args.check_levels:
        checks = []
        for a in (int(x) for x in args.check_levels.split(",")):
            cmp = laws_equal(law, pushforward_reflect(law, a))
            checks.append({
                "level": a,
                "invariant": cmp.equal,
                "witness": cmp.witness_json(),
            })
            failures += not cmp.equal
        report["reflection_checks"] = checks
    emit(report, args, rows=law.to_json_obj())
    if args.plot:
        plots.plot_law_masses(law.to_json_obj(), args.plot, f"law_{name}_m{law.horizon}")
    if args.assert_invariant and failures:
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_ocone_check(args) -> int:
    law, name = _law_from_args(args)
    verdict = ocone_check(law, pasted=args.pasted)
    report = {
        "config": _config(args),
        "spec": name,
        "m": law.horizon,
        **verdict.to_json_obj(),
    }
    emit(report, args)
    if args.assert_ocone and not verdict.is_ocone:
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_counterexample(args) -> int:
    levels = tuple(args.levels) if args.levels else (0, 1, 2)
    if args.which == 1:
        law = ce1_law(args.m)
        report_obj = ce1_invariance_report(args.m, levels=levels)
    else:
        law = ce2_law(args.m)
        report_obj = ce2_invariance_report(args.m, levels=levels)
    verdict = ocone_check(law)
    report = {
        "config": _config(args),
        **report_obj.to_json_obj(),
        "ocone_check": verdict.to_json_obj(),
    }
    rows = support_rows(law) if args.support_csv else None
    emit(report, args, rows=rows)
    if args.plot:
        witness = None
        for check in report_obj.checks:
            if not check.invariant:
                witness = check.comparison.witness[0]
                break
        plots.plot_paths(
            list(law.support), args.plot, f"counterexample{args.which}_m{args.m}",
            title=f"counterexample {args.which}, m={args.m}", highlight=witness,
        )
    if args.assert_invariant and not report_obj.all_invariant:
        return EXIT_VERIFICATION
    return EXIT_OK


def _read_path_csv(path: str) -> SampledContinuousPath:
    times, values = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "t":
                continue
            times.append(float(row[0]))
            values.append(float(row[1]))
    return SampledContinuousPath(times, values)


def _read_path_batch(path: str, exact: bool) -> list[SampledContinuousPath]:
    """CSV of t,value rows, or a columnar .npz batch with 'times' (T,) and
    'values' ((T,) or (n, T)) arrays."""
    if path.endswith(".npz"):
        import numpy as np

        data = np.load(path)
        times = data["times"]
        values = np.atleast_2d(data["values"])
        return [
            SampledContinuousPath(times, row, exact_crossings=exact)
            for row in values
        ]
    single = _read_path_csv(path)
    return [SampledContinuousPath(single.times, single.values, exact_crossings=exact)]


def cmd_discretize(args) -> int:
    if args.input:
        paths = _read_path_batch(args.input, args.exact)
    else:
        pairs = sample(
            SamplerSpec("brownian-walk", seed=args.seed, t_end=args.t_end,
                        mesh=args.mesh / 2.0),
            1,
        )
        paths = [pair[0] for pair in pairs]
    meshes = [float(x) for x in args.meshes.split(",")] if args.meshes else [args.mesh]
    if any(b >= a for a, b in zip(meshes, meshes[1:])):
        raise ValueError("mesh sequence must be strictly decreasing")
    results = []
    worst = False
    for mesh in meshes:
        for i, path in enumerate(paths):
            lat = discretize(path, mesh)
            gap = sup_gap(path, lat)
            results.append({
                "sample": i,
                "mesh": mesh,
                "n_jumps": len(lat.jump_times),
                **gap.to_json_obj(),
            })
            worst = worst or not gap.bound_holds
            if i == 0 and args.plot:
                plots.plot_lattice_overlay(path, lat, args.plot,
                                           f"discretize_{mesh:g}")
            if i == 0 and args.jumps_csv:
                with open(args.jumps_csv, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["jump_time", "sign"])
                    writer.writerows(zip(lat.jump_times, lat.jump_signs))
    report = {"config": _config(args), "results": results}
    emit(report, args, rows=results)
    return EXIT_VERIFICATION if worst else EXIT_OK


def _step_function(args) -> StepFunction:
    lams = tuple(float(x) for x in args.lambdas.split(","))
    breaks = (0.0,) + tuple(float(x) for x in args.breaks.split(","))
    return StepFunction(breaks, lams)


def cmd_cf_check(args) -> int:
    h = _step_function(args)
    spec_kw = {"seed": args.seed, "t_end": h.t_end}
    if args.spec == "brownian-walk":
        spec_kw["mesh"] = args.mesh
    else:
        spec_kw["dt"] = args.dt
    if args.spec in ("ocone-time-change", "dependent-time-change"):
        spec_kw["switch_time"] = args.switch_time
    spec = SamplerSpec(args.spec, **spec_kw)
    dm, dq = cf_increment_arrays(spec, h, args.n_samples)
    rep = cf_ocone_test_arrays(dm, dq, h, z=args.z)
    report = {
        "config": _config(args),
        "spec": spec.describe(),
        **rep.to_json_obj(),
    }
    if args.convergence:
        qv = QVRecord(h.breakpoints, h.breakpoints)
        slope, rows = convergence_order(qv, h)
        report["cos_product_convergence"] = {
            "fitted_order": slope,
            "errors": [{"mesh": a, "error": e} for a, e in rows],
        }
    emit(report, args)
    if args.plot:
        plots.plot_cf_comparison(rep.to_json_obj(), args.plot)
    return EXIT_OK if rep.passed else EXIT_VERIFICATION


def _sampler_spec(args) -> SamplerSpec:
    kw = {"seed": args.seed}
    if args.m is not None:
        kw["horizon"] = args.m
    if getattr(args, "t_end", None) is not None:
        kw["t_end"] = args.t_end
    if getattr(args, "dt", None) is not None:
        kw["dt"] = args.dt
    if getattr(args, "mesh", None) is not None:
        kw["mesh"] = args.mesh
    if getattr(args, "time_change", None):
        kw["time_change_law"] = PathLaw.loads(Path(args.time_change).read_text())
    return SamplerSpec(args.spec, **kw)


def cmd_simulate(args) -> int:
    spec = _sampler_spec(args)
    batch = sample(spec, args.n)
    report = {"config": _config(args), "spec": spec.describe(), "n": args.n}
    if hasattr(batch, "values"):
        texts = [to_text(p) for p in batch]
        report["paths"] = texts
        rows = [{"path": t} for t in texts]
        emit(report, args, rows=rows)
        if args.plot:
            shown = list(batch.paths())[:50]
            plots.plot_paths(shown, args.plot, f"simulate_{spec.kind}")
    else:
        report["n_grid_points"] = len(batch[0][0].times)
        emit(report, args)
        if args.plot:
            plots.plot_paths([p for p, _ in batch[:20]], args.plot,
                             f"simulate_{spec.kind}")
    return EXIT_OK


def _write_table_csv(rep, path: str) -> None:
    if not rep.table_rows:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rep.table_rows[0].keys()))
        writer.writeheader()
        writer.writerows(rep.table_rows)


def cmd_test_reflect(args) -> int:
    spec = _sampler_spec(args)
    rep = reflect_two_sample_test(spec, args.level, args.n, args.depth, alpha=args.alpha)
    report = {"config": _config(args), **rep.to_json_obj()}
    emit(report, args)
    if args.table_csv:
        _write_table_csv(rep, args.table_csv)
    if args.plot:
        plots.plot_test_cells(rep.to_json_obj(), args.plot, "test_reflect")
    return EXIT_VERIFICATION if rep.reject else EXIT_OK


def cmd_test_independence(args) -> int:
    spec = _sampler_spec(args)
    rep = ocone_independence_test(spec, args.n, args.depth, alpha=args.alpha)
    report = {"config": _config(args), **rep.to_json_obj()}
    emit(report, args)
    if args.table_csv:
        _write_table_csv(rep, args.table_csv)
    if args.plot:
        plots.plot_test_cells(rep.to_json_obj(), args.plot, "test_independence")
    return EXIT_VERIFICATION if rep.reject else EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oconewalk",
        description="Reflection transforms, exact laws and Monte Carlo checks "
                    "for skip-free Ocone martingales.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--output", help="write the report to this file")
        p.add_argument("--plot", metavar="DIR", help="render figures into DIR")
        p.add_argument("--seed", type=int, default=_default_seed(),
                       help=f"RNG seed (default ${SEED_ENV} or 0)")

    p = sub.add_parser("reflect", help="reflect a path at an integer level")
    common(p)
    p.add_argument("--path", required=True,
                   help='path text, e.g. "+++" or "3:++-"; use the '
                        'horizon-prefixed form ("2:--") for paths that '
                        'start with a minus')
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--exit", action="store_true",
                   help="reflect at the first exit from [-level, level]")
    p.set_defaults(func=cmd_reflect)

    p = sub.add_parser("solve", help="reflection word mapping one walk to another")
    common(p)
    p.add_argument("--s", required=True)
    p.add_argument("--t", required=True)
    p.add_argument("--shortest", action="store_true",
                   help="use the BFS oracle for a minimal word")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("orbit-census", help="orbit-graph census over horizons")
    common(p)
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--levels", default="0,1,2")
    p.add_argument("--no-diameters", dest="diameters", action="store_false")
    p.set_defaults(func=cmd_orbit_census, diameters=True)

    def law_opts(p):
        p.add_argument("--spec", required=True,
                       choices=("bernoulli", "zero", "ce1", "ce2", "ocone", "file"))
        p.add_argument("--m", type=int, default=4)
        p.add_argument("--time-change", help="time-change law JSON file")
        p.add_argument("--law-file", help="law JSON file (spec 'file')")

    p = sub.add_parser("law", help="exact law of a process at a horizon")
    common(p)
    law_opts(p)
    p.add_argument("--check-levels", help="comma list of reflection levels to verify")
    p.add_argument("--assert-invariant", action="store_true",
                   help="exit 1 when any checked level breaks invariance")
    p.set_defaults(func=cmd_law)

    p = sub.add_parser("ocone-check", help="finite-horizon Ocone verdict for a law")
    common(p)
    law_opts(p)
    p.add_argument("--pasted", action="store_true",
                   help="paste an independent fair walk onto terminal flats first")
    p.add_argument("--assert-ocone", action="store_true")
    p.set_defaults(func=cmd_ocone_check)

    p = sub.add_parser("counterexample",
                       help="reflection-invariant but non-Ocone processes")
    common(p)
    p.add_argument("which", type=int, choices=(1, 2))
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--level", dest="levels", type=int, action="append",
                   help="level to check (repeatable; default 0 1 2)")
    p.add_argument("--support-csv", action="store_true",
                   help="emit the support as CSV rows")
    p.add_argument("--assert-invariant", action="store_true")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("discretize", help="mesh discretization and sup-gap report")
    common(p)
    p.add_argument("--input", help="CSV file of t,value samples")
    p.add_argument("--exact", action="store_true",
                   help="declare the input's level crossings exact")
    p.add_argument("--mesh", type=float, default=0.25)
    p.add_argument("--meshes", help="strictly decreasing comma list of meshes")
    p.add_argument("--t-end", type=float, default=1.0,
                   help="horizon of the generated sample path (no --input)")
    p.add_argument("--jumps-csv", help="write jump times and signs to this CSV")
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("cf-check", help="characteristic-function comparison")
    common(p)
    p.add_argument("--spec", default="brownian-grid",
                   choices=("brownian-grid", "brownian-walk",
                            "ocone-time-change", "dependent-time-change"))
    p.add_argument("--lambdas", default="1.0", help="step-function coefficients")
    p.add_argument("--breaks", default="1.0",
                   help="strictly increasing breakpoints after 0")
    p.add_argument("--n-samples", type=int, default=100000)
    p.add_argument("--z", type=float, default=3.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--mesh", type=float, default=2 ** -5)
    p.add_argument("--switch-time", type=float, default=1.0)
    p.add_argument("--convergence", action="store_true",
                   help="append the cosine-product convergence table")
    p.set_defaults(func=cmd_cf_check)

    def sampler_opts(p):
        p.add_argument("--spec", required=True,
                       choices=("bernoulli-walk", "ocone-time-change", "ce1",
                                "ce2", "brownian-grid", "brownian-walk",
                                "dependent-time-change"))
        p.add_argument("--m", type=int, help="horizon for discrete kinds")
        p.add_argument("--t-end", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--mesh", type=float)
        p.add_argument("--time-change", help="time-change law JSON file")
        p.add_argument("--n", type=int, default=10000)

    p = sub.add_parser("simulate", help="draw sample paths")
    common(p)
    sampler_opts(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test-reflect", help="two-sample reflection-invariance test")
    common(p)
    sampler_opts(p)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--table-csv", help="write the merged contingency table here")
    p.set_defaults(func=cmd_test_reflect)

    p = sub.add_parser("test-independence",
                       help="chi-square independence of walk and QV")
    common(p)
    sampler_opts(p)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--table-csv", help="write the contingency table here")
    p.set_defaults(func=cmd_test_independence)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
