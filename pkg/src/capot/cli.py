"""Command-line front end: solve, certify, analyze, refine, counterexample.

Exit codes are frozen for scripting: 0 success (solve: optimal; certify:
witness on every component), 1 error, 2 infeasible (solve), 3 separable fit
found (certify).  Reports are deterministic for identical inputs and flags
except for the "timings" section.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from .counterexamples import (
    DEGENERATE_PRESETS,
    FractalSpec,
    degenerate_preset,
    fractal_eta,
    fractal_h,
    verify_fractal_claims,
    verify_nonuniqueness,
)
from .costs import BUILTIN_COSTS
from .io import (
    ProblemFormatError,
    dump_problem,
    dumps_report,
    load_problem,
    rational_field,
    read_plan_csv,
    read_support_csv,
    write_plan_csv,
)
from .measures import uniform_measure
from .nondegeneracy import (
    SeparableFit,
    SupportSet,
    cycle_scan,
    fit_separable,
    mixed_partial_certify,
    quadruple_scan,
)
from .rationals import frac, frac_str
from .solver import CapacityField, ConstrainedProblem, plan_cost, solve
from .structure import (
    bang_bang_profile,
    find_improving_cycle,
    find_zero_cost_cycle,
    interior_set,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_SEPARABLE = 3


def _out_path(args, flag_value, default_name: str) -> Path:
    if flag_value is not None:
        return Path(flag_value)
    return Path(args.out_dir) / default_name


def _interior_json(iset) -> dict:
    return {
        "cells": [list(c) for c in sorted(iset.cells)],
        "count": len(iset.cells),
        "eta_mass": rational_field(iset.eta_mass),
        "epsilon": frac_str(iset.epsilon),
    }


def _cycle_json(cycle) -> dict:
    return {
        "cells_plus": [list(c) for c in cycle.cells_plus],
        "cells_minus": [list(c) for c in cycle.cells_minus],
        "gain": rational_field(cycle.gain),
    }


def _witness_json(w) -> dict:
    return {
        "kind": "witness",
        "n": w.n,
        "xs": list(w.xs),
        "ys": list(w.ys),
        "sum_diag": rational_field(w.sum_diag),
        "sum_shift": rational_field(w.sum_shift),
        "gap": rational_field(w.gap),
    }


def _fit_json(f) -> dict:
    return {
        "kind": "fit",
        "rows": sorted({i for i, _ in f.component}),
        "anchor": f.anchor,
        "u": [[i, frac_str(val)] for i, val in sorted(f.u.items())],
        "v": [[j, frac_str(val)] for j, val in sorted(f.v.items())],
    }


def cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    t0 = time.perf_counter()
    report = solve(problem, engine=args.engine)
    elapsed = time.perf_counter() - t0
    stem = Path(args.problem).stem
    report_path = _out_path(args, args.report, f"{stem}_report.json")

    if report.status == "infeasible":
        fea = report.feasibility
        doc = {
            "status": "infeasible",
            "engine": report.engine,
            "feasibility": {
                "max_mass": rational_field(fea.max_mass),
                "deficit": rational_field(fea.deficit),
                "witness_rows": list(fea.witness_rows),
                "witness_cols": list(fea.witness_cols),
                "witness_gap": rational_field(fea.witness_gap),
            },
            "timings": {"solve_s": elapsed},
        }
        report_path.write_text(dumps_report(doc))
        print("infeasible: marginal mass exceeds capacity by "
              f"{frac_str(fea.deficit)}")
        print(f"violating cut: rows {list(fea.witness_rows)} vs cols {list(fea.witness_cols)}")
        print(f"report: {report_path}")
        return EXIT_INFEASIBLE

    cycle = find_zero_cost_cycle(report, problem)
    uniqueness = "non-unique" if cycle is not None else "unique"
    iset = interior_set(report.plan, problem)
    doc = {
        "status": "optimal",
        "engine": report.engine,
        "cost": rational_field(report.cost),
        "potentials": {
            "alpha": [frac_str(a) for a in report.alpha],
            "beta": [frac_str(b) for b in report.beta],
        },
        "interior": _interior_json(iset),
        "cells": {
            "interior": report.n_interior,
            "saturated": report.n_saturated,
            "zero": report.n_zero,
        },
        "is_vertex": report.is_vertex,
        "uniqueness": uniqueness,
        "timings": {"solve_s": elapsed},
    }
    if cycle is not None:
        doc["witnesses"] = {"zero_cost_cycle": _cycle_json(cycle)}
    plan_path = _out_path(args, args.out, f"{stem}_plan.csv")
    write_plan_csv(plan_path, problem, report.plan)
    report_path.write_text(dumps_report(doc))
    cost = rational_field(report.cost)
    print(f"optimal: cost {cost['rational']} (= {cost['decimal']}), "
          f"uniqueness {uniqueness}")
    print(f"plan: {plan_path}")
    print(f"report: {report_path}")
    return EXIT_OK


def cmd_certify(args) -> int:
    problem = load_problem(args.problem)
    h = problem.cost
    if args.support == "from-eta":
        support = SupportSet.from_eta(problem.eta)
    else:
        support = SupportSet(read_support_csv(args.support))
    support.check_within(h)

    results = fit_separable(support, h)
    fits = [r for r in results if isinstance(r, SeparableFit)]
    verdict = "degenerate" if fits else "non-degenerate"

    if args.exhaustive:
        quad = quadruple_scan(support, h, mode="exhaustive")
    else:
        quad = quadruple_scan(support, h, mode="sampled", count=args.samples, seed=args.seed)
    cyc = cycle_scan(support, h, max_n=args.max_n)
    cert = mixed_partial_certify(h)

    doc = {
        "verdict": verdict,
        "support_cells": len(support.cells),
        "components": [
            _fit_json(r) if isinstance(r, SeparableFit) else _witness_json(r)
            for r in results
        ],
        "quadruple_stats": {
            "mode": quad.mode,
            "checked": quad.checked,
            "violations": len(quad.violations),
        },
        "cycle_scan": {
            "max_n": args.max_n,
            "checked": cyc.checked,
            "violations": len(cyc.violations),
            "partial": cyc.partial,
        },
        "certifier": {
            "certified": cert.certified,
            "n_cells": cert.n_cells,
            "n_pass": cert.n_pass,
            "pass_fraction": frac_str(cert.pass_fraction),
            "min_abs_d": None if cert.min_abs_d is None else rational_field(cert.min_abs_d),
            "max_abs_d": None if cert.max_abs_d is None else rational_field(cert.max_abs_d),
            "threshold": frac_str(cert.threshold),
            "coverage": frac_str(cert.coverage),
        },
    }
    if args.report is not None:
        Path(args.report).write_text(dumps_report(doc))
        print(f"report: {args.report}")
    else:
        sys.stdout.write(dumps_report(doc))
    n_wit = len(results) - len(fits)
    print(f"verdict: {verdict} ({n_wit} witness(es), {len(fits)} fit(s) "
          f"over {len(results)} component(s))")
    return EXIT_SEPARABLE if fits else EXIT_OK


def cmd_analyze(args) -> int:
    problem = load_problem(args.problem)
    plan = read_plan_csv(args.plan, problem)
    cost = plan_cost(problem.cost, plan)
    iset = interior_set(plan, problem)
    t0 = time.perf_counter()
    improving = find_improving_cycle(plan, problem, max_n=args.max_n)
    if improving.cycle is not None:
        optimal = False
    elif improving.exhaustive:
        optimal = True
    else:
        optimal = "unknown"

    uniqueness = "unknown"
    witnesses = {}
    if improving.cycle is not None:
        witnesses["improving_cycle"] = _cycle_json(improving.cycle)
    if args.probe_uniqueness:
        solved = solve(problem)
        if solved.status != "optimal":
            raise ValueError("cannot probe uniqueness: problem is infeasible")
        zero_cycle = find_zero_cost_cycle(solved, problem)
        uniqueness = "non-unique" if zero_cycle is not None else "unique"
        if zero_cycle is not None:
            witnesses["zero_cost_cycle"] = _cycle_json(zero_cycle)
    elapsed = time.perf_counter() - t0

    doc = {
        "status": "analyzed",
        "plan_cost": rational_field(cost),
        "plan_is_optimal": optimal,
        "improving_search_exhaustive": improving.exhaustive,
        "interior": _interior_json(iset),
        "uniqueness": uniqueness,
        "timings": {"analyze_s": elapsed},
    }
    if witnesses:
        doc["witnesses"] = witnesses
    if args.report is not None:
        Path(args.report).write_text(dumps_report(doc))
        print(f"report: {args.report}")
    else:
        sys.stdout.write(dumps_report(doc))
    c = rational_field(cost)
    print(f"plan cost {c['rational']} (= {c['decimal']}), optimal: {optimal}, "
          f"uniqueness: {uniqueness}")
    return EXIT_OK


def cmd_refine(args) -> int:
    grids = []
    for part in args.grids.split(","):
        part = part.strip()
        if not part:
            continue
        n = int(part)
        if n < 1:
            raise ValueError(f"grid size must be positive, got {n}")
        grids.append(n)
    if not grids:
        raise ValueError("no grid sizes given")
    rows = bang_bang_profile(args.cost, frac(args.phi), grids)
    lines = ["n,interior_cells,interior_eta_mass,opt_cost"]
    for r in rows:
        lines.append(
            f"{r.n},{r.interior_cells},{frac_str(r.interior_eta_mass)},{frac_str(r.opt_cost)}"
        )
    text = "\n".join(lines) + "\n"
    if args.out is not None:
        Path(args.out).write_text(text)
        print(f"table: {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_counterexample(args) -> int:
    out_dir = Path(args.out_dir)
    if args.kind == "fractal":
        spec = FractalSpec(args.N, args.K)
        eta = fractal_eta(spec)
        h = fractal_h(spec)
        mu = uniform_measure(eta.x_axis)
        nu = uniform_measure(eta.y_axis)
        phi = CapacityField.constant(eta.x_axis, eta.y_axis, Fraction(2))
        problem = ConstrainedProblem(mu, nu, eta, phi, h)
        doc = dump_problem(problem, cost_json={"type": "fractal", "N": spec.N, "K": spec.K})
        base = f"fractal_N{spec.N}_K{spec.K}"
        problem_path = out_dir / f"{base}_problem.json"
        problem_path.write_text(dumps_report(doc))
        print(f"problem: {problem_path}")
        if not args.verify:
            return EXIT_OK
        report = verify_fractal_claims(spec)
        extra_scan = None
        if args.max_n is not None:
            support = SupportSet.from_eta(eta)
            extra_scan = cycle_scan(support, h, max_n=args.max_n)
        rdoc = {
            "spec": {"N": spec.N, "K": spec.K},
            "support_size": report.support_size,
            "total_mass": rational_field(report.total_mass),
            "marginals_uniform": report.marginals_uniform,
            "claims": {
                "short_cycles_balance": {
                    "max_n": spec.N - 1,
                    "checked": report.short_scan.checked,
                    "violations": len(report.short_scan.violations),
                    "passed": report.balanced_below,
                },
                "long_cycle_witness": {
                    "witness": None if report.witness is None else _witness_json(report.witness),
                    "gap": None if report.witness_gap is None else rational_field(report.witness_gap),
                    "required_gap": rational_field(Fraction(1, 2**spec.K)),
                    "passed": report.witness_gap is not None
                    and report.witness_gap >= Fraction(1, 2**spec.K),
                },
                "never_separable": {
                    "components": report.components,
                    "fits": report.separable_fits,
                    "passed": report.separable_fits == 0,
                },
            },
            "passed": report.passed,
        }
        if extra_scan is not None:
            rdoc["cycle_scan"] = {
                "max_n": args.max_n,
                "checked": extra_scan.checked,
                "violations": len(extra_scan.violations),
                "partial": extra_scan.partial,
            }
        report_path = out_dir / f"{base}_report.json"
        report_path.write_text(dumps_report(rdoc))
        print(f"report: {report_path}")
        print(f"claims {'pass' if report.passed else 'FAIL'}: "
              f"short cycles balance {report.balanced_below}, "
              f"witness gap {frac_str(report.witness_gap) if report.witness_gap is not None else 'none'}, "
              f"fits {report.separable_fits}")
        return EXIT_OK if report.passed else EXIT_ERROR

    preset = degenerate_preset(args.preset)
    cost_json = {
        "type": "separable",
        "u": [frac_str(x) for x in preset.u],
        "v": [frac_str(x) for x in preset.v],
    }
    doc = dump_problem(preset.problem, cost_json=cost_json)
    base = f"degenerate_{preset.name}"
    problem_path = out_dir / f"{base}_problem.json"
    problem_path.write_text(dumps_report(doc))
    print(f"problem: {problem_path}")
    report = verify_nonuniqueness(preset.problem)
    rdoc = {
        "preset": preset.name,
        "verdict": report.verdict,
        "optimal_cost": rational_field(report.optimal_cost),
        "cost_gap": None if report.cost_gap is None else rational_field(report.cost_gap),
        "cycle": None if report.cycle is None else _cycle_json(report.cycle),
        "second_plan": None
        if report.second_plan is None
        else [[frac_str(v) for v in row] for row in report.second_plan.cells],
        "oracle": {
            "checked": report.oracle_checked,
            "optimal_count": report.oracle_optimal_count,
        },
    }
    report_path = out_dir / f"{base}_report.json"
    report_path.write_text(dumps_report(rdoc))
    print(f"report: {report_path}")
    print(f"verdict: {report.verdict} (cost {frac_str(report.optimal_cost)}, "
          f"gap {frac_str(report.cost_gap) if report.cost_gap is not None else 'n/a'})")
    return EXIT_OK if report.verdict == "non-unique" else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capot",
        description="Exact solver and structure analysis for capacity-constrained transport on grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem file exactly")
    p.add_argument("problem", help="problem JSON file")
    p.add_argument("--out", help="plan CSV path (default <problem>_plan.csv)")
    p.add_argument("--report", help="report JSON path (default <problem>_report.json)")
    p.add_argument("--out-dir", default=".", help="directory for default output names")
    p.add_argument(
        "--engine",
        default="auto",
        choices=("auto", "ssp", "network_simplex"),
        help="min-cost flow engine",
    )
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="run the separable-fit dichotomy on a cost")
    p.add_argument("problem", help="problem JSON file")
    p.add_argument(
        "--support",
        default="from-eta",
        help='"from-eta" (default) or a CSV of cells with header i,j',
    )
    p.add_argument("--max-n", type=int, default=2, help="cycle scan length limit")
    p.add_argument("--exhaustive", action="store_true", help="exhaustive quadruple scan")
    p.add_argument("--samples", type=int, default=1000, help="sampled quadruple count")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled scans")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("analyze", help="analyze a plan against its problem")
    p.add_argument("problem", help="problem JSON file")
    p.add_argument("--plan", required=True, help="plan CSV file")
    p.add_argument("--probe-uniqueness", action="store_true",
                   help="also decide uniqueness of the problem's optimum")
    p.add_argument("--max-n", type=int, default=None,
                   help="bound the improving-cycle search (default exhaustive)")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("refine", help="interior mass across grid refinements")
    p.add_argument("--cost", required=True, choices=BUILTIN_COSTS)
    p.add_argument("--phi", required=True, help="constant capacity factor, e.g. 2 or 3/2")
    p.add_argument("--grids", required=True, help="comma-separated grid sizes, e.g. 8,16,32")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("counterexample", help="emit boundary instances")
    psub = p.add_subparsers(dest="kind", required=True)
    pf = psub.add_parser("fractal", help="self-similar measure with digit-indicator cost")
    pf.add_argument("--N", type=int, required=True, help="digit base (>= 2)")
    pf.add_argument("--K", type=int, required=True, help="truncation depth (>= 1)")
    pf.add_argument("--verify", action="store_true", help="check the counterexample claims")
    pf.add_argument("--max-n", type=int, default=None,
                    help="also report a cycle scan at this length limit")
    pf.add_argument("--out-dir", default=".", help="output directory")
    pf.set_defaults(func=cmd_counterexample)
    pd = psub.add_parser("degenerate", help="separable cost with provably non-unique optimum")
    pd.add_argument("--preset", default="separable-2x2", choices=DEGENERATE_PRESETS)
    pd.add_argument("--out-dir", default=".", help="output directory")
    pd.set_defaults(func=cmd_counterexample)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProblemFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
