"""Command-line surface: gen, reduce, solve, verify, bench.

Every command is deterministic given its flags; all randomness is
seeded explicitly. Exit codes: 0 success, 2 usage error, 3 validation
or format failure, 4 exact-solver budget refusal.
"""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
import time
from pathlib import Path

from . import fileio
from .objective import contamination_objective, contamination_report
from .reductions import (
    InvalidPartitionError,
    coloring_to_mkp,
    mkp_objective,
    mkp_solution_to_pa,
    mkp_to_pa,
    pa_solution_to_mkp,
    pa_to_mkp,
    verify_measure_equality,
)
from .solvers import (
    BudgetExceededError,
    DEFAULT_BUDGET,
    SolveReport,
    brute_force_exact,
    greedy_feasible,
    greedy_worst_user,
    local_search_move,
    random_feasible,
)
from .system_model import (
    GenerationConfig,
    InfeasibleAssignmentError,
    generate_system,
    system_throughput,
    uplink_rate,
    validate_system,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4

REPORT_HEADER = ["instance", "solver", "objective", "throughput", "elapsed_s", "certificate"]
SOLVER_NAMES = ("brute", "greedy", "random", "worst-user", "local-search")


def _config_from_args(args) -> GenerationConfig:
    return GenerationConfig(
        area_side_m=args.area,
        seed=args.seed,
        pathloss_exponent=args.pathloss,
        shadowing_sigma_db=args.shadow_db,
        ap_selection_rule=args.ap_rule,
        rho_u=args.rho_u,
        tau_c=args.tau_c,
        eta_policy=args.eta_policy,
    )


def _add_gen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--aps", type=int, required=True, help="number of APs (M)")
    p.add_argument("--users", type=int, required=True, help="number of users (K)")
    p.add_argument("--pilots", type=int, required=True, help="number of pilots (tau)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--area", type=float, default=1000.0, help="square side length in meters")
    p.add_argument("--ap-rule", default="energy:0.95", help="AP selection: top:N or energy:THETA")
    p.add_argument("--pathloss", type=float, default=3.5, help="path-loss exponent")
    p.add_argument("--shadow-db", type=float, default=8.0, help="shadowing std dev in dB")
    p.add_argument("--rho-u", type=float, default=1.57e11, help="normalized uplink SNR")
    p.add_argument("--tau-c", type=int, default=200, help="coherence interval in symbols")
    p.add_argument("--eta-policy", choices=("full", "uniform"), default="full")


def cmd_gen(args) -> int:
    s = generate_system(_config_from_args(args), args.aps, args.users, args.pilots)
    fileio.write_instance(args.out, s)
    mean_serving = sum(len(a) for a in s.serving_sets) / s.k_users
    print(
        f"wrote {args.out}: M={s.m_aps} K={s.k_users} tau={s.tau_pilots} "
        f"mean|A(k)|={mean_serving:.2f}"
    )
    return EXIT_OK


def cmd_reduce(args) -> int:
    if args.direction == "pa-to-mkp":
        s = fileio.read_instance(args.infile)
        g = pa_to_mkp(s)
        fileio.write_graph(args.out, g)
        print(
            f"wrote {args.out}: {g.n_vertices} vertices, {len(g.weights)} edges, "
            f"k={g.k_parts}; partition cost on the output equals assignment cost "
            "on the input (scale 1)"
        )
    elif args.direction == "mkp-to-pa":
        g = fileio.read_graph(args.infile)
        s = mkp_to_pa(g, n_dummy_aps=args.dummy_aps)
        fileio.write_instance(args.out, s)
        print(
            f"wrote {args.out}: M={s.m_aps} K={s.k_users} tau={s.tau_pilots}; "
            "assignment cost on the output equals partition cost on the input (scale 1)"
        )
    else:  # color-to-mkp
        g = fileio.read_graph(args.infile)
        unit = coloring_to_mkp(g.n_vertices, g.weights.keys(), g.k_parts)
        fileio.write_graph(args.out, unit)
        print(
            f"wrote {args.out}: unit weights on {len(unit.weights)} edges; optimum 0 "
            f"iff the graph is {unit.k_parts}-colourable"
        )
    return EXIT_OK


def _one_shot_report(s, assignment, name: str, elapsed: float) -> SolveReport:
    return SolveReport(
        assignment=assignment,
        objective=contamination_objective(s, assignment),
        throughput=system_throughput(s, assignment),
        solver_name=name,
        iterations=0,
        elapsed_seconds=elapsed,
        optimality_certificate="heuristic",
    )


def _run_solver(name: str, s, seed: int, budget: int, max_rounds: int, max_iters: int) -> SolveReport:
    if name == "brute":
        return brute_force_exact(s, budget=budget)
    if name == "greedy":
        t0 = time.perf_counter()
        a = greedy_feasible(s)
        return _one_shot_report(s, a, "greedy", time.perf_counter() - t0)
    if name == "random":
        t0 = time.perf_counter()
        a = random_feasible(s, seed)
        return _one_shot_report(s, a, "random", time.perf_counter() - t0)
    if name == "worst-user":
        return greedy_worst_user(s, random_feasible(s, seed), max_rounds=max_rounds)
    if name == "local-search":
        return local_search_move(s, random_feasible(s, seed), max_iters=max_iters, seed=seed)
    raise ValueError(f"unknown solver {name!r}")


def _split_solvers(arg: str) -> list[str]:
    names = [n.strip() for n in arg.split(",") if n.strip()]
    if not names:
        raise ValueError("need at least one solver")
    for n in names:
        if n not in SOLVER_NAMES:
            raise ValueError(f"unknown solver {n!r}; choose from {', '.join(SOLVER_NAMES)}")
    return names


def _report_row(instance: str, rep: SolveReport) -> list[str]:
    return [
        instance,
        rep.solver_name,
        repr(float(rep.objective)),
        repr(float(rep.throughput)),
        f"{rep.elapsed_seconds:.6f}",
        rep.optimality_certificate,
    ]


def _write_csv(path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def cmd_solve(args) -> int:
    solvers = _split_solvers(args.solver)
    s = fileio.read_instance(args.instance)
    check = validate_system(s)
    if not check.ok:
        raise ValueError("invalid instance: " + "; ".join(check.violations))
    rows = []
    rate_rows = []
    for name in solvers:
        rep = _run_solver(name, s, args.seed, args.budget, args.max_rounds, args.max_iters)
        rows.append(_report_row(args.instance, rep))
        for k in range(s.k_users):
            rate_rows.append(
                [args.instance, name, str(k), repr(uplink_rate(s, rep.assignment, k))]
            )
        if args.assignment_out:
            fileio.write_assignment(args.assignment_out, rep.assignment)
        if args.pairs_out:
            Path(args.pairs_out).write_text(
                contamination_report(s, rep.assignment).to_csv()
            )
        print(
            f"{name}: objective={float(rep.objective):.6g} "
            f"throughput={rep.throughput:.6g} [{rep.optimality_certificate}]"
        )
    _write_csv(args.out, REPORT_HEADER, rows)
    if args.rates_out:
        _write_csv(args.rates_out, ["instance", "solver", "user", "rate"], rate_rows)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.instance:
        s = fileio.read_instance(args.instance)
        check = validate_system(s)
        if not check.ok:
            for v in check.violations:
                print(f"FAIL violation: {v}")
            return EXIT_VALIDATION
        a = fileio.read_assignment(args.assignment)
        rep = verify_measure_equality(s, a, exact=args.exact)
    else:
        g = fileio.read_graph(args.graph)
        p = fileio.read_partition(args.partition)
        s = mkp_to_pa(g, exact=args.exact)
        a = mkp_solution_to_pa(p)
        m_mkp = mkp_objective(g, p)
        rep = verify_measure_equality(s, a, exact=args.exact, graph=g)
    status = "PASS" if rep.passed else "FAIL"
    print(
        f"{status} mode={rep.mode} m_pa={float(rep.m_pa)!r} "
        f"m_mkp={float(rep.m_mkp)!r} rel_diff={rep.rel_diff:.3e}"
    )
    return EXIT_OK if rep.passed else EXIT_VALIDATION


def cmd_bench(args) -> int:
    solvers = _split_solvers(args.solvers)
    rows = []
    ratios: dict[str, list[float]] = {n: [] for n in solvers if n != "brute"}
    for i in range(args.count):
        seed = args.seed + i
        cfg = GenerationConfig(
            area_side_m=args.area,
            seed=seed,
            ap_selection_rule=args.ap_rule,
        )
        s = generate_system(cfg, args.aps, args.users, args.pilots)
        instance = f"gen-{seed}"
        reports = {
            name: _run_solver(name, s, seed, args.budget, args.max_rounds, args.max_iters)
            for name in solvers
        }
        for name in solvers:
            rows.append(_report_row(instance, reports[name]))
        if "brute" in reports:
            opt = float(reports["brute"].objective)
            for name, rep in reports.items():
                if name == "brute":
                    continue
                obj = float(rep.objective)
                if opt == 0.0:
                    ratios[name].append(1.0 if obj <= 1e-12 else float("inf"))
                else:
                    ratios[name].append(obj / opt)
    rows.sort(key=lambda r: (r[0], r[1]))
    _write_csv(args.out, REPORT_HEADER, rows)
    print(f"wrote {args.out}: {len(rows)} rows over {args.count} instances")
    if args.summary_out and any(ratios.values()):
        summary = [
            [name, str(len(rs)), repr(statistics.fmean(rs)), repr(max(rs))]
            for name, rs in sorted(ratios.items())
            if rs
        ]
        _write_csv(args.summary_out, ["solver", "n_instances", "mean_ratio", "max_ratio"], summary)
        print(f"wrote {args.summary_out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pilotkit",
        description="Pilot assignment for cell-free massive MIMO: generate, reduce, solve, verify, bench.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance file")
    _add_gen_flags(p)
    p.add_argument("--out", required=True, help="output instance path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("reduce", help="transform between instance and graph files")
    p.add_argument("direction", choices=("pa-to-mkp", "mkp-to-pa", "color-to-mkp"))
    p.add_argument("--in", dest="infile", required=True, help="input path")
    p.add_argument("--out", required=True, help="output path")
    p.add_argument("--dummy-aps", type=int, default=0, help="extra all-zero AP columns (mkp-to-pa)")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="run solvers on an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--solver", required=True, help="comma list from: " + ", ".join(SOLVER_NAMES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max exact enumerations")
    p.add_argument("--max-rounds", type=int, default=100, help="worst-user improvement rounds")
    p.add_argument("--max-iters", type=int, default=10_000, help="local-search move cap")
    p.add_argument("--out", required=True, help="report CSV path")
    p.add_argument("--rates-out", help="per-user rate CSV path")
    p.add_argument("--assignment-out", help="write the solution assignment (single solver)")
    p.add_argument("--pairs-out", help="per-pair contamination CSV path (single solver)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check measure equality of a reduced pair")
    p.add_argument("--instance", help="instance file (with --assignment)")
    p.add_argument("--assignment", help="assignment file")
    p.add_argument("--graph", help="graph file (with --partition)")
    p.add_argument("--partition", help="partition file")
    p.add_argument("--exact", action="store_true", help="rational-arithmetic certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="benchmark solvers over seeded instances")
    p.add_argument("--count", type=int, required=True, help="number of instances")
    p.add_argument("--aps", type=int, required=True)
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--pilots", type=int, required=True)
    p.add_argument("--seed", type=int, default=0, help="base seed; instance i uses seed+i")
    p.add_argument("--area", type=float, default=1000.0)
    p.add_argument("--ap-rule", default="energy:0.95")
    p.add_argument("--solvers", default="brute,greedy,random,local-search")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--max-rounds", type=int, default=100)
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--out", required=True, help="report CSV path")
    p.add_argument("--summary-out", help="aggregate gap-statistics CSV path")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        has_instance = bool(args.instance or args.assignment)
        has_graph = bool(args.graph or args.partition)
        if has_instance == has_graph or (
            has_instance and not (args.instance and args.assignment)
        ) or (has_graph and not (args.graph and args.partition)):
            parser.error("verify wants --instance with --assignment, or --graph with --partition")
    if args.command in ("solve", "bench"):
        try:
            names = _split_solvers(args.solver if args.command == "solve" else args.solvers)
        except ValueError as e:
            parser.error(str(e))
        if args.command == "solve" and len(names) != 1:
            if args.assignment_out:
                parser.error("--assignment-out needs exactly one solver")
            if args.pairs_out:
                parser.error("--pairs-out needs exactly one solver")
    try:
        return args.func(args)
    except BudgetExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (fileio.FormatError, InfeasibleAssignmentError, InvalidPartitionError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
