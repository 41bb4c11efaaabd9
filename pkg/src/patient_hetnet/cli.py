"""Command line interface: ``python -m patient_hetnet <command>``.

Exit codes: 0 success, 2 invalid input, 3 infeasible problem or solver error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bayes
from .allocator import (
    AllocationProblem,
    InfeasibleProblemError,
    Objective,
    SearchSpaceTooLarge,
    result_to_dict,
    solve,
    solve_bruteforce,
)
from .harness import ExperimentConfig, ExperimentError, run_experiment, summarize, write_outputs
from .milpgen import PiecewiseLnSpec, build_milp, write_lp
from .scenario import ScenarioConfig, generate, load_scenario, save_scenario

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3

log = logging.getLogger("patient_hetnet")


class _Invalid(Exception):
    pass


def _state(index: int) -> bayes.CurrentState:
    table = bayes.builtin_current_states()
    if not 1 <= index <= len(table):
        raise _Invalid(f"--state must be in 1..{len(table)}, got {index}")
    return table[index - 1]


def _print_json(obj) -> None:
    json.dump(obj, sys.stdout, indent=1)
    sys.stdout.write("\n")


def cmd_states(args) -> int:
    header = ("#",) + bayes.FEATURES
    rows = [(str(i),) + s.levels for i, s in enumerate(bayes.builtin_current_states(), 1)]
    widths = [max(len(r[j]) for r in [header] + rows) for j in range(len(header))]
    for r in [header] + rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return EXIT_OK


def cmd_classify(args) -> int:
    record = bayes.read_record_csv(args.record)
    clf = bayes.train(record, args.smoothing)
    state = _state(args.state)
    delta = bayes.posterior(clf, state)
    _print_json({
        "state": args.state,
        "levels": list(state.levels),
        "delta": delta,
        "class": bayes.classify(clf, state),
        "counts": clf.to_dict(),
    })
    return EXIT_OK


def cmd_generate(args) -> int:
    config = ScenarioConfig()
    if args.config:
        config = ScenarioConfig.from_dict(json.loads(Path(args.config).read_text()))
    save_scenario(generate(config, args.seed), args.out)
    return EXIT_OK


def _priorities(args, scenario, objective: Objective) -> np.ndarray:
    K = scenario.config.num_users
    NU = scenario.config.num_normal
    if args.priorities is not None:
        if len(args.priorities) != K:
            raise _Invalid(f"--priorities needs {K} values, got {len(args.priorities)}")
        return np.array(args.priorities, dtype=float)
    up = np.ones(K)
    if objective is Objective.PF_BEFORE or args.alpha == 0:
        return up
    if args.records:
        records = [bayes.read_record_csv(p) for p in args.records]
    elif K - NU == 3:
        records = bayes.builtin_records()
    else:
        raise _Invalid(f"scenario has {K - NU} outpatients; pass one --records file per outpatient")
    if len(records) != K - NU:
        raise _Invalid(f"{len(records)} records given for {K - NU} outpatients")
    state = _state(args.state)
    for j, rec in enumerate(records):
        delta = bayes.posterior(bayes.train(rec, args.smoothing), state)
        up[NU + j] = bayes.priority(delta, args.alpha, True)
    return up


def _problem(args) -> AllocationProblem:
    scenario = load_scenario(args.scenario)
    objective = Objective(args.objective)
    return AllocationProblem(scenario, _priorities(args, scenario, objective), objective)


def cmd_solve(args) -> int:
    problem = _problem(args)
    result = solve_bruteforce(problem) if args.oracle else solve(problem)
    _print_json(result_to_dict(problem, result))
    return EXIT_OK


def cmd_export_lp(args) -> int:
    problem = _problem(args)
    pw = None
    if problem.objective is not Objective.WSRMAX:
        pw = PiecewiseLnSpec.log_spaced(problem, count=args.breakpoints)
    model = build_milp(problem, pw)
    if args.out == "-":
        write_lp(model, sys.stdout)
    else:
        with open(args.out, "w", newline="\n") as fh:
            write_lp(model, fh)
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = ExperimentConfig.from_json(args.config)

    def progress(done, total):
        if done % 10 == 0 or done == total:
            log.info("instance %d/%d", done, total)

    report = run_experiment(config, jobs=args.jobs, progress=progress)
    write_outputs(report, args.out, plots=not args.no_plots)
    pops = {}
    for cell in summarize(report)["cells"]:
        key = f"{cell['objective']}/{cell['phase']}" + ("" if cell["alpha"] is None else f"/alpha={cell['alpha']:g}")
        pops.setdefault(key, []).append(cell["population_mean"])
    for key, vals in pops.items():
        print(f"{key}: population mean SINR {np.mean(vals):.2f} ({10 * np.log10(np.mean(vals)):.2f} dB)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="patient-hetnet", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("states", help="print the built-in current states")
    s.set_defaults(func=cmd_states)

    s = sub.add_parser("classify", help="stroke likelihood of a state given a record CSV")
    s.add_argument("--record", required=True)
    s.add_argument("--state", type=int, required=True, help="1-based index into `states`")
    s.add_argument("--smoothing", type=float, default=1.0)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("generate", help="draw a random scenario and save it as JSON")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--config", help="JSON scenario configuration (defaults otherwise)")
    s.set_defaults(func=cmd_generate)

    for name, func, helptext in (
        ("solve", cmd_solve, "optimal allocation of a scenario"),
        ("export-lp", cmd_export_lp, "write the MILP in CPLEX-LP format"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--scenario", required=True)
        s.add_argument("--objective", required=True, choices=[o.value for o in Objective])
        s.add_argument("--alpha", type=float, default=0.0)
        s.add_argument("--state", type=int, default=1, help="current state of every outpatient (1-based)")
        s.add_argument("--records", nargs="+", help="one record CSV per outpatient (default: packaged)")
        s.add_argument("--smoothing", type=float, default=1.0)
        s.add_argument("--priorities", type=float, nargs="+", help="explicit per-user priorities")
        if name == "solve":
            s.add_argument("--oracle", action="store_true", help="use exhaustive enumeration")
        else:
            s.add_argument("--out", required=True, help="output path, or - for stdout")
            s.add_argument("--breakpoints", type=int, default=32)
        s.set_defaults(func=func)

    s = sub.add_parser("experiment", help="run the Monte Carlo experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--no-plots", action="store_true")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (InfeasibleProblemError, SearchSpaceTooLarge, ExperimentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (_Invalid, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
