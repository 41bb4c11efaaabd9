"""Acceptance criteria, each checked at its stated tolerance.

Every test records a PASS/FAIL line that is repeated in the terminal summary.
The Monte Carlo criteria share one run of the full default experiment
(400 instances, 7 states, 3 alphas, both objective families); set
``HETNET_JOBS`` to use several worker processes and ``HETNET_ACCEPTANCE_OUT``
to keep the output files.
"""

import itertools
import math
import os
import random
import statistics
import time

import numpy as np
import pytest
from scipy.optimize import linprog

from helpers import FIXTURES, oracle_delta, random_small_problem
from patient_hetnet import bayes
from patient_hetnet.allocator import AllocationProblem, Objective, make_problem, solve, solve_bruteforce
from patient_hetnet.harness import ExperimentConfig, run_experiment, write_outputs
from patient_hetnet.milpgen import parse_lp
from patient_hetnet.scenario import ScenarioConfig, generate, load_scenario

ALPHAS = (50.0, 500.0, 1000.0)


@pytest.fixture(scope="session")
def experiment(tmp_path_factory):
    cfg = ExperimentConfig()
    jobs = int(os.environ.get("HETNET_JOBS", "1"))
    start = time.perf_counter()
    report = run_experiment(cfg, jobs=jobs)
    elapsed = time.perf_counter() - start
    out = os.environ.get("HETNET_ACCEPTANCE_OUT") or tmp_path_factory.mktemp("experiment")
    write_outputs(report, out)
    return report, elapsed, jobs


def _sinr(report, **where):
    """SINR rows of a selection as an (instances*cells, users) array."""
    K = report.config.scenario.num_users
    return report.rows["sinr"][report.select(**where)].reshape(-1, K)


def _user_means(report, family, phase, alpha=None):
    kw = dict(objective=family, phase=phase)
    if alpha is not None:
        kw["alpha"] = alpha
    return _sinr(report, **kw).mean(axis=0)


# 1 ---------------------------------------------------------------------------------


def test_c01_oracle_equivalence(criterion):
    start = time.perf_counter()
    mismatches = []
    for seed in range(120):
        p = random_small_problem(seed)
        fast, slow = solve(p), solve_bruteforce(p)
        if fast.objective_value != slow.objective_value or fast.assignment != slow.assignment:
            mismatches.append(seed)
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 10
    criterion(1, "oracle equivalence", ok, f"120 instances, {len(mismatches)} mismatches, {elapsed:.2f} s")
    assert ok


# 2 ---------------------------------------------------------------------------------


def _enumerate_lp(lp):
    """Optimum of an LP file by enumerating its binary vectors.

    Constraints over binaries only are checked directly; for each surviving
    pattern the continuous part is an LP solved with linprog.
    """
    binaries = list(lp.binaries)
    pure = [c for c in lp.constraints if set(c[1]) <= set(binaries)]
    mixed = [c for c in lp.constraints if not set(c[1]) <= set(binaries)]
    cont = [v for v in lp.variables if v not in binaries]
    idx = {v: i for i, v in enumerate(cont)}
    patterns, best = [], -math.inf
    for bits in itertools.product((0, 1), repeat=len(binaries)):
        x = dict(zip(binaries, bits))

        def holds(c):
            lhs = sum(a * x[v] for v, a in c[1].items())
            return {"<=": lhs <= c[3] + 1e-12, ">=": lhs >= c[3] - 1e-12, "=": abs(lhs - c[3]) <= 1e-12}[c[2]]

        if not all(holds(c) for c in pure):
            continue
        patterns.append(bits)
        a_ub, b_ub, a_eq, b_eq = [], [], [], []
        for _, terms, op, rhs in mixed:
            row = np.zeros(len(cont))
            r = rhs
            for v, a in terms.items():
                if v in idx:
                    row[idx[v]] += a
                else:
                    r -= a * x[v]
            if op == "=":
                a_eq.append(row), b_eq.append(r)
            elif op == "<=":
                a_ub.append(row), b_ub.append(r)
            else:
                a_ub.append(-row), b_ub.append(-r)
        c = np.array([-lp.objective.get(v, 0.0) for v in cont])
        const = sum(lp.objective.get(v, 0.0) * x[v] for v in binaries)
        res = linprog(
            c, A_ub=np.array(a_ub) if a_ub else None, b_ub=b_ub or None,
            A_eq=np.array(a_eq) if a_eq else None, b_eq=b_eq or None,
            bounds=[lp.bounds.get(v, (0, None)) for v in cont], method="highs",
        )
        if res.status == 0:
            best = max(best, -res.fun + const)
    return best, patterns


def test_c02_milp_cross_check(criterion):
    lp = parse_lp((FIXTURES / "two_user_wsrmax.lp").read_text())
    best, patterns = _enumerate_lp(lp)
    problem = AllocationProblem(load_scenario(FIXTURES / "two_user.json"), np.array([1.0, 26.0]), Objective.WSRMAX)
    ref = solve(problem).objective_value
    rel = abs(best - ref) / abs(ref)
    ok = len(patterns) == 2 and rel <= 1e-9
    criterion(2, "MILP cross-check", ok, f"{len(patterns)} binary patterns, LP {best!r} vs solve {ref!r}, rel err {rel:.1e}")
    assert ok


# 3 ---------------------------------------------------------------------------------


def test_c03_pigeonhole(criterion, experiment):
    report, _, _ = experiment
    rbs = report.rows["rbs"]
    extra = []
    for seed in range(20):
        sc = generate(ScenarioConfig(), 10_000 + seed)
        for obj in Objective:
            extra.append(solve(make_problem(sc, obj)).assignment.counts(10))
    ok = bool(np.all(rbs == 1)) and all(np.all(c == 1) for c in extra)
    criterion(3, "one RB per user at paper scale", ok,
              f"{report.cells()} experiment cells + {len(extra)} extra solves, RB counts seen {sorted(set(rbs.tolist()))}")
    assert ok


# 4 ---------------------------------------------------------------------------------


def test_c04_op_prioritization(criterion, experiment):
    report, _, _ = experiment
    cfg = report.config
    NU = cfg.scenario.num_normal
    rates = []
    for alpha in (500.0, 1000.0):
        for si in range(1, len(cfg.states) + 1):
            s = _sinr(report, objective="wsrmax", phase="after", state=si, alpha=alpha)
            above = s[:, NU:] >= s.mean(axis=1)[:, None]
            rates.extend(above.mean(axis=0).tolist())
    worst = min(rates)
    ok = worst >= 0.9
    criterion(4, "OP above population mean (alpha >= 500, WSRMax)", ok,
              f"lowest per-(alpha, state, OP) instance rate {worst:.3f}, mean {np.mean(rates):.3f}; need >= 0.9")
    assert ok


# 5 ---------------------------------------------------------------------------------


def test_c05_negligible_impact(criterion, experiment):
    report, _, _ = experiment
    before = _sinr(report, objective="wsrmax", phase="before").mean()
    after = _sinr(report, objective="wsrmax", phase="after", alpha=50.0).mean()
    drop = (before - after) / before
    ok = drop <= 0.01
    criterion(5, "population mean drop at alpha = 50 (WSRMax)", ok,
              f"before {before:.2f}, after {after:.2f}, drop {100 * drop:.2f}%; need <= 1%")
    assert ok


# 6 ---------------------------------------------------------------------------------


def test_c06_monotone_alpha_cost(criterion, experiment):
    report, _, _ = experiment
    NU = report.config.scenario.num_normal
    base = _user_means(report, "wsrmax", "before")[:NU]
    worst = []
    for alpha in ALPHAS:
        after = _user_means(report, "wsrmax", "after", alpha)[:NU]
        worst.append(float(np.max((base - after) / base)))
    ok = all(b >= a for a, b in zip(worst, worst[1:]))
    criterion(6, "max normal-user decrease non-decreasing in alpha", ok,
              "alpha 50/500/1000: " + " / ".join(f"{100 * w:.3f}%" for w in worst))
    assert ok


# 7 ---------------------------------------------------------------------------------


def test_c07_ordering(criterion, experiment):
    report, _, _ = experiment
    w = _sinr(report, objective="wsrmax", phase="before").mean()
    p = _sinr(report, objective="pf", phase="before").mean()
    w_db, p_db = 10 * math.log10(w), 10 * math.log10(p)
    ok = w > p and 20 <= w_db <= 40 and 20 <= p_db <= 40
    criterion(7, "WSRMax > PF before, both in 20-40 dB", ok,
              f"WSRMax {w:.1f} ({w_db:.2f} dB), PF {p:.1f} ({p_db:.2f} dB)")
    assert ok


# 8 ---------------------------------------------------------------------------------


def test_c08_pf_after_insensitive(criterion, experiment):
    report, _, _ = experiment
    NU = report.config.scenario.num_normal

    def spread(family):
        means = [_user_means(report, family, "after", a)[NU:].mean() for a in ALPHAS]
        return (max(means) - min(means)) / np.mean(means), means

    s_pf, m_pf = spread("pf")
    s_w, m_w = spread("wsrmax")
    ok = s_pf < s_w
    criterion(8, "PF-after OP spread across alpha < WSRMax spread", ok,
              f"PF {s_pf:.2e} (means {', '.join(f'{m:.1f}' for m in m_pf)}), "
              f"WSRMax {s_w:.2e} (means {', '.join(f'{m:.1f}' for m in m_w)})")
    assert ok


# 9 ---------------------------------------------------------------------------------


def test_c09_classifier(criterion):
    rnd = random.Random(9)
    worst = 0.0
    for _ in range(1000):
        rows = [
            (tuple(rnd.choice(lv) for lv in bayes.LEVELS), rnd.choice(bayes.CLASSES))
            for _ in range(rnd.randint(2, 30))
        ]
        levels = tuple(rnd.choice(lv) for lv in bayes.LEVELS)
        clf = bayes.train(bayes.MedicalRecord.from_levels(rows), 1.0)
        got = bayes.posterior(clf, bayes.CurrentState(*levels))
        worst = max(worst, abs(got - float(oracle_delta(rows, levels, 1))))
    sym = bayes.MedicalRecord.from_levels([
        (("Normal", "Normal", "Normal", "Light"), "yes"),
        (("Normal", "Normal", "Normal", "Light"), "no"),
    ])
    half = bayes.posterior(bayes.train(sym), bayes.CurrentState("High", "Normal", "Normal", "Heavy"))
    r1 = bayes.read_record_csv(FIXTURES / "record_r1.csv")
    m = bayes.evaluate(bayes.train(r1), r1)
    ok = worst <= 1e-12 and half == 0.5 and (m.tp, m.fp, m.tn, m.fn) == (3, 0, 3, 0)
    criterion(9, "classifier vs count-and-multiply oracle", ok,
              f"max |error| {worst:.1e} over 1000 pairs, symmetric case {half}, R1 confusion {m.to_dict()}")
    assert ok


# 10 --------------------------------------------------------------------------------


def test_c10_runtime(criterion, experiment):
    times = []
    for seed in range(40):
        sc = generate(ScenarioConfig(), 20_000 + seed)
        for obj in Objective:
            up = np.where(sc.op_flags, 1 + 500 * 0.8, 1.0) if obj is not Objective.PF_BEFORE else np.ones(10)
            p = make_problem(sc, obj, up)
            t = time.perf_counter()
            solve(p)
            times.append(time.perf_counter() - t)
    median = statistics.median(times)
    _, elapsed, jobs = experiment
    ok = median <= 0.2 and elapsed <= 1800
    criterion(10, "desk-scale runtime", ok,
              f"median solve {1000 * median:.1f} ms over {len(times)} solves; full experiment {elapsed / 60:.1f} min "
              f"with {jobs} worker(s)")
    assert ok
