"""Shared builders and independent oracles for the test suite."""

import math
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from patient_hetnet.bayes import CLASSES, LEVELS
from patient_hetnet.allocator import AllocationProblem, Objective
from patient_hetnet.scenario import Scenario, ScenarioConfig, generate

FIXTURES = Path(__file__).parent / "fixtures"


def hand_scenario(omega, sigma=1.0, num_normal=None):
    """Scenario from an explicit ``(K, N, B)`` power array."""
    omega = np.asarray(omega, dtype=float)
    K, N, B = omega.shape
    nu = K - 1 if num_normal is None else num_normal
    cfg = ScenarioConfig(num_pbs=B, rbs_per_pbs=N, num_users=K, num_normal=nu)
    return Scenario(cfg, omega, sigma, np.arange(K) >= nu)


def random_small_problem(seed):
    """A random instance with at most 6 slots, any objective and RB cap."""
    rng = np.random.default_rng(seed)
    B = int(rng.integers(1, 4))
    N = int(rng.integers(1, 6 // B + 1))
    K = int(rng.integers(1, B * N + 1))
    NU = int(rng.integers(0, K))
    cfg = ScenarioConfig(num_pbs=B, rbs_per_pbs=N, num_users=K, num_normal=NU)
    sc = generate(cfg, seed)
    up = np.where(sc.op_flags, rng.uniform(1, 500, K), 1.0)
    obj = list(Objective)[int(rng.integers(0, 3))]
    return AllocationProblem(sc, up, obj, max_rbs=int(rng.integers(1, 4)))


def pair_dp_optimum(problem):
    """Optimum for B = 2 and K = 2N by DP over RBs and used-user subsets.

    With as many users as slots every slot is filled by a distinct user, so
    RB ``n`` is a choice of an ordered pair (user at PBS 1, user at PBS 2).
    Returns ``(value, slots)``.
    """
    sc = problem.scenario
    K, N, B = sc.omega.shape
    assert B == 2 and K == 2 * N
    om, sg = sc.omega, sc.sigma

    @lru_cache(maxsize=None)
    def best(n, used):
        if n == N:
            return 0.0, ()
        top = (-math.inf, ())
        for k in range(K):
            if used >> k & 1:
                continue
            for m in range(K):
                if m == k or used >> m & 1:
                    continue
                v = problem.term(k, om[k, n, 0] / (om[m, n, 0] + sg)) + problem.term(m, om[m, n, 1] / (om[k, n, 1] + sg))
                rest, tail = best(n + 1, used | 1 << k | 1 << m)
                if v + rest > top[0]:
                    top = (v + rest, ((k, m),) + tail)
        return top

    value, pairs = best(0, 0)
    slots = np.array([[p[0] for p in pairs], [p[1] for p in pairs]])
    return value, slots


def solve_lp_file(lp, fixed=None):
    """Solve a parsed LP file with scipy's HiGHS MILP; returns (value, x by name).

    ``fixed`` maps variable names to values imposed through their bounds.
    """
    from scipy.optimize import Bounds, LinearConstraint, milp

    names = lp.variables
    idx = {v: i for i, v in enumerate(names)}
    sign = -1.0 if lp.sense == "max" else 1.0
    c = np.zeros(len(names))
    for v, a in lp.objective.items():
        c[idx[v]] = sign * a
    A = np.zeros((len(lp.constraints), len(names)))
    lo = np.full(len(lp.constraints), -np.inf)
    hi = np.full(len(lp.constraints), np.inf)
    for r, (_, terms, op, rhs) in enumerate(lp.constraints):
        for v, a in terms.items():
            A[r, idx[v]] = a
        if op in (">=", "="):
            lo[r] = rhs
        if op in ("<=", "="):
            hi[r] = rhs
    lb = np.array([lp.bounds.get(v, (0.0, 1.0 if v in lp.binaries else np.inf))[0] for v in names])
    ub = np.array([lp.bounds.get(v, (0.0, 1.0 if v in lp.binaries else np.inf))[1] for v in names])
    for v, val in (fixed or {}).items():
        lb[idx[v]] = ub[idx[v]] = val
    integrality = np.array([1 if v in lp.binaries else 0 for v in names])
    cons = [LinearConstraint(A, lo, hi)] if len(lp.constraints) else []
    res = milp(c, constraints=cons, bounds=Bounds(lb, ub), integrality=integrality,
               options={"mip_rel_gap": 1e-12})
    if not res.success:
        raise RuntimeError(res.message)
    return sign * res.fun, dict(zip(names, res.x))


def oracle_delta(rows, levels, smoothing):
    """Count-and-multiply over raw (levels, label) rows, exact in Fractions."""
    s = Fraction(smoothing)
    n = len(rows)
    n_c = {c: sum(1 for _, lab in rows if lab == c) for c in CLASSES}
    score = {}
    for c in CLASSES:
        if s > 0 and min(n_c.values()) == 0:
            u = (n_c[c] + s) / (n + 2 * s)
        else:
            u = Fraction(n_c[c], n)
        for i, level in enumerate(levels):
            hits = sum(1 for lv, lab in rows if lab == c and lv[i] == level)
            den = n_c[c] + s * len(LEVELS[i])
            u *= (hits + s) / den if den else 0
        score[c] = u
    return score["yes"] / (score["yes"] + score["no"])
