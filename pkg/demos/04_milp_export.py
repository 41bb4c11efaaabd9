"""
MILP export and an external cross-check
=======================================

The allocation problem is written as a linearized MILP in CPLEX LP format.
Here scipy's HiGHS interface stands in for the external solver.
"""

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from patient_hetnet.allocator import Objective, make_problem, solve
from patient_hetnet.milpgen import PiecewiseLnSpec, build_milp, lp_string, parse_lp
from patient_hetnet.scenario import ScenarioConfig, generate


def solve_lp_text(text):
    lp = parse_lp(text)
    names = lp.variables
    col = {v: i for i, v in enumerate(names)}
    A = np.zeros((len(lp.constraints), len(names)))
    lo, hi = [], []
    for r, (_, terms, op, rhs) in enumerate(lp.constraints):
        for v, a in terms.items():
            A[r, col[v]] = a
        lo.append(rhs if op in (">=", "=") else -np.inf)
        hi.append(rhs if op in ("<=", "=") else np.inf)
    c = np.zeros(len(names))
    for v, a in lp.objective.items():
        c[col[v]] = -a
    bounds = [lp.bounds.get(v, (0, 1)) for v in names]
    res = milp(c, constraints=LinearConstraint(A, lo, hi),
               bounds=Bounds([b[0] for b in bounds], [b[1] for b in bounds]),
               integrality=[v in lp.binaries for v in names])
    return -res.fun


sc = generate(ScenarioConfig(num_pbs=2, rbs_per_pbs=2, num_users=4, num_normal=3), seed=3)
p = make_problem(sc, Objective.WSRMAX, [1, 1, 1, 40])
text = lp_string(build_milp(p))
print("\n".join(text.splitlines()[:12]), "\n...")
print(f"{len(text.splitlines())} lines; MILP optimum {solve_lp_text(text):.6f}, search optimum {solve(p).objective_value:.6f}")

# ln is replaced by tangent cuts, so the PF model over-estimates and tightens
p = make_problem(sc, Objective.PF_BEFORE)
print("PF optimum", round(solve(p).objective_value, 6))
for count in (8, 16, 32, 64):
    model = build_milp(p, PiecewiseLnSpec.log_spaced(p, count))
    print(f"  {count:2d} breakpoints: {solve_lp_text(lp_string(model)):.6f}")
