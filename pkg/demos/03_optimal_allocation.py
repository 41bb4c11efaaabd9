"""
Exact resource block allocation
===============================

Solve one instance before and after prioritization. With ten users and ten
slots every user ends up with exactly one RB.
"""

import numpy as np

from patient_hetnet import bayes
from patient_hetnet.allocator import Objective, check_feasible, make_problem, solve, solve_bruteforce
from patient_hetnet.scenario import ScenarioConfig, generate

sc = generate(ScenarioConfig(), seed=2024)


def show(label, problem):
    r = solve(problem)
    assert check_feasible(problem, r.assignment) == []
    per_user = r.user_sinr()
    sinr = np.array([per_user[k][0] for k in range(10)])
    print(f"{label:22s} objective {r.objective_value:12.3f}  nodes {r.nodes_explored:6d}")
    print("  users on (PBS x RB):", (r.assignment.slots + 1).tolist())
    print("  SINR dB:", np.round(10 * np.log10(sinr), 1))
    return sinr


before = show("WSRMax, equal weights", make_problem(sc, Objective.WSRMAX))

# outpatient weights from their records, current state 4, alpha 500
clfs = [bayes.train(r) for r in bayes.builtin_records()]
state = bayes.builtin_current_states()[3]
up = np.ones(10)
up[7:] = [bayes.priority(bayes.posterior(c, state), 500, True) for c in clfs]
after = show("WSRMax, alpha = 500", make_problem(sc, Objective.WSRMAX, up))
print("  outpatient SINR change (dB):", np.round(10 * np.log10(after[7:] / before[7:]), 1))

show("PF before", make_problem(sc, Objective.PF_BEFORE))
show("PF after, alpha = 500", make_problem(sc, Objective.PF_AFTER, up))

# the exhaustive oracle agrees on a small instance
small = generate(ScenarioConfig(num_pbs=2, rbs_per_pbs=3, num_users=5, num_normal=4), seed=1)
p = make_problem(small, Objective.WSRMAX, [1, 1, 1, 1, 60])
print("\nsmall instance:", solve(p).objective_value, "==", solve_bruteforce(p).objective_value)
