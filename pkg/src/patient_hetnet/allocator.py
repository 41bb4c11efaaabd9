"""Resource-block assignment: SINR, feasibility, objectives and exact solvers.

An assignment is a ``(B, N)`` integer array of slots; ``slots[b, n]`` is the
user transmitting to PBS ``b`` on RB ``n``, or ``-1`` when the slot is idle.
This encodes "at most one user per slot" structurally.

The uplink SINR of user ``k`` in slot ``(b, n)`` is::

    psi = omega[k, n, b] / (sum_{w != b} omega[slots[w, n], n, b] + sigma)

i.e. every user on RB ``n`` at another PBS interferes at ``b``.

Two exact solvers are provided. :func:`solve_bruteforce` enumerates every
feasible assignment and is the reference oracle for small instances.
:func:`solve` is a depth-first branch-and-bound over slot decisions. Both
break ties between equal objective values by the lexicographically smallest
row-major slot tuple (``-1`` sorts first), so they return the same
assignment, not just the same value.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .channel import mw_to_dbm
from .scenario import Scenario, max_rbs_per_user

__all__ = [
    "Objective",
    "AllocationProblem",
    "Assignment",
    "AllocationResult",
    "Violation",
    "InfeasibleProblemError",
    "SearchSpaceTooLarge",
    "make_problem",
    "sinr",
    "sinr_matrix",
    "check_feasible",
    "evaluate_objective",
    "solve_bruteforce",
    "solve",
    "result_to_dict",
]

BRUTEFORCE_LIMIT = 10**7


class Objective(str, enum.Enum):
    """Allocation objectives.

    ``WSRMAX`` maximizes the priority-weighted SINR sum; ``PF_BEFORE`` the sum
    of ln SINR; ``PF_AFTER`` keeps ln SINR for normal users and switches the
    outpatients to priority-weighted linear SINR.
    """

    WSRMAX = "wsrmax"
    PF_BEFORE = "pf-before"
    PF_AFTER = "pf-after"


class InfeasibleProblemError(ValueError):
    """No assignment satisfies the RB constraints."""


class SearchSpaceTooLarge(ValueError):
    """Raised by the brute-force oracle when enumeration would be too long."""


@dataclass(frozen=True, eq=False)
class AllocationProblem:
    """A scenario together with user priorities and the objective to maximize."""

    scenario: Scenario
    priorities: np.ndarray
    objective: Objective = Objective.WSRMAX
    max_rbs: int | None = None

    def __post_init__(self):
        K = self.scenario.config.num_users
        up = np.array(self.priorities, dtype=float)
        if up.shape != (K,):
            raise ValueError(f"expected {K} priorities, got shape {up.shape}")
        if not np.all(np.isfinite(up)) or not np.all(up > 0):
            raise ValueError("priorities must be finite and positive")
        up.setflags(write=False)
        object.__setattr__(self, "priorities", up)
        object.__setattr__(self, "objective", Objective(self.objective))
        if self.max_rbs is None:
            object.__setattr__(self, "max_rbs", max_rbs_per_user(self.scenario.config))
        if self.max_rbs < 1:
            raise ValueError("max_rbs must be >= 1")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.scenario.omega.shape

    def term(self, k: int, psi: float) -> float:
        """Contribution of user ``k`` holding one RB at SINR ``psi``."""
        if self.objective is Objective.WSRMAX or (
            self.objective is Objective.PF_AFTER and self.scenario.op_flags[k]
        ):
            return float(self.priorities[k]) * psi
        return math.log(psi)


def make_problem(
    scenario: Scenario,
    objective: Objective | str = Objective.WSRMAX,
    priorities: Sequence[float] | None = None,
) -> AllocationProblem:
    """Build a problem; ``priorities`` defaults to 1 for every user."""
    if priorities is None:
        priorities = np.ones(scenario.config.num_users)
    return AllocationProblem(scenario, np.asarray(priorities, dtype=float), Objective(objective))


class Assignment:
    """Slot map ``(B, N) -> user | -1``."""

    __slots__ = ("slots",)

    def __init__(self, slots):
        s = np.array(slots, dtype=np.int64)
        if s.ndim != 2:
            raise ValueError("slots must be a 2-D (B, N) array")
        if np.any(s < -1):
            raise ValueError("slot entries must be a user index or -1")
        s.setflags(write=False)
        self.slots = s

    @classmethod
    def empty(cls, num_pbs: int, rbs_per_pbs: int) -> "Assignment":
        return cls(np.full((num_pbs, rbs_per_pbs), -1))

    @classmethod
    def from_user_rbs(cls, num_pbs: int, rbs_per_pbs: int, user_rbs: dict[int, Iterable[tuple[int, int]]]):
        """Build from ``{user: [(b, n), ...]}``; raises if a slot is claimed twice."""
        s = np.full((num_pbs, rbs_per_pbs), -1)
        for k, rbs in user_rbs.items():
            for b, n in rbs:
                if s[b, n] != -1:
                    raise ValueError(f"slot (b={b}, n={n}) assigned to users {s[b, n]} and {k}")
                s[b, n] = k
        return cls(s)

    def key(self) -> tuple[int, ...]:
        """Row-major slot tuple; the tie-break order of both solvers."""
        return tuple(int(v) for v in self.slots.ravel())

    def rbs_of(self, k: int) -> list[tuple[int, int]]:
        """``(b, n)`` slots held by user ``k`` in row-major order."""
        bs, ns = np.nonzero(self.slots == k)
        return list(zip(bs.tolist(), ns.tolist()))

    def counts(self, num_users: int) -> np.ndarray:
        used = self.slots[self.slots >= 0]
        return np.bincount(used, minlength=num_users)

    def __eq__(self, other):
        return isinstance(other, Assignment) and np.array_equal(self.slots, other.slots)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Assignment({self.slots.tolist()})"


class Violation(NamedTuple):
    constraint: str  # "slot-bounds" | "min-rbs" | "max-rbs" | "single-association"
    user: int
    detail: str


@dataclass
class AllocationResult:
    assignment: Assignment
    sinr: np.ndarray  # (B, N); nan for idle slots
    objective_value: float
    nodes_explored: int
    proven_optimal: bool = True
    solver: str = "branch-and-bound"

    def user_sinr(self) -> dict[int, list[float]]:
        """Per-user SINR values in slot order."""
        out: dict[int, list[float]] = {}
        for (b, n), k in np.ndenumerate(self.assignment.slots):
            if k >= 0:
                out.setdefault(int(k), []).append(float(self.sinr[b, n]))
        return out


def _check_shape(problem: AllocationProblem, assignment: Assignment) -> None:
    K, N, B = problem.shape
    if assignment.slots.shape != (B, N):
        raise ValueError(f"assignment has shape {assignment.slots.shape}, expected {(B, N)}")
    if np.any(assignment.slots >= K):
        raise ValueError("assignment references a user index >= K")


def sinr(problem: AllocationProblem, assignment: Assignment, k: int, n: int, b: int) -> float:
    """SINR of user ``k`` on RB ``n`` at PBS ``b``."""
    _check_shape(problem, assignment)
    if assignment.slots[b, n] != k:
        raise ValueError(f"user {k} is not assigned to (b={b}, n={n})")
    omega = problem.scenario.omega
    interference = 0.0
    for w in range(assignment.slots.shape[0]):
        m = assignment.slots[w, n]
        if w != b and m >= 0:
            interference += omega[m, n, b]
    return float(omega[k, n, b] / (interference + problem.scenario.sigma))


def sinr_matrix(problem: AllocationProblem, assignment: Assignment) -> np.ndarray:
    """SINR of every occupied slot as a ``(B, N)`` array (nan when idle)."""
    _check_shape(problem, assignment)
    slots = assignment.slots
    B, N = slots.shape
    out = np.full((B, N), np.nan)
    for b in range(B):
        for n in range(N):
            if slots[b, n] >= 0:
                out[b, n] = sinr(problem, assignment, int(slots[b, n]), n, b)
    return out


def check_feasible(problem: AllocationProblem, assignment: Assignment) -> list[Violation]:
    """Return every violated constraint; an empty list means feasible."""
    K, N, B = problem.shape
    if assignment.slots.shape != (B, N):
        return [Violation("slot-bounds", -1, f"shape {assignment.slots.shape} != {(B, N)}")]
    out = []
    bad = assignment.slots[assignment.slots >= K]
    for k in np.unique(bad):
        out.append(Violation("slot-bounds", int(k), f"user index {k} >= K={K}"))
    counts = assignment.counts(max(K, int(assignment.slots.max()) + 1))
    for k in range(K):
        if counts[k] < 1:
            out.append(Violation("min-rbs", k, "user holds no resource block"))
        elif counts[k] > problem.max_rbs:
            out.append(
                Violation("max-rbs", k, f"user holds {counts[k]} RBs, power cap allows {problem.max_rbs}")
            )
        pbs = sorted({b for b, _ in assignment.rbs_of(k)})
        if len(pbs) > 1:
            out.append(Violation("single-association", k, f"user spans PBSs {pbs}"))
    return out


def evaluate_objective(problem: AllocationProblem, assignment: Assignment) -> float:
    """Objective value of a feasible assignment.

    The terms are accumulated with :func:`math.fsum`, so the result is
    correctly rounded and independent of summation order.
    """
    psi = sinr_matrix(problem, assignment)
    terms = [
        problem.term(int(k), float(psi[b, n]))
        for (b, n), k in np.ndenumerate(assignment.slots)
        if k >= 0
    ]
    value = math.fsum(terms)
    if not math.isfinite(value):
        raise ValueError(f"objective is not finite ({value})")
    return value


def _result(problem, slots, value, nodes, solver) -> AllocationResult:
    a = Assignment(slots)
    return AllocationResult(
        assignment=a,
        sinr=sinr_matrix(problem, a),
        objective_value=value,
        nodes_explored=nodes,
        proven_optimal=True,
        solver=solver,
    )


def _better(value, key, best_value, best_key) -> bool:
    return value > best_value or (value == best_value and key < best_key)


def solve_bruteforce(problem: AllocationProblem, limit: int = BRUTEFORCE_LIMIT) -> AllocationResult:
    """Exhaustive search over all assignments.

    Slots are filled in row-major order with values tried from ``-1`` upward,
    so leaves are visited in tie-break order. Only the structural
    constraints (RB cap, single association, enough slots left for idle
    users) restrict the enumeration; the objective never prunes.
    """
    K, N, B = problem.shape
    if (K + 1) ** (B * N) > limit:
        raise SearchSpaceTooLarge(
            f"{(K + 1)}^{B * N} candidate assignments exceed the brute-force limit {limit}; use solve()"
        )
    slots = np.full((B, N), -1)
    counts = [0] * K
    assoc = [-1] * K
    order = [(b, n) for b in range(B) for n in range(N)]
    best = [-math.inf, None]
    leaves = [0]

    def rec(t: int, needy: int) -> None:
        if needy > len(order) - t:
            return
        if t == len(order):
            leaves[0] += 1
            a = Assignment(slots)
            v = evaluate_objective(problem, a)
            if best[1] is None or _better(v, a.key(), best[0], best[1]):
                best[0], best[1] = v, a.key()
            return
        b, n = order[t]
        rec(t + 1, needy)
        for k in range(K):
            if counts[k] >= problem.max_rbs or assoc[k] not in (-1, b):
                continue
            slots[b, n] = k
            counts[k] += 1
            prev = assoc[k]
            assoc[k] = b
            rec(t + 1, needy - (counts[k] == 1))
            assoc[k] = prev
            counts[k] -= 1
            slots[b, n] = -1

    rec(0, K)
    if best[1] is None:
        raise InfeasibleProblemError("no feasible assignment")
    return _result(problem, np.array(best[1]).reshape(B, N), best[0], leaves[0], "bruteforce")


class _Search:
    """Depth-first branch-and-bound state for :func:`solve`.

    Slots are decided column by column (all PBSs of RB 0, then RB 1, ...)
    so interference between co-channel slots becomes exact early.

    The bound at a node is the sum of

    * for each occupied slot, the user's term at an optimistic SINR, and
    * the value of a max-weight matching between the undecided slots and
      users (with remaining RB capacity) at optimistic SINRs.

    An optimistic SINR counts exact interference from decided co-channel
    slots and, for undecided co-channel slots, the least interference any
    eligible user could cause there, or none when the slot may stay idle.
    Interference only lowers SINR and every term is increasing in SINR, so
    the bound never underestimates a completion.

    RBs whose received powers are identical for every user and PBS are
    interchangeable. The smallest slot tuple among such permutations has
    their columns in non-decreasing order, so other orders are skipped.
    """

    def __init__(self, problem: AllocationProblem):
        self.p = problem
        K, N, B = problem.shape
        self.K, self.N, self.B = K, N, B
        sc = problem.scenario
        # everything normalized by noise: psi = snr / (1 + sum x)
        self.snr = sc.omega / sc.sigma  # (K, N, B)
        self.x = self.snr
        up = problem.priorities
        if problem.objective is Objective.WSRMAX:
            self.linear = np.ones(K, dtype=bool)
        elif problem.objective is Objective.PF_BEFORE:
            self.linear = np.zeros(K, dtype=bool)
        else:
            self.linear = sc.op_flags.copy()
        self.up = np.where(self.linear, up, 1.0)
        self.order = [(b, n) for n in range(N) for b in range(B)]
        # previous RB with an identical omega column, or -1
        self.twin = [-1] * N
        for n in range(N):
            for n2 in range(n - 1, -1, -1):
                if np.array_equal(sc.omega[:, n, :], sc.omega[:, n2, :]):
                    self.twin[n] = n2
                    break
        self.pairs = _PairTables(self) if B == 2 else None
        self.slots = np.full((B, N), -1)
        self.counts = np.zeros(K, dtype=np.int64)
        self.assoc = np.full(K, -1)
        self.nodes = 0
        self.best_value = -math.inf
        self.best_key: tuple | None = None
        # slack so rounding in the bound can never prune a tying leaf
        self.rtol = 1e-9

    # -- term helpers ------------------------------------------------------
    def _terms(self, users: np.ndarray, psi: np.ndarray) -> np.ndarray:
        lin = self.linear[users]
        with np.errstate(divide="ignore"):
            return np.where(lin, self.up[users] * psi, np.log(psi))

    # -- incumbent -----------------------------------------------------------
    def offer(self, slots: np.ndarray) -> None:
        a = Assignment(slots)
        if check_feasible(self.p, a):
            return
        v = evaluate_objective(self.p, a)
        if self.best_key is None or _better(v, a.key(), self.best_value, self.best_key):
            self.best_value, self.best_key = v, a.key()

    # -- bound ---------------------------------------------------------------
    def _candidates(self, b: int, must_fill: bool) -> np.ndarray:
        ok = (self.counts < self.p.max_rbs) & ((self.assoc == -1) | (self.assoc == b))
        if must_fill:
            ok &= self.counts == 0
        return ok

    def bound_and_weights(self, t: int, needy: int):
        """Upper bound for completions of the node whose first ``t`` slots
        (branching order) are decided, plus the optimistic weights of the
        next slot's candidates (for child ordering)."""
        K, B = self.K, self.B
        undecided = self.order[t:]
        must_fill = len(undecided) == needy
        # least interference an undecided slot (w, n) can inject at each PBS
        # as (min, argmin, second min) over its candidate users
        cand = {}
        lo = {}
        for (w, n) in undecided:
            c = self._candidates(w, must_fill)
            cand[(w, n)] = c
            if not must_fill or not c.any():
                continue
            vals = np.where(c[:, None], self.x[:, n, :], np.inf)  # (K, B)
            idx = np.argsort(vals, axis=0, kind="stable")[:2]
            first = vals[idx[0], np.arange(B)]
            second = vals[idx[1], np.arange(B)] if K > 1 else np.full(B, np.inf)
            lo[(w, n)] = (first, idx[0], second)

        undecided_set = set(undecided)

        def interference(b: int, n: int, users: np.ndarray) -> np.ndarray:
            tot = np.zeros(len(users))
            for w in range(B):
                if w == b:
                    continue
                if (w, n) in undecided_set:
                    if must_fill and (w, n) in lo:
                        first, arg, second = lo[(w, n)]
                        tot += np.where(users == arg[b], second[b], first[b])
                else:
                    m = self.slots[w, n]
                    if m >= 0:
                        tot += self.x[m, n, b]
            return tot

        decided_total = 0.0
        for (b, n) in self.order[:t]:
            k = self.slots[b, n]
            if k < 0:
                continue
            users = np.array([k])
            psi = self.snr[k, n, b] / (1.0 + interference(b, n, users))
            decided_total += float(self._terms(users, psi)[0])

        if not undecided:
            return decided_total, None

        rows = []
        all_users = np.arange(K)
        for (b, n) in undecided:
            c = cand[(b, n)]
            psi = self.snr[:, n, b] / (1.0 + interference(b, n, all_users))
            w = np.where(c, self._terms(all_users, psi), -np.inf)
            rows.append(w)
        W = np.array(rows)  # (slots, K)
        first_weights = W[0]

        if must_fill:
            cols = np.nonzero(self.counts == 0)[0]
            M = W[:, cols]
            if not np.all(np.isfinite(M).any(axis=1)):
                return -math.inf, first_weights
            finite = np.isfinite(M)
            # a forbidden pair must never be chosen: make it worse than any
            # full matching of allowed pairs
            span = np.abs(M[finite]).sum() + 1.0
            M = np.where(finite, M, -span * (len(cols) + 1))
            r, c = linear_sum_assignment(M, maximize=True)
            if not np.all(finite[r, c]):
                return -math.inf, first_weights
            return decided_total + float(M[r, c].sum()), first_weights

        cap = np.minimum(self.p.max_rbs - self.counts, len(undecided))
        col_users = np.repeat(all_users, np.maximum(cap, 0))
        if len(col_users) == 0:
            return decided_total, first_weights
        M = np.maximum(W[:, col_users], 0.0)
        r, c = linear_sum_assignment(M, maximize=True)
        return decided_total + float(M[r, c].sum()), first_weights

    # -- search ----------------------------------------------------------------
    def run(self) -> None:
        if self.pairs is not None and self.K == 2 * self.N:
            self.offer(self.pairs.greedy())
        self._dfs(0, self.K)

    def _prunable(self, bound: float) -> bool:
        if self.best_key is None:
            return False
        return bound < self.best_value - self.rtol * max(1.0, abs(self.best_value))

    def _out_of_order(self, b: int, n: int) -> bool:
        tw = self.twin[n]
        if tw < 0:
            return False
        return tuple(self.slots[: b + 1, n].tolist()) < tuple(self.slots[: b + 1, tw].tolist())

    def _dfs(self, t: int, needy: int, lam: np.ndarray | None = None) -> None:
        self.nodes += 1
        remaining = len(self.order) - t
        if needy > remaining:
            return
        if t == len(self.order):
            self.offer(self.slots)
            return
        must_fill = remaining == needy
        if must_fill and self.pairs is not None:
            bound, weights, lam = self.pairs.bound(t, lam)
        else:
            bound, weights = self.bound_and_weights(t, needy)
            lam = None
        if bound == -math.inf or self._prunable(bound):
            return
        b, n = self.order[t]
        cand = np.nonzero(self._candidates(b, must_fill) & np.isfinite(weights))[0]
        # most promising users first; the idle option last
        cand = cand[np.argsort(-weights[cand], kind="stable")]
        for k in cand.tolist():
            self.slots[b, n] = k
            if self._out_of_order(b, n):
                self.slots[b, n] = -1
                continue
            self.counts[k] += 1
            prev = self.assoc[k]
            self.assoc[k] = b
            self._dfs(t + 1, needy - (self.counts[k] == 1), lam)
            self.assoc[k] = prev
            self.counts[k] -= 1
            self.slots[b, n] = -1
        if not must_fill and not self._out_of_order(b, n):
            self._dfs(t + 1, needy)


class _PairTables:
    """Lagrangian bound for two PBSs when every open slot must be filled.

    With ``B == 2`` the objective splits over RB columns, and a column's
    value depends only on the ordered pair (user at PBS 0, user at PBS 1)::

        pair[n, k, m] = term_k(psi of k at PBS 0 with m interfering)
                      + term_m(psi of m at PBS 1 with k interfering)

    When the open slots must each take a distinct user with no RB yet, the
    constraint "every such user is used exactly once" is dualized with
    multipliers ``lam``::

        L(lam) = sum(lam) + sum_columns max_fill(value - sum lam[fill])

    Every ``lam`` gives an upper bound. ``lam`` is improved by Polyak
    subgradient steps toward the incumbent and handed down to children.
    """

    max_iter = 60

    def __init__(self, search: "_Search"):
        self.s = search
        K, N = search.K, search.N
        snr, x = search.snr, search.x
        users = np.arange(K)
        lin = search.linear
        up = search.up

        def terms(psi, k_axis):
            shape = [1] * psi.ndim
            shape[k_axis] = K
            lin_b = lin.reshape(shape)
            with np.errstate(divide="ignore"):
                return np.where(lin_b, up.reshape(shape) * psi, np.log(psi))

        # t0[n, k, m]: k on PBS 0 with m on PBS 1; t1[n, k, m]: m on PBS 1 with k on PBS 0
        psi0 = snr[:, :, 0].T[:, :, None] / (1.0 + x[:, :, 0].T[:, None, :])
        psi1 = snr[:, :, 1].T[:, None, :] / (1.0 + x[:, :, 1].T[:, :, None])
        self.t0 = terms(psi0, 1)
        self.t1 = terms(psi1, 2)
        pair = self.t0 + self.t1
        pair[:, users, users] = -np.inf
        self.pair = pair
        # a column with one idle slot
        self.solo0 = terms(snr[:, :, 0].T, 1)  # (N, K) user k alone on PBS 0
        self.solo1 = terms(snr[:, :, 1].T, 1)

    def _column_value(self, n: int) -> float:
        k, m = self.s.slots[0, n], self.s.slots[1, n]
        if k >= 0 and m >= 0:
            return float(self.pair[n, k, m])
        if k >= 0:
            return float(self.solo0[n, k])
        if m >= 0:
            return float(self.solo1[n, m])
        return 0.0

    def greedy(self) -> np.ndarray:
        """Column-by-column best pair among unused users, then pairwise
        user swaps until no swap improves the pair-table objective."""
        K, N = self.s.K, self.s.N
        slots = np.full((2, N), -1)
        free = np.ones(K, dtype=bool)
        for n in range(N):
            sub = np.where(free[:, None] & free[None, :], self.pair[n], -np.inf)
            k, m = np.unravel_index(int(np.argmax(sub)), sub.shape)
            slots[:, n] = (k, m)
            free[k] = free[m] = False

        def total(sl):
            return sum(self.pair[n, sl[0, n], sl[1, n]] for n in range(N))

        cur = total(slots)
        improved = True
        flat = [(b, n) for b in range(2) for n in range(N)]
        while improved:
            improved = False
            for i in range(len(flat)):
                for j in range(i + 1, len(flat)):
                    (b1, n1), (b2, n2) = flat[i], flat[j]
                    if n1 == n2 and b1 == b2:
                        continue
                    cand = slots.copy()
                    cand[b1, n1], cand[b2, n2] = slots[b2, n2], slots[b1, n1]
                    v = total(cand)
                    if v > cur * (1 + 1e-12) + 1e-12:
                        slots, cur, improved = cand, v, True
        return slots

    def bound(self, t: int, lam: np.ndarray | None):
        s = self.s
        K, N = s.K, s.N
        needy = s.counts == 0
        n_t = s.order[t][1]
        fixed = sum(self._column_value(n) for n in range(n_t))
        half = s.order[t][0] == 1  # column n_t has PBS 0 decided
        d = s.slots[0, n_t] if half else -1
        open_cols = np.arange(n_t + 1 if half else n_t, N)
        mask = needy[:, None] & needy[None, :]
        full = np.where(mask[None, :, :], self.pair[open_cols], -np.inf)  # (C, K, K)
        if half:
            if d >= 0:
                part = self.pair[n_t, d, :].copy()
            else:
                part = self.solo1[n_t].copy()
            part[~needy] = -np.inf
        if lam is None:
            lam = np.zeros(K)
        lam = np.where(needy, lam, 0.0)
        target = s.best_value if s.best_key is not None else None
        threshold = (
            target - s.rtol * max(1.0, abs(target)) if target is not None else -math.inf
        )
        best = math.inf
        best_lam = lam
        theta = 1.0
        stall = 0
        C = len(open_cols)
        for _ in range(self.max_iter):
            value = fixed + float(lam.sum())
            g = needy.astype(float)
            if C:
                red = full - lam[None, :, None] - lam[None, None, :]
                flat = red.reshape(C, -1)
                idx = flat.argmax(axis=1)
                value += float(flat[np.arange(C), idx].sum())
                np.subtract.at(g, idx // K, 1.0)
                np.subtract.at(g, idx % K, 1.0)
            if half:
                pr = part - lam
                j = int(np.argmax(pr))
                value += float(pr[j])
                g[j] -= 1.0
            if not math.isfinite(value):
                return -math.inf, self._weights(t, lam), lam
            if value < best:
                best, best_lam, stall = value, lam, 0
            else:
                stall += 1
                if stall >= 3:
                    theta *= 0.5
                    stall = 0
            if best < threshold or not g.any() or theta < 1e-3:
                break
            gap = value - target if target is not None and value > target else 0.05 * abs(value) + 1e-9
            lam = lam - theta * gap / float(g @ g) * g
        return best, self._weights(t, best_lam), best_lam

    def _weights(self, t, lam):
        """Child ordering scores for the slot at branching position ``t``."""
        s = self.s
        b, n = s.order[t]
        if b == 0:
            red = self.pair[n] - lam[None, :]
            w = red.max(axis=1) - lam
        else:
            d = s.slots[0, n]
            w = (self.pair[n, d, :] if d >= 0 else self.solo1[n]) - lam
        return np.where(s.counts == 0, w, -np.inf)


def solve(problem: AllocationProblem, warm_start: Iterable[Assignment] = ()) -> AllocationResult:
    """Globally optimal assignment by branch-and-bound.

    ``warm_start`` assignments (e.g. the optimum of a related problem) seed
    the incumbent; infeasible ones are ignored. They only speed up pruning
    and never change the returned assignment.
    """
    K, N, B = problem.shape
    if B * N < K:
        raise InfeasibleProblemError(f"{B * N} slots cannot serve {K} users")
    search = _Search(problem)
    for a in warm_start:
        if a.slots.shape == (B, N):
            search.offer(np.array(a.slots))
    search.run()
    if search.best_key is None:
        raise InfeasibleProblemError("no feasible assignment")
    return _result(
        problem, np.array(search.best_key).reshape(B, N), search.best_value, search.nodes, "branch-and-bound"
    )


def result_to_dict(problem: AllocationProblem, result: AllocationResult) -> dict:
    """JSON-ready view: assignment, per-user SINR (linear and dB), objective."""
    users = {}
    for k, vals in sorted(result.user_sinr().items()):
        rbs = result.assignment.rbs_of(k)
        users[str(k + 1)] = {
            "outpatient": bool(problem.scenario.op_flags[k]),
            "priority": float(problem.priorities[k]),
            "rbs": [{"pbs": b + 1, "rb": n + 1} for b, n in rbs],
            "sinr": vals,
            "sinr_db": [float(mw_to_dbm(v)) for v in vals],
        }
    return {
        "objective": problem.objective.value,
        "objective_value": result.objective_value,
        "slots": result.assignment.slots.tolist(),
        "users": users,
        "nodes_explored": result.nodes_explored,
        "proven_optimal": result.proven_optimal,
        "solver": result.solver,
    }
