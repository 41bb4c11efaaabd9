"""MILP formulation of the allocation problem, exported in CPLEX LP format.

The exported model lets an external MILP solver cross-check :func:`solve`.
The SINR equation is made linear by multiplying out the denominator (divided
through by the noise power)::

    PSI_k_n_b + sum_{m != k, w != b} (omega[m,n,b]/sigma) * V_k_n_m_b_w
        = (omega[k,n,b]/sigma) * X_k_n_b

where ``V_k_n_m_b_w`` stands for the product ``PSI_k_n_b * X_m_n_w``. It is
pinned by the four standard big-M inequalities with the per-variable bound
``M = omega[k,n,b]/sigma``::

    V <= M * X_m_n_w      V <= PSI      V >= PSI - M * (1 - X_m_n_w)      V >= 0

Logarithmic terms use a variable ``L_k_n_b`` capped by tangent lines of ln
at each breakpoint ``p``: ``L <= ln p + (PSI - p)/p``. The tangents lie
above the concave ln, so the model's optimum upper-bounds the true one. The
cuts are relaxed by a big-M term when the slot is unused, and ``L`` is
forced to 0 there.

Indices in variable names are 1-based (``X_1_1_1`` is user 1, RB 1, PBS 1).
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .allocator import AllocationProblem, Objective

__all__ = [
    "PiecewiseLnSpec",
    "LinearConstraint",
    "MilpModel",
    "build_milp",
    "write_lp",
    "lp_string",
    "LpFile",
    "parse_lp",
    "format_number",
]

DEFAULT_BREAKPOINTS = 32
DEFAULT_LOWEST_BREAKPOINT = 1e-3


@dataclass(frozen=True)
class PiecewiseLnSpec:
    """Tangent points for the outer approximation of ln."""

    breakpoints: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(p) for p in self.breakpoints)
        if len(bp) < 2:
            raise ValueError("need at least 2 breakpoints")
        if any(p <= 0 or not math.isfinite(p) for p in bp):
            raise ValueError("breakpoints must be finite and positive")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly ascending")
        object.__setattr__(self, "breakpoints", bp)

    @classmethod
    def log_spaced(
        cls, problem: AllocationProblem, count: int = DEFAULT_BREAKPOINTS, lowest: float = DEFAULT_LOWEST_BREAKPOINT
    ) -> "PiecewiseLnSpec":
        """``lowest * (top / lowest) ** (i / count)`` for ``i = 0 .. count-1``,
        where ``top`` is the largest ``omega/sigma``.

        The grid for ``2 * count`` contains the grid for ``count``, so doubling
        the count can only tighten the approximation.
        """
        if count < 2:
            raise ValueError("need at least 2 breakpoints")
        top = float(problem.scenario.snr.max())
        top = max(top, lowest * 10.0)
        ratio = math.log(top / lowest)
        return cls(tuple(lowest * math.exp(ratio * i / count) for i in range(count)))


@dataclass
class LinearConstraint:
    name: str
    terms: list[tuple[float, str]]
    sense: str  # "<=", ">=", "="
    rhs: float


@dataclass
class MilpModel:
    """A maximization MILP: named variables, linear rows, linear objective."""

    name: str = "allocation"
    variables: dict[str, str] = field(default_factory=dict)  # name -> "binary" | "continuous"
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    constraints: list[LinearConstraint] = field(default_factory=list)
    objective: list[tuple[float, str]] = field(default_factory=list)

    def add_var(self, name: str, kind: str = "continuous", lo: float = 0.0, hi: float = math.inf) -> str:
        if name in self.variables:
            raise ValueError(f"duplicate variable {name}")
        self.variables[name] = kind
        if kind == "binary":
            self.bounds[name] = (0.0, 1.0)
        else:
            self.bounds[name] = (lo, hi)
        return name

    def add_constraint(self, name: str, terms, sense: str, rhs: float) -> None:
        if sense not in ("<=", ">=", "="):
            raise ValueError(f"bad sense {sense}")
        for _, v in terms:
            if v not in self.variables:
                raise ValueError(f"constraint {name} uses undeclared variable {v}")
        self.constraints.append(LinearConstraint(name, list(terms), sense, float(rhs)))

    def names(self, prefix: str) -> list[str]:
        return [v for v in self.variables if v.split("_", 1)[0] == prefix]

    @property
    def binaries(self) -> list[str]:
        return [v for v, kind in self.variables.items() if kind == "binary"]


def _x(k, n, b):
    return f"X_{k + 1}_{n + 1}_{b + 1}"


def _psi(k, n, b):
    return f"PSI_{k + 1}_{n + 1}_{b + 1}"


def _v(k, n, m, b, w):
    return f"V_{k + 1}_{n + 1}_{m + 1}_{b + 1}_{w + 1}"


def _l(k, n, b):
    return f"L_{k + 1}_{n + 1}_{b + 1}"


def build_milp(problem: AllocationProblem, pw: PiecewiseLnSpec | None = None) -> MilpModel:
    """Linearized MILP of ``problem``.

    ``pw`` is only used by the logarithmic objectives; it defaults to
    :meth:`PiecewiseLnSpec.log_spaced`.
    """
    K, N, B = problem.shape
    sc = problem.scenario
    snr = sc.snr
    obj = problem.objective
    if obj is Objective.WSRMAX:
        log_user = np.zeros(K, dtype=bool)
    elif obj is Objective.PF_BEFORE:
        log_user = np.ones(K, dtype=bool)
    else:
        log_user = ~sc.op_flags
    if log_user.any() and pw is None:
        pw = PiecewiseLnSpec.log_spaced(problem)

    model = MilpModel(name=f"allocation_{obj.value}")
    triples = [(k, n, b) for k in range(K) for n in range(N) for b in range(B)]
    for k, n, b in triples:
        model.add_var(_x(k, n, b), "binary")
    for k, n, b in triples:
        model.add_var(_psi(k, n, b), lo=0.0, hi=float(snr[k, n, b]))
    products = [
        (k, n, m, b, w)
        for k, n, b in triples
        for m in range(K)
        if m != k
        for w in range(B)
        if w != b
    ]
    for k, n, m, b, w in products:
        model.add_var(_v(k, n, m, b, w), lo=0.0, hi=float(snr[k, n, b]))

    if log_user.any():
        bp = pw.breakpoints
        cut_relax = max(0.0, 1.0 - math.log(bp[0]))
        ln_data = {}
        for k, n, b in triples:
            if not log_user[k]:
                continue
            top = math.log(snr[k, n, b])
            floor = min(math.log(bp[0]) - 1.0, top)
            ln_data[(k, n, b)] = (top, floor)
            model.add_var(_l(k, n, b), lo=min(floor, 0.0), hi=max(top, 0.0))

    # (i) one user per slot
    for n in range(N):
        for b in range(B):
            model.add_constraint(f"slot_{n + 1}_{b + 1}", [(1.0, _x(k, n, b)) for k in range(K)], "<=", 1)
    # (ii) power cap as an RB count, (iii) at least one RB
    for k in range(K):
        row = [(1.0, _x(k, n, b)) for n in range(N) for b in range(B)]
        model.add_constraint(f"maxrb_{k + 1}", row, "<=", problem.max_rbs)
        model.add_constraint(f"minrb_{k + 1}", row, ">=", 1)
    # a user's RBs all sit on one PBS
    for k in range(K):
        for b in range(B):
            for w in range(b + 1, B):
                for n in range(N):
                    for n2 in range(N):
                        model.add_constraint(
                            f"assoc_{k + 1}_{n + 1}_{b + 1}_{n2 + 1}_{w + 1}",
                            [(1.0, _x(k, n, b)), (1.0, _x(k, n2, w))],
                            "<=",
                            1,
                        )
    # SINR definition and its bound
    for k, n, b in triples:
        row = [(1.0, _psi(k, n, b))]
        for m in range(K):
            if m == k:
                continue
            for w in range(B):
                if w != b:
                    row.append((float(snr[m, n, b]), _v(k, n, m, b, w)))
        row.append((-float(snr[k, n, b]), _x(k, n, b)))
        model.add_constraint(f"sinr_{k + 1}_{n + 1}_{b + 1}", row, "=", 0)
        model.add_constraint(
            f"psimax_{k + 1}_{n + 1}_{b + 1}",
            [(1.0, _psi(k, n, b)), (-float(snr[k, n, b]), _x(k, n, b))],
            "<=",
            0,
        )
    # big-M product linearization
    for k, n, m, b, w in products:
        big_m = float(snr[k, n, b])
        v, psi, xm = _v(k, n, m, b, w), _psi(k, n, b), _x(m, n, w)
        tag = f"{k + 1}_{n + 1}_{m + 1}_{b + 1}_{w + 1}"
        model.add_constraint(f"prodx_{tag}", [(1.0, v), (-big_m, xm)], "<=", 0)
        model.add_constraint(f"prodpsi_{tag}", [(1.0, v), (-1.0, psi)], "<=", 0)
        model.add_constraint(f"prodlo_{tag}", [(1.0, v), (-1.0, psi), (-big_m, xm)], ">=", -big_m)
    # tangent cuts of ln
    if log_user.any():
        for (k, n, b), (top, floor) in ln_data.items():
            l, psi, x = _l(k, n, b), _psi(k, n, b), _x(k, n, b)
            tag = f"{k + 1}_{n + 1}_{b + 1}"
            for i, p in enumerate(bp):
                # L <= ln p - 1 + PSI/p + C (1 - X)
                model.add_constraint(
                    f"lncut_{tag}_{i + 1}",
                    [(1.0, l), (-1.0 / p, psi), (cut_relax, x)],
                    "<=",
                    math.log(p) - 1.0 + cut_relax,
                )
            model.add_constraint(f"lnhi_{tag}", [(1.0, l), (-top, x)], "<=", 0)
            model.add_constraint(f"lnlo_{tag}", [(1.0, l), (-floor, x)], ">=", 0)

    up = problem.priorities
    for k, n, b in triples:
        if log_user[k]:
            model.objective.append((1.0, _l(k, n, b)))
        else:
            model.objective.append((float(up[k]), _psi(k, n, b)))
    return model


# -- LP text format ----------------------------------------------------------------


def format_number(x: float) -> str:
    """Shortest round-trip decimal; integral values without a fraction."""
    x = float(x)
    if not math.isfinite(x):
        return "inf" if x > 0 else "-inf"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _expr(terms, per_line: int = 6) -> str:
    parts = []
    for i, (coef, var) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1 else f"{format_number(mag)} {var}"
        if i == 0:
            parts.append(f"- {body}" if sign == "-" else body)
        else:
            if i % per_line == 0:
                parts.append(f"\n   {sign} {body}")
            else:
                parts.append(f" {sign} {body}")
    return "".join(parts)


def write_lp(model: MilpModel, sink: TextIO) -> None:
    """Write ``model`` in CPLEX LP format to the text stream ``sink``."""
    out = []
    out.append(f"\\ {model.name}")
    out.append("Maximize")
    if model.objective:
        out.append(f" obj: {_expr(model.objective)}")
    else:
        out.append(" obj:")
    out.append("Subject To")
    for c in model.constraints:
        out.append(f" {c.name}: {_expr(c.terms)} {c.sense} {format_number(c.rhs)}")
    out.append("Bounds")
    for v, kind in model.variables.items():
        if kind == "binary":
            continue
        lo, hi = model.bounds[v]
        if lo == -math.inf and hi == math.inf:
            out.append(f" {v} free")
        elif hi == math.inf:
            out.append(f" {v} >= {format_number(lo)}")
        else:
            out.append(f" {format_number(lo)} <= {v} <= {format_number(hi)}")
    if model.binaries:
        out.append("Binary")
        for v in model.binaries:
            out.append(f" {v}")
    out.append("End")
    sink.write("\n".join(out) + "\n")


def lp_string(model: MilpModel) -> str:
    buf = io.StringIO()
    write_lp(model, buf)
    return buf.getvalue()


@dataclass
class LpFile:
    """Parsed contents of an LP file written by :func:`write_lp`."""

    sense: str
    objective: dict[str, float]
    constraints: list[tuple[str, dict[str, float], str, float]]
    bounds: dict[str, tuple[float, float]]
    binaries: list[str]

    @property
    def variables(self) -> list[str]:
        seen = dict.fromkeys(self.objective)
        for _, terms, _, _ in self.constraints:
            seen.update(dict.fromkeys(terms))
        seen.update(dict.fromkeys(self.bounds))
        seen.update(dict.fromkeys(self.binaries))
        return list(seen)


_SECTIONS = {
    "maximize": "obj", "maximum": "obj", "max": "obj",
    "minimize": "obj", "minimum": "obj", "min": "obj",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds",
    "binary": "bin", "binaries": "bin", "bin": "bin",
    "end": "end",
}
_TERM = re.compile(r"([+-])?\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*([A-Za-z_][\w.]*)")
_NUM = r"[+-]?(?:inf(?:inity)?|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"


def _num(s: str) -> float:
    return float(s.lower().replace("infinity", "inf"))


def _parse_expr(text: str) -> dict[str, float]:
    terms: dict[str, float] = {}
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse expression near {text[pos:pos + 30]!r}")
        sign, coef, var = m.groups()
        value = float(coef) if coef else 1.0
        if sign == "-":
            value = -value
        terms[var] = terms.get(var, 0.0) + value
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return terms


def parse_lp(text: str) -> LpFile:
    """Read the LP subset produced by :func:`write_lp`."""
    section = None
    sense = None
    statements: dict[str, list[str]] = {"obj": [], "st": [], "bounds": [], "bin": []}
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if section == "obj":
                sense = "max" if key.startswith("max") else "min"
            if section == "end":
                break
            continue
        if section is None:
            raise ValueError(f"content before any section: {line!r}")
        if section == "bin":
            statements["bin"].extend(line.split())
        elif section in ("obj", "st") and line[:1] in "+-" and statements[section]:
            statements[section][-1] += " " + line  # continuation
        else:
            statements[section].append(line)
    if sense is None:
        raise ValueError("no objective section")

    def split_name(stmt):
        if ":" in stmt:
            name, body = stmt.split(":", 1)
            return name.strip(), body.strip()
        return None, stmt

    objective: dict[str, float] = {}
    for stmt in statements["obj"]:
        _, body = split_name(stmt)
        if body:
            for v, c in _parse_expr(body).items():
                objective[v] = objective.get(v, 0.0) + c
    constraints = []
    for i, stmt in enumerate(statements["st"]):
        name, body = split_name(stmt)
        m = re.match(rf"(.*?)(<=|>=|=<|=>|<|>|=)\s*({_NUM})\s*$", body)
        if not m:
            raise ValueError(f"cannot parse constraint {stmt!r}")
        expr, op, rhs = m.groups()
        op = {"<": "<=", "=<": "<=", ">": ">=", "=>": ">="}.get(op, op)
        constraints.append((name or f"c{i + 1}", _parse_expr(expr), op, _num(rhs)))
    bounds: dict[str, tuple[float, float]] = {}
    for stmt in statements["bounds"]:
        parts = stmt.split()
        if len(parts) == 2 and parts[1].lower() == "free":
            bounds[parts[0]] = (-math.inf, math.inf)
            continue
        m = re.fullmatch(rf"({_NUM})\s*<=\s*([A-Za-z_][\w.]*)\s*<=\s*({_NUM})", stmt)
        if m:
            bounds[m.group(2)] = (_num(m.group(1)), _num(m.group(3)))
            continue
        m = re.fullmatch(rf"([A-Za-z_][\w.]*)\s*(<=|>=|=)\s*({_NUM})", stmt)
        if not m:
            raise ValueError(f"cannot parse bound {stmt!r}")
        var, op, val = m.group(1), m.group(2), _num(m.group(3))
        lo, hi = bounds.get(var, (0.0, math.inf))
        if op == "<=":
            hi = val
        elif op == ">=":
            lo = val
        else:
            lo = hi = val
        bounds[var] = (lo, hi)
    return LpFile(sense, objective, constraints, bounds, statements["bin"])
