"""
Exact linear programming over the rationals.

A small two-phase primal simplex with Bland's rule. All arithmetic is done
with :class:`fractions.Fraction`, so returned vertices satisfy every
constraint with zero tolerance. Rows are stored sparsely; the programs built
here are tiny and mostly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Hashable, Mapping, Optional

from .model import Instance

ZERO = Fraction(0)
ONE = Fraction(1)


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """Maximize ``objective . v`` over ``v >= 0`` subject to sparse rows.

    Each variable is identified by a hashable key, e.g. ``("x", j, k)``.
    Relations are ``"<="``, ``">="`` or ``"=="``.
    """

    keys: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    _index: dict = field(default_factory=dict, repr=False)

    def add_variable(self, key: Hashable, objective=0, upper=None) -> int:
        if key in self._index:
            raise ValueError(f"duplicate variable {key!r}")
        self._index[key] = len(self.keys)
        self.keys.append(key)
        self.objective.append(Fraction(objective))
        self.upper.append(None if upper is None else Fraction(upper))
        return self._index[key]

    def add_constraint(self, coeffs: Mapping, relation: str, rhs) -> None:
        if relation not in ("<=", ">=", "=="):
            raise ValueError(f"bad relation {relation!r}")
        row = {}
        for var, c in coeffs.items():
            idx = var if isinstance(var, int) else self._index[var]
            if not 0 <= idx < len(self.keys):
                raise ValueError(f"constraint references undeclared variable {var!r}")
            c = Fraction(c)
            if c:
                row[idx] = row.get(idx, ZERO) + c
        self.rows.append((row, relation, Fraction(rhs)))

    def index(self, key: Hashable) -> int:
        return self._index[key]

    def has(self, key: Hashable) -> bool:
        return key in self._index

    @property
    def num_variables(self) -> int:
        return len(self.keys)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    values: tuple = ()
    objective_value: Optional[Fraction] = None
    keys: tuple = ()

    def value(self, key: Hashable) -> Fraction:
        return self.values[self.keys.index(key)]

    def as_dict(self) -> dict:
        return dict(zip(self.keys, self.values))


def check_solution(lp: LinearProgram, values) -> list:
    """Return a list of violated constraints (exact); empty when feasible."""
    bad = []
    for idx, v in enumerate(values):
        if v < 0:
            bad.append(f"{lp.keys[idx]!r} < 0")
        if lp.upper[idx] is not None and v > lp.upper[idx]:
            bad.append(f"{lp.keys[idx]!r} > {lp.upper[idx]}")
    for r, (row, rel, rhs) in enumerate(lp.rows):
        lhs = sum((c * values[i] for i, c in row.items()), ZERO)
        ok = lhs <= rhs if rel == "<=" else lhs >= rhs if rel == ">=" else lhs == rhs
        if not ok:
            bad.append(f"row {r}: {lhs} {rel} {rhs} fails")
    return bad


class _Tableau:
    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows  # list of sparse dicts
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols

    def pivot(self, r: int, e: int, cost: dict) -> None:
        prow = self.rows[r]
        piv = prow[e]
        if piv != 1:
            inv = 1 / piv
            for c in prow:
                prow[c] *= inv
            self.rhs[r] *= inv
        prhs = self.rhs[r]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(e)
            if f:
                _axpy(row, -f, prow)
                self.rhs[i] -= f * prhs
        f = cost.get(e)
        if f:
            _axpy(cost, -f, prow)
            cost["rhs"] = cost.get("rhs", ZERO) - f * prhs
        self.basis[r] = e

    def run(self, cost: dict, allowed) -> LpStatus:
        """Maximize with reduced costs ``cost``; Bland's rule."""
        while True:
            entering = None
            for c in sorted(k for k, v in cost.items() if k != "rhs" and v > 0):
                if c in allowed:
                    entering = c
                    break
            if entering is None:
                return LpStatus.OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return LpStatus.UNBOUNDED
            self.pivot(best[1], entering, cost)


def _axpy(target: dict, f: Fraction, src: dict) -> None:
    for c, v in src.items():
        nv = target.get(c, ZERO) + f * v
        if nv:
            target[c] = nv
        else:
            target.pop(c, None)


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` exactly; returns an optimal vertex or a failure status.

    Deterministic: the pivoting rule depends only on variable order.
    """
    n = lp.num_variables
    # collect rows as (coeffs, rel, rhs), upper bounds become explicit rows
    raw = list(lp.rows)
    for idx, u in enumerate(lp.upper):
        if u is not None:
            raw.append(({idx: ONE}, "<=", u))

    rows, rhs, basis = [], [], []
    col = n
    slack_cols, art_cols = [], []
    pending_art = []
    for coeffs, rel, b in raw:
        row = dict(coeffs)
        if rel == ">=":
            row = {c: -v for c, v in row.items()}
            b = -b
            rel = "<="
        if rel == "<=":
            s = col
            col += 1
            slack_cols.append(s)
            row[s] = ONE
            if b >= 0:
                rows.append(row)
                rhs.append(b)
                basis.append(s)
                continue
            row = {c: -v for c, v in row.items()}
            b = -b
        elif b < 0:
            row = {c: -v for c, v in row.items()}
            b = -b
        rows.append(row)
        rhs.append(b)
        basis.append(None)
        pending_art.append(len(rows) - 1)
    for r in pending_art:
        a = col
        col += 1
        art_cols.append(a)
        rows[r][a] = ONE
        basis[r] = a
    tab = _Tableau(rows, rhs, basis, col)
    art_set = set(art_cols)

    if art_cols:
        # phase 1: maximize -sum(artificials)
        cost = {"rhs": ZERO}
        for r, row in enumerate(rows):
            if basis[r] in art_set:
                for c, v in row.items():
                    if c not in art_set:
                        cost[c] = cost.get(c, ZERO) + v
                cost["rhs"] += rhs[r]
        cost = {c: v for c, v in cost.items() if v or c == "rhs"}
        allowed = set(range(col)) - art_set
        tab.run(cost, allowed)
        infeas = sum((rhs[r] for r in range(len(rows)) if basis[r] in art_set), ZERO)
        if infeas > 0:
            return _failed(LpStatus.INFEASIBLE, lp)
        # drive zero-level artificials out of the basis, drop redundant rows
        r = 0
        while r < len(tab.rows):
            if tab.basis[r] in art_set:
                cand = sorted(c for c, v in tab.rows[r].items() if c not in art_set and v)
                if cand:
                    tab.pivot(r, cand[0], {})
                else:
                    del tab.rows[r], tab.rhs[r], tab.basis[r]
                    continue
            r += 1
        for row in tab.rows:
            for a in art_cols:
                row.pop(a, None)

    # phase 2
    cost = {c: v for c, v in enumerate(lp.objective) if v}
    cost["rhs"] = ZERO
    for r, b in enumerate(tab.basis):
        cb = lp.objective[b] if b < n else ZERO
        if cb:
            _axpy(cost, -cb, tab.rows[r])
            cost["rhs"] = cost.get("rhs", ZERO) - cb * tab.rhs[r]
    status = tab.run(cost, set(range(col)) - art_set)
    if status is LpStatus.UNBOUNDED:
        return _failed(LpStatus.UNBOUNDED, lp)
    values = [ZERO] * n
    for r, b in enumerate(tab.basis):
        if b < n:
            values[b] = tab.rhs[r]
    obj = sum((c * v for c, v in zip(lp.objective, values)), ZERO)
    return LpSolution(LpStatus.OPTIMAL, tuple(values), obj, tuple(lp.keys))


def _failed(status: LpStatus, lp: LinearProgram) -> LpSolution:
    return LpSolution(status, (), None, tuple(lp.keys))


# ---------------------------------------------------------------------------
# program builders
# ---------------------------------------------------------------------------

def build_mcpk_lp(inst: Instance, effective_capacity: Optional[Mapping] = None) -> LinearProgram:
    """Coverage relaxation with per-knapsack budgets ``effective_capacity``.

    ``x_jk`` exists only when the set fits the knapsack's original capacity
    (``c_j <= B_k``), independent of the effective budget; ``y_i`` is bounded
    by one and by the coverage of item ``i``.
    """
    if effective_capacity is None:
        effective_capacity = {k.id: k.capacity for k in inst.knapsacks}
    lp = LinearProgram()
    _add_coverage_core(lp, inst)
    for kn in inst.knapsacks:
        cap = Fraction(effective_capacity[kn.id])
        if cap > kn.capacity:
            raise ValueError(f"effective capacity of knapsack {kn.id} exceeds its capacity")
        row = {("x", s.id, kn.id): s.cost for s in inst.sets if lp.has(("x", s.id, kn.id))}
        lp.add_constraint(row, "<=", cap)
    return lp


def _add_coverage_core(lp: LinearProgram, inst: Instance) -> None:
    for s in inst.sets:
        for kn in inst.knapsacks:
            if s.cost <= kn.capacity:
                lp.add_variable(("x", s.id, kn.id))
    for it in inst.items:
        lp.add_variable(("y", it.id), objective=it.profit, upper=1)
    for s in inst.sets:
        row = {("x", s.id, kn.id): 1 for kn in inst.knapsacks if lp.has(("x", s.id, kn.id))}
        if row:
            lp.add_constraint(row, "<=", 1)
    for it in inst.items:
        row = {("y", it.id): 1}
        for j in inst.sets_containing(it.id):
            for kn in inst.knapsacks:
                if lp.has(("x", j, kn.id)):
                    row[("x", j, kn.id)] = -1
        lp.add_constraint(row, "<=", 0)


def build_joint_lp(inst: Instance, fixings: Optional[Mapping] = None) -> LinearProgram:
    """Relaxation with the cluster split ``z_kl`` as free variables.

    ``fixings`` maps ``(j, k)`` to 0 or 1 and pins those ``x`` entries.
    Redundant clusters get no ``z`` variables.
    """
    lp = LinearProgram()
    _add_coverage_core(lp, inst)
    for c in inst.clusters:
        if not c.redundant:
            for k in c.knapsack_ids:
                lp.add_variable(("z", k, c.id))
    for kn in inst.knapsacks:
        row = {("x", s.id, kn.id): s.cost for s in inst.sets if lp.has(("x", s.id, kn.id))}
        lp.add_constraint(row, "<=", kn.capacity)
        c = inst.clusters[kn.cluster_id]
        if not c.redundant:
            row = dict(row)
            row[("z", kn.id, c.id)] = -c.capacity
            lp.add_constraint(row, "<=", 0)
    for c in inst.clusters:
        if not c.redundant:
            lp.add_constraint({("z", k, c.id): 1 for k in c.knapsack_ids}, "<=", 1)
    for (j, k), v in (fixings or {}).items():
        if lp.has(("x", j, k)):
            lp.add_constraint({("x", j, k): 1}, "==", v)
        elif v:
            raise ValueError(f"cannot fix x[{j},{k}] = {v}: set does not fit knapsack")
    return lp


def extract_x(sol: LpSolution) -> dict:
    """Nonzero ``x`` entries of a coverage LP solution keyed by ``(j, k)``."""
    return {(key[1], key[2]): v for key, v in zip(sol.keys, sol.values) if key[0] == "x" and v}


# ---------------------------------------------------------------------------
# LP-text dump
# ---------------------------------------------------------------------------

def _var_name(key) -> str:
    if isinstance(key, tuple):
        return "_".join(str(p) for p in key)
    return str(key)


def _scale(coeffs) -> int:
    return math.lcm(*[Fraction(c).denominator for c in coeffs]) if coeffs else 1


def _terms(row: Mapping, keys, factor: int) -> str:
    parts = []
    for idx in sorted(row):
        c = row[idx] * factor
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {abs(c)} {_var_name(keys[idx])}")
    text = " ".join(parts) if parts else "0"
    return text[2:] if text.startswith("+ ") else text


def to_lp_text(lp: LinearProgram) -> str:
    """CPLEX-style LP text. Every row is scaled to integer coefficients."""
    out = []
    obj = {i: c for i, c in enumerate(lp.objective) if c}
    f = _scale(obj.values())
    out.append("\\ exact rational program; each row scaled by the lcm of its denominators")
    if f != 1:
        out.append(f"\\ objective scaled by {f}")
    out.append("Maximize")
    out.append(f" obj: {_terms(obj, lp.keys, f)}")
    out.append("Subject To")
    rel_text = {"<=": "<=", ">=": ">=", "==": "="}
    for r, (row, rel, rhs) in enumerate(lp.rows):
        f = _scale(list(row.values()) + [rhs])
        out.append(f" c{r}: {_terms(row, lp.keys, f)} {rel_text[rel]} {rhs * f}")
    out.append("Bounds")
    for idx, key in enumerate(lp.keys):
        u = lp.upper[idx]
        if u is None:
            out.append(f" {_var_name(key)} >= 0")
        elif u.denominator == 1:
            out.append(f" 0 <= {_var_name(key)} <= {u}")
        else:
            # bounds cannot be scaled; write the bound as a row instead
            out.append(f" {_var_name(key)} >= 0")
            out.insert(out.index("Bounds"), f" ub_{_var_name(key)}: {u.denominator} {_var_name(key)} <= {u.numerator}")
    out.append("End")
    return "\n".join(out) + "\n"
