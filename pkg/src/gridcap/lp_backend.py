"""Linear program registry, deterministic MPS export, and solving.

The registry keeps variables and constraints in insertion order; the model a
builder produces is therefore reproducible run to run, and the MPS writer
emits byte-identical text for identical models. Solving goes through scipy's
HiGHS interface; an optimal solution is re-checked against every row before it
is returned, so a silently violated constraint can never escape as "optimal".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import SolverError, ValidationError

SENSE_LE = "<="
SENSE_GE = ">="
SENSE_EQ = "=="
_SENSES = (SENSE_LE, SENSE_GE, SENSE_EQ)

_MPS_ROW_CODE = {SENSE_LE: "L", SENSE_GE: "G", SENSE_EQ: "E"}

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_ERROR = "error"


class LinearProgram:
    """Mutable builder: named variables, named constraints, linear objective."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.var_names: list[str] = []
        self._var_index: dict[str, int] = {}
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._obj: dict[int, float] = {}
        self.objective_offset = 0.0
        self.con_names: list[str] = []
        self._con_index: dict[str, int] = {}
        self._senses: list[str] = []
        self._rhs: list[float] = []
        # coefficient triplets, constraint-major
        self._rows: list[int] = []
        self._cols: list[int] = []
        self._vals: list[float] = []

    @property
    def n_variables(self) -> int:
        return len(self.var_names)

    @property
    def n_constraints(self) -> int:
        return len(self.con_names)

    def add_variable(self, name: str, lb: float = 0.0, ub: Optional[float] = None,
                     obj: float = 0.0) -> int:
        if name in self._var_index:
            raise ValidationError(f"duplicate variable name {name!r}")
        idx = len(self.var_names)
        self.var_names.append(name)
        self._var_index[name] = idx
        self._lb.append(-np.inf if lb is None else float(lb))
        self._ub.append(np.inf if ub is None else float(ub))
        if obj:
            self._obj[idx] = float(obj)
        return idx

    def add_objective(self, var: int, coeff: float) -> None:
        self._check_var(var, "objective")
        if coeff:
            self._obj[var] = self._obj.get(var, 0.0) + float(coeff)

    def add_offset(self, value: float) -> None:
        self.objective_offset += float(value)

    def set_bounds(self, var: int, lb: Optional[float] = None,
                   ub: Optional[float] = None) -> None:
        self._check_var(var, "bounds")
        if lb is not None:
            self._lb[var] = float(lb)
        if ub is not None:
            self._ub[var] = float(ub)

    def tighten_upper(self, var: int, ub: float) -> None:
        self._check_var(var, "bounds")
        self._ub[var] = min(self._ub[var], float(ub))

    def tighten_lower(self, var: int, lb: float) -> None:
        self._check_var(var, "bounds")
        self._lb[var] = max(self._lb[var], float(lb))

    def _check_var(self, var: int, what: str) -> None:
        if not (0 <= var < len(self.var_names)):
            raise ValidationError(f"{what}: unknown variable handle {var}")

    def add_constraint(self, name: str, terms: Iterable[tuple[int, float]],
                       sense: str, rhs: float) -> int:
        """Register `sum(coeff * var) sense rhs` after merging duplicate vars."""
        if sense not in _SENSES:
            raise ValidationError(f"constraint {name!r}: unknown sense {sense!r}")
        if name in self._con_index:
            raise ValidationError(
                f"duplicate constraint name {name!r} "
                f"(first registered as constraint #{self._con_index[name]})")
        merged: dict[int, float] = {}
        order: list[int] = []
        for var, coeff in terms:
            self._check_var(var, f"constraint {name!r}")
            if var not in merged:
                merged[var] = 0.0
                order.append(var)
            merged[var] += float(coeff)
        row = len(self.con_names)
        self.con_names.append(name)
        self._con_index[name] = row
        self._senses.append(sense)
        self._rhs.append(float(rhs))
        for var in order:
            if merged[var] != 0.0:
                self._rows.append(row)
                self._cols.append(var)
                self._vals.append(merged[var])
        return row

    def variable_index(self, name: str) -> int:
        return self._var_index[name]

    def assemble(self) -> "LPModel":
        n_var, n_con = self.n_variables, self.n_constraints
        matrix = sparse.csr_matrix(
            (np.asarray(self._vals, dtype=float),
             (np.asarray(self._rows, dtype=np.int64),
              np.asarray(self._cols, dtype=np.int64))),
            shape=(n_con, n_var))
        obj = np.zeros(n_var)
        for idx, coeff in self._obj.items():
            obj[idx] = coeff
        return LPModel(
            name=self.name,
            var_names=tuple(self.var_names),
            lb=np.asarray(self._lb, dtype=float),
            ub=np.asarray(self._ub, dtype=float),
            objective=obj,
            objective_offset=self.objective_offset,
            con_names=tuple(self.con_names),
            senses=tuple(self._senses),
            rhs=np.asarray(self._rhs, dtype=float),
            matrix=matrix,
        )


@dataclass(frozen=True)
class LPModel:
    """Immutable assembled LP: min c'x + offset s.t. Ax (<=,>=,==) b, lb<=x<=ub."""

    name: str
    var_names: tuple[str, ...]
    lb: np.ndarray
    ub: np.ndarray
    objective: np.ndarray
    objective_offset: float
    con_names: tuple[str, ...]
    senses: tuple[str, ...]
    rhs: np.ndarray
    matrix: sparse.csr_matrix

    @property
    def n_variables(self) -> int:
        return len(self.var_names)

    @property
    def n_constraints(self) -> int:
        return len(self.con_names)


@dataclass
class Solution:
    status: str
    objective: Optional[float] = None
    values: Optional[np.ndarray] = None
    duals: Optional[np.ndarray] = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OPTIMAL

    def value(self, var: int) -> float:
        if self.values is None:
            raise SolverError(f"no primal values available (status {self.status})")
        return float(self.values[var])


def _fmt(x: float) -> str:
    """Shortest repr that reads back exactly; deterministic for a given model."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def export_mps(model: LPModel) -> str:
    """Serialize to free-format MPS. Byte-identical for identical models."""
    lines: list[str] = [f"NAME {model.name}", "ROWS", " N OBJ"]
    for name, sense in zip(model.con_names, model.senses):
        lines.append(f" {_MPS_ROW_CODE[sense]} {name}")
    lines.append("COLUMNS")
    csc = model.matrix.tocsc()
    for j, vname in enumerate(model.var_names):
        lines.append(f"    {vname} OBJ {_fmt(model.objective[j])}")
        start, end = csc.indptr[j], csc.indptr[j + 1]
        rows = csc.indices[start:end]
        vals = csc.data[start:end]
        for r, v in sorted(zip(rows.tolist(), vals.tolist())):
            lines.append(f"    {vname} {model.con_names[r]} {_fmt(v)}")
    lines.append("RHS")
    if model.objective_offset != 0.0:
        # constant term rides on the objective row, negated per MPS convention
        lines.append(f"    RHS OBJ {_fmt(-model.objective_offset)}")
    for name, rhs in zip(model.con_names, model.rhs):
        if rhs != 0.0:
            lines.append(f"    RHS {name} {_fmt(rhs)}")
    lines.append("BOUNDS")
    for j, vname in enumerate(model.var_names):
        lo, hi = model.lb[j], model.ub[j]
        if lo == hi:
            lines.append(f" FX BND {vname} {_fmt(lo)}")
            continue
        if np.isneginf(lo) and np.isposinf(hi):
            lines.append(f" FR BND {vname}")
            continue
        if np.isneginf(lo):
            lines.append(f" MI BND {vname}")
        elif lo != 0.0:
            lines.append(f" LO BND {vname} {_fmt(lo)}")
        if not np.isposinf(hi):
            lines.append(f" UP BND {vname} {_fmt(hi)}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def _verify_solution(model: LPModel, x: np.ndarray, tolerance: float) -> Optional[str]:
    """Residual check; returns a message describing the worst violation, or None."""
    slack = tolerance
    lo_bad = np.where(x < model.lb - slack * np.maximum(1.0, np.abs(model.lb)))[0]
    hi_bad = np.where(x > model.ub + slack * np.maximum(1.0, np.abs(model.ub)))[0]
    if len(lo_bad) or len(hi_bad):
        j = int(lo_bad[0]) if len(lo_bad) else int(hi_bad[0])
        return f"bound violated on variable {model.var_names[j]!r} (x={x[j]!r})"
    if model.n_constraints == 0:
        return None
    ax = model.matrix.dot(x)
    scale = np.maximum(1.0, np.abs(model.rhs))
    for i, sense in enumerate(model.senses):
        resid = ax[i] - model.rhs[i]
        if sense == SENSE_LE and resid > slack * scale[i]:
            return f"constraint {model.con_names[i]!r} violated by {resid!r}"
        if sense == SENSE_GE and resid < -slack * scale[i]:
            return f"constraint {model.con_names[i]!r} violated by {-resid!r}"
        if sense == SENSE_EQ and abs(resid) > slack * scale[i]:
            return f"constraint {model.con_names[i]!r} violated by {abs(resid)!r}"
    return None


def solve(model: LPModel, tolerance: float = 1e-6) -> Solution:
    """Minimize with HiGHS (via scipy). Statuses: optimal/infeasible/unbounded/error."""
    if model.n_variables == 0:
        return Solution(status=STATUS_OPTIMAL, objective=model.objective_offset,
                        values=np.zeros(0), duals=np.zeros(model.n_constraints))

    senses = np.asarray(model.senses)
    le_mask = senses == SENSE_LE
    ge_mask = senses == SENSE_GE
    eq_mask = senses == SENSE_EQ
    ub_rows = np.where(le_mask | ge_mask)[0]
    eq_rows = np.where(eq_mask)[0]

    A_ub = b_ub = A_eq = b_eq = None
    sign = np.ones(len(ub_rows))
    if len(ub_rows):
        sign[ge_mask[ub_rows]] = -1.0
        A_ub = sparse.diags(sign).dot(model.matrix[ub_rows])
        b_ub = sign * model.rhs[ub_rows]
    if len(eq_rows):
        A_eq = model.matrix[eq_rows]
        b_eq = model.rhs[eq_rows]

    bounds = [(None if np.isneginf(lo) else lo, None if np.isposinf(hi) else hi)
              for lo, hi in zip(model.lb, model.ub)]
    feas_tol = min(1e-9, tolerance)
    try:
        res = linprog(model.objective, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                      bounds=bounds, method="highs",
                      options={"primal_feasibility_tolerance": feas_tol,
                               "dual_feasibility_tolerance": feas_tol})
    except Exception as exc:  # malformed model, solver crash
        return Solution(status=STATUS_ERROR, message=f"solver raised: {exc}")

    if res.status == 2:
        return Solution(status=STATUS_INFEASIBLE, message=res.message)
    if res.status == 3:
        return Solution(status=STATUS_UNBOUNDED, message=res.message)
    if res.status != 0 or res.x is None:
        return Solution(status=STATUS_ERROR, message=f"status {res.status}: {res.message}")

    x = np.asarray(res.x, dtype=float)
    bad = _verify_solution(model, x, max(tolerance, 1e-6))
    if bad is not None:
        return Solution(status=STATUS_ERROR, message=f"solution failed verification: {bad}")

    duals = np.zeros(model.n_constraints)
    try:
        if len(ub_rows) and res.ineqlin is not None:
            duals[ub_rows] = sign * np.asarray(res.ineqlin.marginals)
        if len(eq_rows) and res.eqlin is not None:
            duals[eq_rows] = np.asarray(res.eqlin.marginals)
    except AttributeError:
        duals = None

    return Solution(status=STATUS_OPTIMAL,
                    objective=float(res.fun) + model.objective_offset,
                    values=x, duals=duals, message=res.message)
