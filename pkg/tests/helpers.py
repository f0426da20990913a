"""Shared test utilities, including an independent MPS reader.

The reader exists so that exported MPS text is checked through a parsing path
that shares no code with the writer: it rebuilds the matrix from the text and
solves with scipy directly.
"""

import numpy as np
from scipy.optimize import linprog


class ParsedMPS:
    def __init__(self):
        self.name = ""
        self.row_sense: dict[str, str] = {}
        self.row_order: list[str] = []
        self.obj_row = None
        self.cols: dict[str, dict[str, float]] = {}
        self.col_order: list[str] = []
        self.rhs: dict[str, float] = {}
        self.bounds: dict[str, list] = {}


def parse_mps(text: str) -> ParsedMPS:
    out = ParsedMPS()
    section = None
    for raw in text.splitlines():
        if not raw.strip():
            continue
        head = raw.split()
        if raw[0] not in " \t":
            key = head[0].upper()
            if key == "NAME":
                out.name = head[1] if len(head) > 1 else ""
                continue
            if key in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES", "ENDATA"):
                section = key
                continue
        if section == "ROWS":
            code, name = head[0].upper(), head[1]
            if code == "N":
                out.obj_row = name
            else:
                out.row_sense[name] = code
                out.row_order.append(name)
        elif section == "COLUMNS":
            var, row, val = head[0], head[1], float(head[2])
            if var not in out.cols:
                out.cols[var] = {}
                out.col_order.append(var)
            out.cols[var][row] = out.cols[var].get(row, 0.0) + val
            if len(head) >= 5:
                row2, val2 = head[3], float(head[4])
                out.cols[var][row2] = out.cols[var].get(row2, 0.0) + val2
        elif section == "RHS":
            out.rhs[head[1]] = float(head[2])
            if len(head) >= 4:
                out.rhs[head[3]] = float(head[4])
        elif section == "BOUNDS":
            code, var = head[0].upper(), head[2]
            val = float(head[3]) if len(head) > 3 else None
            out.bounds.setdefault(var, []).append((code, val))
    return out


def solve_parsed(parsed: ParsedMPS):
    """Minimize the parsed LP with scipy; returns (objective, x dict)."""
    nv = len(parsed.col_order)
    vidx = {v: j for j, v in enumerate(parsed.col_order)}
    c = np.zeros(nv)
    offset = -parsed.rhs.get(parsed.obj_row, 0.0)
    rows_ub, rhs_ub, rows_eq, rhs_eq = [], [], [], []
    for name in parsed.row_order:
        coeffs = np.zeros(nv)
        for var, entries in parsed.cols.items():
            if name in entries:
                coeffs[vidx[var]] = entries[name]
        b = parsed.rhs.get(name, 0.0)
        sense = parsed.row_sense[name]
        if sense == "L":
            rows_ub.append(coeffs); rhs_ub.append(b)
        elif sense == "G":
            rows_ub.append(-coeffs); rhs_ub.append(-b)
        else:
            rows_eq.append(coeffs); rhs_eq.append(b)
    for var, entries in parsed.cols.items():
        if parsed.obj_row in entries:
            c[vidx[var]] = entries[parsed.obj_row]
    bounds = []
    for var in parsed.col_order:
        lo, hi = 0.0, None
        for code, val in parsed.bounds.get(var, []):
            if code == "UP":
                hi = val
            elif code == "LO":
                lo = val
            elif code == "FX":
                lo = hi = val
            elif code == "FR":
                lo, hi = None, None
            elif code == "MI":
                lo = None
        bounds.append((lo, hi))
    res = linprog(c,
                  A_ub=np.array(rows_ub) if rows_ub else None,
                  b_ub=np.array(rhs_ub) if rhs_ub else None,
                  A_eq=np.array(rows_eq) if rows_eq else None,
                  b_eq=np.array(rhs_eq) if rhs_eq else None,
                  bounds=bounds, method="highs")
    assert res.status == 0, f"external solve failed: {res.message}"
    x = {v: res.x[vidx[v]] for v in parsed.col_order}
    return res.fun + offset, x
