"""Registry, MPS writer, and solver wrapper."""

import numpy as np
import pytest

from gridcap.errors import ValidationError
from gridcap.lp_backend import (
    SENSE_EQ, SENSE_GE, SENSE_LE, LinearProgram, Solution, export_mps, solve,
)

from .helpers import parse_mps, solve_parsed


def hand_lp():
    """min 2x + 3y s.t. x + y >= 10, x <= 6."""
    lp = LinearProgram("hand")
    x = lp.add_variable("x", lb=0, ub=6, obj=2.0)
    y = lp.add_variable("y", lb=0, obj=3.0)
    lp.add_constraint("cover", [(x, 1.0), (y, 1.0)], SENSE_GE, 10.0)
    return lp, x, y


class TestSolve:
    def test_hand_lp_optimum(self):
        lp, x, y = hand_lp()
        sol = solve(lp.assemble())
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(24.0, rel=1e-9)
        assert sol.value(x) == pytest.approx(6.0, abs=1e-9)
        assert sol.value(y) == pytest.approx(4.0, abs=1e-9)

    def test_dual_of_binding_cover_constraint(self):
        lp, _, _ = hand_lp()
        sol = solve(lp.assemble())
        # one more MW of required coverage costs the marginal unit: y at 3 $/u
        assert sol.duals is not None
        assert sol.duals[0] == pytest.approx(3.0, abs=1e-9)

    def test_infeasible(self):
        lp = LinearProgram()
        x = lp.add_variable("x", lb=0, ub=3)
        lp.add_constraint("need5", [(x, 1.0)], SENSE_GE, 5.0)
        assert solve(lp.assemble()).status == "infeasible"

    def test_unbounded(self):
        lp = LinearProgram()
        x = lp.add_variable("x", lb=0, obj=-1.0)
        lp.add_constraint("floor", [(x, 1.0)], SENSE_GE, 1.0)
        assert solve(lp.assemble()).status == "unbounded"

    def test_empty_model(self):
        lp = LinearProgram()
        sol = solve(lp.assemble())
        assert sol.status == "optimal"
        assert sol.objective == 0.0

    def test_objective_offset_included(self):
        lp, _, _ = hand_lp()
        lp.add_offset(100.0)
        sol = solve(lp.assemble())
        assert sol.objective == pytest.approx(124.0, rel=1e-9)

    def test_equality_constraint(self):
        lp = LinearProgram()
        x = lp.add_variable("x", obj=1.0)
        y = lp.add_variable("y", obj=2.0)
        lp.add_constraint("pin", [(x, 1.0), (y, 1.0)], SENSE_EQ, 4.0)
        sol = solve(lp.assemble())
        assert sol.objective == pytest.approx(4.0)
        assert sol.value(x) == pytest.approx(4.0)


class TestRegistry:
    def test_duplicate_constraint_name_names_first(self):
        lp = LinearProgram()
        x = lp.add_variable("x")
        lp.add_constraint("c", [(x, 1.0)], SENSE_LE, 1.0)
        with pytest.raises(ValidationError, match="constraint #0"):
            lp.add_constraint("c", [(x, 1.0)], SENSE_LE, 2.0)

    def test_duplicate_variable_name(self):
        lp = LinearProgram()
        lp.add_variable("x")
        with pytest.raises(ValidationError, match="duplicate variable"):
            lp.add_variable("x")

    def test_unknown_handle_rejected(self):
        lp = LinearProgram()
        with pytest.raises(ValidationError, match="unknown variable"):
            lp.add_constraint("c", [(7, 1.0)], SENSE_LE, 1.0)

    def test_repeated_terms_merge(self):
        lp = LinearProgram()
        x = lp.add_variable("x", obj=-1.0)
        lp.add_constraint("c", [(x, 1.0), (x, 1.0)], SENSE_LE, 4.0)
        sol = solve(lp.assemble())
        assert sol.value(x) == pytest.approx(2.0)  # 2x <= 4
        model = lp.assemble()
        assert model.matrix.getnnz() == 1

    def test_counts(self):
        lp, _, _ = hand_lp()
        assert lp.n_variables == 2
        assert lp.n_constraints == 1


GOLDEN = """NAME tiny
ROWS
 N OBJ
 G cover
 L lim
COLUMNS
    x OBJ 2
    x cover 1
    x lim 1.5
    y OBJ 3
    y cover 1
RHS
    RHS OBJ -7
    RHS cover 10
    RHS lim 9
BOUNDS
 UP BND x 6
 FR BND y
ENDATA
"""


class TestMPS:
    def tiny(self):
        lp = LinearProgram("tiny")
        x = lp.add_variable("x", lb=0, ub=6, obj=2.0)
        y = lp.add_variable("y", lb=None, obj=3.0)
        lp.add_constraint("cover", [(x, 1.0), (y, 1.0)], SENSE_GE, 10.0)
        lp.add_constraint("lim", [(x, 1.5)], SENSE_LE, 9.0)
        lp.add_offset(7.0)
        return lp

    def test_golden_text(self):
        assert export_mps(self.tiny().assemble()) == GOLDEN

    def test_byte_identical_across_builds(self):
        a = export_mps(self.tiny().assemble())
        b = export_mps(self.tiny().assemble())
        assert a == b

    def test_roundtrip_through_independent_reader(self):
        lp, _, _ = hand_lp()
        lp.add_offset(11.0)
        model = lp.assemble()
        internal = solve(model)
        obj, x = solve_parsed(parse_mps(export_mps(model)))
        assert obj == pytest.approx(internal.objective, rel=1e-9)
        assert x["x"] == pytest.approx(6.0, abs=1e-9)

    def test_fixed_and_negative_bounds(self):
        lp = LinearProgram("b")
        lp.add_variable("fx", lb=2.5, ub=2.5, obj=1.0)
        lp.add_variable("neg", lb=-4.0, ub=-1.0, obj=1.0)
        text = export_mps(lp.assemble())
        assert " FX BND fx 2.5" in text
        assert " LO BND neg -4" in text
        assert " UP BND neg -1" in text
        obj, x = solve_parsed(parse_mps(text))
        assert obj == pytest.approx(2.5 - 4.0)


class TestVerification:
    def test_violated_solution_is_flagged(self):
        from gridcap.lp_backend import _verify_solution
        model = hand_lp()[0].assemble()
        bad = np.array([6.0, 1.0])  # cover: 7 < 10
        msg = _verify_solution(model, bad, 1e-6)
        assert msg is not None and "cover" in msg

    def test_clean_solution_passes(self):
        from gridcap.lp_backend import _verify_solution
        model = hand_lp()[0].assemble()
        assert _verify_solution(model, np.array([6.0, 4.0]), 1e-6) is None
