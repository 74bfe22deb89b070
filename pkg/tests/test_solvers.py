import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from rfim_morita.core import ModelParams, MoritaParams, hbar, mcw
from rfim_morita.errors import AmbiguousPhaseError, NoSolutionError, OutOfRangeError
from rfim_morita.solvers import (
    GLOBAL_MIN,
    LOCAL_MAX,
    LOCAL_MIN,
    classify_landscape,
    compute_gap,
    eos_residual,
    limiting_field_expectation,
    neutral_curve_infimum,
    neutral_l_min,
    neutral_point_for_l,
    solve_naive_system,
    solve_quenched,
    trace_neutral_curve,
)

REF = ModelParams(2.0, 0.3, 0.0)
M_STAR = 0.9129341576395639
LAM_STAR = -0.562575369870244


def test_quenched_roots_reference():
    roots = solve_quenched(REF)
    assert len(roots) == 3
    assert_allclose(roots, [-M_STAR, 0.0, M_STAR], atol=1e-13)
    assert roots[1] == 0.0


def test_single_root_in_high_temperature_phase():
    assert solve_quenched(ModelParams(0.8, 0.3, 0.0)) == [0.0]


@given(st.floats(0.2, 4.0), st.floats(0.0, 1.0), st.floats(-0.5, 0.5))
@settings(max_examples=60, deadline=None)
def test_roots_have_small_residual(beta, eps, h0):
    p = ModelParams(beta, eps, h0)
    for m in solve_quenched(p):
        assert abs(eos_residual(m, p)) < 1e-12


def test_naive_solution_reference():
    s = solve_naive_system(REF, "+")
    assert_allclose(s.m, M_STAR, rtol=1e-13)
    assert_allclose(s.lam, LAM_STAR, rtol=1e-12)
    assert s.metastable
    assert s.kind == LOCAL_MIN
    assert s.morita_params.hhat < 0
    assert abs(s.eos_residual) < 1e-14 and abs(s.neutrality_residual) < 1e-14


def test_naive_branches_are_mirror_images():
    p = ModelParams(2.0, 0.3, 0.0)
    plus, minus = solve_naive_system(p, "+"), solve_naive_system(p, "-")
    assert_allclose([minus.m, minus.lam], [-plus.m, -plus.lam], rtol=1e-13)


def test_naive_branch_missing_raises():
    with pytest.raises(NoSolutionError):
        solve_naive_system(ModelParams(0.8, 0.3, 0.0), "+")


def test_landscape_at_zero_lambda_is_curie_weiss():
    land = classify_landscape(MoritaParams.of(2.0, 0.3, 0.0, 0.0))
    ms = [c.m for c in land.points]
    m0 = mcw(2.0, 0.0, "+")
    assert_allclose(ms, [-m0, 0.0, m0], atol=1e-12)
    assert [c.kind for c in land.points] == [GLOBAL_MIN, LOCAL_MAX, GLOBAL_MIN]


def test_landscape_at_naive_lambda_puts_minimum_on_wrong_side():
    land = classify_landscape(MoritaParams(REF, LAM_STAR))
    assert land.global_minimizers[0] < 0
    near = land.nearest(M_STAR)
    assert near.kind == LOCAL_MIN
    assert_allclose(near.m, M_STAR, rtol=1e-10)


def test_gap_reference():
    assert_allclose(compute_gap(REF), 0.144647194517708, rtol=1e-12)
    assert_allclose(neutral_l_min(2.0, 0.3), 0.5820208849761914, rtol=1e-13)
    assert abs(neutral_curve_infimum(REF) - compute_gap(REF)) < 1e-9


def test_gap_vanishes_when_disordered():
    assert compute_gap(ModelParams(0.9, 0.3)) == 0.0


def test_gap_is_field_shift_at_l_min():
    l = neutral_l_min(2.0, 0.3)
    assert_allclose(compute_gap(REF), hbar(2.0, 0.3, l), rtol=1e-14)


def test_neutral_curve_points_are_neutral():
    curve = trace_neutral_curve(REF, points=500)
    assert len(curve.points) == 500
    assert max(abs(q.residual) for q in curve.points) < 1e-10
    h0 = [q.h0 for q in curve.points]
    assert all(b > a for a, b in zip(h0, h0[1:]))
    assert min(h0) > curve.a


def test_neutral_point_outside_interval():
    with pytest.raises(OutOfRangeError):
        neutral_point_for_l(REF, 0.1)
    with pytest.raises(OutOfRangeError):
        neutral_point_for_l(REF, 0.7)


def test_limiting_field_expectation_ambiguous_at_symmetric_point():
    with pytest.raises(AmbiguousPhaseError):
        limiting_field_expectation(MoritaParams.of(2.0, 0.3, 0.0, 0.0))


def test_limiting_field_expectation_has_sign_of_shift():
    assert limiting_field_expectation(MoritaParams.of(2.0, 0.3, 0.0, -0.5)) < 0
    assert limiting_field_expectation(MoritaParams.of(2.0, 0.3, 0.0, 0.5)) > 0
