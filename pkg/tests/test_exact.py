import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from rfim_morita import enumeration, exact
from rfim_morita.core import ModelParams, MoritaParams
from rfim_morita.errors import DomainError, ResourceError
from rfim_morita.solvers import solve_naive_system

REF = ModelParams(2.0, 0.3, 0.0)
params_st = st.builds(ModelParams, st.floats(0.2, 3.0), st.floats(0.0, 1.0), st.floats(-0.5, 0.5))


def test_log_convolve_matches_direct_convolution():
    rng = np.random.default_rng(0)
    a, b = rng.uniform(0.1, 1, 5), rng.uniform(0.1, 1, 7)
    assert_allclose(np.exp(exact.log_convolve(np.log(a), np.log(b))), np.convolve(a, b), rtol=1e-13)


def test_log_convolve_handles_zero_weights():
    out = exact.log_convolve(np.array([0.0, -np.inf]), np.array([-np.inf, 0.0]))
    assert_allclose(np.exp(out), [0.0, 1.0, 0.0])


@given(params_st, st.integers(1, 8), st.data())
@settings(max_examples=40, deadline=None)
def test_quenched_log_z_matches_enumeration(p, n, data):
    n_plus = data.draw(st.integers(0, n))
    eta = np.array([1] * n_plus + [-1] * (n - n_plus))
    assert_allclose(exact.quenched_log_z(n, n_plus, p).log_z, enumeration.quenched_log_z(eta, p), rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_lambda_n_matches_enumeration(n):
    p = ModelParams(1.7, 0.45, 0.08)
    for k in range(n):
        assert_allclose(exact.lambda_n(n, k, p), enumeration.lambda_n(n, k, p), atol=1e-13)


@pytest.mark.parametrize("conditioning", [exact.NO_CONDITIONING, exact.POSITIVE_FIELD_SUM])
def test_joint_law_matches_enumeration(conditioning):
    p = ModelParams(1.4, 0.6, -0.1)
    n = 7
    law = exact.true_joint_law(n, p, conditioning)
    assert_allclose(law.probabilities, enumeration.true_joint_law(n, p, conditioning), atol=1e-14)
    assert_allclose(law.probabilities.sum(), 1.0, rtol=1e-13)


def test_spin_average_law_matches_enumeration():
    p = ModelParams(2.3, 0.2, 0.05)
    assert_allclose(exact.true_spin_average_law(8, p), enumeration.true_spin_average_law(8, p), atol=1e-14)


def test_morita_law_matches_enumeration():
    mp = MoritaParams.of(1.5, 0.4, 0.1, -0.3)
    law = exact.morita_law(7, mp)
    probs, eta1 = enumeration.morita_moments(7, mp)
    assert_allclose(law.probabilities, probs, atol=1e-14)
    assert_allclose(law.field_expectation, eta1, atol=1e-14)


@given(params_st, st.integers(2, 9))
@settings(max_examples=25, deadline=None)
def test_consistency_identities_hold(p, n):
    r = exact.verify_consistency_identities(n, p)
    assert abs(r.magnetization_residual) < 1e-12
    assert abs(r.neutrality_residual) < 1e-12


def test_consistency_methods_agree():
    p = ModelParams(1.8, 0.5, 0.02)
    a = exact.verify_consistency_identities(8, p, method="enumeration")
    b = exact.verify_consistency_identities(8, p, method="combinatorial")
    assert_allclose([a.sigma_lhs, a.sigma_rhs, a.eta_rhs], [b.sigma_lhs, b.sigma_rhs, b.eta_rhs], atol=1e-13)


def test_conditional_kernel_check_small():
    rep = exact.conditional_kernel_check(6, ModelParams(1.5, 0.4, 0.1))
    assert rep.max_error < 1e-13
    assert rep.n_checked > 0


def test_hs_representation_small():
    rep = exact.verify_hs_representation(5, MoritaParams.of(1.3, 0.4, 0.05, 0.2), n_samples=10, seed=3)
    assert rep.max_error < 1e-9


def test_partition_cap_from_environment(monkeypatch):
    monkeypatch.setenv("RFIM_MAX_N_PARTITION", "10")
    with pytest.raises(ResourceError):
        exact.quenched_log_z(11, 3, REF)
    assert math.isfinite(exact.quenched_log_z(10, 3, REF).log_z)


def test_joint_cap_from_environment(monkeypatch):
    monkeypatch.setenv("RFIM_MAX_N_JOINT", "5")
    with pytest.raises(ResourceError):
        exact.true_joint_law(6, REF)


def test_bad_sizes_rejected():
    with pytest.raises(DomainError):
        exact.quenched_log_z(0, 0, REF)
    with pytest.raises(DomainError):
        exact.quenched_log_z(4, 5, REF)


def test_bias_to_count_is_mirror_symmetric():
    n = 101
    for bias in np.linspace(-0.3, 0.3, 13):
        k = exact.bias_to_count(n, bias)
        assert exact.bias_to_count(n, -bias) == (n - 1) - k


def test_lambda_jump_approaches_twice_naive_lambda():
    lam_star = solve_naive_system(REF, "+").lam
    j = exact.lambda_jump(1000, REF)
    assert j.lambda_plus < 0 < j.lambda_minus
    assert_allclose(j.jump, 2 * lam_star, rtol=5e-3)


def test_lambda_jump_small_when_disordered():
    assert abs(exact.lambda_jump(1000, ModelParams(0.8, 0.3)).jump) < 0.05


def test_total_variation():
    assert exact.total_variation(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0
    assert exact.total_variation(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 0.0
