import numpy as np
import pytest
from numpy.testing import assert_allclose

from rfim_morita import enumeration
from rfim_morita.core import ModelParams, MoritaParams
from rfim_morita.errors import ResourceError


def test_spin_configs_order():
    c = enumeration.spin_configs(2)
    assert c.tolist() == [[-1, -1], [-1, 1], [1, -1], [1, 1]]


def test_tables_are_normalized():
    p = ModelParams(1.2, 0.5, 0.1)
    assert_allclose(np.exp(enumeration.true_joint_log_table(4, p)).sum(), 1.0, rtol=1e-13)
    assert_allclose(np.exp(enumeration.morita_log_table(4, MoritaParams(p, 0.4))).sum(), 1.0, rtol=1e-13)


def test_true_joint_field_marginal_is_uniform():
    p = ModelParams(1.2, 0.5, 0.1)
    marg = np.exp(enumeration.true_joint_log_table(4, p)).sum(axis=1)
    assert_allclose(marg, np.full(16, 1 / 16), rtol=1e-13)


def test_single_site_quenched_z():
    p = ModelParams(1.0, 0.3, 0.2)
    # one site: exp(beta/2) * 2 cosh(beta (eps eta + h0))
    expected = 0.5 + np.log(2 * np.cosh(0.3 + 0.2))
    assert_allclose(enumeration.quenched_log_z(np.array([1]), p), expected, rtol=1e-14)


def test_enumeration_cap():
    with pytest.raises(ResourceError):
        enumeration.true_joint_log_table(enumeration.ENUMERATION_CAP + 1, ModelParams(1.0, 0.1))
