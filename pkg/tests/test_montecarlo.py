import numpy as np
import pytest
from numpy.testing import assert_allclose

from rfim_morita import enumeration, exact, montecarlo
from rfim_morita.core import ModelParams, MoritaParams
from rfim_morita.errors import ConfigError

MP = MoritaParams.of(0.8, 0.5, 0.1, -0.2)


def cfg(**kw):
    base = dict(n_total=4, sweeps=20000, burn_in=500, seed=5, target=montecarlo.MORITA, params=MP)
    base.update(kw)
    return montecarlo.McConfig(**base)


def test_same_seed_same_estimate():
    assert montecarlo.sample(cfg()) == montecarlo.sample(cfg())


def test_different_chains_differ():
    a = montecarlo.sample(cfg(chain=0))
    b = montecarlo.sample(cfg(chain=1))
    assert a.mean_spin_average != b.mean_spin_average


def test_morita_estimate_agrees_with_exact_law():
    n = 4
    est = montecarlo.sample(cfg(n_total=n, sweeps=200000))
    law = exact.morita_law(n, MP)
    z = (est.mean_spin_average - law.mean) / est.std_error
    assert abs(z) < 4
    z_field = (est.mean_field_average - law.field_expectation) / est.field_std_error
    assert abs(z_field) < 4


def test_quenched_estimate_agrees_with_enumeration():
    p = ModelParams(1.3, 0.4, 0.0)
    c = montecarlo.McConfig.quenched(4, 200000, 500, 9, p, n_plus=3)
    est = montecarlo.sample(c)
    eta = np.array([1, 1, 1, -1])
    sig = enumeration.spin_configs(4)
    logw = enumeration.hamiltonian(sig, eta[None, :], p)[0]
    w = np.exp(logw - logw.max())
    exact_mean = float(w @ sig.mean(axis=1) / w.sum())
    assert est.mean_field_average is None
    assert abs(est.mean_spin_average - exact_mean) < 4 * est.std_error


def test_batch_std_error_of_constant_series():
    assert montecarlo.batch_std_error(np.ones(1000)) == 0.0


def test_sample_chains_pools():
    per_chain, pooled = montecarlo.sample_chains(cfg(sweeps=2000), 3)
    assert len(per_chain) == 3
    assert_allclose(pooled.mean_spin_average, np.mean([e.mean_spin_average for e in per_chain]))


def test_echo_round_trips_fields():
    e = cfg().echo()
    assert e["seed"] == 5 and e["target"] == "morita"
    assert e["params"]["lambda"] == -0.2


@pytest.mark.parametrize(
    "kw",
    [dict(n_total=0), dict(sweeps=10), dict(burn_in=-1), dict(target="other"), dict(params=ModelParams(1.0, 0.1))],
)
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        cfg(**kw)


def test_quenched_needs_fields():
    with pytest.raises(ConfigError):
        montecarlo.McConfig.quenched(4, 100, 10, 0, ModelParams(1.0, 0.1))
