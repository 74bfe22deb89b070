"""Brute-force enumeration of the finite-N measures.

Used as the independent oracle for the combinatorial engine in
:mod:`rfim_morita.exact`. Configurations are encoded as integers whose most
significant of ``N`` bits is site 1 (bit set means +1).
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from .core import ModelParams, MoritaParams
from .errors import ResourceError

ENUMERATION_CAP = 12


def _check(n: int, cap: int = ENUMERATION_CAP) -> None:
    if n < 1:
        raise ValueError("N must be positive")
    if n > cap:
        raise ResourceError(f"full enumeration limited to N <= {cap}, got N={n}")


def spin_configs(n: int) -> np.ndarray:
    """All ``2**n`` configurations as a ``(2**n, n)`` array of +-1."""
    codes = np.arange(2**n)[:, None]
    bits = (codes >> np.arange(n - 1, -1, -1)[None, :]) & 1
    return 2 * bits - 1


def hamiltonian(sigma: np.ndarray, eta: np.ndarray, params: ModelParams) -> np.ndarray:
    """Log-weight ``beta M^2/(2N) + beta sum_i (eps eta_i + h0) sigma_i`` for every pair.

    ``sigma`` has shape ``(S, N)``, ``eta`` shape ``(E, N)``; the result has
    shape ``(E, S)``.
    """
    n = sigma.shape[1]
    b = params.beta
    mag = sigma.sum(axis=1).astype(float)
    own = b * mag * mag / (2.0 * n) + b * params.h0 * mag
    return own[None, :] + b * params.eps * (eta @ sigma.T).astype(float)


def quenched_log_z(eta, params: ModelParams) -> float:
    eta = np.asarray(eta).reshape(1, -1)
    n = eta.shape[1]
    _check(n, 16)
    return float(logsumexp(hamiltonian(spin_configs(n), eta, params)))


def true_joint_log_table(n: int, params: ModelParams) -> np.ndarray:
    """``log K(sigma, eta)`` as an ``(eta code, sigma code)`` matrix."""
    _check(n)
    cfg = spin_configs(n)
    h = hamiltonian(cfg, cfg, params)
    return h - logsumexp(h, axis=1, keepdims=True) - n * math.log(2.0)


def morita_log_table(n: int, params: MoritaParams) -> np.ndarray:
    """``log Khat(sigma, eta)`` as an ``(eta code, sigma code)`` matrix."""
    _check(n)
    cfg = spin_configs(n)
    h = hamiltonian(cfg, cfg, params.model) + params.lam * cfg.sum(axis=1)[:, None]
    return h - logsumexp(h)


def true_joint_law(n: int, params: ModelParams, conditioning: str = "none") -> np.ndarray:
    """Law of (plus-field count among sites 2..N, up-spin count among sites 2..N).

    Returned as an ``(N, N)`` matrix ``P[n_plus_rest, t_rest]``.
    """
    cfg = spin_configs(n)
    p = np.exp(true_joint_log_table(n, params))
    rest_plus = ((cfg[:, 1:] + 1) // 2).sum(axis=1)
    field_sum = cfg.sum(axis=1)
    if conditioning == "positive-field-sum":
        p = p * (field_sum > 0)[:, None]
        p = p / p.sum()
    out = np.zeros((n, n))
    np.add.at(out, (rest_plus[:, None], rest_plus[None, :]), p)
    return out


def true_spin_average_law(n: int, params: ModelParams) -> np.ndarray:
    """Law of the total up-spin count ``k`` (``M = 2k - N``) under the true joint measure."""
    cfg = spin_configs(n)
    p = np.exp(true_joint_log_table(n, params)).sum(axis=0)
    ups = ((cfg + 1) // 2).sum(axis=1)
    return np.bincount(ups, weights=p, minlength=n + 1)


def lambda_n(n: int, n_plus_rest: int, params: ModelParams) -> float:
    """Half log-ratio of quenched partition functions with site-1 field flipped."""
    rest = np.array([1] * n_plus_rest + [-1] * (n - 1 - n_plus_rest))
    z_minus = quenched_log_z(np.concatenate([[-1], rest]), params)
    z_plus = quenched_log_z(np.concatenate([[1], rest]), params)
    return 0.5 * (z_minus - z_plus)


def true_sigma1_mean(n: int, params: ModelParams) -> float:
    cfg = spin_configs(n)
    p = np.exp(true_joint_log_table(n, params)).sum(axis=0)
    return float(p @ cfg[:, 0])


def morita_moments(n: int, params: MoritaParams) -> tuple[np.ndarray, float]:
    """Law of the up-spin count and the mean of ``eta_1`` under the approximant."""
    cfg = spin_configs(n)
    p = np.exp(morita_log_table(n, params))
    ups = ((cfg + 1) // 2).sum(axis=1)
    law = np.bincount(ups, weights=p.sum(axis=0), minlength=n + 1)
    return law, float(p.sum(axis=1) @ cfg[:, 0])
