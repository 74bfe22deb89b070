"""Parameters and closed-form single-site quantities of the mean-field RFIM.

The quenched model has spins and random fields ``sigma_i, eta_i = +-1``,
inverse temperature ``beta``, field strength ``eps`` and homogeneous field
``h0``. The one-parameter approximant adds a chemical potential ``lam``
coupled to the field sum. Everything here is a pure scalar function of
those parameters and a magnetization-like argument ``m``.

Kernel tables are indexed ``p[s, e]`` with index 0 for the value -1 and
index 1 for the value +1 (see :data:`SPIN_VALUES`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._numerics import LOG2, log_cosh, require_finite
from .errors import DomainError

SPIN_VALUES = (-1, 1)


class Side(enum.Enum):
    """Branch selector for the Curie-Weiss magnetization at zero field."""

    PLUS = 1
    MINUS = -1

    @classmethod
    def coerce(cls, value) -> "Side":
        if isinstance(value, cls):
            return value
        if value in ("+", "plus", 1):
            return cls.PLUS
        if value in ("-", "minus", -1):
            return cls.MINUS
        raise DomainError(f"side must be '+' or '-', got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the quenched model."""

    beta: float
    eps: float
    h0: float = 0.0

    def __post_init__(self):
        require_finite(beta=self.beta, eps=self.eps, h0=self.h0)
        if self.beta <= 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if self.eps < 0:
            raise DomainError(f"eps must be nonnegative, got {self.eps}")

    def with_h0(self, h0: float) -> "ModelParams":
        return ModelParams(self.beta, self.eps, h0)

    def flipped(self) -> "ModelParams":
        return ModelParams(self.beta, self.eps, -self.h0)


@dataclass(frozen=True)
class MoritaParams:
    """Model parameters together with the chemical potential ``lam``."""

    model: ModelParams
    lam: float = 0.0

    def __post_init__(self):
        require_finite(lam=self.lam)

    @classmethod
    def of(cls, beta: float, eps: float, h0: float = 0.0, lam: float = 0.0) -> "MoritaParams":
        return cls(ModelParams(beta, eps, h0), lam)

    @property
    def beta(self) -> float:
        return self.model.beta

    @property
    def eps(self) -> float:
        return self.model.eps

    @property
    def h0(self) -> float:
        return self.model.h0

    @property
    def hhat(self) -> float:
        """Effective homogeneous field felt by the spin marginal."""
        return self.model.h0 + hbar(self.model.beta, self.model.eps, self.lam)

    def flipped(self) -> "MoritaParams":
        return MoritaParams(self.model.flipped(), -self.lam)


def hbar(beta: float, eps: float, lam):
    """Field shift produced on the spins by summing out the random fields.

    ``(1/(2 beta)) log(cosh(lam + beta eps) / cosh(lam - beta eps))``; odd and
    increasing in ``lam`` with range ``(-eps, eps)``. For ``|lam|`` far beyond
    ``beta*eps`` the value rounds to ``+-eps`` in double precision.
    """
    require_finite(beta=beta, eps=eps)
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    lam = np.asarray(lam, dtype=float)
    if not np.all(np.isfinite(lam)):
        raise DomainError("lam must be finite")
    a = beta * eps
    u, v = np.abs(lam + a), np.abs(lam - a)
    diff = (u - v) + np.log1p(np.exp(-2.0 * u)) - np.log1p(np.exp(-2.0 * v))
    out = np.clip(diff / (2.0 * beta), -eps, eps)  # rounding can overshoot by an ulp
    return float(out) if out.ndim == 0 else out


def _cw_residual(beta: float, h: float):
    return lambda m: m - np.tanh(beta * (m + h))


def mcw(beta: float, h: float, side=None) -> float:
    """Curie-Weiss magnetization: the root of ``m = tanh(beta (m + h))``.

    Returns the root carrying the sign of ``h``; at ``h == 0`` the sign is
    taken from ``side`` (required there). For ``beta <= 1`` and ``h == 0``
    the unique root 0 is returned.
    """
    require_finite(beta=beta, h=h)
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if h == 0.0:
        if side is None:
            raise DomainError("side is required when h == 0")
        sign = Side.coerce(side).value
        if beta <= 1.0:
            return 0.0
        return sign * _spontaneous(beta)
    if h < 0:
        return -mcw(beta, -h)
    # f is convex on m > -h, f(0) < 0 < f(1): exactly one positive root
    f = _cw_residual(beta, h)
    return float(brentq(f, 0.0, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500))


def _spontaneous(beta: float) -> float:
    f = _cw_residual(beta, 0.0)
    hi, lo = 1.0, 0.5
    for _ in range(1100):
        if f(lo) < 0.0:
            break
        hi, lo = lo, lo / 2.0
    else:
        return 0.0
    if f(hi) == 0.0:
        return hi
    return float(brentq(f, lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500))


def _site_log_weights(m, params: MoritaParams):
    """log(cosh(beta (m + eps k + h0)) e^{lam k}) for k = -1 and k = +1."""
    b, e, h0, lam = params.beta, params.eps, params.h0, params.lam
    x = b * (np.asarray(m, dtype=float) + h0)
    return log_cosh(x - b * e) - lam, log_cosh(x + b * e) + lam


def phi_hat(m, params: MoritaParams):
    """Free-energy landscape ``m^2/2 - (1/beta) log sum_k cosh(beta(m+eps k+h0)) e^{lam k}``.

    No additive constant is removed. Accepts scalars or arrays in ``m``.
    """
    lw_minus, lw_plus = _site_log_weights(m, params)
    m = np.asarray(m, dtype=float)
    out = 0.5 * m * m - np.logaddexp(lw_minus, lw_plus) / params.beta
    return float(out) if out.ndim == 0 else out


def phi_hat_prime(m, params: MoritaParams):
    """Analytic derivative of :func:`phi_hat`: ``m - sigma_mean(m)``."""
    return np.asarray(m, dtype=float) - sigma_mean(m, params)


def sigma_mean(m, params: MoritaParams):
    """Mean of ``sigma_1`` under the single-site kernel at ``m``.

    Ratio ``sum_k sinh(.) e^{lam k} / sum_k cosh(.) e^{lam k}`` written as a
    softmax-weighted average of ``tanh(beta(m + eps k + h0))``.
    """
    b, e, h0 = params.beta, params.eps, params.h0
    lw_minus, lw_plus = _site_log_weights(m, params)
    w_plus = 0.5 * (1.0 + np.tanh(0.5 * (lw_plus - lw_minus)))
    x = b * (np.asarray(m, dtype=float) + h0)
    out = w_plus * np.tanh(x + b * e) + (1.0 - w_plus) * np.tanh(x - b * e)
    return float(out) if np.ndim(out) == 0 else out


def eta_mean(m, params: MoritaParams):
    """Mean of ``eta_1`` under the single-site kernel at ``m``."""
    lw_minus, lw_plus = _site_log_weights(m, params)
    out = np.tanh(0.5 * (lw_plus - lw_minus))
    return float(out) if np.ndim(out) == 0 else out


def eta_mean_closed_form(sigma_average: float, params: MoritaParams) -> float:
    """Field mean implied by a spin mean through the affine tanh identity.

    Given ``sigma`` the field has conditional mean ``tanh(lam + beta eps sigma)``,
    which is affine in ``sigma = +-1``:
    ``(B(1-L^2) sigma + L(1-B^2)) / (1 - B^2 L^2)`` with ``L = tanh lam`` and
    ``B = tanh(beta eps)``; averaging gives the same expression in the mean.
    """
    L = math.tanh(params.lam)
    B = math.tanh(params.beta * params.eps)
    return (B * (1.0 - L * L) * sigma_average + L * (1.0 - B * B)) / (1.0 - B * B * L * L)


@dataclass(frozen=True)
class SingleSiteKernel:
    """Joint law of one (spin, field) pair; ``p[s, e]`` with index 0 = -1."""

    p: np.ndarray
    m: float

    def prob(self, sigma: int, eta: int) -> float:
        return float(self.p[(sigma + 1) // 2, (eta + 1) // 2])

    @property
    def sigma_marginal(self) -> np.ndarray:
        return self.p.sum(axis=1)

    @property
    def eta_marginal(self) -> np.ndarray:
        return self.p.sum(axis=0)

    @property
    def sigma_mean(self) -> float:
        ps = self.sigma_marginal
        return float(ps[1] - ps[0])

    @property
    def eta_mean(self) -> float:
        pe = self.eta_marginal
        return float(pe[1] - pe[0])

    def eta_mean_given_sigma(self, sigma: int) -> float:
        row = self.p[(sigma + 1) // 2]
        return float((row[1] - row[0]) / row.sum())


def pi_kernel(m: float, params: MoritaParams) -> SingleSiteKernel:
    """Single-site joint kernel ``exp(beta(m + eps eta + h0) sigma + lam eta) / norm``."""
    b, e, h0, lam = params.beta, params.eps, params.h0, params.lam
    s = np.array(SPIN_VALUES, dtype=float)[:, None]
    t = np.array(SPIN_VALUES, dtype=float)[None, :]
    logw = b * (m + e * t + h0) * s + lam * t
    lw_minus, lw_plus = _site_log_weights(m, params)
    log_norm = LOG2 + np.logaddexp(lw_minus, lw_plus)
    return SingleSiteKernel(np.exp(logw - log_norm), float(m))


def pi_kernel_factorized(m: float, params: MoritaParams) -> SingleSiteKernel:
    """Same kernel built as spin marginal in field ``hhat`` times field-given-spin."""
    b, e, lam = params.beta, params.eps, params.lam
    x = b * (m + params.hhat)
    p = np.empty((2, 2))
    for i, s in enumerate(SPIN_VALUES):
        log_ps = s * x - LOG2 - log_cosh(x)
        y = b * e * s + lam
        for j, t in enumerate(SPIN_VALUES):
            p[i, j] = math.exp(log_ps + t * y - LOG2 - log_cosh(y))
    return SingleSiteKernel(p, float(m))
