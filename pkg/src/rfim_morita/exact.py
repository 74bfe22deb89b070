"""Exact finite-N computations through combinatorial sums.

Every quenched partition function depends on the field configuration only
through the number ``n_plus`` of +1 fields. Grouping spins by the sign of
their field, the sum over spins becomes a sum over the up-spin counts
``k_plus, k_minus`` of the two classes with binomial multiplicities. The
linear part of the exponent factorizes over the classes, so the law of
the total up-count is a log-space convolution; the quadratic mean-field
term is added afterwards. All work is carried in log space and
exponentiated only after subtracting maxima.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import logsumexp

from . import enumeration
from ._numerics import LOG2, log_binom
from .core import ModelParams, MoritaParams, eta_mean, eta_mean_closed_form, phi_hat, pi_kernel, sigma_mean
from .errors import DomainError, NumericError, ResourceError

DEFAULT_PARTITION_CAP = 4000
DEFAULT_JOINT_CAP = 1200

NO_CONDITIONING = "none"
POSITIVE_FIELD_SUM = "positive-field-sum"


def partition_cap() -> int:
    return int(os.environ.get("RFIM_MAX_N_PARTITION", DEFAULT_PARTITION_CAP))


def joint_cap() -> int:
    return int(os.environ.get("RFIM_MAX_N_JOINT", DEFAULT_JOINT_CAP))


def _check_size(n: int, cap: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"N must be a positive integer, got {n!r}")
    if n > cap:
        raise ResourceError(f"N={n} exceeds the configured cap {cap}")


# --------------------------------------------------------------------------
# combinatorial building blocks


def _class_log_weights(size: int, field: int, params: ModelParams) -> np.ndarray:
    """log C(size, k) + beta (eps*field + h0)(2k - size) for k = 0..size."""
    k = np.arange(size + 1)
    return log_binom(size, k) + params.beta * (params.eps * field + params.h0) * (2 * k - size)


def log_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``c[t] = log sum_k exp(a[k] + b[t - k])`` with a fixed reduction order."""
    if len(a) > len(b):
        a, b = b, a
    la, lb = len(a), len(b)
    grid = np.full((la, la + lb - 1), -np.inf)
    rows = np.arange(la)[:, None]
    grid[rows, rows + np.arange(lb)[None, :]] = a[:, None] + b[None, :]
    return logsumexp(grid, axis=0)


def linear_log_weights(n_plus: int, n_minus: int, params: ModelParams) -> np.ndarray:
    """Log weight of each total up-count ``t`` without the quadratic term."""
    return log_convolve(
        _class_log_weights(n_plus, 1, params),
        _class_log_weights(n_minus, -1, params),
    )


@dataclass(frozen=True)
class QuenchedLogZ:
    n_total: int
    n_plus: int
    params: ModelParams
    log_z: float


def quenched_log_z(n: int, n_plus: int, params: ModelParams) -> QuenchedLogZ:
    """Log partition function of the quenched measure with ``n_plus`` fields equal to +1."""
    _check_size(n, partition_cap())
    if not 0 <= n_plus <= n:
        raise DomainError(f"n_plus must lie in [0, {n}], got {n_plus}")
    lw = linear_log_weights(n_plus, n - n_plus, params)
    mag = 2.0 * np.arange(n + 1) - n
    log_z = float(logsumexp(lw + params.beta * mag * mag / (2.0 * n)))
    return QuenchedLogZ(n, n_plus, params, log_z)


def lambda_n(n: int, n_plus_rest: int, params: ModelParams) -> float:
    """Stochastic chemical potential given ``n_plus_rest`` plus-fields on sites 2..N."""
    if not 0 <= n_plus_rest <= n - 1:
        raise DomainError(f"n_plus_rest must lie in [0, {n - 1}], got {n_plus_rest}")
    z_minus = quenched_log_z(n, n_plus_rest, params).log_z
    z_plus = quenched_log_z(n, n_plus_rest + 1, params).log_z
    return 0.5 * (z_minus - z_plus)


def _site_one_tables(n: int, n_plus_rest: int, params: ModelParams):
    """Log weights ``W[eta_1, sigma_1, t_rest]`` and ``log Z[eta_1]``.

    ``t_rest`` is the up-count among sites 2..N; index 0 of the first two
    axes stands for the value -1.
    """
    b = params.beta
    lw = linear_log_weights(n_plus_rest, n - 1 - n_plus_rest, params)
    rest_mag = 2.0 * np.arange(n) - (n - 1)
    s1 = np.array([-1.0, 1.0])
    e1 = np.array([-1.0, 1.0])
    total = s1[:, None] + rest_mag[None, :]
    quad = b * total * total / (2.0 * n)
    own = b * (params.eps * e1[:, None] + params.h0) * s1[None, :]
    w = lw[None, None, :] + quad[None, :, :] + own[:, :, None]
    log_z = logsumexp(w, axis=(1, 2))
    return w, log_z


# --------------------------------------------------------------------------
# joint law of (spin average of sites 2..N, lambda_N)


@dataclass(frozen=True)
class JointLaw2D:
    """Exact law of ``(sum_{i>=2} sigma_i / N, lambda_N)``.

    ``probabilities[j, t]`` is the mass of ``m_bar[t]`` together with
    ``lambda_n[j]``, where ``j`` is the number of +1 fields on sites 2..N.
    """

    n_total: int
    m_bar: np.ndarray
    lambda_n: np.ndarray
    probabilities: np.ndarray
    conditioning: str

    def support(self):
        """Iterate over ``(m_bar, lambda_n, probability)`` triples, row-major."""
        for j, lam in enumerate(self.lambda_n):
            for t, m in enumerate(self.m_bar):
                yield float(m), float(lam), float(self.probabilities[j, t])

    @property
    def m_marginal(self) -> np.ndarray:
        return self.probabilities.sum(axis=0)

    @property
    def lambda_marginal(self) -> np.ndarray:
        return self.probabilities.sum(axis=1)

    def expectation(self, fn) -> float:
        """``E[fn(m_bar, lambda_n)]`` for a vectorized ``fn``."""
        vals = fn(self.m_bar[None, :], self.lambda_n[:, None])
        return float((self.probabilities * vals).sum())


def _joint_log_terms(n: int, params: ModelParams):
    """Yield ``(j, lambda_N, log P[eta_1, sigma_1, t_rest])`` for each ``j``."""
    log_prefactor = log_binom(n - 1, np.arange(n)) - n * LOG2
    for j in range(n):
        w, log_z = _site_one_tables(n, j, params)
        lam = 0.5 * float(log_z[0] - log_z[1])
        yield j, lam, log_prefactor[j] + w - log_z[:, None, None]


def true_joint_law(n: int, params: ModelParams, conditioning: str = NO_CONDITIONING) -> JointLaw2D:
    """Exact law of the pair entering the true single-site kernel.

    With ``conditioning="positive-field-sum"`` the law is renormalized on the
    event that the full field sum is strictly positive.
    """
    _check_size(n, joint_cap())
    if conditioning not in (NO_CONDITIONING, POSITIVE_FIELD_SUM):
        raise DomainError(f"unknown conditioning {conditioning!r}")
    probs = np.zeros((n, n))
    lams = np.zeros(n)
    for j, lam, logp in _joint_log_terms(n, params):
        lams[j] = lam
        p = np.exp(logp)
        if conditioning == POSITIVE_FIELD_SUM:
            rest_sum = 2 * j - (n - 1)
            keep = np.array([rest_sum - 1 > 0, rest_sum + 1 > 0])
            p = p[keep]
        probs[j] = p.sum(axis=(0, 1))
    if conditioning == POSITIVE_FIELD_SUM:
        probs /= probs.sum()
    m_bar = (2.0 * np.arange(n) - (n - 1)) / n
    return JointLaw2D(n, m_bar, lams, probs, conditioning)


def true_spin_average_law(n: int, params: ModelParams) -> np.ndarray:
    """Law of the up-spin count ``k`` of all N sites under the true joint measure."""
    _check_size(n, joint_cap())
    mag = 2.0 * np.arange(n + 1) - n
    quad = params.beta * mag * mag / (2.0 * n)
    log_prefactor = log_binom(n, np.arange(n + 1)) - n * LOG2
    out = np.zeros(n + 1)
    for n_plus in range(n + 1):
        lw = linear_log_weights(n_plus, n - n_plus, params) + quad
        out += np.exp(log_prefactor[n_plus] + lw - logsumexp(lw))
    return out


# --------------------------------------------------------------------------
# approximant


@dataclass(frozen=True)
class MoritaLaw:
    """Law of the spin average under the approximant and the field mean."""

    n_total: int
    m_values: np.ndarray
    probabilities: np.ndarray
    field_expectation: float

    @property
    def mean(self) -> float:
        return float(self.probabilities @ self.m_values)

    @property
    def variance(self) -> float:
        mu = self.mean
        return float(self.probabilities @ (self.m_values - mu) ** 2)


def morita_law(n: int, params: MoritaParams) -> MoritaLaw:
    """Exact law of the spin average: a Curie-Weiss model in field ``hhat``."""
    _check_size(n, partition_cap())
    k = np.arange(n + 1)
    mag = 2.0 * k - n
    logw = log_binom(n, k) + params.beta * (mag * mag / (2.0 * n) + params.hhat * mag)
    p = np.exp(logw - logsumexp(logw))
    m_values = mag / n
    field = eta_mean_closed_form(float(p @ m_values), params)
    return MoritaLaw(n, m_values, p, field)


# --------------------------------------------------------------------------
# identities


@dataclass(frozen=True)
class ConsistencyResiduals:
    n_total: int
    sigma_lhs: float
    sigma_rhs: float
    eta_rhs: float

    @property
    def magnetization_residual(self) -> float:
        return abs(self.sigma_lhs - self.sigma_rhs)

    @property
    def neutrality_residual(self) -> float:
        return abs(self.eta_rhs)


def verify_consistency_identities(n: int, params: ModelParams, method: str = "auto") -> ConsistencyResiduals:
    """Both sides of the finite-N spin consistency identity and the field-neutrality sum.

    The right-hand sides average the kernel means at ``(m_bar, lambda_N)``
    over the exact joint law. The spin mean on the left comes from full
    enumeration (``method="enumeration"``, N <= 12) or from marginalizing
    site 1 in the combinatorial tables (``method="combinatorial"``).
    """
    if method == "auto":
        method = "enumeration" if n <= enumeration.ENUMERATION_CAP else "combinatorial"
    law = true_joint_law(n, params)

    def mean_of(fn):
        total = 0.0
        for j, lam in enumerate(law.lambda_n):
            mp = MoritaParams(params, float(lam))
            total += float(law.probabilities[j] @ fn(law.m_bar, mp))
        return total

    sigma_rhs = mean_of(sigma_mean)
    eta_rhs = mean_of(eta_mean)
    if method == "enumeration":
        sigma_lhs = enumeration.true_sigma1_mean(n, params)
    elif method == "combinatorial":
        sigma_lhs = 0.0
        for _, _, logp in _joint_log_terms(n, params):
            p = np.exp(logp).sum(axis=(0, 2))
            sigma_lhs += float(p[1] - p[0])
    else:
        raise DomainError(f"unknown method {method!r}")
    return ConsistencyResiduals(n, sigma_lhs, sigma_rhs, eta_rhs)


@dataclass(frozen=True)
class MaxErrorReport:
    n_total: int
    max_error: float
    n_checked: int


def conditional_kernel_check(n: int, params: ModelParams) -> MaxErrorReport:
    """Compare enumerated single-site conditionals with the kernel at ``(m_bar, lambda_N)``."""
    _check_size(n, enumeration.ENUMERATION_CAP)
    b = params.beta
    lams = [lambda_n(n, j, params) for j in range(n)]
    m_rest = (2.0 * np.arange(n) - (n - 1)) / n
    # kernels[j, t, s, e]
    kernels = np.array(
        [[pi_kernel(float(m), MoritaParams(params, lam)).p for m in m_rest] for lam in lams]
    )
    rest = enumeration.spin_configs(n - 1) if n > 1 else np.zeros((1, 0), dtype=int)
    rest_ups = ((rest + 1) // 2).sum(axis=1)
    rest_mag = rest.sum(axis=1).astype(float)
    s1 = np.array([-1.0, 1.0])
    # sigma configurations: (sigma_1, sigma_rest)
    total_mag = s1[:, None] + rest_mag[None, :]
    base = b * total_mag**2 / (2.0 * n) + b * params.h0 * total_mag
    worst = 0.0
    for r, eta_rest in enumerate(rest):
        j = int(rest_ups[r])
        field_rest = b * params.eps * (rest @ eta_rest).astype(float)
        log_z = np.empty(2)
        logk = np.empty((2, 2, len(rest)))  # [eta_1, sigma_1, sigma_rest]
        for ie, e1 in enumerate((-1.0, 1.0)):
            h = base + b * params.eps * e1 * s1[:, None] + field_rest[None, :]
            log_z[ie] = logsumexp(h)
            logk[ie] = h - log_z[ie]
        cond = np.exp(logk - logsumexp(logk, axis=(0, 1), keepdims=True))
        expected = kernels[j, rest_ups].transpose(2, 1, 0)
        worst = max(worst, float(np.max(np.abs(cond - expected))))
    return MaxErrorReport(n, worst, len(rest) ** 2)


@dataclass(frozen=True)
class HsReport:
    n_total: int
    max_error: float
    configs: np.ndarray
    hs_values: np.ndarray
    direct_values: np.ndarray

    @property
    def errors(self) -> np.ndarray:
        return np.abs(self.hs_values - self.direct_values)


def _flip_code(code: int, n: int) -> int:
    return code ^ ((1 << n) - 1)


def verify_hs_representation(
    n: int,
    params: MoritaParams,
    n_samples: int = 100,
    seed: int = 0,
    configs=None,
    epsabs: float = 1e-10,
) -> HsReport:
    """Check the Gaussian-smoothing representation of the approximant at size N.

    The approximant probability of each sampled ``(sigma, eta)`` is computed
    once by direct enumeration and once as the m-integral of the normalized
    weight ``exp(-beta N phi_hat(m))`` times the product of single-site
    kernel entries, by adaptive quadrature. ``configs`` may supply explicit
    ``(eta code, sigma code)`` pairs.
    """
    if n > 10:
        raise ResourceError("the representation check is limited to N <= 10")
    _check_size(n, 10)
    b = params.beta
    direct = enumeration.morita_log_table(n, params)
    n_codes = 2**n
    if configs is None:
        if n_codes**2 <= n_samples:
            e, s = np.meshgrid(np.arange(n_codes), np.arange(n_codes), indexing="ij")
            configs = np.stack([e.ravel(), s.ravel()], axis=1)
        else:
            rng = np.random.default_rng(seed)
            configs = rng.integers(0, n_codes, size=(n_samples, 2))
    configs = np.asarray(configs)
    cfg = enumeration.spin_configs(n)
    sig = cfg[configs[:, 1]]
    eta = cfg[configs[:, 0]]
    # counts of each (sigma, eta) pair per configuration; columns ordered (s, e) row-major
    counts = np.stack(
        [((sig == s) & (eta == e)).sum(axis=1) for s in (-1, 1) for e in (-1, 1)], axis=1
    ).astype(float)

    half = max(4.0, 1.0 + params.eps + abs(params.h0) + math.sqrt(80.0 / (b * n)))
    ms = np.linspace(-half, half, 4001)
    shift = float(np.min(phi_hat(ms, params)))

    def integrand(m):
        log_w = -b * n * (phi_hat(m, params) - shift)
        log_pi = np.log(pi_kernel(m, params).p).ravel()
        return np.exp(np.concatenate([[log_w], log_w + counts @ log_pi]))

    res, err, info = quad_vec(integrand, -half, half, epsabs=epsabs, epsrel=1e-12, full_output=True, limit=20000)
    if not info.success:
        raise NumericError(f"quadrature did not converge: {info.message}")
    hs = res[1:] / res[0]
    dv = np.exp(direct[configs[:, 0], configs[:, 1]])
    return HsReport(n, float(np.max(np.abs(hs - dv))), configs, hs, dv)


# --------------------------------------------------------------------------
# discontinuity of lambda_N in the field bias


@dataclass(frozen=True)
class ProfileEntry:
    requested_bias: float
    field_bias: float
    n_plus_rest: int
    lambda_n: float


@dataclass(frozen=True)
class DiscontinuityProfile:
    n_total: int
    entries: list[ProfileEntry]


def bias_to_count(n: int, bias: float) -> int:
    """Plus-field count on sites 2..N realizing ``bias`` as closely as possible.

    Rounds ``(N-1)(1+bias)/2`` half away from the symmetric centre so that
    ``bias`` and ``-bias`` map to mirror-image counts.
    """
    if not -1.0 <= bias <= 1.0:
        raise DomainError(f"bias must lie in [-1, 1], got {bias}")
    rest = n - 1
    if bias < 0:
        return rest - bias_to_count(n, -bias)
    return min(rest, int(math.floor(rest * (1.0 + bias) / 2.0 + 0.5)))


def discontinuity_profile(n: int, params: ModelParams, bias_grid) -> DiscontinuityProfile:
    """Tabulate ``lambda_N`` against the realized field bias of the conditioning."""
    entries = []
    for bias in bias_grid:
        j = bias_to_count(n, float(bias))
        realized = (2 * j - (n - 1)) / (n - 1) if n > 1 else 0.0
        entries.append(ProfileEntry(float(bias), realized, j, lambda_n(n, j, params)))
    return DiscontinuityProfile(n, entries)


@dataclass(frozen=True)
class LambdaJump:
    n_total: int
    bias: float
    lambda_plus: float
    lambda_minus: float

    @property
    def jump(self) -> float:
        return self.lambda_plus - self.lambda_minus


def lambda_jump(n: int, params: ModelParams, exponent: float = 0.4) -> LambdaJump:
    """``lambda_N`` at field bias ``+N^-exponent`` minus its value at ``-N^-exponent``."""
    bias = n ** (-exponent)
    prof = discontinuity_profile(n, params, [bias, -bias])
    return LambdaJump(n, bias, prof.entries[0].lambda_n, prof.entries[1].lambda_n)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
