"""Mean-field equations, landscape classification and the neutral set.

The quenched equation of state is

    m = (tanh(beta(m + eps + h0)) + tanh(beta(m - eps + h0))) / 2,

and the naive two-parameter system (spin consistency plus field
neutrality) reduces to it after eliminating ``lam`` through

    lam(m) = (1/2) log(cosh(beta(m - eps + h0)) / cosh(beta(m + eps + h0))).

The neutral set is the set of ``(h0, lam)`` for which the approximant's
limiting field law is symmetric; with ``l = -lam > 0`` it is the graph of
``h0(l) = hbar(l) + atanh(m_t)/beta - m_t`` where
``m_t = sinh(2l)/sinh(2 beta eps)`` and ``l`` ranges over ``(l_min, beta eps)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import bracket_roots, log_cosh
from .core import (
    ModelParams,
    MoritaParams,
    Side,
    eta_mean,
    eta_mean_closed_form,
    hbar,
    mcw,
    phi_hat,
    sigma_mean,
)
from .errors import AmbiguousPhaseError, DomainError, NoSolutionError, OutOfRangeError

GRID_STEP = 1e-3
MARGINAL_CURVATURE = 1e-8

GLOBAL_MIN = "global-min"
LOCAL_MIN = "local-min"
LOCAL_MAX = "local-max"
MARGINAL = "marginal"


def eos_residual(m, params: ModelParams):
    """``m - (tanh(beta(m+eps+h0)) + tanh(beta(m-eps+h0)))/2``; vectorized in m."""
    b, e, h0 = params.beta, params.eps, params.h0
    m = np.asarray(m, dtype=float)
    return m - 0.5 * (np.tanh(b * (m + e + h0)) + np.tanh(b * (m - e + h0)))


def solve_quenched(params: ModelParams) -> list[float]:
    """All roots of the quenched equation of state, ascending."""
    half = 1.0 + abs(params.h0) + params.eps
    return bracket_roots(lambda m: eos_residual(m, params), -half, half, GRID_STEP)


def neutral_lambda(m: float, params: ModelParams) -> float:
    """Chemical potential making the field mean vanish at magnetization ``m``."""
    b, e, h0 = params.beta, params.eps, params.h0
    return 0.5 * float(log_cosh(b * (m - e + h0)) - log_cosh(b * (m + e + h0)))


# --------------------------------------------------------------------------
# landscape


@dataclass(frozen=True)
class CriticalPoint:
    m: float
    kind: str
    phi: float
    curvature: float


@dataclass(frozen=True)
class CriticalPointSet:
    points: tuple[CriticalPoint, ...]
    params: MoritaParams

    @property
    def global_min_value(self) -> float:
        return min(p.phi for p in self.points if p.kind == GLOBAL_MIN)

    @property
    def global_minimizers(self) -> list[float]:
        return [p.m for p in self.points if p.kind == GLOBAL_MIN]

    def nearest(self, m: float) -> CriticalPoint:
        return min(self.points, key=lambda p: abs(p.m - m))


def _curvature(m: float, params: MoritaParams) -> float:
    t = math.tanh(params.beta * (m + params.hhat))
    return 1.0 - params.beta * (1.0 - t * t)


def classify_landscape(params: MoritaParams) -> CriticalPointSet:
    """Stationary points of ``phi_hat`` labelled global-min / local-min / local-max.

    Stationarity is ``m = tanh(beta(m + hhat))``. A point whose curvature
    ``1 - beta sech^2(beta(m + hhat))`` is within 1e-8 of zero is reported
    as ``marginal``. Minima whose ``phi_hat`` values agree to 1e-12 share the
    global-min label (this happens at ``hhat == 0``).
    """
    b, hh = params.beta, params.hhat
    half = 2.0 + params.eps + abs(params.h0)
    roots = bracket_roots(lambda m: m - np.tanh(b * (m + hh)), -half, half, GRID_STEP)
    raw = []
    for m in roots:
        c = _curvature(m, params)
        if abs(c) < MARGINAL_CURVATURE:
            kind = MARGINAL
        elif c > 0:
            kind = LOCAL_MIN
        else:
            kind = LOCAL_MAX
        raw.append([m, kind, phi_hat(m, params), c])
    minima = [r for r in raw if r[1] == LOCAL_MIN]
    if minima:
        best = min(r[2] for r in minima)
        tol = 1e-12 * max(1.0, abs(best))
        for r in minima:
            if r[2] - best <= tol:
                r[1] = GLOBAL_MIN
    return CriticalPointSet(tuple(CriticalPoint(*r) for r in raw), params)


# --------------------------------------------------------------------------
# naive system


@dataclass(frozen=True)
class NaiveSolution:
    m: float
    lam: float
    eos_residual: float
    neutrality_residual: float
    metastable: bool
    kind: str
    params: ModelParams

    @property
    def morita_params(self) -> MoritaParams:
        return MoritaParams(self.params, self.lam)


def naive_solution_at(m: float, params: ModelParams) -> NaiveSolution:
    """Complete a root ``m`` of the equation of state to a naive solution."""
    lam = neutral_lambda(m, params)
    mp = MoritaParams(params, lam)
    landscape = classify_landscape(mp)
    phi = phi_hat(m, mp)
    gmin = landscape.global_min_value
    metastable = phi - gmin > 1e-12 * max(1.0, abs(gmin))
    return NaiveSolution(
        m=m,
        lam=lam,
        eos_residual=abs(m - sigma_mean(m, mp)),
        neutrality_residual=abs(eta_mean(m, mp)),
        metastable=bool(metastable),
        kind=landscape.nearest(m).kind,
        params=params,
    )


def solve_naive_system(params: ModelParams, branch="+") -> NaiveSolution:
    """Solve the spin-consistency and neutrality equations on one branch.

    ``branch`` selects the root by the sign of ``m``: ``"+"`` the largest
    positive root, ``"-"`` the most negative root, ``"0"`` the symmetric
    root ``m = 0`` (only at ``h0 == 0``).
    """
    branch = str(branch)
    if branch in ("0", "zero"):
        if params.h0 != 0.0:
            raise NoSolutionError("the symmetric branch exists only at h0 == 0")
        return naive_solution_at(0.0, params)
    roots = solve_quenched(params)
    if branch in ("+", "plus"):
        candidates = [r for r in roots if r > 0]
        pick = max
    elif branch in ("-", "minus"):
        candidates = [r for r in roots if r < 0]
        pick = min
    else:
        raise DomainError(f"branch must be '+', '0' or '-', got {branch!r}")
    if not candidates:
        raise NoSolutionError(
            f"no root on branch {branch!r} at beta={params.beta}, eps={params.eps}, h0={params.h0}"
        )
    return naive_solution_at(pick(candidates), params)


# --------------------------------------------------------------------------
# neutral set


def neutral_l_min(beta: float, eps: float) -> float:
    """Lower end of the ``l`` interval carrying the neutral curve."""
    m0 = mcw(beta, 0.0, Side.PLUS)
    return 0.5 * math.asinh(math.sinh(2.0 * beta * eps) * m0)


def _sinh_ratio(l: float, a: float) -> float:
    # sinh(2l)/sinh(2a) for 0 < l < a without overflow
    return math.exp(2.0 * (l - a)) * math.expm1(-4.0 * l) / math.expm1(-4.0 * a)


@dataclass(frozen=True)
class NeutralPoint:
    h0: float
    lam: float
    l: float
    residual: float


def neutral_point_for_l(params: ModelParams, l: float) -> NeutralPoint:
    """The neutral pair ``(h0, lam = -l)`` on the positive curve; ``params.h0`` is ignored."""
    b, e = params.beta, params.eps
    l_min = neutral_l_min(b, e)
    if not (l_min < l < b * e):
        raise OutOfRangeError(f"l={l} outside the open interval ({l_min}, {b * e})")
    m_t = _sinh_ratio(l, b * e)
    shift = hbar(b, e, l)
    h_eff = math.atanh(m_t) / b - m_t
    h0 = shift + h_eff
    side = Side.PLUS if h0 - shift == 0.0 else None
    residual = abs(mcw(b, h0 - shift, side) - m_t)
    return NeutralPoint(h0=h0, lam=-l, l=l, residual=residual)


@dataclass(frozen=True)
class NeutralCurve:
    points: list[NeutralPoint]
    l_min: float
    a: float
    params: ModelParams = field(repr=False)


def trace_neutral_curve(params: ModelParams, points: int = 200, l_lo=None, l_hi=None) -> NeutralCurve:
    """Sample the positive neutral curve.

    Without explicit bounds the samples are interior points of
    ``(l_min, beta eps)``, equally spaced and excluding both ends.
    """
    if points < 1:
        raise DomainError("points must be positive")
    b, e = params.beta, params.eps
    l_min = neutral_l_min(b, e)
    if l_lo is None and l_hi is None:
        ls = l_min + (b * e - l_min) * np.arange(1, points + 1) / (points + 1)
    else:
        lo = l_lo if l_lo is not None else l_min + (b * e - l_min) / (points + 1)
        hi = l_hi if l_hi is not None else b * e - (b * e - l_min) / (points + 1)
        ls = np.linspace(lo, hi, points) if points > 1 else np.array([lo])
    pts = [neutral_point_for_l(params, float(l)) for l in ls]
    return NeutralCurve(points=pts, l_min=l_min, a=compute_gap(params), params=params)


def compute_gap(params: ModelParams) -> float:
    """Smallest ``|h0|`` admitting a neutral chemical potential: ``hbar(l_min)``."""
    return float(hbar(params.beta, params.eps, neutral_l_min(params.beta, params.eps)))


def neutral_curve_infimum(params: ModelParams, decades: int = 11) -> float:
    """Infimum of ``h0`` along the traced curve, approached geometrically in ``l``."""
    b, e = params.beta, params.eps
    l_min = neutral_l_min(b, e)
    width = b * e - l_min
    h0s = [neutral_point_for_l(params, l_min + width * 10.0 ** (-k)).h0 for k in range(1, decades + 1)]
    return min(h0s)


def limiting_field_expectation(params: MoritaParams) -> float:
    """Large-N mean of one random field under the approximant."""
    hh = params.hhat
    if hh == 0.0:
        if params.beta > 1.0:
            raise AmbiguousPhaseError("hhat == 0 with beta > 1: the limit is a symmetric mixture")
        m = 0.0
    else:
        m = mcw(params.beta, hh)
    return eta_mean_closed_form(m, params)
