"""Small numerically stable primitives used throughout the package."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import DomainError

LOG2 = math.log(2.0)


def log_cosh(x):
    """log(cosh x) without overflow: |x| + log1p(exp(-2|x|)) - log 2."""
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - LOG2


def log_binom(n, k):
    """Natural log of the binomial coefficient C(n, k) via log-gamma."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def require_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite, got {v!r}")


def bracket_roots(f, lo: float, hi: float, step: float = 1e-3, xtol: float = 1e-15):
    """All sign-change roots of ``f`` on [lo, hi].

    ``f`` must accept numpy arrays. The interval is scanned on the integer
    multiples of ``step`` (so 0 is a node whenever it lies inside) plus the
    two end points; every sign change is polished with Brent's method and
    nodes where ``f`` vanishes exactly are returned as is. Roots closer
    together than one grid step (tangencies) can be missed.
    """
    ks = np.arange(math.ceil(lo / step), math.floor(hi / step) + 1)
    xs = np.unique(np.concatenate([[lo], ks * step, [hi]]))
    fs = np.asarray(f(xs), dtype=float)
    roots = []
    n = len(xs)
    for i in range(n):
        if fs[i] == 0.0:
            roots.append(float(xs[i]))
        elif i + 1 < n and fs[i] * fs[i + 1] < 0.0:
            roots.append(float(brentq(f, xs[i], xs[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)))
    return sorted(roots)
