"""Seeded single-site Metropolis samplers.

Two targets are supported: the approximant joint measure on (spins,
fields), where each proposal flips one of the 2N variables chosen
uniformly, and the quenched Gibbs measure on spins for a fixed field
configuration. A sweep is 2N (resp. N) proposals; observables are
recorded once per sweep after burn-in.

Random numbers come from numpy's Philox-4x64 counter-based generator
(``numpy.random.Philox``, 10 rounds), keyed through
``SeedSequence(seed, spawn_key=(chain,))``. The same seed, chain index and
configuration reproduce the output bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Optional, Union

import numpy as np

from .core import ModelParams, MoritaParams
from .errors import ConfigError

N_BATCHES = 20
MORITA = "morita"
QUENCHED = "quenched"
_CHUNK = 1 << 16


@dataclass(frozen=True)
class McConfig:
    n_total: int
    sweeps: int
    burn_in: int
    seed: int
    target: str
    params: Union[MoritaParams, ModelParams]
    fields: Optional[tuple[int, ...]] = None
    chain: int = 0

    def __post_init__(self):
        if self.n_total < 1:
            raise ConfigError("n_total must be positive")
        if self.sweeps <= 0:
            raise ConfigError("sweeps must be positive")
        if not 0 <= self.burn_in < self.sweeps:
            raise ConfigError("burn_in must satisfy 0 <= burn_in < sweeps")
        if self.sweeps - self.burn_in < N_BATCHES:
            raise ConfigError(f"need at least {N_BATCHES} recorded sweeps for batch means")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.chain < 0:
            raise ConfigError("chain index must be nonnegative")
        if self.target == MORITA:
            if not isinstance(self.params, MoritaParams):
                raise ConfigError("the morita target needs MoritaParams")
        elif self.target == QUENCHED:
            if not isinstance(self.params, ModelParams):
                raise ConfigError("the quenched target needs ModelParams")
            if self.fields is None or len(self.fields) != self.n_total:
                raise ConfigError("the quenched target needs one field value per site")
            if any(f not in (-1, 1) for f in self.fields):
                raise ConfigError("fields must be +-1")
        else:
            raise ConfigError(f"unknown target {self.target!r}")

    @classmethod
    def quenched(cls, n_total, sweeps, burn_in, seed, params: ModelParams, n_plus=None, fields=None, chain=0):
        """Quenched target; ``n_plus`` puts +1 fields on the first ``n_plus`` sites."""
        if fields is None:
            if n_plus is None or not 0 <= n_plus <= n_total:
                raise ConfigError("give either fields or 0 <= n_plus <= n_total")
            fields = (1,) * n_plus + (-1,) * (n_total - n_plus)
        return cls(n_total, sweeps, burn_in, seed, QUENCHED, params, tuple(int(f) for f in fields), chain)

    def echo(self) -> dict:
        d = asdict(self)
        d["params"] = _params_dict(self.params)
        d["fields"] = list(self.fields) if self.fields is not None else None
        return d


def _params_dict(params) -> dict:
    if isinstance(params, MoritaParams):
        return {"beta": params.beta, "eps": params.eps, "h0": params.h0, "lambda": params.lam}
    return {"beta": params.beta, "eps": params.eps, "h0": params.h0}


@dataclass(frozen=True)
class McEstimate:
    mean_spin_average: float
    mean_field_average: Optional[float]
    std_error: float
    field_std_error: Optional[float]
    n_samples: int


def make_rng(seed: int, chain: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(chain,))
    return np.random.Generator(np.random.Philox(ss))


def batch_std_error(series: np.ndarray, n_batches: int = N_BATCHES) -> float:
    means = np.array([b.mean() for b in np.array_split(np.asarray(series, dtype=float), n_batches)])
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def run_chain(config: McConfig, record_codes: bool = False):
    """Run one chain; returns per-sweep spin and field averages (and state codes).

    The state code packs sigma into the low N bits (bit i set when
    sigma_{i+1} = +1) and, for the morita target, eta into the next N bits.
    """
    n = config.n_total
    rng = make_rng(config.seed, config.chain)
    morita = config.target == MORITA
    if morita:
        mp = config.params
        b, e, h0, lam = mp.beta, mp.eps, mp.h0, mp.lam
        sigma = (2 * rng.integers(0, 2, size=n) - 1).tolist()
        eta = (2 * rng.integers(0, 2, size=n) - 1).tolist()
        n_vars = 2 * n
    else:
        mp = config.params
        b, e, h0, lam = mp.beta, mp.eps, mp.h0, 0.0
        sigma = (2 * rng.integers(0, 2, size=n) - 1).tolist()
        eta = list(config.fields)
        n_vars = n
    mag = sum(sigma)
    fsum = sum(eta)
    code = 0
    if record_codes:
        for i in range(n):
            code |= (sigma[i] > 0) << i
            code |= (eta[i] > 0) << (n + i)
    exp = math.exp
    c_quad = b / (2.0 * n)

    recorded = config.sweeps - config.burn_in
    spin_series = np.empty(recorded)
    field_series = np.empty(recorded)
    codes = np.empty(recorded, dtype=np.int64) if record_codes else None

    picks: list = []
    uniforms: list = []
    pos = 0
    for sweep in range(config.sweeps):
        for _ in range(n_vars):
            if pos == len(picks):
                picks = rng.integers(0, n_vars, size=_CHUNK).tolist()
                uniforms = rng.random(size=_CHUNK).tolist()
                pos = 0
            k = picks[pos]
            u = uniforms[pos]
            pos += 1
            if k < n:
                s = sigma[k]
                # log-weight change of sigma_k -> -sigma_k
                d = c_quad * (4.0 - 4.0 * s * mag) - 2.0 * b * (e * eta[k] + h0) * s
                if d >= 0.0 or u < exp(d):
                    sigma[k] = -s
                    mag -= 2 * s
                    if record_codes:
                        code ^= 1 << k
            else:
                i = k - n
                t = eta[i]
                d = -2.0 * t * (b * e * sigma[i] + lam)
                if d >= 0.0 or u < exp(d):
                    eta[i] = -t
                    fsum -= 2 * t
                    if record_codes:
                        code ^= 1 << k
        r = sweep - config.burn_in
        if r >= 0:
            spin_series[r] = mag / n
            field_series[r] = fsum / n
            if record_codes:
                codes[r] = code
    return spin_series, field_series, codes


def sample(config: McConfig) -> McEstimate:
    """Metropolis estimate of the spin (and field) average with batch-means errors."""
    spin, field, _ = run_chain(config)
    morita = config.target == MORITA
    return McEstimate(
        mean_spin_average=float(spin.mean()),
        mean_field_average=float(field.mean()) if morita else None,
        std_error=batch_std_error(spin),
        field_std_error=batch_std_error(field) if morita else None,
        n_samples=len(spin),
    )


def sample_chains(config: McConfig, n_chains: int) -> tuple[list[McEstimate], McEstimate]:
    """Independent chains ``0..n_chains-1`` and their pooled estimate, folded in chain order."""
    ests = [sample(replace(config, chain=c)) for c in range(n_chains)]
    k = len(ests)
    spin = sum(x.mean_spin_average for x in ests) / k
    se = math.sqrt(sum(x.std_error**2 for x in ests)) / k
    if ests[0].mean_field_average is not None:
        field = sum(x.mean_field_average for x in ests) / k
        fse = math.sqrt(sum(x.field_std_error**2 for x in ests)) / k
    else:
        field = fse = None
    return ests, McEstimate(spin, field, se, fse, sum(x.n_samples for x in ests))
