"""Acceptance criteria and invariant suites behind ``rfim verify``.

Each check is a zero-argument function returning a :class:`CheckResult`.
``SUITES`` maps a suite name to its checks; ``"all"`` runs every suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import enumeration, exact, montecarlo
from .core import ModelParams, MoritaParams, Side, eta_mean, hbar, mcw, phi_hat, pi_kernel, pi_kernel_factorized, sigma_mean
from .errors import NoSolutionError
from .solvers import (
    classify_landscape,
    compute_gap,
    eos_residual,
    limiting_field_expectation,
    neutral_curve_infimum,
    neutral_l_min,
    neutral_point_for_l,
    solve_naive_system,
    solve_quenched,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def random_triples(count: int, seed: int, beta=(0.3, 2.5), eps=(0.0, 1.0), h0=(-0.5, 0.5)) -> list[ModelParams]:
    rng = np.random.default_rng(seed)
    return [
        ModelParams(float(rng.uniform(*beta)), float(rng.uniform(*eps)), float(rng.uniform(*h0)))
        for _ in range(count)
    ]


ACCEPTANCE_GRID_BETA = np.linspace(1.2, 3.0, 5)
ACCEPTANCE_GRID_EPS = np.linspace(0.05, 0.8, 5)
REFERENCE = ModelParams(2.0, 0.3, 0.0)


# --------------------------------------------------------------------------
# acceptance criteria


def criterion_identities() -> CheckResult:
    worst = 0.0
    for p in random_triples(5, 101):
        for n in (4, 6, 8, 10):
            r = exact.verify_consistency_identities(n, p, method="enumeration")
            worst = max(worst, r.magnetization_residual, r.neutrality_residual)
    return CheckResult("01 consistency identities", worst < 1e-10, f"max residual {worst:.3e} (< 1e-10)")


def criterion_kernel() -> CheckResult:
    worst = 0.0
    for p in random_triples(5, 202):
        for n in (2, 4, 6, 8, 10, 12):
            worst = max(worst, exact.conditional_kernel_check(n, p).max_error)
    return CheckResult("02 kernel representation", worst < 1e-12, f"max error {worst:.3e} (< 1e-12)")


def enumeration_discrepancy(n: int, p: ModelParams, lam: float) -> float:
    """Largest gap between combinatorial and enumerated quantities at one size."""
    errs = []
    for n_plus in range(n + 1):
        eta = np.array([1] * n_plus + [-1] * (n - n_plus))
        errs.append(abs(exact.quenched_log_z(n, n_plus, p).log_z - enumeration.quenched_log_z(eta, p)))
    for j in range(n):
        errs.append(abs(exact.lambda_n(n, j, p) - enumeration.lambda_n(n, j, p)))
    for cond in (exact.NO_CONDITIONING, exact.POSITIVE_FIELD_SUM):
        law = exact.true_joint_law(n, p, cond)
        errs.append(float(np.max(np.abs(law.probabilities - enumeration.true_joint_law(n, p, cond)))))
    errs.append(float(np.max(np.abs(exact.true_spin_average_law(n, p) - enumeration.true_spin_average_law(n, p)))))
    mp = MoritaParams(p, lam)
    ml = exact.morita_law(n, mp)
    blaw, bfield = enumeration.morita_moments(n, mp)
    errs.append(float(np.max(np.abs(ml.probabilities - blaw))))
    errs.append(abs(ml.field_expectation - bfield))
    r = exact.verify_consistency_identities(n, p, method="combinatorial")
    errs.append(abs(r.sigma_lhs - enumeration.true_sigma1_mean(n, p)))
    return max(errs)


def criterion_enumeration() -> CheckResult:
    rng = np.random.default_rng(303)
    worst = 0.0
    for p in random_triples(20, 304):
        lam = float(rng.uniform(-1.0, 1.0))
        for n in range(1, 9):
            worst = max(worst, enumeration_discrepancy(n, p, lam))
    return CheckResult("03 enumeration oracle", worst < 1e-11, f"max discrepancy {worst:.3e} (< 1e-11)")


def _acceptance_grid():
    for b in ACCEPTANCE_GRID_BETA:
        for e in ACCEPTANCE_GRID_EPS:
            yield ModelParams(float(b), float(e), 0.0)


def criterion_naive_equivalence() -> CheckResult:
    bad, worst_eos, worst_lam = [], 0.0, 0.0
    for p in _acceptance_grid():
        try:
            s = solve_naive_system(p, "+")
        except NoSolutionError:
            bad.append(f"({p.beta:g},{p.eps:g}) no positive root")
            continue
        r_eos = abs(float(eos_residual(s.m, p)))
        b, e = p.beta, p.eps
        r_lam = abs(math.exp(-2 * s.lam) * math.cosh(b * (s.m - e)) - math.cosh(b * (s.m + e)))
        worst_eos, worst_lam = max(worst_eos, r_eos), max(worst_lam, r_lam)
        if not (r_eos < 1e-10 and r_lam < 1e-8):
            bad.append(f"({b:g},{e:g}) residuals {r_eos:.1e}/{r_lam:.1e}")
    detail = f"eos residual {worst_eos:.1e} (< 1e-10), neutrality residual {worst_lam:.1e} (< 1e-8)"
    if bad:
        detail += f"; {len(bad)}/25 grid points fail: " + ", ".join(bad)
    return CheckResult("04 naive system = quenched equation", not bad, detail)


def criterion_metastability() -> CheckResult:
    bad, smallest = [], math.inf
    for p in _acceptance_grid():
        try:
            s = solve_naive_system(p, "+")
        except NoSolutionError:
            bad.append(f"({p.beta:g},{p.eps:g}) no positive root")
            continue
        land = classify_landscape(s.morita_params)
        g = land.global_minimizers
        gap = phi_hat(s.m, s.morita_params) - land.global_min_value
        smallest = min(smallest, gap)
        if not (gap > 1e-6 and all(np.sign(x) == -np.sign(s.m) for x in g)):
            bad.append(f"({p.beta:g},{p.eps:g}) gap {gap:.1e}")
    detail = f"smallest free-energy gap {smallest:.3e} (> 1e-6)"
    if bad:
        detail += f"; {len(bad)}/25 grid points fail: " + ", ".join(bad)
    return CheckResult("05 metastability witness", not bad, detail)


def criterion_gap() -> CheckResult:
    p = REFERENCE
    a = compute_gap(p)
    inf = neutral_curve_infimum(p)
    lams = np.linspace(-2.0, 2.0, 200)
    mins = {}
    for h0 in (0.0, a / 2):
        vals = [abs(limiting_field_expectation(MoritaParams(p.with_h0(h0), float(l)))) for l in lams]
        mins[h0] = min(vals)
    l_mid = 0.5 * (neutral_l_min(p.beta, p.eps) + p.beta * p.eps)
    pt = neutral_point_for_l(p, l_mid)
    on_curve = abs(limiting_field_expectation(MoritaParams(p.with_h0(pt.h0), pt.lam)))
    a_sub = compute_gap(ModelParams(0.9, 0.3))
    ok = a > 0 and abs(a - inf) < 1e-8 and all(v > 1e-3 for v in mins.values()) and on_curve < 1e-10 and a_sub == 0.0
    detail = (
        f"a={a:.10f}, |a - curve inf|={abs(a - inf):.1e} (< 1e-8), "
        f"min|E eta| at h0=0: {mins[0.0]:.4f}, at a/2: {mins[a / 2]:.4f} (> 1e-3), "
        f"on curve {on_curve:.1e} (< 1e-10), a(0.9,0.3)={a_sub}"
    )
    return CheckResult("06 impossibility gap", ok, detail)


def criterion_morita_convergence() -> CheckResult:
    mp = MoritaParams.of(2.0, 0.3, 0.2, 0.1)
    ref = mcw(mp.beta, mp.hhat)
    errs = [abs(exact.morita_law(n, mp).mean - ref) for n in (100, 200, 400, 800)]
    ok = all(b < a for a, b in zip(errs, errs[1:])) and errs[-1] < 0.01
    return CheckResult(
        "07 approximant convergence", ok, "errors " + ", ".join(f"{x:.2e}" for x in errs) + " (decreasing, last < 0.01)"
    )


def criterion_concentration() -> CheckResult:
    s = solve_naive_system(REFERENCE, "+")
    law = exact.true_joint_law(600, REFERENCE, exact.POSITIVE_FIELD_SUM)
    mass_m = float(law.m_marginal[np.abs(law.m_bar - s.m) < 0.05].sum())
    mass_l = float(law.lambda_marginal[np.abs(law.lambda_n - s.lam) < 0.05].sum())
    return CheckResult(
        "08 concentration",
        mass_m >= 0.9 and mass_l >= 0.9,
        f"m*={s.m:.6f}, lambda*={s.lam:.6f}; mass near m* {mass_m:.4f}, near lambda* {mass_l:.4f} (>= 0.9)",
    )


def criterion_discontinuity() -> CheckResult:
    s = solve_naive_system(REFERENCE, "+")
    j = exact.lambda_jump(2000, REFERENCE)
    rel = abs(abs(j.jump) - 2 * abs(s.lam)) / (2 * abs(s.lam))
    j_sub = exact.lambda_jump(2000, ModelParams(0.8, 0.3, 0.0))
    ok = rel < 0.1 and abs(j_sub.jump) < 0.02
    return CheckResult(
        "09 discontinuity",
        ok,
        f"jump {j.jump:.6f} vs 2|lambda*| {2 * abs(s.lam):.6f} (rel {rel:.2e} < 0.1); "
        f"subcritical jump {j_sub.jump:.4f} (|.| < 0.02)",
    )


def criterion_hs() -> CheckResult:
    rng = np.random.default_rng(505)
    worst = 0.0
    for p in random_triples(3, 506):
        mp = MoritaParams(p, float(rng.uniform(-1.0, 1.0)))
        worst = max(worst, exact.verify_hs_representation(4, mp, seed=507).max_error)
    return CheckResult("10 Gaussian smoothing identity", worst < 1e-8, f"max error {worst:.3e} (< 1e-8)")


MC_PARAMS_SEED = 606


def mc_parameter_sets() -> list[MoritaParams]:
    rng = np.random.default_rng(MC_PARAMS_SEED)
    return [
        MoritaParams(p, float(rng.uniform(-1.0, 1.0)))
        for p in random_triples(5, MC_PARAMS_SEED + 1, beta=(0.2, 0.9))
    ]


def criterion_montecarlo() -> CheckResult:
    worst = 0.0
    reproducible = True
    for i, mp in enumerate(mc_parameter_sets()):
        cfg = montecarlo.McConfig(50, 20000, 2000, 9000 + i, montecarlo.MORITA, mp)
        est = montecarlo.sample(cfg)
        if i == 0:
            reproducible = montecarlo.sample(cfg) == est
        law = exact.morita_law(50, mp)
        z_spin = abs(est.mean_spin_average - law.mean) / est.std_error
        z_field = abs(est.mean_field_average - law.field_expectation) / est.field_std_error
        worst = max(worst, z_spin, z_field)
    return CheckResult(
        "11 Monte Carlo cross-check",
        worst < 3.0 and reproducible,
        f"max |z| {worst:.2f} (< 3), bit-reproducible: {reproducible}",
    )


def best_neutrality_lambda(n: int, params: ModelParams, lams) -> float:
    return float(min(lams, key=lambda l: abs(exact.morita_law(n, MoritaParams(params, float(l))).field_expectation)))


def criterion_conjecture() -> CheckResult:
    n = 800
    lam = best_neutrality_lambda(n, REFERENCE, np.linspace(-1.0, 1.0, 201))
    true_law = exact.true_spin_average_law(n, REFERENCE)
    tv = exact.total_variation(true_law, exact.morita_law(n, MoritaParams(REFERENCE, lam)).probabilities)
    return CheckResult("12 conjecture falsification", tv > 0.2, f"best lambda {lam:.3f}, TV distance {tv:.4f} (> 0.2)")


ACCEPTANCE = [
    criterion_identities,
    criterion_kernel,
    criterion_enumeration,
    criterion_naive_equivalence,
    criterion_metastability,
    criterion_gap,
    criterion_morita_convergence,
    criterion_concentration,
    criterion_discontinuity,
    criterion_hs,
    criterion_montecarlo,
    criterion_conjecture,
]


# --------------------------------------------------------------------------
# module invariants


def core_invariants() -> CheckResult:
    rng = np.random.default_rng(11)
    b = rng.uniform(0.1, 3.0, 1000)
    e = rng.uniform(0.01, 1.0, 1000)
    lam = rng.uniform(-10.0, 10.0, 1000)
    ok = True
    for bi, ei, li in zip(b, e, lam):
        v = hbar(bi, ei, li)
        ok &= abs(v + hbar(bi, ei, -li)) < 1e-14 and -ei < v < ei and hbar(bi, ei, li + 1e-3) > v
    hs = np.linspace(-1.0, 1.0, 201)
    ms = [mcw(2.0, h, Side.PLUS) for h in hs]
    ok &= all(y > x for x, y in zip(ms, ms[1:])) and mcw(1.0, 0.0, "+") == 0.0
    worst = 0.0
    for _ in range(50):
        mp = MoritaParams.of(rng.uniform(0.2, 3), rng.uniform(0, 1), rng.uniform(-1, 1), rng.uniform(-2, 2))
        m = float(rng.uniform(-2, 2))
        k = pi_kernel(m, mp)
        worst = max(
            worst,
            abs(k.sigma_mean - sigma_mean(m, mp)),
            abs(k.eta_mean - eta_mean(m, mp)),
            float(np.max(np.abs(k.p - pi_kernel_factorized(m, mp).p))),
            abs(k.p.sum() - 1.0),
        )
        grid = np.linspace(-2, 2, 41)
        diff = phi_hat(grid, mp) - grid**2 / 2 + np.log(np.cosh(mp.beta * (grid + mp.hhat))) / mp.beta
        worst = max(worst, float(np.ptp(diff)))
    ok &= worst < 1e-10
    return CheckResult("core invariants", bool(ok), f"max kernel/landscape discrepancy {worst:.1e}")


def solver_invariants() -> CheckResult:
    worst, checked, skipped, fails = 0.0, 0, 0, []
    for b in np.linspace(1.2, 4.0, 8):
        for e in np.linspace(0.05, 1.0, 8):
            p = ModelParams(float(b), float(e))
            try:
                s = solve_naive_system(p, "+")
            except NoSolutionError:
                skipped += 1
                continue
            checked += 1
            worst = max(worst, min(abs(s.m - r) for r in solve_quenched(p)))
            hh = s.morita_params.hhat
            if not (s.lam < 0 and hh < 0 and s.metastable):
                fails.append((b, e))
    p = REFERENCE
    l_min = neutral_l_min(p.beta, p.eps)
    ls = l_min + (p.beta * p.eps - l_min) * np.arange(1, 1001) / 1001
    h0s = [neutral_point_for_l(p, float(l)).h0 for l in ls]
    mono = all(y > x for x, y in zip(h0s, h0s[1:]))
    ok = not fails and worst < 1e-10 and mono
    return CheckResult(
        "solver invariants",
        ok,
        f"{checked} ordered-phase grid points checked ({skipped} without a positive root), "
        f"metastability failures {len(fails)}, neutral curve monotone: {mono}",
    )


def exact_invariants() -> CheckResult:
    p = ModelParams(2.0, 0.3, 0.1)
    variances = []
    for n in (100, 200, 400, 800):
        law = exact.true_joint_law(n, p)
        pm = law.m_marginal
        mu = pm @ law.m_bar
        variances.append(float(pm @ (law.m_bar - mu) ** 2))
        if abs(law.probabilities.sum() - 1.0) > 1e-12:
            return CheckResult("exact invariants", False, f"law at N={n} not normalized")
    ok = all(y < x for x, y in zip(variances, variances[1:]))
    return CheckResult("exact invariants", ok, "variance of m_bar " + ", ".join(f"{v:.2e}" for v in variances))


def montecarlo_invariants(sweeps: int = 1_000_000) -> CheckResult:
    mp = MoritaParams.of(0.8, 0.5, 0.1, -0.2)
    n = 3
    cfg = montecarlo.McConfig(n, sweeps, 1000, 77, montecarlo.MORITA, mp)
    _, _, codes = montecarlo.run_chain(cfg, record_codes=True)
    exact_p = np.exp(enumeration.morita_log_table(n, mp))  # (eta code, sigma code), site 1 = MSB
    worst = 0.0
    batches = np.array_split(codes, 100)
    for eta_code in range(2**n):
        for sig_code in range(2**n):
            # sampler codes: bit i <-> site i+1; enumeration codes: MSB <-> site 1
            s_bits = sum(((sig_code >> (n - 1 - i)) & 1) << i for i in range(n))
            e_bits = sum(((eta_code >> (n - 1 - i)) & 1) << i for i in range(n))
            c = s_bits | (e_bits << n)
            freqs = np.array([np.mean(b == c) for b in batches])
            se = freqs.std(ddof=1) / math.sqrt(len(freqs))
            z = abs(freqs.mean() - exact_p[eta_code, sig_code]) / se
            worst = max(worst, z)
    return CheckResult("montecarlo detailed balance", worst < 4.0, f"max cell |z| {worst:.2f} (< 4) over {sweeps} sweeps")


SUITES = {
    "acceptance": ACCEPTANCE,
    "core": [core_invariants],
    "solvers": [solver_invariants],
    "exact": [exact_invariants],
    "montecarlo": [montecarlo_invariants],
}
SUITES["all"] = SUITES["core"] + SUITES["solvers"] + SUITES["exact"] + SUITES["montecarlo"] + ACCEPTANCE


def run_suite(name: str, report=None) -> list[CheckResult]:
    results = []
    for check in SUITES[name]:
        r = check()
        if report is not None:
            report(r)
        results.append(r)
    return results
