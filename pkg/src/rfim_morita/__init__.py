"""Mean-field random-field Ising model, its one-parameter approximant, and exact finite-N checks."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    ModelParams,
    MoritaParams,
    Side,
    SingleSiteKernel,
    eta_mean,
    hbar,
    mcw,
    phi_hat,
    pi_kernel,
    sigma_mean,
)
from .solvers import (  # noqa: E402
    classify_landscape,
    compute_gap,
    limiting_field_expectation,
    neutral_point_for_l,
    solve_naive_system,
    solve_quenched,
    trace_neutral_curve,
)

__all__ = [
    "ModelParams",
    "MoritaParams",
    "Side",
    "SingleSiteKernel",
    "classify_landscape",
    "compute_gap",
    "eta_mean",
    "hbar",
    "limiting_field_expectation",
    "mcw",
    "neutral_point_for_l",
    "phi_hat",
    "pi_kernel",
    "sigma_mean",
    "solve_naive_system",
    "solve_quenched",
    "trace_neutral_curve",
]
