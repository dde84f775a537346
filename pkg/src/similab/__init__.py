"""Numerical laboratory for self-similar blowup of corotational wave maps.

The closed-form blowup profile phi(rho) = (2/rho) arctan(rho/sqrt(d-2))
becomes a static state of the first-order similarity-variable system;
this package evolves perturbations of it, verifies the spectral-gap
structure of the linearization by a Frobenius connection problem, and
reproduces the nonlinear stability statement at desk scale (perturbation
decay, blowup-time extraction, gauge-mode handling, fractional Sobolev
diagnostics).
"""

from .errors import (
    ConfigError,
    DivergenceError,
    ExtractionError,
    ResonanceError,
    SimilabError,
    SolverError,
)
from .grid import RadialField, RadialGrid, State, apply_lambda, apply_laplacian, interpolate, make_grid
from .profiles import (
    Dimension,
    ProfileParams,
    eta,
    gauge_mode,
    nonlin_n,
    nonlin_n0,
    phi,
    phi_prime,
    potential_v,
    static_state,
)
from .simvars import (
    PhysicalPair,
    blowup_family_pair,
    coords_to_similarity,
    fields_to_similarity,
    from_similarity,
    initial_data_u,
)
from .evolver import (
    Evolver,
    EvolverConfig,
    Trajectory,
    deflate_gauge,
    rhs_free,
    rhs_linearized,
    rhs_nonlinear,
    rhs_total,
    static_residual,
)
from .sobolev import (
    NormSpec,
    SpectralField,
    hankel_forward,
    hs_norm,
    hsk_norm,
    l2_norm,
    schauder_ratio,
    strauss_ratio,
)
from .spectral import (
    FrobeniusSolution,
    SpectralProblem,
    connection_mismatch,
    eigenvalue_scan,
    gauge_ode_residual,
    resolvent_solve,
    series_at_one,
    series_at_zero,
)
from .driver import (
    ExperimentConfig,
    StabilityReport,
    extract_blowup_time,
    fit_decay_rate,
    parse_config,
    run_evolve,
    run_norms,
    run_spectrum,
    run_stability,
    selftest,
)

__version__ = "0.1.0"
