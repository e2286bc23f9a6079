"""Pseudo-spectral simulator for nematic liquid-crystal flow on the periodic
torus, instrumented with regularity monitors and an inequality test lab."""

from .grid import (
    Field,
    Grid,
    SpectralField,
    curl,
    dealias,
    derivative,
    divergence,
    forward,
    gradient,
    inverse,
    laplacian,
    leray_project,
    project_divergence_free,
)
from .norms import CubeFamily, bmo_norm, exhaustive_bmo_norm, grad_lp, lp_norm, sobolev_norm
from .monitor import (
    CriterionAccumulator,
    CriterionMonitor,
    DiagnosticsRecord,
    accumulate,
    criterion_integrand,
    energy_law_residual,
    energy_functional_update,
    gronwall_report,
)
from .dynamics import (
    Integrator,
    RunResult,
    SingularityError,
    SolverConfig,
    State,
    StepDivergedError,
    director_rhs,
    renormalize_director,
    run,
    step,
    velocity_rhs,
)
from .inequalities import (
    FieldCorpus,
    GNExponents,
    Spectrum,
    gn_ratio,
    interpolation_2_1_check,
    log_sobolev_terms,
    moser_ratio,
    unit_director_identities,
)
from .initial import make_initial, registered_initials
from .config import RunConfig, load_config, save_config

__version__ = "0.1.0"
