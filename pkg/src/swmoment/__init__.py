"""Finite-volume solver suite for shallow water moment models.

Provides the classical shallow water equations, their hyperbolic moment
extensions, and modified variants whose friction source stays bounded in
the non-slip limit, together with dam-break scenarios, a reference-data
comparison pipeline and a CSV-emitting command line driver.
"""

from .basis import (
    BasisTensors,
    MomentCoefficients,
    build_tensors,
    legendre_phi,
    project_profile,
    reconstruct_velocity,
    shared_tensors,
)
from .models import (
    DegenerateStateError,
    ModelSpec,
    MomentState,
    classify_hyperbolicity,
    compute_bar_gamma,
    max_wave_speed,
    source_modified,
    source_standard,
    system_matrices,
)
from .scenarios import (
    PhysicalSetup,
    ScenarioConfig,
    collapse_with_inflow_2d,
    dambreak_1d,
    model_spec,
    nondimensionalize,
    radial_collapse_2d,
    redimensionalize_profile,
)
from .solver import (
    GridField,
    Snapshot,
    StepFailure,
    StepReport,
    apply_boundary,
    cfl_dt,
    fluctuations,
    run,
    step_explicit,
    step_semi_implicit,
)

__version__ = "0.1.0"
