"""hslab: a numerical laboratory for saturated tumor growth.

Two solvers for the same congestion model: a finite-stiffness pressure law
(n^gamma) integrated explicitly, and its stiff limit advanced through an
obstacle problem for the time-integrated pressure.  Geometry instruments
measure the moving interface; diagnostics compress structural properties
of the solutions into pass/fail checks.
"""

__version__ = "0.1.0"

from .barriers import Barrier, cosh_profile, front_speed, integrate_front_ode, stiffness_rate
from .diagnostics import CheckResult, DiagnosticsReport, PmeRunData, default_suite
from .geometry import (
    flatness_ratio,
    front_position_1d,
    hausdorff_distance,
    lebesgue_density,
    minimal_diameter,
    neighborhood,
    positivity_set,
    radial_bounds,
)
from .grid import (
    Grid,
    RegionMask,
    ScalarField,
    flux_divergence,
    grad_sq,
    integrate,
    laplacian,
)
from .growth import GrowthLaw
from .heleshaw import (
    HsRunConfig,
    HsSolverError,
    HsState,
    hs_run,
    hs_step,
    initial_state,
    mass_of,
    pressure_mass_bound,
    solve_pressure_on_region,
)
from .obstacle import (
    ObstacleDivergenceError,
    ObstacleSolution,
    ObstacleSpec,
    complementarity_residual,
    discrete_energy,
    equation_residual,
    omega_near_optimal,
    psor_solve,
)
from .pme import (
    PmeInstabilityError,
    PmeState,
    pme_run,
    pme_step,
    pressure_of,
    scale_initial_data,
    snapshot_times,
    stable_dt,
    total_mass,
)
from .snapshots import Snapshot, SnapshotFormatError, read_snapshot, write_snapshot

__all__ = [
    "__version__",
    "Barrier",
    "CheckResult",
    "DiagnosticsReport",
    "Grid",
    "GrowthLaw",
    "HsRunConfig",
    "HsSolverError",
    "HsState",
    "ObstacleDivergenceError",
    "ObstacleSolution",
    "ObstacleSpec",
    "PmeInstabilityError",
    "PmeRunData",
    "PmeState",
    "RegionMask",
    "ScalarField",
    "Snapshot",
    "SnapshotFormatError",
    "complementarity_residual",
    "cosh_profile",
    "default_suite",
    "discrete_energy",
    "equation_residual",
    "flatness_ratio",
    "flux_divergence",
    "front_position_1d",
    "front_speed",
    "grad_sq",
    "hausdorff_distance",
    "hs_run",
    "hs_step",
    "initial_state",
    "integrate",
    "integrate_front_ode",
    "laplacian",
    "lebesgue_density",
    "mass_of",
    "minimal_diameter",
    "neighborhood",
    "omega_near_optimal",
    "pme_run",
    "pme_step",
    "positivity_set",
    "pressure_mass_bound",
    "pressure_of",
    "psor_solve",
    "radial_bounds",
    "read_snapshot",
    "scale_initial_data",
    "snapshot_times",
    "solve_pressure_on_region",
    "stable_dt",
    "stiffness_rate",
    "total_mass",
    "write_snapshot",
]
