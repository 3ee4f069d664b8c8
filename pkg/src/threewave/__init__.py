"""Radial numerics for the energy-critical Schrodinger system with three-wave coupling.

Submodules
----------
radial_core
    Grids, radial quadrature, derivatives and the sine transform.
functionals
    Energy, masses, Pohozaev functional, fiber maps and the h-function geometry.
reference_solutions
    The soliton ``W``, the Sobolev bubble and the sharp constants built on them.
variational_solvers
    Ground states, excited states, the limit problem and the mass-collapse sweep.
dynamics
    Strang-splitting time integrator, monitors and the experiment drivers.
cli
    Config parsing, presets and the ``threewave`` command.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConstraintError,
    GeometryError,
    InputError,
    IntegratorError,
    ResolutionError,
    ShootingBracketError,
    SubcriticalityError,
    ThreeWaveError,
)
from .radial_core import Field, FieldTriple, RadialGrid  # noqa: E402
from .functionals import (  # noqa: E402
    Classification,
    PhysParams,
    classify_pohozaev,
    coupling,
    dilate,
    energy,
    energy_limit,
    fiber,
    fiber_critical_points,
    fiber_integrals,
    geometry_constants,
    in_M,
    masses,
    pohozaev,
    threshold_D,
    threshold_D0,
)
from .reference_solutions import reference_soliton, solve_W, sobolev_constant  # noqa: E402
from .variational_solvers import (  # noqa: E402
    CollapseRecord,
    StationaryState,
    excited_state,
    ground_state,
    limit_ground_state,
    mass_collapse_sweep,
)
from .dynamics import (  # noqa: E402
    evolve,
    gauge_distance,
    instability_experiment,
    scattering_diagnostic,
    stability_experiment,
    virial,
    virial_check,
)

__all__ = [
    "__version__",
    "ThreeWaveError", "InputError", "ResolutionError", "ShootingBracketError",
    "GeometryError", "ConstraintError", "SubcriticalityError", "IntegratorError",
    "RadialGrid", "Field", "FieldTriple",
    "PhysParams", "Classification", "energy", "energy_limit", "masses", "pohozaev",
    "coupling", "in_M", "dilate", "fiber", "fiber_integrals", "classify_pohozaev",
    "fiber_critical_points", "geometry_constants", "threshold_D", "threshold_D0",
    "solve_W", "reference_soliton", "sobolev_constant",
    "StationaryState", "CollapseRecord", "ground_state", "excited_state",
    "limit_ground_state", "mass_collapse_sweep",
    "evolve", "virial", "virial_check", "gauge_distance",
    "stability_experiment", "instability_experiment", "scattering_diagnostic",
]
