"""gpvortex: numerical laboratory for vortex lattices in rotating 2D condensates."""

from .params import PhysicalParams, DerivedParams, derive_params, trap_profile, check_regime
from .field import (
    Grid2D,
    ScalarField,
    ComplexField,
    integrate,
    mass,
    covariant_kinetic_density,
    energy_F,
    energy_E,
    energy_G,
    energy_gl2d,
    local_energy,
    dump_field,
    load_field,
)

__version__ = "0.1.0"
