"""Four-level dark-resonance laser cooling in recoil units."""

from ._core import (
    AtomSpecies,
    ConfigError,
    DomainError,
    DriveConfig,
    FitError,
    GridError,
    IntegratorError,
    NonUniqueSteadyState,
    NumericalError,
    RecoilScales,
    __version__,
    chi,
    diffusion,
    ensemble_temperature,
    friction,
    from_recoil_units,
    liouvillian,
    philox,
    preset,
    recoil_scales,
    run_trajectory,
    species,
    spectrum,
    steady_state,
    temperature,
    three_level_chi,
    to_recoil_units,
    validate_unraveling,
)

__all__ = [name for name in dir() if not name.startswith("_")]
