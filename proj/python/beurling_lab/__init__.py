"""Generalized prime systems: enumeration, densities, transfer chain and smoothing."""

from ._beurling import (
    CapacityError,
    ConditioningError,
    ConfigError,
    DomainError,
    PoleError,
    ResolutionError,
    ToleranceError,
    UnsupportedError,
    density,
    density_via_c1,
    diamond_integral,
    euler_density,
    fourier_counting,
    generate,
    holder_modulus,
    run,
    sieve_primes,
    smooth_counting,
    tau,
    transfer,
    validate_config,
    verify,
)

__all__ = [
    "CapacityError",
    "ConditioningError",
    "ConfigError",
    "DomainError",
    "PoleError",
    "ResolutionError",
    "ToleranceError",
    "UnsupportedError",
    "density",
    "density_via_c1",
    "diamond_integral",
    "euler_density",
    "fourier_counting",
    "generate",
    "holder_modulus",
    "run",
    "sieve_primes",
    "smooth_counting",
    "tau",
    "transfer",
    "validate_config",
    "verify",
]
