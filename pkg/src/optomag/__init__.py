"""Squeezing-enhanced spin-magnon coupling through a pair of optomechanical cavities.

Modules
-------
params      closed-form reduction cascade and validity checks
quadratic   two-mode quadratic forms, Bogoliubov maps, decay-dressed spectra
fock        truncated Fock spaces and the Hamiltonian of every reduction level
dynamics    closed and Lindblad time evolution
scenarios   configuration files, reproduction protocols and the CLI
"""

from .errors import (CascadeError, ConfigError, NumericalError, OptomagError, RegimeError,
                     SteadyStateError, UnstableFormError)
from .params import DerivedParams, Overrides, PhysicalParams, derive, validate_regime

__version__ = "0.1.0"

__all__ = [
    "CascadeError", "ConfigError", "NumericalError", "OptomagError", "RegimeError",
    "SteadyStateError", "UnstableFormError",
    "DerivedParams", "Overrides", "PhysicalParams", "derive", "validate_regime",
]
