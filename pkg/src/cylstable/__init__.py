"""Cylindrical alpha-stable SDEs, Littlewood-Paley analysis and nonlocal heat kernels."""

from .errors import (AssumptionError, ConfigError, CylStableError, DomainError, GateError,
                     QuadratureError, ResolutionError)
from .models import CoefficientModel, from_preset, validate_assumptions
from .noise import StableSpec, levy_constant, sample_increments, sample_standard_stable
from .sde import PathBatch, simulate

__version__ = "0.1.0"
