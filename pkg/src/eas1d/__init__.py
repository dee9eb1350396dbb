"""Simulator for 1D periodic Euler-alignment dynamics with misalignment."""
from .config import RunConfig, load_config, parse_config, serialize_config
from .dynamics import SimState, Trajectory, run
from .errors import (BlowupSuspected, ConfigError, DomainError, EASError, NumericError,
                     PreconditionError, RangeError, StateError)
from .field import Field, Grid
from .kernel import GeneralKernel, PeriodizedKernel, PowerLawPairKernel, levy_normalization
from .symbol import SymbolTable, symbol_table, verify_symbol_bounds

__all__ = [
    "RunConfig", "load_config", "parse_config", "serialize_config",
    "SimState", "Trajectory", "run",
    "BlowupSuspected", "ConfigError", "DomainError", "EASError", "NumericError",
    "PreconditionError", "RangeError", "StateError",
    "Field", "Grid",
    "GeneralKernel", "PeriodizedKernel", "PowerLawPairKernel", "levy_normalization",
    "SymbolTable", "symbol_table", "verify_symbol_bounds",
]
__version__ = "0.1.0"
