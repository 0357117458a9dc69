from .config import config, Config
from .logger import get_logger, log_fit
from .settings import settings, get_settings, Settings
from .errors import (
    LcirtError,
    ResponseValidationError,
    EmptyDataError,
    MissingColumnError,
    SpecValidationError,
    InfeasibleLogitsError,
    DegenerateLikelihoodError,
    NotNestedError,
)

__all__ = [
    "config", "Config",
    "get_logger", "log_fit",
    "settings", "get_settings", "Settings",
    "LcirtError",
    "ResponseValidationError",
    "EmptyDataError",
    "MissingColumnError",
    "SpecValidationError",
    "InfeasibleLogitsError",
    "DegenerateLikelihoodError",
    "NotNestedError",
]
