from .spec import ModelSpecSchema, ModelGridSchema, resolve_structure
from .params import ParameterSetSchema, TruthSchema

__all__ = [
    "ModelSpecSchema",
    "ModelGridSchema",
    "resolve_structure",
    "ParameterSetSchema",
    "TruthSchema",
]
