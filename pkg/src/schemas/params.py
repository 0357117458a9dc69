"""Pydantic schemas for parameter files and simulation truth."""
from typing import Optional, Union

from pydantic import BaseModel, Field, field_validator

from ..models import ModelSpec, ParameterSet
from .spec import ModelSpecSchema


class ParameterSetSchema(BaseModel):
    weights: list[float] = Field(..., min_length=1)
    support_points: Optional[list[list[float]]] = None
    difficulties: Optional[Union[list[list[float]], list[float]]] = None
    category_steps: Optional[list[float]] = None
    discriminations: Optional[list[float]] = None
    probs: Optional[list[list[list[float]]]] = None

    @field_validator("weights")
    @classmethod
    def positive_weights(cls, v: list[float]) -> list[float]:
        if any(w < 0 for w in v) or sum(v) <= 0:
            raise ValueError("weights must be nonnegative with a positive sum")
        return v

    def to_params(self, spec: ModelSpec) -> ParameterSet:
        return ParameterSet.from_dict(self.model_dump(exclude_none=True), spec)


class TruthSchema(BaseModel):
    spec: ModelSpecSchema
    params: ParameterSetSchema
    n: Optional[int] = Field(None, ge=1)
    seed: Optional[int] = None
    missing_rate: float = Field(0.0, ge=0.0, lt=1.0)

    def to_spec(self) -> ModelSpec:
        return self.spec.to_spec()

    def to_params(self) -> ParameterSet:
        return self.params.to_params(self.to_spec())
