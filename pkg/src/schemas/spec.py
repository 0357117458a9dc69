"""Pydantic schemas for model specifications and model grids."""
from itertools import product
from typing import Literal, Optional, Sequence, Union

from pydantic import BaseModel, Field, field_validator

from ..models import LinkKind, ModelSpec, each_item, unidimensional
from ..utils import get_logger
from ..utils.errors import SpecValidationError

logger = get_logger(__name__)

Structure = Union[Literal["unidimensional", "each-item"], list[list[int]]]


def resolve_structure(structure: Optional[Structure], r: int) -> tuple[tuple[int, ...], ...]:
    """0-based groups from a keyword or from 1-based item lists."""
    if structure is None or structure == "unidimensional":
        return unidimensional(r)
    if structure == "each-item":
        return each_item(r)
    groups = tuple(tuple(j - 1 for j in group) for group in structure)
    bad = [j + 1 for g in groups for j in g if not 0 <= j < r]
    if bad:
        raise SpecValidationError(f"multi refers to items {bad} outside 1..{r}")
    return groups


class ModelSpecSchema(BaseModel):
    k: int = Field(..., ge=1)
    link: Union[int, str] = "global"
    disc: Union[int, str] = "constrained"
    difl: Union[int, str] = "free"
    multi: Optional[Structure] = None
    cats: Optional[list[int]] = None

    @field_validator("multi")
    @classmethod
    def one_based(cls, v):
        if isinstance(v, list) and any(j < 1 for group in v for j in group):
            raise ValueError("items in multi are numbered from 1")
        return v

    def to_spec(self, cats: Optional[Sequence[int]] = None) -> ModelSpec:
        """ModelSpec using `cats` from the data unless the schema fixes them."""
        cats = self.cats if self.cats is not None else cats
        if cats is None:
            raise SpecValidationError("Category counts are needed to build a spec")
        return ModelSpec.build(
            k=self.k,
            link=self.link,
            cats=cats,
            disc=self.disc,
            difl=self.difl,
            multi=resolve_structure(self.multi, len(cats)),
        )


class ModelGridSchema(BaseModel):
    k: list[int] = Field(..., min_length=1)
    link: list[Union[int, str]] = Field(default_factory=lambda: ["global"])
    disc: list[Union[int, str]] = Field(default_factory=lambda: ["constrained"])
    difl: list[Union[int, str]] = Field(default_factory=lambda: ["free"])
    structures: dict[str, Structure] = Field(default_factory=lambda: {"unidimensional": "unidimensional"})

    @field_validator("k")
    @classmethod
    def positive(cls, v: list[int]) -> list[int]:
        if any(k < 1 for k in v):
            raise ValueError("every k must be at least 1")
        return v

    def to_specs(self, cats: Sequence[int]) -> list[ModelSpec]:
        """Every valid combination; the LC model appears once per k."""
        specs, seen = [], set()
        for k, link, disc, difl, name in product(self.k, self.link, self.disc, self.difl, self.structures):
            if LinkKind.parse(link) is LinkKind.NONE:
                disc, difl, name = "constrained", "free", "unidimensional"
            try:
                spec = ModelSpec.build(
                    k, link, cats, disc, difl,
                    resolve_structure(self.structures.get(name, "unidimensional"), len(cats)),
                )
            except SpecValidationError as e:
                logger.warning(f"Skipping grid entry k={k} link={link} disc={disc} difl={difl} {name}: {e}")
                continue
            if spec not in seen:
                seen.add(spec)
                specs.append(spec)
        return specs
