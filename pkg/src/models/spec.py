"""Model specification: classes, link, item-parameter constraints and dimensions."""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from ..utils.errors import SpecValidationError
from .link import LinkKind


class Discrimination(Enum):
    """Constraint on the discrimination indices gamma_j."""
    CONSTRAINED = 0  # gamma_j = 1 for every item (Rasch-type)
    FREE = 1

    @classmethod
    def parse(cls, value) -> "Discrimination":
        if isinstance(value, cls):
            return value
        if isinstance(value, str) and not value.strip().isdigit():
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise SpecValidationError(f"Unknown discrimination constraint {value!r}")
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise SpecValidationError(f"Unknown discrimination constraint {value!r}")


class Difficulty(Enum):
    """Constraint on the difficulty parameters beta_jx."""
    FREE = 0
    RATING_SCALE = 1  # beta_jx = beta_j + tau_x

    @classmethod
    def parse(cls, value) -> "Difficulty":
        if isinstance(value, cls):
            return value
        if isinstance(value, str) and not value.strip().isdigit():
            key = value.strip().upper().replace("-", "_")
            try:
                return cls[{"RS": "RATING_SCALE"}.get(key, key)]
            except KeyError:
                raise SpecValidationError(f"Unknown difficulty constraint {value!r}")
        try:
            return cls(int(value))
        except (ValueError, TypeError):
            raise SpecValidationError(f"Unknown difficulty constraint {value!r}")


def each_item(r: int) -> tuple[tuple[int, ...], ...]:
    """One dimension per item."""
    return tuple((j,) for j in range(r))


def unidimensional(r: int) -> tuple[tuple[int, ...], ...]:
    return (tuple(range(r)),)


@dataclass(frozen=True)
class ModelSpec:
    """
    The choices that define a model.

    Attributes:
        k: number of latent classes
        link: NONE (standard LC model), GLOBAL or LOCAL
        disc: constrained (gamma_j = 1) or free discriminations
        difl: free or rating-scale difficulties
        multi: partition of the 0-based items into dimension groups; the
            first item of each group is its reference item
        cats: category count l_j per item
    """
    k: int
    link: LinkKind
    cats: tuple[int, ...]
    disc: Discrimination = Discrimination.CONSTRAINED
    difl: Difficulty = Difficulty.FREE
    multi: Optional[tuple[tuple[int, ...], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "link", LinkKind.parse(self.link))
        object.__setattr__(self, "disc", Discrimination.parse(self.disc))
        object.__setattr__(self, "difl", Difficulty.parse(self.difl))
        object.__setattr__(self, "cats", tuple(int(c) for c in self.cats))
        r = len(self.cats)
        multi = unidimensional(r) if self.multi is None else tuple(tuple(int(j) for j in g) for g in self.multi)
        object.__setattr__(self, "multi", multi)

        if int(self.k) < 1:
            raise SpecValidationError(f"k must be at least 1, got {self.k}")
        object.__setattr__(self, "k", int(self.k))
        if r < 1:
            raise SpecValidationError("A model needs at least one item")
        if min(self.cats) < 2:
            raise SpecValidationError("Every item needs at least 2 categories")

        flat = [j for g in multi for j in g]
        if any(len(g) == 0 for g in multi):
            raise SpecValidationError("Dimension groups must be nonempty")
        if sorted(flat) != list(range(r)):
            raise SpecValidationError(
                f"multi must partition items 1..{r}; got {[[j + 1 for j in g] for g in multi]}"
            )
        if self.difl is Difficulty.RATING_SCALE and self.link is not LinkKind.NONE and len(set(self.cats)) > 1:
            raise SpecValidationError("Rating-scale difficulties need the same number of categories on every item")

    @classmethod
    def build(
        cls,
        k: int,
        link,
        cats: Sequence[int],
        disc=Discrimination.CONSTRAINED,
        difl=Difficulty.FREE,
        multi: Optional[Sequence[Sequence[int]]] = None,
    ) -> "ModelSpec":
        """Build from loosely typed values; `multi` is 0-based."""
        return cls(
            k=k,
            link=LinkKind.parse(link),
            cats=tuple(cats),
            disc=Discrimination.parse(disc),
            difl=Difficulty.parse(difl),
            multi=None if multi is None else tuple(tuple(g) for g in multi),
        )

    @property
    def r(self) -> int:
        return len(self.cats)

    @property
    def s(self) -> int:
        return len(self.multi)

    @property
    def is_standard_lc(self) -> bool:
        return self.link is LinkKind.NONE

    @property
    def free_disc(self) -> bool:
        return self.disc is Discrimination.FREE

    @property
    def rating_scale(self) -> bool:
        return self.difl is Difficulty.RATING_SCALE

    @property
    def l(self) -> int:
        """Common category count (rating-scale models)."""
        return self.cats[0]

    @property
    def dimension_of(self) -> np.ndarray:
        """Dimension index of each item."""
        out = np.empty(self.r, dtype=np.int64)
        for d, group in enumerate(self.multi):
            out[list(group)] = d
        return out

    @property
    def reference_items(self) -> tuple[int, ...]:
        """First listed item of each dimension."""
        return tuple(g[0] for g in self.multi)

    def with_multi(self, multi: Sequence[Sequence[int]]) -> "ModelSpec":
        return replace(self, multi=tuple(tuple(g) for g in multi))

    def with_k(self, k: int) -> "ModelSpec":
        return replace(self, k=k)

    def label(self) -> str:
        """Short human-readable summary."""
        if self.is_standard_lc:
            return f"LC k={self.k}"
        disc = "free-disc" if self.free_disc else "1P"
        difl = "RS" if self.rating_scale else "free-difl"
        return f"{self.link.label} k={self.k} s={self.s} {disc} {difl}"

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "link": self.link.label,
            "disc": self.disc.name.lower(),
            "difl": self.difl.name.lower(),
            "multi": [[j + 1 for j in g] for g in self.multi],
            "cats": list(self.cats),
        }
