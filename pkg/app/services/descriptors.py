"""Finite descriptors of basic open sets.

A descriptor is data, not a set: membership is evaluated by the base formula
and never by enumeration.
"""
import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Tuple, Union

from app.services.almost_set import AlmostSet
from app.services.semilattice import EngineError, Point, UniverseConfig, ZERO, leq, sorted_points

logger = logging.getLogger(__name__)


class InvalidDescriptorError(EngineError):
    """Raised for malformed descriptors or descriptors foreign to a topology."""
    pass


@dataclass(frozen=True)
class Whole:
    @property
    def anchor(self) -> Point:
        return ZERO

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset()

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        return True

    def __str__(self) -> str:
        return "(whole)"


@dataclass(frozen=True)
class IsolatedPoint:
    point: Point

    @property
    def anchor(self) -> Point:
        return self.point

    @property
    def support(self) -> FrozenSet[int]:
        return self.point.codes

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        return p == self.point

    def __str__(self) -> str:
        return f"(iso {self.point})"


@dataclass(frozen=True)
class UpMinus:
    """↑anchor minus the up-sets of the exclusions."""
    anchor: Point
    exclusions: Tuple[Point, ...] = ()

    def __post_init__(self):
        exclusions = tuple(sorted_points(self.exclusions))
        for e in exclusions:
            if e == self.anchor or not leq(self.anchor, e):
                raise InvalidDescriptorError(f"Exclusion {e} is not strictly above {self.anchor}")
        object.__setattr__(self, "exclusions", exclusions)

    @property
    def support(self) -> FrozenSet[int]:
        codes = set(self.anchor.elems)
        for e in self.exclusions:
            codes.update(e.elems)
        return frozenset(codes)

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        if not leq(self.anchor, p):
            return False
        return not any(leq(e, p) for e in self.exclusions)

    def excluding(self, extra: Iterable[Point]) -> "UpMinus":
        return UpMinus(self.anchor, self.exclusions + tuple(extra))

    def __str__(self) -> str:
        inner = " ".join(str(e) for e in self.exclusions)
        return f"(upminus {self.anchor} [{inner}])"


@dataclass(frozen=True)
class FcZero:
    """base minus Cyl(anchor, B): the singleton image π(B) transported above the anchor."""
    base: UpMinus
    b: AlmostSet

    def __post_init__(self):
        if not isinstance(self.base, UpMinus):
            raise InvalidDescriptorError("fczero needs an upminus base")
        if not self.b.almost_equal_to_a:
            raise InvalidDescriptorError(f"{self.b} is not almost equal to A")

    @property
    def anchor(self) -> Point:
        return self.base.anchor

    @property
    def support(self) -> FrozenSet[int]:
        return self.base.support | self.b.support

    def removes(self, p: Point, universe: UniverseConfig) -> bool:
        anchor = self.base.anchor
        if p.rank != anchor.rank + 1 or not leq(anchor, p):
            return False
        extra = p.difference(anchor).elems[0]
        return self.b.contains(extra, universe)

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        return self.base.contains(p, universe) and not self.removes(p, universe)

    def __str__(self) -> str:
        return f"(fczero {self.base} {self.b})"


OpenDescriptor = Union[Whole, IsolatedPoint, UpMinus, FcZero]
