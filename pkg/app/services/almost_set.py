"""Code sets with finite symmetric difference to A, its complement, everything or nothing."""
import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable

from app.services.semilattice import EngineError, UniverseConfig

logger = logging.getLogger(__name__)

# Base names mapped to a color mask: bit 1 covers A-colored codes, bit 2 the rest.
BASE_MASKS = {"NONE": 0, "A": 1, "CoA": 2, "ALL": 3}
MASK_BASES = {mask: name for name, mask in BASE_MASKS.items()}


class InvalidAlmostSetError(EngineError):
    """Raised for an unknown base name or overlapping edits."""
    pass


@dataclass(frozen=True)
class AlmostSet:
    base: str
    added: FrozenSet[int] = frozenset()
    removed: FrozenSet[int] = frozenset()

    def __post_init__(self):
        if self.base not in BASE_MASKS:
            raise InvalidAlmostSetError(f"Unknown almost-set base {self.base!r}")
        added = frozenset(self.added)
        removed = frozenset(self.removed)
        if added & removed:
            raise InvalidAlmostSetError(f"Codes both added and removed: {sorted(added & removed)}")
        object.__setattr__(self, "added", added)
        object.__setattr__(self, "removed", removed)

    @property
    def mask(self) -> int:
        return BASE_MASKS[self.base]

    @property
    def support(self) -> FrozenSet[int]:
        return self.added | self.removed

    @property
    def almost_equal_to_a(self) -> bool:
        return self.base == "A"

    def in_base(self, code: int, universe: UniverseConfig) -> bool:
        bit = 1 if universe.in_a(code) else 2
        return bool(self.mask & bit)

    def contains(self, code: int, universe: UniverseConfig) -> bool:
        if code in self.added:
            return True
        if code in self.removed:
            return False
        return self.in_base(code, universe)

    def contains_color(self, in_a: bool) -> bool:
        """Membership of a code outside the edit sets, known from its color alone."""
        return bool(self.mask & (1 if in_a else 2))

    def normalized(self, universe: UniverseConfig) -> "AlmostSet":
        """Drop edits that do not change membership under this universe."""
        added = frozenset(c for c in self.added if not self.in_base(c, universe))
        removed = frozenset(c for c in self.removed if self.in_base(c, universe))
        return AlmostSet(self.base, added, removed)

    def _combine(self, other: "AlmostSet", mask: int, universe: UniverseConfig, member) -> "AlmostSet":
        result_base = MASK_BASES[mask]
        added, removed = set(), set()
        for code in self.support | other.support:
            inside = member(code)
            in_base = bool(mask & (1 if universe.in_a(code) else 2))
            if inside and not in_base:
                added.add(code)
            elif not inside and in_base:
                removed.add(code)
        return AlmostSet(result_base, frozenset(added), frozenset(removed))

    def union(self, other: "AlmostSet", universe: UniverseConfig) -> "AlmostSet":
        return self._combine(other, self.mask | other.mask, universe,
                             lambda c: self.contains(c, universe) or other.contains(c, universe))

    def intersection(self, other: "AlmostSet", universe: UniverseConfig) -> "AlmostSet":
        return self._combine(other, self.mask & other.mask, universe,
                             lambda c: self.contains(c, universe) and other.contains(c, universe))

    def complement(self) -> "AlmostSet":
        return AlmostSet(MASK_BASES[3 - self.mask], self.removed, self.added)

    def with_added(self, codes: Iterable[int], universe: UniverseConfig) -> "AlmostSet":
        return self.union(AlmostSet("NONE", frozenset(codes)), universe)

    def with_removed(self, codes: Iterable[int], universe: UniverseConfig) -> "AlmostSet":
        return self.intersection(AlmostSet("ALL", removed=frozenset(codes)), universe)

    def __str__(self) -> str:
        added = " ".join(str(c) for c in sorted(self.added))
        removed = " ".join(str(c) for c in sorted(self.removed))
        return f"(almost {self.base} + [{added}] - [{removed}])"


A_SET = AlmostSet("A")
CO_A_SET = AlmostSet("CoA")
ALL_SET = AlmostSet("ALL")
NONE_SET = AlmostSet("NONE")
