"""Definable sets over exp_n λ and their finite-support pattern semantics."""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple, Union

from app.services.almost_set import AlmostSet
from app.services.descriptors import OpenDescriptor
from app.services.semilattice import Point, UniverseConfig, all_points, leq, sorted_points

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UpSet:
    point: Point

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        return leq(self.point, p)

    @property
    def support(self) -> FrozenSet[int]:
        return self.point.codes

    def __str__(self) -> str:
        return f"(up {self.point})"


@dataclass(frozen=True)
class FinitePoints:
    points: Tuple[Point, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted_points(self.points)))

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        return p in self.points

    @property
    def support(self) -> FrozenSet[int]:
        codes = set()
        for p in self.points:
            codes.update(p.elems)
        return frozenset(codes)

    def __str__(self) -> str:
        if not self.points:
            return "(pts)"
        return "(pts " + " ".join(str(p) for p in self.points) + ")"


@dataclass(frozen=True)
class LevelLE:
    k: int

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        return p.rank <= self.k

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset()

    def __str__(self) -> str:
        return f"(lev {self.k})"


@dataclass(frozen=True)
class Cyl:
    """Points F ∪ {c} with c ∉ F and c ∈ B."""
    base: Point
    b: AlmostSet

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        if p.rank != self.base.rank + 1 or not leq(self.base, p):
            return False
        extra = p.difference(self.base).elems[0]
        return self.b.contains(extra, universe)

    @property
    def support(self) -> FrozenSet[int]:
        return self.base.codes | self.b.support

    def __str__(self) -> str:
        return f"(cyl {self.base} {self.b})"


@dataclass(frozen=True)
class Open:
    descriptor: OpenDescriptor

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        return self.descriptor.contains(p, universe)

    @property
    def support(self) -> FrozenSet[int]:
        return self.descriptor.support

    def __str__(self) -> str:
        return f"(open {self.descriptor})"


@dataclass(frozen=True)
class Not:
    arg: "SetExpr"

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        return not self.arg.contains(p, universe)

    @property
    def support(self) -> FrozenSet[int]:
        return self.arg.support

    def __str__(self) -> str:
        return f"(not {self.arg})"


@dataclass(frozen=True)
class And:
    args: Tuple["SetExpr", ...] = ()

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        return all(a.contains(p, universe) for a in self.args)

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset().union(*(a.support for a in self.args))

    def __str__(self) -> str:
        return "(and" + "".join(" " + str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class Or:
    args: Tuple["SetExpr", ...] = ()

    def contains(self, p: Point, universe: UniverseConfig) -> bool:
        return any(a.contains(p, universe) for a in self.args)

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset().union(*(a.support for a in self.args))

    def __str__(self) -> str:
        return "(or" + "".join(" " + str(a) for a in self.args) + ")"


SetExpr = Union[UpSet, FinitePoints, LevelLE, Cyl, Open, Not, And, Or]
ATOMS = (UpSet, FinitePoints, LevelLE, Cyl, Open)

WHOLE = And(())
EMPTY = Or(())


def union(*args: SetExpr) -> SetExpr:
    return args[0] if len(args) == 1 else Or(tuple(args))


def intersect(*args: SetExpr) -> SetExpr:
    return args[0] if len(args) == 1 else And(tuple(args))


def difference(s: SetExpr, t: SetExpr) -> SetExpr:
    return And((s, Not(t)))


def nnf(s: SetExpr) -> SetExpr:
    """Negation normal form with flattened conjunctions and disjunctions."""
    if isinstance(s, Not):
        inner = s.arg
        if isinstance(inner, Not):
            return nnf(inner.arg)
        if isinstance(inner, And):
            return nnf(Or(tuple(Not(a) for a in inner.args)))
        if isinstance(inner, Or):
            return nnf(And(tuple(Not(a) for a in inner.args)))
        return s
    if isinstance(s, (And, Or)):
        flat = []
        for a in s.args:
            a = nnf(a)
            if type(a) is type(s):
                flat.extend(a.args)
            else:
                flat.append(a)
        return type(s)(tuple(flat))
    return s


@dataclass(frozen=True)
class Pattern:
    """Support codes taken plus counts of fresh A-colored and non-A codes."""
    taken: Point
    fresh_a: int
    fresh_n: int

    @property
    def size(self) -> int:
        return self.taken.rank + self.fresh_a + self.fresh_n

    @property
    def fresh(self) -> int:
        return self.fresh_a + self.fresh_n

    def __str__(self) -> str:
        return f"<{self.taken} +A{self.fresh_a} +N{self.fresh_n}>"


@dataclass
class PatternTable:
    codes: FrozenSet[int]
    entries: Dict[Pattern, bool] = field(default_factory=dict)

    def members(self) -> List[Pattern]:
        return [pattern for pattern, inside in self.entries.items() if inside]

    def __getitem__(self, pattern: Pattern) -> bool:
        return self.entries[pattern]


class SetAlgebra:
    """Membership, support, pattern tables and emptiness under one universe."""

    def __init__(self, universe: UniverseConfig):
        self.universe = universe
        self.logger = logging.getLogger(__name__)

    def member(self, s: SetExpr, p: Point) -> bool:
        return s.contains(self.universe.check(p), self.universe)

    def support(self, s: SetExpr) -> FrozenSet[int]:
        return s.support

    def patterns(self, codes: Iterable[int], max_size: Optional[int] = None) -> Iterator[Pattern]:
        """Admissible patterns by total size, then taken codes, A-colored fresh codes first."""
        pool = sorted(set(codes))
        limit = self.universe.n if max_size is None else max_size
        subsets = all_points(pool, limit)
        for total in range(0, limit + 1):
            for taken in subsets:
                rest = total - taken.rank
                if rest < 0:
                    continue
                for fresh_a in range(rest, -1, -1):
                    yield Pattern(taken, fresh_a, rest - fresh_a)

    def instantiate(self, pattern: Pattern, codes: Iterable[int], base: Point = Point()) -> Point:
        """Canonical instance: the taken codes plus the smallest fresh codes above every code."""
        avoided = set(codes) | set(base.elems)
        fresh_a = self.universe.fresh_codes(True, pattern.fresh_a, avoided)
        fresh_n = self.universe.fresh_codes(False, pattern.fresh_n, avoided)
        return base.union(pattern.taken).union(Point(tuple(fresh_a + fresh_n)))

    def pattern_table(self, s: SetExpr, codes: Optional[Iterable[int]] = None) -> PatternTable:
        support = frozenset(codes) if codes is not None else s.support
        if not s.support <= support:
            support = support | s.support
        normal = nnf(s)
        table = PatternTable(codes=support)
        for pattern in self.patterns(support):
            table.entries[pattern] = normal.contains(self.instantiate(pattern, support), self.universe)
        return table

    def find_member(self, s: SetExpr, codes: Optional[Iterable[int]] = None) -> Optional[Point]:
        support = s.support | frozenset(codes or ())
        normal = nnf(s)
        for pattern in self.patterns(support):
            candidate = self.instantiate(pattern, support)
            if normal.contains(candidate, self.universe):
                return candidate
        return None

    def is_empty(self, s: SetExpr) -> Tuple[bool, Optional[Point]]:
        witness = self.find_member(s)
        return witness is None, witness

    def subset(self, s: SetExpr, t: SetExpr) -> bool:
        return self.find_member(difference(s, t)) is None

    def equal(self, s: SetExpr, t: SetExpr) -> bool:
        return self.subset(s, t) and self.subset(t, s)
