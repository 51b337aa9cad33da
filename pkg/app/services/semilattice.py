import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, count
from typing import Dict, FrozenSet, Iterable, Iterator, List, Tuple

logger = logging.getLogger(__name__)


class EngineError(Exception):
    """Base class for every error raised by the engine."""
    pass


class InvalidPointError(EngineError):
    """Raised when a point holds negative codes or exceeds the rank bound."""
    pass


class ConfigError(EngineError):
    """Raised for an inconsistent universe, topology or run configuration."""
    pass


@dataclass(frozen=True)
class Point:
    """A finite subset of the index universe, kept sorted and duplicate-free."""
    elems: Tuple[int, ...] = ()

    def __post_init__(self):
        canonical = tuple(sorted(set(int(c) for c in self.elems)))
        if canonical and canonical[0] < 0:
            raise InvalidPointError(f"Negative code in point {canonical}")
        object.__setattr__(self, "elems", canonical)

    @classmethod
    def of(cls, *codes: int) -> "Point":
        return cls(tuple(codes))

    @cached_property
    def codes(self) -> FrozenSet[int]:
        return frozenset(self.elems)

    @property
    def rank(self) -> int:
        return len(self.elems)

    @property
    def is_zero(self) -> bool:
        return not self.elems

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (len(self.elems), self.elems)

    def union(self, other: "Point") -> "Point":
        return Point(self.elems + other.elems)

    def difference(self, other: "Point") -> "Point":
        return Point(tuple(c for c in self.elems if c not in other.codes))

    def with_code(self, code: int) -> "Point":
        return Point(self.elems + (code,))

    def __str__(self) -> str:
        return "{" + " ".join(str(c) for c in self.elems) + "}"

    def __repr__(self) -> str:
        return f"Point{self}"


ZERO = Point()


def meet(p: Point, q: Point) -> Point:
    """Semilattice operation: set intersection."""
    return Point(tuple(c for c in p.elems if c in q.codes))


def leq(p: Point, q: Point) -> bool:
    """Natural partial order: p <= q iff pq = p, i.e. p is a subset of q."""
    return p.codes <= q.codes


def rank(p: Point) -> int:
    return p.rank


def sorted_points(points: Iterable[Point]) -> List[Point]:
    return sorted(set(points), key=lambda p: p.sort_key)


def all_points(codes: Iterable[int], n: int) -> List[Point]:
    """Every point of rank <= n over the given codes, ordered by rank then codes."""
    pool = sorted(set(codes))
    result = []
    for k in range(0, min(n, len(pool)) + 1):
        for combo in combinations(pool, k):
            result.append(Point(combo))
    return result


@dataclass(frozen=True)
class UniverseConfig:
    """Rank bound n plus the distinguished set A (an even/odd base with finite edits).

    A is always infinite and co-infinite; fresh codes of either color never run out.
    """
    n: int
    a_parity: int = 0
    a_added: FrozenSet[int] = frozenset()
    a_removed: FrozenSet[int] = frozenset()

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"Rank bound must be positive, got n={self.n}")
        if self.a_parity not in (0, 1):
            raise ConfigError(f"A parity must be 0 (even) or 1 (odd), got {self.a_parity}")
        added = frozenset(c for c in self.a_added if c % 2 != self.a_parity)
        removed = frozenset(c for c in self.a_removed if c % 2 == self.a_parity)
        if added & removed:
            raise ConfigError(f"A edits overlap: {sorted(added & removed)}")
        object.__setattr__(self, "a_added", added)
        object.__setattr__(self, "a_removed", removed)

    def in_a(self, code: int) -> bool:
        if code in self.a_added:
            return True
        if code in self.a_removed:
            return False
        return code % 2 == self.a_parity

    @property
    def a_spec(self) -> str:
        if not self.a_added and not self.a_removed:
            return "even" if self.a_parity == 0 else "odd"
        base = "A" if self.a_parity == 0 else "CoA"
        added = " ".join(str(c) for c in sorted(self.a_added))
        removed = " ".join(str(c) for c in sorted(self.a_removed))
        return f"(almost {base} + [{added}] - [{removed}])"

    def check(self, p: Point) -> Point:
        if p.rank > self.n:
            raise InvalidPointError(f"Point {p} has rank {p.rank} > n={self.n}")
        return p

    def point(self, *codes: int) -> Point:
        return self.check(Point(tuple(codes)))

    def codes_of_color(self, in_a: bool, start: int = 0, skip: Iterable[int] = ()) -> Iterator[int]:
        skipped = set(skip)
        for code in count(max(start, 0)):
            if code not in skipped and self.in_a(code) == in_a:
                yield code

    def fresh_codes(self, in_a: bool, how_many: int, avoid: Iterable[int] = ()) -> List[int]:
        """Smallest codes of the requested color above every avoided code."""
        avoid = list(avoid)
        start = (max(avoid) + 1) if avoid else 0
        result = []
        for code in self.codes_of_color(in_a, start=start):
            if len(result) >= how_many:
                break
            result.append(code)
        return result

    def fresh_point(self, base: Point, colors: Tuple[int, int], avoid: Iterable[int] = ()) -> Point:
        """base plus colors[0] fresh A-codes and colors[1] fresh non-A codes."""
        avoided = set(avoid) | set(base.elems)
        fresh = self.fresh_codes(True, colors[0], avoided) + self.fresh_codes(False, colors[1], avoided)
        return base.union(Point(tuple(fresh)))


@dataclass(frozen=True)
class UpsetTransport:
    """Order isomorphism h: exp_k(λ minus x) -> ↑x, z ↦ x ∪ z, with k = n - rank(x)."""
    anchor: Point
    universe: UniverseConfig

    @property
    def free_rank(self) -> int:
        return self.universe.n - self.anchor.rank

    def lift(self, z: Point) -> Point:
        if z.codes & self.anchor.codes:
            raise InvalidPointError(f"{z} meets the anchor {self.anchor}")
        if z.rank > self.free_rank:
            raise InvalidPointError(f"{z} exceeds free rank {self.free_rank} above {self.anchor}")
        return self.anchor.union(z)

    def lower(self, y: Point) -> Point:
        if not leq(self.anchor, y):
            raise InvalidPointError(f"{y} is not above {self.anchor}")
        return y.difference(self.anchor)

    def contains(self, y: Point) -> bool:
        return leq(self.anchor, y)


# Cache for universes keyed by (n, A spec)
_universe_cache: Dict[Tuple[int, str], UniverseConfig] = {}


def get_universe(n: int, a_spec: str = "even") -> UniverseConfig:
    """Get or create a cached universe for a rank bound and an A specification."""
    key = (n, a_spec.strip())
    if key not in _universe_cache:
        from app.utils.expr_parser import parse_a_spec
        parity, added, removed = parse_a_spec(a_spec)
        _universe_cache[key] = UniverseConfig(n=n, a_parity=parity, a_added=added, a_removed=removed)
        logger.info(f"Universe ready (n={n}, A={_universe_cache[key].a_spec})")
    return _universe_cache[key]
