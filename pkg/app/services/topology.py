import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.models import BaseAxiomFailure, BaseAxiomReport
from app.services.almost_set import A_SET, AlmostSet
from app.services.descriptors import FcZero, InvalidDescriptorError, IsolatedPoint, OpenDescriptor, UpMinus, Whole
from app.services.semilattice import (ConfigError, EngineError, Point, UniverseConfig, UpsetTransport, ZERO,
                                      get_universe, leq)
from app.services.set_algebra import And, FinitePoints, Not, Open, SetAlgebra, SetExpr, UpSet


class TopologyKind(str, Enum):
    TAU_0 = "tau_0"
    TAU_C = "tau_c"
    TAU_FC2 = "tau_fc2"
    TAU_FCN = "tau_fcn"


class NotT1TopologyError(EngineError):
    """Raised by operations that need a T1 topology; ``witness`` is a pair that cannot be separated."""

    def __init__(self, message: str, witness: Tuple[Point, Point] = (ZERO, Point.of(1))):
        super().__init__(message)
        self.witness = witness


class RefinementError(EngineError):
    """Raised when a refinement precondition fails or its result is not inside both inputs."""
    pass


class SeparationError(EngineError):
    """Raised when asked to separate a point from itself."""
    pass


@dataclass(frozen=True)
class TopologyId:
    kind: TopologyKind
    n: int
    anchor: Point = ZERO

    def __post_init__(self):
        kind = TopologyKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind == TopologyKind.TAU_FC2 and self.n != 2:
            raise ConfigError(f"tau_fc2 requires n = 2, got n={self.n}")
        if kind == TopologyKind.TAU_FCN:
            if self.n < 3:
                raise ConfigError(f"tau_fcn requires n >= 3, got n={self.n}")
            if self.anchor.rank != self.n - 2:
                raise ConfigError(f"tau_fcn anchor {self.anchor} must have rank n-2 = {self.n - 2}")
        elif not self.anchor.is_zero:
            raise ConfigError(f"{kind.value} takes no anchor point")

    @property
    def is_fc(self) -> bool:
        return self.kind in (TopologyKind.TAU_FC2, TopologyKind.TAU_FCN)

    @property
    def is_t1(self) -> bool:
        return self.kind != TopologyKind.TAU_0

    def __str__(self) -> str:
        if self.kind == TopologyKind.TAU_FCN:
            return f"{self.kind.value}@{self.anchor}"
        return self.kind.value


def default_anchor(n: int) -> Point:
    """Distinguished point of tau_fcn: the first n-2 codes."""
    return Point(tuple(range(max(n - 2, 0))))


class Topology:
    """Base-level operations of one topology over one universe."""

    def __init__(self, tid: TopologyId, universe: UniverseConfig):
        if tid.n != universe.n:
            raise ConfigError(f"Topology rank {tid.n} differs from universe rank {universe.n}")
        self.id = tid
        self.universe = universe
        self.algebra = SetAlgebra(universe)
        self.logger = logging.getLogger(__name__)

    @property
    def kind(self) -> TopologyKind:
        return self.id.kind

    @property
    def fc_anchor(self) -> Optional[Point]:
        return self.id.anchor if self.id.is_fc else None

    @property
    def codes(self) -> frozenset:
        """Codes the topology itself refers to."""
        return self.id.anchor.codes

    @property
    def transport(self) -> UpsetTransport:
        """h: exp_k(λ minus x) -> ↑x for the fc anchor x (identity for the zero anchor)."""
        return UpsetTransport(self.id.anchor, self.universe)

    def is_valid(self, d: OpenDescriptor) -> bool:
        try:
            self.validate(d)
            return True
        except InvalidDescriptorError:
            return False

    def validate(self, d: OpenDescriptor) -> OpenDescriptor:
        n = self.universe.n
        points = []
        if isinstance(d, IsolatedPoint):
            points = [d.point]
        elif isinstance(d, UpMinus):
            points = [d.anchor, *d.exclusions]
        elif isinstance(d, FcZero):
            points = [d.base.anchor, *d.base.exclusions]
        for p in points:
            if p.rank > n:
                raise InvalidDescriptorError(f"{d} names {p} of rank above n={n}")
        if isinstance(d, Whole):
            return d
        if self.kind == TopologyKind.TAU_0:
            if isinstance(d, IsolatedPoint) and not d.point.is_zero:
                return d
            if isinstance(d, UpMinus) and (not d.anchor.is_zero or not d.exclusions):
                return d
            raise InvalidDescriptorError(f"{d} is not open in tau_0")
        if isinstance(d, UpMinus):
            return d
        if isinstance(d, IsolatedPoint):
            if d.point.rank == n:
                return d
            raise InvalidDescriptorError(f"{d} is not open in {self.id}: {d.point} is not isolated")
        if isinstance(d, FcZero):
            if self.id.is_fc and d.anchor == self.id.anchor:
                return d
            raise InvalidDescriptorError(f"{d} is not a descriptor of {self.id}")
        raise InvalidDescriptorError(f"Unknown descriptor {d!r}")

    def member_open(self, d: OpenDescriptor, p: Point) -> bool:
        self.validate(d)
        return d.contains(self.universe.check(p), self.universe)

    def canonical_base(self, p: Point, exclusions: Iterable[Point] = (), b: Optional[AlmostSet] = None) -> OpenDescriptor:
        """Basic neighbourhood of p with the given exclusion data."""
        self.universe.check(p)
        exclusions = tuple(exclusions)
        if self.kind == TopologyKind.TAU_0:
            if exclusions or b is not None:
                raise InvalidDescriptorError("tau_0 bases take no exclusion data")
            return Whole() if p.is_zero else IsolatedPoint(p)
        base = UpMinus(p, exclusions)
        if self.id.is_fc and p == self.id.anchor:
            b = (b if b is not None else A_SET).normalized(self.universe)
            return self.validate(FcZero(base, b))
        if b is not None:
            raise InvalidDescriptorError(f"{p} is not the fc anchor; no almost-set applies")
        return self.validate(base)

    def test_neighborhood(self, x: Point, codes: Iterable[int]) -> OpenDescriptor:
        """Smallest basic neighbourhood of x definable from the given codes."""
        if self.kind == TopologyKind.TAU_0:
            return Whole() if x.is_zero else IsolatedPoint(x)
        exclusions = []
        if x.rank < self.universe.n:
            exclusions = [x.with_code(c) for c in sorted(set(codes) - x.codes)]
        base = UpMinus(x, tuple(exclusions))
        if self.id.is_fc and x == self.id.anchor:
            return FcZero(base, A_SET)
        return base

    def _local_form(self, d: OpenDescriptor, p: Point) -> Tuple[List[Point], Optional[AlmostSet]]:
        """Exclusions above p (and an almost-set at the fc anchor) of a neighbourhood of p inside d."""
        if isinstance(d, (Whole, IsolatedPoint)):
            return [], None
        upminus = d.base if isinstance(d, FcZero) else d
        lifted = [e.union(p) for e in upminus.exclusions]
        lifted = [e for e in lifted if e.rank <= self.universe.n]
        if isinstance(d, FcZero) and d.anchor == p:
            return lifted, d.b
        return lifted, None

    def refine(self, u: OpenDescriptor, v: OpenDescriptor, p: Point) -> OpenDescriptor:
        """Basic neighbourhood of p inside u ∩ v."""
        if not (self.member_open(u, p) and self.member_open(v, p)):
            raise RefinementError(f"{p} is not in both {u} and {v}")
        if self.kind == TopologyKind.TAU_0:
            w = Whole() if p.is_zero else IsolatedPoint(p)
        else:
            excl_u, b_u = self._local_form(u, p)
            excl_v, b_v = self._local_form(v, p)
            bs = [b for b in (b_u, b_v) if b is not None]
            b = None
            if bs:
                b = bs[0] if len(bs) == 1 else bs[0].union(bs[1], self.universe)
            w = UpMinus(p, tuple(excl_u + excl_v))
            if b is not None:
                w = FcZero(w, b)
            self.validate(w)
        leftover = And((Open(w), Not(And((Open(u), Open(v))))))
        empty, witness = self.algebra.is_empty(leftover)
        if not empty:
            raise RefinementError(f"Refinement {w} leaks {witness} outside {u} ∩ {v}")
        return w

    def translate(self, e: Point, u: OpenDescriptor) -> SetExpr:
        """Image {e ∩ q : q ∈ u} as a finite point set."""
        image = []
        for k in range(e.rank + 1):
            for taken in combinations(e.elems, k):
                t = Point(taken)
                missing = [Not(UpSet(Point.of(c))) for c in e.elems if c not in t.codes]
                probe = And((Open(u), UpSet(t), *missing))
                if self.algebra.find_member(probe) is not None:
                    image.append(t)
        return FinitePoints(tuple(image))

    def hausdorff_separate(self, p: Point, q: Point) -> Tuple[OpenDescriptor, OpenDescriptor]:
        """Disjoint basic neighbourhoods of two distinct points."""
        if p == q:
            raise SeparationError(f"Cannot separate {p} from itself")
        if self.kind == TopologyKind.TAU_0:
            nonzero = q if p.is_zero else p
            raise NotT1TopologyError("tau_0 is not T1: zero lies in every open set", (ZERO, nonzero))
        self.universe.check(p)
        self.universe.check(q)
        if leq(p, q):
            pair = (self.canonical_base(p, [q]), self.canonical_base(q))
        elif leq(q, p):
            pair = (self.canonical_base(p), self.canonical_base(q, [p]))
        else:
            joined = p.union(q)
            excl = [joined] if joined.rank <= self.universe.n else []
            pair = (self.canonical_base(p, excl), self.canonical_base(q, excl))
        empty, witness = self.algebra.is_empty(And((Open(pair[0]), Open(pair[1]))))
        if not empty:
            raise SeparationError(f"Neighbourhoods {pair[0]} and {pair[1]} share {witness}")
        return pair

    def subset_open(self, v: OpenDescriptor, u: OpenDescriptor) -> bool:
        return self.algebra.subset(Open(v), Open(u))

    def descriptors_at(self, p: Point, codes: Sequence[int], max_exclusions: int, limit: int) -> List[OpenDescriptor]:
        """Deterministic family of basic neighbourhoods of p built from the given codes."""
        if self.kind == TopologyKind.TAU_0:
            return [self.canonical_base(p)]
        above = []
        if p.rank < self.universe.n:
            free = [c for c in codes if c not in p.codes]
            above = [p.with_code(c) for c in free]
            if p.rank + 2 <= self.universe.n:
                above += [p.union(Point(pair)) for pair in combinations(free[:4], 2)]
        result = []
        for k in range(0, max_exclusions + 1):
            for excl in combinations(above, k):
                result.append(self.canonical_base(p, excl))
                if self.id.is_fc and p == self.id.anchor and excl:
                    edit = excl[0].difference(p).elems[0]
                    b = A_SET.with_added([edit], self.universe) if not self.universe.in_a(edit) \
                        else A_SET.with_removed([edit], self.universe)
                    result.append(self.canonical_base(p, excl, b))
                if len(result) >= limit:
                    return result[:limit]
        return result

    def check_base_axioms(self, sample: Sequence[Point], max_exclusions: int = 2, max_descriptors: int = 6,
                          max_probes: int = 24) -> BaseAxiomReport:
        """Check BP1-BP3 on descriptors built from the sample codes, and BP4 on every sample pair."""
        codes = sorted({c for p in sample for c in p.elems})
        failures: List[BaseAxiomFailure] = []
        non_t1 = None
        for p in sample:
            base = self.canonical_base(p)
            if not self.member_open(base, p):
                failures.append(BaseAxiomFailure(axiom="BP1", point=str(p), detail="canonical base misses its point",
                                                 descriptors=[str(base)]))
                continue
            family = self.descriptors_at(p, codes, max_exclusions, max_descriptors)
            for u, v in combinations(family, 2):
                try:
                    self.refine(u, v, p)
                except RefinementError as e:
                    failures.append(BaseAxiomFailure(axiom="BP2", point=str(p), detail=str(e),
                                                     descriptors=[str(u), str(v)]))
            for u in family:
                probes = [q for q in sample if u.contains(q, self.universe)][:max_probes]
                for q in probes:
                    try:
                        self.refine(u, self.canonical_base(q), q)
                    except RefinementError as e:
                        failures.append(BaseAxiomFailure(axiom="BP3", point=str(q), detail=str(e),
                                                         descriptors=[str(u)]))
        for p, q in combinations(sample, 2):
            try:
                self.hausdorff_separate(p, q)
            except NotT1TopologyError as e:
                non_t1 = [str(e.witness[0]), str(e.witness[1])]
                break
            except SeparationError as e:
                failures.append(BaseAxiomFailure(axiom="BP4", point=str(p), detail=str(e), descriptors=[str(q)]))
        if non_t1:
            self.logger.warning(f"{self.id} is not T1; unseparated pair {non_t1}")
        if failures:
            self.logger.error(f"Base axioms failed for {self.id}: {len(failures)} failures")
        return BaseAxiomReport(topology=str(self.id), n=self.universe.n, checked_points=len(sample),
                               passed=not failures, failures=failures, non_t1_witness=non_t1)


# Cache for topologies keyed by (topology id, universe)
_topology_cache: Dict[Tuple[TopologyId, UniverseConfig], Topology] = {}


def get_topology(kind: str, n: int, a_spec: str = "even", anchor: Optional[Point] = None) -> Topology:
    """Get or create a cached topology service."""
    kind = TopologyKind(kind)
    if anchor is None:
        anchor = default_anchor(n) if kind == TopologyKind.TAU_FCN else ZERO
    tid = TopologyId(kind, n, anchor)
    universe = get_universe(n, a_spec)
    key = (tid, universe)
    if key not in _topology_cache:
        _topology_cache[key] = Topology(tid, universe)
        logging.getLogger(__name__).info(f"Topology ready: {tid} (n={n}, A={universe.a_spec})")
    return _topology_cache[key]
