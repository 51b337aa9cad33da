"""Seeded corpus generators: expressions, descriptors, covers, families and tampered certificates."""
import logging
import random
import re
from typing import Any, List, Optional, Sequence

from app.models import Certificate
from app.services.almost_set import AlmostSet
from app.services.certificates import reseal
from app.services.descriptors import OpenDescriptor, UpMinus
from app.services.semilattice import Point, ZERO
from app.services.set_algebra import And, Cyl, FinitePoints, LevelLE, Not, Open, Or, SetExpr, UpSet
from app.services.topology import Topology, TopologyKind

logger = logging.getLogger(__name__)

BASES = ("A", "CoA", "ALL", "NONE")


class ExprGenerator:
    def __init__(self, topology: Topology, seed: int, core: int = 16, max_support: int = 6):
        self.topology = topology
        self.universe = topology.universe
        self.rng = random.Random(seed)
        self.core = core
        self.max_support = max_support

    def pool(self) -> List[int]:
        """Support codes for one expression, disjoint from nothing but bounded in number."""
        size = self.rng.randint(1, self.max_support)
        return sorted(self.rng.sample(range(self.core), size))

    def point(self, pool: Sequence[int], max_rank: Optional[int] = None) -> Point:
        top = self.universe.n if max_rank is None else max_rank
        rank = self.rng.randint(0, min(top, len(pool)))
        return Point(tuple(self.rng.sample(list(pool), rank)))

    def almost(self, pool: Sequence[int], bases: Sequence[str] = BASES) -> AlmostSet:
        base = self.rng.choice(list(bases))
        edits = self.rng.sample(list(pool), self.rng.randint(0, min(2, len(pool))))
        added = frozenset(c for c in edits if self.rng.random() < 0.5)
        return AlmostSet(base, added, frozenset(edits) - added).normalized(self.universe)

    def descriptor(self, pool: Sequence[int]) -> OpenDescriptor:
        if self.topology.kind == TopologyKind.TAU_0:
            p = self.point(pool)
            return self.topology.canonical_base(p)
        p = self.point(pool, self.universe.n)
        if self.topology.id.is_fc and self.rng.random() < 0.4:
            p = self.topology.id.anchor
        exclusions = []
        free = [c for c in pool if c not in p.codes]
        if p.rank < self.universe.n and free:
            for c in self.rng.sample(free, self.rng.randint(0, min(2, len(free)))):
                exclusions.append(p.with_code(c))
        b = None
        if self.topology.id.is_fc and p == self.topology.id.anchor:
            b = self.almost(pool, bases=("A",))
        return self.topology.canonical_base(p, exclusions, b)

    def atom(self, pool: Sequence[int]) -> SetExpr:
        choice = self.rng.randint(0, 4)
        if choice == 0:
            return UpSet(self.point(pool))
        if choice == 1:
            return FinitePoints(tuple(self.point(pool) for _ in range(self.rng.randint(1, 3))))
        if choice == 2:
            return LevelLE(self.rng.randint(0, self.universe.n - 1))
        if choice == 3:
            return Cyl(self.point(pool, self.universe.n - 1), self.almost(pool))
        return Open(self.descriptor(pool))

    def expr(self, depth: int = 3, pool: Optional[Sequence[int]] = None) -> SetExpr:
        pool = self.pool() if pool is None else pool
        if depth <= 0 or self.rng.random() < 0.3:
            return self.atom(pool)
        choice = self.rng.randint(0, 2)
        if choice == 0:
            return Not(self.expr(depth - 1, pool))
        args = tuple(self.expr(depth - 1, pool) for _ in range(self.rng.randint(2, 3)))
        return And(args) if choice == 1 else Or(args)

    def nonempty_expr(self, depth: int = 3) -> SetExpr:
        while True:
            s = self.expr(depth)
            if self.topology.algebra.find_member(s) is not None:
                return s

    def cover(self, decoys: int = 2) -> List[OpenDescriptor]:
        """A tau_c cover grown by the compactness recursion, shuffled among decoys."""
        pool = self.pool()
        cover: List[OpenDescriptor] = []

        def grow(x: Point) -> None:
            free = [c for c in pool if c not in x.codes]
            exclusions = []
            if x.rank < self.universe.n and free:
                exclusions = [x.with_code(c) for c in self.rng.sample(free, self.rng.randint(0, min(2, len(free))))]
            cover.append(UpMinus(x, tuple(exclusions)))
            for e in exclusions:
                grow(e)

        grow(ZERO)
        for _ in range(decoys):
            cover.append(self.descriptor(pool))
        self.rng.shuffle(cover)
        return list(dict.fromkeys(cover))

    def neighborhood_at(self, p: Point) -> OpenDescriptor:
        """Random basic neighbourhood of p; at the fc anchor it also removes a random π(B)."""
        if self.topology.kind == TopologyKind.TAU_0:
            return self.topology.canonical_base(p)
        pool = self.pool()
        free = [c for c in pool if c not in p.codes]
        exclusions = []
        if p.rank < self.universe.n:
            exclusions = [p.with_code(c) for c in self.rng.sample(free, self.rng.randint(0, min(3, len(free))))]
        b = None
        if self.topology.id.is_fc and p == self.topology.id.anchor:
            b = self.almost(pool, bases=("A",))
        return self.topology.canonical_base(p, exclusions, b)

    def sample_point(self) -> Point:
        return self.point(range(self.core))

    def infinite_top_rank(self) -> SetExpr:
        """Infinite subset of the top rank: a union of cylinders over rank n-1 points."""
        pool = self.pool()
        n = self.universe.n
        terms = []
        for _ in range(self.rng.randint(1, 2)):
            base = Point(tuple(self.rng.sample(pool, min(n - 1, len(pool)))))
            if base.rank < n - 1:
                base = base.union(Point(tuple(self.universe.fresh_codes(True, n - 1 - base.rank, pool))))
            terms.append(Cyl(base, self.almost(pool, bases=("A", "CoA", "ALL"))))
        return terms[0] if len(terms) == 1 else Or(tuple(terms))

    def discrete_family(self, infinite: bool = True) -> List[SetExpr]:
        """Disjoint closed sets of exp_1: finite sets of singletons plus optionally π(A) ∪ {0}."""
        pool = self.rng.sample(range(1, self.core), min(6, self.core - 1))
        family = []
        used: List[int] = []
        for _ in range(self.rng.randint(1, 3)):
            take = [c for c in self.rng.sample(pool, self.rng.randint(1, 2)) if c not in used]
            if not take:
                continue
            used += take
            family.append(FinitePoints(tuple(Point.of(c) for c in take)))
        if infinite:
            b = AlmostSet("A").with_removed(used, self.universe)
            family.insert(self.rng.randint(0, len(family)), Or((Cyl(ZERO, b), FinitePoints((ZERO,)))))
        return family


_CODE = re.compile(r"\d+")


def _leaves(value: Any, path: tuple = ()) -> List[tuple]:
    if isinstance(value, dict):
        return [leaf for key in sorted(value) for leaf in _leaves(value[key], path + (key,))]
    if isinstance(value, list):
        return [leaf for i, item in enumerate(value) for leaf in _leaves(item, path + (i,))]
    if isinstance(value, str) and _CODE.search(value):
        return [path]
    return []


def mutate_certificate(cert: Certificate, rng: random.Random) -> Certificate:
    """Shift one code in a textual payload field by one and reseal the digest, keeping the stored script."""
    payload = cert.model_dump()["payload"]
    paths = _leaves(payload)
    if not paths:
        return reseal(cert.model_copy(update={"kind": cert.kind + "X"}))
    path = rng.choice(paths)
    holder = payload
    for key in path[:-1]:
        holder = holder[key]
    value = holder[path[-1]]
    match = rng.choice(list(_CODE.finditer(value)))
    holder[path[-1]] = value[:match.start()] + str(int(match.group()) + 1) + value[match.end():]
    return reseal(cert.model_copy(update={"payload": payload}))


def collapse_sequence(cert: Certificate, index: int = 0) -> Certificate:
    """Joint-discontinuity tamper: v_k := u_k, script regenerated so only semantics can object."""
    payload = cert.model_dump()["payload"]
    payload["sequence"][index][1] = payload["sequence"][index][0]
    return reseal(cert.model_copy(update={"payload": payload}), rebuild_script=True)


def swap_to_complement(cert: Certificate) -> Certificate:
    """Closed-discrete tamper: π(A) replaced by π(CoA), script regenerated."""
    payload = cert.model_dump()["payload"]
    payload["expr"] = payload["expr"].replace("(almost A ", "(almost CoA ")
    return reseal(cert.model_copy(update={"payload": payload}), rebuild_script=True)
