import logging
from dataclasses import dataclass
from itertools import islice
from typing import Any, List, Optional, Sequence, Tuple

from app.models import Certificate
from app.services.certificates import issue
from app.services.closure_engine import get_closure_engine
from app.services.descriptors import FcZero, IsolatedPoint, OpenDescriptor, UpMinus, Whole
from app.services.semilattice import EngineError, Point, ZERO, leq, meet
from app.services.set_algebra import And, Cyl, LevelLE, Not, Open, Or, SetExpr, difference
from app.services.topology import NotT1TopologyError, SeparationError, Topology, TopologyKind


class PreconditionError(EngineError):
    """Raised when an input violates the stated precondition of a witness operation."""
    pass


class EmptySetError(EngineError):
    """Raised when an operation needs a nonempty set."""
    pass


class NotACoverError(EngineError):
    """Raised when open sets miss a point; ``witness`` is the missing point."""

    def __init__(self, message: str, witness: Point):
        super().__init__(message)
        self.witness = witness


class FiniteSetError(EngineError):
    """Raised when an operation needs an infinite set."""
    pass


class NotTopRankError(EngineError):
    """Raised when a set has members below the top rank; ``witness`` is one of them."""

    def __init__(self, message: str, witness: Point):
        super().__init__(message)
        self.witness = witness


class FamilyNotDiscreteError(EngineError):
    """Raised when two family members accumulate at the same point; ``pair`` holds their indices."""

    def __init__(self, message: str, pair: Tuple[int, int]):
        super().__init__(message)
        self.pair = pair


class NotClosedError(EngineError):
    """Raised for a set that is not closed; ``witness`` is a limit point outside it."""

    def __init__(self, message: str, witness: Optional[Point] = None):
        super().__init__(message)
        self.witness = witness


@dataclass
class Witness:
    value: Any
    certificate: Certificate


@dataclass(frozen=True)
class SeparatorFunction:
    """Continuous map to {0, 1}: the indicator of the clopen set ↑x2."""
    x1: Point
    x2: Point

    def __call__(self, p: Point) -> int:
        return 1 if leq(self.x2, p) else 0


class TheoremWitnesses:
    """Constructive proof steps, each returning a value and a verifiable certificate."""

    def __init__(self, topology: Topology):
        self.topology = topology
        self.universe = topology.universe
        self.algebra = topology.algebra
        self.engine = get_closure_engine(topology)
        self.logger = logging.getLogger(__name__)

    def _require_t1(self, operation: str) -> None:
        if not self.topology.id.is_t1:
            raise NotT1TopologyError(f"{operation} needs a T1 topology; {self.topology.id} is not T1",
                                     (ZERO, Point.of(1)))

    def _require_fc(self, operation: str) -> None:
        if not self.topology.id.is_fc:
            raise PreconditionError(f"{operation} needs tau_fc2 or tau_fcn, got {self.topology.id}")

    def neighborhood_in_upset(self, x: Point) -> Witness:
        """Basic neighbourhood of x inside ↑x."""
        self._require_t1("neighborhood_in_upset")
        v = self.topology.canonical_base(x)
        cert = issue("UpsetNeighborhood", self.topology, {"point": str(x), "open": str(v)})
        return Witness(v, cert)

    def separator_function(self, x1: Point, x2: Point) -> Witness:
        self._require_t1("separator_function")
        if x1 == x2:
            raise SeparationError(f"Cannot separate {x1} from itself")
        if leq(x2, x1):
            x1, x2 = x2, x1
        f = SeparatorFunction(x1, x2)
        cert = issue("SeparatorFunction", self.topology, {"x1": str(x1), "x2": str(x2)})
        return Witness(f, cert)

    def separation_pair(self, p: Point, q: Point) -> Witness:
        left, right = self.topology.hausdorff_separate(p, q)
        payload = {"p": str(p), "q": str(q), "left": str(left), "right": str(right)}
        return Witness((left, right), issue("SeparationPair", self.topology, payload))

    def isolated_point_of(self, s: SetExpr) -> Witness:
        """A member of s of maximal rank, isolated in s by its test neighbourhood."""
        codes = s.support | self.topology.codes
        patterns = list(self.algebra.patterns(codes))
        found = None
        for size in range(self.universe.n, -1, -1):
            for pattern in patterns:
                if pattern.size != size:
                    continue
                candidate = self.algebra.instantiate(pattern, codes)
                if s.contains(candidate, self.universe):
                    found = candidate
                    break
            if found is not None:
                break
        if found is None:
            raise EmptySetError(f"{s} is empty")
        v = self.topology.test_neighborhood(found, codes)
        cert = issue("IsolatedPointWitness", self.topology, {"expr": str(s), "point": str(found), "open": str(v)})
        return Witness(found, cert)

    def separate_continuity_modulus(self, a: Point, b: Point, w: OpenDescriptor) -> Witness:
        """Basic neighbourhood V of b with a · V ⊆ W."""
        self.topology.validate(w)
        ab = meet(a, b)
        if not self.topology.member_open(w, ab):
            raise PreconditionError(f"{a} · {b} = {ab} is not in {w}")
        if self.topology.kind == TopologyKind.TAU_0:
            v = Whole() if b.is_zero else IsolatedPoint(b)
        else:
            extra = [b.with_code(c) for c in a.elems if c not in b.codes]
            extra = [e for e in extra if e.rank <= self.universe.n]
            if isinstance(w, UpMinus) and w.anchor == b:
                v = w.excluding(extra)
            elif isinstance(w, FcZero) and w.anchor == b:
                v = FcZero(w.base.excluding(extra), w.b)
            elif isinstance(w, IsolatedPoint) and w.point == b:
                v = w
            elif isinstance(w, Whole) and b.is_zero:
                v = UpMinus(ZERO, tuple(extra))
            else:
                v = self.topology.canonical_base(b, extra)
        payload = {"a": str(a), "b": str(b), "W": str(w), "V": str(v)}
        return Witness(v, issue("SeparateContinuityModulus", self.topology, payload))

    def joint_discontinuity_certificate(self, depth: int = 25, support_max: int = 8, edit_max: int = 8) -> Witness:
        """Sequences u_k, v_k converging to the fc anchor whose meets stay outside W."""
        self._require_fc("joint_discontinuity_certificate")
        anchor = self.topology.id.anchor
        w = self.topology.canonical_base(anchor)
        a_codes = list(islice(self.universe.codes_of_color(True, skip=anchor.elems), depth))
        n_codes = list(islice(self.universe.codes_of_color(False, skip=anchor.elems), 2 * depth))
        sequence = []
        lows = []
        for k in range(depth):
            a_k, b_k, c_k = a_codes[k], n_codes[2 * k], n_codes[2 * k + 1]
            u = anchor.union(Point.of(a_k, b_k))
            v = anchor.union(Point.of(a_k, c_k))
            sequence.append([str(u), str(v), str(anchor.with_code(a_k))])
            lows.append(min(a_k, b_k, c_k))
        index_function = []
        for support_bound in range(0, support_max + 1, 2):
            for edit_bound in range(0, edit_max + 1, 2):
                bound = max(support_bound, edit_bound)
                k0 = next((k for k in range(depth) if all(low >= bound for low in lows[k:])), depth)
                index_function.append([support_bound, edit_bound, k0])
        payload = {"W": str(w), "depth": depth, "sequence": sequence, "index_function": index_function}
        cert = issue("JointDiscontinuity", self.topology, payload)
        self.logger.info(f"Joint discontinuity at {anchor}: {depth} products outside {w}")
        return Witness(sequence, cert)

    def closed_discrete_witness(self, sample: int = 3) -> Witness:
        """π(A) transported above the fc anchor: infinite, closed and discrete."""
        self._require_fc("closed_discrete_witness")
        anchor = self.topology.id.anchor
        s = Cyl(anchor, self.topology.canonical_base(anchor).b)
        limits = self.engine.limit_points(s)
        stray = self.algebra.find_member(limits)
        if stray is not None:
            raise NotClosedError(f"{s} accumulates at {stray}", stray)
        codes = islice(self.universe.codes_of_color(True, skip=anchor.elems), sample)
        members = [str(anchor.with_code(c)) for c in codes]
        return Witness(s, issue("ClosedDiscrete", self.topology, {"expr": str(s), "members": members}))

    def accumulation_point(self, s: SetExpr) -> Witness:
        """An accumulation point of an infinite subset of the top rank."""
        self._require_t1("accumulation_point")
        low = self.algebra.find_member(And((s, LevelLE(self.universe.n - 1))))
        if low is not None:
            raise NotTopRankError(f"{s} has the member {low} below rank {self.universe.n}", low)
        table = self.algebra.pattern_table(s, s.support | self.topology.codes)
        if not any(pattern.fresh > 0 for pattern in table.members()):
            raise FiniteSetError(f"{s} is finite")
        analysis = self.engine.analyze(s)
        classes = sorted(analysis.limit_classes(), key=lambda cls: cls[1] + cls[2])
        if not classes:
            raise EngineError(f"No accumulation point found for {s}")
        x = self.engine.representative(classes[0], analysis.codes)
        y = analysis.verdicts[classes[0]]
        payload = {"expr": str(s), "point": str(x), "witness": str(y)}
        return Witness(x, issue("AccumulationPoint", self.topology, payload))

    def extract_finite_subcover(self, cover: Sequence[OpenDescriptor]) -> Witness:
        """Finite subcover chosen by climbing exclusion data from zero upwards."""
        if self.topology.kind != TopologyKind.TAU_C:
            raise PreconditionError(f"Subcover extraction runs on tau_c, got {self.topology.id}")
        for d in cover:
            self.topology.validate(d)
        missing = self.algebra.find_member(Not(Or(tuple(Open(d) for d in cover))))
        if missing is not None:
            raise NotACoverError(f"The open sets miss {missing}", missing)

        selected: List[OpenDescriptor] = []
        visited = set()

        def cover_upset(x: Point) -> None:
            if x in visited:
                return
            visited.add(x)
            u = next(d for d in cover if d.contains(x, self.universe))
            if u not in selected:
                selected.append(u)
            for e in (u.exclusions if isinstance(u, UpMinus) else ()):
                y = x.union(e)
                if y.rank <= self.universe.n:
                    cover_upset(y)

        cover_upset(ZERO)
        leftover = self.algebra.find_member(Not(Or(tuple(Open(d) for d in selected))))
        if leftover is not None:
            raise EngineError(f"Extracted subcover misses {leftover}")
        self.logger.info(f"Subcover of size {len(selected)} from {len(cover)} open sets")
        payload = {"cover": [str(d) for d in cover], "subcover": [str(d) for d in selected]}
        return Witness(selected, issue("Subcover", self.topology, payload))

    def regularity_shrink(self, u: OpenDescriptor) -> Witness:
        """V around zero with cl(V) ⊆ U, or a failed certificate carrying the defect."""
        self._require_t1("regularity_shrink")
        self.topology.validate(u)
        if not u.anchor.is_zero:
            raise PreconditionError(f"{u} is not a neighbourhood of zero")
        if self.engine.is_closed(Open(u)):
            payload = {"U": str(u), "status": "shrunk", "V": str(u)}
            return Witness(u, issue("RegularityShrink", self.topology, payload))
        defect = self.engine.regular_open_defect(Open(u))
        if defect is None:
            defect = self.algebra.find_member(difference(self.engine.limit_points(Open(u)), Open(u)))
        y = self.engine.limit_witness(Open(u), defect)
        self.logger.warning(f"No closed shrink of {u} in {self.topology.id}: {defect} lies in its closure")
        payload = {"U": str(u), "status": "failed", "defect": str(defect), "witness": str(y)}
        return Witness(None, issue("RegularityShrink", self.topology, payload))

    def top_rank_cover(self, u: OpenDescriptor) -> Witness:
        """Points x_1..x_i with the top rank inside U ∪ ↑x_1 ∪ ... ∪ ↑x_i."""
        self.topology.validate(u)
        if not u.anchor.is_zero:
            raise PreconditionError(f"{u} is not a neighbourhood of zero")
        base = u.base if isinstance(u, FcZero) else u
        generators = list(base.exclusions) if isinstance(base, UpMinus) else []
        payload = {"U": str(u), "generators": [str(g) for g in generators]}
        return Witness(generators, issue("TopRankCover", self.topology, payload))

    def collectionwise_expand(self, family: Sequence[SetExpr]) -> Witness:
        """Disjoint open expansions of a discrete family of closed sets of exp_1."""
        if self.topology.kind != TopologyKind.TAU_C or self.universe.n != 1:
            raise PreconditionError(f"Collectionwise expansion runs on tau_c with n = 1, got {self.topology.id}")
        for i in range(len(family)):
            for j in range(i + 1, len(family)):
                shared = self.algebra.find_member(And((family[i], family[j])))
                if shared is not None:
                    raise PreconditionError(f"Members {i} and {j} share {shared}")
        at_zero = [i for i, f in enumerate(family)
                   if f.contains(ZERO, self.universe) or self.engine.limit_witness(f, ZERO) is not None]
        if len(at_zero) > 1:
            raise FamilyNotDiscreteError(f"Members {at_zero[0]} and {at_zero[1]} both accumulate at {ZERO}",
                                         (at_zero[0], at_zero[1]))
        for i, f in enumerate(family):
            stray = self.algebra.find_member(difference(self.engine.limit_points(f), f))
            if stray is not None:
                raise NotClosedError(f"Member {i} is not closed: {stray} is a limit point", stray)
        expansion: List[SetExpr] = list(family)
        if at_zero:
            s0 = at_zero[0]
            others = []
            for j, f in enumerate(family):
                if j != s0:
                    others += [p.taken for p in self.algebra.pattern_table(f).members()]
            expansion[s0] = Or((family[s0], Open(UpMinus(ZERO, tuple(others)))))
        payload = {"family": [str(f) for f in family], "expansion": [str(u) for u in expansion]}
        return Witness(expansion, issue("CollectionwiseExpansion", self.topology, payload))
