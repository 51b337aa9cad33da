"""Limit points, closure and interior of definable sets.

A point x of rank below n is a limit point of s exactly when s has a member
y ⊋ x whose coordinates beyond x all avoid the support codes Σ (the support of
s plus the codes the topology names). Members that reuse a code c of Σ fall
in the excluded up-set ↑(x ∪ {c}). At the fc anchor a member with one extra
A-colored coordinate does not count: it lies in the removable image π(B).
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from app.services.almost_set import AlmostSet
from app.services.semilattice import EngineError, Point, ZERO
from app.services.set_algebra import (EMPTY, And, Cyl, FinitePoints, LevelLE, Not, Or, Pattern, SetExpr, UpSet,
                                      difference)
from app.services.topology import Topology, TopologyKind

# (taken support codes, fresh A-colored codes, fresh non-A codes) of a candidate point
CandidateClass = Tuple[Point, int, int]


class InexpressibleResultError(EngineError):
    """Raised when a limit set falls outside the atom algebra; carries sound bounds."""

    def __init__(self, message: str, lower: SetExpr, upper: SetExpr):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class NotOpenError(EngineError):
    """Raised when an operation needs an open set; ``witness`` is a non-interior member."""

    def __init__(self, message: str, witness: Optional[Point] = None):
        super().__init__(message)
        self.witness = witness


@dataclass
class LimitAnalysis:
    expr: SetExpr
    codes: FrozenSet[int]
    verdicts: Dict[CandidateClass, Optional[Point]] = field(default_factory=dict)
    color_sensitive: List[Point] = field(default_factory=list)
    exact: bool = True
    lower: SetExpr = EMPTY
    upper: SetExpr = EMPTY

    @property
    def result(self) -> SetExpr:
        return self.lower

    def limit_classes(self) -> List[CandidateClass]:
        return [cls for cls, witness in self.verdicts.items() if witness is not None]


class ClosureEngine:
    def __init__(self, topology: Topology, color_rule: bool = True):
        self.topology = topology
        self.universe = topology.universe
        self.algebra = topology.algebra
        # False gives the color-blind rule used as a negative control against the oracle
        self.color_rule = color_rule
        self.logger = logging.getLogger(__name__)
        self._analysis_cache: Dict[SetExpr, LimitAnalysis] = {}

    def support_codes(self, s: SetExpr) -> FrozenSet[int]:
        return s.support | self.topology.codes

    def representative(self, cls: CandidateClass, codes: FrozenSet[int]) -> Point:
        taken, fresh_a, fresh_n = cls
        return self.algebra.instantiate(Pattern(taken, fresh_a, fresh_n), codes)

    def limit_witness(self, s: SetExpr, x: Point, codes: Optional[FrozenSet[int]] = None) -> Optional[Point]:
        """A member of s showing x is a limit point, or None when x is not one."""
        if self.topology.kind == TopologyKind.TAU_0:
            if not x.is_zero:
                return None
            return self.algebra.find_member(And((s, Not(FinitePoints((ZERO,))))))
        codes = self.support_codes(s) if codes is None else codes
        free = self.universe.n - x.rank
        at_anchor = self.color_rule and self.topology.fc_anchor is not None and x == self.topology.fc_anchor
        avoided = codes | x.codes
        for extra in range(1, free + 1):
            for fresh_a in range(extra, -1, -1):
                if at_anchor and extra == 1 and fresh_a == 1:
                    continue
                y = self.universe.fresh_point(x, (fresh_a, extra - fresh_a), avoided)
                if s.contains(y, self.universe):
                    return y
        return None

    def candidate_classes(self, codes: FrozenSet[int]) -> List[CandidateClass]:
        """Classes of points of rank below n, listed in pattern order."""
        return [(p.taken, p.fresh_a, p.fresh_n)
                for p in self.algebra.patterns(codes, max_size=self.universe.n - 1)]

    def _fresh_class_expr(self, taken: Point, fresh: int, codes: FrozenSet[int], color: Optional[bool]) -> SetExpr:
        """Points that take exactly `taken` from the support codes plus `fresh` other codes."""
        others = sorted(codes - taken.codes)
        if fresh == 1:
            if color is None:
                b = AlmostSet("ALL", removed=frozenset(others))
            else:
                b = AlmostSet("A" if color else "CoA",
                              removed=frozenset(c for c in others if self.universe.in_a(c) == color))
            return Cyl(taken, b.normalized(self.universe))
        r = taken.rank + fresh
        return And((UpSet(taken), *[Not(UpSet(Point.of(c))) for c in others], LevelLE(r), Not(LevelLE(r - 1))))

    def analyze(self, s: SetExpr) -> LimitAnalysis:
        if s in self._analysis_cache:
            return self._analysis_cache[s]
        codes = self.support_codes(s)
        analysis = LimitAnalysis(expr=s, codes=codes)
        if self.topology.kind == TopologyKind.TAU_0:
            witness = self.limit_witness(s, ZERO, codes)
            analysis.verdicts[(ZERO, 0, 0)] = witness
            analysis.lower = analysis.upper = FinitePoints((ZERO,) if witness is not None else ())
            self._analysis_cache[s] = analysis
            return analysis

        groups: Dict[Tuple[Point, int], Dict[int, bool]] = {}
        for cls in self.candidate_classes(codes):
            witness = self.limit_witness(s, self.representative(cls, codes), codes)
            analysis.verdicts[cls] = witness
            taken, fresh_a, fresh_n = cls
            groups.setdefault((taken, fresh_a + fresh_n), {})[fresh_a] = witness is not None

        points: List[Point] = []
        lower_terms: List[SetExpr] = []
        upper_terms: List[SetExpr] = []
        for (taken, fresh), verdicts in groups.items():
            if fresh == 0:
                if verdicts[0]:
                    points.append(taken)
                continue
            values = set(verdicts.values())
            if values == {True}:
                term = self._fresh_class_expr(taken, fresh, codes, None)
                lower_terms.append(term)
                upper_terms.append(term)
            elif values == {True, False} and fresh == 1:
                analysis.color_sensitive.append(taken)
                for fresh_a, inside in verdicts.items():
                    if inside:
                        term = self._fresh_class_expr(taken, 1, codes, fresh_a == 1)
                        lower_terms.append(term)
                        upper_terms.append(term)
            elif values == {True, False}:
                analysis.exact = False
                analysis.color_sensitive.append(taken)
                upper_terms.append(self._fresh_class_expr(taken, fresh, codes, None))

        analysis.lower = _assemble(points, lower_terms)
        analysis.upper = _assemble(points, upper_terms)
        if not analysis.exact:
            self.logger.warning(f"Limit set of {s} under {self.topology.id} is only bracketed")
        self._analysis_cache[s] = analysis
        return analysis

    def limit_points(self, s: SetExpr) -> SetExpr:
        analysis = self.analyze(s)
        if not analysis.exact:
            raise InexpressibleResultError(f"Limit set of {s} is not expressible", analysis.lower, analysis.upper)
        return analysis.result

    def closure(self, s: SetExpr) -> SetExpr:
        return Or((s, self.limit_points(s)))

    def interior(self, s: SetExpr) -> SetExpr:
        return Not(self.closure(Not(s)))

    def is_closed(self, s: SetExpr) -> bool:
        return self.algebra.find_member(difference(self.limit_points(s), s)) is None

    def is_open(self, s: SetExpr) -> bool:
        return self.is_closed(Not(s))

    def is_clopen(self, s: SetExpr) -> bool:
        return self.is_closed(s) and self.is_open(s)

    def equal(self, s: SetExpr, t: SetExpr) -> bool:
        return self.algebra.equal(s, t)

    def open_witness(self, u: SetExpr) -> Optional[Point]:
        """A member of u outside its interior, or None when u is open."""
        return self.algebra.find_member(difference(u, self.interior(u)))

    def regular_open_defect(self, u: SetExpr) -> Optional[Point]:
        """A point of int(cl(u)) outside u, or None when u is regular open."""
        stray = self.open_witness(u)
        if stray is not None:
            raise NotOpenError(f"{u} is not open in {self.topology.id}", stray)
        defect = self.algebra.find_member(difference(self.interior(self.closure(u)), u))
        if defect is not None:
            self.logger.info(f"Regular-open defect of {u}: {defect}")
        return defect


def _assemble(points: List[Point], terms: List[SetExpr]) -> SetExpr:
    finite = FinitePoints(tuple(points))
    if not terms:
        return finite
    if not points:
        return terms[0] if len(terms) == 1 else Or(tuple(terms))
    return Or((finite, *terms))


# Cache for closure engines keyed by (topology id, universe)
_engine_cache: Dict[tuple, ClosureEngine] = {}


def get_closure_engine(topology: Topology) -> ClosureEngine:
    key = (topology.id, topology.universe)
    if key not in _engine_cache:
        _engine_cache[key] = ClosureEngine(topology)
    return _engine_cache[key]
