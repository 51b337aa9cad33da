"""Brute-force semantics on a finite window of codes.

The oracle enumerates every point over the core codes 0..m-1 plus a few
padding codes of each color and decides limit points by searching the
basic neighbourhoods whose exclusion data names core codes only. It shares
the membership layer with the symbolic engine and nothing else.
"""
import json
import logging
import os
from dataclasses import dataclass
from itertools import islice
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from app.models import AgreementReport, OracleDump
from app.services.semilattice import EngineError, Point, all_points, leq
from app.services.set_algebra import Not, SetExpr
from app.services.topology import Topology, TopologyKind


class WindowOverflowError(EngineError):
    """Raised when an expression names codes outside the core or the window is too small to saturate."""
    pass


@dataclass(frozen=True)
class Window:
    m: int
    pad_a: int = 1
    pad_n: int = 1

    def __str__(self) -> str:
        return f"window {self.m} pads {self.pad_a}/{self.pad_n}"


def parse_pads(text: str) -> Tuple[int, int]:
    pad_a, pad_n = (int(part) for part in text.split(","))
    return pad_a, pad_n


def _hitting_set_within(sets: List[FrozenSet[int]], bound: int) -> bool:
    """Whether some set of at most `bound` codes meets every given set (branch and bound)."""
    if not sets:
        return True
    if bound <= 0:
        return False
    target = min(sets, key=len)
    for code in sorted(target):
        rest = [s for s in sets if code not in s]
        if _hitting_set_within(rest, bound - 1):
            return True
    return False


def _greedy_hitting_set(sets: List[FrozenSet[int]]) -> int:
    remaining = list(sets)
    size = 0
    while remaining:
        counts: Dict[int, int] = {}
        for s in remaining:
            for code in s:
                counts[code] = counts.get(code, 0) + 1
        best = max(sorted(counts), key=lambda c: counts[c])
        remaining = [s for s in remaining if best not in s]
        size += 1
    return size


class WindowOracle:
    def __init__(self, topology: Topology, window: Window):
        self.topology = topology
        self.universe = topology.universe
        self.window = window
        self.logger = logging.getLogger(__name__)
        if window.pad_a < 1 or window.pad_n < 1:
            raise WindowOverflowError(f"{window} needs at least one padding code of each color")
        core = list(range(window.m))
        pads_a = list(islice(self.universe.codes_of_color(True, start=window.m), window.pad_a))
        pads_n = list(islice(self.universe.codes_of_color(False, start=window.m), window.pad_n))
        self.core = frozenset(core)
        self.codes = sorted(core + pads_a + pads_n)
        self.points = all_points(self.codes, self.universe.n)
        self.supersets: Dict[Point, List[Point]] = {
            x: [y for y in self.points if y != x and leq(x, y)] for x in self.points if x.rank < self.universe.n
        }
        if not topology.codes <= self.core:
            raise WindowOverflowError(f"{window} does not hold the topology codes {sorted(topology.codes)}")

    def _check_support(self, s: SetExpr) -> FrozenSet[int]:
        outside = s.support - self.core
        if outside:
            raise WindowOverflowError(f"{s} names codes {sorted(outside)} outside the core of {self.window}")
        return s.support | self.topology.codes

    def membership_table(self, s: SetExpr) -> Dict[Point, bool]:
        self._check_support(s)
        return {p: s.contains(p, self.universe) for p in self.points}

    def _removable_at_anchor(self, x: Point, y: Point) -> bool:
        if y.rank != x.rank + 1:
            return False
        extra = y.difference(x).elems[0]
        return extra in self.core or self.universe.in_a(extra)

    def limit_points(self, s: SetExpr) -> Set[Point]:
        codes = self._check_support(s)
        bound = len(codes)
        if self.window.m < 2 * bound + self.universe.n:
            raise WindowOverflowError(f"{self.window} is too small for {len(codes)} support codes at n={self.universe.n}")
        table = {p: s.contains(p, self.universe) for p in self.points}
        result: Set[Point] = set()
        if self.topology.kind == TopologyKind.TAU_0:
            if any(inside and not p.is_zero for p, inside in table.items()):
                result.add(Point())
            return result
        anchor = self.topology.fc_anchor
        for x, above in self.supersets.items():
            trace = [y for y in above if table[y]]
            if anchor is not None and x == anchor:
                trace = [y for y in trace if not self._removable_at_anchor(x, y)]
            hits: Set[FrozenSet[int]] = set()
            unhittable = False
            for y in trace:
                hit = frozenset(c for c in y.elems if c not in x.codes and c in self.core)
                if not hit:
                    unhittable = True
                    break
                hits.add(hit)
            if unhittable:
                result.add(x)
                continue
            minimal = [h for h in hits if not any(other < h for other in hits)]
            if _greedy_hitting_set(minimal) <= bound:
                continue
            if not _hitting_set_within(minimal, bound):
                result.add(x)
        return result

    def closure(self, s: SetExpr) -> Set[Point]:
        table = self.membership_table(s)
        return {p for p, inside in table.items() if inside} | self.limit_points(s)

    def interior(self, s: SetExpr) -> Set[Point]:
        table = self.membership_table(s)
        outside_limits = self.limit_points(Not(s))
        return {p for p, inside in table.items() if inside and p not in outside_limits}

    def restrict(self, s: SetExpr) -> Set[Point]:
        """Window points of a symbolic result."""
        return {p for p in self.points if s.contains(p, self.universe)}

    def compare(self, operation: str, expr: SetExpr, symbolic: SetExpr, oracle: Set[Point],
                within: Optional[Sequence[Point]] = None) -> AgreementReport:
        scope = set(within) if within is not None else set(self.points)
        mine = self.restrict(symbolic) & scope
        theirs = oracle & scope
        only_symbolic = sorted(mine - theirs, key=lambda p: p.sort_key)
        only_oracle = sorted(theirs - mine, key=lambda p: p.sort_key)
        agree = not only_symbolic and not only_oracle
        if not agree:
            self.logger.error(f"{operation} of {expr} disagrees on {self.window}: "
                              f"symbolic only {[str(p) for p in only_symbolic]}, oracle only {[str(p) for p in only_oracle]}")
        return AgreementReport(operation=operation, expr=str(expr), window=self.window.m,
                               pads=(self.window.pad_a, self.window.pad_n), agree=agree,
                               only_symbolic=[str(p) for p in only_symbolic],
                               only_oracle=[str(p) for p in only_oracle])

    def dump(self, s: SetExpr) -> OracleDump:
        table = self.membership_table(s)
        as_text = lambda points: [str(p) for p in sorted(points, key=lambda p: p.sort_key)]
        return OracleDump(expr=str(s), topology=str(self.topology.id), n=self.universe.n, window=self.window.m,
                          pads=(self.window.pad_a, self.window.pad_n), codes=self.codes,
                          members=as_text(p for p, inside in table.items() if inside),
                          limit_points=as_text(self.limit_points(s)), closure=as_text(self.closure(s)),
                          interior=as_text(self.interior(s)))


def save_dump(dump: OracleDump, path: str) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(dump.model_dump(), sort_keys=True, indent=2) + "\n")
    return path


def padding_stable(topology: Topology, s: SetExpr, m: int, pads: Sequence[Tuple[int, int]]) -> bool:
    """Oracle limit points agree across paddings on the points of the smallest window."""
    oracles = [WindowOracle(topology, Window(m, a, b)) for a, b in pads]
    base = oracles[0]
    scope = set(base.points)
    reference = base.limit_points(s)
    for oracle in oracles[1:]:
        if (oracle.limit_points(s) & scope) != reference:
            logging.getLogger(__name__).error(f"Padding changes limit points of {s}: {oracle.window}")
            return False
    return True
