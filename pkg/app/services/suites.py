"""Property suites run by the `check` command.

Each suite returns CheckResults; a failed property is recorded with its
counterexample and never raised. Every suite draws from its own seeded
generator so that selecting suites does not change the others' corpora.
"""
import json
import logging
import os
import random
from collections import Counter
from itertools import combinations
from typing import Callable, List, Optional, Tuple

from app.config import BASE_MAX_DESCRIPTORS, BASE_MAX_EXCLUSIONS, BASE_MAX_PROBES, MAX_SUPPORT
from app.models import SUITE_NAMES, Certificate, CheckResult, RunConfig, SuiteReport
from app.services.almost_set import A_SET, CO_A_SET
from app.services.certificates import reseal, verify_certificate
from app.services.closure_engine import ClosureEngine, get_closure_engine
from app.services.semilattice import EngineError, Point, ZERO, all_points, leq, meet
from app.services.set_algebra import WHOLE, Cyl, FinitePoints, LevelLE, Not, Open, UpSet
from app.services.topology import NotT1TopologyError, Topology, TopologyKind, get_topology
from app.services.window_oracle import Window, WindowOracle, padding_stable
from app.services.witnesses import FamilyNotDiscreteError, TheoremWitnesses
from app.utils.expr_parser import parse_point
from app.utils.generators import (ExprGenerator, collapse_sequence, mutate_certificate,
                                  swap_to_complement)

logger = logging.getLogger(__name__)

LAW_CODES = 8


def _layers(counts: Counter) -> str:
    return ", ".join(f"{layer} {counts[layer]}" for layer in sorted(counts))


class _Tally:
    """Accumulates cases of one check."""

    def __init__(self, name: str):
        self.name = name
        self.cases = 0
        self.failures: List[str] = []
        self.certificates: List[Certificate] = []
        self.note: Optional[str] = None

    def record(self, ok: bool, case: str) -> None:
        self.cases += 1
        if not ok:
            self.failures.append(case)

    def certified(self, cert: Certificate, case: str) -> bool:
        result = verify_certificate(cert)
        if not result.ok:
            case = f"{case}: {cert.kind} fails at {result.failed_index} ({result.reason})"
        self.record(result.ok, case)
        if result.ok and not self.certificates:
            self.certificates.append(cert)
        return result.ok

    def result(self) -> CheckResult:
        passed = not self.failures
        detail = f"{self.cases} cases" if passed else f"{len(self.failures)} of {self.cases} cases failed"
        if self.note:
            detail = f"{detail}; {self.note}"
        if not passed:
            logger.error(f"Check {self.name} failed: {self.failures[0]}")
        return CheckResult(name=self.name, passed=passed, detail=detail,
                           counterexample=self.failures[0] if self.failures else None,
                           certificates=self.certificates)


class SuiteRunner:
    def __init__(self, config: RunConfig):
        self.config = config
        anchor = parse_point(config.anchor) if config.anchor else None
        self.topology: Topology = get_topology(config.topology, config.n, config.a_spec, anchor)
        self.universe = self.topology.universe
        self.engine = get_closure_engine(self.topology)
        self.witnesses = TheoremWitnesses(self.topology)
        self.issued: List[Certificate] = []
        self.logger = logging.getLogger(__name__)

    @property
    def kind(self) -> TopologyKind:
        return self.topology.kind

    def generator(self, suite: str) -> ExprGenerator:
        offset = SUITE_ORDER.index(suite) if suite in SUITE_ORDER else len(SUITE_ORDER)
        return ExprGenerator(self.topology, self.config.seed + 7919 * offset, core=self.config.window,
                             max_support=self.oracle_support())

    def oracle_support(self) -> int:
        """Largest support the window saturates: m >= 2 |Σ| + n with Σ including the topology codes."""
        room = (self.config.window - self.universe.n) // 2 - len(self.topology.codes)
        return max(1, min(MAX_SUPPORT, room))

    def keep(self, cert: Certificate) -> Certificate:
        self.issued.append(cert)
        return cert

    def _guarded(self, name: str, body: Callable[[], CheckResult]) -> CheckResult:
        try:
            return body()
        except EngineError as e:
            self.logger.error(f"Check {name} raised {type(e).__name__}: {e}")
            return CheckResult(name=name, passed=False, detail=f"{type(e).__name__}: {e}")

    # laws

    def check_semilattice_laws(self) -> CheckResult:
        tally = _Tally("semilattice_laws")
        points = all_points(range(LAW_CODES), min(self.universe.n, 3))
        for x, y in combinations(points, 2):
            tally.record(meet(x, y) == meet(y, x), f"{x} · {y} is not commutative")
            tally.record(leq(x, y) == (meet(x, y) == x), f"order and meet disagree on {x}, {y}")
        for x in points:
            tally.record(meet(x, x) == x, f"{x} · {x} != {x}")
        for x in points:
            for y in points:
                xy = meet(x, y)
                for z in points:
                    if meet(xy, z) != meet(x, meet(y, z)):
                        tally.record(False, f"meet is not associative on {x}, {y}, {z}")
            tally.cases += len(points) * len(points)
        return tally.result()

    # base axioms

    def check_base(self) -> CheckResult:
        codes = 8 if self.universe.n <= 2 else 6
        sample = all_points(range(codes), self.universe.n)
        report = self.topology.check_base_axioms(sample, BASE_MAX_EXCLUSIONS, BASE_MAX_DESCRIPTORS, BASE_MAX_PROBES)
        failures = [f"{f.axiom} at {f.point}: {f.detail}" for f in report.failures]
        if self.topology.id.is_t1 and report.non_t1_witness:
            failures.append(f"unexpected non-T1 pair {report.non_t1_witness}")
        if not self.topology.id.is_t1 and not report.non_t1_witness:
            failures.append("tau_0 was not flagged as non-T1")
        detail = f"{report.checked_points} points"
        if report.non_t1_witness:
            detail += f"; not T1, witness {report.non_t1_witness}"
        return CheckResult(name="base_axioms", passed=not failures, detail=detail,
                           counterexample=failures[0] if failures else None)

    # up-sets and separation

    def check_not_t1(self) -> CheckResult:
        tally = _Tally("not_t1")
        try:
            self.topology.hausdorff_separate(ZERO, Point.of(1))
            tally.record(False, "0 and {1} were separated")
        except NotT1TopologyError as e:
            tally.record(e.witness[0] == ZERO, f"unexpected witness {e.witness}")
        return tally.result()

    def check_upset_neighborhood(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("upset_neighborhood")
        for _ in range(self.config.samples):
            x = gen.sample_point()
            w = self.witnesses.neighborhood_in_upset(x)
            tally.certified(self.keep(w.certificate), f"at {x}")
            tally.record(self.topology.algebra.subset(Open(w.value), UpSet(x)), f"{w.value} leaves ↑{x}")
        return tally.result()

    def check_upset_clopen(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("upset_clopen")
        for _ in range(self.config.samples):
            x = gen.sample_point()
            tally.record(self.engine.is_clopen(UpSet(x)), f"↑{x} is not clopen")
        return tally.result()

    def check_separator(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("separator_function")
        for _ in range(self.config.samples):
            x1, x2 = gen.sample_point(), gen.sample_point()
            if x1 == x2:
                continue
            w = self.witnesses.separator_function(x1, x2)
            f = w.value
            tally.record(f(f.x1) == 0 and f(f.x2) == 1, f"separator of {x1}, {x2} has wrong values")
            tally.certified(self.keep(w.certificate), f"between {x1} and {x2}")
        return tally.result()

    def check_isolated_point(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("isolated_point")
        for _ in range(self.config.samples):
            s = gen.nonempty_expr()
            w = self.witnesses.isolated_point_of(s)
            tally.certified(self.keep(w.certificate), f"in {s}")
        return tally.result()

    def check_quasiregular(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("quasiregular")
        for _ in range(self.config.samples):
            d = gen.descriptor(gen.pool())
            x = self.witnesses.isolated_point_of(Open(d)).value
            tally.record(self.engine.is_clopen(FinitePoints((x,))), f"{{{x}}} is not clopen inside {d}")
        return tally.result()

    def check_hereditarily_disconnected(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("hereditarily_disconnected")
        for _ in range(self.config.samples):
            p, q = gen.sample_point(), gen.sample_point()
            if leq(p, q):
                continue
            ok = self.engine.is_clopen(UpSet(p)) and not UpSet(p).contains(q, self.universe)
            tally.record(ok, f"↑{p} does not split off {q}")
        return tally.result()

    # compactness and separate continuity

    def check_subcover(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("finite_subcover")
        for _ in range(self.config.samples):
            cover = gen.cover()
            w = self.witnesses.extract_finite_subcover(cover)
            tally.certified(self.keep(w.certificate), f"cover {[str(d) for d in cover]}")
        return tally.result()

    def check_regular_open_basics(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("regular_open_basics")
        for _ in range(self.config.samples):
            d = gen.descriptor(gen.pool())
            defect = self.engine.regular_open_defect(Open(d))
            tally.record(defect is None, f"{d} has the regular-open defect {defect}")
        return tally.result()

    def check_separate_continuity(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("separate_continuity")
        for _ in range(self.config.samples):
            a, b = gen.sample_point(), gen.sample_point()
            for left, right in ((a, b), (b, a)):
                w = gen.neighborhood_at(meet(left, right))
                modulus = self.witnesses.separate_continuity_modulus(left, right, w)
                tally.certified(self.keep(modulus.certificate), f"a={left} b={right} W={w}")
        return tally.result()

    # fc witnesses

    def check_joint_discontinuity(self) -> CheckResult:
        tally = _Tally("joint_discontinuity")
        w = self.witnesses.joint_discontinuity_certificate(self.config.depth)
        tally.certified(self.keep(w.certificate), f"depth {self.config.depth}")
        return tally.result()

    def check_closed_discrete(self) -> CheckResult:
        tally = _Tally("closed_discrete")
        w = self.witnesses.closed_discrete_witness()
        tally.certified(self.keep(w.certificate), f"{w.value}")
        return tally.result()

    def check_accumulation(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("accumulation_point")
        for _ in range(self.config.samples):
            s = gen.infinite_top_rank()
            w = self.witnesses.accumulation_point(s)
            tally.certified(self.keep(w.certificate), f"of {s}")
        return tally.result()

    def check_fczero_defect(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("fczero_defect")
        anchor = self.topology.id.anchor
        for _ in range(self.config.samples):
            code = gen.rng.choice([c for c in range(self.config.window) if c not in anchor.codes])
            b = A_SET.with_removed([code], self.universe) if self.universe.in_a(code) \
                else A_SET.with_added([code], self.universe)
            u = self.topology.canonical_base(anchor, (), b)
            defect = self.engine.regular_open_defect(Open(u))
            tally.record(defect is not None, f"{u} is regular open")
        return tally.result()

    def check_top_rank_dense(self) -> CheckResult:
        tally = _Tally("top_rank_dense")
        top = Not(LevelLE(self.universe.n - 1))
        tally.record(self.engine.equal(self.engine.closure(top), WHOLE), "the top rank is not dense")
        return tally.result()

    def check_zero_neighborhoods_not_closed(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("anchor_neighborhoods_not_closed")
        for _ in range(self.config.samples):
            u = gen.neighborhood_at(self.topology.id.anchor)
            tally.record(not self.engine.is_closed(Open(u)), f"{u} is closed")
        return tally.result()

    # collectionwise expansion

    def check_collectionwise(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("collectionwise_expand")
        for i in range(self.config.samples):
            family = gen.discrete_family(infinite=i % 2 == 0)
            w = self.witnesses.collectionwise_expand(family)
            tally.certified(self.keep(w.certificate), f"family {[str(f) for f in family]}")
        return tally.result()

    def check_non_discrete_rejected(self) -> CheckResult:
        tally = _Tally("non_discrete_rejected")
        family = [Cyl(ZERO, A_SET), Cyl(ZERO, CO_A_SET)]
        try:
            self.witnesses.collectionwise_expand(family)
            tally.record(False, "π(A), π(CoA) was expanded")
        except FamilyNotDiscreteError as e:
            tally.record(e.pair == (0, 1), f"rejected with pair {e.pair}")
        return tally.result()

    # top rank and regularity

    def check_top_rank_cover(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("top_rank_cover")
        for _ in range(self.config.samples):
            u = gen.neighborhood_at(ZERO)
            w = self.witnesses.top_rank_cover(u)
            tally.certified(self.keep(w.certificate), f"U={u}")
        return tally.result()

    def check_regularity_shrink(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("regularity_shrink")
        # zero neighbourhoods fail only where zero is the fc anchor
        expected = "failed" if self.topology.kind == TopologyKind.TAU_FC2 else "shrunk"
        for _ in range(self.config.samples):
            u = gen.neighborhood_at(ZERO)
            w = self.witnesses.regularity_shrink(u)
            status = w.certificate.payload["status"]
            tally.record(status == expected, f"U={u} gave {status}, expected {expected}")
            tally.certified(self.keep(w.certificate), f"U={u}")
        return tally.result()

    # extras

    def check_basic_opens_closed(self, gen: ExprGenerator) -> CheckResult:
        tally = _Tally("basic_opens_closed")
        for _ in range(self.config.samples):
            d = gen.descriptor(gen.pool())
            tally.record(self.engine.is_closed(Open(d)), f"{d} is not closed")
        return tally.result()

    def check_sequential(self, gen: ExprGenerator, bound: int = 8) -> CheckResult:
        """Fresh-pattern sequences of infinite sets converge to their limit points."""
        tally = _Tally("sequential_compactness")
        length = self.config.depth
        for _ in range(self.config.samples):
            s = gen.infinite_top_rank()
            analysis = self.engine.analyze(s)
            classes = analysis.limit_classes()
            if not classes:
                tally.record(False, f"{s} has no limit point")
                continue
            cls = classes[0]
            x = self.engine.representative(cls, analysis.codes)
            extras = analysis.verdicts[cls].difference(x).elems
            fresh_a = sum(1 for c in extras if self.universe.in_a(c))
            colors = (fresh_a, len(extras) - fresh_a)
            v = self.topology.test_neighborhood(x, analysis.codes | set(range(bound)))
            y = analysis.verdicts[cls]
            since: Optional[int] = None
            for k in range(length):
                tally.record(s.contains(y, self.universe), f"term {k} = {y} left {s}")
                inside = v.contains(y, self.universe)
                if inside and since is None:
                    since = k
                elif not inside:
                    since = None
                y = self.universe.fresh_point(x, colors, analysis.codes | x.codes | y.codes)
            tally.record(since is not None, f"sequence in {s} does not settle inside {v}")
        return tally.result()

    # oracle

    def check_oracle(self, gen: ExprGenerator) -> List[CheckResult]:
        window = Window(self.config.window, *self.config.pads)
        oracle = WindowOracle(self.topology, window)
        tallies = {op: _Tally(f"oracle_{op}") for op in ("limit_points", "closure", "interior")}
        stability = _Tally("oracle_padding_stable")
        for i in range(self.config.samples):
            s = gen.expr(depth=3)
            pairs = (("limit_points", self.engine.limit_points(s), oracle.limit_points(s)),
                     ("closure", self.engine.closure(s), oracle.closure(s)),
                     ("interior", self.engine.interior(s), oracle.interior(s)))
            for op, symbolic, brute in pairs:
                report = oracle.compare(op, s, symbolic, brute)
                tallies[op].record(report.agree, f"{s}: symbolic only {report.only_symbolic}, "
                                                 f"oracle only {report.only_oracle}")
            if i % 10 == 0:
                stability.record(padding_stable(self.topology, s, self.config.window,
                                                [self.config.pads, (3, 3)]), f"{s}")
        return [t.result() for t in tallies.values()] + [stability.result()]

    # negative controls

    def check_tamper_corpus(self) -> CheckResult:
        tally = _Tally("tamper_corpus")
        corpus = list(self.issued)
        if not corpus:
            p = Point.of(1)
            corpus = [self.witnesses.separate_continuity_modulus(p, p, self.topology.canonical_base(p)).certificate]
        rng = random.Random(self.config.seed)
        stored: Counter = Counter()
        rebuilt: Counter = Counter()
        for cert in corpus:
            tampered = mutate_certificate(cert, rng)
            result = verify_certificate(tampered)
            tally.record(not result.ok, f"tampered {cert.kind} payload {tampered.payload} still verifies")
            stored[result.layer or "verified"] += 1
            # same edit with a regenerated script; a mutant may be a legitimate certificate
            try:
                replay = verify_certificate(reseal(tampered, rebuild_script=True))
                rebuilt[replay.layer or "verified"] += 1
            except (EngineError, KeyError, TypeError, ValueError):
                rebuilt["payload"] += 1
        tally.note = f"rejected by {_layers(stored)}; with regenerated scripts {_layers(rebuilt)}"
        return tally.result()

    def check_semantic_tamper(self) -> CheckResult:
        tally = _Tally("semantic_tamper")
        joint = self.witnesses.joint_discontinuity_certificate(min(self.config.depth, 6)).certificate
        tally.record(not verify_certificate(collapse_sequence(joint)).ok, "collapsed sequence still verifies")
        closed = self.witnesses.closed_discrete_witness().certificate
        tally.record(not verify_certificate(swap_to_complement(closed)).ok, "π(CoA) passes as closed discrete")
        return tally.result()

    def check_color_blind_control(self) -> CheckResult:
        tally = _Tally("color_blind_control")
        s = Cyl(self.topology.id.anchor, A_SET)
        blind = ClosureEngine(self.topology, color_rule=False)
        oracle = WindowOracle(self.topology, Window(self.config.window, *self.config.pads))
        honest = oracle.compare("limit_points", s, self.engine.limit_points(s), oracle.limit_points(s))
        caught = oracle.compare("limit_points", s, blind.limit_points(s), oracle.limit_points(s))
        tally.record(honest.agree, f"engine disagrees with the oracle on {s}")
        tally.record(not caught.agree, f"color-blind rule agrees with the oracle on {s}")
        return tally.result()

    # suites

    def suite_checks(self, suite: str) -> List[CheckResult]:
        kind, t1 = self.kind, self.topology.id.is_t1
        fc = self.topology.id.is_fc
        gen = self.generator(suite)
        plan: List[Tuple[str, Callable[[], object]]] = []
        if suite == "laws":
            plan.append(("semilattice_laws", self.check_semilattice_laws))
        elif suite == "base":
            plan.append(("base_axioms", self.check_base))
        elif suite == "upsets":
            if not t1:
                plan.append(("not_t1", self.check_not_t1))
            else:
                plan += [("upset_neighborhood", lambda: self.check_upset_neighborhood(gen)),
                         ("upset_clopen", lambda: self.check_upset_clopen(gen)),
                         ("separator_function", lambda: self.check_separator(gen)),
                         ("isolated_point", lambda: self.check_isolated_point(gen)),
                         ("quasiregular", lambda: self.check_quasiregular(gen)),
                         ("hereditarily_disconnected", lambda: self.check_hereditarily_disconnected(gen))]
        elif suite == "continuity":
            plan.append(("separate_continuity", lambda: self.check_separate_continuity(gen)))
            if kind == TopologyKind.TAU_C:
                plan += [("finite_subcover", lambda: self.check_subcover(gen)),
                         ("regular_open_basics", lambda: self.check_regular_open_basics(gen))]
        elif suite == "fc_witnesses":
            if fc:
                plan += [("joint_discontinuity", self.check_joint_discontinuity),
                         ("closed_discrete", self.check_closed_discrete),
                         ("fczero_defect", lambda: self.check_fczero_defect(gen)),
                         ("top_rank_dense", self.check_top_rank_dense),
                         ("anchor_neighborhoods_not_closed", lambda: self.check_zero_neighborhoods_not_closed(gen))]
            if t1:
                plan.append(("accumulation_point", lambda: self.check_accumulation(gen)))
        elif suite == "collectionwise":
            if kind == TopologyKind.TAU_C and self.universe.n == 1:
                plan += [("collectionwise_expand", lambda: self.check_collectionwise(gen)),
                         ("non_discrete_rejected", self.check_non_discrete_rejected)]
        elif suite == "top_rank":
            if kind in (TopologyKind.TAU_C, TopologyKind.TAU_FC2):
                plan.append(("top_rank_cover", lambda: self.check_top_rank_cover(gen)))
        elif suite == "regularity":
            if t1:
                plan.append(("regularity_shrink", lambda: self.check_regularity_shrink(gen)))
        elif suite == "extras":
            if kind == TopologyKind.TAU_C:
                plan += [("basic_opens_closed", lambda: self.check_basic_opens_closed(gen)),
                         ("sequential_compactness", lambda: self.check_sequential(gen))]
        elif suite == "oracle":
            plan.append(("oracle", lambda: self.check_oracle(gen)))
        elif suite == "controls":
            plan.append(("tamper_corpus", self.check_tamper_corpus))
            if fc:
                plan += [("semantic_tamper", self.check_semantic_tamper),
                         ("color_blind_control", self.check_color_blind_control)]
        else:
            raise ValueError(f"unknown suite {suite!r}")

        results: List[CheckResult] = []
        for name, body in plan:
            self.logger.info(f"Running {suite}/{name} under {self.topology.id}")
            outcome = self._guarded(name, body)
            results += outcome if isinstance(outcome, list) else [outcome]
        return results


# Negative controls run last so the tamper corpus holds every certificate of the run.
SUITE_ORDER = SUITE_NAMES


def run_suite(config: RunConfig) -> SuiteReport:
    """Run the selected suites and write the JSON report when an output path is set."""
    runner = SuiteRunner(config)
    selected = config.suites or list(SUITE_ORDER)
    checks: List[CheckResult] = []
    for suite in SUITE_ORDER:
        if suite in selected:
            checks += runner.suite_checks(suite)
    report = SuiteReport(config=config, checks=checks, passed=all(c.passed for c in checks))
    failed = [c.name for c in checks if not c.passed]
    if failed:
        logger.error(f"{len(failed)} of {len(checks)} checks failed: {failed}")
    else:
        logger.info(f"All {len(checks)} checks passed under {runner.topology.id}")
    if config.out:
        save_report(report, config.out)
    return report


def report_json(report: SuiteReport) -> str:
    return json.dumps(report.model_dump(), sort_keys=True, indent=2)


def save_report(report: SuiteReport, path: str) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(report_json(report) + "\n")
    logger.info(f"Report written to {path}")
    return path
