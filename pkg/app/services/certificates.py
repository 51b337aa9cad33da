"""Certificates: finite payloads plus a script of membership and emptiness assertions.

A certificate verifies when (1) its digest matches, (2) the script rebuilt
from the payload by the kind's builder equals the stored script and (3) every
assertion evaluates to its expected value. Evaluation uses member,
member_open and emptiness only; the closure engine is never consulted.
"""
import hashlib
import json
import logging
import os
from itertools import combinations
from typing import Any, Callable, Dict, Iterable, List

from app.models import Assertion, Certificate, CertificateContext, VerificationResult
from app.services.descriptors import OpenDescriptor, UpMinus
from app.services.semilattice import EngineError, Point, leq, meet
from app.services.set_algebra import (And, FinitePoints, LevelLE, Not, Open, Or, SetExpr, UpSet)
from app.services.topology import Topology, TopologyKind, get_topology
from app.utils.expr_parser import parse_descriptor, parse_expr, parse_point

logger = logging.getLogger(__name__)


class CertificateError(EngineError):
    """Raised for unreadable certificates or unknown certificate kinds."""
    pass


# Assertion constructors

def member(s: SetExpr, p: Point, expect: bool = True) -> Assertion:
    return Assertion(op="member", args={"expr": str(s), "point": str(p)}, expect=expect)


def member_open(d: OpenDescriptor, p: Point, expect: bool = True) -> Assertion:
    return Assertion(op="member_open", args={"open": str(d), "point": str(p)}, expect=expect)


def empty(s: SetExpr, expect: bool = True) -> Assertion:
    return Assertion(op="empty", args={"expr": str(s)}, expect=expect)


def open_descriptor(d: OpenDescriptor) -> Assertion:
    return Assertion(op="open_descriptor", args={"open": str(d)})


def meet_is(left: Point, right: Point, result: Point) -> Assertion:
    return Assertion(op="meet", args={"left": str(left), "right": str(right), "result": str(result)})


def fresh_extension(x: Point, y: Point, s: SetExpr) -> Assertion:
    return Assertion(op="fresh_extension", args={"x": str(x), "y": str(y), "expr": str(s)})


def context_for(topology: Topology) -> CertificateContext:
    anchor = str(topology.id.anchor) if topology.kind == TopologyKind.TAU_FCN else None
    return CertificateContext(n=topology.universe.n, a_spec=topology.universe.a_spec,
                              topology=topology.kind.value, anchor=anchor)


def topology_for(context: CertificateContext) -> Topology:
    anchor = parse_point(context.anchor) if context.anchor else None
    return get_topology(context.topology, context.n, context.a_spec, anchor)


# Shared script fragments

def closed_set_assertions(topology: Topology, s: SetExpr) -> List[Assertion]:
    """One thinness check per candidate class outside s: its test neighbourhood misses s."""
    codes = s.support | topology.codes
    script = []
    for pattern in topology.algebra.patterns(codes, max_size=topology.universe.n - 1):
        x = topology.algebra.instantiate(pattern, codes)
        if s.contains(x, topology.universe):
            continue
        v = topology.test_neighborhood(x, codes)
        script += [member(s, x, expect=False), member_open(v, x), empty(And((Open(v), s)))]
    return script


def discrete_set_assertions(topology: Topology, s: SetExpr) -> List[Assertion]:
    """One check per candidate class: its test neighbourhood meets s at most in the point itself."""
    codes = s.support | topology.codes
    script = []
    for pattern in topology.algebra.patterns(codes, max_size=topology.universe.n - 1):
        x = topology.algebra.instantiate(pattern, codes)
        v = topology.test_neighborhood(x, codes)
        script += [member_open(v, x), empty(And((Open(v), s, Not(FinitePoints((x,))))))]
    return script


def limit_point_assertions(topology: Topology, s: SetExpr, x: Point, y: Point) -> List[Assertion]:
    """x is a limit point of s: a member y ⊋ x with fresh extra codes survives the test neighbourhood."""
    codes = s.support | topology.codes
    v = topology.test_neighborhood(x, codes)
    return [fresh_extension(x, y, s), member(s, y), member_open(v, y)]


def exact_meet_pattern(a: Point, t: Point) -> SetExpr:
    """Points q with a ∩ q = t."""
    return And((UpSet(t), *[Not(UpSet(Point.of(c))) for c in a.elems if c not in t.codes]))


def zero_test_neighborhood(topology: Topology, support_bound: int, edit_bound: int) -> OpenDescriptor:
    """Neighbourhood of the fc anchor excluding ↑(anchor ∪ {c}) for c below the support bound
    and removing π(A ∪ [0, edit_bound))."""
    anchor = topology.id.anchor
    exclusions = [anchor.with_code(c) for c in range(support_bound) if c not in anchor.codes]
    b = topology.canonical_base(anchor).b.with_added(range(edit_bound), topology.universe)
    return topology.canonical_base(anchor, exclusions, b)


# Script builders, one per certificate kind

def _script_upset_neighborhood(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    x = parse_point(payload["point"])
    v = parse_descriptor(payload["open"])
    return [open_descriptor(v), member_open(v, x), empty(And((Open(v), Not(UpSet(x)))))]


def _script_separator_function(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    x1 = parse_point(payload["x1"])
    x2 = parse_point(payload["x2"])
    indicator = UpSet(x2)
    base = UpMinus(x2)
    script = [member(indicator, x1, expect=False), member(indicator, x2),
              open_descriptor(base), empty(And((indicator, Not(Open(base))))),
              empty(And((Open(base), Not(indicator))))]
    return script + closed_set_assertions(topology, indicator)


def _script_isolated_point(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    s = parse_expr(payload["expr"], topology.universe)
    x = parse_point(payload["point"])
    v = parse_descriptor(payload["open"])
    return [member(s, x), open_descriptor(v), member_open(v, x),
            empty(And((Open(v), s, Not(FinitePoints((x,))))))]


def _script_separation_pair(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    p, q = parse_point(payload["p"]), parse_point(payload["q"])
    left, right = parse_descriptor(payload["left"]), parse_descriptor(payload["right"])
    return [open_descriptor(left), open_descriptor(right), member_open(left, p), member_open(right, q),
            empty(And((Open(left), Open(right))))]


def _script_separate_continuity(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    a, b = parse_point(payload["a"]), parse_point(payload["b"])
    w, v = parse_descriptor(payload["W"]), parse_descriptor(payload["V"])
    ab = meet(a, b)
    script = [open_descriptor(w), open_descriptor(v), meet_is(a, b, ab), member_open(w, ab), member_open(v, b)]
    for k in range(a.rank + 1):
        for t in _subpoints(a, k):
            if not w.contains(t, topology.universe):
                script.append(empty(And((Open(v), exact_meet_pattern(a, t)))))
    return script


def _script_joint_discontinuity(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    anchor = topology.id.anchor
    w = parse_descriptor(payload["W"])
    triples = [[parse_point(p) for p in triple] for triple in payload["sequence"]]
    if len(triples) != payload["depth"]:
        raise CertificateError(f"sequence has {len(triples)} terms, depth says {payload['depth']}")
    script = [open_descriptor(w), member_open(w, anchor)]
    for u, v, product in triples:
        script += [meet_is(u, v, product), member_open(w, product, expect=False)]
    for support_bound, edit_bound, k0 in payload["index_function"]:
        n0 = zero_test_neighborhood(topology, support_bound, edit_bound)
        script.append(open_descriptor(n0))
        for u, v, _ in triples[k0:]:
            script += [member_open(n0, u), member_open(n0, v)]
    return script


def _script_closed_discrete(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    s = parse_expr(payload["expr"], topology.universe)
    sample = [parse_point(p) for p in payload["members"]]
    return [member(s, p) for p in sample] + discrete_set_assertions(topology, s)


def _script_accumulation_point(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    s = parse_expr(payload["expr"], topology.universe)
    x, y = parse_point(payload["point"]), parse_point(payload["witness"])
    top = LevelLE(topology.universe.n - 1)
    return [empty(And((s, top)))] + limit_point_assertions(topology, s, x, y)


def _script_subcover(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    cover = [parse_descriptor(d) for d in payload["cover"]]
    kept = [parse_descriptor(d) for d in payload["subcover"]]
    if not {str(d) for d in kept} <= {str(d) for d in cover}:
        raise CertificateError("subcover names a set outside the cover")
    script = [open_descriptor(d) for d in cover]
    script.append(empty(Not(Or(tuple(Open(d) for d in kept)))))
    return script


def _script_regularity_shrink(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    u = parse_descriptor(payload["U"])
    script = [open_descriptor(u)]
    if payload["status"] == "shrunk":
        v = parse_descriptor(payload["V"])
        script += [open_descriptor(v), member_open(v, v.anchor), empty(And((Open(v), Not(Open(u)))))]
        return script + closed_set_assertions(topology, Open(v))
    x, y = parse_point(payload["defect"]), parse_point(payload["witness"])
    return script + [member_open(u, x, expect=False)] + limit_point_assertions(topology, Open(u), x, y)


def _script_top_rank_cover(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    u = parse_descriptor(payload["U"])
    generators = [parse_point(g) for g in payload["generators"]]
    top = Not(LevelLE(topology.universe.n - 1))
    covered = Or((Open(u), *[UpSet(g) for g in generators]))
    return [open_descriptor(u), member_open(u, u.anchor), empty(And((top, Not(covered))))]


def _script_collectionwise(topology: Topology, payload: Dict[str, Any]) -> List[Assertion]:
    family = [parse_expr(f, topology.universe) for f in payload["family"]]
    expansion = [parse_expr(u, topology.universe) for u in payload["expansion"]]
    if len(family) != len(expansion):
        raise CertificateError("expansion does not match the family")
    script = []
    for f, u in zip(family, expansion):
        script.append(empty(And((f, Not(u)))))
    for i in range(len(expansion)):
        for j in range(i + 1, len(expansion)):
            script.append(empty(And((expansion[i], expansion[j]))))
    for u in expansion:
        script += closed_set_assertions(topology, Not(u))
    return script


SCRIPT_BUILDERS: Dict[str, Callable[[Topology, Dict[str, Any]], List[Assertion]]] = {
    "UpsetNeighborhood": _script_upset_neighborhood,
    "SeparatorFunction": _script_separator_function,
    "IsolatedPointWitness": _script_isolated_point,
    "SeparationPair": _script_separation_pair,
    "SeparateContinuityModulus": _script_separate_continuity,
    "JointDiscontinuity": _script_joint_discontinuity,
    "ClosedDiscrete": _script_closed_discrete,
    "AccumulationPoint": _script_accumulation_point,
    "Subcover": _script_subcover,
    "RegularityShrink": _script_regularity_shrink,
    "TopRankCover": _script_top_rank_cover,
    "CollectionwiseExpansion": _script_collectionwise,
}


def _subpoints(a: Point, k: int) -> Iterable[Point]:
    return (Point(combo) for combo in combinations(a.elems, k))


# Sealing, issuing and verification

def compute_digest(cert: Certificate) -> str:
    body = json.dumps(cert.model_dump(exclude={"digest"}), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def seal(cert: Certificate) -> Certificate:
    return cert.model_copy(update={"digest": compute_digest(cert)})


def reseal(cert: Certificate, rebuild_script: bool = False) -> Certificate:
    """Recompute the digest after an edit, optionally regenerating the script from the payload."""
    if rebuild_script:
        topology = topology_for(cert.context)
        cert = cert.model_copy(update={"script": SCRIPT_BUILDERS[cert.kind](topology, cert.payload)})
    return seal(cert)


def issue(kind: str, topology: Topology, payload: Dict[str, Any]) -> Certificate:
    if kind not in SCRIPT_BUILDERS:
        raise CertificateError(f"Unknown certificate kind {kind!r}")
    script = SCRIPT_BUILDERS[kind](topology, payload)
    cert = seal(Certificate(kind=kind, context=context_for(topology), payload=payload, script=script))
    logger.info(f"Issued {kind} certificate with {len(script)} assertions under {topology.id}")
    return cert


def evaluate(assertion: Assertion, topology: Topology) -> bool:
    universe = topology.universe
    args = assertion.args
    if assertion.op == "member":
        value = topology.algebra.member(parse_expr(args["expr"], universe), parse_point(args["point"], universe))
    elif assertion.op == "member_open":
        value = topology.member_open(parse_descriptor(args["open"], universe), parse_point(args["point"], universe))
    elif assertion.op == "empty":
        value = topology.algebra.find_member(parse_expr(args["expr"], universe)) is None
    elif assertion.op == "open_descriptor":
        value = topology.is_valid(parse_descriptor(args["open"], universe))
    elif assertion.op == "meet":
        left, right = parse_point(args["left"], universe), parse_point(args["right"], universe)
        value = meet(left, right) == parse_point(args["result"], universe)
    elif assertion.op == "fresh_extension":
        x, y = parse_point(args["x"], universe), parse_point(args["y"], universe)
        codes = parse_expr(args["expr"], universe).support | topology.codes
        value = x != y and leq(x, y) and not (y.difference(x).codes & codes)
    else:
        raise CertificateError(f"Unknown assertion op {assertion.op!r}")
    return value == assertion.expect


def verify_certificate(cert: Certificate) -> VerificationResult:
    if compute_digest(cert) != cert.digest:
        return VerificationResult(ok=False, kind=cert.kind, checked=0, reason="digest mismatch",
                                  layer="digest")
    if cert.kind not in SCRIPT_BUILDERS:
        return VerificationResult(ok=False, kind=cert.kind, checked=0, reason=f"unknown kind {cert.kind}",
                                  layer="kind")
    try:
        topology = topology_for(cert.context)
        rebuilt = SCRIPT_BUILDERS[cert.kind](topology, cert.payload)
    except (EngineError, KeyError, TypeError, ValueError) as e:
        return VerificationResult(ok=False, kind=cert.kind, checked=0, reason=f"payload rejected: {e}",
                                  layer="payload")
    for index in range(max(len(rebuilt), len(cert.script))):
        stored = cert.script[index] if index < len(cert.script) else None
        expected = rebuilt[index] if index < len(rebuilt) else None
        if stored != expected:
            return VerificationResult(ok=False, kind=cert.kind, checked=index, failed_index=index,
                                      reason="script does not follow from the payload", layer="script")
    for index, assertion in enumerate(cert.script):
        try:
            ok = evaluate(assertion, topology)
        except EngineError as e:
            logger.error(f"Assertion {index} of {cert.kind} raised: {e}")
            ok = False
        if not ok:
            return VerificationResult(ok=False, kind=cert.kind, checked=index + 1, failed_index=index,
                                      reason=f"{assertion.op} {assertion.args} is not {assertion.expect}",
                                      layer="evaluation")
    return VerificationResult(ok=True, kind=cert.kind, checked=len(cert.script))


def certificate_json(cert: Certificate) -> str:
    return json.dumps(cert.model_dump(), sort_keys=True, indent=2)


def save_certificate(cert: Certificate, path: str) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(certificate_json(cert) + "\n")
    logger.info(f"Certificate written to {path}")
    return path


def load_certificate(path: str) -> Certificate:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return Certificate.model_validate(json.load(f))
    except (OSError, ValueError) as e:
        raise CertificateError(f"Cannot read certificate {path}: {e}")
