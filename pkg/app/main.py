import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.config import (CERTIFICATES_DIR, DEFAULT_A, DEFAULT_DEPTH, DEFAULT_N, DEFAULT_SAMPLES, DEFAULT_SEED,
                        DEFAULT_TOPOLOGY, LOG_LEVEL, REPORTS_DIR, WINDOW_PADS, WINDOW_SIZE)
from app.models import SUITE_NAMES, TOPOLOGY_NAMES, RunConfig
from app.services.almost_set import InvalidAlmostSetError
from app.services.certificates import (CertificateError, load_certificate, save_certificate,
                                       verify_certificate)
from app.services.closure_engine import get_closure_engine
from app.services.descriptors import InvalidDescriptorError
from app.services.semilattice import ConfigError, EngineError, InvalidPointError
from app.services.set_algebra import Or
from app.services.suites import SuiteRunner, run_suite
from app.services.topology import Topology, get_topology
from app.services.window_oracle import Window, WindowOracle, WindowOverflowError, parse_pads, save_dump
from app.services.witnesses import TheoremWitnesses, Witness
from app.utils.expr_parser import ExprParseError, parse_descriptor, parse_expr, parse_point

# Configure logging
logging.basicConfig(
    level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

# Errors in the caller's input map to EXIT_USAGE; every other engine error is a failed check
USAGE_ERRORS = (ExprParseError, ConfigError, InvalidPointError, InvalidDescriptorError, InvalidAlmostSetError,
                WindowOverflowError, CertificateError, ValidationError, ValueError)

WITNESS_KINDS = ("upset-neighborhood", "separator", "separation-pair", "isolated-point", "separate-continuity",
                 "joint-discontinuity", "closed-discrete", "accumulation-point", "subcover", "regularity-shrink",
                 "top-rank-cover", "collectionwise")


def add_topology_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--topology", choices=TOPOLOGY_NAMES, default=DEFAULT_TOPOLOGY)
    parser.add_argument("--n", type=int, default=DEFAULT_N)
    parser.add_argument("--A", dest="a_spec", default=DEFAULT_A, help="even, odd or (almost A|CoA + [..] - [..])")
    parser.add_argument("--anchor", default=None, help="distinguished point of tau_fcn, e.g. '{0}'")


def add_window_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window", type=int, default=WINDOW_SIZE)
    parser.add_argument("--pads", default=WINDOW_PADS, help="padding codes per color, 'A,CoA'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expn", description="Symbolic topologies on the semilattice exp_n λ")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="run property suites and write a JSON report")
    add_topology_flags(check)
    add_window_flags(check)
    check.add_argument("--suite", action="append", choices=SUITE_NAMES, help="repeatable; default all")
    check.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    check.add_argument("--seed", type=int, default=DEFAULT_SEED)
    check.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    check.add_argument("--out", default=None)

    witness = commands.add_parser("witness", help="produce a certificate for one theorem-witness operation")
    witness.add_argument("kind", choices=WITNESS_KINDS)
    add_topology_flags(witness)
    witness.add_argument("--expr", action="append", default=[])
    witness.add_argument("--point", action="append", default=[])
    witness.add_argument("--open", action="append", default=[])
    witness.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    witness.add_argument("--out", default=None)

    verify = commands.add_parser("verify", help="verify a certificate file")
    verify.add_argument("path")

    evaluate = commands.add_parser("eval", help="evaluate one expression")
    evaluate.add_argument("expr")
    add_topology_flags(evaluate)
    evaluate.add_argument("--member", default=None, metavar="POINT")
    evaluate.add_argument("--closure", action="store_true")
    evaluate.add_argument("--interior", action="store_true")
    evaluate.add_argument("--limit", action="store_true")
    evaluate.add_argument("--empty", action="store_true")

    compare = commands.add_parser("oracle-compare", help="compare symbolic results with the window oracle")
    add_topology_flags(compare)
    add_window_flags(compare)
    compare.add_argument("--expr", default=None)
    compare.add_argument("--dump", default=None, metavar="PATH")
    compare.add_argument("--seed", type=int, default=DEFAULT_SEED)
    compare.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    return parser


def topology_from(args: argparse.Namespace) -> Topology:
    anchor = parse_point(args.anchor) if args.anchor else None
    return get_topology(args.topology, args.n, args.a_spec, anchor)


def config_from(args: argparse.Namespace, suites: Optional[List[str]] = None) -> RunConfig:
    return RunConfig(topology=args.topology, n=args.n, window=args.window, pads=parse_pads(args.pads),
                     a_spec=args.a_spec, anchor=args.anchor, suites=suites, out=getattr(args, "out", None),
                     depth=getattr(args, "depth", DEFAULT_DEPTH), seed=args.seed, samples=args.samples)


def cmd_check(args: argparse.Namespace) -> int:
    config = config_from(args, args.suite)
    if config.out is None:
        config = config.model_copy(update={"out": os.path.join(REPORTS_DIR, f"{config.topology}-n{config.n}.json")})
    report = run_suite(config)
    for check in report.checks:
        mark = "PASS" if check.passed else "FAIL"
        line = f"{mark} {check.name}: {check.detail}"
        if check.counterexample:
            line += f" | {check.counterexample}"
        print(line)
    print(f"report: {config.out}")
    return EXIT_OK if report.passed else EXIT_FAILED


def _one(values: List[str], what: str, count: int = 1) -> List[str]:
    if len(values) != count:
        raise ValueError(f"expected {count} --{what} value(s), got {len(values)}")
    return values


def produce_witness(args: argparse.Namespace, topology: Topology) -> Witness:
    universe = topology.universe
    witnesses = TheoremWitnesses(topology)
    points = [parse_point(p, universe) for p in args.point]
    opens = [parse_descriptor(d, universe) for d in args.open]
    exprs = [parse_expr(e, universe) for e in args.expr]
    kind = args.kind
    if kind == "upset-neighborhood":
        _one(args.point, "point")
        return witnesses.neighborhood_in_upset(points[0])
    if kind == "separator":
        _one(args.point, "point", 2)
        return witnesses.separator_function(points[0], points[1])
    if kind == "separation-pair":
        _one(args.point, "point", 2)
        return witnesses.separation_pair(points[0], points[1])
    if kind == "isolated-point":
        _one(args.expr, "expr")
        return witnesses.isolated_point_of(exprs[0])
    if kind == "separate-continuity":
        _one(args.point, "point", 2)
        _one(args.open, "open")
        return witnesses.separate_continuity_modulus(points[0], points[1], opens[0])
    if kind == "joint-discontinuity":
        return witnesses.joint_discontinuity_certificate(args.depth)
    if kind == "closed-discrete":
        return witnesses.closed_discrete_witness()
    if kind == "accumulation-point":
        _one(args.expr, "expr")
        return witnesses.accumulation_point(exprs[0])
    if kind == "subcover":
        if not opens:
            raise ValueError("subcover needs at least one --open")
        return witnesses.extract_finite_subcover(opens)
    if kind == "regularity-shrink":
        _one(args.open, "open")
        return witnesses.regularity_shrink(opens[0])
    if kind == "top-rank-cover":
        _one(args.open, "open")
        return witnesses.top_rank_cover(opens[0])
    if not exprs:
        raise ValueError("collectionwise needs at least one --expr")
    return witnesses.collectionwise_expand(exprs)


def cmd_witness(args: argparse.Namespace) -> int:
    topology = topology_from(args)
    witness = produce_witness(args, topology)
    cert = witness.certificate
    path = args.out or os.path.join(CERTIFICATES_DIR, f"{cert.kind}.json")
    save_certificate(cert, path)
    result = verify_certificate(cert)
    print(f"{cert.kind}: {path}")
    print(f"verified: {str(result.ok).lower()} ({result.checked} assertions)")
    return EXIT_OK if result.ok else EXIT_FAILED


def cmd_verify(args: argparse.Namespace) -> int:
    cert = load_certificate(args.path)
    result = verify_certificate(cert)
    print(json.dumps(result.model_dump(), sort_keys=True, indent=2))
    if not result.ok:
        logger.error(f"{args.path} fails verification at assertion {result.failed_index}: {result.reason}")
        return EXIT_FAILED
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    topology = topology_from(args)
    universe = topology.universe
    s = parse_expr(args.expr, universe)
    engine = get_closure_engine(topology)
    print(f"expr: {s}")
    if args.member is not None:
        p = parse_point(args.member, universe)
        print(f"member {p}: {str(topology.algebra.member(s, p)).lower()}")
    if args.empty:
        empty, witness = topology.algebra.is_empty(s)
        print("empty" if empty else f"nonempty, witness {witness}")
    if args.limit or args.closure:
        analysis = engine.analyze(s)
        print(f"exact: {str(analysis.exact).lower()}")
        if args.limit:
            if analysis.exact:
                print(f"limit: {analysis.result}")
            else:
                print(f"limit lower: {analysis.lower}")
                print(f"limit upper: {analysis.upper}")
        if args.closure:
            if analysis.exact:
                print(f"closure: {engine.closure(s)}")
            else:
                print(f"closure lower: {Or((s, analysis.lower))}")
                print(f"closure upper: {Or((s, analysis.upper))}")
    if args.interior:
        print(f"interior: {engine.interior(s)}")
    return EXIT_OK


def cmd_oracle_compare(args: argparse.Namespace) -> int:
    if args.expr is None:
        config = config_from(args, ["oracle"])
        results = SuiteRunner(config).suite_checks("oracle")
        for check in results:
            print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}")
        return EXIT_OK if all(c.passed for c in results) else EXIT_FAILED
    topology = topology_from(args)
    s = parse_expr(args.expr, topology.universe)
    oracle = WindowOracle(topology, Window(args.window, *parse_pads(args.pads)))
    engine = get_closure_engine(topology)
    reports = [oracle.compare("limit_points", s, engine.limit_points(s), oracle.limit_points(s)),
               oracle.compare("closure", s, engine.closure(s), oracle.closure(s)),
               oracle.compare("interior", s, engine.interior(s), oracle.interior(s))]
    for report in reports:
        print(json.dumps(report.model_dump(), sort_keys=True))
    if args.dump:
        save_dump(oracle.dump(s), args.dump)
        print(f"dump: {args.dump}")
    return EXIT_OK if all(r.agree for r in reports) else EXIT_FAILED


COMMANDS = {
    "check": cmd_check,
    "witness": cmd_witness,
    "verify": cmd_verify,
    "eval": cmd_eval,
    "oracle-compare": cmd_oracle_compare,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ExprParseError as e:
        logger.error(f"Parse error at position {e.position}: {e}")
        print(f"parse error at position {e.position}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except USAGE_ERRORS as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_USAGE
    except EngineError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
