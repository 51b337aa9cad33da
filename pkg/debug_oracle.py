import os
import sys
import json
import logging

from app.services.closure_engine import ClosureEngine, get_closure_engine
from app.services.topology import get_topology
from app.services.window_oracle import Window, WindowOracle, save_dump
from app.utils.expr_parser import parse_expr

# Configure logging
logging.basicConfig(level=logging.INFO,
                   format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

# Defaults - adjust as needed
TOPOLOGY = os.getenv("EXPN_TOPOLOGY", "tau_fc2")
N = int(os.getenv("EXPN_N", "2"))
WINDOW = 8
DUMPS_DIR = "./data/dumps"

EXAMPLES = [
    "(cyl {} (almost A + [] - []))",
    "(cyl {} (almost CoA + [] - []))",
    "(up {1})",
    "(not (lev 1))",
]


def compare_all(topology, oracle, s, color_rule=True):
    """Log symbolic vs. oracle results for the three closure operations."""
    engine = get_closure_engine(topology) if color_rule else ClosureEngine(topology, color_rule=False)
    pairs = [
        ("limit_points", engine.limit_points(s), oracle.limit_points(s)),
        ("closure", engine.closure(s), oracle.closure(s)),
        ("interior", engine.interior(s), oracle.interior(s)),
    ]
    for op, symbolic, brute in pairs:
        report = oracle.compare(op, s, symbolic, brute)
        if report.agree:
            logger.info(f"{op}: agree ({len(brute)} oracle points)")
        else:
            logger.warning(f"{op}: symbolic only {report.only_symbolic}, oracle only {report.only_oracle}")


def dump_expression(oracle, s, index):
    """Write the oracle tables for one expression."""
    path = os.path.join(DUMPS_DIR, f"{oracle.topology.kind.value}-{index}.json")
    save_dump(oracle.dump(s), path)
    logger.info(f"Dump written to {path}")
    return path


def main():
    topology = get_topology(TOPOLOGY, N)
    oracle = WindowOracle(topology, Window(WINDOW))
    logger.info(f"Oracle over {len(oracle.points)} points, codes {oracle.codes}")

    texts = sys.argv[1:] or EXAMPLES
    for index, text in enumerate(texts):
        logger.info(f"\n=== {text} under {topology.id} ===")
        s = parse_expr(text, topology.universe)
        compare_all(topology, oracle, s)
        if topology.id.is_fc:
            logger.info("Color-blind rule:")
            compare_all(topology, oracle, s, color_rule=False)
        path = dump_expression(oracle, s, index)
        with open(path, "r", encoding="utf-8") as f:
            tables = json.load(f)
        logger.info(f"members in window: {len(tables['members'])}, limit points: {tables['limit_points']}")

    logger.info("\n=== Debug Complete ===")

if __name__ == "__main__":
    main()
