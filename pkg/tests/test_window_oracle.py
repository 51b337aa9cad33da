import json
import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

os.environ.setdefault("LOG_LEVEL", "WARNING")

import pytest  # noqa: E402

from app.services.almost_set import A_SET  # noqa: E402
from app.services.closure_engine import ClosureEngine, get_closure_engine  # noqa: E402
from app.services.semilattice import Point, ZERO  # noqa: E402
from app.services.set_algebra import Cyl, FinitePoints, Or, UpSet  # noqa: E402
from app.services.topology import get_topology  # noqa: E402
from app.services.window_oracle import (Window, WindowOracle, WindowOverflowError, padding_stable,  # noqa: E402
                                        parse_pads, save_dump)
from app.utils.generators import ExprGenerator  # noqa: E402

TAU_C = get_topology("tau_c", 2)
TAU_FC2 = get_topology("tau_fc2", 2)


def test_window_points_include_pads_of_both_colors():
    oracle = WindowOracle(TAU_C, Window(4, 1, 2))
    assert oracle.codes == [0, 1, 2, 3, 4, 5, 7]
    assert len(oracle.points) == 1 + 7 + 21


def test_parse_pads():
    assert parse_pads("2,3") == (2, 3)
    with pytest.raises(ValueError):
        parse_pads("2")


def test_singletons_of_a_under_both_topologies():
    s = Cyl(ZERO, A_SET)
    assert WindowOracle(TAU_C, Window(8)).limit_points(s) == {ZERO}
    assert WindowOracle(TAU_FC2, Window(8)).limit_points(s) == set()


def test_oracle_agrees_with_the_closure_engine_on_examples():
    examples = [Cyl(ZERO, A_SET), UpSet(Point.of(1)), FinitePoints((Point.of(1), Point.of(2, 3)))]
    for topology in (TAU_C, TAU_FC2):
        engine = get_closure_engine(topology)
        oracle = WindowOracle(topology, Window(8))
        for s in examples:
            assert oracle.compare("limit_points", s, engine.limit_points(s), oracle.limit_points(s)).agree
            assert oracle.compare("closure", s, engine.closure(s), oracle.closure(s)).agree
            assert oracle.compare("interior", s, engine.interior(s), oracle.interior(s)).agree


def test_color_blind_rule_disagrees_with_the_oracle():
    blind = ClosureEngine(TAU_FC2, color_rule=False)
    oracle = WindowOracle(TAU_FC2, Window(8))
    s = Cyl(ZERO, A_SET)
    report = oracle.compare("limit_points", s, blind.limit_points(s), oracle.limit_points(s))
    assert not report.agree
    assert report.only_symbolic == ["{}"]


def test_overflow():
    with pytest.raises(WindowOverflowError):
        WindowOracle(TAU_C, Window(8, 0, 1))
    with pytest.raises(WindowOverflowError):
        WindowOracle(TAU_C, Window(8)).limit_points(UpSet(Point.of(20)))
    with pytest.raises(WindowOverflowError):
        WindowOracle(TAU_C, Window(3)).limit_points(UpSet(Point.of(1)))
    with pytest.raises(WindowOverflowError):
        WindowOracle(get_topology("tau_fcn", 3, anchor=Point.of(5)), Window(4))


def test_hitting_sets_as_large_as_the_support_still_remove_a_point():
    # zero needs both support codes excluded; the smallest saturating window is 2*2 + n
    s = Or((UpSet(Point.of(1)), UpSet(Point.of(2))))
    expected = {Point.of(1), Point.of(2)}
    oracle = WindowOracle(TAU_C, Window(6))
    assert oracle.limit_points(s) == expected
    assert oracle.compare("limit_points", s, get_closure_engine(TAU_C).limit_points(s), expected).agree
    with pytest.raises(WindowOverflowError):
        WindowOracle(TAU_C, Window(5)).limit_points(s)


def test_tau_0_oracle():
    topology = get_topology("tau_0", 2)
    oracle = WindowOracle(topology, Window(6))
    assert oracle.limit_points(UpSet(Point.of(1))) == {ZERO}
    assert oracle.limit_points(FinitePoints((ZERO,))) == set()


def test_padding_stable():
    s = Cyl(Point.of(1), A_SET)
    assert padding_stable(TAU_C, s, 8, [(1, 1), (2, 2), (3, 1)])
    assert padding_stable(TAU_FC2, Cyl(ZERO, A_SET), 8, [(1, 1), (3, 3)])


def test_dump(tmp_path):
    oracle = WindowOracle(TAU_C, Window(6))
    dump = oracle.dump(UpSet(Point.of(1)))
    assert dump.limit_points == ["{1}"]
    assert dump.members[0] == "{1}"
    assert dump.closure == dump.members
    path = save_dump(dump, str(tmp_path / "dumps" / "up1.json"))
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    assert data["codes"] == oracle.codes
    assert data["expr"] == str(UpSet(Point.of(1)))


@pytest.mark.parametrize("kind,n,window", [("tau_c", 1, 8), ("tau_c", 2, 8), ("tau_fc2", 2, 8), ("tau_fcn", 3, 9)])
def test_generated_corpus_agrees(kind, n, window):
    topology = get_topology(kind, n)
    support = max(1, (window - n) // 2 - len(topology.codes))
    generator = ExprGenerator(topology, seed=5, core=window, max_support=support)
    engine = get_closure_engine(topology)
    oracle = WindowOracle(topology, Window(window))
    for _ in range(8):
        s = generator.expr(depth=2)
        report = oracle.compare("limit_points", s, engine.limit_points(s), oracle.limit_points(s))
        assert report.agree, report


if __name__ == "__main__":
    # Run ad-hoc if executed directly
    test_window_points_include_pads_of_both_colors()
    test_singletons_of_a_under_both_topologies()
    print("All ad-hoc tests completed")
