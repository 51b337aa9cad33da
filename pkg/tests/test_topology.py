import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

os.environ.setdefault("LOG_LEVEL", "WARNING")

import pytest  # noqa: E402

from app.services.almost_set import A_SET  # noqa: E402
from app.services.descriptors import FcZero, InvalidDescriptorError, IsolatedPoint, UpMinus, Whole  # noqa: E402
from app.services.semilattice import ConfigError, Point, ZERO, all_points  # noqa: E402
from app.services.set_algebra import FinitePoints  # noqa: E402
from app.services.topology import (NotT1TopologyError, RefinementError, SeparationError, TopologyId,  # noqa: E402
                                   TopologyKind, get_topology)

TAU_0 = get_topology("tau_0", 2)
TAU_C = get_topology("tau_c", 2)
TAU_FC2 = get_topology("tau_fc2", 2)


def test_topology_constraints():
    with pytest.raises(ConfigError):
        TopologyId(TopologyKind.TAU_FC2, 3)
    with pytest.raises(ConfigError):
        TopologyId(TopologyKind.TAU_FCN, 2)
    with pytest.raises(ConfigError):
        TopologyId(TopologyKind.TAU_FCN, 3, Point.of(0, 1))
    with pytest.raises(ConfigError):
        TopologyId(TopologyKind.TAU_C, 2, Point.of(0))
    tau_fcn = get_topology("tau_fcn", 3)
    assert tau_fcn.id.anchor == Point.of(0)
    assert str(tau_fcn.id) == "tau_fcn@{0}"
    assert get_topology("tau_c", 2) is TAU_C


def test_descriptor_validity_per_topology():
    assert TAU_0.is_valid(IsolatedPoint(Point.of(1)))
    assert TAU_0.is_valid(Whole())
    assert not TAU_0.is_valid(UpMinus(ZERO, (Point.of(1),)))
    assert TAU_C.is_valid(IsolatedPoint(Point.of(1, 2)))
    assert not TAU_C.is_valid(IsolatedPoint(Point.of(1)))
    assert not TAU_C.is_valid(FcZero(UpMinus(ZERO), A_SET))
    assert TAU_FC2.is_valid(FcZero(UpMinus(ZERO), A_SET))
    assert not TAU_FC2.is_valid(FcZero(UpMinus(Point.of(1)), A_SET))
    with pytest.raises(InvalidDescriptorError):
        TAU_C.validate(IsolatedPoint(Point.of(1)))


def test_basic_open_membership():
    u = UpMinus(ZERO, (Point.of(1),))
    assert TAU_C.member_open(u, Point.of(2))
    assert TAU_C.member_open(u, Point.of(2, 3))
    assert not TAU_C.member_open(u, Point.of(1))
    assert not TAU_C.member_open(u, Point.of(1, 2))
    zero_nbhd = TAU_FC2.canonical_base(ZERO)
    assert zero_nbhd == FcZero(UpMinus(ZERO), A_SET)
    assert TAU_FC2.member_open(zero_nbhd, ZERO)
    assert TAU_FC2.member_open(zero_nbhd, Point.of(1))
    assert TAU_FC2.member_open(zero_nbhd, Point.of(2, 4))
    assert not TAU_FC2.member_open(zero_nbhd, Point.of(2))


def test_tau_fcn_zero_neighborhood_sits_above_the_anchor():
    tau_fcn = get_topology("tau_fcn", 3)
    u = tau_fcn.canonical_base(Point.of(0))
    assert isinstance(u, FcZero)
    assert not tau_fcn.member_open(u, Point.of(0, 2))
    assert tau_fcn.member_open(u, Point.of(0, 3))
    assert tau_fcn.member_open(u, Point.of(0, 2, 4))
    assert tau_fcn.canonical_base(ZERO) == UpMinus(ZERO)


def test_refine_intersects_exclusion_data():
    u = UpMinus(ZERO, (Point.of(1),))
    v = UpMinus(ZERO, (Point.of(2),))
    assert TAU_C.refine(u, v, ZERO) == UpMinus(ZERO, (Point.of(1), Point.of(2)))
    assert TAU_C.refine(u, UpMinus(Point.of(3)), Point.of(3)) == UpMinus(Point.of(3), (Point.of(1, 3),))
    with pytest.raises(RefinementError):
        TAU_C.refine(u, v, Point.of(1))
    b = A_SET.with_added([3], TAU_FC2.universe)
    w = TAU_FC2.refine(TAU_FC2.canonical_base(ZERO), TAU_FC2.canonical_base(ZERO, (), b), ZERO)
    assert w == FcZero(UpMinus(ZERO), b)


def test_hausdorff_separation():
    left, right = TAU_C.hausdorff_separate(Point.of(1), Point.of(2))
    assert left == UpMinus(Point.of(1), (Point.of(1, 2),))
    assert right == UpMinus(Point.of(2), (Point.of(1, 2),))
    left, right = TAU_FC2.hausdorff_separate(ZERO, Point.of(2))
    assert TAU_FC2.member_open(left, ZERO) and TAU_FC2.member_open(right, Point.of(2))
    with pytest.raises(SeparationError):
        TAU_C.hausdorff_separate(Point.of(1), Point.of(1))
    with pytest.raises(NotT1TopologyError) as info:
        TAU_0.hausdorff_separate(ZERO, Point.of(1))
    assert info.value.witness == (ZERO, Point.of(1))


def test_translate_gives_the_image_under_meet():
    image = TAU_C.translate(Point.of(1, 2), UpMinus(ZERO, (Point.of(1),)))
    assert image == FinitePoints((ZERO, Point.of(2)))


@pytest.mark.parametrize("kind,n", [("tau_c", 1), ("tau_c", 2), ("tau_fc2", 2)])
def test_base_axioms_hold(kind, n):
    topology = get_topology(kind, n)
    report = topology.check_base_axioms(all_points(range(5), n))
    assert report.passed, report.failures
    assert report.non_t1_witness is None


def test_tau_0_passes_the_base_axioms_but_is_not_t1():
    report = TAU_0.check_base_axioms(all_points(range(4), 2))
    assert report.passed
    assert report.non_t1_witness is not None
    assert report.non_t1_witness[0] == "{}"


if __name__ == "__main__":
    # Run ad-hoc if executed directly
    test_topology_constraints()
    test_basic_open_membership()
    test_refine_intersects_exclusion_data()
    test_hausdorff_separation()
    print("All ad-hoc tests completed")
