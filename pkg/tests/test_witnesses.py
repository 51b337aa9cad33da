import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

os.environ.setdefault("LOG_LEVEL", "WARNING")

import pytest  # noqa: E402

from app.services.almost_set import A_SET, CO_A_SET  # noqa: E402
from app.services.certificates import verify_certificate  # noqa: E402
from app.services.closure_engine import get_closure_engine  # noqa: E402
from app.services.descriptors import FcZero, UpMinus  # noqa: E402
from app.services.semilattice import Point, ZERO, leq, meet  # noqa: E402
from app.services.set_algebra import Cyl, FinitePoints, Open, Or, UpSet  # noqa: E402
from app.services.topology import NotT1TopologyError, SeparationError, get_topology  # noqa: E402
from app.services.witnesses import (FamilyNotDiscreteError, FiniteSetError, NotACoverError, NotClosedError,  # noqa: E402
                                    NotTopRankError, PreconditionError, TheoremWitnesses)

TAU_0 = get_topology("tau_0", 2)
TAU_C = get_topology("tau_c", 2)
TAU_C1 = get_topology("tau_c", 1)
TAU_FC2 = get_topology("tau_fc2", 2)


def assert_verified(witness):
    result = verify_certificate(witness.certificate)
    assert result.ok, result.reason
    assert result.checked == len(witness.certificate.script)


def test_upset_neighborhood():
    witness = TheoremWitnesses(TAU_C).neighborhood_in_upset(Point.of(3))
    assert witness.value == UpMinus(Point.of(3))
    assert_verified(witness)
    with pytest.raises(NotT1TopologyError):
        TheoremWitnesses(TAU_0).neighborhood_in_upset(Point.of(3))


def test_separator_orders_its_points():
    witnesses = TheoremWitnesses(TAU_C)
    witness = witnesses.separator_function(Point.of(1, 2), Point.of(1))
    f = witness.value
    assert (f.x1, f.x2) == (Point.of(1), Point.of(1, 2))
    assert f(Point.of(1, 2)) == 1 and f(Point.of(1)) == 0
    assert_verified(witness)
    with pytest.raises(SeparationError):
        witnesses.separator_function(Point.of(1), Point.of(1))


def test_separation_pair_is_disjoint():
    witness = TheoremWitnesses(TAU_FC2).separation_pair(ZERO, Point.of(2))
    left, right = witness.value
    assert TAU_FC2.member_open(left, ZERO)
    assert TAU_FC2.member_open(right, Point.of(2))
    assert_verified(witness)


def test_isolated_point_has_top_rank():
    witness = TheoremWitnesses(TAU_C).isolated_point_of(UpSet(Point.of(1)))
    assert witness.value.rank == 2
    assert leq(Point.of(1), witness.value)
    assert_verified(witness)


def test_separate_continuity_modulus():
    w = UpMinus(ZERO)
    witness = TheoremWitnesses(TAU_C).separate_continuity_modulus(Point.of(1), Point.of(2), w)
    assert witness.value == UpMinus(Point.of(2), (Point.of(1, 2),))
    assert_verified(witness)
    with pytest.raises(PreconditionError):
        TheoremWitnesses(TAU_C).separate_continuity_modulus(Point.of(1), Point.of(1), UpMinus(Point.of(2)))


def test_joint_discontinuity_products_miss_the_anchor_neighborhood():
    witnesses = TheoremWitnesses(TAU_FC2)
    witness = witnesses.joint_discontinuity_certificate(depth=5)
    w = TAU_FC2.canonical_base(ZERO)
    assert len(witness.value) == 5
    for u, v, product in witness.value:
        assert u != v
        assert product.count(" ") == 0
    assert_verified(witness)
    sequence = witness.certificate.payload["sequence"]
    assert all(not w.contains(Point.of(int(p.strip("{}"))), TAU_FC2.universe) for _, _, p in sequence)
    with pytest.raises(PreconditionError):
        TheoremWitnesses(TAU_C).joint_discontinuity_certificate(depth=3)


def test_closed_discrete_witness():
    witness = TheoremWitnesses(TAU_FC2).closed_discrete_witness()
    assert witness.value == Cyl(ZERO, A_SET)
    assert_verified(witness)
    with pytest.raises(PreconditionError):
        TheoremWitnesses(TAU_C).closed_discrete_witness()


def test_accumulation_point():
    witnesses = TheoremWitnesses(TAU_C)
    witness = witnesses.accumulation_point(Cyl(Point.of(1), A_SET))
    assert witness.value == Point.of(1)
    assert witness.certificate.payload["witness"] == "{1 2}"
    assert_verified(witness)
    with pytest.raises(NotTopRankError) as info:
        witnesses.accumulation_point(UpSet(Point.of(1)))
    assert info.value.witness == Point.of(1)
    with pytest.raises(FiniteSetError):
        witnesses.accumulation_point(FinitePoints((Point.of(1, 2), Point.of(3, 4))))


def test_finite_subcover_follows_exclusions():
    cover = [UpMinus(ZERO, (Point.of(1), Point.of(2))), UpMinus(Point.of(1)), UpMinus(Point.of(2))]
    witness = TheoremWitnesses(TAU_C).extract_finite_subcover(cover)
    assert witness.value == cover
    assert_verified(witness)
    with pytest.raises(NotACoverError) as info:
        TheoremWitnesses(TAU_C).extract_finite_subcover([UpMinus(Point.of(1))])
    assert info.value.witness == ZERO


def test_subcover_drops_unused_members():
    cover = [UpMinus(Point.of(5)), UpMinus(ZERO, (Point.of(1),)), UpMinus(Point.of(1))]
    witness = TheoremWitnesses(TAU_C).extract_finite_subcover(cover)
    assert witness.value == [UpMinus(ZERO, (Point.of(1),)), UpMinus(Point.of(1))]


def test_regularity_shrink():
    shrunk = TheoremWitnesses(TAU_C).regularity_shrink(UpMinus(ZERO, (Point.of(1),)))
    assert shrunk.certificate.payload["status"] == "shrunk"
    assert_verified(shrunk)
    failed = TheoremWitnesses(TAU_FC2).regularity_shrink(FcZero(UpMinus(ZERO), A_SET))
    assert failed.value is None
    assert failed.certificate.payload["status"] == "failed"
    defect = failed.certificate.payload["defect"]
    assert TAU_FC2.universe.in_a(int(defect.strip("{}")))
    assert_verified(failed)


def test_regularity_shrink_needs_a_neighbourhood_of_zero():
    with pytest.raises(PreconditionError):
        TheoremWitnesses(TAU_C).regularity_shrink(UpMinus(Point.of(1)))
    # under tau_fcn zero neighbourhoods are closed; the defect sits at the anchor
    fcn = get_topology("tau_fcn", 3)
    zero_neighborhood = fcn.canonical_base(ZERO, (Point.of(2),))
    shrunk = TheoremWitnesses(fcn).regularity_shrink(zero_neighborhood)
    assert shrunk.certificate.payload["status"] == "shrunk"
    assert shrunk.value == zero_neighborhood
    assert_verified(shrunk)
    anchor_neighborhood = fcn.canonical_base(fcn.id.anchor)
    assert not get_closure_engine(fcn).is_closed(Open(anchor_neighborhood))
    with pytest.raises(PreconditionError):
        TheoremWitnesses(fcn).regularity_shrink(anchor_neighborhood)


def test_top_rank_cover():
    witnesses = TheoremWitnesses(TAU_C)
    assert witnesses.top_rank_cover(UpMinus(ZERO, (Point.of(1),))).value == [Point.of(1)]
    assert witnesses.top_rank_cover(UpMinus(ZERO)).value == []
    fc = TheoremWitnesses(TAU_FC2).top_rank_cover(FcZero(UpMinus(ZERO, (Point.of(1, 2),)), A_SET))
    assert fc.value == [Point.of(1, 2)]
    assert_verified(fc)
    with pytest.raises(PreconditionError):
        witnesses.top_rank_cover(UpMinus(Point.of(1)))


def test_collectionwise_expansion():
    witnesses = TheoremWitnesses(TAU_C1)
    family = [Or((Cyl(ZERO, A_SET), FinitePoints((ZERO,)))), FinitePoints((Point.of(3),))]
    witness = witnesses.collectionwise_expand(family)
    assert witness.value[0] == Or((family[0], Open(UpMinus(ZERO, (Point.of(3),)))))
    assert witness.value[1] == family[1]
    assert_verified(witness)


def test_collectionwise_rejects_bad_families():
    witnesses = TheoremWitnesses(TAU_C1)
    with pytest.raises(FamilyNotDiscreteError) as info:
        witnesses.collectionwise_expand([Cyl(ZERO, A_SET), Cyl(ZERO, CO_A_SET)])
    assert info.value.pair == (0, 1)
    with pytest.raises(NotClosedError):
        witnesses.collectionwise_expand([Cyl(ZERO, A_SET), FinitePoints((Point.of(3),))])
    with pytest.raises(PreconditionError):
        TheoremWitnesses(TAU_C).collectionwise_expand([FinitePoints((ZERO,))])


def test_meets_in_the_sequence_are_rank_one():
    witness = TheoremWitnesses(TAU_FC2).joint_discontinuity_certificate(depth=3)
    for u, v, product in witness.certificate.payload["sequence"]:
        left = Point(tuple(int(c) for c in u.strip("{}").split()))
        right = Point(tuple(int(c) for c in v.strip("{}").split()))
        assert str(meet(left, right)) == product


if __name__ == "__main__":
    # Run ad-hoc if executed directly
    test_upset_neighborhood()
    test_finite_subcover_follows_exclusions()
    test_collectionwise_expansion()
    print("All ad-hoc tests completed")
