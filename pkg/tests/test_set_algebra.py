import os
import sys
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

os.environ.setdefault("LOG_LEVEL", "WARNING")

import hypothesis  # noqa: E402
import hypothesis.strategies as strat  # noqa: E402
import pytest  # noqa: E402

from app.services.almost_set import A_SET, CO_A_SET, AlmostSet, InvalidAlmostSetError  # noqa: E402
from app.services.descriptors import FcZero, InvalidDescriptorError, UpMinus  # noqa: E402
from app.services.semilattice import Point, ZERO, get_universe  # noqa: E402
from app.services.set_algebra import (EMPTY, WHOLE, And, Cyl, FinitePoints, LevelLE, Not, Open, Or,  # noqa: E402
                                      Pattern, SetAlgebra, UpSet, nnf)
from app.utils.expr_parser import parse_expr  # noqa: E402

UNIVERSE = get_universe(2, "even")
ALGEBRA = SetAlgebra(UNIVERSE)

# Expressions over the support codes {1, 2}
CORPUS = [
    UpSet(Point.of(1)),
    Cyl(Point.of(1), A_SET),
    Cyl(ZERO, CO_A_SET.with_removed([1], UNIVERSE)),
    Or((FinitePoints((Point.of(2),)), Not(LevelLE(1)))),
    And((Open(UpMinus(ZERO, (Point.of(1),))), Not(UpSet(Point.of(2))))),
    Open(FcZero(UpMinus(ZERO, (Point.of(2),)), A_SET)),
]


def test_atoms_membership():
    assert Cyl(ZERO, A_SET).contains(Point.of(2), UNIVERSE)
    assert not Cyl(ZERO, A_SET).contains(Point.of(3), UNIVERSE)
    assert not Cyl(ZERO, A_SET).contains(Point.of(2, 4), UNIVERSE)
    assert UpSet(Point.of(1)).contains(Point.of(1, 3), UNIVERSE)
    assert LevelLE(1).contains(Point.of(7), UNIVERSE)
    assert not LevelLE(1).contains(Point.of(1, 7), UNIVERSE)
    assert WHOLE.contains(Point.of(1, 2), UNIVERSE)
    assert not EMPTY.contains(ZERO, UNIVERSE)


def test_text_forms():
    assert str(FinitePoints((Point.of(1, 2), Point.of(2)))) == "(pts {2} {1 2})"
    assert str(FinitePoints()) == "(pts)"
    assert str(WHOLE) == "(and)"
    assert str(EMPTY) == "(or)"
    assert str(Cyl(ZERO, A_SET)) == "(cyl {} (almost A + [] - []))"


def test_almost_set_algebra():
    assert AlmostSet("A", added=frozenset({2})).normalized(UNIVERSE) == A_SET
    assert A_SET.union(CO_A_SET, UNIVERSE).base == "ALL"
    assert A_SET.intersection(CO_A_SET, UNIVERSE).base == "NONE"
    edited = A_SET.with_added([3], UNIVERSE)
    assert edited.contains(3, UNIVERSE) and edited.contains(4, UNIVERSE)
    assert str(edited.complement()) == "(almost CoA + [] - [3])"
    with pytest.raises(InvalidAlmostSetError):
        AlmostSet("B")
    with pytest.raises(InvalidAlmostSetError):
        AlmostSet("A", frozenset({1}), frozenset({1}))


def test_descriptor_validation():
    with pytest.raises(InvalidDescriptorError):
        UpMinus(Point.of(1), (Point.of(2),))
    with pytest.raises(InvalidDescriptorError):
        FcZero(UpMinus(ZERO), CO_A_SET)
    d = UpMinus(ZERO, (Point.of(2), Point.of(1)))
    assert d.exclusions == (Point.of(1), Point.of(2))
    assert str(d) == "(upminus {} [{1} {2}])"


def test_emptiness_and_witnesses():
    empty, witness = ALGEBRA.is_empty(parse_expr("(and (up {1}) (up {2}) (up {3}))", UNIVERSE))
    assert empty and witness is None
    assert ALGEBRA.find_member(Not(LevelLE(1))) == Point.of(0, 2)
    empty, witness = ALGEBRA.is_empty(Cyl(ZERO, A_SET))
    assert not empty and witness == Point.of(0)


def test_subset_and_equality():
    assert ALGEBRA.subset(UpSet(Point.of(1, 2)), UpSet(Point.of(1)))
    assert not ALGEBRA.subset(UpSet(Point.of(1)), UpSet(Point.of(1, 2)))
    split = Or((Cyl(ZERO, A_SET), Cyl(ZERO, CO_A_SET)))
    assert ALGEBRA.equal(split, And((LevelLE(1), Not(LevelLE(0)))))


def test_nnf_pushes_negations_to_atoms():
    a, b = UpSet(Point.of(1)), UpSet(Point.of(2))
    assert nnf(Not(And((a, b)))) == Or((Not(a), Not(b)))
    assert nnf(Not(Not(a))) == a
    assert nnf(And((a, And((b, a))))) == And((a, b, a))


def test_patterns_come_in_order():
    patterns = list(ALGEBRA.patterns([1], max_size=1))
    assert patterns == [Pattern(ZERO, 0, 0), Pattern(ZERO, 1, 0), Pattern(ZERO, 0, 1), Pattern(Point.of(1), 0, 0)]
    assert ALGEBRA.instantiate(Pattern(Point.of(1), 1, 1), [1, 2]) == Point.of(1, 3, 4)


@hypothesis.given(strat.sampled_from(CORPUS), strat.integers(3, 40), strat.integers(3, 40))
def test_membership_depends_only_on_pattern(s, c, d):
    hypothesis.assume(c != d)
    # one fresh code: membership depends on its color only
    if UNIVERSE.in_a(c) == UNIVERSE.in_a(d):
        assert s.contains(Point.of(c), UNIVERSE) == s.contains(Point.of(d), UNIVERSE)
        assert s.contains(Point.of(1, c), UNIVERSE) == s.contains(Point.of(1, d), UNIVERSE)
    # two fresh codes: membership is color-blind
    assert s.contains(Point.of(c, d), UNIVERSE) == s.contains(Point.of(41, 42), UNIVERSE)


def test_pattern_table_lists_members():
    table = ALGEBRA.pattern_table(UpSet(Point.of(1)))
    members = table.members()
    assert Pattern(Point.of(1), 0, 0) in members
    assert all(p.taken == Point.of(1) for p in members)


if __name__ == "__main__":
    # Run ad-hoc if executed directly
    test_atoms_membership()
    test_text_forms()
    test_emptiness_and_witnesses()
    print("All ad-hoc tests completed")
