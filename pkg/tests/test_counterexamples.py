from fractions import Fraction
from itertools import product

import pytest

from oconewalk.counterexamples import (
    ce1_law,
    ce1_invariance_report,
    ce1_path,
    ce2_block_count,
    ce2_invariance_report,
    ce2_law,
    ce2_path,
    is_block_complete,
)
from oconewalk.laws import laws_equal, ocone_check, pushforward_reflect, PathLaw
from oconewalk.paths import (
    WalkPath,
    first_passage,
    quadratic_variation,
    reflect,
)


def test_ce1_law_m3_case_list():
    law = ce1_law(3)
    expected = {
        (0, 1, 2, 3), (0, 1, 0, -1), (0, -1, 0, 1), (0, -1, -2, -3),
    }
    assert {p.values for p in law.support} == expected
    assert all(m == Fraction(1, 4) for m in law.support.values())


def test_ce1_law_small_horizons():
    law = ce1_law(1)
    assert {p.values for p in law.support} == {(0, 1), (0, -1)}
    assert all(m == Fraction(1, 2) for m in law.support.values())

    # oracle: enumerate (e1, e2, e4) directly at m = 4
    oracle = {}
    for e1, e2, e4 in product((1, -1), repeat=3):
        vals = (0, e1, e1 + e2, e1 + 2 * e2, e1 + 2 * e2 + e4)
        oracle[WalkPath(vals)] = Fraction(1, 8)
    law4 = ce1_law(4)
    assert laws_equal(law4, PathLaw(4, oracle)).equal
    m3_support = {p.values for p in ce1_law(3).support}
    for p in law4.support:
        assert p.values[:4] in m3_support


def test_ce1_free_signs_shape():
    assert ce1_path((1, -1, 1), 4) == WalkPath((0, 1, 0, -1, 0))
    assert len(ce1_law(5)) == 2 ** 4


def test_ce1_qv_is_deterministic():
    for m in (1, 4, 7):
        for p in ce1_law(m).support:
            assert quadratic_variation(p) == tuple(range(m + 1))


def test_ce1_invariance_per_level():
    report = ce1_invariance_report(3)
    assert report.check_for(0).invariant
    assert report.check_for(1).invariant
    assert report.check_for(3).invariant
    bad = report.check_for(2)
    assert not bad.invariant
    path, lhs, rhs = bad.comparison.witness
    assert path == WalkPath((0, 1, 2, 1))
    assert (lhs, rhs) == (Fraction(0), Fraction(1, 4))


def test_ce1_theta1_swaps_the_paper_pairs():
    law = ce1_law(3)
    push = pushforward_reflect(law, 1)
    assert laws_equal(law, push).equal
    assert reflect(WalkPath((0, 1, 2, 3)), 1) == WalkPath((0, 1, 0, -1))
    assert reflect(WalkPath((0, 1, 0, -1)), 1) == WalkPath((0, 1, 2, 3))


def test_ce1_invariance_sweep():
    for m in range(3, 11):
        report = ce1_invariance_report(m, levels=(0, 1, 2))
        assert report.check_for(0).invariant
        assert report.check_for(1).invariant
        assert not report.check_for(2).invariant


def test_ce1_not_ocone():
    for m in (3, 5):
        verdict = ocone_check(ce1_law(m))
        assert not verdict.embedded_uniform


def test_ce1_cap():
    with pytest.raises(ValueError):
        ce1_law(17)


# --- counterexample 2 --------------------------------------------------------

def test_ce2_path_examples():
    assert ce2_path((1, 1, 1), 7) == WalkPath((0, 1, 2, 3, 4, 5, 6, 7))
    assert ce2_path((1, -1, -1), 7) == WalkPath((0, 1, 0, -1, -2, -3, -4, -5))
    # the second example is the level-1 reflection of the all-up path
    assert reflect(ce2_path((1, 1, 1), 7), 1) == ce2_path((1, -1, -1), 7)


def test_ce2_block_structure():
    assert ce2_block_count(7) == 3
    assert ce2_block_count(15) == 4
    assert [is_block_complete(m) for m in (1, 2, 3, 7, 8, 15, 31)] == \
        [True, False, True, True, False, True, True]
    with pytest.raises(ValueError):
        ce2_path((1,), 3)


def test_ce2_law_uniform_over_blocks():
    law = ce2_law(7)
    assert len(law) == 8
    assert all(m == Fraction(1, 8) for m in law.support.values())
    oracle = {ce2_path(bits, 7) for bits in product((1, -1), repeat=3)}
    assert set(law.support) == oracle


def test_ce2_invariance_reports():
    for m in (7, 15):
        report = ce2_invariance_report(m)
        assert report.check_for(0).invariant
        assert report.check_for(1).invariant
        assert not report.check_for(2).invariant


def test_ce2_theta1_permutes_the_support():
    law = ce2_law(7)
    images = {reflect(p, 1) for p in law.support}
    assert images == set(law.support)


def test_ce2_theta2_moves_mass_onto_a_null_path():
    law = ce2_law(7)
    target = reflect(WalkPath((0, 1, 2, 3, 4, 5, 6, 7)), 2)
    assert target == WalkPath((0, 1, 2, 1, 0, -1, -2, -3))
    assert law.mass(target) == 0
    assert pushforward_reflect(law, 2).mass(target) == Fraction(1, 8)


def test_ce2_hits_level_one_after_a_negative_start():
    # first block down, block k+1 the first up block: the path reaches 1
    # exactly at time 2^(k+2) - 1
    m = 15
    for k in (0, 1):
        bits = tuple(-1 if i <= k else 1 for i in range(ce2_block_count(m)))
        path = ce2_path(bits, m)
        assert first_passage(path, 1) == 2 ** (k + 2) - 1


def test_ce2_rejects_partial_blocks():
    with pytest.raises(ValueError):
        ce2_invariance_report(6)


def test_ce2_not_ocone():
    verdict = ocone_check(ce2_law(7))
    assert not verdict.embedded_uniform
