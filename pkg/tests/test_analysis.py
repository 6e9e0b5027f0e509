from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bestapprox.analysis import (
    WindowError,
    analyze,
    asymptotic_directions,
    delta_det,
    directions_svg,
    growth_and_doubling,
    minkowski_check_sim,
    no_interior_check,
    rogers_check,
    separation_scan,
    signature,
    signature_sequence,
    tail_lattice_dim,
    window_rank,
)
from bestapprox.enumerate import ApproxSequence, _make_entry, best_linear_form, best_simultaneous
from bestapprox.exactreal import EnclosureStream, QuadraticReal, enclose
from bestapprox.norms import Norm, TieAtOptimum

SQRT2 = QuadraticReal.make(0, 1, 2)
SQRT3 = QuadraticReal.make(0, 1, 3)
GOLDEN = QuadraticReal.make(Fraction(1, 2), Fraction(1, 2), 5)
SUP1 = Norm.sup(1)


@pytest.fixture(scope="module")
def sqrt2_seq():
    return best_simultaneous([SQRT2], SUP1, 10**5)


@pytest.fixture(scope="module")
def pair_seq():
    return best_simultaneous([Fraction(3, 7), Fraction(5, 11)], Norm.sup(2), 77)


def fixture_sequence(alpha, f, rows):
    """A hand-built sequence from (p, a) rows; no best-approximation property implied."""
    seq = ApproxSequence(tuple(alpha), f, [], rows[-1][0], False)
    for p, a in rows:
        seq.entries.append(_make_entry(len(seq.entries) + 1, p, a, alpha, f))
    return seq


# --- determinants and ranks ---------------------------------------------------------


def test_sqrt2_determinants_alternate(sqrt2_seq):
    assert [delta_det(sqrt2_seq, nu) for nu in range(1, len(sqrt2_seq))] == \
        [(-1) ** (nu - 1) for nu in range(1, len(sqrt2_seq))]
    assert all(window_rank(sqrt2_seq, nu, 1) == 2 for nu in range(1, len(sqrt2_seq)))
    assert tail_lattice_dim(sqrt2_seq, 5) == 2


def test_linear_form_stream_pair_has_nonzero_determinant():
    alpha = [EnclosureStream.wrapping(SQRT2 - 1), EnclosureStream.wrapping(SQRT3 - 1)]
    seq = best_linear_form(alpha, 10**5, max_entries=22)
    assert any(delta_det(seq, nu) != 0 for nu in range(1, min(20, len(seq) - 2) + 1))


def test_degenerate_windows():
    f = Norm.sup(2)
    alpha = [Fraction(1, 3), Fraction(1, 5)]
    seq = fixture_sequence(alpha, f, [(1, [0, 0]), (1, [0, 0]), (2, [1, 0])])
    assert delta_det(seq, 1) == 0
    assert window_rank(seq, 1, 1) == 1
    with pytest.raises(WindowError):
        window_rank(seq, 2, 5)


def test_tail_in_a_plane():
    # every row is a combination of (1, 0, 0) and (0, 1, 1)
    alpha = [Fraction(2, 9), Fraction(2, 9)]
    rows = [(p, [a, a]) for p, a in ((1, 0), (4, 1), (9, 2), (13, 3))]
    assert tail_lattice_dim(fixture_sequence(alpha, Norm.sup(2), rows)) == 2


def test_independent_pair_reaches_rank_three():
    seq = best_simultaneous([SQRT2 - 1, SQRT3 - 1], Norm.sup(2), 10**4)
    assert any(window_rank(seq, nu, 2) == 3 for nu in range(1, len(seq) - 1))


# --- signatures -------------------------------------------------------------------


def test_signature_examples(pair_seq):
    assert str(signature([Fraction(3, 10), Fraction(-1, 5)])) == "(+,-)"
    assert signature([0, Fraction(1, 2)]).has_zero
    flags = rogers_check(pair_seq)
    assert flags and all(v is not False for v in flags)
    assert len(signature_sequence(pair_seq)) == len(pair_seq)


def test_linear_form_rejected(sqrt2_seq):
    lf = best_linear_form([SQRT2], 30)
    with pytest.raises(TypeError):
        signature_sequence(lf)
    with pytest.raises(TypeError):
        no_interior_check(lf, SUP1)


# --- no interior and separation -------------------------------------------------------


@pytest.mark.parametrize("name", ["sup", "l2", "poly:fstar"])
def test_no_interior_on_enumerated(name):
    f = Norm.parse(name, 2)
    alpha = [Fraction(1234567, 10**7 + 19), Fraction(7654321, 10**7 + 19)]
    try:
        seq = best_simultaneous(alpha, f, 10**7 + 19)
    except TieAtOptimum:
        pytest.skip("tied target")
    assert all(no_interior_check(seq, f))
    assert all(no_interior_check(seq, f, normalized=True))


def test_no_interior_detects_halved_remainder():
    # alpha = 2/7: xi at p=2 is 4/7 and at p=1 is 2/7, so xi_2 = xi_1 / 2
    half = fixture_sequence([Fraction(2, 7)], SUP1, [(2, [0]), (1, [0])])
    assert no_interior_check(half, SUP1) == [False]
    ok = fixture_sequence([Fraction(1, 3)], SUP1, [(1, [0]), (2, [1])])
    assert no_interior_check(ok, SUP1) == [True]


def test_separation_scan(sqrt2_seq):
    # delta = 0: every step of an enumerated sequence leaves the closed ball
    assert separation_scan(sqrt2_seq, SUP1, 0) == [e.nu for e in sqrt2_seq.entries[:-1]]
    f = Norm.euclidean(2)
    seq = best_simultaneous([GOLDEN - 1, SQRT2 - 1], f, 10**5, max_entries=30)
    assert separation_scan(seq, f, Fraction(1, 100))
    with pytest.raises(ValueError):
        separation_scan(seq, f, -1)


def test_separation_can_be_empty_for_constant_direction():
    # all directions equal under sup: no step leaves B^{1+delta}
    alpha = [Fraction(1, 10), Fraction(1, 10)]
    seq = fixture_sequence(alpha, Norm.sup(2), [(1, [0, 0]), (2, [0, 0]), (3, [0, 0])])
    assert separation_scan(seq, Norm.sup(2), Fraction(1, 100)) == []


# --- growth, doubling, Minkowski ---------------------------------------------------------


def test_sqrt2_growth_band(sqrt2_seq):
    rep = growth_and_doubling(sqrt2_seq, SUP1)
    for _, v in rep.series:
        assert Fraction(1, 3) < v.lo and v.hi < 1
    assert rep.doubling_ok and rep.h == 4
    assert all(minkowski_check_sim(sqrt2_seq, SUP1))


@given(st.integers(10**5, 10**9), st.integers(1, 10**5), st.integers(1, 10**5), st.sampled_from(["sup", "l2", "poly:fstar"]))
def test_doubling_on_enumerated(Q, u, v, name):
    f = Norm.parse(name, 2)
    alpha = [Fraction(u, Q), Fraction(v, Q)]
    try:
        seq = best_simultaneous(alpha, f, Q)
    except TieAtOptimum:
        return
    assert growth_and_doubling(seq, f).doubling_ok
    assert all(minkowski_check_sim(seq, f))


# --- directions ---------------------------------------------------------------------


def test_sqrt2_directions_alternate(sqrt2_seq):
    ast = asymptotic_directions(sqrt2_seq, SUP1, Fraction(1, 10))
    assert sorted(str(signature(c.representative)) for c in ast.clusters) == ["(+)", "(-)"]
    assert all(enclose(abs(c.representative[0]) - 1, 40).contains(0) for c in ast.clusters)


def test_identical_directions_form_one_cluster():
    alpha = [Fraction(1, 10), Fraction(1, 20)]
    seq = fixture_sequence(alpha, Norm.sup(2), [(1, [0, 0]), (2, [0, 0]), (3, [0, 0])])
    ast = asymptotic_directions(seq, Norm.sup(2), Fraction(1, 100))
    assert len(ast.clusters) == 1 and ast.clusters[0].members == [1, 2, 3]
    with pytest.raises(WindowError):
        asymptotic_directions(seq, Norm.sup(2), Fraction(1, 100), burn_in=9)


def test_directions_are_normalized(pair_seq):
    for e in pair_seq.entries:
        if e.Xi is not None:
            assert max(abs(x) for x in e.Xi) == 1


# --- report and SVG ---------------------------------------------------------------------


def test_analyze_report(pair_seq, sqrt2_seq):
    rep = analyze(pair_seq)
    assert rep["entries"] == len(pair_seq)
    assert all(rep["no_interior"]) and rep["doubling"]["ok"]
    assert len(rep["determinants"]) == len(pair_seq) - 2
    lf = analyze(best_linear_form([SQRT2 - 1], 100))
    assert all(lf["minkowski"]) and "signatures" not in lf
    assert analyze(ApproxSequence((SQRT2,), SUP1)) == {"entries": 0, "enumeration_bound": 0}


def test_svg(pair_seq):
    svg = directions_svg(pair_seq, Norm.sup(2))
    assert svg.startswith("<svg") and svg.count("<circle") == len(pair_seq) - 1
    with pytest.raises(ValueError):
        directions_svg(best_simultaneous([SQRT2], SUP1, 10), SUP1)


def test_enclosures_of_growth_are_tight(sqrt2_seq):
    rep = growth_and_doubling(sqrt2_seq, SUP1, bits=80)
    assert all(v.width < Fraction(1, 2**60) for _, v in rep.series)
    assert rep.badness is not None and enclose(rep.badness.lo, 10).lo > 0
