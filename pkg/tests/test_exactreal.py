from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bestapprox.exactreal import (
    Enclosure,
    EnclosureStream,
    HalfIntegerTie,
    LazyReal,
    Ordering,
    PrecisionExhausted,
    QuadraticReal,
    ScalarParseError,
    compare_certified,
    dist_to_nearest_integer,
    enclose,
    floor_certified,
    format_scalar,
    nearest_integer,
    parse_scalar,
    rsqrt,
    squarefree_split,
)
from bestapprox.seeding import generator, rational_in, random_stream

fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=10**6)


def _arctan_inv(k: int, eps: Fraction) -> Fraction:
    """arctan(1/k) to within eps by the alternating series."""
    total, j, term = Fraction(0), 0, Fraction(1, k)
    while term > eps:
        total += term if j % 2 == 0 else -term
        j += 1
        term = Fraction(1, (2 * j + 1) * k ** (2 * j + 1))
    return total


def pi_stream() -> EnclosureStream:
    # Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    return EnclosureStream(lambda eps: 16 * _arctan_inv(5, eps / 32) - 4 * _arctan_inv(239, eps / 8), "pi")


SQRT2 = QuadraticReal.make(0, 1, 2)


def test_compare_examples():
    assert compare_certified(Fraction(1, 2), Fraction(1, 2)) is Ordering.EQ
    assert compare_certified(SQRT2, Fraction(3, 2)) is Ordering.LT
    assert compare_certified(pi_stream(), Fraction(355, 113), Fraction(1, 10**20)) is Ordering.LT


def test_compare_undecided_within_cap():
    x = EnclosureStream.wrapping(Fraction(1, 3))
    assert compare_certified(x, Fraction(1, 3), Fraction(1, 2**40)) is Ordering.UNDECIDED


def test_dist_to_nearest_integer_examples():
    e, n = dist_to_nearest_integer(Fraction(7, 3))
    assert (e.lo, e.hi, n) == (Fraction(1, 3), Fraction(1, 3), 2)
    e, n = dist_to_nearest_integer(SQRT2)
    assert n == 1 and Fraction(2, 5) < e.lo and e.hi < Fraction(1, 2)
    with pytest.raises(HalfIntegerTie):
        dist_to_nearest_integer(Fraction(5, 2))


def test_soundness_million_wrapped_rationals():
    """compare_certified on wrapped streams never contradicts exact comparison."""
    rng = generator(1234)
    for _ in range(10**6):
        x, y = rational_in(rng, 10**6), rational_in(rng, 10**6)
        got = compare_certified(EnclosureStream.wrapping(x), y, Fraction(1, 2**80))
        want = Ordering.LT if x < y else Ordering.GT if x > y else Ordering.EQ
        # equal values can only come out undecided: a stream never certifies equality
        assert got is want or (got is Ordering.UNDECIDED and want is Ordering.EQ)


@given(fractions, st.integers(min_value=1, max_value=40))
def test_stream_refinements_nest(x, k):
    s = EnclosureStream.wrapping(x)
    a, b = s.enclosure(k), s.enclosure(k + 1)
    assert a.contains(x) and b.contains(x)
    assert max(a.lo, b.lo) <= min(a.hi, b.hi)


@given(fractions, st.integers(min_value=-50, max_value=50))
def test_dist_translation_invariant(x, k):
    if (x * 2).denominator == 1 and x.denominator == 2:
        return
    e1, n1 = dist_to_nearest_integer(x)
    e2, n2 = dist_to_nearest_integer(x + k)
    assert (e1.lo, e1.hi) == (e2.lo, e2.hi) and n2 == n1 + k


@given(st.integers(-30, 30), st.integers(-30, 30), st.integers(2, 60))
def test_quadratic_field_arithmetic(a, b, d):
    x = QuadraticReal.make(a, b, d)
    y = x * x
    # (a + b sqrt d)^2 = a^2 + d b^2 + 2ab sqrt d
    assert y == QuadraticReal.make(a * a + d * b * b, 2 * a * b, d)
    if x != 0:
        assert x * (1 / x) == 1
    e = enclose(x, 40)
    assert e.lo <= e.hi and e.width <= Fraction(1, 2**39)
    assert floor_certified(x) == int(e.lo // 1) or floor_certified(x) == int(e.hi // 1)


def test_quadratic_sign_and_order():
    assert SQRT2 > Fraction(141, 100) and SQRT2 < Fraction(142, 100)
    phi = QuadraticReal.make(Fraction(1, 2), Fraction(1, 2), 5)
    assert phi * phi == phi + 1
    assert squarefree_split(72) == (6, 2)
    with pytest.raises(ValueError):
        QuadraticReal(0, 1, 4)


@given(fractions)
def test_format_parse_roundtrip_rational(x):
    assert parse_scalar(format_scalar(x)) == x


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(2, 50), st.integers(1, 9))
def test_format_parse_roundtrip_quadratic(a, b, d, c):
    x = QuadraticReal.make(Fraction(a, c), Fraction(b, c), d)
    assert parse_scalar(format_scalar(x)) == x


def test_parse_forms(tmp_path):
    assert parse_scalar("dec:1.25") == Fraction(5, 4)
    assert parse_scalar("rat:-3/9") == Fraction(-1, 3)
    assert parse_scalar("quad:(1-2*sqrt(8))/3") == QuadraticReal.make(Fraction(1, 3), Fraction(-4, 3), 2)
    path = tmp_path / "x.txt"
    path.write_text("# sqrt 2\n1.4 1.5\n1.414 1.415\n1.41421 1.41422\n")
    s = parse_scalar(f"stream:{path}")
    assert s.enclosure(10).contains(Fraction(14142, 10000))
    with pytest.raises(PrecisionExhausted):
        s.enclosure(40)
    for bad in ("1/2", "rat:1/0", "dec:1e5", "quad:(1+sqrt(2))", "zzz:1"):
        with pytest.raises(ScalarParseError):
            parse_scalar(bad)


def test_nearest_integer_and_rsqrt():
    assert nearest_integer(Fraction(-7, 3)) == -2
    with pytest.raises(HalfIntegerTie):
        nearest_integer(Fraction(-5, 2))
    assert rsqrt(Fraction(9, 4)) == Fraction(3, 2)
    r = rsqrt(Fraction(2))
    assert enclose(r, 50).contains(Fraction(14142135623730951, 10**16))


def test_lazy_arithmetic_encloses():
    x = LazyReal.of(SQRT2) * LazyReal.of(SQRT2) - 2
    e = enclose(x, 60)
    assert e.lo <= 0 <= e.hi and e.width < Fraction(1, 2**50)


def test_enclosure_ops():
    a, b = Enclosure(Fraction(-1), Fraction(2)), Enclosure(Fraction(3), Fraction(4))
    assert (a * b).lo == -4 and (a * b).hi == 8
    assert abs(a).lo == 0 and (a - b).hi == -1
    assert a.sign() is None and b.sign() == 1
    assert a.intersect(b) is None


def test_random_stream_is_reproducible():
    a, b = random_stream(7, 1), random_stream(7, 1)
    assert a.enclosure(200) == b.enclosure(200)
    assert random_stream(7, 2).enclosure(64) != a.enclosure(64)
    e1, e2 = a.enclosure(30), a.enclosure(300)
    assert e1.lo <= e2.lo and e2.hi <= e1.hi
