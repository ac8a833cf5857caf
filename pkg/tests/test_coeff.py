from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from khcob.coeff import Fp, Ring, RingError, is_invertible, ring_make

PRIMES = [2, 3, 5, 7, 11, 101]


@pytest.mark.parametrize("spec,kind,p", [("Z", "Z", None), ("Q", "Q", None), ("Fp:2", "Fp", 2),
                                         (" Fp:7 ", "Fp", 7)])
def test_ring_make(spec, kind, p):
    R = ring_make(spec)
    assert (R.kind, R.p) == (kind, p)
    assert ring_make(R.spec) == R


@pytest.mark.parametrize("spec,code", [("Fp:4", "NonPrimeModulus"), ("Fp:1", "NonPrimeModulus"),
                                       ("R", "UnknownRing"), ("Fp:", "UnknownRing")])
def test_ring_make_rejects(spec, code):
    with pytest.raises(RingError) as exc:
        ring_make(spec)
    assert exc.value.code == code


def test_is_invertible_examples():
    assert is_invertible(1)
    assert not is_invertible(2)
    assert is_invertible(2, Ring("Q"))
    assert is_invertible(Fraction(2))
    assert not is_invertible(0, Ring("Q"))
    assert is_invertible(Fp(3, 5))
    assert not is_invertible(5, Ring("Fp", 5))
    assert is_invertible(-1, Ring("Z"))


def test_parse_literals():
    Q, F7 = Ring("Q"), Ring("Fp", 7)
    assert Q.parse("3/2") == Fraction(3, 2)
    assert Q.parse(" -4 ") == -4
    assert F7.parse("4 mod 7") == 4
    assert F7.parse("1/2") == 4
    with pytest.raises(RingError):
        Ring("Z").parse("1/2")
    with pytest.raises(RingError):
        Q.parse("4 mod 7")
    with pytest.raises(RingError):
        Q.parse("1/0")
    with pytest.raises(RingError):
        Q.parse("x")


def test_to_json():
    assert Ring("Q").to_json(Fraction(-3, 4)) == "-3/4"
    assert Ring("Q").to_json(Fraction(6, 3)) == 2
    assert Ring("Fp", 5).to_json(-1) == 4
    assert Ring("Z").to_json(-7) == -7


def test_mixed_moduli_rejected():
    with pytest.raises(RingError):
        Fp(1, 3) + Fp(1, 5)
    with pytest.raises(ZeroDivisionError):
        Ring("Z").inv(2)


@given(st.sampled_from(PRIMES), st.integers(), st.integers(), st.integers())
def test_fp_field_axioms(p, a, b, c):
    x, y, z = Fp(a, p), Fp(b, p), Fp(c, p)
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x - x == 0 and x + (-x) == 0
    assert (x * y).value == (a * b) % p
    if x:
        assert x * (1 / x) == 1
        assert Ring("Fp", p).inv(x) * x == 1
    assert x ** (p - 1) == (1 if x else 0)


@given(st.integers(-50, 50), st.integers(1, 50), st.sampled_from(PRIMES))
def test_fraction_reduces_into_fp(n, d, p):
    R = Ring("Fp", p)
    if Fraction(n, d).denominator % p == 0:
        with pytest.raises(ZeroDivisionError):
            R(Fraction(n, d))
    else:
        assert R(Fraction(n, d)) * d == n


@given(st.integers(-20, 20))
def test_units(x):
    assert Ring("Z").is_unit(x) == (x in (1, -1))
    assert Ring("Q").is_unit(x) == (x != 0)
    assert Ring("Fp", 3).is_unit(x) == (x % 3 != 0)
