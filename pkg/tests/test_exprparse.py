"""Unit tests for the polynomial expression grammar."""

import numpy as np
import pytest

from freehaar import exprparse, polyalg


def test_basic_examples():
    P = exprparse.parse("U1*U1'", 1, 0)
    assert P.terms == {((1, False), (1, True)): (1 + 0j)}

    P = exprparse.parse("U1 + U1' + U2 + U2'", 2, 0)
    assert P.is_selfadjoint(tol=0.0)
    assert len(P.terms) == 4

    P = exprparse.parse("2i*(U1*Z1)^2", 1, 1)
    mono = ((1, False), (2, False), (1, False), (2, False))
    assert P.terms == {mono: 2j}


def test_postfix_order():
    # postfix operators apply left to right: U1^2' = (U1^2)'
    P = exprparse.parse("U1^2'", 1, 0)
    assert P.terms == {((1, True), (1, True)): (1 + 0j)}


def test_format_rules():
    zero = polyalg.NCPolynomial.zero(1, 1)
    assert exprparse.format_poly(zero) == "0"
    P = exprparse.parse("-U1", 1, 0)
    text = exprparse.format_poly(P)
    assert text.startswith("-") and "(-1" not in text


def test_error_positions():
    with pytest.raises(exprparse.ParseError) as e:
        exprparse.parse("U1 + @", 1, 0)
    assert e.value.column == 6
    with pytest.raises(exprparse.ParseError):
        exprparse.parse("U3", 2, 0)       # unknown letter index
    with pytest.raises(exprparse.ParseError):
        exprparse.parse("Z1", 1, 0)       # no deterministic letters declared
    with pytest.raises(exprparse.ParseError):
        exprparse.parse("U1^0", 1, 0)     # non-positive exponent
    with pytest.raises(exprparse.ParseError):
        exprparse.parse("", 1, 0)


def test_no_panic_on_arbitrary_bytes():
    rng = np.random.default_rng(0)
    for _ in range(300):
        n = int(rng.integers(1, 30))
        text = bytes(rng.integers(32, 127, size=n)).decode("ascii")
        try:
            exprparse.parse(text, 2, 2)
        except exprparse.ParseError:
            pass


def random_poly(rng, p, q, max_deg):
    d = p + q
    P = polyalg.NCPolynomial.zero(d, p)
    for _ in range(int(rng.integers(1, 5))):
        deg = int(rng.integers(0, max_deg + 1))
        mono = tuple((int(rng.integers(1, d + 1)), bool(rng.integers(0, 2)))
                     for _ in range(deg))
        c = complex(round(rng.uniform(-4, 4), 3), round(rng.uniform(-4, 4), 3))
        if c != 0:
            P = P + polyalg.NCPolynomial(d, p, {mono: c})
    return P


def test_round_trip_random():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        p = int(rng.integers(1, 4))
        q = int(rng.integers(0, 4))
        P = random_poly(rng, p, q, max_deg=6)
        text = exprparse.format_poly(P)
        Q = exprparse.parse(text, p, q) if text != "0" else \
            polyalg.NCPolynomial.zero(p + q, p)
        assert Q.terms.keys() == P.terms.keys()
        for mono, c in P.terms.items():
            assert abs(complex(Q.terms[mono]) - complex(c)) <= 1e-12


def test_format_parse_deterministic():
    rng = np.random.default_rng(2)
    P = random_poly(rng, 2, 2, max_deg=4)
    assert exprparse.format_poly(P) == exprparse.format_poly(P)
