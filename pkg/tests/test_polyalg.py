"""Unit tests for the non-commutative *-polynomial algebra."""

import math
from fractions import Fraction

import numpy as np
import pytest

from freehaar import polyalg as pa
from freehaar import rmt

D, P_UNIT = 3, 2


def gen(i, starred=False):
    return pa.NCPolynomial.generator(D, P_UNIT, i, starred,
                                     coeff=pa.GaussianRational(1))


def random_poly(rng, max_deg=3, n_terms=3):
    """Random polynomial with exact Gaussian-rational coefficients."""
    P = pa.NCPolynomial.zero(D, P_UNIT)
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_deg + 1))
        mono = tuple((int(rng.integers(1, D + 1)), bool(rng.integers(0, 2)))
                     for _ in range(deg))
        c = pa.GaussianRational(Fraction(int(rng.integers(-3, 4)), 2),
                                Fraction(int(rng.integers(-3, 4)), 2))
        P = P + pa.NCPolynomial(D, P_UNIT, {mono: c})
    return P


def pairs_matrix(pairs, n):
    """kron image of an evaluated tensor, tolerating the empty tensor."""
    if not pairs:
        return np.zeros((n * n, n * n), dtype=complex)
    return pa.tensor_pairs_to_matrix(pairs)


def random_matrices(rng, n=4):
    X = []
    for _ in range(D):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        X.append(A / (2.0 * math.sqrt(n)))
    return X


# -- ring structure ----------------------------------------------------

def test_multiply_examples():
    y1, y1s, y2 = gen(1), gen(1, True), gen(2)
    assert (y1 * y1s).terms == {((1, False), (1, True)): pa.GaussianRational(1)}
    one = pa.NCPolynomial.one(D, P_UNIT)
    rng = np.random.default_rng(0)
    P = random_poly(rng)
    assert P * one == P
    assert (y1 + y2) * y1s == y1 * y1s + y2 * y1s


def test_multiply_associative():
    rng = np.random.default_rng(1)
    for _ in range(20):
        A, B, C = (random_poly(rng, max_deg=2) for _ in range(3))
        assert (A * B) * C == A * (B * C)


def test_adjoint_examples():
    y1, y2 = gen(1), gen(2)
    lhs = (y1 * y2).scale(pa.GaussianRational(0, 2)).adjoint()
    rhs = (gen(2, True) * gen(1, True)).scale(pa.GaussianRational(0, -2))
    assert lhs == rhs
    P = y1 + gen(1, True)
    assert P.adjoint() == P
    one = pa.NCPolynomial.one(D, P_UNIT)
    assert one.adjoint() == one


def test_adjoint_involution_and_antihomomorphism():
    rng = np.random.default_rng(2)
    for _ in range(50):
        A, B = random_poly(rng), random_poly(rng)
        assert A.adjoint().adjoint() == A
        assert (A * B).adjoint() == B.adjoint() * A.adjoint()


def test_norm_a_examples():
    # P = 2 Y1 Y2 + Y1 at A = 3 -> 2*9 + 3 = 21
    P = pa.NCPolynomial(D, P_UNIT, {((1, False), (2, False)): 2.0,
                                    ((1, False),): 1.0})
    assert P.norm_a(3.0) == pytest.approx(21.0)
    assert pa.NCPolynomial.zero(D, P_UNIT).norm_a(5.0) == 0.0
    assert pa.NCPolynomial.one(D, P_UNIT).norm_a(7.0) == 1.0


def test_norm_a_submultiplicative_and_triangle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        A, B = random_poly(rng), random_poly(rng)
        for a in (0.5, 1.0, 2.0):
            assert (A * B).norm_a(a) <= A.norm_a(a) * B.norm_a(a) + 1e-12
            assert (A + B).norm_a(a) <= A.norm_a(a) + B.norm_a(a) + 1e-12


# -- derivatives -------------------------------------------------------

def test_partial_derive_examples():
    y1, y2 = gen(1), gen(2)
    T = pa.partial_derive(y1 * y2, 1)
    assert T.terms == {((), ((2, False),)): pa.GaussianRational(1)}
    assert pa.partial_derive(gen(1, True), 1).terms == {}
    T = pa.partial_derive(y1 * y1, 1)
    assert T.terms == {((), ((1, False),)): pa.GaussianRational(1),
                       (((1, False),), ()): pa.GaussianRational(1)}


def test_delta_derive_examples():
    assert pa.delta_derive(gen(1), 1).terms == \
        {(((1, False),), ()): pa.GaussianRational(1)}
    assert pa.delta_derive(gen(1, True), 1).terms == \
        {((), ((1, True),)): pa.GaussianRational(-1)}
    assert pa.delta_derive(gen(1) * gen(1, True), 1).terms == {}


def test_leibniz_exact():
    """Leibniz rules hold exactly in Gaussian-rational arithmetic."""
    rng = np.random.default_rng(4)
    for _ in range(200):
        A, B = random_poly(rng), random_poly(rng)
        for i in (1, 2):
            for starred in (False, True):
                lhs = pa.partial_derive(A * B, i, starred)
                rhs = pa.partial_derive(A, i, starred).right_mul(B) + \
                    pa.partial_derive(B, i, starred).left_mul(A)
                assert lhs == rhs
            lhs = pa.delta_derive(A * B, i)
            rhs = pa.delta_derive(A, i).right_mul(B) + \
                pa.delta_derive(B, i).left_mul(A)
            assert lhs == rhs


def test_cyclic_derive_examples():
    y1, y2 = gen(1), gen(2)
    for n in range(1, 7):
        Pn = y1 ** n
        got = pa.cyclic_derive(Pn, 1, "scriptD")
        assert got == Pn.scale(pa.GaussianRational(n))
    assert pa.cyclic_derive(y1 * y2, 1, "D") == y2
    assert pa.cyclic_derive(y2, 1, "scriptD") == pa.NCPolynomial.zero(D, P_UNIT)


def test_delta_unitarity_compatibility():
    """delta_i(Q Yi Yi* R) and delta_i(Q R) agree after unitary evaluation."""
    rng = np.random.default_rng(5)
    for _ in range(20):
        Q, R = random_poly(rng, max_deg=2), random_poly(rng, max_deg=2)
        i = 1
        with_pair = Q * gen(i) * gen(i, True) * R
        without = Q * R
        X = [rmt.sample_haar_unitary(4, rng) for _ in range(P_UNIT)]
        X.append(random_matrices(rng)[0])
        lhs = pairs_matrix(pa.delta_derive(with_pair, i).evaluate(X), 4)
        rhs = pairs_matrix(pa.delta_derive(without, i).evaluate(X), 4)
        assert np.linalg.norm(lhs - rhs) <= 1e-10


# -- tensor contractions -----------------------------------------------

def test_tensor_apply_examples():
    I2 = np.eye(2)
    assert np.allclose(pa.tensor_apply([(I2, I2)], I2, "#"), I2)
    A, B = np.diag([1.0, 2.0]), np.diag([3.0, 4.0])
    assert np.allclose(pa.tensor_apply([(A, B)], I2, "#"), np.diag([3.0, 8.0]))
    E12 = np.zeros((2, 2)); E12[0, 1] = 1
    E21 = np.zeros((2, 2)); E21[1, 0] = 1
    E22 = np.zeros((2, 2)); E22[1, 1] = 1
    assert np.allclose(pa.tensor_apply([(E12, E21)], mode="m"), E22)
    assert np.allclose(pa.tensor_apply([(A, B)], I2, "#~"), B @ A)


def test_contract_m_matches_matrix_side():
    rng = np.random.default_rng(6)
    for _ in range(20):
        A = random_poly(rng, max_deg=2)
        T = pa.delta_derive(A * A, 1)
        if not T.terms:
            continue
        X = random_matrices(rng)
        lhs = T.contract_m().evaluate(X)
        rhs = pa.tensor_apply(T.evaluate(X), mode="m")
        assert np.linalg.norm(lhs - rhs) <= 1e-10


# -- evaluation --------------------------------------------------------

def test_evaluate_examples():
    rng = np.random.default_rng(7)
    U = rmt.sample_haar_unitary(5, rng)
    X = [U, U, U]
    P = gen(1) * gen(1, True)
    assert np.allclose(P.evaluate(X), np.eye(5), atol=1e-12)
    X2 = [np.diag([1j, -1j]), np.eye(2), np.eye(2)]
    Q = gen(1) + gen(1, True)
    assert np.allclose(Q.evaluate(X2), np.zeros((2, 2)), atol=1e-14)


def test_evaluate_homomorphism():
    rng = np.random.default_rng(8)
    for _ in range(20):
        A, B = random_poly(rng), random_poly(rng)
        X = random_matrices(rng)
        assert np.linalg.norm((A * B).evaluate(X) - A.evaluate(X) @ B.evaluate(X)) <= 1e-10
        assert np.linalg.norm(A.adjoint().evaluate(X) - A.evaluate(X).conj().T) <= 1e-10
        SA = A + A.adjoint()
        M = SA.evaluate(X)
        assert np.linalg.norm(M - M.conj().T) <= 1e-12 * max(1.0, np.linalg.norm(M))


# -- Duhamel -----------------------------------------------------------

def test_delta_exp_zero():
    P = pa.NCPolynomial.zero(D, P_UNIT)
    X = random_matrices(np.random.default_rng(9))
    out = pa.delta_exp_evaluate(P, 1, X)
    assert np.linalg.norm(pa.tensor_pairs_to_matrix(out)) == 0 if out else True


def test_delta_exp_scalar_closed_form():
    # P = Y1 on a 1x1 matrix (u): delta_1 e^P = u e^u as a scalar tensor
    u = 0.3 + 0.2j
    P = gen(1)
    X = [np.array([[u]]), np.array([[0.0j]]), np.array([[0.0j]])]
    val = pa.tensor_pairs_to_matrix(pa.delta_exp_evaluate(P, 1, X))[0, 0]
    assert abs(val - u * np.exp(u)) <= 1e-12


def test_delta_exp_vs_series():
    rng = np.random.default_rng(10)
    for _ in range(10):
        A = random_poly(rng, max_deg=2)
        P = A + A.adjoint()
        X = random_matrices(rng)
        if np.linalg.norm(P.evaluate(X), 2) > 5:
            continue
        lhs = pairs_matrix(pa.delta_exp_evaluate(P, 1, X), 4)
        rhs = pa.delta_exp_series(P, 1, X, k_max=30)
        assert np.linalg.norm(lhs - rhs) <= 1e-8


def test_expi_hermitian_unitary():
    rng = np.random.default_rng(11)
    H = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    H = (H + H.conj().T) / 2
    U = pa.expi_hermitian(H)
    assert np.linalg.norm(U.conj().T @ U - np.eye(6)) <= 1e-12
