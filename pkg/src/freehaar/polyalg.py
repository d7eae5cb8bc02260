"""Non-commutative *-polynomial algebra in 2d indeterminates.

Elements of C<Y_1,..,Y_d,Y_1*,..,Y_d*> are stored as sparse maps from
monomials (tuples of letters) to scalar coefficients.  The first ``p``
indeterminates play the role of unitary letters, the remaining ``d - p``
are deterministic ones; the distinction only matters for the circular
derivative ``delta`` and for evaluation conventions downstream.

Coefficients are ordinarily complex doubles, but any scalar type with
``+ - *`` and ``conjugate()`` works; :class:`GaussianRational` provides an
exact mode used by the algebra property tests.
"""

from fractions import Fraction

import numpy as np
from scipy.linalg import expm as _expm_pade


# ----------------------------------------------------------------------
# exact scalars
# ----------------------------------------------------------------------

class GaussianRational:
    """Exact complex number a + b*i with rational a, b."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __add__(self, other):
        other = _as_gr(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_gr(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _as_gr(other) - self

    def __mul__(self, other):
        other = _as_gr(other)
        return GaussianRational(self.re * other.re - self.im * other.im,
                                self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __eq__(self, other):
        other = _as_gr(other)
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return float(self.re) + 1j * float(self.im)

    def __repr__(self):
        return "GaussianRational(%s, %s)" % (self.re, self.im)


def _as_gr(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    if isinstance(x, complex):
        return GaussianRational(Fraction(x.real), Fraction(x.imag))
    if isinstance(x, float):
        return GaussianRational(Fraction(x))
    raise TypeError("cannot convert %r to GaussianRational" % (x,))


def _conj(c):
    """Complex conjugate for builtin or custom scalars."""
    return c.conjugate() if hasattr(c, "conjugate") else c


def _is_zero(c):
    return not c if isinstance(c, GaussianRational) else c == 0


# ----------------------------------------------------------------------
# letters and monomials
# ----------------------------------------------------------------------
#
# A letter is a pair (index, starred) with 1-based index; a monomial is a
# tuple of letters, the empty tuple being the unit.

def letter(index, starred=False):
    return (int(index), bool(starred))


def letter_kind(lt, p):
    """'unitary' for indices <= p, 'deterministic' above."""
    return "unitary" if lt[0] <= p else "deterministic"


def mono_adjoint(mono):
    return tuple((i, not s) for (i, s) in reversed(mono))


class NCPolynomial:
    """Sparse non-commutative polynomial over letters 1..d (first p unitary)."""

    __slots__ = ("d", "p", "terms")

    def __init__(self, d, p, terms=None):
        if not (0 <= p <= d):
            raise ValueError("need 0 <= p <= d")
        self.d = d
        self.p = p
        self.terms = {}
        if terms:
            for mono, c in terms.items():
                self._check_mono(mono)
                if not _is_zero(c):
                    self.terms[tuple(mono)] = c

    def _check_mono(self, mono):
        for (i, _s) in mono:
            if not 1 <= i <= self.d:
                raise ValueError("letter index %d outside [1, %d]" % (i, self.d))

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, d, p):
        return cls(d, p)

    @classmethod
    def one(cls, d, p, coeff=1.0):
        return cls(d, p, {(): coeff})

    @classmethod
    def generator(cls, d, p, index, starred=False, coeff=1.0):
        return cls(d, p, {(letter(index, starred),): coeff})

    # -- ring structure -------------------------------------------------

    def _compat(self, other):
        if self.d != other.d or self.p != other.p:
            raise ValueError("mismatched alphabet dimensions (d=%d,p=%d) vs (d=%d,p=%d)"
                             % (self.d, self.p, other.d, other.p))

    def __add__(self, other):
        if not isinstance(other, NCPolynomial):
            other = NCPolynomial.one(self.d, self.p, other)
        self._compat(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            acc = terms.get(mono, 0) + c
            if _is_zero(acc):
                terms.pop(mono, None)
            else:
                terms[mono] = acc
        out = NCPolynomial(self.d, self.p)
        out.terms = terms
        return out

    __radd__ = __add__

    def __neg__(self):
        out = NCPolynomial(self.d, self.p)
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if not isinstance(other, NCPolynomial):
            other = NCPolynomial.one(self.d, self.p, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, NCPolynomial):
            return self.scale(other)
        self._compat(other)
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = m1 + m2
                acc = terms.get(mono, 0) + c1 * c2
                if _is_zero(acc):
                    terms.pop(mono, None)
                else:
                    terms[mono] = acc
        out = NCPolynomial(self.d, self.p)
        out.terms = terms
        return out

    def __rmul__(self, other):
        # scalars commute with everything here
        return self.scale(other)

    def scale(self, c):
        out = NCPolynomial(self.d, self.p)
        if not _is_zero(c):
            out.terms = {m: c * cm for m, cm in self.terms.items()}
        return out

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        out = NCPolynomial.one(self.d, self.p)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        return (self.d, self.p) == (other.d, other.p) and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, self.p, frozenset(self.terms.items())))

    # -- involution and norms -------------------------------------------

    def adjoint(self):
        out = NCPolynomial(self.d, self.p)
        out.terms = {mono_adjoint(m): _conj(c) for m, c in self.terms.items()}
        return out

    def is_selfadjoint(self, tol=0.0):
        diff = self - self.adjoint()
        if tol == 0.0:
            return not diff.terms
        return all(abs(complex(c)) <= tol for c in diff.terms.values())

    def norm_a(self, a):
        """Sum over monomials of |coeff| * a**degree (Eq.-(2)-style weight)."""
        if a < 0:
            raise ValueError("need a >= 0")
        return float(sum(abs(complex(c)) * a ** len(m) for m, c in self.terms.items()))

    def degree(self):
        return max((len(m) for m in self.terms), default=0)

    def unitary_degree(self):
        """Number of unitary letters of the highest monomial count."""
        return max((sum(1 for (i, _s) in m if i <= self.p) for m in self.terms),
                   default=0)

    def sorted_terms(self):
        """Deterministic iteration order: by degree then lexicographic."""
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def __repr__(self):
        from . import exprparse
        try:
            return "NCPolynomial(%r)" % exprparse.format_poly(self)
        except Exception:
            return "NCPolynomial(d=%d, p=%d, %d terms)" % (self.d, self.p, len(self.terms))

    # -- evaluation -----------------------------------------------------

    def evaluate(self, X):
        """Evaluate at a d-tuple of square matrices (the *-homomorphism P~)."""
        X = [np.asarray(x, dtype=complex) for x in X]
        if len(X) != self.d:
            raise ValueError("need %d matrices, got %d" % (self.d, len(X)))
        n = X[0].shape[0]
        for x in X:
            if x.shape != (n, n):
                raise ValueError("matrices must be square of common size")
        acc = np.zeros((n, n), dtype=complex)
        eye = np.eye(n, dtype=complex)
        for mono, c in self.terms.items():
            acc += complex(c) * _eval_mono(mono, X, eye)
        return acc


def _eval_mono(mono, X, eye):
    out = eye
    for (i, s) in mono:
        m = X[i - 1]
        out = out @ (m.conj().T if s else m)
    return out


# ----------------------------------------------------------------------
# tensor elements (P_d (x) P_d)
# ----------------------------------------------------------------------

class TensorElement:
    """Element of the algebraic tensor square, as a sparse map
    (left monomial, right monomial) -> coefficient."""

    __slots__ = ("d", "p", "terms")

    def __init__(self, d, p, terms=None):
        self.d = d
        self.p = p
        self.terms = {}
        if terms:
            for key, c in terms.items():
                if not _is_zero(c):
                    self.terms[key] = c

    @classmethod
    def zero(cls, d, p):
        return cls(d, p)

    def __add__(self, other):
        terms = dict(self.terms)
        for key, c in other.terms.items():
            acc = terms.get(key, 0) + c
            if _is_zero(acc):
                terms.pop(key, None)
            else:
                terms[key] = acc
        return TensorElement(self.d, self.p, terms)

    def __neg__(self):
        return TensorElement(self.d, self.p, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if _is_zero(c):
            return TensorElement(self.d, self.p)
        return TensorElement(self.d, self.p, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        """Componentwise tensor product: (a(x)b)(c(x)e) = ac (x) be."""
        terms = {}
        for (l1, r1), c1 in self.terms.items():
            for (l2, r2), c2 in other.terms.items():
                key = (l1 + l2, r1 + r2)
                acc = terms.get(key, 0) + c1 * c2
                if _is_zero(acc):
                    terms.pop(key, None)
                else:
                    terms[key] = acc
        return TensorElement(self.d, self.p, terms)

    def left_mul(self, P):
        """(P (x) 1) * self, P an NCPolynomial."""
        return _poly_tensor(P, left=True) * self

    def right_mul(self, Q):
        """self * (1 (x) Q)."""
        return self * _poly_tensor(Q, left=False)

    def contract_m(self):
        """m(A (x) B) = BA, extended linearly; returns an NCPolynomial."""
        out = NCPolynomial(self.d, self.p)
        for (ml, mr), c in self.terms.items():
            mono = mr + ml
            acc = out.terms.get(mono, 0) + c
            if _is_zero(acc):
                out.terms.pop(mono, None)
            else:
                out.terms[mono] = acc
        return out

    def evaluate(self, X):
        """Evaluate both legs at X; returns a list of (A, B) matrix pairs
        with the coefficient folded into A."""
        X = [np.asarray(x, dtype=complex) for x in X]
        n = X[0].shape[0]
        eye = np.eye(n, dtype=complex)
        pairs = []
        for (ml, mr), c in sorted(self.terms.items()):
            pairs.append((complex(c) * _eval_mono(ml, X, eye),
                          _eval_mono(mr, X, eye)))
        return pairs

    def __eq__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return (self.d, self.p) == (other.d, other.p) and self.terms == other.terms

    def __repr__(self):
        return "TensorElement(d=%d, p=%d, %d terms)" % (self.d, self.p, len(self.terms))


def _poly_tensor(P, left):
    terms = {}
    for m, c in P.terms.items():
        key = (m, ()) if left else ((), m)
        terms[key] = c
    return TensorElement(P.d, P.p, terms)


# ----------------------------------------------------------------------
# derivatives (single-pass word scans)
# ----------------------------------------------------------------------

def partial_derive(P, i, starred=False):
    """Free difference quotient d_i (or d_i* if starred): on each monomial,
    sum over occurrences of Y_i (resp. Y_i*) of prefix (x) suffix."""
    if not 1 <= i <= P.d:
        raise ValueError("index out of range")
    T = TensorElement(P.d, P.p)
    target = (i, bool(starred))
    for mono, c in P.terms.items():
        for k, lt in enumerate(mono):
            if lt == target:
                key = (mono[:k], mono[k + 1:])
                acc = T.terms.get(key, 0) + c
                if _is_zero(acc):
                    T.terms.pop(key, None)
                else:
                    T.terms[key] = acc
    return T


def delta_derive(P, i):
    """Circular derivative delta_i: delta_i Y_i = Y_i (x) 1,
    delta_i Y_i* = -1 (x) Y_i*, Leibniz over words."""
    if not 1 <= i <= P.p:
        raise ValueError("delta index must address a unitary letter")
    T = TensorElement(P.d, P.p)
    for mono, c in P.terms.items():
        for k, (j, s) in enumerate(mono):
            if j != i:
                continue
            if not s:
                key = (mono[:k + 1], mono[k + 1:])
                cc = c
            else:
                key = (mono[:k], mono[k:])
                cc = -c
            acc = T.terms.get(key, 0) + cc
            if _is_zero(acc):
                T.terms.pop(key, None)
            else:
                T.terms[key] = acc
    return T


def cyclic_derive(P, i, flavor="scriptD"):
    """Cyclic derivatives: D_i = m o d_i, D_i* = m o d_i*, scriptD = m o delta_i."""
    if flavor == "D":
        return partial_derive(P, i, False).contract_m()
    if flavor == "D*":
        return partial_derive(P, i, True).contract_m()
    if flavor == "scriptD":
        return delta_derive(P, i).contract_m()
    raise ValueError("flavor must be 'D', 'D*' or 'scriptD'")


# ----------------------------------------------------------------------
# evaluated-tensor contractions
# ----------------------------------------------------------------------

def tensor_apply(pairs, C=None, mode="#"):
    """Contract an evaluated tensor (list of (A, B) matrix pairs).

    mode '#'  : sum of A C B
    mode '#~' : sum of B C A
    mode 'm'  : sum of B A              (C ignored)
    mode 'box': sum of A B              (C ignored; the n(.) contraction
                behind the boxtimes pairing of split evaluations)
    """
    pairs = [(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
             for a, b in pairs]
    if not pairs:
        raise ValueError("empty tensor")
    n = pairs[0][0].shape[0]
    out = np.zeros((n, n), dtype=complex)
    if mode in ("#", "#~"):
        if C is None:
            raise ValueError("mode %r needs a middle matrix" % mode)
        C = np.asarray(C, dtype=complex)
        for a, b in pairs:
            out += a @ C @ b if mode == "#" else b @ C @ a
    elif mode == "m":
        for a, b in pairs:
            out += b @ a
    elif mode == "box":
        for a, b in pairs:
            out += a @ b
    else:
        raise ValueError("unknown mode %r" % mode)
    return out


def tensor_pairs_to_matrix(pairs):
    """Faithful linear image sum kron(A, B); handy for comparing tensors."""
    pairs = list(pairs)
    a0, b0 = pairs[0]
    n, m = a0.shape[0], b0.shape[0]
    out = np.zeros((n * m, n * m), dtype=complex)
    for a, b in pairs:
        out += np.kron(a, b)
    return out


# ----------------------------------------------------------------------
# matrix exponentials and the Duhamel formula
# ----------------------------------------------------------------------

def expi_hermitian(H):
    """exp(i H) for Hermitian H via eigendecomposition; exactly unitary."""
    H = np.asarray(H, dtype=complex)
    w, V = np.linalg.eigh(H)
    return (V * np.exp(1j * w)) @ V.conj().T


def expm(A):
    """General matrix exponential (Pade scaling-and-squaring)."""
    return _expm_pade(np.asarray(A, dtype=complex))


def delta_exp_evaluate(P, i, X, quadrature_nodes=64):
    """Evaluated delta_i exp(P) at X via the Duhamel integral
    int_0^1 e^{a P} (delta_i P) e^{(1-a) P} da, Gauss-Legendre in a.

    Returns a list of (A, B) matrix pairs (quadrature weights folded in).
    """
    if quadrature_nodes < 2:
        raise ValueError("need at least 2 quadrature nodes")
    base = delta_derive(P, i).evaluate(X)
    Pm = P.evaluate(X)
    nodes, weights = np.polynomial.legendre.leggauss(quadrature_nodes)
    # map from [-1, 1] to [0, 1]
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    out = []
    for a, w in zip(nodes, weights):
        el = expm(a * Pm)
        er = expm((1.0 - a) * Pm)
        for L, R in base:
            out.append((w * (el @ L), R @ er))
    return out


def delta_exp_series(P, i, X, k_max=30):
    """Series oracle sum_k 1/k! delta_i(P^k) evaluated at X, as one matrix
    in the kron representation.  delta_i(P^k) = sum_{a+b=k-1} (P^a (x) 1)
    delta_iP (1 (x) P^b), so the sum telescopes over powers of P(X)."""
    base = delta_derive(P, i).evaluate(X)
    Pm = P.evaluate(X)
    n = Pm.shape[0]
    powers = [np.eye(n, dtype=complex)]
    for _ in range(k_max):
        powers.append(powers[-1] @ Pm)
    from math import factorial
    out = np.zeros((n * n, n * n), dtype=complex)
    for a in range(k_max):
        for b in range(k_max - a):
            c = 1.0 / factorial(a + b + 1)
            for L, R in base:
                out += c * np.kron(powers[a] @ L, R @ powers[b])
    return out
