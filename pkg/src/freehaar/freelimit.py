"""Exact free-limit computations.

Traces of words mixing free Haar unitaries with concrete deterministic
matrices are evaluated by the centering recursion of free probability:
words are kept in a canonical alternating-block form, every deterministic
block is split into (centered part) + (trace times identity), and fully
centered alternating words vanish by freeness.  On top of that sit the
limit operator norm (doubling trace powers), smooth spectral functionals
(Chebyshev sums of modified moments) and the moment ODE of the free
unitary Brownian motion.

Word blocks are tuples:

    ('u', symbol, exponent)          unitary symbol power, exponent != 0
    ('m', key, centered)             interned deterministic matrix

Canonical words never contain adjacent blocks of the same algebra (same
unitary symbol, or two matrix blocks), so any fully centered canonical
word of length >= 1 has zero trace.  The recursion centers the leftmost
raw matrix block; the (length, #raw-blocks) measure decreases strictly
lexicographically in both branches, which proves termination.
"""

import csv
from fractions import Fraction

import numpy as np

from .polyalg import GaussianRational, NCPolynomial

__all__ = [
    "AlphabetAssignment", "BudgetExceeded", "word_from_monomial",
    "tau_word", "tau_poly", "WordPolynomial", "limit_norm", "LimitNorm",
    "moment_sequence", "tau_smooth", "reconstruct_measure",
    "fubm_moment", "fubm_moments", "export_fubm_table", "export_poly_moments",
]


class BudgetExceeded(RuntimeError):
    """Raised when word expansion outgrows the configured term budget."""


# ----------------------------------------------------------------------
# alphabet assignments and the matrix store
# ----------------------------------------------------------------------

class AlphabetAssignment:
    """Binds unitary symbols 1..p to free Haar unitaries and deterministic
    letters p+1..d to concrete matrices (all of one size N).

    Matrices are interned by content so that eagerly multiplied block
    products can serve as cache keys.
    """

    def __init__(self, p, matrices=None, commuting=False, roles=None):
        self.p = p
        # commuting=True declares the deterministic letters as I_N (x) Y
        # blocks that commute with every unitary: traces then factor
        # monomial-wise instead of going through the freeness recursion.
        self.commuting = commuting
        # per unitary symbol: 'haar' (default) or ('fubm', t); only the
        # free-Haar role is served by the word recursion
        self.roles = {i: "haar" for i in range(1, p + 1)}
        if roles:
            self.roles.update(roles)
        self._store = []           # key -> ndarray
        self._index = {}           # content hash -> key
        self._products = {}        # (key, key) -> key
        self._centered = {}        # key -> key of A - tr(A)/N I
        self._adjoints = {}        # key -> key
        self._letters = {}         # deterministic letter index -> key
        self.N = None
        self.cache = {}            # cyclic-canonical word -> trace value
        if matrices:
            for offset, A in enumerate(matrices):
                self._letters[p + 1 + offset] = self.intern(A)

    @property
    def d(self):
        return self.p + len(self._letters)

    def intern(self, A):
        A = np.ascontiguousarray(np.asarray(A, dtype=complex))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("deterministic letters must be square matrices")
        if self.N is None:
            self.N = A.shape[0]
        elif A.shape[0] != self.N:
            raise ValueError("all deterministic matrices must share one size")
        h = A.tobytes()
        key = self._index.get(h)
        if key is None:
            key = len(self._store)
            self._store.append(A)
            self._index[h] = key
        return key

    def matrix(self, key):
        return self._store[key]

    def letter_key(self, index, starred=False):
        key = self._letters.get(index)
        if key is None:
            raise KeyError("deterministic letter %d has no assigned matrix" % index)
        return self.adjoint_key(key) if starred else key

    def trace(self, key):
        A = self._store[key]
        return complex(np.trace(A)) / self.N

    def product_key(self, k1, k2):
        key = self._products.get((k1, k2))
        if key is None:
            key = self.intern(self._store[k1] @ self._store[k2])
            self._products[(k1, k2)] = key
        return key

    def centered_key(self, key):
        ck = self._centered.get(key)
        if ck is None:
            A = self._store[key]
            ck = self.intern(A - (np.trace(A) / self.N) * np.eye(self.N))
            self._centered[key] = ck
        return ck

    def adjoint_key(self, key):
        ak = self._adjoints.get(key)
        if ak is None:
            ak = self.intern(self._store[key].conj().T)
            self._adjoints[key] = ak
            self._adjoints[ak] = key
        return ak

    def is_identity(self, key):
        A = self._store[key]
        return np.array_equal(A, np.eye(self.N))

    def is_zero(self, key):
        return not self._store[key].any()


# ----------------------------------------------------------------------
# canonical words
# ----------------------------------------------------------------------

def _merge_push(stack, block, a):
    """Push a block onto a canonical stack, merging with the top."""
    stack.append(block)
    while len(stack) >= 2:
        b2 = stack[-1]
        b1 = stack[-2]
        if b1[0] == "u" and b2[0] == "u" and b1[1] == b2[1]:
            n = b1[2] + b2[2]
            stack.pop()
            stack.pop()
            if n != 0:
                stack.append(("u", b1[1], n))
                break
        elif b1[0] == "m" and b2[0] == "m":
            key = a.product_key(b1[1], b2[1])
            stack.pop()
            stack.pop()
            if not a.is_identity(key):
                stack.append(("m", key, False))
                break
        else:
            break
    return stack


def canonicalize(blocks, a):
    """Linear canonical form: merge adjacent same-algebra blocks, drop
    trivial blocks (u^0, identity matrices)."""
    stack = []
    for b in blocks:
        if b[0] == "u":
            if b[2] == 0:
                continue
        elif a.is_identity(b[1]):
            continue
        _merge_push(stack, b, a)
    return tuple(stack)


def cyclic_canonicalize(blocks, a):
    """Canonical form under the trace: additionally merge across the seam,
    then pick the lexicographically smallest rotation as cache key."""
    w = canonicalize(blocks, a)
    while len(w) >= 2:
        first, last = w[0], w[-1]
        if first[0] == "u" and last[0] == "u" and first[1] == last[1]:
            w = canonicalize((("u", first[1], last[2] + first[2]),) + w[1:-1], a)
        elif first[0] == "m" and last[0] == "m":
            merged = ("m", a.product_key(last[1], first[1]), False)
            w = canonicalize((merged,) + w[1:-1], a)
        else:
            break
    if len(w) <= 1:
        return w
    return min(w[r:] + w[:r] for r in range(len(w)))


def word_from_monomial(mono, a):
    """Translate a polyalg monomial into a canonical word."""
    blocks = []
    for (i, s) in mono:
        if i <= a.p:
            blocks.append(("u", i, -1 if s else 1))
        else:
            blocks.append(("m", a.letter_key(i, s), False))
    return canonicalize(blocks, a)


# ----------------------------------------------------------------------
# the centering recursion
# ----------------------------------------------------------------------

def _block_trace(b, a):
    if b[0] == "u":
        return 0.0  # exponent nonzero by canonicality
    return 0.0 if b[2] else a.trace(b[1])


def tau_word(word, a):
    """Trace of a canonical word in the free product of the matrix algebra
    with free Haar unitaries."""
    for b in word:
        if b[0] == "u" and a.roles.get(b[1], "haar") != "haar":
            raise ValueError("symbol %d is not a free Haar unitary; u_t "
                             "moments are served by fubm_moment" % b[1])
    return _tau(cyclic_canonicalize(word, a), a)


def _tau(w, a):
    if not w:
        return 1.0 + 0.0j
    if len(w) == 1:
        return complex(_block_trace(w[0], a))
    val = a.cache.get(w)
    if val is not None:
        return val
    # leftmost raw (uncentered) matrix block
    pos = next((j for j, b in enumerate(w) if b[0] == "m" and not b[2]), None)
    if pos is None:
        # fully centered alternating word: zero by freeness
        val = 0.0 + 0.0j
    else:
        key = w[pos][1]
        t = a.trace(key)
        ck = a.centered_key(key)
        if a.is_zero(ck):
            centered_part = 0.0 + 0.0j
        else:
            wc = w[:pos] + (("m", ck, True),) + w[pos + 1:]
            centered_part = _tau(cyclic_canonicalize(wc, a), a)
        deleted = cyclic_canonicalize(w[:pos] + w[pos + 1:], a)
        val = centered_part + t * _tau(deleted, a)
    a.cache[w] = val
    return val


def tau_poly(P, a):
    """Limit trace of a polynomial: linear extension of tau_word.

    With a commuting assignment (deterministic letters of the form
    I_N (x) Y) each monomial factorizes into a free trace of its unitary
    subword times the normalized matrix trace of its ordered Y product.
    """
    acc = 0.0 + 0.0j
    for mono, c in P.terms.items():
        if a.commuting:
            u_part = tuple(lt for lt in mono if lt[0] <= a.p)
            y = None
            for (i, s) in mono:
                if i > a.p:
                    m = a.matrix(a.letter_key(i, s))
                    y = m if y is None else y @ m
            y_trace = 1.0 if y is None else complex(np.trace(y)) / a.N
            acc += complex(c) * tau_word(word_from_monomial(u_part, a), a) * y_trace
        else:
            acc += complex(c) * tau_word(word_from_monomial(mono, a), a)
    return acc


def substitute_scalars(P, values):
    """Replace deterministic letters by scalars: values[j] stands for letter
    p+1+j.  Returns a polynomial in the p unitary letters only."""
    out = NCPolynomial(P.p, P.p)
    for mono, c in P.terms.items():
        coeff = c
        new = []
        for (i, s) in mono:
            if i <= P.p:
                new.append((i, s))
            else:
                v = values[i - P.p - 1]
                coeff = coeff * (complex(v).conjugate() if s else v)
        key = tuple(new)
        acc = out.terms.get(key, 0) + coeff
        if acc == 0:
            out.terms.pop(key, None)
        else:
            out.terms[key] = acc
    return out


# ----------------------------------------------------------------------
# word polynomials (linear combinations of canonical words)
# ----------------------------------------------------------------------

class WordPolynomial:
    """Sparse linear combination of linear-canonical words; the element
    algebra in which trace powers are expanded with aggressive merging."""

    __slots__ = ("a", "terms")

    def __init__(self, a, terms=None):
        self.a = a
        self.terms = dict(terms) if terms else {}

    @classmethod
    def one(cls, a):
        return cls(a, {(): 1.0 + 0.0j})

    @classmethod
    def from_poly(cls, P, a):
        out = cls(a)
        for mono, c in P.terms.items():
            w = word_from_monomial(mono, a)
            out.terms[w] = out.terms.get(w, 0.0) + complex(c)
        out._prune()
        return out

    def _prune(self):
        for w in [w for w, c in self.terms.items() if c == 0]:
            del self.terms[w]

    def __mul__(self, other, budget=None):
        return self.mul(other)

    def mul(self, other, budget=None):
        a = self.a
        terms = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = canonicalize(w1 + w2, a)
                terms[w] = terms.get(w, 0.0) + c1 * c2
                # enforce the budget while accumulating, before the
                # intermediate dict can exhaust memory
                if budget is not None and len(terms) > budget:
                    raise BudgetExceeded(
                        "word polynomial grew past %d terms" % budget)
        out = WordPolynomial(a, terms)
        out._prune()
        return out

    def tau(self):
        return sum(c * _tau(cyclic_canonicalize(w, self.a), self.a)
                   for w, c in self.terms.items())

    def __len__(self):
        return len(self.terms)


# ----------------------------------------------------------------------
# limit operator norm by doubling trace powers
# ----------------------------------------------------------------------

class LimitNorm:
    """Result of limit_norm: certified lower bound, extrapolated estimate,
    the doubling-power sequence, and a budget flag."""

    def __init__(self, lower, estimate, sequence, budget_exceeded):
        self.lower = lower
        self.estimate = estimate
        self.sequence = sequence
        self.budget_exceeded = budget_exceeded

    def __iter__(self):
        return iter((self.lower, self.estimate))

    def __repr__(self):
        return "LimitNorm(lower=%.6g, estimate=%.6g, j_max=%d%s)" % (
            self.lower, self.estimate, len(self.sequence) - 1,
            ", budget exceeded" if self.budget_exceeded else "")


def limit_norm(P, a, j_max=6, term_budget=400000):
    """Norm of P in the free limit via the nondecreasing sequence
    b_j = tau((P*P)^(2^j))^(1/2^(j+1)) plus an Aitken extrapolation."""
    if P.is_selfadjoint(tol=0.0) and _letters_linear_weights(P) is not None:
        # P* P = P^2, so b_j is an even moment; the first-return series
        # gives those exactly without expanding word powers
        moments, _ = moment_sequence(P, a, 2 ** (j_max + 1))
        seq = [max(float(complex(moments[2 ** (j + 1)]).real), 0.0)
               ** (1.0 / 2 ** (j + 1)) for j in range(j_max + 1)]
        return _extrapolated(seq, False)
    Q = WordPolynomial.from_poly(P.adjoint() * P, a)
    seq = []
    budget_hit = False
    cur = Q
    for j in range(j_max + 1):
        if j > 0:
            try:
                cur = cur.mul(cur, budget=term_budget)
            except BudgetExceeded:
                budget_hit = True
                break
        val = max(float(np.real(cur.tau())), 0.0)
        seq.append(val ** (1.0 / 2 ** (j + 1)))
    return _extrapolated(seq, budget_hit)


def _extrapolated(seq, budget_hit):
    lower = seq[-1]
    estimate = lower
    if len(seq) >= 3:
        d1 = seq[-1] - seq[-2]
        d2 = seq[-2] - seq[-3]
        if d2 != 0 and abs(d2 - d1) > 1e-15:
            # Aitken delta-squared acceleration of the tail
            estimate = seq[-1] + d1 * d1 / (d2 - d1)
            estimate = max(estimate, lower)
    return LimitNorm(lower, estimate, seq, budget_hit)


# ----------------------------------------------------------------------
# moment sequences
# ----------------------------------------------------------------------

def _letters_linear_weights(P):
    """If P = c0 + sum over unitary letters of c_l * l, return (c0, weights)
    with weights keyed by (symbol, starred); else None."""
    c0 = 0
    weights = {}
    for mono, c in P.terms.items():
        if len(mono) == 0:
            c0 = c
        elif len(mono) == 1 and mono[0][0] <= P.p:
            weights[mono[0]] = c
        else:
            return None
    return c0, weights


def _series_mul(f, g, K):
    out = [GaussianRational(0)] * (K + 1)
    for i, fi in enumerate(f):
        if not fi:
            continue
        for j in range(0, K + 1 - i):
            gj = g[j]
            if gj:
                out[i + j] = out[i + j] + fi * gj
    return out


def _series_inv_one_minus(s, K):
    """1 / (1 - s) for a series s with zero constant term."""
    out = [GaussianRational(0)] * (K + 1)
    out[0] = GaussianRational(1)
    for n in range(1, K + 1):
        acc = GaussianRational(0)
        for j in range(1, n + 1):
            if s[j]:
                acc = acc + s[j] * out[n - j]
        out[n] = acc
    return out


def _to_gr(c):
    if isinstance(c, GaussianRational):
        return c
    c = complex(c)
    return GaussianRational(Fraction(c.real), Fraction(c.imag))


def _moments_letters_linear(c0, weights, p, K):
    """Exact moments of a letters-linear polynomial in free Haar unitaries,
    by the first-return decomposition of reduced words: walks on the Cayley
    tree of the free group return to the root iff the word reduces to 1, so

        F_a = w_a w_{a^-1} x^2 / (1 - sum_{b != a^-1} F_b),
        sum_j m_j x^j = 1 / (1 - sum_a F_a),

    solved degree by degree in exact Gaussian-rational arithmetic."""
    letters = [(i, s) for i in range(1, p + 1) for s in (False, True)]
    w = {lt: _to_gr(weights.get(lt, 0)) for lt in letters}
    inv = {(i, s): (i, not s) for (i, s) in letters}
    zero = [GaussianRational(0)] * (K + 1)
    F = {lt: list(zero) for lt in letters}
    for _ in range(K // 2 + 2):
        newF = {}
        for a in letters:
            s = list(zero)
            for b in letters:
                if b == inv[a]:
                    continue
                for j in range(K + 1):
                    if F[b][j]:
                        s[j] = s[j] + F[b][j]
            block = _series_inv_one_minus(s, K)
            fa = [GaussianRational(0)] * (K + 1)
            waw = w[a] * w[inv[a]]
            if waw:
                for j in range(0, K - 1):
                    if block[j]:
                        fa[j + 2] = waw * block[j]
            newF[a] = fa
        F = newF
    total = list(zero)
    for a in letters:
        for j in range(K + 1):
            if F[a][j]:
                total[j] = total[j] + F[a][j]
    m = _series_inv_one_minus(total, K)
    c0 = _to_gr(c0)
    if c0:
        # binomial shift for the constant term
        shifted = []
        for n in range(K + 1):
            acc = GaussianRational(0)
            binom = GaussianRational(1)
            ck = GaussianRational(1)
            for k in range(0, n + 1):
                acc = acc + binom * ck * m[n - k]
                binom = binom * Fraction(n - k, k + 1)
                ck = ck * c0
            shifted.append(acc)
        m = shifted
    return m


def moment_sequence(P, a, k_max, term_budget=400000):
    """Moments m_j = tau(P^j), j = 0..k_max.

    Returns (moments, exact): exact GaussianRational values via the
    first-return series when P is a linear combination of unitary letters
    (plus a constant), else floating point values from word-power expansion
    subject to the term budget.
    """
    lin = _letters_linear_weights(P)
    if lin is not None:
        c0, weights = lin
        return _moments_letters_linear(c0, weights, P.p, k_max), True
    W = WordPolynomial.from_poly(P, a)
    cur = WordPolynomial.one(a)
    moments = [1.0 + 0.0j]
    for _ in range(k_max):
        cur = cur.mul(W, budget=term_budget)
        moments.append(complex(cur.tau()))
    return moments, False


# ----------------------------------------------------------------------
# smooth spectral functionals
# ----------------------------------------------------------------------

_FLOAT_MOMENT_KMAX = 30


def _chebyshev_modified_moments(moments, R, K, exact):
    """s_k = tau(T_k(P/R)) from raw moments.  The integer Chebyshev
    coefficients grow like 2^k against normalized moments bounded by 1, so
    the exact path runs the cancellation in rational arithmetic."""
    if exact:
        Rf = Fraction(float(R))
        mu = [moments[j] * GaussianRational(Fraction(1) / Rf ** j)
              for j in range(K + 1)]
        zero = GaussianRational(0)
    else:
        if K > _FLOAT_MOMENT_KMAX:
            raise ValueError(
                "float moments support Chebyshev degree <= %d (got %d); "
                "cancellation in T_k coefficients is not recoverable"
                % (_FLOAT_MOMENT_KMAX, K))
        mu = [complex(moments[j]) / float(R) ** j for j in range(K + 1)]
        zero = 0.0 + 0.0j
    # T_k coefficient vectors by recursion, dotted against mu
    s = []
    t_prev = [1]          # T_0
    t_cur = [0, 1]        # T_1
    for k in range(K + 1):
        tk = t_prev if k == 0 else (t_cur if k == 1 else None)
        if tk is None:
            tk = [0] * (len(t_cur) + 1)
            for j, c in enumerate(t_cur):
                tk[j + 1] += 2 * c
            for j, c in enumerate(t_prev):
                tk[j] -= c
            t_prev, t_cur = t_cur, tk
        acc = zero
        for j, c in enumerate(tk):
            if c:
                acc = acc + c * mu[j]
        s.append(complex(acc).real if exact else acc.real)
    return s


def tau_smooth(f, P, a, R, K=40, term_budget=400000):
    """tau(f(P)) as sum_k c_k tau(T_k(P/R)) with Chebyshev coefficients of
    f on [-R, R] obtained by cosine quadrature at K+1 Chebyshev nodes."""
    moments, exact = moment_sequence(P, a, K, term_budget)
    # detect mass outside [-R, R] through even moments
    for j in range(2, K + 1, 2):
        mj = float(complex(moments[j]).real)
        if mj > 0 and mj ** (1.0 / j) > R * (1 + 1e-9):
            raise ValueError("spectral radius bound R=%g too small "
                             "(m_%d^(1/%d) = %g)" % (R, j, j, mj ** (1.0 / j)))
    cheb = np.polynomial.chebyshev.Chebyshev.interpolate(
        lambda x: np.asarray(f(x), dtype=float), K, domain=[-R, R])
    s = _chebyshev_modified_moments(moments, R, K, exact)
    return float(np.dot(cheb.coef, s))


def reconstruct_measure(P, a, R, K=40, grid_size=4096, term_budget=400000,
                        jackson=True):
    """Discretize the limit spectral measure of a self-adjoint P on a grid
    over [-R, R] via a (Jackson-damped) Chebyshev density reconstruction.

    Returns (grid, cdf); quantile sampling of the cdf yields an
    EmpiricalMeasure usable with bl_distance.
    """
    moments, exact = moment_sequence(P, a, K, term_budget)
    s = np.asarray(_chebyshev_modified_moments(moments, R, K, exact))
    if jackson:
        k = np.arange(K + 1)
        Np = K + 2
        g = ((Np - k) * np.cos(np.pi * k / Np)
             + np.sin(np.pi * k / Np) / np.tan(np.pi / Np)) / Np
        s = s * g
    # open grid in x = R cos(theta); density w.r.t. dx
    theta = np.linspace(np.pi, 0.0, grid_size + 2)[1:-1]
    x = R * np.cos(theta)
    series = s[0] + 2.0 * np.sum(
        s[1:, None] * np.cos(np.outer(np.arange(1, K + 1), theta)), axis=0)
    dens = np.maximum(series, 0.0) / (np.pi * np.sqrt(np.maximum(R * R - x * x, 1e-300)))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(x))])
    if cdf[-1] > 0:
        cdf = cdf / cdf[-1]
    return x, cdf


def measure_quantiles(grid, cdf, n_points=4096):
    """Equally spaced quantiles of a (grid, cdf) discretized measure."""
    qs = (np.arange(n_points) + 0.5) / n_points
    return np.interp(qs, cdf, grid)


# ----------------------------------------------------------------------
# free unitary Brownian motion moments (Prop-3.5-type ODE)
# ----------------------------------------------------------------------

_FUBM_STEP = 1e-3
_fubm_cache = {}


def fubm_moments(n_max, t, step=_FUBM_STEP):
    """Moments m_n(t) = tau(u_t^n), n = 0..n_max, from the closed triangular
    ODE system dm_n/dt = -(n/2) sum_{k=1..n} m_k m_{n-k}, m_n(0) = 1,
    integrated by classical RK4 with fixed step."""
    if t < 0:
        raise ValueError("need t >= 0")
    key = (n_max, float(t), step)
    hit = _fubm_cache.get(key)
    if hit is not None:
        return hit.copy()

    n_idx = np.arange(n_max + 1, dtype=float)

    def rhs(m):
        out = np.zeros_like(m)
        for n in range(1, n_max + 1):
            acc = 0.0
            for k in range(1, n + 1):
                acc += m[k] * m[n - k]
            out[n] = -0.5 * n_idx[n] * acc
        return out

    m = np.ones(n_max + 1)
    remaining = float(t)
    while remaining > 1e-15:
        h = min(step, remaining)
        k1 = rhs(m)
        k2 = rhs(m + 0.5 * h * k1)
        k3 = rhs(m + 0.5 * h * k2)
        k4 = rhs(m + h * k3)
        m = m + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        remaining -= h
    _fubm_cache[key] = m.copy()
    return m


def fubm_moment(n, t, step=_FUBM_STEP):
    """tau(u_t^n) for the free unitary Brownian motion."""
    if n < 0:
        n = -n  # moments are real and conjugation-symmetric
    return float(fubm_moments(n, t, step)[n])


# ----------------------------------------------------------------------
# CSV export
# ----------------------------------------------------------------------

def export_fubm_table(path, n_max, times, step=_FUBM_STEP):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "t", "m_n"])
        for t in times:
            m = fubm_moments(n_max, t, step)
            for n in range(n_max + 1):
                wr.writerow([n, repr(float(t)), repr(float(m[n]))])


def export_poly_moments(path, P, a, k_max, term_budget=400000):
    moments, _exact = moment_sequence(P, a, k_max, term_budget)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k", "m_k"])
        for k in range(k_max + 1):
            wr.writerow([k, repr(float(complex(moments[k]).real))])
