"""Finite-N random matrix kernels.

Sampling of Haar unitaries, Hermitian Brownian increments and unitary
Brownian motion trajectories, Hermitian eigensolving with deterministic
phase conventions, the sharp product on M_n (x) M_M, resolvent traces,
bounded-Lipschitz distances between spectra, and a small binary/JSON
matrix interchange format.

All stochastic operations take an explicit numpy Generator (or an integer
seed); replicas should derive their streams via :func:`derived_rng` so
reruns are bit-identical on one platform.
"""

import json
import struct

import numpy as np
from scipy.linalg import qr

__all__ = [
    "make_rng", "derived_rng", "sample_haar_unitary", "hermitian_bm_increment",
    "ubm_trajectory", "UnitaryTuple", "eig_hermitian", "sharp_product",
    "resolvent_trace", "EmpiricalMeasure", "bl_distance", "kron",
    "save_matrix", "load_matrix", "matrix_to_json", "matrix_from_json",
]


# ----------------------------------------------------------------------
# seeded RNG (counter-based Philox streams)
# ----------------------------------------------------------------------

def make_rng(seed):
    """Counter-based generator from an integer seed (or pass one through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def derived_rng(seed, *indices):
    """Independent stream keyed by (seed, index, ...); used for replica fan-out."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence((seed,) + tuple(indices))))


# ----------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------

def sample_haar_unitary(N, rng):
    """Haar-distributed N x N unitary: complex Ginibre, QR, then the phase
    normalization R_jj/|R_jj| applied to the columns of Q."""
    rng = make_rng(rng)
    z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2)
    q, r = qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return q


def hermitian_bm_increment(N, h, rng, size=()):
    """Increment of a Hermitian Brownian motion over time h: Hermitian with
    diagonal entries N(0, h/N) and off-diagonal re/im parts N(0, h/(2N)).

    ``size`` prepends batch dimensions.
    """
    if h <= 0:
        raise ValueError("need h > 0")
    rng = make_rng(rng)
    shape = tuple(size) + (N, N)
    a = rng.standard_normal(shape) * np.sqrt(h / (4.0 * N))
    b = rng.standard_normal(shape) * np.sqrt(h / (4.0 * N))
    x = a + 1j * b
    x = x + np.swapaxes(x, -1, -2).conj()
    # symmetrization doubles the off-diagonal variances to h/(2N);
    # the diagonal is overwritten with a fresh draw of variance h/N
    diag = rng.standard_normal(shape[:-1]) * np.sqrt(h / N)
    idx = np.arange(N)
    x[..., idx, idx] = diag
    return x


def _expi_batched(H):
    """exp(i H) for (possibly batched) Hermitian H; exactly unitary."""
    w, V = np.linalg.eigh(H)
    phases = np.exp(1j * w)
    return (V * phases[..., None, :]) @ np.swapaxes(V.conj(), -1, -2)


class UnitaryTuple:
    """A p-tuple of common-size unitary matrices with sampling provenance."""

    __slots__ = ("matrices", "seed", "steps", "time")

    def __init__(self, matrices, seed=None, steps=None, time=None):
        self.matrices = [np.asarray(m, dtype=complex) for m in matrices]
        self.seed = seed
        self.steps = steps
        self.time = time

    @property
    def p(self):
        return len(self.matrices)

    @property
    def N(self):
        return self.matrices[0].shape[-1]

    @classmethod
    def identity(cls, p, N):
        return cls([np.eye(N, dtype=complex) for _ in range(p)])

    @classmethod
    def haar(cls, p, N, rng, seed=None):
        rng = make_rng(rng)
        return cls([sample_haar_unitary(N, rng) for _ in range(p)], seed=seed)

    def unitarity_defect(self):
        return max(np.linalg.norm(m.conj().swapaxes(-1, -2) @ m
                                  - np.eye(self.N)) for m in self.matrices)


def ubm_trajectory(U0, t, steps, rng, snapshots=None):
    """Integrate p independent unitary Brownian motions dU = iU dX - U/2 dt
    from U0 over [0, t] with the multiplicative scheme U <- U exp(i dX).

    The Ito drift emerges from E[(dX)^2] = h I, so no separate drift step is
    needed and every iterate is exactly unitary.  ``U0`` may hold batched
    matrices (leading dimensions are replicas).  If ``snapshots`` (a sorted
    list of times <= t) is given, returns a list of UnitaryTuple, one per
    snapshot time; otherwise returns the time-t tuple.
    """
    if t < 0:
        raise ValueError("need t >= 0")
    rng = make_rng(rng)
    mats = [m.copy() for m in U0.matrices]
    N = U0.N
    if t == 0 or steps < 1:
        out = UnitaryTuple(mats, steps=0, time=0.0)
        return [out] * len(snapshots) if snapshots is not None else out
    h = t / steps
    batch = mats[0].shape[:-2]
    taken = []
    want = list(snapshots) if snapshots is not None else None
    for k in range(steps):
        for j in range(len(mats)):
            dX = hermitian_bm_increment(N, h, rng, size=batch)
            mats[j] = mats[j] @ _expi_batched(dX)
        now = (k + 1) * h
        if want is not None:
            while want and want[0] <= now + 1e-12:
                want.pop(0)
                taken.append(UnitaryTuple([m.copy() for m in mats],
                                          steps=k + 1, time=now))
    if snapshots is not None:
        while len(taken) < len(snapshots):
            taken.append(UnitaryTuple([m.copy() for m in mats], steps=steps, time=t))
        return taken
    return UnitaryTuple(mats, steps=steps, time=t)


# ----------------------------------------------------------------------
# eigensolving and spectral functionals
# ----------------------------------------------------------------------

def eig_hermitian(A, tol_scale=1e-10):
    """Eigendecomposition of a Hermitian matrix: ascending eigenvalues and a
    unitary eigenbasis with a deterministic phase convention (the largest-
    magnitude component of each vector is made real positive)."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    herm_defect = np.linalg.norm(A - A.conj().T)
    if herm_defect > 1e-10 * max(1.0, np.linalg.norm(A)) * n:
        raise ValueError("matrix is not Hermitian (defect %.3e)" % herm_defect)
    w, V = np.linalg.eigh(A)
    # deterministic phases
    idx = np.argmax(np.abs(V), axis=0)
    lead = V[idx, np.arange(n)]
    V = V * np.where(np.abs(lead) > 0, np.abs(lead) / np.where(lead == 0, 1, lead), 1.0)
    return w, V


def resolvent_trace(A, z, eigvals=None):
    """Normalized Stieltjes transform (1/n) sum 1/(z - lambda_i)."""
    if np.imag(z) == 0:
        raise ValueError("z must be off the real axis")
    if eigvals is None:
        eigvals = np.linalg.eigvalsh(np.asarray(A, dtype=complex))
    eigvals = np.asarray(eigvals)
    return complex(np.mean(1.0 / (z - eigvals)))


# ----------------------------------------------------------------------
# the sharp product on M_n (x) M_M
# ----------------------------------------------------------------------

def sharp_product(x, y, n, M):
    """The twisted product (A1 (x) B1) # (A2 (x) B2) = (A1 A2) (x) (B2 B1),
    extended bilinearly to M_n (x) M_M realized as M_{nM} via kron.

    Satisfies the operator-norm bound ||x # y|| <= M ||x|| ||y||.
    """
    x = np.asarray(x, dtype=complex).reshape(n, M, n, M)
    y = np.asarray(y, dtype=complex).reshape(n, M, n, M)
    z = np.einsum("akcj,cibk->aibj", x, y)
    return z.reshape(n * M, n * M)


def kron(A, B):
    """Kronecker product under the identification M_N (x) M_M = M_{NM}."""
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


# ----------------------------------------------------------------------
# empirical measures and the bounded-Lipschitz distance
# ----------------------------------------------------------------------

class EmpiricalMeasure:
    """Uniform atomic measure on a sorted list of real points."""

    __slots__ = ("points",)

    def __init__(self, points):
        pts = np.sort(np.asarray(points, dtype=float).ravel())
        if pts.size == 0:
            raise ValueError("empty measure")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite support points")
        self.points = pts

    def cdf(self, grid):
        return np.searchsorted(self.points, grid, side="right") / self.points.size


def bl_distance(mu, nu, grid_size=4096):
    """Bounded-Lipschitz distance sup over 1-Lipschitz f with |f| <= 1 of
    |int f dmu - int f dnu|, computed on a discretization grid over the
    combined support hull (a Wasserstein-1 capped at 2)."""
    if not isinstance(mu, EmpiricalMeasure):
        mu = EmpiricalMeasure(mu)
    if not isinstance(nu, EmpiricalMeasure):
        nu = EmpiricalMeasure(nu)
    lo = min(mu.points[0], nu.points[0])
    hi = max(mu.points[-1], nu.points[-1])
    if hi == lo:
        return 0.0
    grid = np.linspace(lo, hi, grid_size)
    diff = mu.cdf(grid) - nu.cdf(grid)
    trapezoid = getattr(np, "trapezoid", np.trapz)
    w1 = trapezoid(np.abs(diff), grid)
    return float(min(w1, 2.0))


# ----------------------------------------------------------------------
# matrix interchange (checkpointing)
# ----------------------------------------------------------------------

_MAGIC = b"FHCM"


def save_matrix(path, A):
    """Binary format: magic, uint32 rows, uint32 cols, then row-major
    interleaved re/im float64 pairs."""
    A = np.asarray(A, dtype=complex)
    rows, cols = A.shape
    buf = bytearray()
    buf += _MAGIC
    buf += struct.pack("<II", rows, cols)
    inter = np.empty((rows, cols, 2), dtype="<f8")
    inter[..., 0] = A.real
    inter[..., 1] = A.imag
    buf += inter.tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(buf))


def load_matrix(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise ValueError("bad magic in %s" % path)
    rows, cols = struct.unpack("<II", data[4:12])
    inter = np.frombuffer(data[12:], dtype="<f8").reshape(rows, cols, 2)
    return inter[..., 0] + 1j * inter[..., 1]


def matrix_to_json(A):
    A = np.asarray(A, dtype=complex)
    return json.dumps({"shape": list(A.shape),
                       "re": A.real.tolist(), "im": A.imag.tolist()})


def matrix_from_json(text):
    obj = json.loads(text)
    return np.asarray(obj["re"]) + 1j * np.asarray(obj["im"])
