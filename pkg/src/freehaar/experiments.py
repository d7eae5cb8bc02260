"""Monte Carlo experiment drivers.

Every experiment is a pure function of (config dict, seed) returning
(rows, summary): rows become results.csv, summary becomes summary.json.
Replica fan-out uses derived Philox streams keyed by (seed, replica), and
chunked reductions use a fixed chunk size so results are byte-identical
for any worker count.
"""

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.special import gamma as _gamma

from . import freelimit, fubm, polyalg, rmt
from .exprparse import parse

CHUNK = 256


# ----------------------------------------------------------------------
# f families with analytic Fourier measures
# ----------------------------------------------------------------------

def _as_complex(z):
    if isinstance(z, (list, tuple)):
        return complex(z[0], z[1])
    return complex(z)


def fourier_weight(f_spec):
    """(int |y| d|mu|, int y^4 d|mu|, int |y|^5 d|mu|) for the analytic
    families; for resolvent(z) the (y + y^4) weight is the closed form
    1/|Im z|^2 + 24/|Im z|^5."""
    fam = f_spec["family"]
    if fam == "resolvent":
        z = _as_complex(f_spec["z"])
        b = abs(z.imag)
        if b == 0:
            raise ValueError("resolvent family needs Im z != 0")
        # d|mu_z|(y) = e^{-b y} dy on [0, inf)
        return (1.0 / b ** 2, 24.0 / b ** 5, 120.0 / b ** 6)
    if fam == "gaussian-bump":
        w = float(f_spec["width"])
        if w <= 0:
            raise ValueError("gaussian-bump needs width > 0")
        # d|mu|(y) = (w / sqrt(2 pi)) e^{-w^2 y^2 / 2} dy
        def moment(k):
            return (w / math.sqrt(2 * math.pi)) * _gamma((k + 1) / 2.0) \
                * (2.0 / w ** 2) ** ((k + 1) / 2.0)
        return (moment(1), moment(4), moment(5))
    if fam == "gaussian-smoothed-lipschitz":
        eps = float(f_spec["eps"])
        S = float(f_spec["support"])
        if eps <= 0:
            raise ValueError("needs eps > 0")
        # bound 2S int |u|^k e^{-u^2/2} du * eps^{-(k+1)}
        def moment(k):
            return 2.0 * S * _gamma((k + 1) / 2.0) * 2.0 ** ((k + 1) / 2.0) \
                * eps ** (-(k + 1))
        return (moment(1), moment(4), moment(5))
    raise ValueError("unknown f family %r" % fam)


def f_callable(f_spec):
    fam = f_spec["family"]
    if fam == "gaussian-bump":
        c = float(f_spec["center"])
        w = float(f_spec["width"])
        return lambda x: np.exp(-((np.asarray(x) - c) ** 2) / (2.0 * w * w))
    if fam == "constant":
        v = float(f_spec.get("value", 1.0))
        return lambda x: np.full_like(np.asarray(x, dtype=float), v)
    raise ValueError("family %r has no scalar callable" % fam)


# ----------------------------------------------------------------------
# config plumbing
# ----------------------------------------------------------------------

def parse_poly(cfg):
    return parse(cfg["poly"], cfg["p"], cfg.get("q", 0))


def z_matrices(cfg, N, M, seed):
    """Concrete deterministic matrices of size N*M from named recipes."""
    out = []
    for j, rec in enumerate(cfg.get("z_recipes", [])):
        kind = rec["kind"]
        n = N * M
        if kind == "identity":
            out.append(np.eye(n, dtype=complex))
        elif kind == "diag_pm1":
            out.append(np.diag(np.where(np.arange(n) % 2 == 0, 1.0, -1.0)).astype(complex))
        elif kind == "projection":
            r = max(1, int(round(float(rec.get("fraction", 0.5)) * n)))
            d = np.zeros(n)
            d[:r] = 1.0
            out.append(np.diag(d).astype(complex))
        elif kind == "haar_fixed":
            rng = rmt.derived_rng(int(rec.get("seed", 0)), 90000 + j, n)
            out.append(rmt.sample_haar_unitary(n, rng))
        elif kind == "commuting_diag":
            # I_N (x) Y with Y a fixed diagonal M x M recipe
            rng = rmt.derived_rng(int(rec.get("seed", 0)), 91000 + j, M)
            y = np.diag(rng.uniform(-1, 1, size=M)).astype(complex)
            out.append(np.kron(np.eye(N, dtype=complex), y))
        else:
            raise ValueError("unknown Z recipe %r" % kind)
    return out


def commuting_diagonals(cfg, M, seed):
    """Diagonal arrays of the Y factors when every Z recipe is of the
    commuting I_N (x) Y kind; None otherwise."""
    recipes = cfg.get("z_recipes", [])
    if not recipes or any(r["kind"] != "commuting_diag" for r in recipes):
        return None
    out = []
    for j, rec in enumerate(recipes):
        rng = rmt.derived_rng(int(rec.get("seed", 0)), 91000 + j, M)
        out.append(rng.uniform(-1, 1, size=M))
    return out


def evaluate_at_sample(P, cfg, N, rng, seed):
    """P~(U^N (x) I_M, Z^{NM}) for one Haar sample."""
    M = cfg.get("M", 1)
    p = cfg["p"]
    eyeM = np.eye(M, dtype=complex)
    X = []
    for _ in range(p):
        U = rmt.sample_haar_unitary(N, rng)
        X.append(np.kron(U, eyeM) if M > 1 else U)
    X.extend(z_matrices(cfg, N, M, seed))
    return P.evaluate(X)


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    n = values.size
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
    return mean, se


def _slope_fit(xs, ys):
    """Least-squares slope/intercept of log y against log x."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, _rank, _sv = np.linalg.lstsq(A, ly, rcond=None)
    residual = float(res[0]) if res.size else 0.0
    return float(coef[0]), float(coef[1]), residual


# ----------------------------------------------------------------------
# master scaling (smooth trace statistics vs the free reference)
# ----------------------------------------------------------------------

def _eval_poly_batched(P, X):
    """Evaluate P at a tuple of batched matrices of shape (B, N, N)."""
    B, N = X[0].shape[0], X[0].shape[-1]
    acc = np.zeros((B, N, N), dtype=complex)
    for mono, c in P.terms.items():
        out = None
        for (i, s) in mono:
            m = X[i - 1]
            m = m.conj().swapaxes(-1, -2) if s else m
            out = m if out is None else out @ m
        if out is None:
            acc += complex(c) * np.eye(N)
        else:
            acc += complex(c) * out
    return acc


def _haar_batch(p, N, seed, lo, hi):
    """Batched Haar p-tuples for replicas lo..hi-1, drawing each replica's
    Ginibre entries from its own derived stream (same layout as
    sample_haar_unitary) and running one batched QR + phase fix."""
    B = hi - lo
    gin = np.empty((B, p, N, N), dtype=complex)
    for k, r in enumerate(range(lo, hi)):
        rng = rmt.derived_rng(seed, N, r)
        for j in range(p):
            gin[k, j] = (rng.standard_normal((N, N))
                         + 1j * rng.standard_normal((N, N))) / np.sqrt(2)
    q, rr = np.linalg.qr(gin.reshape(B * p, N, N))
    d = np.einsum("bii->bi", rr)
    U = (q * (d / np.abs(d))[:, None, :]).reshape(B, p, N, N)
    return [U[:, j] for j in range(p)]


def _word_trace_covariates(U):
    """Traces of short words in the letters with exactly zero Haar mean.

    Every included word has nonzero net degree in at least one letter, so
    the phase invariance U_j -> e^(i theta) U_j forces its expectation to
    vanish at every matrix size; the traces are therefore exact zero-mean
    control variates for smooth spectral statistics.
    """
    B, N = U[0].shape[0], U[0].shape[-1]

    def dag(A):
        return A.conj().swapaxes(-1, -2)

    def tr_prod(A, Bm):
        return np.einsum("bij,bji->b", A, Bm) / N

    vals = []
    pows = []
    for Uj in U:
        U2 = Uj @ Uj
        U3 = U2 @ Uj
        pows.append({1: Uj, 2: U2})
        for A in (Uj, U2, U3, U3 @ Uj):
            vals.append(np.einsum("bii->b", A) / N)
    for i in range(len(U)):
        for j in range(i + 1, len(U)):
            p1, p2 = pows[i], pows[j]
            p2f = {1: p2[1], 2: p2[2], -1: dag(p2[1]), -2: dag(p2[2])}
            for a in (1, 2):
                for b in (-2, -1, 1, 2):
                    vals.append(tr_prod(p1[a], p2f[b]))
            W = {(a, b): (p1[1] if a > 0 else dag(p1[1])) @ p2f[b]
                 for a in (-1, 1) for b in (-1, 1)}
            for (a, b), w1 in W.items():
                for (c, d), w2 in W.items():
                    if a + c == 0 and b + d == 0:
                        continue  # balanced word: mean is not exactly zero
                    vals.append(tr_prod(w1, w2))
            for b in (-1, 1):
                w1 = p1[2] @ p2f[b]
                for w2 in W.values():
                    vals.append(tr_prod(w1, w2))
    out = np.empty((B, 2 * len(vals)))
    for k, v in enumerate(vals):
        out[:, 2 * k] = v.real
        out[:, 2 * k + 1] = v.imag
    return out


def _scaling_fast_path(cfg):
    return cfg.get("q", 0) == 0 and cfg.get("M", 1) == 1


def _scaling_chunk(args):
    cfg, N, seed, lo, hi, beta = args
    P = parse_poly(cfg)
    f = f_callable(cfg["f"])
    if _scaling_fast_path(cfg):
        U = _haar_batch(cfg["p"], N, seed, lo, hi)
        A = _eval_poly_batched(P, U)
        lam = np.linalg.eigvalsh(A)
        stats = f(lam).mean(axis=-1)
        if beta is not None:
            stats = stats - _word_trace_covariates(U) @ beta
        return float(stats.sum()), float((stats * stats).sum()), hi - lo
    acc = 0.0
    acc2 = 0.0
    for r in range(lo, hi):
        rng = rmt.derived_rng(seed, N, r)
        A = evaluate_at_sample(P, cfg, N, rng, seed)
        lam = np.linalg.eigvalsh(A)
        stat = float(np.mean(f(lam)))
        acc += stat
        acc2 += stat * stat
    return acc, acc2, hi - lo


def _fit_control_variates(cfg, N, seed, R_pilot):
    """Regression coefficients of the smooth statistic on the zero-mean word
    traces, fitted on a dedicated pilot block of replicas (indices 0..R_pilot-1)
    so the production estimator stays exactly unbiased."""
    P = parse_poly(cfg)
    f = f_callable(cfg["f"])
    ss = []
    vv = []
    for lo in range(0, R_pilot, CHUNK):
        hi = min(lo + CHUNK, R_pilot)
        U = _haar_batch(cfg["p"], N, seed, lo, hi)
        A = _eval_poly_batched(P, U)
        ss.append(f(np.linalg.eigvalsh(A)).mean(axis=-1))
        vv.append(_word_trace_covariates(U))
    ss = np.concatenate(ss)
    vv = np.concatenate(vv)
    beta, *_ = np.linalg.lstsq(vv, ss - ss.mean(), rcond=None)
    return beta


def _replica_schedule(cfg, N):
    R = cfg.get("replicas", 2000)
    if isinstance(R, dict):
        if "per_N" in R:
            return int(R["per_N"][str(N)])
        base = int(R.get("base", 2000))
        n0 = int(R.get("N0", min(cfg["N_list"])))
        power = float(R.get("power", 2.0))
        cap = int(R.get("cap", 10 ** 9))
        return min(cap, max(int(R.get("min", 256)), int(round(base * (N / n0) ** power))))
    return int(R)


def _pool_map(fn, jobs, threads):
    if threads and threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def run_master_scaling(cfg, seed, threads=1):
    P = parse_poly(cfg)
    if not P.is_selfadjoint(tol=1e-12):
        raise ValueError("spectral experiments need a self-adjoint polynomial")
    f = cfg["f"]
    weights = fourier_weight(f) if f["family"] != "constant" else None
    # free-side reference with concrete Z matrices (per N when q > 0)
    K = int(cfg.get("K", 60))

    def reference(N):
        M = cfg.get("M", 1)
        diags = commuting_diagonals(cfg, M, seed)
        if diags is not None:
            # commuting I_N (x) Y letters: the evaluation is block diagonal
            # over the M eigendirections of Y, so the limit measure is the
            # average over scalar substitutions Z_j -> y_j[m]
            polys = [freelimit.substitute_scalars(P, [d[m] for d in diags])
                     for m in range(M)]
            assigns = [freelimit.AlphabetAssignment(cfg["p"]) for _ in polys]
            lns = [freelimit.limit_norm(Pm, am, j_max=int(cfg.get("norm_j_max", 6)))
                   for Pm, am in zip(polys, assigns)]
            R_bound = float(cfg.get("R_bound", 0.0)) or \
                1.05 * max(max(ln.estimate, ln.lower) for ln in lns)
            if f["family"] == "constant":
                return float(f.get("value", 1.0)), R_bound
            val = np.mean([freelimit.tau_smooth(f_callable(f), Pm, am, R_bound, K=K)
                           for Pm, am in zip(polys, assigns)])
            return float(val), R_bound
        zs = z_matrices(cfg, N, M, seed)
        a = freelimit.AlphabetAssignment(cfg["p"], zs if zs else None)
        ln = freelimit.limit_norm(P, a, j_max=int(cfg.get("norm_j_max", 6)))
        R_bound = float(cfg.get("R_bound", 0.0)) or 1.05 * max(ln.estimate, ln.lower)
        if f["family"] == "constant":
            return float(f.get("value", 1.0)), R_bound
        return freelimit.tau_smooth(f_callable(f), P, a, R_bound, K=K), R_bound

    rows = []
    deltas = []
    Ns_used = []
    ref_cache = None
    for N in cfg["N_list"]:
        if cfg.get("q", 0) == 0:
            # no deterministic letters: the tau-side reference is N-free
            if ref_cache is None:
                ref_cache = reference(N)
            ref, R_bound = ref_cache
        else:
            ref, R_bound = reference(N)
        R = _replica_schedule(cfg, N)
        beta = None
        start = 0
        if cfg.get("control_variates", False) and _scaling_fast_path(cfg):
            # spend a pilot block on fitting the control-variate regression;
            # production replicas use disjoint streams, keeping the mean exact
            start = min(5000, max(R // 20, 256))
            if start + CHUNK <= R:
                beta = _fit_control_variates(cfg, N, seed, start)
            else:
                start = 0
        jobs = [(cfg, N, seed, lo, min(lo + CHUNK, R), beta)
                for lo in range(start, R, CHUNK)]
        parts = _pool_map(_scaling_chunk, jobs, threads)
        s = sum(p[0] for p in parts)
        s2 = sum(p[1] for p in parts)
        n = sum(p[2] for p in parts)
        mean = s / n
        var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1, 1)
        se = math.sqrt(var / n)
        delta = abs(mean - ref)
        inconclusive = bool(se > 0.5 * delta)
        rows.append(dict(experiment="scaling", N=N, replicas=n, estimate=mean,
                         se=se, reference=ref, delta=delta, R_bound=R_bound,
                         inconclusive=inconclusive, seed=seed))
        if not inconclusive and delta > 0:
            deltas.append(delta)
            Ns_used.append(N)
    summary = dict(experiment="scaling", f=f, fourier_weights=weights,
                   chebyshev_degree=K, seed=seed)
    if len(deltas) >= 2:
        slope, intercept, resid = _slope_fit(Ns_used, deltas)
        summary.update(slope=slope, intercept=intercept, fit_residual=resid,
                       fitted_N=Ns_used)
        lo, hi = cfg.get("slope_range", [-2.6, -1.4])
        summary["pass"] = bool(lo <= slope <= hi)
    else:
        summary["slope"] = None
        summary["pass"] = None  # inconclusive
    return rows, summary


# ----------------------------------------------------------------------
# Stieltjes / bounded-Lipschitz transform metrics
# ----------------------------------------------------------------------

def _stieltjes_chunk(args):
    cfg, N, z, seed, lo, hi = args
    P = parse_poly(cfg)
    vals = []
    for r in range(lo, hi):
        rng = rmt.derived_rng(seed, N, r)
        A = evaluate_at_sample(P, cfg, N, rng, seed)
        lam = np.linalg.eigvalsh(A)
        vals.append(rmt.resolvent_trace(None, z, eigvals=lam))
    return vals


def limit_stieltjes(P, a, z, K=60, R_bound=None):
    """G_lim(z) = sum_k m_k z^{-k-1} with a geometric tail bound."""
    moments, _exact = freelimit.moment_sequence(P, a, K)
    G = sum(complex(moments[k]) * z ** (-k - 1) for k in range(K + 1))
    if R_bound is None:
        ln = freelimit.limit_norm(P, a, j_max=5)
        R_bound = max(ln.estimate, ln.lower)
    ratio = R_bound / abs(z)
    tail = (ratio ** (K + 1)) / (abs(z) * (1 - ratio)) if ratio < 1 else float("inf")
    return G, tail


def run_transform_metrics(cfg, seed, threads=1, kind="stieltjes"):
    P = parse_poly(cfg)
    a = freelimit.AlphabetAssignment(cfg["p"])
    ln = freelimit.limit_norm(P, a, j_max=int(cfg.get("norm_j_max", 6)))
    R_bound = float(cfg.get("R_bound", 0.0)) or 1.05 * max(ln.estimate, ln.lower)
    K = int(cfg.get("K", 60))
    rows = []
    gaps = []
    ses = []
    if kind == "stieltjes":
        z = _as_complex(cfg["z"])
        if abs(z) <= R_bound:
            raise ValueError("|z| = %g inside the convergence-uncertain annulus "
                             "(norm bound %g)" % (abs(z), R_bound))
        G_lim, tail = limit_stieltjes(P, a, z, K=K, R_bound=R_bound)
        for N in cfg["N_list"]:
            R = _replica_schedule(cfg, N)
            jobs = [(cfg, N, z, seed, lo, min(lo + CHUNK, R)) for lo in range(0, R, CHUNK)]
            vals = [v for part in _pool_map(_stieltjes_chunk, jobs, threads) for v in part]
            vals = np.asarray(vals)
            mean = complex(vals.mean())
            se = float(np.sqrt((np.abs(vals - mean) ** 2).mean() / (len(vals) - 1)))
            gap = abs(mean - G_lim)
            # conjugate symmetry: recompute the gap at z-bar
            gap_conj = abs(np.conj(mean) - limit_stieltjes(P, a, np.conj(z), K=K,
                                                           R_bound=R_bound)[0])
            rows.append(dict(experiment="stieltjes", N=N, replicas=len(vals),
                             z=repr(z), estimate_re=mean.real, estimate_im=mean.imag,
                             se=se, reference_re=G_lim.real, reference_im=G_lim.imag,
                             gap=gap, gap_conj=gap_conj, tail_bound=tail, seed=seed))
            gaps.append(gap)
            ses.append(se)
        decreasing = all(gaps[i] > gaps[i + 1] - 3 * (ses[i] + ses[i + 1])
                         for i in range(len(gaps) - 1))
        summary = dict(experiment="stieltjes", z=repr(z), tail_bound=tail,
                       gaps=gaps, decreasing=decreasing, seed=seed)
        tol = cfg.get("gap_tol")
        if tol is not None:
            target_N = cfg.get("gap_tol_N", cfg["N_list"][-1])
            gap_at = gaps[cfg["N_list"].index(target_N)]
            summary["pass"] = bool(gap_at <= tol and decreasing)
        else:
            summary["pass"] = bool(decreasing)
        return rows, summary

    # kind == "dlu": distance between mean empirical measure and the limit
    grid, cdf = freelimit.reconstruct_measure(P, a, R_bound, K=K)
    ref_points = freelimit.measure_quantiles(grid, cdf)
    for N in cfg["N_list"]:
        R = _replica_schedule(cfg, N)
        eigs = []
        for r in range(R):
            rng = rmt.derived_rng(seed, N, r)
            A = evaluate_at_sample(P, cfg, N, rng, seed)
            eigs.append(np.linalg.eigvalsh(A))
        pooled = np.concatenate(eigs)
        gap = rmt.bl_distance(pooled, ref_points)
        rows.append(dict(experiment="dlu", N=N, replicas=R, gap=gap, seed=seed))
        gaps.append(gap)
    decreasing = all(gaps[i] > gaps[i + 1] for i in range(len(gaps) - 1))
    summary = dict(experiment="dlu", gaps=gaps, decreasing=decreasing,
                   schedule_reference="eps = (ln N / N)^(1/3)",
                   seed=seed)
    summary["pass"] = bool(decreasing)
    return rows, summary


# ----------------------------------------------------------------------
# the Poincare-type variance identity
# ----------------------------------------------------------------------

def _batched_haar_identity(p, N, batch):
    return rmt.UnitaryTuple(
        [np.broadcast_to(np.eye(N, dtype=complex), (batch, N, N)).copy()
         for _ in range(p)])


def _batched_eval(P, mats_unitary, zmats):
    """Evaluate P at batched unitaries plus fixed deterministic matrices."""
    batch, N = mats_unitary[0].shape[0], mats_unitary[0].shape[-1]
    X = list(mats_unitary) + [np.broadcast_to(z, (batch,) + z.shape) for z in zmats]
    acc = np.zeros((batch, N, N), dtype=complex)
    eye = np.broadcast_to(np.eye(N, dtype=complex), (batch, N, N))
    for mono, c in P.terms.items():
        cur = eye
        for (i, s) in mono:
            m = X[i - 1]
            cur = cur @ (np.swapaxes(m, -1, -2).conj() if s else m)
        acc = acc + complex(c) * cur
    return acc


def _batched_trace(A):
    return np.einsum("bii->b", A) / A.shape[-1]


def run_variance_identity(cfg, seed, threads=1):
    Q = parse_poly(cfg)
    if len(Q.terms) != 1:
        raise ValueError("variance identity driver expects a monomial Q")
    if Q.unitary_degree() == 0:
        raise ValueError("Q must contain at least one unitary letter")
    p = cfg["p"]
    N = cfg["N_list"][0] if "N_list" in cfg else cfg["N"]
    T = float(cfg.get("T", 1.0))
    h = float(cfg.get("h", 0.01))
    R = int(cfg.get("replicas", 10000))
    M = 1
    zmats = z_matrices(cfg, N, M, seed)
    steps_T = max(1, int(round(T / h)))

    # --- LHS: Var(tr Q(U_T, A)) over R trajectories from identity
    rng = rmt.derived_rng(seed, 1)
    U0 = _batched_haar_identity(p, N, R)
    UT = rmt.ubm_trajectory(U0, T, steps_T, rng)
    fvals = _batched_trace(_batched_eval(Q, UT.matrices, zmats)) * N  # tr_N, not normalized
    lhs = float(np.mean(np.abs(fvals) ** 2) - abs(np.mean(fvals)) ** 2)
    # bootstrap CI for the variance estimator
    boot_rng = rmt.derived_rng(seed, 2)
    boots = []
    for _ in range(200):
        idx = boot_rng.integers(0, R, size=R)
        fb = fvals[idx]
        boots.append(float(np.mean(np.abs(fb) ** 2) - abs(np.mean(fb)) ** 2))
    lhs_se = float(np.std(boots, ddof=1))

    # --- RHS: (1/N) sum_k int_0^T E[tr(DkQ(VU) DkQ(WU)*)] dt
    # stratified t-sampling: n_strata strata, cells of a common batch size
    n_strata = int(cfg.get("strata", 16))
    cells_per = int(cfg.get("cells_per_stratum", 8))
    batch = max(1, R // (n_strata * cells_per))
    DkQ = [polyalg.cyclic_derive(Q, k, "scriptD") for k in range(1, p + 1)]
    cell_means = np.zeros((n_strata, cells_per))
    rng_t = rmt.derived_rng(seed, 3)
    for s in range(n_strata):
        for c in range(cells_per):
            t = (s + rng_t.uniform()) * T / n_strata
            rng_c = rmt.derived_rng(seed, 4, s, c)
            steps_t = max(1, int(round(t / h))) if t > 0 else 0
            steps_rest = max(1, int(round((T - t) / h))) if T - t > 0 else 0
            U = rmt.ubm_trajectory(_batched_haar_identity(p, N, batch), t,
                                   steps_t, rng_c) if t > 0 else \
                _batched_haar_identity(p, N, batch)
            V = rmt.ubm_trajectory(_batched_haar_identity(p, N, batch), T - t,
                                   steps_rest, rng_c) if T - t > 0 else \
                _batched_haar_identity(p, N, batch)
            W = rmt.ubm_trajectory(_batched_haar_identity(p, N, batch), T - t,
                                   steps_rest, rng_c) if T - t > 0 else \
                _batched_haar_identity(p, N, batch)
            VU = [v @ u for v, u in zip(V.matrices, U.matrices)]
            WU = [w @ u for w, u in zip(W.matrices, U.matrices)]
            g = np.zeros(batch, dtype=complex)
            for D in DkQ:
                a = _batched_eval(D, VU, zmats)
                b = _batched_eval(D, WU, zmats)
                g += _batched_trace(a @ np.swapaxes(b, -1, -2).conj()) * N
            cell_means[s, c] = float(np.mean(g.real))
    strat_means = cell_means.mean(axis=1)
    rhs = float(T / n_strata * strat_means.sum() / N)
    cell_var = ((cell_means - strat_means[:, None]) ** 2).sum() / (cells_per * (cells_per - 1))
    rhs_se = float(T / n_strata * math.sqrt(cell_var) / N)

    ci_l = (lhs - 1.96 * lhs_se, lhs + 1.96 * lhs_se)
    ci_r = (rhs - 1.96 * rhs_se, rhs + 1.96 * rhs_se)
    overlap = bool(ci_l[0] <= ci_r[1] and ci_r[0] <= ci_l[1])
    rows = [dict(experiment="variance", side="lhs", N=N, T=T, estimate=lhs,
                 se=lhs_se, ci_lo=ci_l[0], ci_hi=ci_l[1], seed=seed),
            dict(experiment="variance", side="rhs", N=N, T=T, estimate=rhs,
                 se=rhs_se, ci_lo=ci_r[0], ci_hi=ci_r[1], seed=seed)]
    summary = dict(experiment="variance", N=N, T=T, replicas=R, lhs=lhs,
                   lhs_se=lhs_se, rhs=rhs, rhs_se=rhs_se, overlap=overlap,
                   seed=seed)
    summary["pass"] = overlap
    return rows, summary


# ----------------------------------------------------------------------
# concentration envelope
# ----------------------------------------------------------------------

def lipschitz_constant(P, z_norm=1.0):
    """Gradient-style bound on the Lipschitz constant of U -> ||P~(U, Z)||:
    each unitary letter occurrence contributes |c| times the product of the
    sup-norms of the other letters."""
    C = 0.0
    for mono, c in P.terms.items():
        n_unit = sum(1 for (i, _s) in mono if i <= P.p)
        if n_unit:
            C += abs(complex(c)) * n_unit * max(1.0, z_norm) ** (len(mono) - 1)
    return C


def run_concentration(cfg, seed, threads=1):
    P = parse_poly(cfg)
    if not P.is_selfadjoint(tol=1e-12):
        raise ValueError("concentration experiment needs self-adjoint P")
    p = cfg["p"]
    N = cfg["N_list"][0] if "N_list" in cfg else cfg["N"]
    R = int(cfg.get("replicas", 4000))
    M = cfg.get("M", 1)
    zmats = z_matrices(cfg, N, M, seed)
    z_norm = max([np.linalg.norm(z, 2) for z in zmats], default=1.0)
    C = lipschitz_constant(P, z_norm)
    norms = np.empty(R)
    for r in range(R):
        rng = rmt.derived_rng(seed, N, r)
        A = evaluate_at_sample(P, cfg, N, rng, seed)
        norms[r] = np.max(np.abs(np.linalg.eigvalsh(A)))
    mean = norms.mean()
    dev = np.abs(norms - mean)
    delta_max = float(cfg.get("delta_max", 1.5 * dev.max()))
    grid = np.linspace(delta_max / 10, delta_max, int(cfg.get("delta_points", 10)))
    rows = []
    all_pass = True
    for delta in grid:
        tail = float(np.mean(dev >= delta))
        envelope = min(1.0, 4.0 * p * math.exp(-((delta / (2.0 * p * C)) ** 2) * N))
        se = math.sqrt(max(tail * (1 - tail), 1.0 / R) / R)
        ok = tail <= envelope + 3 * se
        all_pass = all_pass and ok
        rows.append(dict(experiment="concentration", N=N, delta=float(delta),
                         tail=tail, envelope=envelope, binom_se=se,
                         passed=bool(ok), seed=seed))
    summary = dict(experiment="concentration", N=N, replicas=R,
                   lipschitz_constant=C, z_norm=float(z_norm),
                   mean_norm=float(mean), max_deviation=float(dev.max()),
                   seed=seed)
    summary["pass"] = bool(all_pass)
    return rows, summary


# ----------------------------------------------------------------------
# strong convergence of extreme eigenvalues
# ----------------------------------------------------------------------

def run_strong_convergence(cfg, seed, threads=1):
    P = parse_poly(cfg)
    if not P.is_selfadjoint(tol=1e-12):
        raise ValueError("strong convergence experiment needs self-adjoint P")
    a = freelimit.AlphabetAssignment(cfg["p"])
    ln = freelimit.limit_norm(P, a, j_max=int(cfg.get("norm_j_max", 6)))
    limit = max(ln.estimate, ln.lower)
    R_bound = float(cfg.get("R_bound", 0.0)) or 1.05 * limit
    K = int(cfg.get("K", 60))
    grid, cdf = freelimit.reconstruct_measure(P, a, R_bound, K=K)
    ref_points = freelimit.measure_quantiles(grid, cdf)
    rows = []
    gaps_edge = []
    gaps_bl = []
    for N in cfg["N_list"]:
        R = _replica_schedule(cfg, N)
        lmax = np.empty(R)
        lmin = np.empty(R)
        haus = np.empty(R)
        eigs_all = []
        for r in range(R):
            rng = rmt.derived_rng(seed, N, r)
            A = evaluate_at_sample(P, cfg, N, rng, seed)
            lam = np.linalg.eigvalsh(A)
            lmax[r], lmin[r] = lam[-1], lam[0]
            # Hausdorff distance spectrum <-> reference support grid
            d_spec_to_ref = np.max(np.min(np.abs(lam[:, None] - ref_points[None, ::8]), axis=1))
            d_ref_to_spec = np.max(np.min(np.abs(ref_points[::8][:, None] - lam[None, :]), axis=1))
            haus[r] = max(d_spec_to_ref, d_ref_to_spec)
            eigs_all.append(lam)
        pooled = np.concatenate(eigs_all)
        bl = rmt.bl_distance(pooled, ref_points)
        mean_max, se_max = _mean_se(lmax)
        gap = abs(mean_max - limit)
        rows.append(dict(experiment="strongconv", N=N, replicas=R,
                         lambda_max=mean_max, lambda_max_se=se_max,
                         lambda_min=float(lmin.mean()), limit_norm=limit,
                         limit_lower=ln.lower, edge_gap=gap,
                         hausdorff=float(haus.mean()), bl_gap=bl, seed=seed))
        gaps_edge.append(gap)
        gaps_bl.append(bl)
    # monotone decrease up to one inversion allowed
    inversions_edge = sum(1 for i in range(len(gaps_edge) - 1)
                          if gaps_edge[i] <= gaps_edge[i + 1])
    inversions_bl = sum(1 for i in range(len(gaps_bl) - 1)
                        if gaps_bl[i] <= gaps_bl[i + 1])
    summary = dict(experiment="strongconv", limit=limit, limit_lower=ln.lower,
                   budget_exceeded=ln.budget_exceeded, edge_gaps=gaps_edge,
                   bl_gaps=gaps_bl, edge_inversions=inversions_edge,
                   bl_inversions=inversions_bl, seed=seed)
    tol = cfg.get("edge_tol")
    ok = inversions_edge <= 1 and inversions_bl <= 1
    if tol is not None:
        ok = ok and gaps_edge[-1] <= tol
        summary["edge_tol"] = tol
    summary["pass"] = bool(ok)
    return rows, summary


# ----------------------------------------------------------------------
# identity checks (finite-N / free bridge, trace flow, Duhamel)
# ----------------------------------------------------------------------

def run_identity_checks(cfg, seed, threads=1):
    N = cfg.get("N", 256)
    h = float(cfg.get("h", 0.01))
    R = int(cfg.get("replicas", 64))
    n_max = int(cfg.get("n_max", 4))
    times = list(cfg.get("times", [0.5, 1.0, 2.0]))
    tol = float(cfg.get("tol", 0.02))
    rows = []
    all_pass = True

    # (i) E[tr U_t^n / N] vs the free moment ODE
    rng = rmt.derived_rng(seed, 10)
    T = max(times)
    steps = max(1, int(round(T / h)))
    U0 = _batched_haar_identity(1, N, R)
    snaps = rmt.ubm_trajectory(U0, T, steps, rng, snapshots=sorted(times))
    for t, snap in zip(sorted(times), snaps):
        U = snap.matrices[0]
        Upow = U.copy()
        for n in range(1, n_max + 1):
            tr = np.einsum("bii->b", Upow).real / N
            mean, se = _mean_se(tr)
            ref = freelimit.fubm_moment(n, t)
            err = abs(mean - ref)
            ok = err <= tol + 3 * se + 2 * h * n
            all_pass = all_pass and ok
            rows.append(dict(experiment="identity", check="fubm_bridge", n=n,
                             t=t, N=N, estimate=mean, se=se, reference=ref,
                             error=err, passed=bool(ok), seed=seed))
            if n < n_max:
                Upow = Upow @ U
    # (ii) trace flow: Q = U_1 against N e^{-t/2}; Q = U_1 A U_1* constant
    rng = rmt.derived_rng(seed, 11)
    N2 = cfg.get("N_flow", 64)
    R2 = cfg.get("replicas_flow", 128)
    A = np.diag(np.linspace(-1.0, 1.0, N2)).astype(complex)
    Tf = 1.0
    snaps = rmt.ubm_trajectory(_batched_haar_identity(1, N2, R2), Tf,
                               int(round(Tf / h)), rng,
                               snapshots=[0.25, 0.5, 1.0])
    for t, snap in zip([0.25, 0.5, 1.0], snaps):
        U = snap.matrices[0]
        tr_u = np.einsum("bii->b", U).real / N2
        mean, se = _mean_se(tr_u)
        ref = math.exp(-t / 2)
        ok = abs(mean - ref) <= tol + 3 * se + 2 * h
        all_pass = all_pass and ok
        rows.append(dict(experiment="identity", check="flow_U", t=t, N=N2,
                         estimate=mean, se=se, reference=ref,
                         passed=bool(ok), seed=seed))
        tr_c = np.einsum("bij,jk,bik->b", U, A, U.conj()).real / N2
        mean_c, se_c = _mean_se(tr_c)
        ref_c = float(np.trace(A).real) / N2
        ok = abs(mean_c - ref_c) <= tol + 3 * se_c + 2 * h
        all_pass = all_pass and ok
        rows.append(dict(experiment="identity", check="flow_UAUstar", t=t, N=N2,
                         estimate=mean_c, se=se_c, reference=ref_c,
                         passed=bool(ok), seed=seed))
    # (iii) Duhamel vs series on fresh random evaluations
    rng = rmt.derived_rng(seed, 12)
    worst = 0.0
    for _trial in range(int(cfg.get("duhamel_trials", 10))):
        P = _random_selfadjoint_poly(rng, d=2, p=2, max_deg=2)
        X = [_random_hermitian(rng, 4, scale=0.5) for _ in range(2)]
        if np.linalg.norm(P.evaluate(X), 2) > 5:
            continue
        lhs = polyalg.tensor_pairs_to_matrix(polyalg.delta_exp_evaluate(P, 1, X))
        rhs = polyalg.delta_exp_series(P, 1, X, k_max=30)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    ok = worst <= 1e-8
    all_pass = all_pass and ok
    rows.append(dict(experiment="identity", check="duhamel", N=4,
                     estimate=worst, reference=0.0, passed=bool(ok), seed=seed))
    summary = dict(experiment="identity", N=N, replicas=R, tol=tol,
                   duhamel_worst=worst, seed=seed)
    summary["pass"] = bool(all_pass)
    return rows, summary


def _random_hermitian(rng, n, scale=1.0):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (A + A.conj().T) / (2 * math.sqrt(n))


def _random_selfadjoint_poly(rng, d, p, max_deg, n_terms=3):
    P = polyalg.NCPolynomial.zero(d, p)
    for _ in range(n_terms):
        deg = int(rng.integers(1, max_deg + 1))
        mono = tuple((int(rng.integers(1, d + 1)), bool(rng.integers(0, 2)))
                     for _ in range(deg))
        c = complex(rng.standard_normal(), rng.standard_normal()) / 2
        P = P + polyalg.NCPolynomial(d, p, {mono: c})
    return P + P.adjoint()
