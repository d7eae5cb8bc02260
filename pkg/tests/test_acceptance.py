"""Acceptance suite: quantitative checks of the library's headline claims.

Each test prints one PASS/FAIL line with its tolerance so the suite output
doubles as a run report.  Monte Carlo tests use fixed seeds throughout.
"""

import math
import time

import numpy as np
import pytest

from freehaar import cli, experiments, freelimit, fubm, polyalg, rmt
from freehaar.exprparse import parse


def verdict(tag, ok, detail):
    print("\nACCEPTANCE %s: %s (%s)" % (tag, "PASS" if ok else "FAIL", detail))
    assert ok, "%s: %s" % (tag, detail)


def _random_poly_exact(rng, d, p, max_deg, n_terms=3):
    from fractions import Fraction
    P = polyalg.NCPolynomial.zero(d, p)
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_deg + 1))
        mono = tuple((int(rng.integers(1, d + 1)), bool(rng.integers(0, 2)))
                     for _ in range(deg))
        c = polyalg.GaussianRational(Fraction(int(rng.integers(-3, 4)), 2),
                                     Fraction(int(rng.integers(-3, 4)), 2))
        P = P + polyalg.NCPolynomial(d, p, {mono: c})
    return P


def test_01_derivative_calculus():
    """Leibniz identities exact on 10^3 random pairs; < 10 s."""
    t0 = time.time()
    rng = np.random.default_rng(101)
    d = p = 2
    for _ in range(1000):
        A = _random_poly_exact(rng, d, p, max_deg=3)
        B = _random_poly_exact(rng, d, p, max_deg=3)
        i = int(rng.integers(1, p + 1))
        for starred in (False, True):
            lhs = polyalg.partial_derive(A * B, i, starred)
            rhs = polyalg.partial_derive(A, i, starred).right_mul(B) + \
                polyalg.partial_derive(B, i, starred).left_mul(A)
            assert lhs == rhs
        lhs = polyalg.delta_derive(A * B, i)
        rhs = polyalg.delta_derive(A, i).right_mul(B) + \
            polyalg.delta_derive(B, i).left_mul(A)
        assert lhs == rhs
    dt = time.time() - t0
    verdict("1 derivative-calculus", dt < 10,
            "1000 exact Leibniz pairs for partial/partial*/delta in %.1fs" % dt)


def test_02_duhamel_vs_series():
    """Quadrature vs series agreement <= 1e-8 on 100 4x4 evaluations; < 30 s."""
    t0 = time.time()
    rng = np.random.default_rng(102)
    worst = 0.0
    done = 0
    while done < 100:
        P = experiments._random_selfadjoint_poly(rng, d=2, p=2, max_deg=2)
        X = [experiments._random_hermitian(rng, 4, scale=0.5) for _ in range(2)]
        if np.linalg.norm(P.evaluate(X), 2) > 5:
            continue
        base = polyalg.delta_exp_evaluate(P, 1, X)
        lhs = polyalg.tensor_pairs_to_matrix(base) if base else np.zeros((16, 16))
        rhs = polyalg.delta_exp_series(P, 1, X, k_max=30)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        done += 1
    dt = time.time() - t0
    verdict("2 duhamel-vs-series", worst <= 1e-8 and dt < 30,
            "max deviation %.2e <= 1e-8 over 100 evaluations in %.1fs" % (worst, dt))


def test_03_sharp_inequality():
    """10^4 randomized trials of ||x#y|| <= M ||x|| ||y||; < 60 s."""
    t0 = time.time()
    rng = np.random.default_rng(103)
    violations = 0
    for _ in range(10000):
        n = int(rng.integers(1, 9))
        M = int(rng.integers(1, 5))
        k = n * M
        x = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        y = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        z = rmt.sharp_product(x, y, n, M)
        if np.linalg.norm(z, 2) > M * np.linalg.norm(x, 2) * np.linalg.norm(y, 2) * (1 + 1e-12):
            violations += 1
    dt = time.time() - t0
    verdict("3 sharp-inequality", violations == 0 and dt < 60,
            "%d violations in 10000 trials (n<=8, M<=4) in %.1fs" % (violations, dt))


def test_04_haar_and_ubm_simulators():
    """Haar moments within 3 SE; UBM trace within 0.01 of e^{-t/2};
    unitarity drift <= 1e-10; < 5 min."""
    t0 = time.time()
    # Haar: E[tr U^n / N] = 0 within 3 SE, N = 64, 2000 samples
    N, R = 64, 2000
    traces = np.zeros((R, 4), dtype=complex)
    for r in range(R):
        U = rmt.sample_haar_unitary(N, rmt.derived_rng(104, r))
        Up = U
        for n in range(4):
            traces[r, n] = np.trace(Up) / N
            if n < 3:
                Up = Up @ U
    haar_ok = True
    for n in range(4):
        for part in (traces[:, n].real, traces[:, n].imag):
            se = part.std(ddof=1) / math.sqrt(R)
            haar_ok = haar_ok and abs(part.mean()) <= 3 * se + 1e-12
    # UBM: N = 32, t = 1, h = 1e-3, 500 paths
    N2, R2, steps = 32, 500, 1000
    U0 = rmt.UnitaryTuple(
        [np.broadcast_to(np.eye(N2, dtype=complex), (R2, N2, N2)).copy()])
    out = rmt.ubm_trajectory(U0, 1.0, steps, rmt.make_rng(105))
    mean_tr = float(np.einsum("bii->b", out.matrices[0]).real.mean()) / N2
    ubm_err = abs(mean_tr - math.exp(-0.5))
    # unitarity drift over 10^4 steps
    U1 = rmt.ubm_trajectory(rmt.UnitaryTuple.identity(1, 8), 1.0, 10000,
                            rmt.make_rng(106))
    drift = U1.unitarity_defect()
    dt = time.time() - t0
    verdict("4 haar-ubm-simulators",
            haar_ok and ubm_err <= 0.01 and drift <= 1e-10 and dt < 300,
            "haar moments ok=%s, |E tr U_1/N - e^-1/2| = %.4f <= 0.01, "
            "unitarity drift %.1e <= 1e-10, %.0fs" % (haar_ok, ubm_err, drift, dt))


def test_05_free_moment_oracle_vs_finite_n():
    """20 random degree-<=4 polynomials vs N = 300 Monte Carlo; < 10 min."""
    t0 = time.time()
    N, R = 300, 200
    samples = [(rmt.sample_haar_unitary(N, rmt.derived_rng(107, r, 0)),
                rmt.sample_haar_unitary(N, rmt.derived_rng(107, r, 1)))
               for r in range(R)]
    rng = np.random.default_rng(108)
    a = freelimit.AlphabetAssignment(2)
    worst_sigma = 0.0
    for _ in range(20):
        P = polyalg.NCPolynomial.zero(2, 2)
        for _k in range(3):
            deg = int(rng.integers(1, 5))
            mono = tuple((int(rng.integers(1, 3)), bool(rng.integers(0, 2)))
                         for _ in range(deg))
            P = P + polyalg.NCPolynomial(2, 2, {mono: complex(rng.standard_normal())})
        ref = freelimit.tau_poly(P, a)
        vals = np.array([np.trace(P.evaluate(list(s))) / N for s in samples])
        for got, want, sd in ((vals.real, ref.real, vals.real.std(ddof=1)),
                              (vals.imag, ref.imag, vals.imag.std(ddof=1))):
            se = sd / math.sqrt(R) + 1e-12
            # 1e-4 absolute slack for the O(1/N^2) finite-size bias
            sigma = abs(got.mean() - want) / (se + 1e-4 / 3)
            worst_sigma = max(worst_sigma, sigma)
    dt = time.time() - t0
    verdict("5 free-moment-oracle", worst_sigma <= 3 and dt < 600,
            "worst |MC - tau| = %.2f SE (<= 3) over 20 polynomials, %.0fs"
            % (worst_sigma, dt))


def test_06_fubm_ode_vs_simulation():
    """Moment ODE vs N = 256 simulation (tol 0.02) and closed forms (1e-9)."""
    t0 = time.time()
    closed_ok = True
    for t in (0.5, 1.0, 2.0):
        m = freelimit.fubm_moments(2, t)
        closed_ok = closed_ok and abs(m[1] - math.exp(-t / 2)) <= 1e-9
        closed_ok = closed_ok and abs(m[2] - math.exp(-t) * (1 - t)) <= 1e-9
    N, R, h = 256, 24, 0.01
    times = [0.5, 1.0, 2.0]
    U0 = rmt.UnitaryTuple(
        [np.broadcast_to(np.eye(N, dtype=complex), (R, N, N)).copy()])
    snaps = rmt.ubm_trajectory(U0, max(times), int(round(max(times) / h)),
                               rmt.make_rng(109), snapshots=times)
    worst = 0.0
    for t, snap in zip(times, snaps):
        U = snap.matrices[0]
        Up = U
        for n in range(1, 5):
            est = float(np.einsum("bii->b", Up).real.mean()) / N
            worst = max(worst, abs(est - freelimit.fubm_moment(n, t)))
            if n < 4:
                Up = Up @ U
    dt = time.time() - t0
    verdict("6 fubm-ode-vs-simulation", closed_ok and worst <= 0.02 and dt < 600,
            "closed forms ok=%s, max |ODE - MC| = %.4f <= 0.02 (N=256), %.0fs"
            % (closed_ok, worst, dt))


def test_07_nu_t_solver():
    """Residuals <= 1e-12, normalization 1e-8, moment agreement 1e-6,
    coupling envelope; < 1 min."""
    t0 = time.time()
    ok = True
    worst_mom = 0.0
    for t in (5.0, 8.0, 12.0):
        dens = fubm.SpectralDensity(t, 2048)
        ok = ok and dens.residuals.max() <= 1e-12
        ok = ok and abs(dens.normalization() - 1.0) <= 1e-8
        ode = freelimit.fubm_moments(8, t)
        for n in range(9):
            worst_mom = max(worst_mom, abs(dens.moment(n).real - ode[n]))
        driver = 2 * math.pi * dens.sup_deviation_from_haar()
        ok = ok and driver <= 4 * math.e ** 2 * math.pi * math.exp(-t / 2)
    dt = time.time() - t0
    verdict("7 nu-t-solver", ok and worst_mom <= 1e-6 and dt < 60,
            "residual/normalization/envelope ok=%s, max moment gap %.1e <= 1e-6, "
            "%.0fs" % (ok, worst_mom, dt))


def test_08_variance_identity():
    """Poincare identity at N = 4, Q = U1, T = 1, R = 10^4: CIs overlap; < 15 min."""
    t0 = time.time()
    _rows, summary = experiments.run_variance_identity(
        dict(cli.DEFAULTS["variance"]), seed=0)
    dt = time.time() - t0
    verdict("8 variance-identity", summary["pass"] and dt < 900,
            "lhs %.4f +- %.4f vs rhs %.4f +- %.4f (95%% CIs overlap), %.0fs"
            % (summary["lhs"], 1.96 * summary["lhs_se"],
               summary["rhs"], 1.96 * summary["rhs_se"], dt))


def test_09_master_scaling():
    """Log-log slope of the smooth-statistic gap in [-2.6, -1.4]; <= 60 min."""
    t0 = time.time()
    _rows, summary = experiments.run_master_scaling(
        dict(cli.DEFAULTS["scaling"]), seed=0)
    dt = time.time() - t0
    slope = summary.get("slope")
    ok = summary.get("pass") is True and dt < 3600
    verdict("9 master-scaling", ok,
            "fitted slope %s in [-2.6, -1.4] over N=%s, %.0fs"
            % ("%.2f" % slope if slope is not None else "n/a",
               summary.get("fitted_N"), dt))


def test_10_stieltjes_gap():
    """Gap at N = 64 <= 0.01 and decreasing over N in {32, 64, 128}; < 10 min."""
    t0 = time.time()
    _rows, summary = experiments.run_transform_metrics(
        dict(cli.DEFAULTS["stieltjes"]), seed=0, kind="stieltjes")
    dt = time.time() - t0
    gaps = summary["gaps"]
    verdict("10 stieltjes-gap", summary["pass"] and dt < 600,
            "gap(N=64) = %.1e <= 0.01, gaps %s decreasing up to SE, %.0fs"
            % (gaps[1], ["%.1e" % g for g in gaps], dt))


def test_11_strong_convergence():
    """lambda_max within 0.05 of 2 at N = 512; d_LU gaps decreasing; < 15 min."""
    t0 = time.time()
    _rows, summary = experiments.run_strong_convergence(
        dict(cli.DEFAULTS["strongconv"]), seed=0)
    _rows2, summary2 = experiments.run_transform_metrics(
        dict(cli.DEFAULTS["dlu"]), seed=0, kind="dlu")
    dt = time.time() - t0
    edge = summary["edge_gaps"][-1]
    verdict("11 strong-convergence",
            summary["pass"] and edge <= 0.05 and summary2["pass"] and dt < 900,
            "|lambda_max - 2| = %.4f <= 0.05 at N=512, d_LU gaps %s decreasing, "
            "%.0fs" % (edge, ["%.1e" % g for g in summary2["gaps"]], dt))


def test_12_concentration_envelope():
    """Empirical tails <= envelope + 3 binomial SE on a 10-point grid; < 10 min."""
    t0 = time.time()
    rows, summary = experiments.run_concentration(
        dict(cli.DEFAULTS["concentration"]), seed=0)
    dt = time.time() - t0
    verdict("12 concentration-envelope", summary["pass"] and dt < 600,
            "all %d grid points below envelope + 3 SE (N=64, R=4000), %.0fs"
            % (len(rows), dt))
