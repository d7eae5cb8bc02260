"""Spectral measure of the free unitary Brownian motion on the circle.

For t > 4 the measure nu_t has full support and an analytic density
kappa(t, theta) with respect to normalized Haar measure, characterized as
the real part of the unique solution z with Re z > 0 of

    (z - 1)/(z + 1) * exp(t z / 2) = exp(i theta).

The solver starts from the real solution at theta = 0 (bisection on
(1, 3]) and continues around the circle with damped Newton steps.
"""

import csv
import cmath
import math

import numpy as np

__all__ = ["SolverError", "kappa_theta0", "kappa", "SpectralDensity", "nu_moments"]

_RESIDUAL_TOL = 1e-12
_MAX_HALVINGS = 60


class SolverError(RuntimeError):
    def __init__(self, message, t, theta):
        super().__init__("%s (t=%g, theta=%g)" % (message, t, theta))
        self.t = t
        self.theta = theta


def _check_t(t):
    if t <= 4:
        raise ValueError("density solver requires t > 4 (full-support regime)")


def _F(z, t, omega):
    return (z - 1.0) / (z + 1.0) * cmath.exp(0.5 * t * z) - omega


def _Fprime(z, t):
    return cmath.exp(0.5 * t * z) * (2.0 / (z + 1.0) ** 2
                                     + 0.5 * t * (z - 1.0) / (z + 1.0))


def kappa_theta0(t):
    """Real solution z in (1, 3] of (z-1)/(z+1) e^{tz/2} = 1 by bisection."""
    _check_t(t)
    lo, hi = 1.0, 3.0
    flo = _F(lo, t, 1.0).real
    fhi = _F(hi, t, 1.0).real
    if not (flo < 0 < fhi):
        raise SolverError("bisection bracket failed", t, 0.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _F(mid, t, 1.0).real > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _newton(z, t, omega, theta):
    """Damped Newton iteration on F(., t, omega) from the seed z."""
    f = _F(z, t, omega)
    for _ in range(200):
        if abs(f) <= _RESIDUAL_TOL:
            if z.real <= 0:
                raise SolverError("left the positive-real-part branch", t, theta)
            return z
        step = f / _Fprime(z, t)
        if abs(step) <= 1e-15 * abs(z):
            # step below machine resolution of z: the residual has hit its
            # floor ~ |F'| eps |z| (relevant for large t where F' is big)
            if z.real <= 0:
                raise SolverError("left the positive-real-part branch", t, theta)
            return z
        scale = 1.0
        for _h in range(_MAX_HALVINGS + 1):
            z_new = z - scale * step
            f_new = _F(z_new, t, omega)
            if abs(f_new) < abs(f):
                break
            scale *= 0.5
        else:
            raise SolverError("Newton damping exhausted", t, theta)
        z, f = z_new, f_new
    raise SolverError("Newton failed to converge", t, theta)


def kappa(t, theta, steps=256):
    """Density kappa(t, theta) via continuation from theta = 0."""
    _check_t(t)
    theta = math.remainder(theta, 2.0 * math.pi)
    z = complex(kappa_theta0(t))
    target = theta
    for k in range(1, steps + 1):
        th = target * k / steps
        z = _newton(z, t, cmath.exp(1j * th), th)
    return z.real


class SpectralDensity:
    """Discretized nu_t: angle grid, kappa values, residuals and CDF."""

    def __init__(self, t, grid_n=2048):
        _check_t(t)
        self.t = float(t)
        self.grid = np.linspace(0.0, 2.0 * np.pi, grid_n, endpoint=False)
        z = complex(kappa_theta0(t))
        kappas = np.empty(grid_n)
        residuals = np.empty(grid_n)
        for j, th in enumerate(self.grid):
            z = _newton(z, t, cmath.exp(1j * th), th)
            kappas[j] = z.real
            residuals[j] = abs(_F(z, t, cmath.exp(1j * th)))
        self.kappa = kappas
        self.residuals = residuals
        # CDF of the measure kappa(theta) dtheta/(2 pi) on the periodic grid
        h = 2.0 * np.pi / grid_n
        self.cdf = np.concatenate([[0.0], np.cumsum(kappas) * h / (2.0 * np.pi)])

    def normalization(self):
        """Trapezoid value of the total mass (should be 1)."""
        return float(np.mean(self.kappa))

    def moment(self, n):
        """int e^{i n theta} kappa dtheta/(2 pi); real by symmetry."""
        return complex(np.mean(np.exp(1j * n * self.grid) * self.kappa))

    def symmetry_defect(self):
        """max |kappa(theta) - kappa(-theta)| on the grid."""
        return float(np.max(np.abs(self.kappa[1:] - self.kappa[1:][::-1])))

    def sup_deviation_from_haar(self):
        return float(np.max(np.abs(1.0 - self.kappa)))

    def sample(self, n_points):
        """Inverse-CDF angles (for plot data)."""
        qs = (np.arange(n_points) + 0.5) / n_points * self.cdf[-1]
        grid_ext = np.concatenate([self.grid, [2.0 * np.pi]])
        return np.interp(qs, self.cdf, grid_ext)

    def export_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "theta", "kappa"])
            for th, ka in zip(self.grid, self.kappa):
                wr.writerow([repr(self.t), repr(float(th)), repr(float(ka))])


def nu_moments(t, n_max, grid_n=2048):
    """Real moments int omega^n d nu_t(omega) for n = 0..n_max."""
    dens = SpectralDensity(t, grid_n)
    return [dens.moment(n).real for n in range(n_max + 1)]
