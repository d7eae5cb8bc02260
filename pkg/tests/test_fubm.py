"""Unit tests for the unitary-Brownian-motion spectral density solver."""

import math

import numpy as np
import pytest

from freehaar import freelimit, fubm


def test_t_leq_4_rejected():
    with pytest.raises(ValueError):
        fubm.kappa(4.0, 0.0)
    with pytest.raises(ValueError):
        fubm.SpectralDensity(3.5)


def test_kappa_theta0_bracket():
    for t in (5.0, 8.0, 12.0):
        z = fubm.kappa_theta0(t)
        assert 1.0 < z <= 3.0
        resid = abs((z - 1) / (z + 1) * math.exp(t * z / 2) - 1.0)
        assert resid <= 1e-10 * math.exp(t * z / 2)


def test_density_residual_normalization_symmetry():
    for t in (5.0, 8.0, 12.0):
        dens = fubm.SpectralDensity(t, 2048)
        assert dens.residuals.max() <= 1e-12
        assert abs(dens.normalization() - 1.0) <= 1e-8
        assert dens.symmetry_defect() <= 1e-10
        assert dens.kappa.min() >= 0.0


def test_kappa_point_symmetry():
    t = 6.0
    for theta in (0.5, 1.3, 2.9):
        assert abs(fubm.kappa(t, theta) - fubm.kappa(t, -theta)) <= 1e-10


def test_moments_match_ode():
    for t in (5.0, 8.0, 12.0):
        quad = fubm.nu_moments(t, 8, 2048)
        ode = freelimit.fubm_moments(8, t)
        for n in range(9):
            assert abs(quad[n] - ode[n]) <= 1e-6
    assert fubm.nu_moments(5.0, 0)[0] == pytest.approx(1.0, abs=1e-10)
    assert fubm.nu_moments(5.0, 1)[1] == pytest.approx(math.exp(-2.5), abs=1e-6)
    assert fubm.nu_moments(5.0, 2)[2] == pytest.approx(-4 * math.exp(-5.0), abs=1e-6)


def test_coupling_bound():
    for t in (5.0, 8.0, 12.0):
        dens = fubm.SpectralDensity(t, 1024)
        driver = 2 * math.pi * dens.sup_deviation_from_haar()
        assert driver <= 4 * math.e ** 2 * math.pi * math.exp(-t / 2)


def test_long_time_uniformization():
    dens = fubm.SpectralDensity(20.0, 1024)
    assert dens.sup_deviation_from_haar() <= 2 * math.e ** 2 * math.exp(-10.0)


def test_cdf_and_sampling():
    dens = fubm.SpectralDensity(6.0, 1024)
    assert dens.cdf[0] == 0.0
    assert dens.cdf[-1] == pytest.approx(1.0, abs=1e-8)
    assert np.all(np.diff(dens.cdf) >= 0)
    angles = dens.sample(100)
    assert np.all((angles >= 0) & (angles <= 2 * np.pi))


def test_export_csv(tmp_path):
    dens = fubm.SpectralDensity(5.0, 64)
    path = tmp_path / "dens.csv"
    dens.export_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,theta,kappa"
    assert len(lines) == 65
