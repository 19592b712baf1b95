import math

import numpy as np
import pytest

import oracles
from seechain.scaling import (
    Backend,
    FitError,
    FitResult,
    SeeSample,
    chord_distance,
    extrapolate_s0,
    fit_linear_s0,
    fit_power_law,
    fit_windows,
    intercept_stderr,
    sliding_windows,
)
from seechain.spin import ModelSpec, build_hamiltonian, expectation_pauli_string, ground_state


def _line(alpha, s0, Ls, p=0.5):
    return [SeeSample(L, p, alpha * L - s0) for L in Ls]


def test_exact_line():
    fit = fit_linear_s0(_line(0.3, 0.2, [6, 8, 10, 12]))
    assert fit.alpha == pytest.approx(0.3, abs=1e-12)
    assert fit.s0 == pytest.approx(0.2, abs=1e-12)
    assert fit.residual_rms < 1e-12
    assert fit.g == pytest.approx(math.exp(0.2))
    assert fit.L_sd == 6


def test_noisy_line_stderr():
    rng = np.random.default_rng(0)
    Ls = list(range(6, 40, 2))
    samples = [SeeSample(L, 0.5, 0.3 * L - 0.2 + 1e-3 * rng.standard_normal()) for L in Ls]
    fit = fit_linear_s0(samples)
    assert abs(fit.s0 - 0.2) < 4 * fit.s0_stderr
    assert fit.s0_stderr > 0
    assert intercept_stderr([6, 8], 0.1) == 0.0


def test_validation():
    with pytest.raises(FitError, match="3 distinct"):
        fit_linear_s0(_line(0.3, 0.2, [6, 8]))
    with pytest.raises(FitError, match="mix different p"):
        fit_linear_s0(_line(0.3, 0.2, [6, 8]) + _line(0.3, 0.2, [10], p=0.4))
    with pytest.raises(FitError, match="backends"):
        fit_linear_s0(_line(0.3, 0.2, [6, 8]) + [SeeSample(10, 0.5, 2.8, Backend.MPS)])
    with pytest.raises(ValueError):
        SeeSample(6, 0.5, -0.1)
    with pytest.raises(ValueError):
        SeeSample(6, 0.5, float("nan"))


def test_duplicates():
    same = _line(0.3, 0.2, [6, 8, 10]) + [SeeSample(8, 0.5, 0.3 * 8 - 0.2 + 1e-12)]
    assert fit_linear_s0(same).L_window == [6, 8, 10]
    with pytest.raises(FitError, match="conflicting"):
        fit_linear_s0(_line(0.3, 0.2, [6, 8, 10]) + [SeeSample(8, 0.5, 5.0)])


def test_sliding_windows():
    assert sliding_windows([4, 6, 8, 10, 12], 4) == [[4, 6, 8, 10], [6, 8, 10, 12]]
    assert sliding_windows([4, 6, 10, 12, 14], 3) == [[10, 12, 14]]
    assert sliding_windows([6, 8], 3) == []


def test_fit_windows():
    samples = [SeeSample(L, 0.5, 0.3 * L - 0.2 + 0.1 / L) for L in range(6, 16, 2)]
    fits = fit_windows(samples, 3)
    assert [f.L_sd for f in fits] == [6, 8, 10]
    # the 1/L correction pulls each window's s0 toward the true value as L grows
    errs = [abs(f.s0 - 0.2) for f in fits]
    assert errs == sorted(errs, reverse=True)


def test_extrapolation_fixture():
    pts = [(L, -0.44 / L + 0.01) for L in (8, 10, 12, 14)]
    slope, intercept = extrapolate_s0(pts)
    assert slope == pytest.approx(-0.44, abs=1e-10)
    assert intercept == pytest.approx(0.01, abs=1e-10)
    fits = [FitResult(0.0, s, 0.0, [L, L + 2, L + 4]) for L, s in pts]
    assert extrapolate_s0(fits) == pytest.approx((slope, intercept))
    with pytest.raises(FitError):
        extrapolate_s0(pts[:2])


def test_power_law_synthetic():
    profile = [(r, r**-0.5) for r in range(1, 10)]
    assert fit_power_law(profile) == pytest.approx(0.5, abs=1e-12)
    L = 20
    chord = [(r, chord_distance(r, L) ** -0.5) for r in range(1, 11)]
    assert fit_power_law(chord, L, "Periodic") == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        fit_power_law(chord, boundary="Periodic")
    with pytest.raises(FitError):
        fit_power_law([(1, 1.0), (2, -0.1), (3, 0.0), (4, 0.2)])


def test_tfim_exponent_against_free_fermion_oracle():
    eta_ref = oracles.tfim_eta_infinite()
    assert eta_ref == pytest.approx(0.25, abs=1e-3)
    L = 12
    phi = ground_state(build_hamiltonian(ModelSpec("TFIM", L)))
    profile = [(r, expectation_pauli_string(phi, [(0, "Z"), (r, "Z")])) for r in range(1, L // 2 + 1)]
    assert abs(fit_power_law(profile, L, "Periodic") - eta_ref) < 0.3 * eta_ref
