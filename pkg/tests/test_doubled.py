import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from seechain.doubled import (
    ChannelKind,
    ChannelSpec,
    DenseLimitError,
    DoubledState,
    apply_channel,
    apply_x_filter,
    apply_zz_filter,
    canonical_correlator,
    link_patterns,
    observables,
    renyi2_correlator,
    renyi2_susceptibility,
    see,
    tau_from_p,
    vectorize,
    zz_mismatch,
)
from seechain.spin import Boundary, ModelSpec, PureState, build_hamiltonian, ground_state

P_GRID = [round(0.05 * k, 10) for k in range(11)]


def _state(model, L, delta=0.0, boundary="Periodic"):
    return ground_state(build_hamiltonian(ModelSpec(model, L, delta=delta, boundary=boundary)))


def _rho(ds):
    return ds.density_matrix()


class TestChannelSpec:
    def test_tau(self):
        assert tau_from_p(0.0) == 0.0
        assert tau_from_p(0.5) == math.inf
        assert tau_from_p(0.25) == pytest.approx(math.atanh(1 / 3))

    def test_range(self):
        with pytest.raises(ValueError):
            ChannelSpec("ZZ", p_zz=0.6)
        with pytest.raises(ValueError):
            ChannelSpec("ZZ", p_x=0.1)

    def test_from_strength(self):
        ch = ChannelSpec.from_strength("XplusZZ", 0.3)
        assert (ch.p_zz, ch.p_x, ch.kind) == (0.3, 0.3, ChannelKind.XPLUSZZ)


def test_vectorize_single_site():
    ds = vectorize(PureState(1, [1.0, 0.0]))
    assert ds.amplitudes.tolist() == [[1.0, 0.0], [0.0, 0.0]]


def test_vectorize_limit():
    with pytest.raises(DenseLimitError, match="MPS"):
        vectorize(_state("TFIM", 8), dense_limit=6)


def test_pure_purity():
    ds = vectorize(_state("XXZ", 8, 0.45))
    assert ds.purity() == pytest.approx(1.0, abs=1e-12)


def test_pure_renyi2_is_squared_correlator():
    phi = _state("TFIM", 8)
    ds = vectorize(phi)
    rho = np.outer(phi.amplitudes, phi.amplitudes)
    for j in range(1, 5):
        zz = oracles.canonical_c1(rho, 8, 0, j)
        assert renyi2_correlator(ds, 0, j) == pytest.approx(zz**2, abs=1e-12)


@pytest.mark.parametrize("boundary", ["Periodic", "Open"])
@pytest.mark.parametrize("p", [0.1, 0.3, 0.5])
def test_zz_filter_matches_kraus_channel(boundary, p):
    L = 6
    phi = _state("XXZ", L, 0.45, boundary)
    ds = apply_zz_filter(vectorize(phi), p, boundary)
    rho = oracles.zz_channel(np.outer(phi.amplitudes, phi.amplitudes), L, p, boundary == "Periodic")
    assert np.abs(_rho(ds) - rho).max() < 1e-13
    assert see(ds) == pytest.approx(-math.log(oracles.purity(rho)), abs=1e-12)


@pytest.mark.parametrize("p", [0.2, 0.5])
def test_x_filter_matches_kraus_channel(p):
    L = 6
    phi = _state("TFIM", L)
    ds = apply_x_filter(vectorize(phi), p)
    rho = oracles.x_channel(np.outer(phi.amplitudes, phi.amplitudes), L, p)
    assert np.abs(_rho(ds) - rho).max() < 1e-13


def test_x_filter_single_rung_projector():
    ds = apply_x_filter(vectorize(PureState(1, [1.0, 0.0])), 0.5)
    assert np.allclose(ds.physical(), [[0.5, 0.0], [0.0, 0.5]])


def test_zz_per_element_closed_form_vs_sequential_links():
    L, p = 6, 0.3
    phi = _state("TFIM", L)
    ds0 = vectorize(phi)
    closed = apply_zz_filter(ds0, p).physical()
    # sequential per-link filters: a link multiplies mismatched elements by 1 - 2p
    seq = ds0.amplitudes.copy()
    c = np.arange(2**L)
    for j in range(L):
        k = (j + 1) % L
        wall = ((c >> j) ^ (c >> k)) & 1
        seq = seq * np.where(wall[:, None] != wall[None, :], 1 - 2 * p, 1.0)
    assert np.abs(closed - seq).max() < 1e-12


def test_mismatch_counts():
    walls, n = link_patterns(4, Boundary.PERIODIC)
    assert n == 4
    m = zz_mismatch(4, Boundary.PERIODIC)
    assert m[0, 0] == 0 and m[0, 15] == 0  # a state and its flip share every wall
    assert m[0, 1] == 2  # one flipped spin creates two walls
    assert zz_mismatch(4, Boundary.OPEN)[0, 1] == 1


def test_zero_p_is_identity():
    ds = vectorize(_state("TFIM", 6))
    assert apply_zz_filter(ds, 0.0) is ds
    assert apply_x_filter(ds, 0.0) is ds
    assert see(ds) == pytest.approx(0.0, abs=1e-12)


@given(st.integers(0, 2**31 - 1), st.sampled_from([0.1, 0.25, 0.4, 0.5]))
@settings(max_examples=10, deadline=None)
def test_x_and_zz_filters_commute(seed, p):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((2**6, 2**6))
    ds = DoubledState(6, a + a.T)
    one = apply_zz_filter(apply_x_filter(ds, p), p)
    two = apply_x_filter(apply_zz_filter(ds, p), p)
    assert one.purity() == pytest.approx(two.purity(), rel=1e-12)
    assert np.allclose(one.physical(), two.physical(), atol=1e-12)


def test_log_prefactor_keeps_amplitudes_normalized():
    ds = apply_zz_filter(vectorize(_state("XXZ", 8, 0.45)), 0.5)
    assert np.linalg.norm(ds.amplitudes) == pytest.approx(1.0)
    assert ds.log_prefactor < 0


def test_see_zero_norm():
    with pytest.raises(ZeroDivisionError):
        see(DoubledState(2, np.zeros((4, 4))))


@pytest.mark.parametrize("model,delta", [("TFIM", 0.0), ("XXZ", 0.45)])
def test_see_monotone_in_p(model, delta):
    ds0 = vectorize(_state(model, 8, delta))
    values = [see(apply_zz_filter(ds0, p)) for p in P_GRID]
    assert all(b >= a - 1e-10 for a, b in zip(values, values[1:]))
    for v in values:
        assert 0.0 - 1e-12 <= v <= 8 * math.log(2) + 1e-12


def test_renyi2_matches_oracle_and_saturates():
    L = 6
    phi = _state("TFIM", L)
    rho0 = np.outer(phi.amplitudes, phi.amplitudes)
    for p in (0.2, 0.5):
        ds = apply_zz_filter(vectorize(phi), p)
        rho = oracles.zz_channel(rho0, L, p)
        for j in range(L):
            assert renyi2_correlator(ds, 0, j) == pytest.approx(oracles.renyi2_c2(rho, L, 0, j), abs=1e-12)
    ds = apply_zz_filter(vectorize(phi), 0.5)
    assert all(abs(renyi2_correlator(ds, i, j) - 1) < 1e-10 for i in range(L) for j in range(L))
    assert renyi2_susceptibility(ds) == pytest.approx(1.0, abs=1e-10)


def test_susceptibility_grows_l12():
    ds0 = vectorize(_state("TFIM", 12))
    assert renyi2_susceptibility(ds0) < renyi2_susceptibility(apply_zz_filter(ds0, 0.4))


def test_susceptibility_reference_site_independent():
    ds = apply_zz_filter(vectorize(_state("XXZ", 8, 0.45)), 0.3)
    vals = [renyi2_susceptibility(ds, ref) for ref in range(8)]
    assert max(vals) - min(vals) < 1e-10


def test_canonical_correlator_invariance():
    L = 8
    phi = _state("XXZ", L, 0.45)
    ds0 = vectorize(phi)
    ref = [canonical_correlator(ds0, 0, j) for j in range(L)]
    rho0 = np.outer(phi.amplitudes, phi.amplitudes)
    assert ref[3] == pytest.approx(oracles.canonical_c1(rho0, L, 0, 3), abs=1e-12)
    for p in P_GRID:
        ds = apply_zz_filter(ds0, p)
        assert max(abs(canonical_correlator(ds, 0, j) - r) for j, r in enumerate(ref)) < 1e-10


def test_canonical_correlator_changes_under_x_filter():
    phi = _state("TFIM", 6)
    ds0 = vectorize(phi)
    ds = apply_x_filter(ds0, 0.2)
    rho = oracles.x_channel(np.outer(phi.amplitudes, phi.amplitudes), 6, 0.2)
    assert canonical_correlator(ds, 0, 3) == pytest.approx(oracles.canonical_c1(rho, 6, 0, 3), abs=1e-12)
    assert abs(canonical_correlator(ds, 0, 3) - canonical_correlator(ds0, 0, 3)) > 1e-3


def test_purity_bounds_through_sweep():
    L = 8
    ds0 = vectorize(_state("TFIM", L))
    for kind in ("ZZ", "X", "XplusZZ"):
        for p in P_GRID:
            q = apply_channel(ds0, ChannelSpec.from_strength(kind, p)).purity()
            assert 2.0**-L - 1e-12 <= q <= 1 + 1e-12


def test_observable_report():
    ds0 = vectorize(_state("TFIM", 8))
    ch = ChannelSpec.from_strength("ZZ", 0.5)
    rep = observables(apply_channel(ds0, ch), ch)
    assert [r for r, _ in rep.c2_profile] == [1, 2, 3, 4]
    assert rep.chi2 == pytest.approx(1.0, abs=1e-10)
    assert rep.c2_half == pytest.approx(1.0, abs=1e-10)
    assert rep.c1_half == pytest.approx(canonical_correlator(ds0, 0, 4))
