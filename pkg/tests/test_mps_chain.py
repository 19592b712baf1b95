import numpy as np
import pytest

import oracles
from seechain.mps.chain import (
    MPS,
    ConvergenceError,
    build_mpo,
    ground_state_mps,
    left_canonicalize,
    mpo_to_dense,
    overlap,
    random_mps,
    right_canonicalize,
    schmidt_form,
)
from seechain.spin import ModelSpec, build_hamiltonian, expectation_pauli_string, ground_state


@pytest.mark.parametrize("model,delta", [("TFIM", 0.0), ("XXZ", 0.45), ("XXZ", -0.3)])
def test_mpo_matches_dense(model, delta):
    L = 6
    dense = mpo_to_dense(build_mpo(ModelSpec(model, L, delta=delta, boundary="Open")))
    assert np.abs(dense - oracles.hamiltonian(model, L, delta, periodic=False)).max() < 1e-13


def test_mpo_rejects_periodic():
    with pytest.raises(ValueError, match="Open"):
        build_mpo(ModelSpec("TFIM", 6))


def test_dense_contraction_bit_order():
    # product state with only site 0 down: configuration index 1
    t = [np.array([0.0, 1.0]).reshape(1, 2, 1)] + [np.array([1.0, 0.0]).reshape(1, 2, 1)] * 3
    psi = MPS(t).to_dense()
    assert psi[1] == 1.0 and np.count_nonzero(psi) == 1


def test_canonical_forms():
    mps = random_mps(8, 6, seed=3)
    psi = mps.to_dense()
    assert mps.norm() == pytest.approx(1.0)
    for form in (right_canonicalize(mps), left_canonicalize(mps)):
        assert abs(abs(form.to_dense() @ psi) - 1) < 1e-12
    r = right_canonicalize(mps)
    for t in r.tensors[1:]:
        m = t.reshape(t.shape[0], -1)
        assert np.allclose(m @ m.T, np.eye(m.shape[0]), atol=1e-12)


def test_schmidt_values_match_dense_bipartition():
    mps = random_mps(8, 8, seed=1)
    psi = mps.to_dense()
    form = schmidt_form(mps)
    for k in (1, 4, 7):
        # sites 0..k-1 are the low bits of the configuration index
        s = np.linalg.svd(psi.reshape(2 ** (8 - k), 2**k), compute_uv=False)
        s = s[s > 1e-12]
        assert np.allclose(form.schmidt[k], s, atol=1e-12)
    assert overlap(form.tensors, form.tensors) == pytest.approx(1.0)


@pytest.mark.parametrize("model,delta", [("TFIM", 0.0), ("XXZ", 0.45)])
def test_dmrg_matches_exact_diagonalization(model, delta):
    L = 10
    spec = ModelSpec(model, L, delta=delta, boundary="Open")
    res = ground_state_mps(spec, chi_max=64, tol=1e-12)
    e_ed = ground_state(build_hamiltonian(spec)).energy
    assert abs(res.energy - e_ed) < 1e-8
    assert res.energies == sorted(res.energies, reverse=True) or len(res.energies) <= 2


def test_dmrg_zz_profile_xxz():
    L = 10
    spec = ModelSpec("XXZ", L, delta=0.45, boundary="Open")
    res = ground_state_mps(spec, chi_max=64, tol=1e-12)
    psi = res.mps.to_dense()
    phi = ground_state(build_hamiltonian(spec))
    ref = [expectation_pauli_string(phi, [(0, "Z"), (r, "Z")]) for r in range(1, L)]
    zz = oracles.site_op
    got = [psi @ zz(L, {0: oracles.Z, r: oracles.Z}) @ psi for r in range(1, L)]
    assert max(abs(a - b) for a, b in zip(got, ref)) < 1e-6


def test_bond_dimension_reaches_exact_limit():
    L = 8
    res = ground_state_mps(ModelSpec("TFIM", L, boundary="Open"), chi_max=64, svd_cutoff=0.0)
    assert max(res.mps.bonds) == 2 ** (L // 2)


def test_dmrg_deterministic():
    spec = ModelSpec("TFIM", 8, boundary="Open")
    a = ground_state_mps(spec, seed=4).mps.to_dense()
    b = ground_state_mps(spec, seed=4).mps.to_dense()
    assert a.tobytes() == b.tobytes()


def test_dmrg_sweep_limit():
    with pytest.raises(ConvergenceError):
        ground_state_mps(ModelSpec("XXZ", 10, delta=0.45, boundary="Open"), max_sweeps=1)
