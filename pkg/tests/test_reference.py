import math

import numpy as np
import pytest

from seechain.doubled import apply_zz_filter, canonical_correlator, renyi2_correlator, vectorize
from seechain.scaling import Phase, classify_phase, luttinger_k, reference_g_values
from seechain.spin import ModelSpec, build_hamiltonian, ground_state


def test_luttinger_values():
    assert luttinger_k(0.0) == pytest.approx(1.0)
    assert luttinger_k(0.5) == pytest.approx(0.75)
    assert reference_g_values("XXZ", 0.45) == pytest.approx(2.483, abs=1e-3)


def test_luttinger_monotone_and_limit():
    deltas = np.linspace(-0.9, 0.999999, 50)
    ks = [luttinger_k(d) for d in deltas]
    assert all(a > b for a, b in zip(ks, ks[1:]))
    assert reference_g_values("XXZ", 1 - 1e-12) == pytest.approx(2.0, abs=1e-5)
    with pytest.raises(ValueError):
        luttinger_k(1.0)


def test_tfim_references():
    assert reference_g_values("TFIM") == 1.0
    assert reference_g_values("TFIM", channel="XplusZZ") == 2.0
    with pytest.raises(ValueError):
        reference_g_values("TFIM", channel="X")
    with pytest.raises(ValueError):
        reference_g_values("XXZ")
    with pytest.raises(ValueError):
        reference_g_values("XXZ", 0.45, channel="XplusZZ")


@pytest.mark.parametrize(
    "c2,c1,phase",
    [(0.9, 0.01, Phase.SWSSB), (0.9, 0.5, Phase.STRONG_TO_TRIVIAL), (0.1, 0.01, Phase.SYMMETRIC), (-0.9, -0.05, Phase.SWSSB)],
)
def test_classify_examples(c2, c1, phase):
    label = classify_phase(c2, c1)
    assert label.phase is phase
    assert label.c2 == c2


def test_classify_monotone_in_c2():
    phases = [classify_phase(c2, 0.01).phase for c2 in np.linspace(0, 1, 21)]
    first = phases.index(Phase.SWSSB)
    assert all(p is Phase.SYMMETRIC for p in phases[:first])
    assert all(p is Phase.SWSSB for p in phases[first:])


def _long_range(model, L, delta, p):
    ds0 = vectorize(ground_state(build_hamiltonian(ModelSpec(model, L, delta=delta))))
    ds = apply_zz_filter(ds0, p)
    return renyi2_correlator(ds, 0, L // 2), canonical_correlator(ds, 0, L // 2)


def test_xxz_maximal_decoherence_is_swssb():
    label = classify_phase(*_long_range("XXZ", 10, 0.45, 0.5))
    assert label.phase is Phase.SWSSB
    assert classify_phase(*_long_range("XXZ", 10, 0.45, 0.0)).phase is Phase.SYMMETRIC


def test_tfim_canonical_correlator_decays_with_size():
    c1 = [abs(_long_range("TFIM", L, 0.0, 0.5)[1]) for L in (6, 8, 10, 12)]
    assert all(a > b for a, b in zip(c1, c1[1:]))
    assert math.isclose(_long_range("TFIM", 8, 0.0, 0.5)[0], 1.0, abs_tol=1e-10)
