import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seechain.mps.svd import TruncationPolicy, svd, truncated_svd, truncation_rank


@pytest.mark.parametrize("shape", [(1, 1), (5, 3), (3, 5), (64, 64), (200, 37), (256, 256)])
def test_reconstruction_and_orthogonality(shape):
    a = np.random.default_rng(sum(shape)).standard_normal(shape)
    u, s, vt = svd(a)
    scale = np.linalg.norm(a)
    assert np.linalg.norm(u @ np.diag(s) @ vt - a) < 1e-10 * scale
    assert np.abs(u.T @ u - np.eye(len(s))).max() < 1e-12
    assert np.abs(vt @ vt.T - np.eye(len(s))).max() < 1e-12
    assert np.all(np.diff(s) <= 0)


def test_singular_values_match_lapack():
    a = np.random.default_rng(7).standard_normal((120, 80))
    assert np.allclose(svd(a)[1], np.linalg.svd(a, compute_uv=False), rtol=1e-12)


def test_graded_spectrum():
    # singular values spanning 12 decades stay accurate in relative terms
    rng = np.random.default_rng(2)
    q1, _ = np.linalg.qr(rng.standard_normal((40, 40)))
    q2, _ = np.linalg.qr(rng.standard_normal((40, 40)))
    s_true = np.logspace(0, -12, 40)
    u, s, vt = svd(q1 @ np.diag(s_true) @ q2.T)
    assert np.allclose(s[:30], s_true[:30], rtol=1e-6)


def test_rank_deficient_drops_zero_directions():
    a = np.outer(np.arange(1.0, 7.0), np.arange(1.0, 4.0))
    u, s, vt = svd(a)
    assert len(s) == 1
    assert np.allclose(u * s @ vt, a)


def test_zero_width():
    u, s, vt = svd(np.zeros((4, 0)))
    assert u.shape == (4, 0) and s.shape == (0,)


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_random_reconstruction(m, n, seed):
    a = np.random.default_rng(seed).standard_normal((m, n))
    u, s, vt = svd(a)
    assert np.allclose(u @ np.diag(s) @ vt, a, atol=1e-12)


class TestTruncation:
    def test_policy_validation(self):
        with pytest.raises(ValueError):
            TruncationPolicy(chi_max=0)
        with pytest.raises(ValueError):
            TruncationPolicy(svd_cutoff=1e-3)

    def test_cutoff(self):
        s = np.array([1.0, 1e-3, 1e-7, 1e-9])
        k, disc = truncation_rank(s, TruncationPolicy(chi_max=10, svd_cutoff=1e-12))
        assert k == 2  # the tail 1e-14 + 1e-18 falls under the cutoff
        assert disc == pytest.approx((1e-14 + 1e-18) / (1 + 1e-6 + 1e-14 + 1e-18))
        k, _ = truncation_rank(s, TruncationPolicy(chi_max=10, svd_cutoff=1e-16))
        assert k == 3

    def test_chi_max_caps(self):
        s = np.ones(10)
        k, disc = truncation_rank(s, TruncationPolicy(chi_max=4, svd_cutoff=0.0))
        assert k == 4 and disc == pytest.approx(0.6)

    def test_keeps_at_least_one(self):
        k, _ = truncation_rank(np.array([1.0, 1.0]), TruncationPolicy(chi_max=5, svd_cutoff=1e-4))
        assert k == 2
        assert truncation_rank(np.array([1.0]), TruncationPolicy())[0] == 1

    def test_truncated_svd_error_is_discarded_weight(self):
        a = np.random.default_rng(4).standard_normal((30, 30))
        u, s, vt, disc = truncated_svd(a, TruncationPolicy(chi_max=10, svd_cutoff=0.0))
        err = np.linalg.norm(a - u * s @ vt) ** 2 / np.linalg.norm(a) ** 2
        assert err == pytest.approx(disc, rel=1e-10)
