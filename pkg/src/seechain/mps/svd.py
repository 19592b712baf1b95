"""One-sided (Hestenes) Jacobi SVD with truncation helpers.

Column pairs are rotated in round-robin order so that each round touches
disjoint pairs and can be applied as one vectorized update.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg


class SvdError(RuntimeError):
    pass


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """n - 1 rounds of n/2 disjoint pairs covering every pair once (n even)."""
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        p = np.array(players[: n // 2])
        q = np.array(players[n // 2 :][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return tuple(rounds)


def _jacobi_rows(x: np.ndarray, tol: float, max_sweeps: int):
    """Orthogonalize the rows of ``x`` by plane rotations.

    Returns ``(w, v)`` with ``v`` orthogonal and ``w = v.T @ x``; rows are
    stored contiguously so each round gathers whole rows.
    """
    n = x.shape[0]
    pad = n % 2
    w = np.concatenate([x, np.zeros((pad, x.shape[1]))]) if pad else x.copy()
    v = np.eye(n + pad)
    rounds = _round_robin(n + pad)
    for sweep in range(max_sweeps):
        off = 0.0
        for p, q in rounds:
            wp, wq = w[p], w[q]
            alpha = np.einsum("ij,ij->i", wp, wp)
            beta = np.einsum("ij,ij->i", wq, wq)
            gamma = np.einsum("ij,ij->i", wp, wq)
            scale = np.sqrt(alpha * beta)
            active = np.abs(gamma) > tol * scale
            if not active.any():
                continue
            off = max(off, float(np.max(np.abs(gamma[active]) / scale[active])))
            g = np.where(active, gamma, 1.0)
            zeta = (beta - alpha) / (2.0 * g)
            t = np.where(
                zeta == 0.0,
                1.0,
                np.sign(zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta)),
            )
            c = np.where(active, 1.0 / np.sqrt(1.0 + t * t), 1.0)[:, None]
            s = np.where(active, t / np.sqrt(1.0 + t * t), 0.0)[:, None]
            w[p], w[q] = c * wp - s * wq, s * wp + c * wq
            vp, vq = v[p], v[q]
            v[p], v[q] = c * vp - s * vq, s * vp + c * vq
        if off <= tol:
            break
    else:
        raise SvdError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")
    # rows of v were rotated alongside rows of w: w = v @ x
    return w[:n], v[:n, :n]


def svd(a: np.ndarray, tol: float | None = None, max_sweeps: int = 60):
    """Thin SVD ``a = u @ diag(s) @ vt`` with ``s`` sorted descending.

    The matrix is first reduced by QR with column pivoting, ``a P = Q R``;
    Jacobi rotations then orthogonalize the rows of ``R``, which are strongly
    graded by the pivoting and converge in a few sweeps.  Numerically zero
    singular directions (below ``max(m, n) * eps`` relative to the largest)
    are dropped, so ``len(s)`` may be smaller than ``min(a.shape)``.
    Rotations stop once every pair satisfies ``|<w_p, w_q>| <= tol |w_p| |w_q|``
    (default ``sqrt(m) * eps``).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("svd expects a matrix")
    m, n = a.shape
    if m < n:
        u, s, vt = svd(a.T, tol, max_sweeps)
        return vt.T, s, u.T
    if n == 0:
        return np.zeros((m, 0)), np.zeros(0), np.zeros((0, n))
    if tol is None:
        tol = np.sqrt(m) * np.finfo(float).eps
    qmat, r, perm = scipy.linalg.qr(a, mode="economic", pivoting=True)
    # rows of r: w = v @ r with orthogonal v, so r = v.T @ w
    w, v = _jacobi_rows(r, tol, max_sweeps)
    s = np.linalg.norm(w, axis=1)
    order = np.argsort(-s, kind="stable")
    s, w, v = s[order], w[order], v[order]
    keep = s > s[0] * max(m, n) * np.finfo(float).eps
    s, w, v = s[keep], w[keep], v[keep]
    u = qmat @ v.T
    vt = np.empty_like(w)
    vt[:, perm] = w / s[:, None]
    return u, s, vt


@dataclass(frozen=True)
class TruncationPolicy:
    chi_max: int = 128
    svd_cutoff: float = 1e-12
    rescale: bool = True
    abort_threshold: float = 1e-6

    def __post_init__(self):
        if self.chi_max < 1:
            raise ValueError("chi_max must be >= 1")
        if not 0.0 <= self.svd_cutoff <= 1e-4:
            raise ValueError("svd_cutoff must lie in [0, 1e-4]")


def truncation_rank(s: np.ndarray, policy: TruncationPolicy) -> tuple[int, float]:
    """Number of singular values kept and the relative discarded weight.

    Drops the smallest values while their cumulative weight stays within
    ``svd_cutoff``, then caps at ``chi_max``.
    """
    w = s**2
    total = float(w.sum())
    if total == 0.0:
        return 0, 0.0
    tail = np.cumsum(w[::-1])[::-1] / total  # tail[k] = weight of s[k:]
    k = int(np.sum(tail > policy.svd_cutoff))
    k = max(1, min(k, policy.chi_max))
    discarded = float(w[k:].sum() / total)
    return k, discarded


def truncated_svd(a: np.ndarray, policy: TruncationPolicy):
    u, s, vt = svd(a)
    k, discarded = truncation_rank(s, policy)
    return u[:, :k], s[:k], vt[:k], discarded
