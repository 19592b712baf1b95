"""Lanczos lowest-eigenpair solver with full reorthogonalization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class LanczosError(RuntimeError):
    """Raised when the Lanczos iteration fails to reach the residual target."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


@dataclass
class LanczosResult:
    value: float
    vector: np.ndarray
    residual: float
    ritz_values: np.ndarray
    iterations: int


def lanczos_lowest(
    matvec: Callable[[np.ndarray], np.ndarray],
    v0: np.ndarray,
    tol: float = 1e-12,
    residual_tol: float = 1e-10,
    max_iter: int = 2000,
    check_every: int = 5,
) -> LanczosResult:
    """Lowest eigenpair of a real symmetric operator given by ``matvec``.

    The Krylov basis is kept and fully reorthogonalized (twice, classical
    Gram-Schmidt), so the memory cost is ``O(iterations * dim)``; storage grows
    with the iterations actually used.  Convergence
    is declared when the Ritz residual estimate drops below ``tol`` relative to
    ``max(1, |theta|)``; the true residual of the returned vector must then be
    below ``residual_tol`` or :class:`LanczosError` is raised.
    """
    v0 = np.asarray(v0, dtype=float)
    dim = v0.size
    m = min(max_iter, dim)
    basis = np.empty((min(m + 1, 32), dim))
    norm0 = np.linalg.norm(v0)
    if norm0 == 0.0:
        raise LanczosError("zero start vector", float("inf"))
    basis[0] = v0 / norm0
    alphas: list[float] = []
    betas: list[float] = []
    theta = np.zeros(1)
    svecs = np.ones((1, 1))
    k = 0
    converged = False
    for j in range(m):
        w = matvec(basis[j])
        a = float(basis[j] @ w)
        w = w - a * basis[j]
        if j > 0:
            w -= betas[-1] * basis[j - 1]
        for _ in range(2):
            w -= basis[: j + 1].T @ (basis[: j + 1] @ w)
        b = float(np.linalg.norm(w))
        alphas.append(a)
        k = j + 1
        exhausted = b <= 1e-14 * max(1.0, abs(a)) or k == dim
        if exhausted or k % check_every == 0 or k == m:
            tri = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
            theta, svecs = np.linalg.eigh(tri)
            estimate = b * abs(svecs[-1, 0])
            if exhausted or estimate < tol * max(1.0, abs(theta[0])):
                converged = True
                break
        if j + 1 == basis.shape[0]:
            grown = np.empty((min(m + 1, 2 * basis.shape[0]), dim))
            grown[: j + 1] = basis
            basis = grown
        basis[j + 1] = w / b
        betas.append(b)

    x = basis[:k].T @ svecs[:, 0]
    x /= np.linalg.norm(x)
    hx = matvec(x)
    value = float(x @ hx)
    residual = float(np.linalg.norm(hx - value * x))
    if not converged or residual > residual_tol:
        raise LanczosError(
            f"Lanczos did not converge after {k} iterations", residual
        )
    return LanczosResult(value, x, residual, theta.copy(), k)
