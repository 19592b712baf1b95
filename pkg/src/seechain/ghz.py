"""Exact maximal-decoherence oracles built on glassy GHZ states.

A glassy GHZ state pairs a configuration with its global flip,
``(|c> + alpha |~c>) / sqrt(2)``; the ``2**(L-1)`` pairs are labelled by the
configurations ``g`` whose top bit is 0.
"""

from __future__ import annotations

import enum
import itertools
import math

import numpy as np

from .spin import Boundary, PureState, zz_signs

DENSE_MATRIX_LIMIT = 10


class Basis(str, enum.Enum):
    ZPRODUCT = "ZProduct"
    GLASSY_GHZ = "GlassyGHZ"


class ParityError(ValueError):
    """State is not an eigenstate of the global spin flip."""


def _check_matrix_size(L: int) -> None:
    if L > DENSE_MATRIX_LIMIT:
        raise ValueError(
            f"L={L} exceeds the dense-matrix oracle limit {DENSE_MATRIX_LIMIT}"
        )


def maximal_decohere_oracle(
    state: PureState, boundary: Boundary = Boundary.PERIODIC
) -> np.ndarray:
    """rho_D at p = 1/2 as the sum over measurement records of P^beta rho P^beta.

    ``P^beta = prod_j (1 + beta_j Z_j Z_{j+1}) / 2``.  Under periodic
    boundaries the last outcome is fixed by the others, beta_{L-1} =
    prod_j beta_j, leaving 2**(L-1) records either way.
    """
    L = state.L
    _check_matrix_size(L)
    boundary = Boundary(boundary)
    free = [zz_signs(L, j, (j + 1) % L) for j in range(L - 1)]
    wrap = zz_signs(L, L - 1, 0) if boundary is Boundary.PERIODIC else None
    projectors = []
    for beta in itertools.product((1, -1), repeat=L - 1):
        proj = np.ones(2**L)
        for b, zz in zip(beta, free):
            proj *= (1 + b * zz) / 2
        if wrap is not None:
            proj *= (1 + math.prod(beta) * wrap) / 2
        projectors.append(proj)
    pm = np.asarray(projectors)
    rho0 = np.outer(state.amplitudes, np.conj(state.amplitudes))
    # sum_beta diag(P) rho diag(P) = (P^T P) * rho elementwise
    return (pm.T @ pm) * rho0


def glassy_ghz_basis(L: int) -> np.ndarray:
    """Orthogonal matrix whose columns are |g^+>, |g^->, ordered by g."""
    half = 2 ** (L - 1)
    g = np.arange(half)
    gbar = (2**L - 1) - g
    basis = np.zeros((2**L, 2**L))
    s = 1 / math.sqrt(2)
    basis[g, 2 * g] = s
    basis[gbar, 2 * g] = s
    basis[g, 2 * g + 1] = s
    basis[gbar, 2 * g + 1] = -s
    return basis


def ghz_projector_sum(state: PureState) -> np.ndarray:
    """sum_{g, alpha} P^(g,alpha) rho_0 P^(g,alpha) over glassy GHZ projectors."""
    _check_matrix_size(state.L)
    v = glassy_ghz_basis(state.L)
    rho0 = np.outer(state.amplitudes, state.amplitudes)
    weights = np.einsum("ik,ij,jk->k", v, rho0, v)
    return (v * weights) @ v.T


def ghz_overlaps(state: PureState) -> np.ndarray:
    """<g^alpha|phi> without building the basis matrix."""
    phi = state.amplitudes
    half = 2 ** (state.L - 1)
    head = phi[:half]
    tail = phi[::-1][:half]  # amplitude of the flipped partner
    return np.concatenate([head + tail, head - tail]) / math.sqrt(2)


def shannon_renyi2(state: PureState, basis: Basis = Basis.ZPRODUCT) -> float:
    """Renyi-2 Shannon entropy -log sum_l p_l**2 in the chosen basis."""
    basis = Basis(basis)
    if basis is Basis.ZPRODUCT:
        probs = state.amplitudes**2
    else:
        probs = ghz_overlaps(state) ** 2
    return -math.log(float(np.sum(probs**2)))


def parity_pair_sign(state: PureState, rtol: float = 1e-9) -> int:
    """Uniform sign s with phi(~c) = s * phi(c) for every configuration."""
    phi = state.amplitudes
    flipped = phi[::-1]
    s = 1 if float(phi @ flipped) >= 0 else -1
    scale = float(np.linalg.norm(phi))
    mismatch = float(np.linalg.norm(flipped - s * phi))
    if mismatch > rtol * scale:
        worst = int(np.argmax(np.abs(flipped - s * phi)))
        raise ParityError(
            f"parity-pair sign inconsistent: ||phi(~c) - ({s:+d}) phi(c)|| = "
            f"{mismatch:.3e} (worst configuration c={worst})"
        )
    return s
