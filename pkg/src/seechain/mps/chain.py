"""Single-chain matrix product states and two-site DMRG (open boundaries)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..lanczos import LanczosError, lanczos_lowest
from ..spin import Boundary, Model, ModelSpec
from .svd import TruncationPolicy, truncated_svd

I2 = np.eye(2)
SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.diag([1.0, -1.0])
# raising/lowering in the up=0, down=1 basis; X X + Y Y = 2 (S+ S- + S- S+)
SP = np.array([[0.0, 1.0], [0.0, 0.0]])
SM = SP.T.copy()


class ConvergenceError(RuntimeError):
    pass


@dataclass
class MPS:
    """Tensors ``A[k]`` of shape (left bond, 2, right bond)."""

    tensors: list[np.ndarray]
    center: int = 0

    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def bonds(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "MPS":
        return MPS([t.copy() for t in self.tensors], self.center)

    def to_dense(self) -> np.ndarray:
        """Amplitudes indexed by configuration (bit j = site j)."""
        return contract_dense(self.tensors, 2)

    def norm(self) -> float:
        return float(np.sqrt(overlap(self.tensors, self.tensors)))


def contract_dense(tensors: list[np.ndarray], d: int) -> np.ndarray:
    psi = np.ones((1, 1))
    for t in tensors:
        psi = np.tensordot(psi, t, axes=([1], [0])).reshape(-1, t.shape[2])
    L = len(tensors)
    # C order puts site 0 first (most significant); reverse to bit order
    return psi.reshape((d,) * L).transpose(range(L - 1, -1, -1)).reshape(-1)


def overlap(bra: list[np.ndarray], ket: list[np.ndarray]) -> float:
    env = np.ones((1, 1))
    for a, b in zip(bra, ket):
        env = np.einsum("ab,asc,bsd->cd", env, a, b, optimize=True)
    return float(env[0, 0])


def build_mpo(spec: ModelSpec) -> list[np.ndarray]:
    """Finite-state MPO tensors ``W[k]`` of shape (wl, wr, out, in).

    State 0 is "before any term", 1..T carry a pending two-site term and
    T + 1 is "term completed".
    """
    if spec.boundary is not Boundary.OPEN:
        raise ValueError("the MPS backend supports Open boundaries only")
    if spec.model is Model.TFIM:
        pairs = [(-1.0, SZ, SZ)]
        onsite = -SX
    else:
        pairs = [(2.0, SP, SM), (2.0, SM, SP), (spec.delta, SZ, SZ)]
        onsite = np.zeros((2, 2))
    T = len(pairs)
    w = np.zeros((T + 2, T + 2, 2, 2))
    w[0, 0] = I2
    w[T + 1, T + 1] = I2
    w[0, T + 1] = onsite
    for t, (coef, a, b) in enumerate(pairs, start=1):
        w[0, t] = coef * a
        w[t, T + 1] = b
    tensors = [w.copy() for _ in range(spec.L)]
    tensors[0] = w[:1]
    tensors[-1] = w[:, T + 1 :]
    return tensors


def mpo_to_dense(mpo: list[np.ndarray]) -> np.ndarray:
    """Dense matrix of an MPO in configuration order (small L only)."""
    op = np.ones((1, 1, 1))
    for w in mpo:
        op = np.einsum("aij,abkl->bikjl", op, w).reshape(
            w.shape[1], op.shape[1] * 2, op.shape[2] * 2
        )
    L = len(mpo)
    full = op[0].reshape((2,) * (2 * L))
    rev = list(range(L - 1, -1, -1))
    return full.transpose(rev + [L + r for r in rev]).reshape(2**L, 2**L)


def random_mps(L: int, chi: int, seed: int = 0) -> MPS:
    rng = np.random.default_rng(seed)
    dims = [min(2**k, 2 ** (L - k), chi) for k in range(L + 1)]
    tensors = [rng.standard_normal((dims[k], 2, dims[k + 1])) for k in range(L)]
    return right_canonicalize(MPS(tensors))


def right_canonicalize(mps: MPS) -> MPS:
    """QR sweep from the right; normalizes and leaves the center at site 0."""
    tensors = [t.copy() for t in mps.tensors]
    for k in range(len(tensors) - 1, 0, -1):
        chil, d, chir = tensors[k].shape
        q, r = np.linalg.qr(tensors[k].reshape(chil, d * chir).T)
        tensors[k] = q.T.reshape(-1, d, chir)
        tensors[k - 1] = np.tensordot(tensors[k - 1], r.T, axes=([2], [0]))
    tensors[0] /= np.linalg.norm(tensors[0])
    return MPS(tensors, 0)


def left_canonicalize(mps: MPS) -> MPS:
    tensors = [t.copy() for t in mps.tensors]
    for k in range(len(tensors) - 1):
        chil, d, chir = tensors[k].shape
        q, r = np.linalg.qr(tensors[k].reshape(chil * d, chir))
        tensors[k] = q.reshape(chil, d, -1)
        tensors[k + 1] = np.tensordot(r, tensors[k + 1], axes=([1], [0]))
    tensors[-1] /= np.linalg.norm(tensors[-1])
    return MPS(tensors, len(tensors) - 1)


@dataclass
class SchmidtForm:
    """Right-canonical tensors whose bond indices are Schmidt indices.

    ``schmidt[k]`` holds the Schmidt values on the bond left of site ``k``
    (``schmidt[0] == schmidt[L] == [1]``).
    """

    tensors: list[np.ndarray]
    schmidt: list[np.ndarray]


def schmidt_form(mps: MPS) -> SchmidtForm:
    left = left_canonicalize(mps)
    tensors = left.tensors
    L = len(tensors)
    schmidt: list[np.ndarray] = [np.ones(1)] * (L + 1)
    exact = TruncationPolicy(chi_max=10**9, svd_cutoff=0.0)
    for k in range(L - 1, 0, -1):
        chil, d, chir = tensors[k].shape
        u, s, vt, _ = truncated_svd(tensors[k].reshape(chil, d * chir), exact)
        tensors[k] = vt.reshape(-1, d, chir)
        tensors[k - 1] = np.tensordot(tensors[k - 1], u * s, axes=([2], [0]))
        schmidt[k] = s / np.linalg.norm(s)
    tensors[0] = tensors[0] / np.linalg.norm(tensors[0])
    return SchmidtForm(tensors, schmidt)


@dataclass
class DmrgResult:
    mps: MPS
    energy: float
    energies: list[float] = field(default_factory=list)
    truncation_weight: float = 0.0
    sweeps: int = 0


def _effective_matvec(lp, w1, w2, rp, shape):
    def matvec(x):
        t = np.tensordot(lp, x.reshape(shape), axes=([2], [0]))
        t = np.tensordot(t, w1, axes=([1, 2], [0, 3]))
        t = np.tensordot(t, w2, axes=([3, 1], [0, 3]))
        t = np.tensordot(t, rp, axes=([1, 3], [2, 1]))
        return t.reshape(-1)

    return matvec


def _grow_left(lp, a, w):
    t = np.tensordot(lp, a, axes=([2], [0]))  # (a', w, s, b)
    t = np.tensordot(t, w, axes=([1, 2], [0, 3]))  # (a', b, x, s')
    return np.tensordot(a, t, axes=([0, 1], [0, 3]))  # (b', b, x)->reorder


def _left_env(lp, a, w):
    t = _grow_left(lp, a, w)  # (b', b, x)
    return t.transpose(0, 2, 1)


def _right_env(rp, b, w):
    t = np.tensordot(b, rp, axes=([2], [2]))  # (a, s, c', y)
    t = np.tensordot(t, w, axes=([1, 3], [3, 1]))  # (a, c', x, s')
    t = np.tensordot(t, b, axes=([1, 3], [2, 1]))  # (a, x, a')
    return t.transpose(2, 1, 0)


def ground_state_mps(
    spec: ModelSpec,
    chi_max: int = 64,
    tol: float = 1e-10,
    max_sweeps: int = 30,
    seed: int = 0,
    svd_cutoff: float = 1e-14,
) -> DmrgResult:
    """Two-site DMRG until the sweep energy changes by less than ``tol``."""
    mpo = build_mpo(spec)
    L = spec.L
    policy = TruncationPolicy(chi_max=chi_max, svd_cutoff=svd_cutoff)
    mps = random_mps(L, min(chi_max, 8), seed)
    tensors = mps.tensors
    lps: list[np.ndarray | None] = [None] * (L + 1)
    rps: list[np.ndarray | None] = [None] * (L + 1)
    lps[0] = np.ones((1, 1, 1))
    rps[L] = np.ones((1, 1, 1))
    for k in range(L - 1, 0, -1):
        rps[k] = _right_env(rps[k + 1], tensors[k], mpo[k])

    energies: list[float] = []
    total_trunc = 0.0
    energy = np.inf

    def solve(k):
        theta = np.tensordot(tensors[k], tensors[k + 1], axes=([2], [0]))
        shape = theta.shape
        matvec = _effective_matvec(lps[k], mpo[k], mpo[k + 1], rps[k + 2], shape)
        try:
            res = lanczos_lowest(
                matvec, theta.reshape(-1), tol=1e-13, residual_tol=1e-8, max_iter=200
            )
        except LanczosError as exc:
            raise ConvergenceError(f"local eigensolver failed at bond {k}: {exc}")
        return res.value, res.vector.reshape(shape)

    for sweep in range(1, max_sweeps + 1):
        for k in range(L - 1):
            e, theta = solve(k)
            chil, d1, d2, chir = theta.shape
            u, s, vt, disc = truncated_svd(theta.reshape(chil * d1, d2 * chir), policy)
            total_trunc += disc
            tensors[k] = u.reshape(chil, d1, -1)
            tensors[k + 1] = (s[:, None] * vt).reshape(-1, d2, chir) / np.linalg.norm(s)
            lps[k + 1] = _left_env(lps[k], tensors[k], mpo[k])
        for k in range(L - 2, -1, -1):
            e, theta = solve(k)
            chil, d1, d2, chir = theta.shape
            u, s, vt, disc = truncated_svd(theta.reshape(chil * d1, d2 * chir), policy)
            total_trunc += disc
            tensors[k + 1] = vt.reshape(-1, d2, chir)
            tensors[k] = (u * s).reshape(chil, d1, -1) / np.linalg.norm(s)
            rps[k + 1] = _right_env(rps[k + 2], tensors[k + 1], mpo[k + 1])
        energies.append(e)
        if abs(e - energy) < tol and sweep >= 2:
            energy = e
            break
        energy = e
    else:
        raise ConvergenceError(
            f"DMRG energy not converged after {max_sweeps} sweeps: {energies[-3:]}"
        )
    return DmrgResult(MPS(tensors, 0), float(energy), energies, total_trunc, sweep)
