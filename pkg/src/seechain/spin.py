"""Exact representation of spin-1/2 chains in the Z-product basis.

Configuration ``c`` is an integer whose bit ``j`` is the spin on site ``j``
(0 = up, Z = +1; 1 = down, Z = -1).  All states and operators are real.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .lanczos import lanczos_lowest

DEFAULT_MAX_SITES = 20


class Model(str, enum.Enum):
    TFIM = "TFIM"
    XXZ = "XXZ"


class Boundary(str, enum.Enum):
    PERIODIC = "Periodic"
    OPEN = "Open"


@dataclass(frozen=True)
class ModelSpec:
    model: Model
    L: int
    delta: float = 0.0
    boundary: Boundary = Boundary.PERIODIC
    require_critical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.L < 2 or self.L % 2:
            raise ValueError(f"L must be even and >= 2, got {self.L}")
        if self.model is Model.TFIM and self.delta != 0.0:
            raise ValueError("delta is only meaningful for the XXZ model")
        if (
            self.model is Model.XXZ
            and self.require_critical
            and not abs(self.delta) < 1.0
        ):
            raise ValueError(f"critical XXZ needs |delta| < 1, got {self.delta}")

    def links(self) -> list[tuple[int, int]]:
        n = self.L if self.boundary is Boundary.PERIODIC else self.L - 1
        return [(j, (j + 1) % self.L) for j in range(n)]


@dataclass(frozen=True)
class PureState:
    L: int
    amplitudes: np.ndarray
    energy: float | None = None

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=float)
        if amps.shape != (2**self.L,):
            raise ValueError(f"expected {2**self.L} amplitudes, got {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class SparseOperator:
    """Real symmetric operator on the full ``2**L`` space.

    ``sector`` optionally lists the configurations of a conserved subspace;
    solvers then work on ``matrix[sector][:, sector]`` and embed the result.
    """

    L: int
    matrix: sp.csr_matrix
    sector: np.ndarray | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return 2**self.L

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix.T @ v


def configurations(L: int) -> np.ndarray:
    """Bit table ``bits[c, j]`` for all ``2**L`` configurations."""
    c = np.arange(2**L)
    return (c[:, None] >> np.arange(L)) & 1


def zz_signs(L: int, i: int, j: int) -> np.ndarray:
    """Eigenvalue of ``Z_i Z_j`` on every configuration."""
    c = np.arange(2**L)
    return 1 - 2 * (((c >> i) ^ (c >> j)) & 1)


def build_hamiltonian(
    spec: ModelSpec, max_sites: int = DEFAULT_MAX_SITES
) -> SparseOperator:
    """H_TFI = -sum(Z Z + X) or H_XXZ = sum(X X + Y Y + delta Z Z).

    The wrap link is included iff the boundary is periodic.  XXZ operators
    carry the total-Sz = 0 sector as their solve subspace.
    """
    L = spec.L
    if L > max_sites:
        raise ValueError(f"L={L} exceeds the dense limit of {max_sites} sites")
    n = 2**L
    idx = np.arange(n)
    diag = np.zeros(n)
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for i, j in spec.links():
        zz = zz_signs(L, i, j)
        if spec.model is Model.TFIM:
            diag -= zz
        else:
            diag += spec.delta * zz
            # X X + Y Y = 2 (S+S- + S-S+): hops antiparallel pairs with +2
            anti = idx[zz < 0]
            rows.append(anti)
            cols.append(anti ^ ((1 << i) | (1 << j)))
            vals.append(np.full(anti.size, 2.0))
    if spec.model is Model.TFIM:
        for i in range(L):
            rows.append(idx)
            cols.append(idx ^ (1 << i))
            vals.append(np.full(n, -1.0))
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    matrix.sum_duplicates()
    sector = None
    if spec.model is Model.XXZ:
        sector = idx[np.bitwise_count(idx) == L // 2]
    return SparseOperator(L, matrix, sector)


@dataclass(frozen=True)
class GroundState:
    state: PureState
    residual: float
    ritz_values: np.ndarray
    iterations: int

    @property
    def gap(self) -> float:
        if self.ritz_values.size < 2:
            return float("inf")
        return float(self.ritz_values[1] - self.ritz_values[0])


def fix_gauge(v: np.ndarray) -> np.ndarray:
    """Scale so the largest-magnitude amplitude is real positive."""
    k = int(np.argmax(np.abs(v)))
    return v * np.sign(v[k])


def solve_ground_state(
    H: SparseOperator,
    seed: int = 0,
    tol: float = 1e-12,
    max_iter: int = 2000,
    use_sector: bool = True,
) -> GroundState:
    sector = H.sector if use_sector else None
    if sector is None:
        mat = H.matrix
    else:
        mat = H.matrix[sector][:, sector].tocsr()
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(mat.shape[0])
    res = lanczos_lowest(lambda v: mat @ v, v0, tol=tol, max_iter=max_iter)
    if sector is None:
        amps = res.vector
    else:
        amps = np.zeros(H.dim)
        amps[sector] = res.vector
    amps = fix_gauge(amps / np.linalg.norm(amps))
    return GroundState(
        PureState(H.L, amps, res.value), res.residual, res.ritz_values, res.iterations
    )


def ground_state(H: SparseOperator, seed: int = 0) -> PureState:
    """Lowest eigenpair via Lanczos; raises LanczosError on non-convergence."""
    return solve_ground_state(H, seed).state


def apply_parity(state: PureState) -> PureState:
    """Global spin flip: the amplitude at ``c`` moves to its complement."""
    # complement of c is (2**L - 1) - c, i.e. index reversal
    return PureState(state.L, state.amplitudes[::-1], state.energy)


_AXES = "XYZ"


def expectation_pauli_string(state: PureState, ops) -> float:
    """<phi|P|phi> for a product of Paulis given as ``(site, axis)`` pairs."""
    per_site: dict[int, str] = {}
    for site, axis in ops:
        axis = str(axis).upper()
        if axis not in _AXES:
            raise ValueError(f"unknown Pauli axis {axis!r}")
        if not 0 <= site < state.L:
            raise ValueError(f"site {site} out of range for L={state.L}")
        prev = per_site.get(site)
        if prev is None:
            per_site[site] = axis
        elif prev == axis:
            del per_site[site]  # P^2 = I
        else:
            raise ValueError(f"conflicting axes {prev} and {axis} on site {site}")

    c = np.arange(2**state.L)
    flip = 0
    phase = np.ones(c.size, dtype=complex)
    for site, axis in per_site.items():
        z = 1 - 2 * ((c >> site) & 1)
        if axis == "Z":
            phase *= z
        elif axis == "X":
            flip |= 1 << site
        else:
            # Y|s> = i z(s) |~s>
            flip |= 1 << site
            phase *= 1j * z
    psi = state.amplitudes
    # (P psi)[c ^ flip] = phase[c] psi[c]
    value = np.sum(np.conj(psi[c ^ flip]) * phase * psi)
    if abs(value.imag) > 1e-10:
        raise ValueError("expectation value is not real; operator not Hermitian")
    return float(value.real)
