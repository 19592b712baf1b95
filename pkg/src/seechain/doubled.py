"""Doubled-Hilbert-space representation of decohered density matrices.

A :class:`DoubledState` stores ``|rho>>`` as a ``(2**L, 2**L)`` real matrix
``amplitudes[c_u, c_l]`` (upper/lower chain configurations) together with a
scalar ``log_prefactor``; the physical vector is ``exp(log_prefactor) *
amplitudes``.  For a vectorized pure state ``amplitudes[c_u, c_l] =
phi(c_u) * phi(c_l)``, so the physical norm squared equals the purity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .spin import Boundary, PureState, zz_signs

DEFAULT_DENSE_LIMIT = 12


class DenseLimitError(ValueError):
    """The requested size does not fit the dense doubled representation."""


class ChannelKind(str, enum.Enum):
    ZZ = "ZZ"
    X = "X"
    XPLUSZZ = "XplusZZ"


def tau_from_p(p: float) -> float:
    """Filter strength atanh(p / (1 - p)); infinite at maximal decoherence."""
    _check_p(p)
    if p == 0.5:
        return math.inf
    return math.atanh(p / (1.0 - p))


def _check_p(p: float, name: str = "p") -> None:
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"{name} must lie in [0, 1/2], got {p}")


@dataclass(frozen=True)
class ChannelSpec:
    kind: ChannelKind
    p_zz: float = 0.0
    p_x: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        _check_p(self.p_zz, "p_zz")
        _check_p(self.p_x, "p_x")
        if self.kind is ChannelKind.ZZ and self.p_x != 0.0:
            raise ValueError("ZZ channel has no X component")
        if self.kind is ChannelKind.X and self.p_zz != 0.0:
            raise ValueError("X channel has no ZZ component")

    @classmethod
    def from_strength(cls, kind, p: float) -> "ChannelSpec":
        """Single-parameter family: X+ZZ uses p_zz = p_x = p."""
        kind = ChannelKind(kind)
        if kind is ChannelKind.ZZ:
            return cls(kind, p_zz=p)
        if kind is ChannelKind.X:
            return cls(kind, p_x=p)
        return cls(kind, p_zz=p, p_x=p)

    @property
    def tau_zz(self) -> float:
        return tau_from_p(self.p_zz)

    @property
    def tau_x(self) -> float:
        return tau_from_p(self.p_x)

    @property
    def strength(self) -> float:
        return self.p_x if self.kind is ChannelKind.X else self.p_zz


@dataclass(frozen=True)
class DoubledState:
    L: int
    amplitudes: np.ndarray
    log_prefactor: float = 0.0

    @property
    def vector(self) -> np.ndarray:
        """Amplitudes flattened with ``c_u`` as the major index."""
        return self.amplitudes.reshape(-1)

    def physical(self) -> np.ndarray:
        return math.exp(self.log_prefactor) * self.amplitudes

    def purity(self) -> float:
        return math.exp(2.0 * self.log_prefactor) * float(np.sum(self.amplitudes**2))

    def density_matrix(self) -> np.ndarray:
        """The decohered ``rho`` with ``rho[c, c'] = <c|rho|c'>``."""
        return self.physical().T


def _renormalized(L: int, amps: np.ndarray, log_prefactor: float) -> DoubledState:
    norm = float(np.linalg.norm(amps))
    if norm > 0.0:
        amps = amps / norm
        log_prefactor += math.log(norm)
    return DoubledState(L, amps, log_prefactor)


def vectorize(state: PureState, dense_limit: int = DEFAULT_DENSE_LIMIT) -> DoubledState:
    """|rho_0>> = |phi*>|phi> for a normalized pure state."""
    if state.L > dense_limit:
        raise DenseLimitError(
            f"L={state.L} exceeds the dense doubled limit {dense_limit}; "
            "use the MPS backend (seechain.mps) for larger chains"
        )
    phi = state.amplitudes
    return DoubledState(state.L, np.outer(np.conj(phi), phi), 0.0)


def link_patterns(L: int, boundary: Boundary) -> tuple[np.ndarray, int]:
    """Bit pattern of anti-aligned links (domain walls) for each configuration."""
    boundary = Boundary(boundary)
    n_links = L if boundary is Boundary.PERIODIC else L - 1
    c = np.arange(2**L)
    walls = np.zeros(c.size, dtype=np.int64)
    for j in range(n_links):
        walls |= (((c >> j) ^ (c >> ((j + 1) % L))) & 1) << j
    return walls, n_links


def zz_mismatch(L: int, boundary: Boundary) -> np.ndarray:
    """``m[c, c']``: number of links whose ZZ parity differs between c and c'."""
    walls, _ = link_patterns(L, boundary)
    return np.bitwise_count(walls[:, None] ^ walls[None, :]).astype(np.int8)


def apply_zz_filter(
    ds: DoubledState, p_zz: float, boundary: Boundary = Boundary.PERIODIC
) -> DoubledState:
    """Apply the ZZ-decoherence filter to every link.

    Each link contributes sqrt(1 - 2p) exp(tau zzzz), which equals 1 on
    links where upper and lower ZZ parities agree and 1 - 2p where they
    differ; the prefactor and exp(tau) cancel identically, so only the
    weight ``(1 - 2p)**m`` is applied.  At p = 1/2 this is the product of
    link projectors (1 + zzzz)/2.  The result is renormalized with the scale
    folded into ``log_prefactor``.
    """
    _check_p(p_zz, "p_zz")
    if p_zz == 0.0:
        return ds
    m = zz_mismatch(ds.L, boundary)
    _, n_links = link_patterns(ds.L, boundary)
    table = (1.0 - 2.0 * p_zz) ** np.arange(n_links + 1)
    return _renormalized(ds.L, ds.amplitudes * table[m], ds.log_prefactor)


def apply_x_filter(ds: DoubledState, p_x: float) -> DoubledState:
    """Apply prod_j [(1 - p) I + p X_{j,u} X_{j,l}] rung by rung."""
    _check_p(p_x, "p_x")
    if p_x == 0.0:
        return ds
    L = ds.L
    t = ds.amplitudes.reshape((2,) * (2 * L))
    # axis k of the C-ordered tensor holds bit L-1-k of c_u (c_l for k >= L)
    for j in range(L):
        t = (1.0 - p_x) * t + p_x * np.flip(t, axis=(L - 1 - j, 2 * L - 1 - j))
    return _renormalized(L, t.reshape(2**L, 2**L), ds.log_prefactor)


def apply_channel(
    ds: DoubledState, channel: ChannelSpec, boundary: Boundary = Boundary.PERIODIC
) -> DoubledState:
    if channel.kind is not ChannelKind.ZZ:
        ds = apply_x_filter(ds, channel.p_x)
    if channel.kind is not ChannelKind.X:
        ds = apply_zz_filter(ds, channel.p_zz, boundary)
    return ds


def see(ds: DoubledState) -> float:
    """System-environment entanglement -log <<rho|rho>>."""
    norm2 = float(np.sum(ds.amplitudes**2))
    if norm2 <= 0.0:
        raise ZeroDivisionError("doubled state has zero norm")
    return -(2.0 * ds.log_prefactor + math.log(norm2))


def _check_sites(L: int, *sites: int) -> None:
    for s in sites:
        if not 0 <= s < L:
            raise ValueError(f"site {s} out of range for L={L}")


def renyi2_correlator(ds: DoubledState, i: int, j: int) -> float:
    """<<rho|Z_iu Z_ju Z_il Z_jl|rho>> / <<rho|rho>>."""
    _check_sites(ds.L, i, j)
    return float(renyi2_profile(ds, [(i, j)])[0])


def renyi2_profile(ds: DoubledState, pairs) -> np.ndarray:
    weights = ds.amplitudes**2
    total = weights.sum()
    out = []
    for i, j in pairs:
        _check_sites(ds.L, i, j)
        z = zz_signs(ds.L, i, j)
        out.append(z @ (weights @ z) / total)
    return np.asarray(out, dtype=float)


def reference_pairs(L: int, ref: int = 0) -> list[tuple[int, int]]:
    return [(ref, (ref + r) % L) for r in range(1, L // 2 + 1)]


def renyi2_susceptibility(ds: DoubledState, ref: int = 0) -> float:
    """(2/L) * sum_{r=1}^{L/2} C^II(ref, ref + r)."""
    return float(2.0 / ds.L * renyi2_profile(ds, reference_pairs(ds.L, ref)).sum())


def canonical_correlator(ds: DoubledState, i: int, j: int) -> float:
    """<<1|Z_iu Z_ju|rho>> / <<1|rho>> = Tr[rho Z_i Z_j] / Tr[rho]."""
    _check_sites(ds.L, i, j)
    diag = np.diagonal(ds.amplitudes)
    denom = diag.sum()
    if abs(denom) < 1e-300:
        raise ZeroDivisionError("overlap with the vectorized identity vanishes")
    return float(zz_signs(ds.L, i, j) @ diag / denom)


@dataclass
class ObservableReport:
    p_zz: float
    p_x: float
    S_SE: float
    chi2: float
    c2_profile: list[tuple[int, float]] = field(default_factory=list)
    c1_profile: list[tuple[int, float]] = field(default_factory=list)

    @property
    def c2_half(self) -> float:
        return self.c2_profile[-1][1]

    @property
    def c1_half(self) -> float:
        return self.c1_profile[-1][1]


def observables(ds: DoubledState, channel: ChannelSpec) -> ObservableReport:
    pairs = reference_pairs(ds.L)
    c2 = renyi2_profile(ds, pairs)
    c1 = [canonical_correlator(ds, i, j) for i, j in pairs]
    rs = [r for r in range(1, ds.L // 2 + 1)]
    return ObservableReport(
        p_zz=channel.p_zz,
        p_x=channel.p_x,
        S_SE=see(ds),
        chi2=float(2.0 / ds.L * c2.sum()),
        c2_profile=list(zip(rs, map(float, c2))),
        c1_profile=list(zip(rs, map(float, c1))),
    )
