"""Doubled states on the two-leg ladder and filter-gate application.

A rung carries the upper and lower spin; its local index is
``r = 2 * s_u + s_l`` so that single-leg operators embed as
``kron(op_u, op_l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..doubled import ChannelKind, ChannelSpec
from .chain import MPS, contract_dense, schmidt_form
from .svd import TruncationPolicy, truncated_svd, truncation_rank

DEFAULT_HARD_CAP = 4096

RUNG_PARITY = np.array([1.0, -1.0, -1.0, 1.0])  # z_u z_l on each rung state
RUNG_IDENTITY = np.array([1.0, 0.0, 0.0, 1.0])  # |up up> + |down down>
_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Y": np.array([[0.0, -1j], [1j, 0.0]]),
    "Z": np.diag([1.0, -1.0]),
}


class TruncationAbort(RuntimeError):
    def __init__(self, weight: float, threshold: float, where: str):
        super().__init__(
            f"discarded weight {weight:.3e} exceeds abort threshold "
            f"{threshold:.1e} at {where}"
        )
        self.weight = weight


@dataclass
class MpsLadder:
    """Doubled state ``exp(log_scale) * |tensors>``.

    ``center`` is the orthogonality center: tensors left of it are
    left-canonical and tensors right of it right-canonical.
    """

    tensors: list[np.ndarray]
    center: int = 0
    log_scale: float = 0.0
    truncation_weight: float = 0.0

    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def bonds(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "MpsLadder":
        return MpsLadder(
            [t.copy() for t in self.tensors],
            self.center,
            self.log_scale,
            self.truncation_weight,
        )

    def canonical_error(self) -> float:
        """Largest deviation from the claimed left/right orthogonality."""
        err = 0.0
        for k, t in enumerate(self.tensors):
            if k < self.center:
                m = t.reshape(-1, t.shape[2])
                err = max(err, float(np.abs(m.T @ m - np.eye(m.shape[1])).max()))
            elif k > self.center:
                m = t.reshape(t.shape[0], -1)
                err = max(err, float(np.abs(m @ m.T - np.eye(m.shape[0])).max()))
        return err

    def center_norm2(self) -> float:
        return float(np.sum(self.tensors[self.center] ** 2))

    def to_dense(self) -> np.ndarray:
        """Physical amplitudes as a ``(2**L, 2**L)`` matrix ``[c_u, c_l]``."""
        L = self.L
        flat = contract_dense(self.tensors, 4)  # index sum_j r_j 4**j
        t = flat.reshape((2,) * (2 * L))
        # axis 2(L-1-j) holds s_u of site j, the next axis s_l of site j
        t = t.transpose(list(range(0, 2 * L, 2)) + list(range(1, 2 * L, 2)))
        return math.exp(self.log_scale) * t.reshape(2**L, 2**L)


def doubled_mps(
    mps: MPS,
    policy: TruncationPolicy | None = None,
    hard_cap: int = DEFAULT_HARD_CAP,
) -> MpsLadder:
    """Rung-wise product |phi*>|phi> of a chain MPS.

    Without ``policy`` every bond dimension squares exactly.  With a policy,
    each bond keeps the largest products of chain Schmidt values (the exact
    Schmidt spectrum of the doubled state) up to ``chi_max``; the result is
    renormalized and the discarded weight recorded.
    """
    form = schmidt_form(mps)
    L = mps.L
    keeps: list[np.ndarray] = [np.zeros(1, dtype=int)]
    trunc = 0.0
    for k in range(1, L):
        lam = np.outer(form.schmidt[k], form.schmidt[k]).reshape(-1)
        order = np.argsort(-lam, kind="stable")
        if policy is None:
            n_keep = lam.size
        else:
            n_keep, disc = truncation_rank(lam[order], policy)
            trunc += disc
        if n_keep > hard_cap:
            raise ValueError(
                f"doubled bond {k} needs dimension {n_keep} > hard cap {hard_cap}; "
                "lower chi_max for the chain or pass a truncation policy"
            )
        keeps.append(np.sort(order[:n_keep]))
    keeps.append(np.zeros(1, dtype=int))

    tensors = []
    for k, b in enumerate(form.tensors):
        chil, _, chir = b.shape
        t = np.einsum("asb,ctd->acstbd", np.conj(b), b).reshape(chil**2, 4, chir**2)
        tensors.append(t[keeps[k]][:, :, keeps[k + 1]])
    ladder = MpsLadder(tensors, 0, 0.0, trunc)
    return _right_canonical(ladder, renormalize=True)


def _right_canonical(ladder: MpsLadder, renormalize: bool) -> MpsLadder:
    tensors = [t.copy() for t in ladder.tensors]
    for k in range(len(tensors) - 1, 0, -1):
        chil, d, chir = tensors[k].shape
        q, r = np.linalg.qr(tensors[k].reshape(chil, d * chir).T)
        tensors[k] = q.T.reshape(-1, d, chir)
        tensors[k - 1] = np.tensordot(tensors[k - 1], r.T, axes=([2], [0]))
    norm = float(np.linalg.norm(tensors[0]))
    tensors[0] = tensors[0] / norm
    log_scale = ladder.log_scale if renormalize else ladder.log_scale + math.log(norm)
    return MpsLadder(tensors, 0, log_scale, ladder.truncation_weight)


def move_center(ladder: MpsLadder, target: int) -> MpsLadder:
    """Shift the orthogonality center with QR steps (state unchanged)."""
    out = ladder.copy()
    t = out.tensors
    while out.center < target:
        k = out.center
        chil, d, chir = t[k].shape
        q, r = np.linalg.qr(t[k].reshape(chil * d, chir))
        t[k] = q.reshape(chil, d, -1)
        t[k + 1] = np.tensordot(r, t[k + 1], axes=([1], [0]))
        out.center += 1
    while out.center > target:
        k = out.center
        chil, d, chir = t[k].shape
        q, r = np.linalg.qr(t[k].reshape(chil, d * chir).T)
        t[k] = q.T.reshape(-1, d, chir)
        t[k - 1] = np.tensordot(t[k - 1], r.T, axes=([2], [0]))
        out.center -= 1
    return out


def zz_gate(p_zz: float) -> np.ndarray:
    """16x16 diagonal two-rung filter: 1 where rung parities agree, else 1 - 2p."""
    agree = np.outer(RUNG_PARITY, RUNG_PARITY).reshape(-1)
    return np.diag(np.where(agree > 0, 1.0, 1.0 - 2.0 * p_zz))


def x_gate(p_x: float) -> np.ndarray:
    """4x4 single-rung filter (1 - p) I + p X_u X_l."""
    xx = np.kron(_PAULI["X"], _PAULI["X"])
    return (1.0 - p_x) * np.eye(4) + p_x * xx


def _zz_factors(p_zz: float):
    """Operator-Schmidt split of the ZZ gate: sum_k left[k] (x) right[k]."""
    left = np.stack([np.full(4, 1.0 - p_zz), p_zz * RUNG_PARITY])
    right = np.stack([np.ones(4), RUNG_PARITY])
    return left, right


def _apply_zz_pair(a, b, p_zz, policy, direction):
    """Filter the two rungs held by ``a`` (left) and ``b`` (right).

    Returns the new pair with the center on the right tensor when
    ``direction == "right"`` (else on the left) plus the kept norm and
    discarded weight.
    """
    left, right = _zz_factors(p_zz)
    chil, _, chim = a.shape
    chir = b.shape[2]
    # x[(a, s), (m, k)] and y[(m, k), (s, c)]
    x = np.einsum("ks,asm->asmk", left, a).reshape(chil * 4, chim * 2)
    y = np.einsum("ks,msc->mksc", right, b).reshape(chim * 2, 4 * chir)
    qx, rx = np.linalg.qr(x)
    qy, ry = np.linalg.qr(y.T)
    u, s, vt, disc = truncated_svd(rx @ ry.T, policy)
    norm = float(np.linalg.norm(s))
    s = s / norm
    if direction == "right":
        new_a = (qx @ u).reshape(chil, 4, -1)
        new_b = (s[:, None] * (vt @ qy.T)).reshape(-1, 4, chir)
    else:
        new_a = ((qx @ u) * s).reshape(chil, 4, -1)
        new_b = (vt @ qy.T).reshape(-1, 4, chir)
    return new_a, new_b, norm, disc


def _apply_rung(t: np.ndarray, op: np.ndarray) -> np.ndarray:
    return np.einsum("st,atb->asb", op, t)


def apply_filter_gates_mps(
    ladder: MpsLadder,
    channel: ChannelSpec,
    policy: TruncationPolicy = TruncationPolicy(),
    order: str = "left",
) -> MpsLadder:
    """Apply the channel's filter gates in one sweep with SVD truncation.

    ``order="left"`` sweeps the ZZ gates from the left edge to the right,
    ``"right"`` the reverse.  The norm removed at each step is folded into
    ``log_scale`` (or left in the tensors when ``policy.rescale`` is False).
    """
    if order not in ("left", "right"):
        raise ValueError("order must be 'left' or 'right'")
    L = ladder.L
    p_zz = channel.p_zz if channel.kind is not ChannelKind.X else 0.0
    p_x = channel.p_x if channel.kind is not ChannelKind.ZZ else 0.0
    if p_zz == 0.0 and p_x == 0.0:
        return ladder.copy()
    xg = x_gate(p_x) if p_x > 0.0 else None
    sites = list(range(L)) if order == "left" else list(range(L - 1, -1, -1))
    out = move_center(ladder, sites[0])
    t = out.tensors
    for step, k in enumerate(sites):
        if xg is not None:
            t[k] = _apply_rung(t[k], xg)
        if step == L - 1:
            break
        nxt = sites[step + 1]
        if p_zz == 0.0:
            out = move_center(out, nxt)
            t = out.tensors
            continue
        lo, hi = min(k, nxt), max(k, nxt)
        direction = "right" if order == "left" else "left"
        t[lo], t[hi], norm, disc = _apply_zz_pair(t[lo], t[hi], p_zz, policy, direction)
        if disc > policy.abort_threshold:
            raise TruncationAbort(disc, policy.abort_threshold, f"link ({lo}, {hi})")
        out.truncation_weight += disc
        out.center = nxt
        if norm == 0.0:
            raise ZeroDivisionError("filtered ladder has zero norm")
        if policy.rescale:
            out.log_scale += math.log(norm)
        else:
            t[nxt] = t[nxt] * norm
    c = out.center
    norm = float(np.linalg.norm(t[c]))
    if norm == 0.0:
        raise ZeroDivisionError("filtered ladder has zero norm")
    if policy.rescale:
        t[c] = t[c] / norm
        out.log_scale += math.log(norm)
    return out


def _transfer(tensors, ops=None):
    env = np.ones((1, 1))
    for k, a in enumerate(tensors):
        op = None if ops is None else ops.get(k)
        ket = a if op is None else np.einsum("st,atb->asb", op, a)
        env = np.einsum("ab,asc,bsd->cd", env, np.conj(a), ket, optimize=True)
    return env[0, 0]


def norm2(ladder: MpsLadder) -> float:
    """Contracted <<psi|psi>> of the tensors, excluding ``log_scale``."""
    return float(np.real(_transfer(ladder.tensors)))


def see_mps(ladder: MpsLadder) -> float:
    n2 = norm2(ladder)
    if n2 <= 0.0:
        raise ZeroDivisionError("ladder has zero norm")
    return -(2.0 * ladder.log_scale + math.log(n2))


def _rung_ops(L: int, ops) -> dict[int, np.ndarray]:
    per_site: dict[int, list[np.ndarray]] = {}
    for site, leg, axis in ops:
        if not 0 <= site < L:
            raise ValueError(f"site {site} out of range for L={L}")
        if leg not in ("u", "l"):
            raise ValueError(f"leg must be 'u' or 'l', got {leg!r}")
        pauli = _PAULI[str(axis).upper()]
        emb = np.kron(pauli, np.eye(2)) if leg == "u" else np.kron(np.eye(2), pauli)
        per_site.setdefault(site, []).append(emb)
    out = {}
    for site, mats in per_site.items():
        m = np.eye(4, dtype=complex)
        for op in mats:
            m = op @ m
        out[site] = m
    return out


def mps_expectation(ladder: MpsLadder, ops) -> float:
    """Normalized expectation of a Pauli string given as (site, leg, axis)."""
    rung = _rung_ops(ladder.L, ops)
    value = _transfer(ladder.tensors, rung) / _transfer(ladder.tensors)
    if abs(np.imag(value)) > 1e-10:
        raise ValueError("expectation value is not real")
    return float(np.real(value))


def mps_renyi2_correlator(ladder: MpsLadder, i: int, j: int) -> float:
    ops = [(s, leg, "Z") for s in (i, j) for leg in ("u", "l")]
    return mps_expectation(ladder, ops)


def mps_renyi2_susceptibility(ladder: MpsLadder, ref: int = 0) -> float:
    L = ladder.L
    total = sum(
        mps_renyi2_correlator(ladder, ref, (ref + r) % L) for r in range(1, L // 2 + 1)
    )
    return 2.0 / L * total


def mps_canonical_correlator(ladder: MpsLadder, i: int, j: int) -> float:
    """<<1|Z_iu Z_ju|rho>> / <<1|rho>> by contraction with identity rungs."""
    L = ladder.L
    for s in (i, j):
        if not 0 <= s < L:
            raise ValueError(f"site {s} out of range for L={L}")
    flip = np.kron(_PAULI["Z"], np.eye(2)).diagonal()

    def contract(with_ops: bool) -> float:
        env = np.ones(1)
        for k, a in enumerate(ladder.tensors):
            vec = RUNG_IDENTITY.copy()
            if with_ops:
                if k == i:
                    vec = vec * flip
                if k == j:
                    vec = vec * flip
            env = np.einsum("a,asb,s->b", env, a, vec)
        return float(env[0])

    denom = contract(False)
    if abs(denom) < 1e-300:
        raise ZeroDivisionError("overlap with the vectorized identity vanishes")
    return contract(True) / denom
