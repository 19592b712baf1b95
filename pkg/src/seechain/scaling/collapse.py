"""Finite-size-scaling collapse of g-function curves.

The ansatz is ``g = L**(zeta/nu) * G((p - p_c) * L**(1/nu))``.  Quality is
measured Houdayer-Hartmann style: each point is compared with a weighted
local line through the bracketing points of every other size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

UNCERTAINTY_FLOOR = 1e-4
DEFAULT_NU_BOUNDS = (0.5, 6.0)
DEFAULT_ZETA_BOUNDS = (-0.5, 0.5)
N_RESTARTS = 16
PENALTY = 1e12


class CollapseError(RuntimeError):
    pass


@dataclass
class CollapseResult:
    p_c: float
    nu: float
    zeta: float
    quality: float = 0.0
    trace: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")


@dataclass(frozen=True)
class _Curves:
    sizes: np.ndarray  # size label of every point
    p: np.ndarray
    g: np.ndarray
    dg: np.ndarray


def _flatten(curves) -> _Curves:
    if len(curves) < 3:
        raise CollapseError(f"need at least 3 system sizes, got {len(curves)}")
    sizes, ps, gs, dgs = [], [], [], []
    for L in sorted(curves):
        for point in sorted(curves[L]):
            p, g = point[0], point[1]
            dg = point[2] if len(point) > 2 else 0.0
            sizes.append(L)
            ps.append(p)
            gs.append(g)
            dgs.append(max(float(dg), UNCERTAINTY_FLOOR))
    return _Curves(
        np.array(sizes, dtype=float), np.array(ps), np.array(gs), np.array(dgs)
    )


def scale(data: _Curves, p_c: float, nu: float, zeta: float):
    """Scaled abscissa, ordinate and ordinate error for every point."""
    x = (data.p - p_c) * data.sizes ** (1.0 / nu)
    factor = data.sizes ** (-zeta / nu)
    return x, data.g * factor, data.dg * factor


def _quality(data: _Curves, params, min_points: int) -> tuple[float, int]:
    x, y, dy = scale(data, *params)
    n = x.size
    # weighted sums over the bracketing neighbours of each point
    K, Kx, Ky, Kxx, Kxy = (np.zeros(n) for _ in range(5))
    has_nb = np.zeros(n, dtype=bool)
    labels = np.unique(data.sizes)
    groups = []
    for L in labels:
        idx = np.flatnonzero(data.sizes == L)
        groups.append(idx[np.argsort(x[idx], kind="stable")])
    for a, own in enumerate(groups):
        for b, other in enumerate(groups):
            if a == b:
                continue
            xs = x[other]
            k = np.searchsorted(xs, x[own], side="right")
            at_end = (k == xs.size) & (x[own] == xs[-1])
            k = np.where(at_end, xs.size - 1, k)
            ok = (k > 0) & (k < xs.size)
            pts = own[ok]
            has_nb[pts] = True
            for nb in (other[k[ok] - 1], other[k[ok]]):
                w = 1.0 / dy[nb] ** 2
                K[pts] += w
                Kx[pts] += w * x[nb]
                Ky[pts] += w * y[nb]
                Kxx[pts] += w * x[nb] ** 2
                Kxy[pts] += w * x[nb] * y[nb]
    det = K * Kxx - Kx**2
    use = has_nb & (det > 0.0)
    used = int(use.sum())
    if used == 0 or used < min_points:
        return PENALTY, used
    xi, d = x[use], det[use]
    ybar = ((Kxx * Ky - Kx * Kxy)[use] + xi * (K * Kxy - Kx * Ky)[use]) / d
    dybar2 = (Kxx[use] - 2.0 * xi * Kx[use] + xi**2 * K[use]) / d
    terms = (y[use] - ybar) ** 2 / (dy[use] ** 2 + dybar2)
    return float(terms.sum() / used), used


def collapse_quality(curves, p_c: float, nu: float, zeta: float) -> float:
    data = _flatten(curves)
    q, _ = _quality(data, (p_c, nu, zeta), 1)
    return q


def fss_collapse(
    curves,
    init: CollapseResult | None = None,
    bounds=None,
    seed: int = 0,
    n_restarts: int = N_RESTARTS,
    min_overlap: float = 0.3,
) -> CollapseResult:
    """Best (p_c, nu, zeta) over seeded Nelder-Mead restarts.

    ``curves`` maps a size label to ``(p, g)`` or ``(p, g, dg)`` points.
    ``bounds`` is ``[(p lo, p hi), (nu lo, nu hi), (zeta lo, zeta hi)]``;
    p_c defaults to the data range.  Restarts are reduced by lowest quality,
    ties broken by lower p_c then lower nu.
    """
    data = _flatten(curves)
    if bounds is None:
        bounds = [
            (float(data.p.min()), float(data.p.max())),
            DEFAULT_NU_BOUNDS,
            DEFAULT_ZETA_BOUNDS,
        ]
    bounds = [tuple(map(float, b)) for b in bounds]
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    min_points = max(3, int(math.ceil(min_overlap * data.p.size)))

    rng = np.random.default_rng(seed)
    starts = []
    if init is not None:
        starts.append(np.clip([init.p_c, init.nu, init.zeta], lo, hi))
    while len(starts) < n_restarts:
        starts.append(lo + (hi - lo) * rng.random(3))

    def objective(params):
        return _quality(data, params, min_points)[0]

    runs = []
    evaluations = 0
    for x0 in starts:
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=bounds,
            options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": 4000},
        )
        evaluations += int(res.nfev)
        runs.append((float(res.fun), float(res.x[0]), float(res.x[1]), float(res.x[2])))

    best = min(runs, key=lambda r: (r[0], r[1], r[2]))
    quality, p_c, nu, zeta = best
    params = np.array([p_c, nu, zeta])
    if np.any(params < lo - 1e-12) or np.any(params > hi + 1e-12):
        raise CollapseError(f"optimizer left the bounds: {params.tolist()} not in {bounds}")
    if quality >= PENALTY:
        _, used = _quality(data, params, 0)
        raise CollapseError(
            f"insufficient overlap after scaling: {used} of {data.p.size} points "
            f"have neighbours from other sizes (need {min_points})"
        )
    qualities = sorted(r[0] for r in runs)
    trace = {
        "restarts": len(runs),
        "evaluations": evaluations,
        "best_quality": quality,
        "median_quality": float(np.median(qualities)),
        "converged_restarts": int(sum(q <= quality * (1 + 1e-6) + 1e-12 for q in qualities)),
    }
    return CollapseResult(p_c, nu, zeta, quality, trace)


def master_curve(curves, result: CollapseResult) -> dict:
    """Scaled ``(x, y)`` points per size under the fitted parameters."""
    out = {}
    for L in sorted(curves):
        pts = sorted(curves[L])
        p = np.array([q[0] for q in pts])
        g = np.array([q[1] for q in pts])
        x = (p - result.p_c) * L ** (1.0 / result.nu)
        y = g * L ** (-result.zeta / result.nu)
        out[L] = list(zip(x.tolist(), y.tolist()))
    return out
