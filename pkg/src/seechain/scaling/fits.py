"""Linear size fits of the SEE, 1/L extrapolation and power-law exponents."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..spin import Boundary

DUPLICATE_TOL = 1e-9
NEGATIVE_TOL = 1e-10


class Backend(str, enum.Enum):
    DENSE = "Dense"
    MPS = "MPS"
    AUTO = "Auto"


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class SeeSample:
    L: int
    p: float
    S_SE: float
    backend: Backend = Backend.DENSE
    truncation_weight: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "backend", Backend(self.backend))
        if not math.isfinite(self.S_SE) or self.S_SE < -NEGATIVE_TOL:
            raise ValueError(f"S_SE must be finite and non-negative, got {self.S_SE}")


@dataclass
class FitResult:
    """``S_SE = alpha * L - s0`` fitted over ``L_window``."""

    alpha: float
    s0: float
    residual_rms: float
    L_window: list[int] = field(default_factory=list)
    s0_stderr: float = 0.0

    @property
    def g(self) -> float:
        return math.exp(self.s0)

    @property
    def L_sd(self) -> int:
        return min(self.L_window)


def _dedupe(samples) -> dict[int, float]:
    by_L: dict[int, float] = {}
    for s in samples:
        if s.L in by_L:
            if abs(by_L[s.L] - s.S_SE) > DUPLICATE_TOL:
                raise FitError(
                    f"conflicting S_SE values for L={s.L}: {by_L[s.L]!r} vs {s.S_SE!r}"
                )
            continue
        by_L[s.L] = s.S_SE
    return by_L


def fit_linear_s0(samples) -> FitResult:
    """Ordinary least squares of S_SE against L at fixed p and backend."""
    samples = list(samples)
    if len({s.p for s in samples}) > 1:
        raise FitError("samples mix different p values")
    if len({s.backend for s in samples}) > 1:
        raise FitError("samples mix different backends")
    by_L = _dedupe(samples)
    if len(by_L) < 3:
        raise FitError(f"need at least 3 distinct sizes, got {sorted(by_L)}")
    Ls = sorted(by_L)
    x = np.array(Ls, dtype=float)
    y = np.array([by_L[L] for L in Ls])
    design = np.column_stack([x, np.ones_like(x)])
    (alpha, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ np.array([alpha, intercept])
    rms = float(np.sqrt(np.mean(resid**2)))
    return FitResult(float(alpha), float(-intercept), rms, Ls, intercept_stderr(Ls, rms))


def intercept_stderr(Ls, residual_rms: float) -> float:
    """Standard error of the fitted intercept from the residual scatter."""
    x = np.asarray(Ls, dtype=float)
    n = x.size
    if n <= 2:
        return 0.0
    sigma2 = residual_rms**2 * n / (n - 2)
    sxx = float(np.sum((x - x.mean()) ** 2))
    return math.sqrt(sigma2 * float(np.sum(x**2)) / (n * sxx))


def sliding_windows(Ls, size: int = 4) -> list[list[int]]:
    """Runs of ``size`` consecutive even sizes ``{L, L+2, ...}`` present in ``Ls``."""
    have = set(Ls)
    out = []
    for L in sorted(have):
        window = [L + 2 * k for k in range(size)]
        if all(w in have for w in window):
            out.append(window)
    return out


def fit_windows(samples, size: int = 4) -> list[FitResult]:
    samples = list(samples)
    fits = []
    for window in sliding_windows({s.L for s in samples}, size):
        fits.append(fit_linear_s0([s for s in samples if s.L in window]))
    return fits


def extrapolate_s0(fits) -> tuple[float, float]:
    """Line through (1/L_sd, s0); returns (slope, intercept at L_sd -> infinity).

    ``fits`` holds ``(L_sd, s0)`` pairs or :class:`FitResult` objects.
    """
    pts = [(f.L_sd, f.s0) if isinstance(f, FitResult) else tuple(f) for f in fits]
    if len({L for L, _ in pts}) < 3:
        raise FitError(f"need at least 3 windows, got {len(pts)}")
    x = np.array([1.0 / L for L, _ in pts])
    y = np.array([s for _, s in pts], dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def chord_distance(r, L: int):
    return L / math.pi * np.sin(math.pi * np.asarray(r, dtype=float) / L)


def fit_power_law(profile, L: int | None = None, boundary=Boundary.OPEN) -> float:
    """Exponent eta of ``|C(r)| ~ r**(-eta)`` from a log-log least-squares line.

    Nonpositive values are dropped.  Periodic chains use the chord distance
    ``(L / pi) sin(pi r / L)``, which needs ``L``.
    """
    pts = [(float(r), float(c)) for r, c in profile if c > 0.0 and r > 0]
    if len(pts) < 4:
        raise FitError(f"need at least 4 positive points, got {len(pts)}")
    r = np.array([p[0] for p in pts])
    c = np.array([p[1] for p in pts])
    if Boundary(boundary) is Boundary.PERIODIC:
        if L is None:
            raise ValueError("periodic power-law fits need the chain length L")
        r = chord_distance(r, L)
    slope, _ = np.polyfit(np.log(r), np.log(c), 1)
    return float(-slope)
