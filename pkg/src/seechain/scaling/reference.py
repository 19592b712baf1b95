"""Closed-form g-function references and SWSSB phase labels."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ..doubled import ChannelKind
from ..spin import Model

THETA_C2 = 0.5
THETA_C1 = 0.1

# large-size estimates for the XXZ chain at Delta = 0.45, kept for comparison
LITERATURE_COLLAPSE = {"p_c": 0.439, "nu": 2.519, "zeta": 0.007}
LITERATURE_P_WINDOW = (0.2, 0.5)
LITERATURE_S0_FIXTURE = {"delta": 0.45, "p_zz": 0.466, "L": [26, 28, 30, 32], "s0": 1.0019}


def luttinger_k(delta: float) -> float:
    """Luttinger parameter K = pi / (2 (pi - arccos Delta)) for |Delta| < 1."""
    if not -1.0 < delta < 1.0:
        raise ValueError(f"Delta must lie in (-1, 1), got {delta}")
    return math.pi / (2.0 * (math.pi - math.acos(delta)))


def reference_g_values(model, delta: float | None = None, channel=ChannelKind.ZZ) -> float:
    """Expected e^{s0} at maximal decoherence."""
    model = Model(model)
    channel = ChannelKind(channel)
    if model is Model.TFIM:
        if channel is ChannelKind.ZZ:
            return 1.0
        if channel is ChannelKind.XPLUSZZ:
            return 2.0
        raise ValueError("no reference value for the TFIM under pure X decoherence")
    if channel is not ChannelKind.ZZ:
        raise ValueError("the XXZ reference is defined for ZZ decoherence only")
    if delta is None:
        raise ValueError("the XXZ reference needs Delta")
    return 2.0 * math.sqrt(2.0 * luttinger_k(delta))


class Phase(str, enum.Enum):
    SYMMETRIC = "Symmetric"
    SWSSB = "SWSSB"
    STRONG_TO_TRIVIAL = "StrongToTrivial"


@dataclass(frozen=True)
class PhaseLabel:
    phase: Phase
    c2: float
    c1: float


def classify_phase(
    c2_longrange: float,
    c1_longrange: float,
    theta_c2: float = THETA_C2,
    theta_c1: float = THETA_C1,
) -> PhaseLabel:
    """Heuristic label from the correlators at distance L/2."""
    c2 = abs(c2_longrange)
    c1 = abs(c1_longrange)
    if c2 >= theta_c2 and c1 <= theta_c1:
        phase = Phase.SWSSB
    elif c2 >= theta_c2 and c1 >= theta_c1:
        phase = Phase.STRONG_TO_TRIVIAL
    else:
        phase = Phase.SYMMETRIC
    return PhaseLabel(phase, float(c2_longrange), float(c1_longrange))
