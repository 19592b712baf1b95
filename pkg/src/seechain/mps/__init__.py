"""Matrix-product-state backend (open boundaries)."""

from .chain import MPS, ConvergenceError, build_mpo, ground_state_mps, schmidt_form
from .ladder import (
    MpsLadder,
    TruncationAbort,
    apply_filter_gates_mps,
    doubled_mps,
    mps_canonical_correlator,
    mps_expectation,
    mps_renyi2_correlator,
    mps_renyi2_susceptibility,
    see_mps,
)
from .svd import TruncationPolicy, svd, truncated_svd
