"""Identity and oracle-equivalence checks behind ``seechain verify``."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from ..doubled import (
    DEFAULT_DENSE_LIMIT,
    ChannelSpec,
    apply_channel,
    apply_zz_filter,
    canonical_correlator,
    observables,
    renyi2_correlator,
    renyi2_susceptibility,
    see,
    vectorize,
)
from ..ghz import (
    DENSE_MATRIX_LIMIT,
    Basis,
    ParityError,
    ghz_projector_sum,
    maximal_decohere_oracle,
    parity_pair_sign,
    shannon_renyi2,
)
from ..spin import Boundary, Model, ModelSpec, PureState, build_hamiltonian, solve_ground_state
from .sweep import SCHEMA_VERSION

IDENTITY_TOL = 1e-12
INVARIANT_TOL = 1e-10
MPS_TOL = 1e-6
ENERGY_TOL = 1e-8
SIGN_DELTAS = (0.15, 0.45, 0.75)
P_GRID = [round(0.05 * k, 10) for k in range(11)]
MPS_P_GRID = (0.1, 0.3, 0.5)


@dataclass
class Check:
    name: str
    L: int
    passed: bool
    value: float | None = None
    tolerance: float | None = None
    detail: str = ""

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _limit(value: float, tol: float, name: str, L: int, detail: str = "") -> Check:
    ok = bool(math.isfinite(value) and value < tol)
    return Check(name, L, ok, float(value), tol, detail)


def corrupt_state(state: PureState) -> PureState:
    """Flip the sign of one amplitude, breaking the global-flip pairing."""
    amps = state.amplitudes.copy()
    idx = int(np.argmax(np.abs(amps[: amps.size // 2])))
    amps[idx] = -amps[idx]
    return PureState(state.L, amps, state.energy)


def identity_checks(spec: ModelSpec, state: PureState, expected_sign: int | None) -> list[Check]:
    L = spec.L
    checks = []
    try:
        sign = parity_pair_sign(state)
        ok = expected_sign is None or sign == expected_sign
        checks.append(
            Check("parity_pair_sign", L, ok, float(sign), None,
                  "" if ok else f"expected {expected_sign:+d}, got {sign:+d}")
        )  # fmt: skip
    except ParityError as exc:
        checks.append(Check("parity_pair_sign", L, False, None, None, str(exc)))
        sign = None

    if L <= DEFAULT_DENSE_LIMIT:
        rho_d = apply_zz_filter(vectorize(state), 0.5, spec.boundary)
        s_half = see(rho_d)
        checks.append(_limit(abs(s_half - shannon_renyi2(state, Basis.GLASSY_GHZ)),
                             IDENTITY_TOL, "see_half_equals_ghz_shannon", L))  # fmt: skip
        if sign is not None:
            checks.append(
                _limit(abs(s_half - (shannon_renyi2(state, Basis.ZPRODUCT) - math.log(2))),
                       IDENTITY_TOL, "see_half_equals_z_shannon_minus_log2", L)
            )  # fmt: skip
        if L <= DENSE_MATRIX_LIMIT:
            channel = rho_d.density_matrix()
            beta_sum = maximal_decohere_oracle(state, spec.boundary)
            ghz_sum = ghz_projector_sum(state)
            checks.append(_limit(np.linalg.norm(channel - beta_sum), IDENTITY_TOL,
                                 "ghz_expansion_channel_vs_records", L))  # fmt: skip
            checks.append(_limit(np.linalg.norm(channel - ghz_sum), IDENTITY_TOL,
                                 "ghz_expansion_channel_vs_projectors", L))  # fmt: skip
            checks.append(_limit(np.linalg.norm(beta_sum - ghz_sum), IDENTITY_TOL,
                                 "ghz_expansion_records_vs_projectors", L))  # fmt: skip
    return checks


def invariant_checks(spec: ModelSpec, state: PureState, channel_kind="ZZ") -> list[Check]:
    L = spec.L
    if L > DEFAULT_DENSE_LIMIT:
        return []
    rho0 = vectorize(state)
    reports = []
    purities = []
    for p in P_GRID:
        ch = ChannelSpec.from_strength(channel_kind, p)
        ds = apply_channel(rho0, ch, spec.boundary)
        reports.append(observables(ds, ch))
        purities.append(ds.purity())
    c1 = np.array([[v for _, v in rep.c1_profile] for rep in reports])
    half = reports[-1]
    ds_half = apply_channel(rho0, ChannelSpec.from_strength(channel_kind, 0.5), spec.boundary)
    diag = max(abs(renyi2_correlator(ds_half, i, i) - 1.0) for i in range(L))
    low = 2.0**-L
    purity_ok = all(low * (1 - 1e-12) <= q <= 1.0 + 1e-12 for q in purities)
    checks = [
        _limit(abs(reports[0].S_SE), INVARIANT_TOL, "see_zero_at_p0", L),
        _limit(float(np.abs(c1 - c1[0]).max()), INVARIANT_TOL, "canonical_correlator_p_invariant", L),
        _limit(diag, INVARIANT_TOL, "renyi2_onsite_unity", L),
        Check("purity_bounds", L, purity_ok, float(min(purities)), low,
              f"purity range [{min(purities):.6g}, {max(purities):.6g}]"),
    ]  # fmt: skip
    if channel_kind == "ZZ":
        c2 = max(abs(v - 1.0) for _, v in half.c2_profile)
        checks.append(_limit(c2, INVARIANT_TOL, "renyi2_unity_at_half", L))
        checks.append(_limit(abs(half.chi2 - 1.0), INVARIANT_TOL, "susceptibility_unity_at_half", L))
    return checks


def mps_checks(spec: ModelSpec, state: PureState, chi_max: int, svd_cutoff: float) -> list[Check]:
    """Dense-versus-MPS comparison after the ZZ filter (Open boundaries)."""
    from ..mps.chain import ground_state_mps
    from ..mps.ladder import (
        apply_filter_gates_mps,
        doubled_mps,
        mps_canonical_correlator,
        mps_renyi2_correlator,
        mps_renyi2_susceptibility,
        see_mps,
    )
    from ..mps.svd import TruncationPolicy

    L = spec.L
    policy = TruncationPolicy(chi_max=chi_max, svd_cutoff=svd_cutoff)
    dmrg = ground_state_mps(spec, chi_max=chi_max, tol=1e-12)
    checks = [_limit(abs(dmrg.energy - state.energy), ENERGY_TOL, "mps_ground_energy", L)]
    ladder0 = doubled_mps(dmrg.mps, policy)
    rho0 = vectorize(state)
    for p in MPS_P_GRID:
        ch = ChannelSpec.from_strength("ZZ", p)
        ds = apply_channel(rho0, ch, Boundary.OPEN)
        lad = apply_filter_gates_mps(ladder0, ch, policy)
        c2 = max(abs(mps_renyi2_correlator(lad, 0, j) - renyi2_correlator(ds, 0, j))
                 for j in range(L))  # fmt: skip
        detail = f"p={p} trunc_weight={lad.truncation_weight:.3e}"
        checks += [
            _limit(abs(see_mps(lad) - see(ds)), MPS_TOL, f"mps_see_p{p}", L, detail),
            _limit(abs(mps_renyi2_susceptibility(lad) - renyi2_susceptibility(ds)),
                   MPS_TOL, f"mps_chi2_p{p}", L, detail),
            _limit(c2, MPS_TOL, f"mps_c2_profile_p{p}", L, detail),
            _limit(abs(mps_canonical_correlator(lad, 0, L // 2)
                       - canonical_correlator(ds, 0, L // 2)), MPS_TOL, f"mps_c1_p{p}", L, detail),
        ]  # fmt: skip
    return checks


def run_verification(
    model,
    L_list,
    delta: float = 0.0,
    boundary=Boundary.PERIODIC,
    include_mps: bool = False,
    chi_max: int = 64,
    svd_cutoff: float = 1e-14,
    corrupt: bool = False,
    seed: int = 0,
) -> dict:
    model = Model(model)
    boundary = Boundary(boundary)
    checks: list[Check] = []
    for L in sorted(L_list):
        spec = ModelSpec(model, L, delta=delta, boundary=boundary)
        state = solve_ground_state(build_hamiltonian(spec), seed=seed).state
        probe = corrupt_state(state) if corrupt else state
        expected = 1 if model is Model.TFIM else None
        checks += identity_checks(spec, probe, expected)
        if model is Model.XXZ:
            signs = {}
            for d in SIGN_DELTAS:
                s = solve_ground_state(
                    build_hamiltonian(ModelSpec(model, L, delta=d, boundary=boundary)), seed=seed
                ).state
                try:
                    signs[d] = parity_pair_sign(s)
                except ParityError:
                    signs[d] = 0
            ok = len(set(signs.values())) == 1 and 0 not in signs.values()
            checks.append(Check("parity_sign_delta_independent", L, ok, None, None,
                                ", ".join(f"{d}:{v:+d}" for d, v in signs.items())))  # fmt: skip
        checks += invariant_checks(spec, state)
        if include_mps:
            if boundary is not Boundary.OPEN:
                checks.append(Check("mps_equivalence", L, False, None, None,
                                    "MPS checks need Open boundaries"))  # fmt: skip
            else:
                checks += mps_checks(spec, state, chi_max, svd_cutoff)
    return {
        "schema_version": SCHEMA_VERSION,
        "model": model.value,
        "delta": delta,
        "boundary": boundary.value,
        "L": sorted(L_list),
        "corrupted": corrupt,
        "passed": all(c.passed for c in checks),
        "checks": [c.as_dict() for c in checks],
    }
