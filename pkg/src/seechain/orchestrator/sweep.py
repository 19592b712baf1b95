"""Sweep execution with ordered, crash-safe persistence."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import __version__
from ..doubled import (
    ChannelKind,
    ChannelSpec,
    DenseLimitError,
    apply_channel,
    observables,
    vectorize,
)
from ..ghz import Basis, shannon_renyi2
from ..lanczos import LanczosError
from ..mps.chain import ConvergenceError, ground_state_mps
from ..mps.ladder import (
    TruncationAbort,
    apply_filter_gates_mps,
    doubled_mps,
    mps_canonical_correlator,
    mps_renyi2_correlator,
    mps_renyi2_susceptibility,
    see_mps,
)
from ..mps.svd import SvdError, TruncationPolicy
from ..scaling.fits import Backend
from ..spin import ModelSpec, build_hamiltonian, expectation_pauli_string, solve_ground_state
from .config import ConfigError, SweepConfig

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SWEEP_CSV = "see_sweep.csv"
MANIFEST = "manifest.json"
SWEEP_HEADER = [
    "model", "delta", "L", "boundary", "channel", "p_zz", "p_x", "backend",
    "chi_max", "S_SE", "chi2", "c2_half", "c1_half", "trunc_weight", "seed",
]  # fmt: skip
DMRG_TOL = 1e-12

NUMERICAL_ERRORS = (
    ArithmeticError,
    LanczosError,
    ConvergenceError,
    SvdError,
    TruncationAbort,
    DenseLimitError,
    MemoryError,
    np.linalg.LinAlgError,
)


def fmt(x) -> str:
    """17 significant digits, the CSV float convention (no negative zero)."""
    return format(float(x) + 0.0, ".17g")


@dataclass(frozen=True)
class PointTask:
    spec: ModelSpec
    channel: ChannelSpec
    backend: Backend
    chi_max: int
    svd_cutoff: float
    dense_limit: int
    seed: int

    @property
    def key(self) -> tuple[int, float]:
        return (self.spec.L, self.channel.strength)


@dataclass
class PointResult:
    key: tuple[int, float]
    row: list[str] | None
    status: str
    reason: str = ""
    wall_clock: float = 0.0
    diagnostics: dict = dataclasses.field(default_factory=dict)


@lru_cache(maxsize=8)
def _dense_ground_state(spec: ModelSpec, seed: int):
    return solve_ground_state(build_hamiltonian(spec), seed=seed).state


@lru_cache(maxsize=8)
def _mps_ground_state(spec: ModelSpec, chi_max: int, seed: int):
    return ground_state_mps(spec, chi_max=chi_max, tol=DMRG_TOL, seed=seed)


def _dense_point(task: PointTask):
    spec, channel = task.spec, task.channel
    state = _dense_ground_state(spec, task.seed)
    L = spec.L
    if L > task.dense_limit and channel.kind is ChannelKind.ZZ and channel.p_zz == 0.5:
        # maximal ZZ decoherence has a closed form in the glassy GHZ basis
        c1 = expectation_pauli_string(state, [(0, "Z"), (L // 2, "Z")])
        return shannon_renyi2(state, Basis.GLASSY_GHZ), 1.0, 1.0, c1, 0.0, {
            "method": "ghz-identity"
        }
    ds = apply_channel(vectorize(state, task.dense_limit), channel, spec.boundary)
    rep = observables(ds, channel)
    return rep.S_SE, rep.chi2, rep.c2_half, rep.c1_half, 0.0, {"method": "dense"}


def _mps_point(task: PointTask):
    spec, channel = task.spec, task.channel
    L = spec.L
    policy = TruncationPolicy(chi_max=task.chi_max, svd_cutoff=task.svd_cutoff)
    dmrg = _mps_ground_state(spec, task.chi_max, task.seed)
    ladder = apply_filter_gates_mps(doubled_mps(dmrg.mps, policy), channel, policy)
    diag = {
        "method": "mps",
        "dmrg_energy": dmrg.energy,
        "dmrg_truncation": dmrg.truncation_weight,
        "max_bond": max(ladder.bonds, default=1),
    }
    return (
        see_mps(ladder),
        mps_renyi2_susceptibility(ladder),
        mps_renyi2_correlator(ladder, 0, L // 2),
        mps_canonical_correlator(ladder, 0, L // 2),
        ladder.truncation_weight,
        diag,
    )


def evaluate_point(task: PointTask) -> PointResult:
    start = time.perf_counter()
    try:
        if task.backend is Backend.DENSE:
            values = _dense_point(task)
        else:
            values = _mps_point(task)
    except NUMERICAL_ERRORS as exc:
        return PointResult(
            task.key, None, "error", f"{type(exc).__name__}: {exc}",
            time.perf_counter() - start,
        )  # fmt: skip
    S, chi2, c2, c1, trunc, diag = values
    if not all(math.isfinite(v) for v in (S, chi2, c2, c1)):
        return PointResult(task.key, None, "error", "non-finite observable",
                           time.perf_counter() - start)  # fmt: skip
    spec = task.spec
    row = [
        spec.model.value,
        fmt(spec.delta),
        str(spec.L),
        spec.boundary.value,
        task.channel.kind.value,
        fmt(task.channel.p_zz),
        fmt(task.channel.p_x),
        task.backend.value,
        str(task.chi_max if task.backend is Backend.MPS else 0),
        fmt(S),
        fmt(chi2),
        fmt(c2),
        fmt(c1),
        fmt(trunc),
        str(task.seed),
    ]
    return PointResult(task.key, row, "ok", "", time.perf_counter() - start, diag)


def build_tasks(cfg: SweepConfig) -> list[PointTask]:
    tasks = []
    for L in sorted(cfg.L_list):
        for p in sorted(cfg.p_grid):
            tasks.append(
                PointTask(
                    cfg.model_spec(L),
                    ChannelSpec.from_strength(cfg.channel, p),
                    cfg.backend_for(L),
                    cfg.chi_max,
                    cfg.svd_cutoff,
                    cfg.dense_limit,
                    cfg.seed,
                )
            )
    return tasks


def _atomic_write_json(path: str, payload: dict) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _point_entry(task: PointTask) -> dict:
    return {
        "L": task.spec.L,
        "p": task.channel.strength,
        "backend": task.backend.value,
        "status": "pending",
    }


class SweepRunner:
    """Runs a sweep into ``out_dir``; resumes an interrupted run of the same config."""

    def __init__(self, cfg: SweepConfig, out_dir: str):
        self.cfg = cfg
        self.out_dir = out_dir
        self.csv_path = os.path.join(out_dir, SWEEP_CSV)
        self.manifest_path = os.path.join(out_dir, MANIFEST)
        self.tasks = build_tasks(cfg)

    def _fresh_manifest(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "config_hash": self.cfg.config_hash,
            "config": self.cfg.canonical(),
            "points": [_point_entry(t) for t in self.tasks],
            "complete": False,
        }

    def _prepare(self) -> dict:
        try:
            os.makedirs(self.out_dir, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"output directory {self.out_dir!r} is not writable: {exc}")
        if not os.access(self.out_dir, os.W_OK):
            raise ConfigError(f"output directory {self.out_dir!r} is not writable")
        manifest = None
        if os.path.exists(self.manifest_path):
            with open(self.manifest_path) as fh:
                manifest = json.load(fh)
            if manifest.get("config_hash") != self.cfg.config_hash:
                raise ConfigError(
                    f"{self.out_dir!r} holds results of a different configuration "
                    f"(hash {manifest.get('config_hash', '?')[:12]}); choose another --out"
                )
        if manifest is None:
            manifest = self._fresh_manifest()
            with open(self.csv_path, "w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(SWEEP_HEADER)
            _atomic_write_json(self.manifest_path, manifest)
            return manifest
        self._truncate_to_manifest(manifest)
        return manifest

    def _truncate_to_manifest(self, manifest: dict) -> None:
        """Drop CSV rows written after the last manifest update."""
        ok = [(pt["L"], pt["p"]) for pt in manifest["points"] if pt["status"] == "ok"]
        if not os.path.exists(self.csv_path):
            if ok:
                raise ConfigError(f"{self.csv_path} is missing but the manifest lists results")
            with open(self.csv_path, "w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerow(SWEEP_HEADER)
            return
        with open(self.csv_path, newline="") as fh:
            lines = fh.read().splitlines(keepends=True)
        keep = lines[: 1 + len(ok)]
        if len(keep) < 1 + len(ok):
            raise ConfigError(f"{self.csv_path} has fewer rows than the manifest records")
        if len(lines) > len(keep):
            log.warning("dropping %d unrecorded row(s) from %s", len(lines) - len(keep), self.csv_path)
        with open(self.csv_path, "w", newline="") as fh:
            fh.writelines(keep)
            fh.flush()
            os.fsync(fh.fileno())

    def _record(self, manifest: dict, index: int, res: PointResult, csv_fh) -> None:
        if res.row is not None:
            csv.writer(csv_fh, lineterminator="\n").writerow(res.row)
            csv_fh.flush()
            os.fsync(csv_fh.fileno())
        entry = manifest["points"][index]
        entry["status"] = res.status
        entry["wall_clock_s"] = round(res.wall_clock, 6)
        if res.reason:
            entry["reason"] = res.reason
        if res.row is not None:
            entry["trunc_weight"] = float(res.row[SWEEP_HEADER.index("trunc_weight")])
        if res.diagnostics:
            entry["diagnostics"] = res.diagnostics
        _atomic_write_json(self.manifest_path, manifest)

    def run(self, workers: int | None = None, after_point=None) -> dict:
        """Execute pending points; returns the final manifest.

        ``after_point(index)`` is called after each point is persisted.
        """
        manifest = self._prepare()
        pending = [i for i, pt in enumerate(manifest["points"]) if pt["status"] == "pending"]
        workers = workers or self.cfg.workers
        with open(self.csv_path, "a", newline="") as csv_fh:
            if workers <= 1:
                for i in pending:
                    res = evaluate_point(self.tasks[i])
                    self._record(manifest, i, res, csv_fh)
                    if after_point:
                        after_point(i)
            else:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    futures = {i: pool.submit(evaluate_point, self.tasks[i]) for i in pending}
                    # persist in (L, p) order whatever the completion order
                    for i in pending:
                        self._record(manifest, i, futures[i].result(), csv_fh)
                        if after_point:
                            after_point(i)
        manifest["complete"] = True
        _atomic_write_json(self.manifest_path, manifest)
        return manifest


def read_sweep_csv(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if header != SWEEP_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = []
        for n, rec in enumerate(reader, start=2):
            if len(rec) != len(SWEEP_HEADER):
                raise ValueError(f"{path}:{n}: expected {len(SWEEP_HEADER)} fields, got {len(rec)}")
            row = dict(zip(SWEEP_HEADER, rec))
            try:
                for k in ("delta", "p_zz", "p_x", "S_SE", "chi2", "c2_half", "c1_half", "trunc_weight"):
                    row[k] = float(row[k])
                for k in ("L", "chi_max", "seed"):
                    row[k] = int(row[k])
            except ValueError as exc:
                raise ValueError(f"{path}:{n}: {exc}") from None
            rows.append(row)
    return rows
