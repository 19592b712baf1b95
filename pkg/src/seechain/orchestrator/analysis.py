"""Fit and collapse stages operating on sweep outputs."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from collections import defaultdict

from ..doubled import ChannelKind
from ..scaling.collapse import UNCERTAINTY_FLOOR, CollapseResult, fss_collapse, master_curve
from ..scaling.fits import (
    FitError,
    SeeSample,
    extrapolate_s0,
    fit_linear_s0,
    intercept_stderr,
    sliding_windows,
)
from ..scaling.reference import (
    LITERATURE_COLLAPSE,
    LITERATURE_P_WINDOW,
    reference_g_values,
)
from .config import ConfigError
from .sweep import SCHEMA_VERSION, fmt, read_sweep_csv

FITS_CSV = "fits.csv"
FIT_REPORT = "fit_report.json"
COLLAPSE_JSON = "collapse.json"
FITS_HEADER = ["model", "delta", "channel", "p", "window", "alpha", "s0", "g", "residual_rms"]


class InputError(ConfigError):
    """Malformed or insufficient input files (exit code 2)."""


def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _strength(row: dict) -> float:
    return row["p_x"] if row["channel"] == ChannelKind.X.value else row["p_zz"]


def window_label(Ls) -> str:
    return "-".join(str(L) for L in Ls)


def parse_window(label: str) -> list[int]:
    return [int(x) for x in label.split("-")]


def _reference(model: str, delta: float, channel: str):
    try:
        return reference_g_values(model, delta, channel)
    except ValueError:
        return None


def run_fit(sweep_csv: str, out_dir: str, window: int = 4) -> dict:
    """Per-p window fits into ``fits.csv`` plus a JSON extrapolation report."""
    try:
        rows = read_sweep_csv(sweep_csv)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from None
    if window < 3:
        raise InputError("fit windows need at least 3 sizes")
    groups: dict[tuple, list[dict]] = defaultdict(list)
    for row in rows:
        groups[(row["model"], row["delta"], row["channel"])].append(row)

    fit_rows = []
    report_groups = []
    for (model, delta, channel), grp in sorted(groups.items()):
        for key in ("boundary", "backend"):
            values = {r[key] for r in grp}
            if len(values) > 1:
                raise InputError(
                    f"{sweep_csv}: {model} delta={delta} {channel} mixes {key} values {sorted(values)}"
                )
        by_p: dict[float, list[SeeSample]] = defaultdict(list)
        for r in grp:
            by_p[_strength(r)].append(
                SeeSample(r["L"], _strength(r), r["S_SE"], r["backend"], r["trunc_weight"])
            )
        ref = _reference(model, delta, channel)
        extrapolations = []
        max_p_fits = []
        for p in sorted(by_p):
            samples = by_p[p]
            fits = []
            for win in sliding_windows({s.L for s in samples}, window):
                try:
                    fit = fit_linear_s0([s for s in samples if s.L in win])
                except FitError as exc:
                    raise InputError(f"{sweep_csv}: p={p}: {exc}") from None
                fits.append(fit)
                fit_rows.append(
                    [model, fmt(delta), channel, fmt(p), window_label(win),
                     fmt(fit.alpha), fmt(fit.s0), fmt(fit.g), fmt(fit.residual_rms)]
                )  # fmt: skip
            if len(fits) >= 3:
                slope, intercept = extrapolate_s0(fits)
                extrapolations.append(
                    {"p": p, "slope": slope, "intercept": intercept,
                     "windows": [window_label(f.L_window) for f in fits]}
                )  # fmt: skip
            if p == 0.5 and fits:
                for f in fits:
                    entry = {"window": window_label(f.L_window), "L_sd": f.L_sd,
                             "s0": f.s0, "g": f.g}  # fmt: skip
                    if ref is not None:
                        entry["relative_deviation"] = (f.g - ref) / ref
                    max_p_fits.append(entry)
        report_groups.append(
            {
                "model": model,
                "delta": delta,
                "channel": channel,
                "reference_g_at_half": ref,
                "fits_at_half": max_p_fits,
                "extrapolations": extrapolations,
            }
        )
    if not fit_rows:
        raise InputError(
            f"{sweep_csv}: no window of {window} consecutive even sizes is present"
        )
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, FITS_CSV), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FITS_HEADER)
        writer.writerows(fit_rows)
    report = {
        "schema_version": SCHEMA_VERSION,
        "source": {"file": os.path.basename(sweep_csv), "sha256": _sha256(sweep_csv)},
        "window_size": window,
        "groups": report_groups,
    }
    with open(os.path.join(out_dir, FIT_REPORT), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def read_fits_csv(path: str) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != FITS_HEADER:
                raise InputError(f"{path}: unexpected header {header}")
            rows = []
            for n, rec in enumerate(reader, start=2):
                if len(rec) != len(FITS_HEADER):
                    raise InputError(f"{path}:{n}: expected {len(FITS_HEADER)} fields")
                row = dict(zip(FITS_HEADER, rec))
                for k in ("delta", "p", "alpha", "s0", "g", "residual_rms"):
                    row[k] = float(row[k])
                rows.append(row)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    return rows


def collapse_curves(rows: list[dict], p_window=None) -> dict:
    """``{L_sd: [(p, g, dg)]}`` with residual-derived uncertainties."""
    curves: dict[int, list] = defaultdict(list)
    for r in rows:
        if p_window is not None and not p_window[0] <= r["p"] <= p_window[1]:
            continue
        Ls = parse_window(r["window"])
        dg = max(r["g"] * intercept_stderr(Ls, r["residual_rms"]), UNCERTAINTY_FLOOR)
        curves[min(Ls)].append((r["p"], r["g"], dg))
    return dict(curves)


def run_collapse(
    fits_csv: str,
    out_dir: str,
    init: CollapseResult | None = None,
    bounds=None,
    p_window=LITERATURE_P_WINDOW,
    seed: int = 0,
) -> dict:
    rows = read_fits_csv(fits_csv)
    keys = {(r["model"], r["delta"], r["channel"]) for r in rows}
    if len(keys) != 1:
        raise InputError(f"{fits_csv}: expected a single model/channel group, found {sorted(keys)}")
    sizes = {window_label(parse_window(r["window"])) for r in rows}
    curves = collapse_curves(rows, p_window)
    if len(curves) < 3:
        raise InputError(
            f"{fits_csv}: collapse needs at least 3 window sizes inside p window "
            f"{p_window}, found {sorted(curves)}"
        )
    result = fss_collapse(curves, init=init, bounds=bounds, seed=seed)
    model, delta, channel = keys.pop()
    report = {
        "schema_version": SCHEMA_VERSION,
        "source": {"file": os.path.basename(fits_csv), "sha256": _sha256(fits_csv)},
        "group": {"model": model, "delta": delta, "channel": channel},
        "windows": sorted(sizes, key=lambda w: parse_window(w)[0]),
        "p_window": list(p_window) if p_window is not None else None,
        "p_window_restricted": p_window is not None,
        "result": {
            "p_c": result.p_c,
            "nu": result.nu,
            "zeta": result.zeta,
            "quality": result.quality,
        },
        "optimizer": result.trace,
        "init": None if init is None else {"p_c": init.p_c, "nu": init.nu, "zeta": init.zeta},
        "master_curve": {str(k): v for k, v in master_curve(
            {L: [(p, g) for p, g, _ in pts] for L, pts in curves.items()}, result
        ).items()},
        "reference": dict(
            LITERATURE_COLLAPSE,
            note="large-size estimate for XXZ at Delta=0.45; not reproducible at desk sizes",
        ),
    }
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, COLLAPSE_JSON), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not math.isfinite(result.quality):
        raise FitError("collapse quality is not finite")
    return report
