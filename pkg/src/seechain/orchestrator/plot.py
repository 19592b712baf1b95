"""Static plot scripts and tidy data bundles from a results directory."""

from __future__ import annotations

import csv
import json
import os

from .analysis import COLLAPSE_JSON, FITS_CSV, InputError, read_fits_csv
from .sweep import SWEEP_CSV, fmt, read_sweep_csv

PLOT_DIR = "plots"

_SCRIPT_HEAD = '''"""Generated by seechain plot; renders {png} from {data}."""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))

with open(os.path.join(HERE, "{data}"), newline="") as fh:
    rows = list(csv.DictReader(fh))

series = {{}}
for r in rows:
    series.setdefault(r["{label}"], []).append((float(r["{x}"]), float(r["{y}"])))

fig, ax = plt.subplots(figsize=(5, 3.6))
for name in sorted(series, key=lambda s: [int(t) for t in s.split("-")]):
    pts = sorted(series[name])
    ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3, label="{label_text}" + name)
'''

_SCRIPT_TAIL = '''ax.set_xlabel("{xlabel}")
ax.set_ylabel("{ylabel}")
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(os.path.join(HERE, "{png}"), dpi=150)
'''


def _script(data, png, label, x, y, label_text, xlabel, ylabel, extra="") -> str:
    body = _SCRIPT_HEAD.format(data=data, png=png, label=label, x=x, y=y, label_text=label_text)
    return body + extra + _SCRIPT_TAIL.format(xlabel=xlabel, ylabel=ylabel, png=png)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def run_plot(results_dir: str) -> list[str]:
    """Write plot scripts and their data files; returns the created paths."""
    sweep = os.path.join(results_dir, SWEEP_CSV)
    if not os.path.exists(sweep):
        expected = ", ".join([SWEEP_CSV, f"{FITS_CSV} (optional)", f"{COLLAPSE_JSON} (optional)"])
        raise InputError(f"{results_dir}: no {SWEEP_CSV} found; expected files: {expected}")
    try:
        rows = read_sweep_csv(sweep)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = os.path.join(results_dir, PLOT_DIR)
    os.makedirs(out, exist_ok=True)
    written = []

    def emit(name, text):
        path = os.path.join(out, name)
        with open(path, "w") as fh:
            fh.write(text)
        written.append(path)

    chi_rows = sorted(
        (r["L"], r["p_x"] if r["channel"] == "X" else r["p_zz"], r["chi2"], r["S_SE"]) for r in rows
    )
    _write_csv(os.path.join(out, "chi2_vs_p.csv"), ["L", "p", "chi2", "S_SE"],
               [[str(L), fmt(p), fmt(c), fmt(s)] for L, p, c, s in chi_rows])  # fmt: skip
    written.append(os.path.join(out, "chi2_vs_p.csv"))
    emit("plot_chi2.py", _script("chi2_vs_p.csv", "chi2_vs_p.png", "L", "p", "chi2", "L=",
                                 "p", "chi^II"))  # fmt: skip

    fits_path = os.path.join(results_dir, FITS_CSV)
    if os.path.exists(fits_path):
        fits = read_fits_csv(fits_path)
        g_rows = sorted((r["window"], r["p"], r["g"]) for r in fits)
        _write_csv(os.path.join(out, "g_vs_p.csv"), ["window", "p", "g"],
                   [[w, fmt(p), fmt(g)] for w, p, g in g_rows])  # fmt: skip
        written.append(os.path.join(out, "g_vs_p.csv"))
        emit("plot_g.py", _script("g_vs_p.csv", "g_vs_p.png", "window", "p", "g", "L=",
                                  "p", "e^{s0}"))  # fmt: skip

    collapse_path = os.path.join(results_dir, COLLAPSE_JSON)
    if os.path.exists(collapse_path):
        with open(collapse_path) as fh:
            report = json.load(fh)
        m_rows = []
        for L in sorted(report["master_curve"], key=int):
            for x, y in report["master_curve"][L]:
                m_rows.append([L, fmt(x), fmt(y)])
        _write_csv(os.path.join(out, "master_curve.csv"), ["L_sd", "x", "y"], m_rows)
        written.append(os.path.join(out, "master_curve.csv"))
        res = report["result"]
        title = (
            f'ax.set_title("p_c={res["p_c"]:.4f}  nu={res["nu"]:.3f}  '
            f'zeta={res["zeta"]:.3f}", fontsize=8)\n'
        )
        emit("plot_collapse.py", _script("master_curve.csv", "master_curve.png", "L_sd", "x", "y",
                                         "L_sd=", "(p - p_c) L^(1/nu)", "e^{s0} L^(-zeta/nu)",
                                         title))  # fmt: skip
    return written
