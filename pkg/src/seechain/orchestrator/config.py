"""Sweep configuration files.

Grammar (INI, ``#`` or ``;`` comments)::

    [model]
    name = XXZ              ; TFIM | XXZ
    delta = 0.45            ; XXZ only
    boundary = Periodic     ; Periodic | Open

    [channel]
    kind = ZZ               ; ZZ | X | XplusZZ
    p = 0.1, 0.3, 0.5       ; explicit list ...
    p_linspace = 0, 0.5, 21 ; ... or start, stop, count (exactly one of the two)

    [sizes]
    L = 6, 8, 10, 12

    [backend]
    kind = Auto             ; Dense | MPS | Auto
    chi_max = 128
    svd_cutoff = 1e-12
    dense_limit = 12

    [run]
    seed = 0
    workers = 1
    out = results

    [verify]
    oracles = false         ; also run the dense oracle suite per size

Only ``[model] name``, ``[channel] kind``, a p grid and ``[sizes] L`` are
required.  The output directory may be overridden by ``SEECHAIN_OUT``.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
import re
from dataclasses import dataclass, field

import numpy as np

from ..doubled import DEFAULT_DENSE_LIMIT, ChannelKind
from ..scaling.fits import Backend
from ..spin import Boundary, Model, ModelSpec

OUT_ENV = "SEECHAIN_OUT"

_KNOWN = {
    "model": {"name", "delta", "boundary"},
    "channel": {"kind", "p", "p_linspace"},
    "sizes": {"l"},
    "backend": {"kind", "chi_max", "svd_cutoff", "dense_limit"},
    "run": {"seed", "workers", "out"},
    "verify": {"oracles"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``str()`` carries the file position."""


@dataclass
class SweepConfig:
    model: Model
    L_list: list[int]
    channel: ChannelKind
    p_grid: list[float]
    delta: float = 0.0
    boundary: Boundary = Boundary.PERIODIC
    backend: Backend = Backend.AUTO
    chi_max: int = 128
    svd_cutoff: float = 1e-12
    dense_limit: int = DEFAULT_DENSE_LIMIT
    seed: int = 0
    workers: int = 1
    out_dir: str = "results"
    verify_oracles: bool = False
    source: str = field(default="", repr=False)

    def __post_init__(self):
        if not self.L_list:
            raise ConfigError("[sizes] L: at least one size is required")
        if not self.p_grid:
            raise ConfigError("[channel] p: the p grid is empty")
        for p in self.p_grid:
            if not 0.0 <= p <= 0.5:
                raise ConfigError(f"[channel] p: value {p} outside [0, 1/2]")
        if self.chi_max < 1:
            raise ConfigError("[backend] chi_max must be >= 1")
        if not 0.0 <= self.svd_cutoff <= 1e-4:
            raise ConfigError("[backend] svd_cutoff must lie in [0, 1e-4]")
        if self.workers < 1:
            raise ConfigError("[run] workers must be >= 1")
        for L in self.L_list:
            try:
                self.model_spec(L)
            except ValueError as exc:
                raise ConfigError(f"[model]/[sizes]: {exc}") from None
        if self.boundary is Boundary.PERIODIC:
            mps_sizes = [L for L in self.L_list if self.backend_for(L) is Backend.MPS]
            if mps_sizes:
                raise ConfigError(
                    f"[backend] kind: the MPS backend needs Open boundaries "
                    f"(sizes {mps_sizes} would use MPS)"
                )

    def model_spec(self, L: int) -> ModelSpec:
        return ModelSpec(self.model, L, delta=self.delta, boundary=self.boundary)

    def backend_for(self, L: int) -> Backend:
        if self.backend is Backend.AUTO:
            return Backend.DENSE if L <= self.dense_limit else Backend.MPS
        return self.backend

    def canonical(self) -> dict:
        """Settings that determine the results (output location excluded)."""
        return {
            "model": self.model.value,
            "delta": self.delta,
            "boundary": self.boundary.value,
            "channel": self.channel.value,
            "p_grid": [float(p) for p in self.p_grid],
            "L_list": list(self.L_list),
            "backend": self.backend.value,
            "chi_max": self.chi_max,
            "svd_cutoff": self.svd_cutoff,
            "dense_limit": self.dense_limit,
            "seed": self.seed,
            "verify_oracles": self.verify_oracles,
        }

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for n, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip().lower()
        elif current == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line, re.I):
            return n
    return None


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, text: str, path: str):
        self.parser = parser
        self.text = text
        self.path = path

    def fail(self, section: str, key: str, message: str):
        line = _line_of(self.text, section, key)
        where = f"{self.path}:{line}" if line else self.path
        raise ConfigError(f"{where}: [{section}] {key}: {message}")

    def raw(self, section, key, default=None, required=False):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        if required:
            where = self.path
            raise ConfigError(f"{where}: [{section}] {key}: required field is missing")
        return default

    def convert(self, section, key, conv, default=None, required=False):
        value = self.raw(section, key, None, required)
        if value is None:
            return default
        try:
            return conv(value)
        except (ValueError, TypeError) as exc:
            self.fail(section, key, f"cannot parse {value!r} ({exc})")

    def number_list(self, section, key, conv, required=False):
        return self.convert(
            section, key, lambda v: [conv(x) for x in re.split(r"[,\s]+", v) if x], None, required
        )


def _parse_bool(value: str) -> bool:
    v = value.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def parse_config(text: str, path: str = "<config>") -> SweepConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    rd = _Reader(parser, text, path)
    for section in parser.sections():
        known = _KNOWN.get(section.lower())
        if known is None:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in parser.options(section):
            if key not in known:
                rd.fail(section, key, "unknown field")

    model = rd.convert("model", "name", Model, required=True)
    channel = rd.convert("channel", "kind", ChannelKind, required=True)
    p_list = rd.number_list("channel", "p", float)
    lin = rd.number_list("channel", "p_linspace", float)
    if (p_list is None) == (lin is None):
        raise ConfigError(f"{path}: [channel] give exactly one of 'p' or 'p_linspace'")
    if lin is not None:
        if len(lin) != 3 or lin[2] != int(lin[2]) or lin[2] < 1:
            rd.fail("channel", "p_linspace", "expected 'start, stop, count'")
        # round away linspace noise so the grid serializes reproducibly
        p_list = [round(float(v), 12) for v in np.linspace(lin[0], lin[1], int(lin[2]))]
    sizes = rd.number_list("sizes", "L", int, required=True)

    kwargs = dict(
        model=model,
        L_list=sorted(set(sizes)),
        channel=channel,
        p_grid=sorted(set(p_list)),
        delta=rd.convert("model", "delta", float, 0.0),
        boundary=rd.convert("model", "boundary", Boundary, Boundary.PERIODIC),
        backend=rd.convert("backend", "kind", Backend, Backend.AUTO),
        chi_max=rd.convert("backend", "chi_max", int, 128),
        svd_cutoff=rd.convert("backend", "svd_cutoff", float, 1e-12),
        dense_limit=rd.convert("backend", "dense_limit", int, DEFAULT_DENSE_LIMIT),
        seed=rd.convert("run", "seed", int, 0),
        workers=rd.convert("run", "workers", int, 1),
        out_dir=rd.raw("run", "out", "results"),
        verify_oracles=rd.convert("verify", "oracles", _parse_bool, False),
        source=path,
    )
    return SweepConfig(**kwargs)


def load_config(path: str) -> SweepConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config(text, path)


def resolve_out_dir(cfg: SweepConfig, cli_out: str | None = None) -> str:
    """Output directory: --out, then $SEECHAIN_OUT, then the config value."""
    if cli_out:
        return cli_out
    return os.environ.get(OUT_ENV) or cfg.out_dir
