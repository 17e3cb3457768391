"""Monte-Carlo sweeps over precoding schemes, SNR and power architecture."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import baselines, grouping as grp, precoder as pc
from .channel import generate_channel
from .config import ConfigError, SystemConfig
from .metrics import PowerModel, energy_efficiency, power_consumption, spectral_efficiency

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "ROW_FIELDS",
    "parse_scheme",
    "trial_seed",
    "run_experiment",
    "emit_results",
    "format_results",
    "read_results",
    "summarize",
    "load_spec",
    "apply_override",
]

DEFAULT_SCHEMES = ("FD", "PCA-FCA", "PCA-DS", "SOMP", "DFT", "EVD-FCA", "GREEDY-DS") + tuple(
    f"{fam}-FS:{k}" for fam in ("PCA", "EVD") for k in pc.FS_KINDS)

_FAMILIES = {
    "FD": ("fd", "FD"),
    "PCA-FCA": ("fca", "FCA"),
    "SOMP": ("fca", "FCA"),
    "DFT": ("fca", "FCA"),
    "EVD-FCA": ("fca", "FCA"),
    "PCA-FS": ("fs", "PCS"),
    "EVD-FS": ("fs", "PCS"),
    "PCA-DS": ("dynamic", "PCS"),
    "GREEDY-DS": ("dynamic", "PCS"),
}


def parse_scheme(name: str) -> Tuple[str, str, str]:
    """Split a scheme label into ``(family, pattern, power_array)``.

    Fixed-subarray schemes carry their pattern as ``PCA-FS:vertical`` or
    ``PCA-FS(vertical)``; every other scheme takes no pattern.
    """
    label = name.strip()
    kind = None
    if label.endswith(")") and "(" in label:
        label, kind = label[:-1].split("(", 1)
    elif ":" in label:
        label, kind = label.split(":", 1)
    family = label.strip().upper()
    if family not in _FAMILIES:
        raise ConfigError(f"unknown scheme {name!r}")
    pattern, array = _FAMILIES[family]
    if pattern == "fs":
        if kind is None or kind.strip().lower() not in pc.FS_KINDS:
            raise ConfigError(f"scheme {name!r} needs a fixed-subarray pattern from {pc.FS_KINDS}")
        pattern = kind.strip().lower()
    elif kind is not None:
        raise ConfigError(f"scheme {family} does not take a pattern (got {kind!r})")
    return family, pattern, array


@dataclass
class ExperimentSpec:
    config: SystemConfig = field(default_factory=SystemConfig)
    schemes: List[str] = field(default_factory=lambda: list(DEFAULT_SCHEMES))
    snr_db: List[float] = field(default_factory=lambda: [0.0])
    trials: int = 1
    seed: int = 0
    architecture: str = "passive"
    output: Optional[str] = None
    format: str = "csv"
    waterfilling: str = "noise"
    quantization_stage: str = "before"
    record_timing: bool = False

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.snr_db:
            raise ConfigError("snr grid must be nonempty")
        if self.architecture not in ("passive", "active", "both"):
            raise ConfigError("architecture must be passive, active or both")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.waterfilling not in ("noise", "streams"):
            raise ConfigError("waterfilling must be 'noise' or 'streams'")
        if self.quantization_stage not in ("before", "after"):
            raise ConfigError("quantization_stage must be 'before' or 'after' the baseband design")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        cfg = self.config
        for s in self.schemes:
            _, pattern, _ = parse_scheme(s)
            if pattern in pc.FS_KINDS:
                pc.fs_pattern(pattern, cfg.nt_v, cfg.nt_h, cfg.nt_rf)
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("duplicate schemes")

    @property
    def architectures(self) -> List[str]:
        return ["passive", "active"] if self.architecture == "both" else [self.architecture]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["config"] = self.config.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown spec keys: {sorted(unknown)}")
        cfg = data.pop("config", {}) or {}
        spec = cls(config=cfg if isinstance(cfg, SystemConfig) else SystemConfig.from_dict(cfg), **data)
        spec.snr_db = [float(x) for x in spec.snr_db]
        spec.schemes = list(spec.schemes)
        return spec


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    pattern: str
    architecture: str
    snr_db: float
    trial_index: int
    se_bits_per_s_hz: float
    power_mw: float
    ee_bits_per_joule: float
    wall_clock_ms: float


ROW_FIELDS = tuple(f.name for f in dataclasses.fields(ResultRow))


def trial_seed(master_seed: int, trial_index: int) -> int:
    """Independent 64-bit seed for one trial, mixed from the master seed."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class _Trial:
    """Lazily shared per-channel quantities for one realization."""

    def __init__(self, cfg: SystemConfig, seed: int, quantize: bool = True):
        self.cfg = cfg
        self.quant_bits = cfg.quant_bits if quantize else None
        self.channel = generate_channel(cfg, seed)
        self._fopt = None
        self._rF = None
        self._cov = None

    @property
    def fopt(self):
        if self._fopt is None:
            self._fopt = pc.optimal_fully_digital(self.channel, self.cfg.ns)
        return self._fopt

    @property
    def rF(self):
        if self._rF is None:
            self._rF = grp.correlation_matrix(self.fopt)
        return self._rF

    @property
    def cov(self):
        if self._cov is None:
            self._cov = baselines.channel_covariance(self.channel)
        return self._cov

    def analog(self, family: str, pattern: str) -> Tuple[np.ndarray, np.ndarray]:
        cfg, q = self.cfg, self.quant_bits
        if family == "FD":
            return np.eye(cfg.nt, dtype=complex), np.eye(cfg.nt, dtype=bool)
        if family == "PCA-FCA":
            return pc.pca_analog_precoder(self.fopt, None, q, cfg.nt_rf)
        if family == "EVD-FCA":
            return baselines.covariance_evd_precoder(self.channel, None, cfg.nt_rf, q)
        if family == "SOMP":
            d = baselines.steering_dictionary(cfg.nt_v, cfg.nt_h, dv_over_lambda=cfg.dv_over_lambda,
                                              dh_over_lambda=cfg.dh_over_lambda)
            f = pc.quantize_phases(baselines.somp_precoder(self.fopt, d, cfg.nt_rf), q)
            return f, np.ones(f.shape, dtype=bool)
        if family == "DFT":
            f = pc.quantize_phases(baselines.dft_codebook_precoder(self.fopt, cfg.nt_v, cfg.nt_h, cfg.nt_rf), q)
            return f, np.ones(f.shape, dtype=bool)
        if family == "PCA-FS":
            return pc.pca_analog_precoder(self.fopt, pc.fs_pattern(pattern, cfg.nt_v, cfg.nt_h, cfg.nt_rf), q)
        if family == "EVD-FS":
            g = pc.fs_pattern(pattern, cfg.nt_v, cfg.nt_h, cfg.nt_rf)
            return baselines.covariance_evd_precoder(self.channel, g, quant_bits=q)
        if family == "PCA-DS":
            return pc.pca_analog_precoder(self.fopt, grp.shared_ahc(self.rF, cfg.nt, cfg.nt_rf), q)
        if family == "GREEDY-DS":
            # the covariance-EVD reference only sees the channel covariance
            g = grp.greedy_grouping(self.cov, cfg.nt, cfg.nt_rf)
            return baselines.covariance_evd_precoder(self.channel, g, quant_bits=q)
        raise ConfigError(f"unknown scheme family {family!r}")


def _evaluate(trial: "_Trial", spec: ExperimentSpec, f_rf, mask, snr: float, analog: bool = True) -> float:
    nv = 10.0 ** (-snr / 10.0)
    after = spec.config.quant_bits if analog and spec.quantization_stage == "after" else None
    prec = pc.hybrid_precoder(trial.channel, f_rf, mask, spec.config.ns, nv, quantize_after=after,
                              floor=spec.waterfilling)
    return spectral_efficiency(trial.channel, prec, nv)


def _run_trial(spec: ExperimentSpec, t: int) -> List[ResultRow]:
    cfg = spec.config
    trial = _Trial(cfg, trial_seed(spec.seed, t), quantize=spec.quantization_stage == "before")

    start = time.perf_counter()
    eye, eye_mask = trial.analog("FD", "fd")
    fd_se = {snr: _evaluate(trial, spec, eye, eye_mask, snr, analog=False) for snr in spec.snr_db}
    fd_ms = (time.perf_counter() - start) * 1e3 / len(spec.snr_db)

    rows = []
    for name in spec.schemes:
        family, pattern, array = parse_scheme(name)
        start = time.perf_counter()
        if family != "FD":
            f_rf, mask = trial.analog(family, pattern)
        analog_ms = (time.perf_counter() - start) * 1e3
        for snr in spec.snr_db:
            if family == "FD":
                se, elapsed = fd_se[snr], fd_ms
            else:
                start = time.perf_counter()
                se = _evaluate(trial, spec, f_rf, mask, snr)
                elapsed = analog_ms + (time.perf_counter() - start) * 1e3
                # the unconstrained optimum bounds every hybrid design that meets
                # the power budget exactly
                bounded = spec.waterfilling == "noise" and spec.quantization_stage == "before"
                if bounded and se > fd_se[snr] * (1 + 1e-9) + 1e-12:
                    raise ArithmeticError(
                        f"{name} SE {se} exceeds fully-digital SE {fd_se[snr]} (trial {t}, {snr} dB)")
            for arch in spec.architectures:
                power = power_consumption(PowerModel(architecture=arch, array=array), cfg.nt, cfg.nt_rf)
                rows.append(ResultRow(
                    scheme=name, pattern=pattern, architecture=arch, snr_db=float(snr), trial_index=t,
                    se_bits_per_s_hz=se, power_mw=float(power),
                    ee_bits_per_joule=energy_efficiency(se, cfg.bandwidth_hz, power),
                    wall_clock_ms=elapsed if spec.record_timing else 0.0,
                ))
    return rows


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> List[ResultRow]:
    """Evaluate every scheme on the same channel draws at every SNR.

    Rows come back sorted by (scheme order in the spec, SNR order, trial,
    architecture), independent of ``threads``.
    """
    spec.validate()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda t: _run_trial(spec, t), range(spec.trials)))
    else:
        chunks = [_run_trial(spec, t) for t in range(spec.trials)]
    scheme_pos = {s: i for i, s in enumerate(spec.schemes)}
    snr_pos = {float(s): i for i, s in enumerate(spec.snr_db)}
    arch_pos = {a: i for i, a in enumerate(spec.architectures)}
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (scheme_pos[r.scheme], snr_pos[r.snr_db], r.trial_index, arch_pos[r.architecture]))
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def format_results(rows: Sequence[ResultRow], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        for r in rows:
            writer.writerow([_fmt(getattr(r, f)) for f in ROW_FIELDS])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([dataclasses.asdict(r) for r in rows], indent=1) + "\n"
    raise ConfigError(f"unknown format {fmt!r}")


def emit_results(rows: Sequence[ResultRow], fmt: str, path: str) -> str:
    """Write rows as CSV or JSON (UTF-8, ``\\n`` line endings); returns ``path``."""
    text = format_results(rows, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def read_results(path: str) -> List[ResultRow]:
    """Parse a file written by :func:`emit_results` (format from the extension or content)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        records = json.loads(text)
    else:
        records = list(csv.DictReader(io.StringIO(text)))
    types = {f.name: f.type for f in dataclasses.fields(ResultRow)}
    out = []
    for rec in records:
        vals = {}
        for k in ROW_FIELDS:
            t = types[k]
            vals[k] = int(rec[k]) if t in (int, "int") else float(rec[k]) if t in (float, "float") else str(rec[k])
        out.append(ResultRow(**vals))
    return out


def summarize(rows: Sequence[ResultRow]) -> List[dict]:
    """Mean and standard error of SE and EE per (scheme, SNR, architecture)."""
    groups: Dict[tuple, List[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.scheme, r.snr_db, r.architecture), []).append(r)
    out = []
    for (scheme, snr, arch), rs in groups.items():
        se = np.array([r.se_bits_per_s_hz for r in rs])
        ee = np.array([r.ee_bits_per_joule for r in rs])
        n = len(rs)

        def stderr(x):
            return float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0

        out.append(dict(scheme=scheme, pattern=rs[0].pattern, snr_db=snr, architecture=arch, n=n,
                        se_mean=float(se.mean()), se_stderr=stderr(se),
                        ee_mean=float(ee.mean()), ee_stderr=stderr(ee)))
    return out


def _coerce(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(data: dict, assignment: str) -> dict:
    """Apply ``key=value`` (dotted keys reach into ``config``) to a spec dict."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, value = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = data
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {key!r} does not address a mapping")
    node[parts[-1]] = _coerce(value.strip())
    return data


def load_spec(path: Optional[str] = None, overrides: Sequence[str] = ()) -> ExperimentSpec:
    """Read a JSON experiment spec; missing keys fall back to the full-scale defaults."""
    data: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    for o in overrides:
        apply_override(data, o)
    spec = ExperimentSpec.from_dict(data)
    spec.validate()
    return spec
