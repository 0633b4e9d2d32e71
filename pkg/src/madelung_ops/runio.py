"""
Run orchestration: evaluate fields on a grid, write CSV tables, PGM rasters
and a JSON report, and compare tables.

CSV files have the header ``x,t,re,im`` and one row per kept grid point,
time-major (all x for the first t, then the next t). Numbers are written
with 17 significant digits so they round-trip exactly.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig, params_summary
from .errors import EvaluationError, GridMismatch, MadelungError
from .madelung import POWER_BRANCH, PREFACTOR_BRANCH, MadelungModel
from .scenarios import (
    FreeParticleClosed,
    WaveguideN1Closed,
    free_particle_model,
    waveguide_model,
)
from .verify import EQUATIONS, residual

log = logging.getLogger(__name__)

FIELD_GETTERS = {
    "density": lambda s: s.density + 0j,
    "amplitude_re": lambda s: s.A.real + 0j,
    "amplitude_im": lambda s: s.A.imag + 0j,
    "phase": lambda s: s.S,
    "potential": lambda s: s.V,
    "bohm": lambda s: s.V_B,
}


def build_model(cfg: RunConfig):
    if cfg.scenario == "free_particle":
        if cfg.method == "closed":
            return FreeParticleClosed(cfg.params)
        return free_particle_model(cfg.params, cfg.truncation, cfg.method == "closed_F")
    if cfg.method == "closed":
        return WaveguideN1Closed(cfg.params.c)
    return waveguide_model(cfg.params, cfg.truncation, cfg.method == "closed_F")


def resolve_threads(threads=None) -> int:
    if threads:
        return int(threads)
    env = os.environ.get("MK_THREADS")
    return int(env) if env else 1


def evaluate_grid(model, cfg: RunConfig, threads: int = 1):
    """Sample ``model`` on the grid; returns ``(X, T, keep, {field: values})``.

    Time rows are split across ``threads`` workers; results are reassembled
    in row order so output does not depend on the worker count.
    """
    X, T = cfg.grid.mesh()
    keep = ~cfg.grid.excluded(X)
    names = cfg.field_outputs

    def rows(lo, hi):
        x, t, k = X[lo:hi], T[lo:hi], keep[lo:hi]
        out = {n: np.full(x.shape, np.nan + 0j) for n in names}
        if not k.any():
            return out
        try:
            s = model.sample(x[k], t[k])
        except MadelungError as exc:
            raise EvaluationError(
                f"{exc} (evaluating x in [{x[k].min():.6g}, {x[k].max():.6g}], "
                f"t in [{t[k].min():.6g}, {t[k].max():.6g}])") from exc
        for n in names:
            out[n][k] = FIELD_GETTERS[n](s)
        return out

    nt = X.shape[0]
    chunks = max(1, min(threads, nt))
    bounds = np.linspace(0, nt, chunks + 1).astype(int)
    with ThreadPoolExecutor(max_workers=chunks) as pool:
        parts = list(pool.map(lambda b: rows(*b), zip(bounds[:-1], bounds[1:])))
    values = {n: np.concatenate([p[n] for p in parts], axis=0) for n in names}
    return X, T, keep, values


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_table(path: Path, X, T, keep, values) -> dict:
    """Write one field as CSV; non-finite samples are dropped and counted."""
    finite = keep & np.isfinite(values.real) & np.isfinite(values.imag)
    lines = ["x,t,re,im"]
    for x, t, v in zip(X[finite], T[finite], values[finite]):
        lines.append(f"{_fmt(x)},{_fmt(t)},{_fmt(v.real)},{_fmt(v.imag)}")
    data = ("\n".join(lines) + "\n").encode()
    path.write_bytes(data)
    return {"path": path.name, "sha256": hashlib.sha256(data).hexdigest(),
            "rows": int(finite.sum()), "dropped_nonfinite": int((keep & ~finite).sum())}


def read_table(path) -> np.ndarray:
    """Load a field CSV as an ``(n, 4)`` float array."""
    with open(path) as fh:
        header = fh.readline().strip()
    if header != "x,t,re,im":
        raise GridMismatch(f"{path}: unexpected header {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data.reshape(-1, 4)


def raster_bytes(values: np.ndarray, cap: float, signed: bool) -> bytes:
    """8-bit grayscale PGM (P5). Top row is the latest time.

    Linear map of [-cap, cap] (signed) or [0, cap] onto gray levels 1..255;
    level 0 (black) marks clipped, excluded or non-finite cells.
    """
    v = np.asarray(values.real, dtype=float)
    lo = -cap if signed else 0.0
    ok = np.isfinite(v) & (np.abs(v) <= cap)
    scaled = np.zeros(v.shape, dtype=np.uint8)
    level = 1 + np.round((np.clip(v, lo, cap) - lo) / (cap - lo) * 254)
    scaled[ok] = level[ok].astype(np.uint8)
    img = scaled[::-1]
    head = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
    return head + img.tobytes()


def branch_jumps(model, cfg: RunConfig, X, T, keep) -> int:
    """Adjacent grid pairs where the prefactor base crosses the negative real axis."""
    if not isinstance(model, MadelungModel):
        return 0
    with np.errstate(all="ignore"):
        try:
            r, p = model.prefactor_base(np.where(keep, X, 1.0), T)
        except MadelungError:
            return -1
    if r is None or p.denominator == 1:
        return 0
    arg = np.where(keep, np.angle(np.asarray(r, dtype=complex)), np.nan)
    jx = np.abs(np.diff(arg, axis=1)) > math.pi
    jt = np.abs(np.diff(arg, axis=0)) > math.pi
    return int(jx.sum() + jt.sum())


def residual_block(model, cfg: RunConfig) -> dict:
    out = {}
    for eq in EQUATIONS:
        rep = residual(eq, model, cfg.grid, cfg.stencil)
        d = rep.to_dict()
        d["threshold"] = cfg.thresholds[eq]
        d["pass"] = rep.passes(cfg.thresholds[eq])
        out[eq] = d
    return out


def _write_report(cfg: RunConfig, report: dict, tag: str) -> Path:
    path = cfg.out_dir / f"{tag}_{cfg.scenario}_{cfg.config_hash}.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return path


def _base_report(cfg: RunConfig) -> dict:
    return {
        "scenario": cfg.scenario,
        "config_hash": cfg.config_hash,
        "method": cfg.method,
        "params": params_summary(cfg),
        "grid": asdict(cfg.grid),
        "stencil": asdict(cfg.stencil),
        "truncation": asdict(cfg.truncation),
        "conventions": {
            "power_branch": POWER_BRANCH,
            "prefactor_branch": PREFACTOR_BRANCH,
            "singular_skip": f"residual points skipped where |prefactor base| < "
                             f"{cfg.stencil.gap_margin} on the stencil footprint",
        },
        "config": cfg.source,
    }


def run(cfg: RunConfig, threads=None) -> dict:
    """Evaluate requested outputs, write files, return the report dict.

    ``report["passed"]`` is False only if requested residuals miss their
    thresholds.
    """
    threads = resolve_threads(threads or cfg.threads)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    model = build_model(cfg)
    report = _base_report(cfg)
    timing = {}
    artifacts, rasters = [], []

    t0 = time.perf_counter()
    if cfg.field_outputs:
        X, T, keep, values = evaluate_grid(model, cfg, threads)
        timing["evaluate_s"] = time.perf_counter() - t0
        for name in cfg.field_outputs:
            path = cfg.out_dir / f"{name}_{cfg.scenario}_{cfg.config_hash}.csv"
            artifacts.append(write_table(path, X, T, keep, values[name]))
            if cfg.raster:
                img = raster_bytes(np.where(keep, values[name], np.nan), cfg.raster_cap,
                                   signed=name != "density")
                rpath = path.with_suffix(".pgm")
                rpath.write_bytes(img)
                rasters.append({"path": rpath.name, "sha256": hashlib.sha256(img).hexdigest()})
        report["branch_jumps"] = branch_jumps(model, cfg, X, T, keep)

    passed = True
    if "residuals" in cfg.outputs:
        t1 = time.perf_counter()
        report["residuals"] = residual_block(model, cfg)
        timing["residuals_s"] = time.perf_counter() - t1
        passed = all(r["pass"] for r in report["residuals"].values())

    timing["total_s"] = time.perf_counter() - t0
    report.update(artifacts=artifacts, rasters=rasters, timing=timing, passed=passed)
    report["report"] = _write_report(cfg, report, "report").name
    log.info("wrote %d tables to %s", len(artifacts), cfg.out_dir)
    return report


def verify(cfg: RunConfig) -> dict:
    """Residuals only; writes a report and no field files."""
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    model = build_model(cfg)
    report = _base_report(cfg)
    t0 = time.perf_counter()
    report["residuals"] = residual_block(model, cfg)
    report["timing"] = {"residuals_s": time.perf_counter() - t0}
    report["passed"] = all(r["pass"] for r in report["residuals"].values())
    report["report"] = _write_report(cfg, report, "verify").name
    return report


@dataclass
class DiffReport:
    rows: int
    max_abs: float
    max_rel: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_abs <= self.tol

    def to_dict(self) -> dict:
        return {**asdict(self), "passed": self.passed}


def compare(table_a, table_b, tol: float = 1e-10) -> DiffReport:
    """Element-wise difference of two field tables on the same grid."""
    a = table_a if isinstance(table_a, np.ndarray) else read_table(table_a)
    b = table_b if isinstance(table_b, np.ndarray) else read_table(table_b)
    if a.shape != b.shape or not np.array_equal(a[:, :2], b[:, :2]):
        raise GridMismatch("tables are not sampled on the same (x, t) points")
    va = a[:, 2] + 1j * a[:, 3]
    vb = b[:, 2] + 1j * b[:, 3]
    diff = np.abs(va - vb)
    scale = np.maximum(np.abs(va), np.abs(vb))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(diff == 0, 0.0, diff / scale)
    return DiffReport(int(len(a)), float(diff.max(initial=0.0)),
                      float(rel.max(initial=0.0)), float(tol))
