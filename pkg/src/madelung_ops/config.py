"""
JSON run configuration.

Example (free particle, first figure window)::

    {
      "scenario": "free_particle",
      "params": {"eta": 0.1, "kappa": 0.5, "c1": 0.8, "c2_sign": 1, "c3": 0.0},
      "grid": {"x_min": -10, "x_max": 10, "nx": 201,
               "t_min": 0, "t_max": 10, "nt": 201, "exclusion": []},
      "stencil": {"dx": 0.001, "dt": 0.001, "order": 4, "gap_margin": 0.05},
      "truncation": {"k_max": 200, "tail_tol": 1e-15},
      "outputs": ["density", "phase", "bohm", "residuals"],
      "method": "closed",
      "out_dir": "out/fig1",
      "raster_cap": 50
    }

Waveguide params are ``{"n": 2, "c": 0.0, "nu": "sin", "mu": "t",
"a0": {"kind": "gaussian", "eta": 1.0}}``. See README for every key.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from .errors import InvariantViolation, MadelungError, SchemaError
from .madelung import TruncationPolicy, gaussian
from .scenarios import FreeParticleParams, WaveguideParams, WAVEGUIDE_EXCLUSION, named_time
from .verify import EQUATIONS, GridSpec, StencilConfig

SCENARIOS = ("free_particle", "waveguide")
OUTPUTS = ("density", "amplitude_re", "amplitude_im", "phase", "potential", "bohm", "residuals")
METHODS = ("closed", "series", "closed_F")

STRICT_THRESHOLDS = {"schrodinger": 1e-5, "continuity": 1e-6, "qhj": 1e-6}
COMPLEX_THRESHOLDS = {"schrodinger": 1e-4, "continuity": 1e-4, "qhj": 1e-4}

# keys that do not change any emitted number; left out of the config hash
_UNHASHED = ("out_dir", "threads", "raster", "raster_cap")


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    params: Union[FreeParticleParams, WaveguideParams]
    grid: GridSpec
    stencil: StencilConfig = StencilConfig()
    truncation: TruncationPolicy = TruncationPolicy()
    outputs: frozenset = frozenset()
    out_dir: Path = Path("out")
    raster_cap: float = 50.0
    raster: bool = True
    method: str = "closed"
    thresholds: dict = field(default_factory=dict)
    threads: Optional[int] = None
    source: dict = field(default_factory=dict, compare=False)

    @property
    def config_hash(self) -> str:
        canon = {k: v for k, v in self.source.items() if k not in _UNHASHED}
        blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    @property
    def field_outputs(self) -> list[str]:
        return [o for o in OUTPUTS if o in self.outputs and o != "residuals"]

    @property
    def complex_regime(self) -> bool:
        return self.scenario == "waveguide" and self.params.n >= 2


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise SchemaError(f"missing key {where}.{key}")
    return d[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where} must be a number, got {value!r}")
    return float(value)


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where} must be an integer, got {value!r}")
    return value


def _check_keys(d: dict, allowed, where: str):
    if not isinstance(d, dict):
        raise SchemaError(f"{where} must be an object")
    extra = set(d) - set(allowed)
    if extra:
        raise SchemaError(f"unknown keys in {where}: {sorted(extra)}")


def _free_params(d: dict) -> FreeParticleParams:
    _check_keys(d, ("eta", "kappa", "c1", "c2_sign", "c3"), "params")
    sign = d.get("c2_sign", 1)
    if sign not in (1, -1):
        raise SchemaError("params.c2_sign must be +1 or -1")
    return FreeParticleParams(
        eta=_number(_require(d, "eta", "params"), "params.eta"),
        kappa=_number(_require(d, "kappa", "params"), "params.kappa"),
        c1=_number(_require(d, "c1", "params"), "params.c1"),
        c2_sign=int(sign),
        c3=_number(d.get("c3", 0.0), "params.c3"),
    )


def _waveguide_params(d: dict) -> WaveguideParams:
    _check_keys(d, ("n", "c", "nu", "mu", "a0"), "params")
    a0 = d.get("a0", {"kind": "gaussian", "eta": 1.0})
    _check_keys(a0, ("kind", "eta"), "params.a0")
    if a0.get("kind", "gaussian") != "gaussian":
        raise SchemaError("params.a0.kind: only 'gaussian' is supported")
    eta = _number(a0.get("eta", 1.0), "params.a0.eta")
    if eta <= 0:
        raise InvariantViolation("params.a0.eta must be positive")
    return WaveguideParams(
        n=_integer(_require(d, "n", "params"), "params.n"),
        c=_number(d.get("c", 0.0), "params.c"),
        time=named_time(d.get("nu", "sin"), d.get("mu", "t")),
        a0=gaussian(eta),
    )


def _grid(d: dict, default_exclusion) -> GridSpec:
    _check_keys(d, ("x_min", "x_max", "nx", "t_min", "t_max", "nt", "exclusion"), "grid")
    excl = d.get("exclusion", default_exclusion)
    try:
        excl = tuple((float(c), float(r)) for c, r in excl)
    except (TypeError, ValueError):
        raise SchemaError("grid.exclusion must be a list of [center, radius] pairs") from None
    return GridSpec(
        x_min=_number(_require(d, "x_min", "grid"), "grid.x_min"),
        x_max=_number(_require(d, "x_max", "grid"), "grid.x_max"),
        nx=_integer(_require(d, "nx", "grid"), "grid.nx"),
        t_min=_number(_require(d, "t_min", "grid"), "grid.t_min"),
        t_max=_number(_require(d, "t_max", "grid"), "grid.t_max"),
        nt=_integer(_require(d, "nt", "grid"), "grid.nt"),
        exclusion=excl,
    )


def parse_config(text: str, **overrides) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Raises :class:`SchemaError` for malformed documents and
    :class:`InvariantViolation` when scenario parameters break a constraint.
    ``overrides`` (``out_dir``, ``threads``, ``raster``, ``raster_cap``) take
    precedence over the document.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}") from None
    _check_keys(doc, ("scenario", "params", "grid", "stencil", "truncation", "outputs",
                      "out_dir", "raster_cap", "raster", "method", "thresholds", "threads"),
                "config")
    doc.update({k: (str(v) if isinstance(v, Path) else v)
                for k, v in overrides.items() if v is not None})

    scenario = _require(doc, "scenario", "config")
    if scenario not in SCENARIOS:
        raise SchemaError(f"config.scenario must be one of {SCENARIOS}, got {scenario!r}")
    raw_params = _require(doc, "params", "config")
    try:
        params = (_free_params(raw_params) if scenario == "free_particle"
                  else _waveguide_params(raw_params))
    except MadelungError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad params: {exc}") from None

    default_method = "closed" if scenario == "free_particle" else "series"
    method = doc.get("method", default_method)
    if method not in METHODS:
        raise SchemaError(f"config.method must be one of {METHODS}")
    if method == "closed" and scenario == "waveguide":
        if params.n != 1 or raw_params.get("nu", "sin") != "sin" or raw_params.get("mu", "t") != "t" \
                or float(raw_params.get("a0", {}).get("eta", 1.0)) != 1.0:
            raise InvariantViolation(
                "method 'closed' for the waveguide exists only for n = 1, nu = sin, mu = t, A0 = exp(-x^2)")

    # Q' vanishes or blows up at x = 0 for these; keep the pipeline off it
    needs_exclusion = (scenario == "waveguide" and params.n >= 2) or \
        (scenario == "free_particle" and method != "closed")
    default_excl = [[0.0, WAVEGUIDE_EXCLUSION]] if needs_exclusion else []
    grid = _grid(_require(doc, "grid", "config"), default_excl)

    st = doc.get("stencil", {})
    _check_keys(st, ("dx", "dt", "order", "gap_margin"), "stencil")
    stencil = StencilConfig(
        dx=_number(st.get("dx", 1e-3), "stencil.dx"),
        dt=_number(st.get("dt", 1e-3), "stencil.dt"),
        order=_integer(st.get("order", 4), "stencil.order"),
        gap_margin=_number(st.get("gap_margin", 0.05), "stencil.gap_margin"),
    )
    tr = doc.get("truncation", {})
    _check_keys(tr, ("k_max", "tail_tol"), "truncation")
    truncation = TruncationPolicy(
        k_max=_integer(tr.get("k_max", 200), "truncation.k_max"),
        tail_tol=_number(tr.get("tail_tol", 1e-15), "truncation.tail_tol"),
    )

    outputs = doc.get("outputs", [])
    if not isinstance(outputs, list) or any(o not in OUTPUTS for o in outputs):
        raise SchemaError(f"config.outputs must be a list drawn from {OUTPUTS}")

    complex_regime = scenario == "waveguide" and params.n >= 2
    thresholds = dict(COMPLEX_THRESHOLDS if complex_regime else STRICT_THRESHOLDS)
    user_thr = doc.get("thresholds", {})
    _check_keys(user_thr, EQUATIONS, "thresholds")
    thresholds.update({k: _number(v, f"thresholds.{k}") for k, v in user_thr.items()})

    cap = _number(doc.get("raster_cap", 50.0), "raster_cap")
    if cap <= 0:
        raise SchemaError("raster_cap must be positive")
    threads = doc.get("threads")
    if threads is not None and _integer(threads, "threads") < 1:
        raise SchemaError("threads must be >= 1")

    return RunConfig(
        scenario=scenario,
        params=params,
        grid=grid,
        stencil=stencil,
        truncation=truncation,
        outputs=frozenset(outputs),
        out_dir=Path(doc.get("out_dir", "out")),
        raster_cap=cap,
        raster=bool(doc.get("raster", True)),
        method=method,
        thresholds=thresholds,
        threads=threads,
        source=doc,
    )


def load_config(path, **overrides) -> RunConfig:
    return parse_config(Path(path).read_text(), **overrides)


def params_summary(cfg: RunConfig) -> dict[str, Any]:
    p = cfg.params
    if cfg.scenario == "free_particle":
        return {"eta": p.eta, "kappa": p.kappa, "c1": p.c1, "c2": p.c2,
                "c2_sign": p.c2_sign, "c3": p.c3}
    return {"n": p.n, "c": p.c, "time": p.time.description, "a0": p.a0.description}
