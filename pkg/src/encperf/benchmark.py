"""Benchmark configuration and the certified/simulated comparison report.

A config is a JSON document::

    {
      "format": "encperf.benchmark/1",
      "plant": "batch_reactor_plant.json",      # relative to the config file
      "controller": "hinf_controller.json",
      "period": 10,
      "sector_gamma": 0.223,
      "solver": "CLARABEL",
      "workers": 1,
      "methods": [{"method": "nominal"}, {"method": "fir_nominal", "horizon": 5}, ...],
      "simulation": {"variants": ["nominal", ...], "steps": 10000, "seeds": [0, 1]},
      "outputs": {"text": null, "csv": null}
    }

Per-method entries may override ``period``, ``sector_gamma`` and ``horizon``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .analysis import DEFAULT_SOLVER, METHODS, AnalysisError, min_l2_gain
from .io import SchemaError, load_system
from .simulator import VARIANTS, SimScenario, simulate
from .ss_core import Controller, DimensionError, Plant, interconnect

__all__ = [
    "ConfigError",
    "MethodSpec",
    "SimulationSpec",
    "BenchmarkConfig",
    "Row",
    "Report",
    "CERTIFIED_FOR",
    "load_config",
    "default_config",
    "run_benchmark",
    "with_overrides",
    "config_from_dict",
]

DATA = Path(__file__).parent / "data"
FORMAT = "encperf.benchmark/1"
CSV_FIELDS = ["kind", "name", "period", "sector_gamma", "horizon", "status",
              "gain", "gain_min", "gain_mean", "samples", "message"]

# Certified row that upper-bounds each simulated variant.
CERTIFIED_FOR = {
    "nominal": "nominal",
    "integer_reform": "nominal",
    "bootstrap": "bootstrap",
    "reset": "reset_robust",
    "fir": "fir_nominal",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MethodSpec:
    method: str
    period: int = 10
    sector_gamma: float = 0.223
    horizon: Optional[int] = None


@dataclass(frozen=True)
class SimulationSpec:
    variants: tuple = ()
    steps: int = 10_000
    seeds: tuple = tuple(range(10))
    period: int = 10
    amplitude: float = 1.0
    error_policy: str = "model"
    state_scale: float = 16.0
    reform_kind: str = "controller_type"


@dataclass
class BenchmarkConfig:
    plant: Plant
    controller: Controller
    methods: list = field(default_factory=list)
    simulation: SimulationSpec = field(default_factory=SimulationSpec)
    solver: str = DEFAULT_SOLVER
    workers: int = 1
    text_out: Optional[str] = None
    csv_out: Optional[str] = None


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _positive_int(value, where):
    _require(isinstance(value, int) and not isinstance(value, bool) and value >= 1,
             f"{where}: expected a positive integer, got {value!r}")
    return value


def _load(path: Path, kind):
    try:
        system = load_system(path)
    except FileNotFoundError:
        raise ConfigError(f"{path}: file not found") from None
    except (SchemaError, DimensionError) as exc:
        raise ConfigError(str(exc)) from None
    _require(isinstance(system, kind), f"{path}: expected a {kind.__name__.lower()} file")
    return system


def config_from_dict(doc: dict, base: Path = DATA) -> BenchmarkConfig:
    _require(isinstance(doc, dict), "config must be a JSON object")
    _require(doc.get("format") == FORMAT, f"format: expected {FORMAT!r}, got {doc.get('format')!r}")
    for key in ("plant", "controller"):
        _require(isinstance(doc.get(key), str), f"{key}: expected a file path")
    plant = _load(base / doc["plant"], Plant)
    controller = _load(base / doc["controller"], Controller)
    try:
        interconnect(plant, controller)
    except DimensionError as exc:
        raise ConfigError(f"plant/controller mismatch: {exc}") from None

    period = _positive_int(doc.get("period", 10), "period")
    sector_gamma = doc.get("sector_gamma", 0.223)
    _require(isinstance(sector_gamma, (int, float)) and sector_gamma >= 0,
             f"sector_gamma: expected a non-negative number, got {sector_gamma!r}")
    methods = []
    for i, m in enumerate(doc.get("methods", [])):
        where = f"methods[{i}]"
        _require(isinstance(m, dict) and m.get("method") in METHODS,
                 f"{where}.method: expected one of {METHODS}")
        unknown = set(m) - {"method", "period", "sector_gamma", "horizon"}
        _require(not unknown, f"{where}: unknown field(s) {sorted(unknown)}")
        horizon = m.get("horizon")
        if horizon is not None:
            _positive_int(horizon, f"{where}.horizon")
        methods.append(MethodSpec(
            m["method"], _positive_int(m.get("period", period), f"{where}.period"),
            float(m.get("sector_gamma", sector_gamma)), horizon))

    sim = doc.get("simulation", {})
    _require(isinstance(sim, dict), "simulation: expected an object")
    variants = tuple(sim.get("variants", ()))
    for v in variants:
        _require(v in VARIANTS, f"simulation.variants: unknown variant {v!r}")
    seeds = tuple(sim.get("seeds", range(10)))
    _require(all(isinstance(s, int) and s >= 0 for s in seeds),
             "simulation.seeds: expected non-negative integers")
    sim_spec = SimulationSpec(
        variants=variants, steps=_positive_int(sim.get("steps", 10_000), "simulation.steps"),
        seeds=seeds, period=_positive_int(sim.get("period", period), "simulation.period"),
        amplitude=float(sim.get("amplitude", 1.0)),
        error_policy=sim.get("error_policy", "model"),
        state_scale=float(sim.get("state_scale", 16.0)),
        reform_kind=sim.get("reform_kind", "controller_type"))
    _require(sim_spec.error_policy in ("model", "adversarial", "none"),
             f"simulation.error_policy: unknown policy {sim_spec.error_policy!r}")
    _require(sim_spec.reform_kind in ("controller_type", "observer_type"),
             f"simulation.reform_kind: unknown kind {sim_spec.reform_kind!r}")

    out = doc.get("outputs", {}) or {}
    return BenchmarkConfig(
        plant, controller, methods, sim_spec, solver=str(doc.get("solver", DEFAULT_SOLVER)),
        workers=_positive_int(doc.get("workers", 1), "workers"),
        text_out=out.get("text"), csv_out=out.get("csv"))


def load_config(path) -> BenchmarkConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"{path}: file not found") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc, path.parent)


def default_config() -> BenchmarkConfig:
    return load_config(DATA / "benchmark_default.json")


@dataclass
class Row:
    kind: str
    name: str
    status: str
    gain: Optional[float] = None
    period: Optional[int] = None
    sector_gamma: Optional[float] = None
    horizon: Optional[int] = None
    gain_min: Optional[float] = None
    gain_mean: Optional[float] = None
    samples: int = 0
    message: str = ""
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class Report:
    rows: list

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def certified(self, name: str) -> Optional[float]:
        for r in self.rows:
            if r.kind == "certified" and r.name == name and r.ok:
                return r.gain
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(CSV_FIELDS)
        for r in self.rows:
            out.writerow([r.kind, r.name, _fmt_full(r.period), _fmt_full(r.sector_gamma),
                          _fmt_full(r.horizon), r.status, _fmt_full(r.gain), _fmt_full(r.gain_min),
                          _fmt_full(r.gain_mean), r.samples, r.message])
        return buf.getvalue()

    def to_text(self) -> str:
        header = ["kind", "method", "T", "gain", "status", "time[s]", "note"]
        body = [[r.kind, r.name, _fmt_full(r.period) or "-", _fmt6(r.gain), r.status,
                 f"{r.seconds:.2f}", r.message]
                for r in self.rows]
        widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
                  for i, h in enumerate(header)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(c.ljust(w) for c, w in zip(b, widths)).rstrip() for b in body]
        return "\n".join(lines) + "\n"


def _fmt_full(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _fmt6(v) -> str:
    return "-" if v is None else f"{v:.6g}"


def _certify(cfg: BenchmarkConfig, spec: MethodSpec) -> Row:
    row = Row("certified", spec.method, "ok", period=spec.period,
              sector_gamma=spec.sector_gamma if spec.method == "bootstrap" else None,
              horizon=(spec.horizon or spec.period) if spec.method == "fir_nominal" else None)
    if spec.method == "nominal":
        row.period = None
    t0 = time.perf_counter()
    try:
        res = min_l2_gain(spec.method, cfg.plant, cfg.controller, spec.period,
                          spec.sector_gamma, spec.horizon, solver=cfg.solver)
    except AnalysisError as exc:
        row.status, row.message = "failed", f"{exc} [{exc.status}]"
    except Exception as exc:  # recorded per row; the run continues
        row.status, row.message = "failed", f"{type(exc).__name__}: {exc}"
    else:
        if res.feasible:
            row.gain = res.certified_gain
        else:
            row.status, row.message = "infeasible", str(res.solver_stats.get("status", ""))
    row.seconds = time.perf_counter() - t0
    return row


def _simulate(cfg: BenchmarkConfig, variant: str) -> Row:
    s = cfg.simulation
    row = Row("simulation", variant, "ok", period=s.period if variant in ("reset", "bootstrap", "fir") else None)
    t0 = time.perf_counter()
    gains, notes = [], []
    for seed in s.seeds:
        sc = SimScenario(variant=variant, steps=s.steps, period=s.period, seed=seed,
                         amplitude=s.amplitude, error_policy=s.error_policy,
                         state_scale=s.state_scale, reform_kind=s.reform_kind)
        try:
            res = simulate(cfg.plant, cfg.controller, sc)
        except Exception as exc:
            notes.append(f"seed {seed}: {type(exc).__name__}: {exc}")
            continue
        if res.status == "ok":
            gains.append(res.empirical_gain)
        else:
            notes.append(f"seed {seed}: {res.status}")
    row.samples = len(gains)
    if gains:
        row.gain, row.gain_min = max(gains), min(gains)
        row.gain_mean = math.fsum(gains) / len(gains)
    if notes:
        row.status, row.message = "failed", "; ".join(notes)
    row.seconds = time.perf_counter() - t0
    return row


def run_benchmark(config: BenchmarkConfig) -> Report:
    """Certified rows in config order, then one simulation row per variant.

    Simulation rows report the largest empirical gain over the seeds.
    """
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        certified = list(pool.map(lambda m: _certify(config, m), config.methods))
        simulated = list(pool.map(lambda v: _simulate(config, v), config.simulation.variants))
    report = Report(certified + simulated)
    if config.text_out:
        Path(config.text_out).write_text(report.to_text(), encoding="utf-8")
    if config.csv_out:
        Path(config.csv_out).write_text(report.to_csv(), encoding="utf-8")
    return report


def with_overrides(config: BenchmarkConfig, **kw) -> BenchmarkConfig:
    """Copy of ``config`` with non-None keyword overrides applied.

    ``period`` and ``steps``/``seeds`` reach into the method and simulation specs.
    """
    kw = {k: v for k, v in kw.items() if v is not None}
    methods, sim = config.methods, config.simulation
    if "period" in kw:
        p = kw.pop("period")
        methods = [replace(m, period=p) for m in methods]
        sim = replace(sim, period=p)
    if "sector_gamma" in kw:
        g = kw.pop("sector_gamma")
        methods = [replace(m, sector_gamma=g) for m in methods]
    if "method_names" in kw:
        names = kw.pop("method_names")
        base = {m.method: m for m in methods}
        methods = [base.get(n, MethodSpec(n, period=sim.period)) for n in names]
    for key in ("steps", "seeds", "variants", "error_policy"):
        if key in kw:
            sim = replace(sim, **{key: kw.pop(key)})
    return replace(config, methods=methods, simulation=sim, **kw)
