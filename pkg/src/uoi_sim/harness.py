"""Experiment orchestration: config ingestion, replication management,
metric aggregation and file export.

Configs are JSON objects with nested sections.  Unknown keys anywhere are
rejected with a diagnostic naming the offending field, so a typo in a
sweep cannot silently fall back to a default.  Compared policies within
one run get fresh stream factories built from the same seed, i.e. common
random numbers.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .control import LinearPlant, ReferencePath
from .core import (ConstantWeights, PeriodicBurstWeights, TerminalParams,
                   TwoPointWeights, WeightProcess)
from .csma import ContentionConfig
from .mdp import MdpGrid, calibrate_multiplier
from .multi import FleetConfig, fleet_uoi_bound, waterfill
from .rng import StreamFactory
from .sim import (SimResult, run_fleet, run_single, run_tracking,
                  stderr_from_batches)
from .single import adaptive_uoi_bound

SCENARIOS = ("single", "multi", "csma", "mdp", "control", "waterfill")

MULTI_POLICY_SCHEDULER = {
    "centralized": "centralized",
    "aoi": "aoi",
    "round-robin": "round-robin",
    "stationary": "stationary",
    "distributed": "csma",
}


class ConfigError(ValueError):
    """Invalid experiment configuration; `field` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field {field_name!r}: {message}")
        self.field = field_name


def _take(d: dict, field_name: str, caster, default, path: str):
    value = d.pop(field_name, None)
    if value is None:
        return default
    try:
        return caster(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}{field_name}", str(exc)) from exc


def _reject_unknown(d: dict, path: str = ""):
    if d:
        key = sorted(d)[0]
        raise ConfigError(f"{path}{key}", "unknown key")


def weight_process_from_dict(d: dict | None, path: str = "weights.") -> WeightProcess:
    if d is None:
        return TwoPointWeights(w_lo=1.0, w_hi=100.0, prob_hi=0.01)
    d = dict(d)
    kind = _take(d, "kind", str, "two-point", path)
    try:
        if kind == "two-point":
            proc = TwoPointWeights(
                w_lo=_take(d, "w_lo", float, 1.0, path),
                w_hi=_take(d, "w_hi", float, 100.0, path),
                prob_hi=_take(d, "prob_hi", float, 0.01, path))
        elif kind == "constant":
            proc = ConstantWeights(w=_take(d, "w", float, 1.0, path))
        elif kind == "periodic-burst":
            proc = PeriodicBurstWeights(
                base=_take(d, "base", float, 1.0, path),
                burst=_take(d, "burst", float, 100.0, path),
                period=_take(d, "period", int, 5000, path),
                burst_len=_take(d, "burst_len", int, 50, path))
        else:
            raise ConfigError(f"{path}kind", f"unknown weight process {kind!r}")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}kind", str(exc)) from exc
    _reject_unknown(d, path)
    return proc


@dataclass
class ExperimentConfig:
    scenario: str
    horizon: int = 1_000_000
    replications: int = 1
    seed: int = 12345
    policies: tuple[str, ...] = ()
    rho: float = 0.25
    v: float = 1.0
    p: float = 0.8
    sigma2: float = 1.0
    weights: WeightProcess = field(default_factory=lambda: TwoPointWeights(1.0, 100.0, 0.01))
    # fleet
    n: int = 10
    k: int = 2
    p_min: float = 0.7
    p_max: float = 1.0
    # csma
    window: int = 16
    mini_slot_us: float = 10.0
    # control
    a: float = 1.0
    b: float = 1.0
    noise_var: float = 1.0
    y_ref: ReferencePath = field(default_factory=ReferencePath)
    # mdp
    mdp_cost: str = "uoi"
    q_max: float | None = None
    q_step: float | None = None
    # metrics
    thresholds: dict[float, float] = field(default_factory=lambda: {1.0: 15.0, 100.0: 5.0})
    trace: bool = False
    n_batches: int = 10

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.horizon < 1:
            raise ConfigError("horizon", "must be at least 1")
        if self.replications < 1:
            raise ConfigError("replications", "must be at least 1")
        if not 0.0 < self.rho <= 1.0:
            raise ConfigError("rho", f"must be in (0, 1], got {self.rho}")
        for w, bound in self.thresholds.items():
            if bound <= 0.0:
                raise ConfigError("thresholds", f"bound for weight {w} must be positive")
        if not self.policies:
            self.policies = _default_policies(self.scenario)
        unknown = [p for p in self.policies if p not in _allowed_policies(self.scenario)]
        if unknown:
            raise ConfigError("policies", f"{unknown[0]!r} not valid for scenario "
                                          f"{self.scenario!r}")


def _default_policies(scenario: str) -> tuple[str, ...]:
    return {
        "single": ("adaptive",),
        "multi": ("centralized",),
        "csma": ("distributed",),
        "mdp": ("rvi",),
        "control": ("adaptive",),
        "waterfill": ("stationary",),
    }[scenario]


def _allowed_policies(scenario: str) -> tuple[str, ...]:
    return {
        "single": ("adaptive", "periodic", "random", "age-threshold", "rvi-uoi", "rvi-aoi"),
        "multi": ("centralized", "aoi", "round-robin", "stationary"),
        "csma": ("distributed", "centralized"),
        "mdp": ("rvi",),
        "control": ("adaptive", "periodic", "random", "age-threshold"),
        "waterfill": ("stationary",),
    }[scenario]


def config_from_dict(raw: dict) -> ExperimentConfig:
    d = dict(raw)
    scenario = _take(d, "scenario", str, None, "")
    if scenario is None:
        raise ConfigError("scenario", "is required")

    weights = weight_process_from_dict(d.pop("weights", None))

    terminal = dict(d.pop("terminal", {}) or {})
    p = _take(terminal, "p", float, 0.8, "terminal.")
    sigma2 = _take(terminal, "sigma2", float, 1.0, "terminal.")
    _reject_unknown(terminal, "terminal.")

    fleet = dict(d.pop("fleet", {}) or {})
    n = _take(fleet, "n", int, 10, "fleet.")
    k = _take(fleet, "k", int, 2, "fleet.")
    p_min = _take(fleet, "p_min", float, 0.7, "fleet.")
    p_max = _take(fleet, "p_max", float, 1.0, "fleet.")
    fleet_sigma2 = _take(fleet, "sigma2", float, None, "fleet.")
    if fleet_sigma2 is not None:
        sigma2 = fleet_sigma2
    _reject_unknown(fleet, "fleet.")

    contention = dict(d.pop("contention", {}) or {})
    window = _take(contention, "w", int, 16, "contention.")
    mini_slot_us = _take(contention, "mini_slot_us", float, 10.0, "contention.")
    _reject_unknown(contention, "contention.")

    control = dict(d.pop("control", {}) or {})
    a = _take(control, "a", float, 1.0, "control.")
    b = _take(control, "b", float, 1.0, "control.")
    noise_var = _take(control, "noise_var", float, 1.0, "control.")
    y_raw = dict(control.pop("y_ref", {}) or {})
    y_ref = ReferencePath(
        kind=_take(y_raw, "kind", str, "constant", "control.y_ref."),
        value=_take(y_raw, "value", float, 0.0, "control.y_ref."),
        amplitude=_take(y_raw, "amplitude", float, 1.0, "control.y_ref."),
        period=_take(y_raw, "period", float, 1000.0, "control.y_ref."))
    _reject_unknown(y_raw, "control.y_ref.")
    _reject_unknown(control, "control.")

    mdp = dict(d.pop("mdp", {}) or {})
    mdp_cost = _take(mdp, "cost", str, "uoi", "mdp.")
    q_max = _take(mdp, "q_max", float, None, "mdp.")
    q_step = _take(mdp, "q_step", float, None, "mdp.")
    _reject_unknown(mdp, "mdp.")
    if mdp_cost not in ("uoi", "aoi"):
        raise ConfigError("mdp.cost", f"must be 'uoi' or 'aoi', got {mdp_cost!r}")

    thr_raw = d.pop("thresholds", None)
    if thr_raw is None:
        thresholds = {1.0: 15.0, 100.0: 5.0}
    else:
        try:
            thresholds = {float(kk): float(vv) for kk, vv in thr_raw.items()}
        except (TypeError, ValueError) as exc:
            raise ConfigError("thresholds", str(exc)) from exc

    policies = d.pop("policies", None)
    if policies is not None and not isinstance(policies, (list, tuple)):
        raise ConfigError("policies", "must be a list of policy names")

    cfg = ExperimentConfig(
        scenario=scenario,
        horizon=_take(d, "horizon", int, 1_000_000, ""),
        replications=_take(d, "replications", int, 1, ""),
        seed=_take(d, "seed", int, 12345, ""),
        policies=tuple(policies) if policies else (),
        rho=_take(d, "rho", float, 0.25, ""),
        v=_take(d, "v", float, 1.0, ""),
        p=p, sigma2=sigma2, weights=weights,
        n=n, k=k, p_min=p_min, p_max=p_max,
        window=window, mini_slot_us=mini_slot_us,
        a=a, b=b, noise_var=noise_var, y_ref=y_ref,
        mdp_cost=mdp_cost, q_max=q_max, q_step=q_step,
        thresholds=thresholds,
        trace=bool(d.pop("trace", False)),
        n_batches=_take(d, "n_batches", int, 10, ""),
    )
    _reject_unknown(d, "")
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("<file>", "top level must be a JSON object")
    return config_from_dict(raw)


@dataclass
class RunMetrics:
    scenario: str
    policy: str
    params: dict
    avg_uoi: float | None
    stderr_uoi: float | None
    avg_update_freq: np.ndarray | None
    violation_prob: float | None
    bound_value: float | None
    extras: dict = field(default_factory=dict)
    trace: list | None = None


# --------------------------------------------------------------------------
# Scenario runners.
# --------------------------------------------------------------------------


def build_fleet(config: ExperimentConfig) -> FleetConfig:
    """Terminals with success probabilities spread linearly over
    [p_min, p_max]; all share the weight process mean and sigma2."""
    omega_bar = config.weights.mean
    terminals = []
    for i in range(config.n):
        frac = i / (config.n - 1) if config.n > 1 else 0.0
        terminals.append(TerminalParams(
            id=i, p=config.p_min + (config.p_max - config.p_min) * frac,
            sigma2=config.sigma2, omega_bar=omega_bar))
    return FleetConfig(terminals=tuple(terminals), k=config.k)


def _aggregate(results: list[SimResult], horizon: int) -> tuple[float, float, np.ndarray, float | None]:
    avg = float(np.mean([r.avg_uoi for r in results]))
    if len(results) > 1:
        reps = np.array([r.avg_uoi for r in results])
        stderr = float(reps.std(ddof=1) / math.sqrt(len(reps)))
    else:
        stderr = stderr_from_batches(results[0].batch_means)
    freq = np.mean([r.update_freq for r in results], axis=0)
    viols = [r.violation_prob for r in results if r.violation_prob is not None]
    violation = float(np.mean(viols)) if viols else None
    return avg, stderr, freq, violation


def _run_single_scenario(config: ExperimentConfig) -> list[RunMetrics]:
    params = TerminalParams(id=0, p=config.p, sigma2=config.sigma2,
                            omega_bar=config.weights.mean)
    tables = {}
    for pol in config.policies:
        if pol in ("rvi-uoi", "rvi-aoi"):
            support = config.weights.support()
            if support is None:
                raise ConfigError("weights.kind",
                                  "rvi policies need an i.i.d. finite-support weight process")
            grid = _mdp_grid(config, support)
            _, tables[pol] = calibrate_multiplier(
                grid, params, config.rho, "uoi" if pol == "rvi-uoi" else "aoi")

    out = []
    bound = adaptive_uoi_bound(params, config.rho, config.v)
    for pol in config.policies:
        results = []
        for rep in range(config.replications):
            factory = StreamFactory(config.seed, rep)
            results.append(run_single(
                params, config.weights, config.rho, config.v, policy=pol,
                horizon=config.horizon, factory=factory,
                thresholds=config.thresholds, n_batches=config.n_batches,
                trace=config.trace and rep == 0, policy_table=tables.get(pol)))
        avg, stderr, freq, violation = _aggregate(results, config.horizon)
        out.append(RunMetrics(
            scenario="single", policy=pol,
            params={"rho": config.rho, "V": config.v, "N": 1, "p": config.p},
            avg_uoi=avg, stderr_uoi=stderr, avg_update_freq=freq,
            violation_prob=violation,
            bound_value=bound if pol == "adaptive" else None,
            extras={"h_over_t": results[0].extras.get("h_over_t")},
            trace=results[0].trace))
    return out


def _mdp_grid(config: ExperimentConfig, support) -> MdpGrid:
    sigma = math.sqrt(config.sigma2)
    q_max = config.q_max if config.q_max is not None else 25.0 * sigma
    q_step = config.q_step if config.q_step is not None else 0.25 * sigma
    return MdpGrid(q_max=q_max, q_step=q_step, weight_support=tuple(support))


def _run_fleet_scenario(config: ExperimentConfig) -> list[RunMetrics]:
    fleet = build_fleet(config)
    policy = waterfill(fleet)
    bound = fleet_uoi_bound(fleet, policy)
    weights = [config.weights] * fleet.n
    contention = ContentionConfig(w=config.window, k=config.k,
                                  mini_slot_us=config.mini_slot_us)
    out = []
    for pol in config.policies:
        scheduler = MULTI_POLICY_SCHEDULER[pol]
        results = []
        for rep in range(config.replications):
            factory = StreamFactory(config.seed, rep)
            results.append(run_fleet(
                fleet, weights, scheduler, pi=policy.pi, horizon=config.horizon,
                factory=factory,
                contention=contention if scheduler == "csma" else None,
                thresholds=config.thresholds, n_batches=config.n_batches,
                trace=config.trace and rep == 0))
        avg, stderr, freq, violation = _aggregate(results, config.horizon)
        params = {"N": fleet.n, "K": fleet.k, "rho": None, "V": None,
                  "W": config.window if scheduler == "csma" else None}
        extras = {"pi": policy.pi.tolist()}
        if scheduler == "csma":
            extras["wallclock_avg_uoi"] = float(np.mean(
                [r.extras["wallclock_avg_uoi"] for r in results]))
            extras["slot_scale"] = contention.slot_scale
        out.append(RunMetrics(
            scenario=config.scenario, policy=pol, params=params,
            avg_uoi=avg, stderr_uoi=stderr, avg_update_freq=freq,
            violation_prob=violation,
            bound_value=bound if pol in ("centralized", "stationary") else None,
            extras=extras, trace=results[0].trace))
    return out


def _run_mdp_scenario(config: ExperimentConfig) -> list[RunMetrics]:
    support = config.weights.support()
    if support is None:
        raise ConfigError("weights.kind",
                          "mdp scenario needs an i.i.d. finite-support weight process")
    params = TerminalParams(id=0, p=config.p, sigma2=config.sigma2,
                            omega_bar=config.weights.mean)
    grid = _mdp_grid(config, support)
    lam, table = calibrate_multiplier(grid, params, config.rho, config.mdp_cost)
    return [RunMetrics(
        scenario="mdp", policy=f"rvi-{config.mdp_cost}",
        params={"rho": config.rho, "N": 1, "p": config.p,
                "q_max": table.grid.q_max, "q_step": table.grid.q_step},
        avg_uoi=table.avg_cost, stderr_uoi=0.0,
        avg_update_freq=np.array([table.avg_freq]),
        violation_prob=None, bound_value=None,
        extras={"lam": lam, "gain": table.gain, "iterations": table.iterations,
                "policy_table": table})]


def _run_control_scenario(config: ExperimentConfig) -> list[RunMetrics]:
    plant = LinearPlant(a=config.a, b=config.b, noise_var=config.noise_var)
    out = []
    for pol in config.policies:
        reps = []
        for rep in range(config.replications):
            factory = StreamFactory(config.seed, rep)
            reps.append(run_tracking(
                plant, config.y_ref, config.weights, pol, config.rho, config.v,
                p_channel=config.p, horizon=config.horizon, factory=factory,
                n_batches=config.n_batches))
        track = float(np.mean([r.avg_track_cost for r in reps]))
        est = float(np.mean([r.avg_est_cost for r in reps]))
        avg_uoi = float(np.mean([r.avg_uoi for r in reps]))
        if len(reps) > 1:
            vals = np.array([r.avg_track_cost for r in reps])
            stderr = float(vals.std(ddof=1) / math.sqrt(len(vals)))
        else:
            stderr = stderr_from_batches(reps[0].track_batches)
        decomposition = config.a ** 2 * est + reps[0].omega_bar * config.noise_var
        out.append(RunMetrics(
            scenario="control", policy=pol,
            params={"rho": config.rho, "V": config.v, "N": 1,
                    "a": config.a, "b": config.b},
            avg_uoi=avg_uoi, stderr_uoi=stderr,
            avg_update_freq=np.array([float(np.mean([r.update_freq for r in reps]))]),
            violation_prob=None, bound_value=None,
            extras={"avg_track_cost": track, "avg_est_cost": est,
                    "decomposition_rhs": decomposition,
                    "noise_floor": reps[0].omega_bar * config.noise_var}))
    return out


def _run_waterfill_scenario(config: ExperimentConfig) -> list[RunMetrics]:
    fleet = build_fleet(config)
    policy = waterfill(fleet)
    return [RunMetrics(
        scenario="waterfill", policy="stationary",
        params={"N": fleet.n, "K": fleet.k},
        avg_uoi=None, stderr_uoi=None, avg_update_freq=policy.pi,
        violation_prob=None,
        bound_value=fleet_uoi_bound(fleet, policy),
        extras={"pi": policy.pi.tolist(), "objective": policy.objective})]


def run(config: ExperimentConfig) -> list[RunMetrics]:
    """Execute the configured scenario, one metrics row per policy."""
    dispatch = {
        "single": _run_single_scenario,
        "multi": _run_fleet_scenario,
        "csma": _run_fleet_scenario,
        "mdp": _run_mdp_scenario,
        "control": _run_control_scenario,
        "waterfill": _run_waterfill_scenario,
    }
    return dispatch[config.scenario](config)


# --------------------------------------------------------------------------
# Export.
# --------------------------------------------------------------------------

CSV_COLUMNS = ("scenario", "policy", "N", "K", "rho", "V", "W",
               "avg_uoi", "stderr_uoi", "avg_freq", "violation_prob", "bound")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".10g")


def _csv_row(m: RunMetrics) -> list[str]:
    freq = None
    if m.avg_update_freq is not None and len(m.avg_update_freq) > 0:
        freq = float(np.mean(m.avg_update_freq))
    return [
        m.scenario, m.policy,
        _fmt(m.params.get("N")), _fmt(m.params.get("K")),
        _fmt(m.params.get("rho")), _fmt(m.params.get("V")), _fmt(m.params.get("W")),
        _fmt(m.avg_uoi), _fmt(m.stderr_uoi), _fmt(freq),
        _fmt(m.violation_prob), _fmt(m.bound_value),
    ]


def _jsonable(m: RunMetrics) -> dict:
    d = {
        "scenario": m.scenario,
        "policy": m.policy,
        "params": {k: v for k, v in m.params.items()},
        "avg_uoi": m.avg_uoi,
        "stderr_uoi": m.stderr_uoi,
        "avg_update_freq": (None if m.avg_update_freq is None
                            else [float(x) for x in m.avg_update_freq]),
        "violation_prob": m.violation_prob,
        "bound": m.bound_value,
        "extras": {k: v for k, v in m.extras.items() if k != "policy_table"},
    }
    if m.trace is not None:
        d["trace"] = [list(row) for row in m.trace]
    return d


def export(rows: list[RunMetrics], fmt: str, path: str) -> list[str]:
    """Write metrics rows; returns the paths created.

    csv: fixed 12-column schema.  jsonl: one full object per row.  plot:
    one file per curve of (x, y, yerr) lines, where x is the row's sweep
    value (params['x'], else rho, else N) and curves are keyed by policy.
    """
    if not rows:
        raise ValueError("no metrics rows to export")
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        lines += [",".join(_csv_row(m)) for m in rows]
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        return [path]
    if fmt == "jsonl":
        with open(path, "w") as fh:
            for m in rows:
                fh.write(json.dumps(_jsonable(m), sort_keys=True) + "\n")
        return [path]
    if fmt == "plot":
        os.makedirs(path, exist_ok=True)
        curves: dict[str, list[tuple]] = {}
        for m in rows:
            key = m.policy
            if m.params.get("V") is not None:
                key += f"_V{_fmt(m.params['V'])}"
            if m.params.get("W") is not None:
                key += f"_W{_fmt(m.params['W'])}"
            x = m.params.get("x")
            if x is None:
                x = m.params.get("rho")
            if x is None:
                x = m.params.get("N")
            curves.setdefault(key, []).append((x, m.avg_uoi, m.stderr_uoi))
        written = []
        for key in sorted(curves):
            fname = os.path.join(path, f"curve_{key}.dat")
            with open(fname, "w") as fh:
                fh.write("# x avg_uoi stderr\n")
                for x, y, yerr in curves[key]:
                    fh.write(f"{_fmt(x)} {_fmt(y)} {_fmt(yerr)}\n")
            written.append(fname)
        return written
    raise ValueError(f"unknown export format {fmt!r}")
