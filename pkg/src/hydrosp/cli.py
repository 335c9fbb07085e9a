"""Experiment runner: config loading, model assembly, artifact writing.

Commands: ``solve``, ``saa``, ``evaluate``, ``water-value``.  Configuration
comes from a YAML file plus command-line overrides; any config key can be
set with a ``--dotted.path value`` pair.  All artifacts are deterministic:
rerunning a command with the same inputs and seed reproduces them byte for
byte.

Exit codes: 0 success, 1 solver non-convergence, 2 configuration error,
3 internal numerical failure.
"""

from dataclasses import dataclass
import argparse
import copy
import csv
import json
import math
import os
import sys

import numpy as np
import yaml

from .core import (FiniteProgram, check_first_stage_feasible,
                   evaluate_decision, expected_scenario, scenario_stages,
                   solve_expected_value_problem, solve_stage)
from .hydro import (Resolution, default_initial_volumes, default_river,
                    load_river, rescale)
from .lshaped import (LShapedConfig, NonConvergenceError, TrustRegionConfig,
                      solve as lshaped_solve, write_iteration_log)
from .models import (CostParams, PenaltyConfig, WaterValueError,
                     WaterValuePool, build_capacity, build_day_ahead,
                     build_maintenance, compute_water_value)
from .saa import child_seed, eev_interval, saa_refine, vss_interval
from .scenarios import (SamplerConfig, default_blocks, price_levels,
                        sample_capacity_horizon, sample_day_ahead_set)

# child-seed roles used by this module; roles 0-4 belong to the SAA driver
_ROLE_EV_INSTANCE = 5
_ROLE_WATER_VALUE = 6
_ROLE_LEVELS = 7

_MODELS = ("day-ahead", "maintenance", "capacity")

DEFAULTS = {
    "river": None,               # packaged Skelleftealven data when null
    "model": "day-ahead",
    "seed": 0,
    "scenarios": 50,
    "output": "out",
    "resolution": None,          # hours per period; model default when null
    "horizon_days": 365,
    "levels": 5,
    "block_width": 4,
    "m0_fraction": 0.5,
    "sampler": {
        "price_noise": 2.0,
        "inflow_noise": 0.3,
        "inflow_fraction": 0.1,
        "price_season_amplitude": 0.1,
        "inflow_season_amplitude": 0.3,
        "ar_coef": 0.6,
        "anchor_month": 6,
        "rate_cap": 0.04,
    },
    "solver": {
        "formulation": "multi",
        "groups": None,
        "consolidation_age": None,
        "max_iterations": 200,
        "gap_tol": 1e-7,
        "workers": None,
        "node_limit": 100000,
        "timings": False,
        "trust_region": {
            "enabled": False,
            "delta0": 0.1,
            "eta": 0.1,
            "expand": 2.0,
            "shrink": 0.5,
            "delta_max": 1.0,
            "expand_threshold": 0.75,
            "default_span": 1e4,
        },
    },
    "saa": {
        "schedule": [10, 50, 100, 500],
        "M": 10,
        "T": 10,
        "eval_n": 1000,
        "alpha": 0.05,
        "rel_width_tol": 1e-12,
    },
    "penalties": {
        "peak_start": 8,
        "peak_stop": 20,
        "alpha_peak": 0.85,
        "beta_peak": 1.15,
        "alpha_off": 0.90,
        "beta_off": 1.10,
    },
    "maintenance_durations": None,   # {plant_id: hours} overrides
    "capacity": {
        "rate": 0.05,
        "unit_cost": 0.79,
        "payback_years": 40,
        "total_cap_mw": 1000.0,
        "per_plant_cap_mw": 1000.0,
    },
    "water_value": {
        "cuts": None,            # CSV path; computed in-process when null
        "scenarios": 3,
        "horizon_hours": 168,
        "m_grid": None,          # reservoir fill fractions for anchor cuts
    },
    "evaluate": {
        "strategy": None,
        "schedule": None,
        "expansion": None,
    },
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# --- configuration --------------------------------------------------------


def _merge(base, incoming, path=""):
    if not isinstance(incoming, dict):
        raise ConfigError(f"config section {path or '<root>'!r} must be a mapping")
    for key, value in incoming.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and base[key] and isinstance(value, dict):
            _merge(base[key], value, path + key + ".")
        else:
            base[key] = value


def _apply_override(cfg, dotted, text):
    try:
        value = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value {text!r} for {dotted!r}: {exc}")
    parts = dotted.split(".")
    node = cfg
    for i, part in enumerate(parts[:-1]):
        if part not in node:
            raise ConfigError(f"unknown config key {dotted!r}")
        if node[part] is None:
            node[part] = {}
        if not isinstance(node[part], dict):
            raise ConfigError(f"config key {'.'.join(parts[:i + 1])!r} is not a section")
        node = node[part]
    leaf = parts[-1]
    # sections with fixed keys reject typos; open mappings accept any key
    if node and leaf not in node and any(k in DEFAULTS for k in (parts[0],)) \
            and _fixed_section(parts[:-1]):
        raise ConfigError(f"unknown config key {dotted!r}")
    node[leaf] = value


def _fixed_section(parts):
    node = DEFAULTS
    for part in parts:
        if not isinstance(node, dict) or part not in node:
            return False
        node = node[part]
    return isinstance(node, dict) and bool(node)


def _parse_overrides(tokens):
    pairs = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for override {tok!r}")
            value = tokens[i + 1]
            i += 1
        if not key:
            raise ConfigError(f"malformed override {tok!r}")
        pairs.append((key, value))
        i += 1
    return pairs


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings; one instance drives one command."""

    river: str
    model: str
    seed: int
    scenarios: int
    output: str
    resolution: int
    horizon_days: int
    levels: int
    block_width: int
    m0_fraction: float
    sampler: dict
    solver: dict
    saa: dict
    penalties: dict
    maintenance_durations: dict
    capacity: dict
    water_value: dict
    evaluate: dict

    def __post_init__(self):
        if self.model not in _MODELS:
            raise ConfigError(f"unknown model {self.model!r}; "
                              f"expected one of {', '.join(_MODELS)}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if not isinstance(self.scenarios, int) or self.scenarios < 1:
            raise ConfigError("scenarios must be a positive integer")
        if self.resolution is not None and (
                not isinstance(self.resolution, int) or self.resolution < 1):
            raise ConfigError("resolution must be a positive number of hours")
        if not isinstance(self.horizon_days, int) or self.horizon_days < 1:
            raise ConfigError("horizon-days must be a positive integer")
        if not isinstance(self.levels, int) or self.levels < 1:
            raise ConfigError("levels must be a positive integer")
        if not isinstance(self.block_width, int) or self.block_width < 1:
            raise ConfigError("block_width must be a positive integer")
        if not 0.0 <= self.m0_fraction <= 1.0:
            raise ConfigError("m0_fraction must lie in [0, 1]")
        alpha = self.saa["alpha"]
        if not 0.0 < alpha < 0.5:
            raise ConfigError("saa.alpha must lie in (0, 0.5)")
        if self.river is not None and not os.path.exists(self.river):
            raise ConfigError(f"river file not found: {self.river}")
        cuts = self.water_value["cuts"]
        if cuts is not None and not os.path.exists(cuts):
            raise ConfigError(f"water value cut file not found: {cuts}")
        wh = self.water_value["horizon_hours"]
        if not isinstance(wh, int) or wh < 24 or wh % 24:
            raise ConfigError("water_value.horizon_hours must be a positive "
                              "multiple of 24")

    @classmethod
    def from_sources(cls, args, overrides):
        cfg = copy.deepcopy(DEFAULTS)
        if args.config is not None:
            if not os.path.exists(args.config):
                raise ConfigError(f"config file not found: {args.config}")
            with open(args.config) as fh:
                loaded = yaml.safe_load(fh)
            if loaded is not None:
                _merge(cfg, loaded)
        for flag in ("model", "scenarios", "seed", "output", "resolution",
                     "horizon_days"):
            value = getattr(args, flag)
            if value is not None:
                cfg[flag] = value
        for key, text in overrides:
            _apply_override(cfg, key, text)
        return cls(**cfg)


# --- assembly helpers -----------------------------------------------------


def _network(cfg):
    if cfg.river is None:
        return default_river()
    return load_river(cfg.river)


def _sampler_config(cfg, seed):
    s = cfg.sampler
    return SamplerConfig(
        seed=int(seed),
        price_noise=float(s["price_noise"]),
        inflow_noise=float(s["inflow_noise"]),
        inflow_fraction=float(s["inflow_fraction"]),
        price_season_amplitude=float(s["price_season_amplitude"]),
        inflow_season_amplitude=float(s["inflow_season_amplitude"]),
        ar_coef=float(s["ar_coef"]),
        anchor_month=int(s["anchor_month"]),
        rate_cap=float(s["rate_cap"]),
    )


def _solver_config(cfg):
    s = cfg.solver
    t = s["trust_region"]
    tr = TrustRegionConfig(
        enabled=bool(t["enabled"]),
        delta0=float(t["delta0"]),
        eta=float(t["eta"]),
        expand=float(t["expand"]),
        shrink=float(t["shrink"]),
        delta_max=float(t["delta_max"]),
        expand_threshold=float(t["expand_threshold"]),
        default_span=float(t["default_span"]),
    )
    age = s["consolidation_age"]
    if isinstance(age, str):
        if age.lower() not in ("inf", "infinity"):
            raise ConfigError(f"bad consolidation_age {age!r}")
        age = math.inf
    if s["formulation"] == "partial" and not s["groups"]:
        raise ConfigError("partial aggregation needs solver.groups")
    return LShapedConfig(
        formulation=s["formulation"],
        groups=s["groups"],
        consolidation_age=age,
        trust_region=tr,
        max_iterations=int(s["max_iterations"]),
        gap_tol=float(s["gap_tol"]),
        workers=s["workers"],
        node_limit=int(s["node_limit"]),
        timings=bool(s["timings"]),
    )


def _resolution(cfg):
    if cfg.model == "capacity":
        return Resolution(cfg.resolution if cfg.resolution else 24)
    if cfg.resolution not in (None, 1):
        raise ConfigError(f"the {cfg.model} model runs at hourly resolution")
    return Resolution(1)


def _initial_volumes(cfg, network, resolution):
    if cfg.m0_fraction == 0.5:
        return None              # builders default to half-full reservoirs
    return default_initial_volumes(rescale(network, resolution),
                                   cfg.m0_fraction)


def _water_value_pool(cfg, network):
    wv = cfg.water_value
    if wv["cuts"] is not None:
        return WaterValuePool.from_csv(wv["cuts"])
    return _compute_pool(cfg, network)


def _compute_pool(cfg, network):
    wv = cfg.water_value
    n = int(wv["scenarios"])
    if n < 1:
        raise ConfigError("water_value.scenarios must be positive")
    sc = _sampler_config(cfg, child_seed(cfg.seed, _ROLE_WATER_VALUE, 0))
    days = wv["horizon_hours"] // 24
    scens = [sample_capacity_horizon(sc, network, days, Resolution(1), i)
             for i in range(n)]
    m_grid = None
    if wv["m_grid"] is not None:
        fractions = [float(f) for f in wv["m_grid"]]
        if any(not 0.0 <= f <= 1.0 for f in fractions):
            raise ConfigError("water_value.m_grid fractions must lie in [0, 1]")
        scaled = rescale(network, Resolution(1))
        m_grid = np.array([f * scaled.max_volume for f in fractions])
    return compute_water_value(network, scens, m_grid=m_grid,
                               horizon_hours=wv["horizon_hours"])


def _build_training(cfg, network, levels_source=None):
    """Model plus its finite program over the training sample set.

    levels_source: samples used for bid price levels; defaults to the
    training samples themselves so solve and evaluate agree exactly.
    """
    resolution = _resolution(cfg)
    pool = None
    if cfg.model == "capacity":
        sc = _sampler_config(cfg, cfg.seed)
        samples = [sample_capacity_horizon(sc, network, cfg.horizon_days,
                                           resolution, i)
                   for i in range(cfg.scenarios)]
        model = build_capacity(network, resolution, cfg.horizon_days,
                               _cost_params(cfg),
                               m0=_initial_volumes(cfg, network, resolution))
        return model, FiniteProgram(model.program, samples), pool

    sc = _sampler_config(cfg, cfg.seed)
    samples = sample_day_ahead_set(sc, network, cfg.scenarios)
    levels = price_levels(levels_source or samples, cfg.levels)
    pens = PenaltyConfig(
        peak_start=int(cfg.penalties["peak_start"]),
        peak_stop=int(cfg.penalties["peak_stop"]),
        alpha_peak=float(cfg.penalties["alpha_peak"]),
        beta_peak=float(cfg.penalties["beta_peak"]),
        alpha_off=float(cfg.penalties["alpha_off"]),
        beta_off=float(cfg.penalties["beta_off"]),
    )
    m0 = _initial_volumes(cfg, network, resolution)
    if cfg.model == "day-ahead":
        pool = _water_value_pool(cfg, network)
        horizon = levels.values.shape[1]
        blocks = default_blocks(horizon, cfg.block_width)
        model = build_day_ahead(network, levels, blocks=blocks,
                                water_value=pool, penalties=pens, m0=m0)
    else:
        durations = cfg.maintenance_durations
        model = build_maintenance(network, levels,
                                  maintenance_durations=durations,
                                  penalties=pens, m0=m0)
    return model, FiniteProgram(model.program, samples), pool


def _cost_params(cfg):
    c = cfg.capacity
    unit = c["unit_cost"]
    if isinstance(unit, str):
        if unit.lower() not in ("inf", "infinity"):
            raise ConfigError(f"bad capacity.unit_cost {unit!r}")
        unit = math.inf
    return CostParams(
        rate=float(c["rate"]),
        unit_cost=float(unit),
        payback_years=float(c["payback_years"]),
        total_cap_mw=float(c["total_cap_mw"]),
        per_plant_cap_mw=float(c["per_plant_cap_mw"]),
    )


# --- artifact writers -----------------------------------------------------


def _fmt(value):
    return repr(float(value))


def _write_json(path, payload):
    text = json.dumps(payload, sort_keys=True, indent=2)
    with open(path, "w") as fh:
        fh.write(text + "\n")
    return text


def _witness(model, fp, x):
    """Second-stage solution under the probability-weighted mean scenario."""
    mean = expected_scenario(fp.scenarios, fp.probabilities)
    stage = fp.program.second_stage(mean)
    sol = solve_stage(stage, np.asarray(x, dtype=np.float64),
                      fp.program.sign)
    if sol.status != "optimal":
        raise RuntimeError(f"mean-scenario recourse solve {sol.status}")
    return model.schedule_from_y(sol.x)


def _write_production_csv(path, model, sched):
    scaled = model.scaled
    hpp = scaled.hours_per_period
    plants = list(scaled.network.plant_ids)
    T = sched.production.shape[0]
    blocks = getattr(model, "blocks", ())
    with open(path, "w", newline="") as fh:
        fh.write("# units: production/committed/deficit/surplus MWh per "
                 "period, discharge/spill m3/s period average, volume HE\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", "plant_id", "production_mwh", "discharge_m3s",
                    "spill_m3s", "volume_he", "committed_mwh", "deficit_mwh",
                    "surplus_mwh"])
        for t in range(T):
            for h, pid in enumerate(plants):
                q1, q2 = sched.discharge[h, 0, t], sched.discharge[h, 1, t]
                prod = scaled.mu1[h] * q1 + scaled.mu2[h] * q2
                w.writerow([t, pid, _fmt(prod), _fmt(q1 + q2),
                            _fmt(sched.spill[h, t]),
                            _fmt(sched.volume[h, t] * hpp), "", "", ""])
            committed = ""
            if sched.y is not None:
                total = float(sched.y[t])
                for b, (start, stop) in enumerate(blocks):
                    if start <= t < stop:
                        total += float(sched.yb[b])
                committed = _fmt(total)
            w.writerow([
                t, "system", _fmt(sched.production[t]), "", "", "", committed,
                _fmt(sched.yplus[t]) if sched.yplus is not None else "",
                _fmt(sched.yminus[t]) if sched.yminus is not None else "",
            ])


def _write_intervals_csv(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write("# units: Eur\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", "lo", "hi", "kind"])
        for rep in rows:
            w.writerow([rep.N, _fmt(rep.lo), _fmt(rep.hi), rep.kind])


def _report_dict(rep):
    return json.loads(rep.to_json())


def _imbalance_diagnostics(model, fp, x):
    """Probability-weighted mean production and imbalance over scenarios."""
    x = np.asarray(x, dtype=np.float64)
    sign = fp.program.sign
    prod = deficit = surplus = 0.0
    for prob, stage in zip(fp.probabilities, scenario_stages(fp)):
        sol = solve_stage(stage, x, sign)
        if sol.status != "optimal":
            raise RuntimeError(f"scenario recourse solve {sol.status}")
        sched = model.schedule_from_y(sol.x)
        prod += prob * float(sched.production.sum())
        if sched.yplus is not None:
            deficit += prob * float(sched.yplus.sum())
            surplus += prob * float(sched.yminus.sum())
    return {
        "mean_production_mwh": prod,
        "mean_deficit_mwh": deficit,
        "mean_surplus_mwh": surplus,
    }


# --- commands -------------------------------------------------------------


def cmd_solve(cfg):
    network = _network(cfg)
    model, fp, pool = _build_training(cfg, network)
    result = lshaped_solve(fp, _solver_config(cfg))

    out = cfg.output
    os.makedirs(out, exist_ok=True)
    write_iteration_log(os.path.join(out, "iterations.csv"), result.log)
    if cfg.model == "capacity":
        model.plan_from_x(result.x).to_csv(os.path.join(out, "expansion.csv"))
        _write_production_csv(os.path.join(out, "schedule.csv"), model,
                              _witness(model, fp, result.x))
    elif cfg.model == "maintenance":
        model.strategy_from_x(result.x).to_csv(
            os.path.join(out, "strategy.csv"))
        model.schedule_from_x(result.x).to_csv(
            os.path.join(out, "schedule.csv"))
    else:
        model.strategy_from_x(result.x).to_csv(
            os.path.join(out, "strategy.csv"))
        _write_production_csv(os.path.join(out, "schedule.csv"), model,
                              _witness(model, fp, result.x))
        pool.to_csv(os.path.join(out, "cuts.csv"))

    payload = {
        "command": "solve",
        "model": cfg.model,
        "objective": float(result.objective),
        "sense": fp.program.sense,
        "converged": bool(result.converged),
        "iterations": int(result.iterations),
        "scenarios": int(cfg.scenarios),
        "seed": int(cfg.seed),
    }
    if cfg.model == "capacity":
        payload["periods"] = int(model.layout.horizon)
    print(_write_json(os.path.join(out, "objective.json"), payload))
    if not result.converged:
        _emit_error(1, "NonConvergenceError",
                    f"stopped after {result.iterations} iterations above "
                    "gap tolerance; best incumbent written")
        return 1
    return 0


def cmd_saa(cfg):
    network = _network(cfg)
    saa = cfg.saa
    resolution = _resolution(cfg)

    if cfg.model == "capacity":
        model = build_capacity(network, resolution, cfg.horizon_days,
                               _cost_params(cfg),
                               m0=_initial_volumes(cfg, network, resolution))

        def sampler(seed, n):
            sc = _sampler_config(cfg, seed)
            samples = [sample_capacity_horizon(sc, network, cfg.horizon_days,
                                               resolution, i)
                       for i in range(n)]
            return FiniteProgram(model.program, samples)
    else:
        # bid levels must be identical across SAA instances, so they come
        # from a dedicated reference sample set
        ref_cfg = _sampler_config(cfg, child_seed(cfg.seed, _ROLE_LEVELS, 0))
        ref = sample_day_ahead_set(ref_cfg, network, cfg.scenarios)
        model, _, _ = _build_training(cfg, network, levels_source=ref)

        def sampler(seed, n):
            sc = _sampler_config(cfg, seed)
            return FiniteProgram(model.program,
                                 sample_day_ahead_set(sc, network, n))

    solver_cfg = _solver_config(cfg)

    def solver(fp):
        return lshaped_solve(fp, solver_cfg)

    final, history = saa_refine(
        sampler, float(saa["alpha"]), float(saa["rel_width_tol"]), solver,
        schedule=tuple(int(n) for n in saa["schedule"]),
        M=int(saa["M"]), T=int(saa["T"]), seed=cfg.seed,
        workers=cfg.solver["workers"])

    eval_n = int(saa["eval_n"])
    ev_fp = sampler(child_seed(cfg.seed, _ROLE_EV_INSTANCE, 0), eval_n)
    x_bar = solve_expected_value_problem(ev_fp)
    eev = eev_interval(x_bar, sampler, eval_n, float(saa["alpha"]),
                       seed=cfg.seed, workers=cfg.solver["workers"])
    vss = vss_interval(final, eev)

    out = cfg.output
    os.makedirs(out, exist_ok=True)
    _write_intervals_csv(os.path.join(out, "intervals.csv"),
                         history + [eev, vss])
    payload = {
        "command": "saa",
        "model": cfg.model,
        "objective": float(final.estimate),
        "seed": int(cfg.seed),
        "alpha": float(saa["alpha"]),
        "vrp": _report_dict(final),
        "eev": _report_dict(eev),
        "vss": _report_dict(vss),
        "vss_significant": bool(vss.significant),
        "history_N": [int(rep.N) for rep in history],
    }
    print(_write_json(os.path.join(out, "objective.json"), payload))
    return 0


def cmd_evaluate(cfg):
    network = _network(cfg)
    model, fp, _ = _build_training(cfg, network)
    paths = cfg.evaluate

    def _need(key):
        path = paths[key]
        if path is None:
            raise ConfigError(f"evaluate.{key} must point at a CSV file")
        if not os.path.exists(path):
            raise ConfigError(f"evaluate.{key} file not found: {path}")
        return path

    used = []
    if cfg.model == "capacity":
        from .models import ExpansionPlan
        plan = ExpansionPlan.from_csv(_need("expansion"))
        x = model.x_from_plan(plan)
        used.append(paths["expansion"])
    elif cfg.model == "maintenance":
        from .models import DayAheadStrategy, MaintenanceSchedule
        strategy = DayAheadStrategy.from_csv(_need("strategy"))
        schedule = MaintenanceSchedule.from_csv(_need("schedule"))
        x = model.x_from_parts(strategy, schedule)
        used.extend([paths["strategy"], paths["schedule"]])
    else:
        from .models import DayAheadStrategy
        strategy = DayAheadStrategy.from_csv(_need("strategy"))
        x = model.x_from_strategy(strategy)
        used.append(paths["strategy"])

    check_first_stage_feasible(fp.program.first_stage, x)
    value = evaluate_decision(fp, x)
    payload = {
        "command": "evaluate",
        "model": cfg.model,
        "objective": float(value),
        "scenarios": int(cfg.scenarios),
        "seed": int(cfg.seed),
        "decision_files": used,
    }
    payload.update(_imbalance_diagnostics(model, fp, x))
    out = cfg.output
    os.makedirs(out, exist_ok=True)
    print(_write_json(os.path.join(out, "objective.json"), payload))
    return 0


def cmd_water_value(cfg):
    network = _network(cfg)
    pool = _compute_pool(cfg, network)
    out = cfg.output
    os.makedirs(out, exist_ok=True)
    pool.to_csv(os.path.join(out, "cuts.csv"))
    payload = {
        "command": "water-value",
        "cuts": len(pool.cuts),
        "plants": list(pool.plant_ids),
        "scenarios": int(cfg.water_value["scenarios"]),
        "horizon_hours": int(cfg.water_value["horizon_hours"]),
        "seed": int(cfg.seed),
    }
    print(_write_json(os.path.join(out, "objective.json"), payload))
    return 0


# --- entry point ----------------------------------------------------------


def _emit_error(code, kind, message):
    sys.stderr.write(json.dumps(
        {"code": code, "error": kind, "message": message},
        sort_keys=True) + "\n")


_COMMANDS = {
    "solve": cmd_solve,
    "saa": cmd_saa,
    "evaluate": cmd_evaluate,
    "water-value": cmd_water_value,
}


def main(argv=None):
    parser = _Parser(prog="hydrosp",
                     description="Stochastic hydropower planning experiments")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="YAML experiment configuration")
    parser.add_argument("--model", choices=_MODELS)
    parser.add_argument("--scenarios", type=int, metavar="N")
    parser.add_argument("--seed", type=int, metavar="U64")
    parser.add_argument("--output", metavar="DIR")
    parser.add_argument("--resolution", type=int, metavar="HOURS")
    parser.add_argument("--horizon-days", type=int, dest="horizon_days",
                        metavar="D")
    try:
        args, extra = parser.parse_known_args(argv)
        overrides = _parse_overrides(extra)
        cfg = ExperimentConfig.from_sources(args, overrides)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        _emit_error(2, type(exc).__name__, str(exc))
        return 2
    except (NonConvergenceError, WaterValueError) as exc:
        _emit_error(1, type(exc).__name__, str(exc))
        return 1
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _emit_error(3, type(exc).__name__, str(exc))
        return 3


if __name__ == "__main__":
    sys.exit(main())
