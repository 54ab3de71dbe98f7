"""End-to-end benchmark harness for the four initialization strategies.

Runs the (method x horizon x seed) grid on a cached Lorenz x-coordinate
series, reports train/test RMSE per cell and renders a comparison table
(methods as rows, horizons as columns, median test RMSE across seeds).

Wall times are written to a separate timings file so the main report is a
pure function of the configuration (byte-identical across repeat runs).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import dynamics, init_schemes, linear_forecast, lm_trainer
from .dynamics import Dataset, LorenzParams, State3, TimeSeries

METHODS = ("linear", "nn-nw", "nn-lpc", "nn-lpc-improved")


@dataclass
class GenerationRecipe:
    sigma: float = 10.0
    r: float = 28.0
    b: float = 8.0 / 3.0
    s0: tuple = (1.0, 1.0, 1.0)
    t_end: float = 142.0
    dt_out: float = 0.01
    rel_tol: float = 1e-9
    t_skip: float = 20.0

    def params(self) -> LorenzParams:
        return LorenzParams(self.sigma, self.r, self.b)

    def key(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class ExperimentConfig:
    recipe: GenerationRecipe = field(default_factory=GenerationRecipe)
    p: int = 5
    hidden: tuple = (5, 5)
    horizons: tuple = (1, 2, 5, 10, 100)
    methods: tuple = METHODS
    seeds: tuple = (0, 1, 2)
    n_train: int = 10000
    n_test: int = 2000
    linearity_bound: float = 0.05
    objective: str = "grad_norm"
    parameterization: str = "exponential"
    improved_iters: int = 10
    improved_step: float = 0.1
    fd_step: float = 1e-5
    train: lm_trainer.TrainConfig = field(default_factory=lm_trainer.TrainConfig)
    output_dir: str = "out"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "recipe" in d:
            d["recipe"] = GenerationRecipe(**d["recipe"])
        if "train" in d:
            d["train"] = lm_trainer.TrainConfig(**d["train"])
        for key in ("hidden", "horizons", "methods", "seeds"):
            if key in d:
                d[key] = tuple(d[key])
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        return cls(**d)

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass
class CellResult:
    method: str
    horizon_s: float
    seed: int
    train_rmse: float
    test_rmse: float
    wall_s: float
    error: str = ""


def generate_series(recipe: GenerationRecipe, cache_dir=None) -> TimeSeries:
    """Lorenz x-coordinate series for the recipe, cached on disk by key."""
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        path = os.path.join(cache_dir, "series_%s.npz" % recipe.key())
        if os.path.exists(path):
            data = np.load(path)
            return TimeSeries(data["values"], float(data["dt"]), float(data["t0"]))
    xs, _, _ = dynamics.integrate_lorenz(
        recipe.params(), State3(*recipe.s0), recipe.t_end, recipe.dt_out,
        recipe.rel_tol)
    ts = dynamics.drop_transient(xs, recipe.t_skip)
    if cache_dir is not None:
        np.savez(path, values=ts.values, dt=ts.dt, t0=ts.t0)
    return ts


def build_datasets(series: TimeSeries, cfg: ExperimentConfig, horizon: int):
    full = dynamics.make_dataset(series, cfg.p, horizon)
    if len(full) < cfg.n_train + cfg.n_test:
        raise dynamics.InsufficientDataError(
            "recipe yields %d rows at h=%d, need %d"
            % (len(full), horizon, cfg.n_train + cfg.n_test))
    return full.rows(0, cfg.n_train), full.rows(cfg.n_train, cfg.n_train + cfg.n_test)


def _linear_cell(train: Dataset, test: Dataset):
    model = linear_forecast.fit_lpc(train)
    tr = linear_forecast.rmse(linear_forecast.ar_predict_batch(model, train.inputs),
                              train.targets)
    te = linear_forecast.rmse(linear_forecast.ar_predict_batch(model, test.inputs),
                              test.targets)
    return model, tr, te


def _lpc_base_net(train: Dataset, cfg: ExperimentConfig):
    model = linear_forecast.fit_lpc(train)
    alpha = init_schemes.choose_alpha(train, cfg.linearity_bound)
    return init_schemes.lpc_simple_init(model, alpha)


def run_cell(cfg: ExperimentConfig, method: str, horizon: int, seed: int,
             series: TimeSeries = None, datasets=None) -> CellResult:
    """Run one (method, horizon, seed) cell; returns metrics and wall time."""
    if method not in METHODS:
        raise ValueError("unknown method %r" % method)
    if series is None and datasets is None:
        series = generate_series(cfg.recipe,
                                 os.path.join(cfg.output_dir, "cache"))
    if datasets is None:
        datasets = build_datasets(series, cfg, horizon)
    train, test = datasets
    t0 = time.perf_counter()
    if method == "linear":
        _, tr, te = _linear_cell(train, test)
    else:
        if method == "nn-nw":
            scale = float(np.max(np.abs(train.inputs)))
            net = init_schemes.nguyen_widrow_init(cfg.p, cfg.hidden, seed,
                                                  input_scale=scale)
        elif method == "nn-lpc":
            net = _lpc_base_net(train, cfg)
        else:  # nn-lpc-improved
            base = _lpc_base_net(train, cfg)
            net, _, _ = init_schemes.improved_init(
                base, train, objective=cfg.objective, iters=cfg.improved_iters,
                step=cfg.improved_step, fd_step=cfg.fd_step,
                parameterization=cfg.parameterization, train_cfg=cfg.train)
        trained, _ = lm_trainer.train(net, train, cfg.train)
        tr = lm_trainer.evaluate(trained, train)
        te = lm_trainer.evaluate(trained, test)
    wall = time.perf_counter() - t0
    return CellResult(method, horizon * train.dt, seed, tr, te, wall)


def run_table(cfg: ExperimentConfig):
    """Run the full grid; returns (rows, rendered table text).

    Writes report.csv (deterministic metrics), timings.csv (wall times)
    and table.txt under cfg.output_dir.  The linear method is
    deterministic and runs once per horizon; cell failures are recorded
    and the run continues.
    """
    os.makedirs(cfg.output_dir, exist_ok=True)
    series = generate_series(cfg.recipe, os.path.join(cfg.output_dir, "cache"))
    rows = []
    for horizon in cfg.horizons:
        datasets = build_datasets(series, cfg, horizon)
        for method in cfg.methods:
            seeds = [cfg.seeds[0]] if method == "linear" else cfg.seeds
            for seed in seeds:
                try:
                    rows.append(run_cell(cfg, method, horizon, seed,
                                         datasets=datasets))
                except Exception as exc:  # record and continue
                    rows.append(CellResult(method, horizon * series.dt, seed,
                                           float("nan"), float("nan"), 0.0,
                                           error=str(exc)))
    write_report(rows, os.path.join(cfg.output_dir, "report.csv"))
    write_timings(rows, os.path.join(cfg.output_dir, "timings.csv"))
    table = render_table(rows, cfg)
    with open(os.path.join(cfg.output_dir, "table.txt"), "w") as f:
        f.write(table)
    return rows, table


def write_report(rows, path) -> None:
    with open(path, "w") as f:
        f.write("method,horizon_s,seed,train_rmse,test_rmse\n")
        for r in rows:
            f.write("%s,%g,%d,%.6g,%.6g\n"
                    % (r.method, r.horizon_s, r.seed, r.train_rmse, r.test_rmse))


def write_timings(rows, path) -> None:
    with open(path, "w") as f:
        f.write("method,horizon_s,seed,wall_s\n")
        for r in rows:
            f.write("%s,%g,%d,%.3f\n" % (r.method, r.horizon_s, r.seed, r.wall_s))


def median_test_rmse(rows, method: str, horizon_s: float) -> float:
    vals = [r.test_rmse for r in rows
            if r.method == method and abs(r.horizon_s - horizon_s) < 1e-12
            and np.isfinite(r.test_rmse)]
    return float(np.median(vals)) if vals else float("nan")


def render_table(rows, cfg: ExperimentConfig) -> str:
    horizons_s = sorted({r.horizon_s for r in rows})
    name_w = max([len(m) for m in cfg.methods] + [6])
    header = "method".ljust(name_w) + "".join(
        ("sigma(%g s)" % h).rjust(14) for h in horizons_s)
    lines = [header, "-" * len(header)]
    for method in cfg.methods:
        cells = "".join(("%.4g" % median_test_rmse(rows, method, h)).rjust(14)
                        for h in horizons_s)
        lines.append(method.ljust(name_w) + cells)
    return "\n".join(lines) + "\n"
