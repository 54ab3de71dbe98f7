"""Command-line interface.

Subcommands:
  gen      write a Lorenz x-coordinate series to CSV
  fit-lpc  fit the linear prediction filter on a series
  train    run a single initialization + training cell
  table    run the full benchmark grid from a JSON config
  plot     render predicted-vs-actual traces as SVG

Exit codes: 0 success, 1 usage error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bench, dynamics, init_schemes, linear_forecast, lm_trainer, plotting
from .dynamics import LorenzParams, State3, TimeSeries

_OBJECTIVES = {"grad-norm": "grad_norm", "first-epoch": "first_epoch_error",
               "full-training": "full_training_error"}
_ORTHO = {"exp": "exponential", "cayley": "cayley"}
_INITS = {"nw": "nn-nw", "lpc": "nn-lpc", "lpc-improved": "nn-lpc-improved"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    parser = _Parser(prog="lpforecast")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a Lorenz series CSV")
    g.add_argument("--t-end", type=float, default=142.0)
    g.add_argument("--dt", type=float, default=0.01)
    g.add_argument("--rel-tol", type=float, default=1e-9)
    g.add_argument("--t-skip", type=float, default=0.0)
    g.add_argument("--sigma", type=float, default=10.0)
    g.add_argument("--r", type=float, default=28.0)
    g.add_argument("--b", type=float, default=8.0 / 3.0)
    g.add_argument("--s0", default="1,1,1", help="initial state x,y,z")
    g.add_argument("-o", "--output", required=True)

    f = sub.add_parser("fit-lpc", help="fit the linear prediction filter")
    f.add_argument("--series", required=True)
    f.add_argument("--p", type=int, default=5)
    f.add_argument("--horizon", type=int, default=1)
    f.add_argument("-o", "--output", required=True)

    t = sub.add_parser("train", help="train one cell")
    t.add_argument("--series", required=True)
    t.add_argument("--init", choices=sorted(_INITS), default="lpc")
    t.add_argument("--objective", choices=sorted(_OBJECTIVES), default="grad-norm")
    t.add_argument("--ortho", choices=sorted(_ORTHO), default="exp")
    t.add_argument("--p", type=int, default=5)
    t.add_argument("--horizon", type=int, default=1)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--epochs", type=int, default=300)
    t.add_argument("--train-fraction", type=float, default=0.8)
    t.add_argument("--linearity-bound", type=float, default=0.05)
    t.add_argument("-o", "--output", default=".", help="output directory")

    b = sub.add_parser("table", help="run the full benchmark grid")
    b.add_argument("--config", help="JSON config file (ExperimentConfig schema)")
    b.add_argument("-o", "--output", help="override output directory")
    b.add_argument("--seed", type=int, help="run with this single seed")

    p = sub.add_parser("plot", help="render an SVG of series + predictions")
    p.add_argument("--series", required=True)
    p.add_argument("--pred", action="append", default=[],
                   metavar="NAME=FILE", help="prediction CSV (t,x), repeatable")
    p.add_argument("--window", help="time range lo:hi")
    p.add_argument("-o", "--output", required=True)
    return parser


def _cmd_gen(args) -> int:
    s0 = [float(v) for v in args.s0.split(",")]
    if len(s0) != 3:
        raise UsageError("--s0 needs three comma-separated values")
    xs, _, _ = dynamics.integrate_lorenz(
        LorenzParams(args.sigma, args.r, args.b), State3(*s0),
        args.t_end, args.dt, args.rel_tol)
    if args.t_skip > 0:
        xs = dynamics.drop_transient(xs, args.t_skip)
    xs.to_csv(args.output)
    print("wrote %d samples to %s" % (len(xs), args.output))
    return 0


def _cmd_fit_lpc(args) -> int:
    ts = TimeSeries.from_csv(args.series)
    data = dynamics.make_dataset(ts, args.p, args.horizon)
    model = linear_forecast.fit_lpc(data)
    with open(args.output, "w") as f:
        f.write(model.to_csv_line() + "\n")
    preds = linear_forecast.ar_predict_batch(model, data.inputs)
    print("fit order-%d filter, in-sample RMSE %.6g"
          % (args.p, linear_forecast.rmse(preds, data.targets)))
    return 0


def _cmd_train(args) -> int:
    ts = TimeSeries.from_csv(args.series)
    full = dynamics.make_dataset(ts, args.p, args.horizon)
    train, test = dynamics.split_dataset(full, args.train_fraction)
    cfg = lm_trainer.TrainConfig(max_epochs=args.epochs)
    if args.init == "nw":
        scale = float(np.max(np.abs(train.inputs)))
        net = init_schemes.nguyen_widrow_init(args.p, (5, 5), args.seed,
                                              input_scale=scale)
    else:
        model = linear_forecast.fit_lpc(train)
        alpha = init_schemes.choose_alpha(train, args.linearity_bound)
        net = init_schemes.lpc_simple_init(model, alpha)
        if args.init == "lpc-improved":
            net, _, _ = init_schemes.improved_init(
                net, train, objective=_OBJECTIVES[args.objective],
                parameterization=_ORTHO[args.ortho], train_cfg=cfg)
    trained, trace = lm_trainer.train(net, train, cfg)
    os.makedirs(args.output, exist_ok=True)
    trace.to_csv(os.path.join(args.output, "trace.csv"))
    with open(os.path.join(args.output, "model.json"), "w") as f:
        f.write(trained.to_json())
    print("train RMSE %.6g  test RMSE %.6g  (%d epochs)"
          % (lm_trainer.evaluate(trained, train),
             lm_trainer.evaluate(trained, test), trace.epochs_run))
    return 0


def _cmd_table(args) -> int:
    if args.config:
        cfg = bench.ExperimentConfig.from_json_file(args.config)
    else:
        cfg = bench.ExperimentConfig()
    if args.output:
        cfg.output_dir = args.output
    if args.seed is not None:
        cfg.seeds = (args.seed,)
    _, table = bench.run_table(cfg)
    print(table)
    return 0


def _cmd_plot(args) -> int:
    ts = TimeSeries.from_csv(args.series)
    preds = {}
    for item in args.pred:
        if "=" not in item:
            raise UsageError("--pred expects NAME=FILE")
        name, path = item.split("=", 1)
        preds[name] = TimeSeries.from_csv(path).values
    window = None
    if args.window:
        lo, hi = (float(v) for v in args.window.split(":"))
        window = (lo, hi)
    svg = plotting.plot_forecast(ts, preds, window)
    with open(args.output, "w") as f:
        f.write(svg)
    print("wrote %s" % args.output)
    return 0


_COMMANDS = {"gen": _cmd_gen, "fit-lpc": _cmd_fit_lpc, "train": _cmd_train,
             "table": _cmd_table, "plot": _cmd_plot}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (dynamics.IntegrationError, dynamics.InsufficientDataError,
            lm_trainer.SingularStepError, np.linalg.LinAlgError,
            ValueError) as exc:
        print("numeric failure: %s" % exc, file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main())
