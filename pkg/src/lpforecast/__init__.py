"""Linear-prediction-based MLP initialization and LM training for
chaotic time-series forecasting."""

from .dynamics import (Dataset, LorenzParams, State3, TimeSeries,
                       drop_transient, integrate_lorenz, integrate_lorenz_rk4,
                       lorenz_derivative, make_dataset, split_dataset)
from .linear_forecast import ARModel, ar_predict, ar_predict_batch, fit_lpc, rmse
from .mlp_core import Layer, Mlp, flatten, forward, forward_batch, \
    residual_jacobian, unflatten
from .init_schemes import (RotationParams, apply_rotations, build_skew,
                           choose_alpha, improved_init, lpc_simple_init,
                           nguyen_widrow_init, orthogonal_cayley,
                           orthogonal_exp, skew_basis)
from .lm_trainer import TrainConfig, TrainTrace, evaluate, lm_step, train
from .bench import ExperimentConfig, GenerationRecipe, run_cell, run_table
from .plotting import plot_forecast

__version__ = "0.1.0"
