"""Levenberg-Marquardt training with a monotone accept/reject rule.

One epoch is one accepted parameter update; damping retries within an
epoch are not counted.  The damping term uses Marquardt's diagonal
scaling lambda * diag(J'J), which stays well-conditioned across the wide
weight-magnitude spread produced by the linear-prediction initialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import Dataset
from .linear_forecast import rmse
from . import mlp_core
from .mlp_core import Mlp


class SingularStepError(RuntimeError):
    """The damped normal equations are singular at the current damping."""


@dataclass
class TrainConfig:
    max_epochs: int = 300
    lambda0: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 10.0
    lambda_max: float = 1e10
    grad_tol: float = 1e-10

    def __post_init__(self):
        if self.lambda0 <= 0 or self.lambda_max <= 0 or self.grad_tol < 0:
            raise ValueError("damping parameters must be positive")
        if self.lambda_up <= 1 or self.lambda_down <= 1:
            raise ValueError("lambda factors must exceed 1")


@dataclass
class TrainTrace:
    epochs: list = field(default_factory=list)      # epoch index
    sse: list = field(default_factory=list)          # SSE after the epoch
    damping: list = field(default_factory=list)      # lambda used
    accepted: list = field(default_factory=list)     # acceptance flag
    epochs_run: int = 0
    initial_sse: float = float("nan")
    stop_reason: str = ""

    def final_sse(self) -> float:
        return self.sse[-1] if self.sse else self.initial_sse

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("epoch,sse,lambda,accepted\n")
            for e, s, lam, acc in zip(self.epochs, self.sse, self.damping, self.accepted):
                f.write("%d,%.17g,%.17g,%d\n" % (e, s, lam, acc))


def _solve_step(J: np.ndarray, r: np.ndarray, lam: float) -> np.ndarray:
    """Solve (J'J + lam*diag(J'J)) delta = -J'r.

    Solved in diagonally scaled variables (columns of J normalized), which
    is algebraically identical but keeps the system well-conditioned across
    the huge weight-magnitude spread of LPC-initialized networks.
    """
    g = J.T @ r
    H = J.T @ J
    d = np.diag(H).copy()
    # dead parameter columns give zero curvature; floor keeps the system regular
    floor = max(d.max(), 1.0) * 1e-14
    d[d < floor] = floor
    s = 1.0 / np.sqrt(d)
    Hs = (H * s).T * s  # unit diagonal up to the floor
    A = Hs + lam * np.eye(len(d))
    try:
        delta = s * np.linalg.solve(A, -(s * g))
    except np.linalg.LinAlgError as exc:
        raise SingularStepError(str(exc)) from exc
    if not np.all(np.isfinite(delta)):
        raise SingularStepError("non-finite step")
    return delta


def lm_step(net: Mlp, data: Dataset, lam: float):
    """One damped Gauss-Newton step; returns (candidate net, predicted SSE)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    r, J = mlp_core.residual_jacobian(net, data)
    delta = _solve_step(J, r, lam)
    candidate = mlp_core.unflatten(net, mlp_core.flatten(net) + delta)
    predicted_sse = float(np.sum((r + J @ delta) ** 2))
    return candidate, predicted_sse


def sse(net: Mlp, data: Dataset) -> float:
    out = mlp_core.forward_batch(net, data.inputs)
    return float(np.sum((out - data.targets) ** 2))


def train(net: Mlp, data: Dataset, cfg: TrainConfig = None):
    """Monotone LM loop: accept only strictly improving steps.

    Returns (best net, trace).  Stops at max_epochs, on a small gradient,
    on damping overflow, or on numeric blowup (best-so-far returned).
    """
    if cfg is None:
        cfg = TrainConfig()
    if len(data) == 0:
        raise ValueError("dataset must be nonempty")
    trace = TrainTrace()
    current = net.copy()
    theta = mlp_core.flatten(current)
    cur_sse = sse(current, data)
    trace.initial_sse = cur_sse
    lam = cfg.lambda0
    for epoch in range(1, cfg.max_epochs + 1):
        r, J = mlp_core.residual_jacobian(current, data)
        g = J.T @ r
        if np.max(np.abs(g)) < cfg.grad_tol:
            trace.stop_reason = "grad_tol"
            break
        accepted = False
        while lam <= cfg.lambda_max:
            try:
                delta = _solve_step(J, r, lam)
            except SingularStepError:
                lam *= cfg.lambda_up
                continue
            cand_theta = theta + delta
            candidate = mlp_core.unflatten(current, cand_theta)
            cand_sse = sse(candidate, data)
            if not np.isfinite(cand_sse):
                lam *= cfg.lambda_up
                continue
            if cand_sse < cur_sse:
                current, theta, cur_sse = candidate, cand_theta, cand_sse
                lam = max(lam / cfg.lambda_down, 1e-12)
                accepted = True
                break
            lam *= cfg.lambda_up
        trace.epochs.append(epoch)
        trace.sse.append(cur_sse)
        trace.damping.append(lam)
        trace.accepted.append(accepted)
        trace.epochs_run = epoch
        if not accepted:
            trace.stop_reason = "lambda_overflow"
            break
    else:
        if cfg.max_epochs > 0:
            trace.stop_reason = "max_epochs"
    return current, trace


def evaluate(net: Mlp, data: Dataset) -> float:
    """Test-style metric: RMSE of the network outputs against the targets."""
    if len(data) == 0:
        raise ValueError("dataset must be nonempty")
    return rmse(mlp_core.forward_batch(net, data.inputs), data.targets)
