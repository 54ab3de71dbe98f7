"""Initial weight construction for the forecasting network.

Schemes:
  * Nguyen-Widrow randomized baseline.
  * Linear-prediction decomposition: the filter's row vector is factored
    into three layer matrices A3 A2 A1 with a scale alpha that keeps every
    pre-activation inside the near-linear region of tanh, so the untrained
    network reproduces the linear filter almost exactly.
  * Orthogonal insertion: A = A3 U2' U2 A2 U1' U1 A1 with orthogonal U_i,
    which preserves the linear map while redistributing the load across
    layers.  U_i are parameterized by skew-symmetric generators, either
    through the matrix exponential or the Cayley transform.
  * Improved search: a short gradient search over the generator
    coefficients against a trainability objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .dynamics import Dataset
from .linear_forecast import ARModel
from . import mlp_core, lm_trainer
from .mlp_core import Layer, Mlp

PARAMETERIZATIONS = ("exponential", "cayley")
OBJECTIVES = ("grad_norm", "first_epoch_error", "full_training_error")


@dataclass
class RotationParams:
    """Generator coefficients for the two inserted orthogonal matrices."""

    coeffs_1: np.ndarray
    coeffs_2: np.ndarray
    n: int

    def __post_init__(self):
        self.coeffs_1 = np.asarray(self.coeffs_1, dtype=float)
        self.coeffs_2 = np.asarray(self.coeffs_2, dtype=float)
        k = self.n * (self.n - 1) // 2
        if len(self.coeffs_1) != k or len(self.coeffs_2) != k:
            raise ValueError("each coefficient vector needs N(N-1)/2 entries")

    def to_csv_line(self) -> str:
        return ",".join("%.17g" % v
                        for v in np.concatenate([self.coeffs_1, self.coeffs_2]))


@dataclass
class InitConfig:
    alpha: float = 0.0            # 0 means: derive from data via choose_alpha
    linearity_bound: float = 0.05
    parameterization: str = "exponential"

    def __post_init__(self):
        if not (0 < self.linearity_bound <= 0.5):
            raise ValueError("linearity_bound must lie in (0, 0.5]")
        if self.parameterization not in PARAMETERIZATIONS:
            raise ValueError("unknown parameterization %r" % self.parameterization)


def choose_alpha(train: Dataset, linearity_bound: float) -> float:
    """Scale so that every first-layer pre-activation stays within the bound."""
    if len(train) == 0:
        raise ValueError("dataset must be nonempty")
    peak = float(np.max(np.abs(train.inputs)))
    if peak == 0.0:
        raise ValueError("all-zero dataset has no scale")
    return linearity_bound / peak


def lpc_simple_init(model: ARModel, alpha: float) -> Mlp:
    """Factor the order-p filter into a 3-layer tanh/tanh/identity network.

    A1 = alpha*I scales into the linear region, row 1 of A2 carries the
    filter coefficients (reversed to match chronological windows), rows
    2..p pass the lagged samples through, and A3 = (1/alpha^2)*(1,0,...,0)
    scales back.  The product A3 A2 A1 applied to a window equals the
    filter output exactly.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    p = model.p
    a1 = alpha * np.eye(p)
    m = np.eye(p)
    m[0, :] = model.coefficients[::-1]
    a2 = alpha * m
    a3 = np.zeros((1, p))
    a3[0, 0] = 1.0 / alpha ** 2
    return Mlp([
        Layer(a1, np.zeros(p), "tanh"),
        Layer(a2, np.zeros(p), "tanh"),
        Layer(a3, np.zeros(1), "identity"),
    ])


def skew_basis(k: int, m: int, n: int) -> np.ndarray:
    """Basis generator with +1 at (m,k) and -1 at (k,m); 1-based, k < m."""
    if not (1 <= k < m <= n):
        raise ValueError("need 1 <= k < m <= N")
    g = np.zeros((n, n))
    g[m - 1, k - 1] = 1.0
    g[k - 1, m - 1] = -1.0
    return g


def skew_index_pairs(n: int):
    """Lexicographic (k, m) pairs with k < m, matching coefficient order."""
    return [(k, m) for k in range(1, n + 1) for m in range(k + 1, n + 1)]


def build_skew(coeffs, n: int) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    if len(coeffs) != n * (n - 1) // 2:
        raise ValueError("need N(N-1)/2 coefficients")
    g = np.zeros((n, n))
    for c, (k, m) in zip(coeffs, skew_index_pairs(n)):
        g[m - 1, k - 1] += c
        g[k - 1, m - 1] -= c
    return g


def orthogonal_exp(g: np.ndarray) -> np.ndarray:
    """exp(G) for skew-symmetric G; the result is special orthogonal."""
    g = np.asarray(g, dtype=float)
    if np.max(np.abs(g + g.T)) >= 1e-12:
        raise ValueError("generator must be skew-symmetric")
    return expm(g)


def orthogonal_cayley(g: np.ndarray) -> np.ndarray:
    """Cayley transform (I - G)(I + G)^-1; orthogonal for skew G."""
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    return np.linalg.solve((np.eye(n) + g).T, (np.eye(n) - g).T).T


def _check_orthogonal(u: np.ndarray, tol: float = 1e-8) -> None:
    n = u.shape[0]
    if np.max(np.abs(u.T @ u - np.eye(n))) > tol:
        raise ValueError("matrix is not orthogonal to tolerance %g" % tol)


def apply_rotations(net: Mlp, u1: np.ndarray, u2: np.ndarray) -> Mlp:
    """Insert orthogonal matrices: W1'=U1 A1, W2'=U2 A2 U1', W3'=A3 U2'.

    The composed linear map W3' W2' W1' equals A3 A2 A1, so the untrained
    network output is preserved up to the activation nonlinearity.
    """
    if len(net.layers) != 3:
        raise ValueError("rotation insertion expects a 3-layer network")
    l1, l2, l3 = net.layers
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if u1.shape != (l1.out_dim, l1.out_dim) or u2.shape != (l2.out_dim, l2.out_dim):
        raise ValueError("rotation dimensions must match hidden widths")
    _check_orthogonal(u1)
    _check_orthogonal(u2)
    return Mlp([
        Layer(u1 @ l1.weights, u1 @ l1.biases, l1.activation),
        Layer(u2 @ l2.weights @ u1.T, u2 @ l2.biases, l2.activation),
        Layer(l3.weights @ u2.T, l3.biases.copy(), l3.activation),
    ])


def rotations_from_coeffs(coeffs: np.ndarray, n: int, parameterization: str):
    if parameterization == "exponential":
        to_u = orthogonal_exp
    elif parameterization == "cayley":
        to_u = orthogonal_cayley
    else:
        raise ValueError("unknown parameterization %r" % parameterization)
    k = n * (n - 1) // 2
    u1 = to_u(build_skew(coeffs[:k], n))
    u2 = to_u(build_skew(coeffs[k:], n))
    return u1, u2


def improved_init(base: Mlp, train: Dataset, objective: str = "grad_norm",
                  iters: int = 10, step: float = 0.1, fd_step: float = 1e-5,
                  parameterization: str = "exponential",
                  train_cfg: lm_trainer.TrainConfig = None):
    """Gradient search over rotation coefficients for a trainability objective.

    Objectives:
      grad_norm           -- 2-norm of the SSE gradient of the rotated net
                             on the training set (maximized);
      first_epoch_error   -- training SSE after one LM epoch (minimized);
      full_training_error -- training SSE after the full LM schedule
                             (minimized; expensive).

    The objective gradient is estimated by central finite differences; the
    line search halves the step until the objective improves (at most 20
    halvings), so the accepted-objective trace is monotone.

    Returns (rotated net, RotationParams, objective trace).
    """
    if objective not in OBJECTIVES:
        raise ValueError("unknown objective %r" % objective)
    if iters < 0:
        raise ValueError("iters must be non-negative")
    n = base.layers[0].out_dim
    k = n * (n - 1) // 2

    if objective == "first_epoch_error":
        epoch_cfg = lm_trainer.TrainConfig(max_epochs=1)
    elif objective == "full_training_error":
        epoch_cfg = train_cfg if train_cfg is not None else lm_trainer.TrainConfig()
    else:
        epoch_cfg = None

    def rotate(c):
        u1, u2 = rotations_from_coeffs(c, n, parameterization)
        return apply_rotations(base, u1, u2)

    def objective_value(c) -> float:
        net = rotate(c)
        if objective == "grad_norm":
            r, jac = mlp_core.residual_jacobian(net, train)
            return float(np.linalg.norm(2.0 * (jac.T @ r)))
        _, trace = lm_trainer.train(net, train, epoch_cfg)
        return trace.final_sse()

    sign = 1.0 if objective == "grad_norm" else -1.0  # ascend vs descend

    coeffs = np.zeros(2 * k)
    f = objective_value(coeffs)
    if not np.isfinite(f):
        raise ValueError("non-finite objective at zero coefficients")
    trace = [f]
    for _ in range(iters):
        grad = np.zeros_like(coeffs)
        for j in range(len(coeffs)):
            cp = coeffs.copy()
            cp[j] += fd_step
            fp = objective_value(cp)
            cp[j] -= 2 * fd_step
            fm = objective_value(cp)
            grad[j] = (fp - fm) / (2 * fd_step)
        direction = sign * grad
        gn = np.linalg.norm(direction)
        if gn == 0.0:
            trace.append(f)
            continue
        s = step
        for _halving in range(21):
            cand = coeffs + s * direction / gn
            fc = objective_value(cand)
            if np.isfinite(fc) and sign * fc > sign * f:
                coeffs, f = cand, fc
                break
            s *= 0.5
        trace.append(f)

    params = RotationParams(coeffs[:k], coeffs[k:], n)
    return rotate(coeffs), params, trace


def nguyen_widrow_init(in_dim: int, hidden, seed: int,
                       input_scale: float = 1.0) -> Mlp:
    """Standard Nguyen-Widrow initialization of a tanh MLP with scalar output.

    Hidden rows get random directions scaled to magnitude 0.7 * H**(1/fan_in)
    and biases spread uniformly over the active range.  input_scale divides
    the first-layer weights to account for the raw input amplitude.
    """
    hidden = list(hidden)
    if in_dim < 1 or any(h < 1 for h in hidden):
        raise ValueError("invalid architecture")
    rng = np.random.default_rng(seed)
    layers = []
    fan_in = in_dim
    for i, h in enumerate(hidden):
        beta = 0.7 * h ** (1.0 / fan_in)
        w = rng.uniform(-1.0, 1.0, size=(h, fan_in))
        w *= beta / np.linalg.norm(w, axis=1, keepdims=True)
        b = rng.uniform(-beta, beta, size=h)
        if i == 0 and input_scale != 1.0:
            w /= input_scale
        layers.append(Layer(w, b, "tanh"))
        fan_in = h
    w_out = rng.uniform(-0.5, 0.5, size=(1, fan_in))
    layers.append(Layer(w_out, np.zeros(1), "identity"))
    return Mlp(layers)
