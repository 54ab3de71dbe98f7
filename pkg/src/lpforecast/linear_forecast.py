"""Order-p linear prediction filter fitted by least squares.

The filter predicts x_n = a_1 x_{n-1} + ... + a_p x_{n-p} (a_1 multiplies
the most recent sample).  It serves both as the baseline forecaster and as
the source of the network initialization coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .dynamics import Dataset


@dataclass
class ARModel:
    coefficients: np.ndarray  # a_1 ... a_p, a_1 pairs with the newest sample
    p: int
    ridge_fallback: bool = False

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.p < 1 or len(self.coefficients) != self.p:
            raise ValueError("coefficient length must equal p >= 1")
        if not np.all(np.isfinite(self.coefficients)):
            raise ValueError("coefficients must be finite")

    def to_csv_line(self) -> str:
        return ",".join("%.17g" % a for a in self.coefficients)

    @classmethod
    def from_csv_line(cls, line: str) -> "ARModel":
        coeffs = np.array([float(v) for v in line.strip().split(",")])
        return cls(coeffs, len(coeffs))


def fit_lpc(train: Dataset) -> ARModel:
    """Least-squares fit of the order-p filter over the training windows.

    Solved through a QR factorization of the regressor matrix.  On rank
    deficiency a tiny ridge term is added and the result is flagged.
    """
    if len(train) < train.p:
        raise ValueError("need at least p rows to fit an order-p filter")
    # column k corresponds to a_{k+1}: lag k+1 behind the target
    X = train.inputs[:, ::-1]
    y = train.targets
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-12 * max(diag.max(), 1.0):
        lam = 1e-10 * np.mean(X * X)
        a = np.linalg.solve(X.T @ X + lam * np.eye(train.p), X.T @ y)
        return ARModel(a, train.p, ridge_fallback=True)
    a = solve_triangular(r, q.T @ y)
    return ARModel(a, train.p)


def ar_predict(model: ARModel, window) -> float:
    """Apply the filter to one chronological window (most recent last)."""
    window = np.asarray(window, dtype=float)
    if window.shape != (model.p,):
        raise ValueError("window length must equal p")
    return float(np.dot(model.coefficients, window[::-1]))


def ar_predict_batch(model: ARModel, inputs: np.ndarray) -> np.ndarray:
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != model.p:
        raise ValueError("inputs must be (n, p)")
    return inputs[:, ::-1] @ model.coefficients


def rmse(predicted, actual) -> float:
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if predicted.shape != actual.shape or predicted.size == 0:
        raise ValueError("inputs must be nonempty and of equal length")
    return float(np.sqrt(np.mean((predicted - actual) ** 2)))
