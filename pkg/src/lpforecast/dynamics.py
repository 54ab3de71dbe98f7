"""Lorenz system integration and supervised dataset construction.

The Lorenz equations

    dx/dt = sigma * (y - x)
    dy/dt = x * (r - z) - y
    dz/dt = x * y - b * z

are integrated with an embedded Runge-Kutta-Fehlberg 4(5) scheme with
adaptive step control, sampled on a uniform output grid.  The x-coordinate
series is then windowed into (p-lag window, scalar target) pairs for
forecasting at a given horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class IntegrationError(RuntimeError):
    """Raised when the adaptive integrator cannot proceed (stiffness/blowup)."""


class InsufficientDataError(ValueError):
    """Raised when a series is too short for the requested construction."""


@dataclass(frozen=True)
class LorenzParams:
    sigma: float = 10.0
    r: float = 28.0
    b: float = 8.0 / 3.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.sigma, self.r, self.b)):
            raise ValueError("Lorenz parameters must be finite")
        if self.b <= 0:
            raise ValueError("b must be positive")


@dataclass(frozen=True)
class State3:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass
class TimeSeries:
    """Uniformly sampled scalar series."""

    values: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.values.ndim != 1 or len(self.values) < 1:
            raise ValueError("values must be a nonempty 1-D array")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must be finite")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration(self) -> float:
        return (len(self.values) - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("t,x\n")
            for t, x in zip(self.times(), self.values):
                f.write("%.17g,%.17g\n" % (t, x))

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        data = np.atleast_2d(data)
        t, x = data[:, 0], data[:, 1]
        if len(t) < 2:
            raise InsufficientDataError("need at least 2 samples to infer dt")
        return cls(values=x, dt=float(t[1] - t[0]), t0=float(t[0]))


@dataclass
class Dataset:
    """Windowed supervised pairs: p-lag input windows and scalar targets.

    Windows are chronological (oldest sample first); the target sits
    ``horizon_steps`` after the last window sample.
    """

    inputs: np.ndarray
    targets: np.ndarray
    p: int
    horizon_steps: int
    dt: float = 0.01

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.inputs.ndim != 2 or self.inputs.shape[1] != self.p:
            raise ValueError("inputs must be (n, p)")
        if len(self.targets) != len(self.inputs):
            raise ValueError("inputs/targets length mismatch")

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def horizon_seconds(self) -> float:
        return self.horizon_steps * self.dt

    def rows(self, start: int, stop: int) -> "Dataset":
        return Dataset(self.inputs[start:stop], self.targets[start:stop],
                       self.p, self.horizon_steps, self.dt)

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write(",".join("x%d" % (i + 1) for i in range(self.p)) + ",target\n")
            for row, y in zip(self.inputs, self.targets):
                f.write(",".join("%.17g" % v for v in row) + ",%.17g\n" % y)


def lorenz_derivative(s: State3, params: LorenzParams) -> State3:
    return State3(
        params.sigma * (s.y - s.x),
        s.x * (params.r - s.z) - s.y,
        s.x * s.y - params.b * s.z,
    )


def _deriv(x, y, z, p: LorenzParams):
    return (p.sigma * (y - x), x * (p.r - z) - y, x * y - p.b * z)


# Fehlberg 4(5) tableau.
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8, 3680 / 513, -845 / 4104),
    (-8 / 27, 2, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_B5 = (16 / 135, 0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_B4 = (25 / 216, 0, 1408 / 2565, 2197 / 4104, -1 / 5, 0)


def _rkf45_step(x, y, z, h, p: LorenzParams):
    """One embedded step; returns the 5th-order solution and error estimate."""
    ks = []
    for i in range(6):
        xi, yi, zi = x, y, z
        for a, (kx, ky, kz) in zip(_A[i], ks):
            xi += h * a * kx
            yi += h * a * ky
            zi += h * a * kz
        ks.append(_deriv(xi, yi, zi, p))
    x5 = x + h * sum(b * k[0] for b, k in zip(_B5, ks))
    y5 = y + h * sum(b * k[1] for b, k in zip(_B5, ks))
    z5 = z + h * sum(b * k[2] for b, k in zip(_B5, ks))
    x4 = x + h * sum(b * k[0] for b, k in zip(_B4, ks))
    y4 = y + h * sum(b * k[1] for b, k in zip(_B4, ks))
    z4 = z + h * sum(b * k[2] for b, k in zip(_B4, ks))
    err = max(abs(x5 - x4), abs(y5 - y4), abs(z5 - z4))
    return (x5, y5, z5), err


def integrate_lorenz(params: LorenzParams, s0: State3, t_end: float,
                     dt_out: float, rel_tol: float = 1e-9):
    """Adaptive RKF45 integration sampled on the grid t0 + k*dt_out.

    Returns the (x, y, z) coordinate series as three TimeSeries of equal
    length.  Steps are clamped to land exactly on each output grid point, so
    the sampled values carry no interpolation error.
    """
    if t_end <= 0 or dt_out <= 0:
        raise ValueError("t_end and dt_out must be positive")
    if not (0 < rel_tol <= 1e-2):
        raise ValueError("rel_tol must lie in (0, 1e-2]")

    n_out = int(math.floor(t_end / dt_out + 1e-9)) + 1
    h_min = 1e-12 * t_end
    out = np.empty((n_out, 3))
    x, y, z = s0.x, s0.y, s0.z
    out[0] = (x, y, z)
    t = 0.0
    h = dt_out
    for k in range(1, n_out):
        t_target = k * dt_out
        while t < t_target - 1e-14 * t_end:
            h_try = min(h, t_target - t)
            (xn, yn, zn), err = _rkf45_step(x, y, z, h_try, params)
            if not all(map(math.isfinite, (xn, yn, zn))):
                raise IntegrationError("state diverged to non-finite values")
            tol = rel_tol * (max(abs(x), abs(y), abs(z)) + 1.0)
            if err <= tol:
                x, y, z = xn, yn, zn
                t += h_try
            # proportional step control with growth clamping
            scale = 0.9 * (tol / err) ** 0.2 if err > 0 else 5.0
            h = h_try * min(5.0, max(0.2, scale))
            if h < h_min:
                raise IntegrationError("step size underflow (h=%g)" % h)
        out[k] = (x, y, z)
    return tuple(TimeSeries(out[:, i], dt_out, 0.0) for i in range(3))


def integrate_lorenz_rk4(params: LorenzParams, s0: State3, t_end: float,
                         dt: float):
    """Fixed-step classical RK4 fallback; used as a reference integrator."""
    if t_end <= 0 or dt <= 0:
        raise ValueError("t_end and dt must be positive")
    n = int(round(t_end / dt))
    out = np.empty((n + 1, 3))
    x, y, z = s0.x, s0.y, s0.z
    out[0] = (x, y, z)
    for i in range(n):
        k1 = _deriv(x, y, z, params)
        k2 = _deriv(x + dt / 2 * k1[0], y + dt / 2 * k1[1], z + dt / 2 * k1[2], params)
        k3 = _deriv(x + dt / 2 * k2[0], y + dt / 2 * k2[1], z + dt / 2 * k2[2], params)
        k4 = _deriv(x + dt * k3[0], y + dt * k3[1], z + dt * k3[2], params)
        x += dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y += dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        z += dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        out[i + 1] = (x, y, z)
    return tuple(TimeSeries(out[:, i], dt, 0.0) for i in range(3))


def drop_transient(ts: TimeSeries, t_skip: float) -> TimeSeries:
    """Drop the leading samples before t0 + t_skip (transient removal)."""
    if t_skip < 0:
        raise ValueError("t_skip must be non-negative")
    if t_skip >= ts.duration + ts.dt / 2:
        raise InsufficientDataError("t_skip leaves no samples")
    start = int(math.ceil(t_skip / ts.dt - 1e-9))
    return TimeSeries(ts.values[start:].copy(), ts.dt, ts.t0 + start * ts.dt)


def make_dataset(ts: TimeSeries, p: int, horizon_steps: int) -> Dataset:
    """Window the series: row n has inputs (x[n-h-p+1..n-h]) and target x[n].

    For horizon_steps = 1 this is the classic order-p autoregression layout.
    """
    if p < 1 or horizon_steps < 1:
        raise ValueError("p and horizon_steps must be positive")
    n = len(ts)
    n_rows = n - p - horizon_steps + 1
    if n_rows < 1:
        raise InsufficientDataError(
            "series of length %d too short for p=%d, h=%d" % (n, p, horizon_steps))
    x = ts.values
    idx = np.arange(p)[None, :] + np.arange(n_rows)[:, None]
    inputs = x[idx]
    targets = x[p + horizon_steps - 1:]
    return Dataset(inputs, targets, p, horizon_steps, ts.dt)


def split_dataset(d: Dataset, train_fraction: float):
    """Chronological split into (train, test); no shuffling."""
    if not (0 < train_fraction < 1):
        raise ValueError("train_fraction must lie in (0, 1)")
    n_train = int(len(d) * train_fraction)
    if n_train < 1 or n_train >= len(d):
        raise InsufficientDataError("split produces an empty part")
    return d.rows(0, n_train), d.rows(n_train, len(d))
