"""Feedforward network representation, evaluation and residual Jacobians.

Parameters are flattened into a single vector with a fixed ordering:
for each layer in forward order, the weight matrix in row-major order
followed by the bias vector.  All derivative computations use exact
reverse-mode accumulation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Dataset

ACTIVATIONS = ("tanh", "identity")


@dataclass
class Layer:
    weights: np.ndarray  # (out_dim, in_dim)
    biases: np.ndarray   # (out_dim,)
    activation: str = "tanh"

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.biases = np.asarray(self.biases, dtype=float)
        if self.weights.ndim != 2:
            raise ValueError("weights must be 2-D")
        if self.biases.shape != (self.weights.shape[0],):
            raise ValueError("bias length must match weight rows")
        if self.activation not in ACTIVATIONS:
            raise ValueError("unknown activation %r" % self.activation)
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise ValueError("layer parameters must be finite")

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


@dataclass
class Mlp:
    layers: list

    def __post_init__(self):
        for a, b in zip(self.layers, self.layers[1:]):
            if b.in_dim != a.out_dim:
                raise ValueError("adjacent layers dimension-incompatible")

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def n_params(self) -> int:
        return sum(l.weights.size + l.biases.size for l in self.layers)

    def copy(self) -> "Mlp":
        return Mlp([Layer(l.weights.copy(), l.biases.copy(), l.activation)
                    for l in self.layers])

    def to_json(self) -> str:
        return json.dumps({"layers": [
            {"weights": l.weights.tolist(), "biases": l.biases.tolist(),
             "activation": l.activation} for l in self.layers]})

    @classmethod
    def from_json(cls, text: str) -> "Mlp":
        obj = json.loads(text)
        return cls([Layer(np.array(d["weights"]), np.array(d["biases"]),
                          d["activation"]) for d in obj["layers"]])


def _act(z: np.ndarray, tag: str) -> np.ndarray:
    return np.tanh(z) if tag == "tanh" else z


def _dact(a: np.ndarray, tag: str) -> np.ndarray:
    # derivative expressed through the activation output
    return 1.0 - a * a if tag == "tanh" else np.ones_like(a)


def forward(net: Mlp, input_vec) -> float:
    u = np.asarray(input_vec, dtype=float)
    if u.shape != (net.in_dim,):
        raise ValueError("input length must equal in_dim")
    for layer in net.layers:
        u = _act(layer.weights @ u + layer.biases, layer.activation)
    return float(u[0])


def forward_batch(net: Mlp, inputs) -> np.ndarray:
    a = np.asarray(inputs, dtype=float)
    if a.size == 0:
        return np.zeros(0)
    if a.ndim != 2 or a.shape[1] != net.in_dim:
        raise ValueError("inputs must be (n, in_dim)")
    for layer in net.layers:
        a = _act(a @ layer.weights.T + layer.biases, layer.activation)
    return a[:, 0]


def residual_jacobian(net: Mlp, data: Dataset):
    """Residuals r_i = f(x_i) - y_i and their Jacobian w.r.t. all parameters.

    Returns (r, J) with J of shape (n, m) in the flatten() parameter order.
    The SSE gradient is 2 * J.T @ r.
    """
    if len(data) == 0:
        raise ValueError("dataset must be nonempty")
    acts = [np.asarray(data.inputs, dtype=float)]
    for layer in net.layers:
        acts.append(_act(acts[-1] @ layer.weights.T + layer.biases,
                         layer.activation))
    if net.out_dim != 1:
        raise ValueError("residuals require a scalar-output network")
    r = acts[-1][:, 0] - data.targets

    n = len(r)
    blocks = [None] * len(net.layers)
    delta = _dact(acts[-1], net.layers[-1].activation)  # (n, 1)
    for li in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[li]
        dW = delta[:, :, None] * acts[li][:, None, :]   # (n, out, in)
        blocks[li] = (dW.reshape(n, -1), delta)
        if li > 0:
            delta = (delta @ layer.weights) * _dact(acts[li], net.layers[li - 1].activation)
    J = np.concatenate([arr for pair in blocks for arr in pair], axis=1)
    return r, J


def flatten(net: Mlp) -> np.ndarray:
    parts = []
    for layer in net.layers:
        parts.append(layer.weights.ravel())
        parts.append(layer.biases)
    return np.concatenate(parts)


def unflatten(net_template: Mlp, v) -> Mlp:
    v = np.asarray(v, dtype=float)
    if len(v) != net_template.n_params():
        raise ValueError("parameter vector length mismatch")
    layers = []
    pos = 0
    for layer in net_template.layers:
        nw = layer.weights.size
        w = v[pos:pos + nw].reshape(layer.weights.shape)
        pos += nw
        b = v[pos:pos + layer.out_dim]
        pos += layer.out_dim
        layers.append(Layer(w.copy(), b.copy(), layer.activation))
    return Mlp(layers)
