"""Parametric fields u_theta: R^2 -> R with exact derivatives.

Every ansatz exposes the same duck-typed surface::

    n_params
    eval(theta, points)              -> (N,)
    param_jacobian(theta, points)    -> (N, n_params)
    eval_and_jacobian(theta, points) -> ((N,), (N, n_params))
    laplacian(theta, points)         -> (N,)

The parameter Jacobian of the MLP is one batched reverse sweep; the Laplacian
propagates first and second coordinate derivatives forward through each layer.
No finite differences anywhere.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .special import DiskHarmonic, ModalExpansion, harmonic_eval

SNAPSHOT_TAG = "tengpp-snapshot v1"


@dataclass(frozen=True)
class ModelSpec:
    hidden_widths: tuple[int, ...] = (32, 32)
    init_seed: int = 1234
    init_scale: float = 1.0
    activation: str = "tanh"
    input_dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        if not self.hidden_widths or min(self.hidden_widths) < 1:
            raise ValueError("need at least one hidden layer of positive width")
        if self.activation != "tanh":
            raise ValueError(f"unsupported activation {self.activation!r}")
        if self.input_dim != 2:
            raise ValueError("input dimension is fixed to 2")
        if not self.init_scale > 0:
            raise ValueError("init_scale must be positive")

    @property
    def layer_sizes(self) -> list[tuple[int, int]]:
        """(fan_out, fan_in) per affine layer, output layer last."""
        dims = [self.input_dim, *self.hidden_widths, 1]
        return [(dims[i + 1], dims[i]) for i in range(len(dims) - 1)]

    @property
    def n_params(self) -> int:
        return sum(o * i + o for o, i in self.layer_sizes)


def unpack(theta, spec: ModelSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split a flat vector into per-layer (W, b); W is (fan_out, fan_in).

    Layout: layer by layer, each layer's weights (row-major) then its biases.
    Returns views into ``theta``.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1 or theta.shape[0] != spec.n_params:
        raise ValueError(f"expected {spec.n_params} parameters, got shape {theta.shape}")
    layers = []
    pos = 0
    for o, i in spec.layer_sizes:
        W = theta[pos:pos + o * i].reshape(o, i)
        pos += o * i
        b = theta[pos:pos + o]
        pos += o
        layers.append((W, b))
    return layers


def pack(layers: Sequence[tuple[np.ndarray, np.ndarray]], spec: ModelSpec) -> np.ndarray:
    sizes = spec.layer_sizes
    if len(layers) != len(sizes):
        raise ValueError(f"expected {len(sizes)} layers, got {len(layers)}")
    parts = []
    for (W, b), (o, i) in zip(layers, sizes):
        W = np.asarray(W, dtype=float)
        b = np.asarray(b, dtype=float).reshape(-1)
        if W.shape != (o, i) or b.shape != (o,):
            raise ValueError(f"layer shape mismatch: W {W.shape}, b {b.shape}, expected ({o}, {i})")
        parts.append(W.reshape(-1))
        parts.append(b)
    return np.concatenate(parts)


def init_params(spec: ModelSpec) -> np.ndarray:
    """Gaussian weights scaled by init_scale / sqrt(fan_in), zero biases."""
    rng = np.random.default_rng(spec.init_seed)
    layers = []
    for o, i in spec.layer_sizes:
        W = rng.standard_normal((o, i)) * (spec.init_scale / np.sqrt(i))
        layers.append((W, np.zeros(o)))
    return pack(layers, spec)


def _points(points) -> np.ndarray:
    return np.asarray(points, dtype=float).reshape(-1, 2)


class MLPAnsatz:
    """Fully connected tanh network with scalar output."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec

    @property
    def n_params(self) -> int:
        return self.spec.n_params

    def _forward(self, theta, X):
        layers = unpack(theta, self.spec)
        hs = [X]
        h = X
        for W, b in layers[:-1]:
            h = np.tanh(h @ W.T + b)
            hs.append(h)
        W, b = layers[-1]
        return layers, hs, h @ W[0] + b[0]

    def eval(self, theta, points) -> np.ndarray:
        return self._forward(theta, _points(points))[2]

    def eval_and_jacobian(self, theta, points):
        X = _points(points)
        layers, hs, y = self._forward(theta, X)
        N = X.shape[0]
        J = np.empty((N, self.n_params))
        offsets = np.cumsum([0] + [o * i + o for o, i in self.spec.layer_sizes])

        # output layer
        W_out, _ = layers[-1]
        pos = offsets[-2]
        width = hs[-1].shape[1]
        J[:, pos:pos + width] = hs[-1]
        J[:, pos + width] = 1.0
        delta = np.broadcast_to(W_out[0], (N, width))

        for li in range(len(layers) - 2, -1, -1):
            W, _ = layers[li]
            o, i = W.shape
            h = hs[li + 1]
            dz = delta * (1.0 - h * h)
            pos = offsets[li]
            J[:, pos:pos + o * i] = (dz[:, :, None] * hs[li][:, None, :]).reshape(N, o * i)
            J[:, pos + o * i:pos + o * i + o] = dz
            if li:
                delta = dz @ W
        return y, J

    def param_jacobian(self, theta, points) -> np.ndarray:
        return self.eval_and_jacobian(theta, points)[1]

    def laplacian(self, theta, points) -> np.ndarray:
        X = _points(points)
        layers = unpack(theta, self.spec)
        N = X.shape[0]
        lap = np.zeros(N)
        for d in range(2):
            h = X
            hp = np.zeros_like(X)
            hp[:, d] = 1.0
            hpp = np.zeros_like(X)
            for W, b in layers[:-1]:
                z = h @ W.T + b
                zp = hp @ W.T
                zpp = hpp @ W.T
                h = np.tanh(z)
                s = 1.0 - h * h
                hp = s * zp
                hpp = s * zpp - 2.0 * h * s * zp * zp
            lap += hpp @ layers[-1][0][0]
        return lap


class FrozenDifferenceAnsatz:
    """u = NN_theta - NN_frozen + u0.

    Only the live network's parameters are in theta; at theta == frozen_theta
    the field equals u0 exactly.
    """

    def __init__(self, net: MLPAnsatz, frozen_theta, baseline: ModalExpansion):
        self.net = net
        self.frozen_theta = np.array(frozen_theta, dtype=float)
        self.frozen_theta.setflags(write=False)
        self.baseline = baseline
        if self.frozen_theta.shape != (net.n_params,):
            raise ValueError("frozen parameters do not match the network spec")

    @property
    def n_params(self) -> int:
        return self.net.n_params

    def _offset(self, X):
        return self.baseline.eval(X) - self.net.eval(self.frozen_theta, X)

    def eval(self, theta, points) -> np.ndarray:
        X = _points(points)
        return self.net.eval(theta, X) + self._offset(X)

    def eval_and_jacobian(self, theta, points):
        X = _points(points)
        y, J = self.net.eval_and_jacobian(theta, X)
        return y + self._offset(X), J

    def param_jacobian(self, theta, points) -> np.ndarray:
        return self.net.param_jacobian(theta, points)

    def laplacian(self, theta, points) -> np.ndarray:
        X = _points(points)
        return (self.net.laplacian(theta, X) - self.net.laplacian(self.frozen_theta, X)
                + self.baseline.laplacian(X))


@dataclass
class LinearAdapter:
    """u = sum_k theta_k Z_k: linear in its parameters, exact modal dynamics."""

    basis: list[DiskHarmonic] = field(default_factory=list)

    @property
    def n_params(self) -> int:
        return len(self.basis)

    def _design(self, points) -> np.ndarray:
        X = _points(points)
        return np.stack([harmonic_eval(h, X) for h in self.basis], axis=1)

    def eval(self, theta, points) -> np.ndarray:
        return self._design(points) @ np.asarray(theta, dtype=float)

    def param_jacobian(self, theta, points) -> np.ndarray:
        return self._design(points)

    def eval_and_jacobian(self, theta, points):
        B = self._design(points)
        return B @ np.asarray(theta, dtype=float), B

    def laplacian(self, theta, points) -> np.ndarray:
        lam2 = np.array([h.lam**2 for h in self.basis])
        return self._design(points) @ (-lam2 * np.asarray(theta, dtype=float))


def save_snapshot(path, spec: ModelSpec, theta) -> None:
    """Text snapshot: tag line, JSON model spec, then one float.hex per line."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n_params,):
        raise ValueError("parameter vector does not match spec")
    header = {
        "hidden_widths": list(spec.hidden_widths),
        "init_seed": spec.init_seed,
        "init_scale": spec.init_scale.hex(),
        "activation": spec.activation,
        "input_dim": spec.input_dim,
        "n_params": spec.n_params,
    }
    lines = [SNAPSHOT_TAG, json.dumps(header, sort_keys=True)]
    lines.extend(float(v).hex() for v in theta)
    Path(path).write_text("\n".join(lines) + "\n")


def load_snapshot(path) -> tuple[ModelSpec, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != SNAPSHOT_TAG:
        raise ValueError(f"{path}: not a {SNAPSHOT_TAG!r} file")
    header = json.loads(lines[1])
    spec = ModelSpec(
        hidden_widths=tuple(header["hidden_widths"]),
        init_seed=int(header["init_seed"]),
        init_scale=float.fromhex(header["init_scale"]),
        activation=header["activation"],
        input_dim=int(header["input_dim"]),
    )
    theta = np.array([float.fromhex(s) for s in lines[2:]])
    if theta.shape != (spec.n_params,) or header["n_params"] != spec.n_params:
        raise ValueError(f"{path}: parameter count does not match spec")
    return spec, theta
