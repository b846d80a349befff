"""Feed-forward network with ReLU hiddens, optional layer norm and dropout.

Backpropagation returns gradients for every parameter *and* for the input
vector; the latter is what lets an attack push loss through a frozen
network into an upstream generator. Hidden layers apply
affine -> layer norm -> ReLU -> dropout; dropout uses inverted scaling so
inference needs no correction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError, NumericError, ShapeError
from ..linalg import Rng, sigmoid, softmax

_LN_EPS = 1e-5

HEADS = ("softmax", "sigmoid", "identity")


@dataclass
class Layer:
    w: np.ndarray  # (out, in)
    b: np.ndarray  # (out,)
    gain: np.ndarray = None  # layer-norm scale, hidden layers only
    bias: np.ndarray = None  # layer-norm shift


@dataclass
class Mlp:
    sizes: list
    head: str = "softmax"
    dropout: float = 0.0
    layer_norm: bool = False
    layers: list = field(default_factory=list)

    def __post_init__(self):
        if self.head not in HEADS:
            raise InputError(f"unknown head {self.head!r}")
        if not (0.0 <= self.dropout < 1.0):
            raise InputError(f"dropout must lie in [0, 1), got {self.dropout}")

    @property
    def in_width(self) -> int:
        return self.sizes[0]

    @property
    def out_width(self) -> int:
        return self.sizes[-1]


def init_mlp(
    sizes,
    head: str = "softmax",
    dropout: float = 0.0,
    layer_norm: bool = False,
    rng: Rng = None,
    init: str = "glorot",
    init_scale: float = 1.0,
) -> Mlp:
    """Build a network; `glorot` draws uniform +-sqrt(6/(fan_in+fan_out)),
    `normal` draws N(0,1)*init_scale."""
    if len(sizes) < 2:
        raise InputError("need at least input and output widths")
    rng = rng or Rng(0)
    model = Mlp(list(sizes), head, dropout, layer_norm)
    for li in range(len(sizes) - 1):
        fan_in, fan_out = sizes[li], sizes[li + 1]
        if init == "glorot":
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        elif init == "normal":
            w = rng.normal(0.0, 1.0, size=(fan_out, fan_in)) * init_scale
        else:
            raise InputError(f"unknown init {init!r}")
        hidden = li < len(sizes) - 2
        model.layers.append(
            Layer(
                w=w,
                b=np.zeros(fan_out),
                gain=np.ones(fan_out) if (layer_norm and hidden) else None,
                bias=np.zeros(fan_out) if (layer_norm and hidden) else None,
            )
        )
    return model


def _apply_head(z: np.ndarray, head: str) -> np.ndarray:
    if head == "softmax":
        return softmax(z)
    if head == "sigmoid":
        return sigmoid(z)
    return z


def _head_backward(d_out: np.ndarray, out: np.ndarray, head: str) -> np.ndarray:
    if head == "softmax":
        return out * (d_out - np.sum(d_out * out, axis=1, keepdims=True))
    if head == "sigmoid":
        return d_out * out * (1.0 - out)
    return d_out


def mlp_forward(model: Mlp, x: np.ndarray, training: bool = False, rng: Rng = None) -> np.ndarray:
    out, _ = mlp_forward_cache(model, x, training=training, rng=rng)
    return out


def mlp_forward_cache(model: Mlp, x: np.ndarray, training: bool = False, rng: Rng = None):
    """Forward pass keeping per-layer intermediates for backpropagation."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != model.in_width:
        raise ShapeError(f"expected inputs of width {model.in_width}, got {x.shape[1]}")
    if training and model.dropout > 0.0 and rng is None:
        raise InputError("training forward with dropout needs an rng")
    a = x
    caches = []
    n_layers = len(model.layers)
    for li, layer in enumerate(model.layers):
        z = a @ layer.w.T + layer.b
        cache = {"a_in": a, "z": z}
        if li == n_layers - 1:
            out = _apply_head(z, model.head)
            cache["out"] = out
            a = out
        else:
            h = z
            if layer.gain is not None:
                mu = h.mean(axis=1, keepdims=True)
                sig = np.sqrt(h.var(axis=1, keepdims=True) + _LN_EPS)
                zhat = (h - mu) / sig
                cache["zhat"], cache["sig"] = zhat, sig
                h = layer.gain * zhat + layer.bias
            relu_mask = h > 0
            h = h * relu_mask
            cache["relu_mask"] = relu_mask
            if training and model.dropout > 0.0:
                keep = rng.uniform(size=h.shape) >= model.dropout
                h = h * keep / (1.0 - model.dropout)
                cache["drop_mask"] = keep
            a = h
        caches.append(cache)
    full_cache = {"caches": caches, "squeeze": squeeze, "training": training}
    return (a[0] if squeeze else a), full_cache


def mlp_backward(model: Mlp, cache, d_out: np.ndarray):
    """Gradients of a scalar loss given d loss / d output (post-head).

    Returns (param_grads, d_input); param_grads mirrors model.layers as a
    list of dicts with keys w, b and, when layer norm is on, gain, bias.
    """
    d_out = np.asarray(d_out, dtype=np.float64)
    if cache["squeeze"] and d_out.ndim == 1:
        d_out = d_out[None, :]
    last = cache["caches"][-1]
    d_z = _head_backward(d_out, last["out"], model.head)
    return _backward_from_logits(model, cache, d_z)


def _backward_from_logits(model: Mlp, cache, d_z_out: np.ndarray):
    caches = cache["caches"]
    grads = [None] * len(model.layers)
    d_next = d_z_out
    for li in range(len(model.layers) - 1, -1, -1):
        layer, lc = model.layers[li], caches[li]
        if li == len(model.layers) - 1:
            d_z = d_next
        else:
            d_h = d_next
            if "drop_mask" in lc:
                d_h = d_h * lc["drop_mask"] / (1.0 - model.dropout)
            d_h = d_h * lc["relu_mask"]
            if layer.gain is not None:
                zhat, sig = lc["zhat"], lc["sig"]
                g = {"gain": np.sum(d_h * zhat, axis=0), "bias": np.sum(d_h, axis=0)}
                d_zhat = d_h * layer.gain
                d_z = (
                    d_zhat
                    - d_zhat.mean(axis=1, keepdims=True)
                    - zhat * (d_zhat * zhat).mean(axis=1, keepdims=True)
                ) / sig
            else:
                g = {}
                d_z = d_h
        entry = {"w": d_z.T @ lc["a_in"], "b": d_z.sum(axis=0)}
        if li < len(model.layers) - 1 and layer.gain is not None:
            entry.update(g)
        grads[li] = entry
        d_next = d_z @ layer.w
    d_input = d_next[0] if cache["squeeze"] else d_next
    return grads, d_input


def zero_velocity(model: Mlp):
    vel = []
    for layer in model.layers:
        entry = {"w": np.zeros_like(layer.w), "b": np.zeros_like(layer.b)}
        if layer.gain is not None:
            entry["gain"] = np.zeros_like(layer.gain)
            entry["bias"] = np.zeros_like(layer.bias)
        vel.append(entry)
    return vel


def sgd_step(model: Mlp, grads, velocity, lr: float, momentum: float) -> None:
    for layer, g, v in zip(model.layers, grads, velocity):
        for key in g:
            v[key] = momentum * v[key] - lr * g[key]
            setattr(layer, key, getattr(layer, key) + v[key])


@dataclass
class MlpConfig:
    sizes: list
    head: str = "softmax"
    dropout: float = 0.0
    layer_norm: bool = False
    lr: float = 0.01
    epochs: int = 50
    batch: int = 32
    seed: int = 0
    momentum: float = 0.9
    loss: str = "ce"  # "ce" (softmax head) or "mse" (any head)
    init: str = "glorot"
    init_scale: float = 1.0


def train_mlp(features: np.ndarray, targets: np.ndarray, cfg: MlpConfig) -> Mlp:
    """Mini-batch SGD fit.

    With loss "ce", targets are integer labels or per-row distributions
    (soft targets) and the head must be softmax. With loss "mse", targets
    are a (n, out) matrix matched against the post-head output.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise InputError("features must be a nonempty (n, d) matrix")
    if features.shape[1] != cfg.sizes[0]:
        raise ShapeError(f"feature width {features.shape[1]} != input size {cfg.sizes[0]}")
    targets = np.asarray(targets)
    out_w = cfg.sizes[-1]
    if cfg.loss == "ce":
        if cfg.head != "softmax":
            raise InputError("cross-entropy training requires the softmax head")
        if targets.ndim == 1:
            dist = np.zeros((features.shape[0], out_w))
            dist[np.arange(features.shape[0]), targets.astype(int)] = 1.0
        else:
            dist = np.asarray(targets, dtype=np.float64)
    elif cfg.loss == "mse":
        dist = np.asarray(targets, dtype=np.float64)
    else:
        raise InputError(f"unknown loss {cfg.loss!r}")
    if dist.shape != (features.shape[0], out_w):
        raise ShapeError(f"targets must have shape {(features.shape[0], out_w)}")

    rng = Rng(cfg.seed)
    model = init_mlp(
        cfg.sizes,
        head=cfg.head,
        dropout=cfg.dropout,
        layer_norm=cfg.layer_norm,
        rng=rng.fork("init"),
        init=cfg.init,
        init_scale=cfg.init_scale,
    )
    velocity = zero_velocity(model)
    drop_rng = rng.fork("dropout")
    shuffle_rng = rng.fork("shuffle")
    n = features.shape[0]
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, cfg.batch):
            idx = order[start : start + cfg.batch]
            xb, tb = features[idx], dist[idx]
            out, fcache = mlp_forward_cache(model, xb, training=True, rng=drop_rng)
            nb = xb.shape[0]
            if cfg.loss == "ce":
                loss = -float(np.mean(np.sum(tb * np.log(out + 1e-300), axis=1)))
                d_z = (out - tb) / nb  # combined softmax + CE gradient
                grads, _ = _backward_from_logits(model, fcache, d_z)
            else:
                loss = float(np.mean((out - tb) ** 2))
                d_out = 2.0 * (out - tb) / (nb * out_w)
                grads, _ = mlp_backward(model, fcache, d_out)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss at epoch {epoch}")
            sgd_step(model, grads, velocity, cfg.lr, cfg.momentum)
    return model
