"""Fully-connected network mapping time to the (T, H) state, with exact
time derivatives.

The network takes a single scaled time input and produces two outputs that
are mapped to physical units by a per-channel affine transform.  Alongside
the value, evaluation propagates a forward tangent (the exact derivative of
every intermediate with respect to t), so d(T)/dt and d(H)/dt come out of
the same pass with no finite differencing.  For training, the identical
computation can be recorded on a :class:`~greenhouse_pinn.tape.Tape`;
reverse-mode then differentiates through the tangent propagation as well,
which is what makes gradients of derivative-dependent losses exact.

Canonical trainable ordering (used by checkpoints, flat parameter vectors,
and gradient vectors): all weight matrices in layer order, each flattened
row-major, followed by all bias vectors in layer order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import EvaluationError
from .model import State
from .tape import Tape, Var, accumulate_grad

CHECKPOINT_FORMAT = "network-checkpoint-v1"


@dataclass(frozen=True)
class AffineMap:
    """x -> scale * x + offset"""

    scale: float
    offset: float

    def __call__(self, x):
        return self.scale * x + self.offset


def input_scale_for(time_range: tuple[float, float]) -> AffineMap:
    """Affine map sending ``time_range`` onto [-1, 1]."""
    lo, hi = time_range
    if not hi > lo:
        raise ValueError(f"time range must be increasing, got {time_range}")
    return AffineMap(scale=2.0 / (hi - lo), offset=-(hi + lo) / (hi - lo))


@dataclass(frozen=True)
class NetworkOutput:
    """Value and exact time derivative at one time."""

    value: State
    time_derivative: tuple[float, float]


@dataclass
class NetworkModel:
    """Feed-forward tanh network with input/output affine scaling.

    weights[i] has shape (fan_out, fan_in); biases[i] has shape (fan_out, 1).
    The final layer is linear with 2 outputs; ``output_offset`` and
    ``output_scale`` (length-2 arrays) map raw outputs to physical units:
    physical = offset + scale * raw.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input_scale: AffineMap
    output_offset: np.ndarray
    output_scale: np.ndarray
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation not in ("tanh", "identity"):
            raise ValueError(f"unsupported activation {self.activation!r}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("weights and biases must be parallel, nonempty lists")
        fan_in = self.weights[0].shape[1]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape[1] != fan_in:
                raise ValueError(f"layer {i} expects fan-in {fan_in}, weight shape {w.shape}")
            if b.shape != (w.shape[0], 1):
                raise ValueError(f"layer {i} bias shape {b.shape} mismatches weight {w.shape}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i} contains non-finite parameters")
            fan_in = w.shape[0]
        if fan_in != 2:
            raise ValueError(f"final output dimension must be 2, got {fan_in}")
        self.output_offset = np.asarray(self.output_offset, dtype=float).reshape(2)
        self.output_scale = np.asarray(self.output_scale, dtype=float).reshape(2)

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "NetworkModel":
        return replace(self, weights=[w.copy() for w in self.weights],
                       biases=[b.copy() for b in self.biases])


def init_network(hidden_layers: int, hidden_width: int, seed: int,
                 time_range: tuple[float, float] = (0.0, 72.0),
                 output_offset=(22.0, 70.0),
                 output_scale=(10.0, 20.0)) -> NetworkModel:
    """Deterministic initialization: weights uniform in
    +-sqrt(6/(fan_in+fan_out)) drawn layer by layer from PCG64(seed); biases
    start at zero."""
    if hidden_layers < 1:
        raise ValueError(f"need at least one hidden layer, got {hidden_layers}")
    if hidden_width < 1:
        raise ValueError(f"hidden width must be positive, got {hidden_width}")

    sizes = [1] + [hidden_width] * hidden_layers + [2]
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros((fan_out, 1)))
    return NetworkModel(weights=weights, biases=biases,
                        input_scale=input_scale_for(time_range),
                        output_offset=np.asarray(output_offset, dtype=float),
                        output_scale=np.asarray(output_scale, dtype=float))


def evaluate(net: NetworkModel, times, with_tangent: bool = True):
    """Evaluate the network at an array of times.

    Returns ``(values, tangents)`` with shape (2, N) each; ``tangents`` is
    None when ``with_tangent`` is false.  Raises EvaluationError on overflow.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    x = (net.input_scale.scale * times + net.input_scale.offset)[None, :]
    xd = np.full_like(x, net.input_scale.scale) if with_tangent else None

    a, ad = x, xd
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        with np.errstate(over="ignore", invalid="ignore"):
            z = w @ a + b
        if not np.all(np.isfinite(z)):
            raise EvaluationError(f"non-finite activation in layer {i}")
        if i == last or net.activation == "identity":
            a = z
            if with_tangent:
                ad = w @ ad
        else:
            a = np.tanh(z)
            if with_tangent:
                ad = (1.0 - a * a) * (w @ ad)

    values = net.output_offset[:, None] + net.output_scale[:, None] * a
    tangents = net.output_scale[:, None] * ad if with_tangent else None
    return values, tangents


def forward(net: NetworkModel, t: float) -> NetworkOutput:
    """Value and exact time derivative at a single time."""
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    values, tangents = evaluate(net, [t], with_tangent=True)
    return NetworkOutput(
        value=State(float(values[0, 0]), float(values[1, 0])),
        time_derivative=(float(tangents[0, 0]), float(tangents[1, 0])))


class TapedParameters:
    """Leaf variables for one training step, in canonical ordering."""

    def __init__(self, tape: Tape, net: NetworkModel):
        self.net = net
        self.weight_vars = [tape.var(w) for w in net.weights]
        self.bias_vars = [tape.var(b) for b in net.biases]

    def leaves(self) -> list[Var]:
        return self.weight_vars + self.bias_vars


def taped_evaluate(params: TapedParameters, times: np.ndarray,
                   with_tangent: bool = True):
    """The same computation as :func:`evaluate`, recorded on the tape.

    Returns ``(values, tangents)`` Vars of shape (2, N); ``tangents`` is None
    when ``with_tangent`` is false.  The whole network application (including
    the tangent chain) is recorded as one fused node whose pullback runs the
    reverse sweep through both the primal and the tangent propagation, so a
    backward pass yields exact gradients of values and time derivatives with
    respect to every weight and bias.  ``taped_evaluate_unfused`` builds the
    identical computation out of elementary tape operations and serves as the
    reference the fused pullback is tested against.
    """
    net = params.net
    tape = params.weight_vars[0]._tape
    times = np.atleast_1d(np.asarray(times, dtype=float))
    x = (net.input_scale.scale * times + net.input_scale.offset)[None, :]

    weights = [v.data for v in params.weight_vars]
    biases = [v.data for v in params.bias_vars]
    n_layers = len(weights)
    tanh_hidden = net.activation == "tanh"

    # Forward pass, keeping what the reverse sweep needs per layer:
    # the layer input a_in, its tangent ad_in, and for tanh layers the
    # activation out and its derivative d = 1 - out^2 (u = w @ ad_in).
    a = x
    ad = np.full_like(x, net.input_scale.scale) if with_tangent else None
    ctx = []
    for i in range(n_layers):
        w, b = weights[i], biases[i]
        a_in, ad_in = a, ad
        z = w @ a_in + b
        if i == n_layers - 1 or not tanh_hidden:
            out, d, u = z, None, None
            a = out
            if with_tangent:
                ad = w @ ad_in
        else:
            out = np.tanh(z)
            d = 1.0 - out * out
            a = out
            u = None
            if with_tangent:
                u = w @ ad_in
                ad = d * u
        ctx.append((a_in, ad_in, out, d, u))

    off = net.output_offset[:, None]
    sc = net.output_scale[:, None]
    if with_tangent:
        stacked = np.concatenate([off + sc * a, sc * ad], axis=0)
    else:
        stacked = off + sc * a

    def pullback(g):
        g_a = sc * g[0:2]
        g_ad = sc * g[2:4] if with_tangent else None
        for i in reversed(range(n_layers)):
            w_var, b_var = params.weight_vars[i], params.bias_vars[i]
            w = weights[i]
            a_in, ad_in, _out, d, u = ctx[i]
            if d is None:  # linear layer (output layer or identity activation)
                g_z, g_u = g_a, g_ad
            elif g_ad is None:  # tanh layer, no tangent requested
                g_z, g_u = d * g_a, None
            else:
                g_u = g_ad * d
                g_z = d * (g_a - 2.0 * (_out * (g_ad * u)))
            gw = g_z @ a_in.T
            if g_u is not None:
                gw += g_u @ ad_in.T
            accumulate_grad(w_var, gw)
            accumulate_grad(b_var, g_z.sum(axis=1, keepdims=True))
            if i > 0:
                g_a = w.T @ g_z
                g_ad = w.T @ g_u if g_u is not None else None

    parents = tuple(params.weight_vars) + tuple(params.bias_vars)
    node = tape.custom(stacked, parents, pullback)
    if with_tangent:
        return node[0:2], node[2:4]
    return node, None


def taped_evaluate_unfused(params: TapedParameters, times: np.ndarray,
                           with_tangent: bool = True):
    """Reference implementation of :func:`taped_evaluate` built from
    elementary tape operations; used to validate the fused pullback."""
    net = params.net
    times = np.atleast_1d(np.asarray(times, dtype=float))
    x = (net.input_scale.scale * times + net.input_scale.offset)[None, :]
    xd = np.full_like(x, net.input_scale.scale)

    a, ad = x, (xd if with_tangent else None)
    last = len(params.weight_vars) - 1
    for i, (w, b) in enumerate(zip(params.weight_vars, params.bias_vars)):
        z = (w @ a) + b
        if i == last or net.activation == "identity":
            a = z
            if with_tangent:
                ad = w @ ad
        else:
            a = z.tanh()
            if with_tangent:
                ad = (1.0 - a * a) * (w @ ad)

    off = net.output_offset[:, None]
    sc = net.output_scale[:, None]
    values = off + sc * a
    tangents = sc * ad if with_tangent else None
    return values, tangents


# -- flat parameter/gradient vectors -----------------------------------------

def parameter_vector(net: NetworkModel) -> np.ndarray:
    """Trainable parameters flattened in canonical ordering."""
    parts = [w.ravel() for w in net.weights] + [b.ravel() for b in net.biases]
    return np.concatenate(parts)


def with_parameter_vector(net: NetworkModel, flat: np.ndarray) -> NetworkModel:
    """A copy of ``net`` with parameters replaced from a flat vector."""
    flat = np.asarray(flat, dtype=float)
    if flat.size != net.parameter_count:
        raise ValueError(f"expected {net.parameter_count} values, got {flat.size}")
    out = net.copy()
    pos = 0
    for w in out.weights:
        w[...] = flat[pos:pos + w.size].reshape(w.shape)
        pos += w.size
    for b in out.biases:
        b[...] = flat[pos:pos + b.size].reshape(b.shape)
        pos += b.size
    return out


def gradient_vector(params: TapedParameters, phi_var: Var | None = None) -> np.ndarray:
    """Collect accumulated gradients into the canonical flat ordering
    (weights, then biases, then the transformed physical parameters if any).

    Leaves that did not influence the differentiated scalar contribute exact
    zeros.  Raises if called before a backward pass ran on the tape.
    """
    leaves = params.leaves() + ([phi_var] if phi_var is not None else [])
    if all(v.grad is None for v in leaves):
        raise RuntimeError("gradient_vector called before backward")
    ordered = params.weight_vars + params.bias_vars
    parts = [_grad_of(v).ravel() for v in ordered]
    if phi_var is not None:
        parts.append(_grad_of(phi_var).ravel())
    return np.concatenate(parts)


def _grad_of(v: Var) -> np.ndarray:
    return v.grad if v.grad is not None else np.zeros_like(v.data)


# -- checkpoint I/O -----------------------------------------------------------

def save_network(net: NetworkModel, path) -> None:
    """Write a JSON checkpoint; floats use shortest-repr and round-trip
    bit-exactly."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "activation": net.activation,
        "layer_sizes": net.layer_sizes,
        "input_scale": {"scale": net.input_scale.scale, "offset": net.input_scale.offset},
        "output_offset": net.output_offset.tolist(),
        "output_scale": net.output_scale.tolist(),
        "weights": [w.ravel().tolist() for w in net.weights],
        "biases": [b.ravel().tolist() for b in net.biases],
    }
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(doc, stream)
        stream.write("\n")


def load_network(path) -> NetworkModel:
    with open(path, "r", encoding="utf-8") as stream:
        doc = json.load(stream)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} file")
    sizes = doc["layer_sizes"]
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        weights.append(np.asarray(doc["weights"][i], dtype=float).reshape(fan_out, fan_in))
        biases.append(np.asarray(doc["biases"][i], dtype=float).reshape(fan_out, 1))
    return NetworkModel(
        weights=weights, biases=biases,
        input_scale=AffineMap(**doc["input_scale"]),
        output_offset=np.asarray(doc["output_offset"], dtype=float),
        output_scale=np.asarray(doc["output_scale"], dtype=float),
        activation=doc["activation"])
