"""Phase-rotation qubit multilayer perceptron for fuzzified regression.

Every value flowing through the network is a unit-magnitude complex number
(a qubit phasor).  A feature x in [0, 1] is encoded as
``cos(pi*x/2) + i*sin(pi*x/2)``; a neuron rotates each input by a learned
phase, subtracts a learned threshold phasor, reads the resulting phase with
a full-quadrant arctangent, shifts it by a tanh-squashed reversal parameter,
and re-emits a unit phasor:

    u   = sum_i e^{i theta_i} z_i  -  e^{i lam}
    y   = (pi/2) * tanh(delta) - atan2(Im u, Re u)
    out = cos(y) + i sin(y)

The final neuron's real-valued output is sin^2(y), the probability of
reading |1>, so predictions live in [0, 1] like the fuzzified targets.

Training is plain per-sample sequential gradient descent with fully analytic
gradients (the chain rule runs through sin^2, the arctangent, and the phase
rotations; see ``network_gradients``).  The degenerate point u = 0 has an
undefined phase; its phase gradients are suppressed for that step and a
warning is emitted.

The public functional surface (``neuron_forward`` etc.) favors clarity; the
training loop keeps a flattened copy of the parameters and runs on scalar
arithmetic, which is what makes 15000 x n_samples sequential updates cheap
enough to be pleasant.
"""

import math
import warnings
from dataclasses import dataclass
from math import atan2, cos, isfinite, sin, tanh
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import (
    DegeneratePhaseWarning,
    DimensionError,
    DivergenceError,
    EncodingRangeWarning,
    FeatureRangeError,
    ParameterError,
)

HALF_PI = math.pi / 2.0

__all__ = [
    "QNeuron",
    "NeuronActivation",
    "encode_angle",
    "init_network",
    "neuron_forward",
    "network_forward",
    "network_gradients",
    "backprop_step",
    "train",
    "layers_to_dict",
    "layers_from_dict",
    "QBMLPRegressor",
]


@dataclass
class QNeuron:
    """Parameters of one phase-rotation neuron.

    ``theta`` holds one rotation phase per input; ``lam`` is the threshold
    phase (lambda in the math); ``delta`` feeds the tanh reversal term.
    Phases are stored unwrapped.  The same container doubles as a gradient
    record in :func:`network_gradients`.
    """

    theta: list[float]
    lam: float
    delta: float


class NeuronActivation(NamedTuple):
    y: float
    out: complex
    u: complex
    degenerate: bool


def encode_angle(x) -> complex:
    """Encode a fuzzified feature as the unit phasor e^{i pi x / 2}."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise FeatureRangeError(f"encoded features must lie in [0, 1], got {x}")
    angle = HALF_PI * x
    return complex(cos(angle), sin(angle))


def init_network(topology=(3, 3, 1), seed: int = 0) -> list[list[QNeuron]]:
    """Seeded uniform(-0.5, 0.5) initialization of all phases and reversals.

    ``topology`` lists layer widths input-first; the last width must be 1
    (scalar regression head).  Draw order is fixed (per neuron: thetas, then
    lam, then delta) so a seed pins the network bit-for-bit.
    """
    topology = tuple(int(w) for w in topology)
    if len(topology) < 2:
        raise DimensionError(f"topology needs an input and at least one layer, got {topology}")
    if any(w < 1 for w in topology):
        raise DimensionError(f"layer widths must be positive, got {topology}")
    if topology[-1] != 1:
        raise DimensionError(f"final layer must have exactly one neuron, got {topology}")
    rng = np.random.default_rng(_checked_seed(seed))
    layers = []
    for n_in, width in zip(topology, topology[1:]):
        layers.append(
            [
                QNeuron(
                    theta=[float(v) for v in rng.uniform(-0.5, 0.5, n_in)],
                    lam=float(rng.uniform(-0.5, 0.5)),
                    delta=float(rng.uniform(-0.5, 0.5)),
                )
                for _ in range(width)
            ]
        )
    return layers


def neuron_forward(inputs, neuron: QNeuron) -> NeuronActivation:
    """Activation of a single neuron on unit-phasor inputs."""
    if len(inputs) != len(neuron.theta):
        raise DimensionError(
            f"neuron expects {len(neuron.theta)} inputs, got {len(inputs)}"
        )
    u = complex(0.0, 0.0)
    for t, z in zip(neuron.theta, inputs):
        u += complex(cos(t), sin(t)) * z
    u -= complex(cos(neuron.lam), sin(neuron.lam))
    magnitude_sq = u.real * u.real + u.imag * u.imag
    degenerate = magnitude_sq == 0.0
    if degenerate:
        warnings.warn(
            "neuron pre-activation sum is exactly zero; phase taken as 0",
            DegeneratePhaseWarning,
            stacklevel=2,
        )
        arg_u = 0.0
    else:
        arg_u = atan2(u.imag, u.real)
    y = HALF_PI * tanh(neuron.delta) - arg_u
    return NeuronActivation(y=y, out=complex(cos(y), sin(y)), u=u, degenerate=degenerate)


def network_forward(features, layers) -> float:
    """Forward pass: encode features, propagate phasors, read sin^2(y)."""
    _check_widths(features, layers)
    values = [encode_angle(x) for x in features]
    activation = None
    for layer in layers:
        activations = [neuron_forward(values, neuron) for neuron in layer]
        values = [a.out for a in activations]
        activation = activations[0]
    return activation.out.imag ** 2


def _check_widths(features, layers):
    if not layers or not all(layers):
        raise DimensionError("network has no layers")
    if len(features) != len(layers[0][0].theta):
        raise DimensionError(
            f"network expects {len(layers[0][0].theta)} features, got {len(features)}"
        )
    for prev_width, layer in zip((len(layer) for layer in layers), layers[1:]):
        for neuron in layer:
            if len(neuron.theta) != prev_width:
                raise DimensionError("layer widths are inconsistent with theta counts")
    if len(layers[-1]) != 1:
        raise DimensionError("final layer must have exactly one neuron")


# ---------------------------------------------------------------------------
# Flattened training core
# ---------------------------------------------------------------------------
# The loop below is the hot path: plain nested lists of floats, scalar
# complex arithmetic, no attribute lookups.  `collect`, when given, receives
# the per-parameter gradients of this sample's loss (same nested shape as
# thetas/lams/deltas); updates use whatever lr is passed (0.0 for pure
# gradient evaluation).

def _unpack(layers):
    thetas = [[list(n.theta) for n in layer] for layer in layers]
    lams = [[float(n.lam) for n in layer] for layer in layers]
    deltas = [[float(n.delta) for n in layer] for layer in layers]
    return thetas, lams, deltas


def _repack(thetas, lams, deltas):
    return [
        [
            QNeuron(theta=list(th), lam=lm, delta=de)
            for th, lm, de in zip(th_l, lm_l, de_l)
        ]
        for th_l, lm_l, de_l in zip(thetas, lams, deltas)
    ]


def _run_sample(thetas, lams, deltas, encoded, target, lr, collect=None):
    n_layers = len(thetas)
    inputs = encoded
    layer_inputs = []
    acts = []
    degenerate_seen = False
    for l in range(n_layers):
        layer_inputs.append(inputs)
        th_l, lm_l, de_l = thetas[l], lams[l], deltas[l]
        cur = []
        outs = []
        for j in range(len(th_l)):
            th = th_l[j]
            ph = [complex(cos(t), sin(t)) for t in th]
            u = complex(0.0, 0.0)
            for k in range(len(ph)):
                u += ph[k] * inputs[k]
            lm = lm_l[j]
            elm = complex(cos(lm), sin(lm))
            u -= elm
            mag_sq = u.real * u.real + u.imag * u.imag
            degenerate = mag_sq == 0.0
            if degenerate:
                # Exactly-zero sum: phase undefined, taken as 0.  A non-finite
                # u instead flows through atan2 as NaN so divergence surfaces.
                arg_u = 0.0
                degenerate_seen = True
            else:
                arg_u = atan2(u.imag, u.real)
            g = tanh(de_l[j])
            y = HALF_PI * g - arg_u
            out = complex(cos(y), sin(y))
            cur.append((ph, elm, u, mag_sq, g, out, degenerate))
            outs.append(out)
        acts.append(cur)
        inputs = outs

    out_last = acts[-1][0][5]
    prob = out_last.imag * out_last.imag
    diff = prob - target
    loss = 0.5 * diff * diff

    if degenerate_seen:
        warnings.warn(
            "degenerate zero pre-activation encountered; its phase gradients "
            "are suppressed for this step",
            DegeneratePhaseWarning,
            stacklevel=3,
        )

    # d loss / d y of the output neuron: (O - t) * sin(2y).
    messages = [diff * 2.0 * out_last.imag * out_last.real]
    for l in range(n_layers - 1, -1, -1):
        inputs_l = layer_inputs[l]
        n_inputs = len(inputs_l)
        new_messages = [0.0] * n_inputs if l > 0 else None
        th_l, lm_l, de_l = thetas[l], lams[l], deltas[l]
        for j, (ph, elm, u, mag_sq, g, _out, degenerate) in enumerate(acts[l]):
            dy = messages[j]
            g_delta = dy * HALF_PI * (1.0 - g * g)
            de_l[j] -= lr * g_delta
            if collect is not None:
                collect[2][l][j] = g_delta
            if degenerate or dy == 0.0:
                continue  # phase gradients suppressed (or exactly zero)
            ucr, uci = u.real, u.imag
            inv = 1.0 / mag_sq
            fac = -dy * inv
            th_j = th_l[j]
            for i in range(n_inputs):
                wz = ph[i] * inputs_l[i]
                g_theta = fac * (ucr * wz.real + uci * wz.imag)
                th_j[i] -= lr * g_theta
                if new_messages is not None:
                    # The loss derivative w.r.t. the producing neuron's y has
                    # exactly the same form as the theta gradient.
                    new_messages[i] += g_theta
                if collect is not None:
                    collect[0][l][j][i] = g_theta
            g_lam = dy * inv * (ucr * elm.real + uci * elm.imag)
            lm_l[j] -= lr * g_lam
            if collect is not None:
                collect[1][l][j] = g_lam
        messages = new_messages
    return loss


def _encode_rows(X, layers):
    first_width = len(layers[0][0].theta)
    encoded = []
    for row in X:
        if len(row) != first_width:
            raise DimensionError(f"network expects {first_width} features, got {len(row)}")
        encoded.append([encode_angle(x) for x in row])
    return encoded


def network_gradients(layers, features, target):
    """Loss and analytic gradients for one sample, without touching ``layers``.

    Returns
    -------
    (loss, grads)
        ``grads`` mirrors ``layers``: a list of lists of QNeuron whose fields
        hold the partial derivatives of the loss.
    """
    _check_widths(features, layers)
    target = _checked_target(target)
    thetas, lams, deltas = _unpack(layers)
    collect = (
        [[[0.0] * len(th) for th in th_l] for th_l in thetas],
        [[0.0] * len(lm_l) for lm_l in lams],
        [[0.0] * len(de_l) for de_l in deltas],
    )
    encoded = [encode_angle(x) for x in features]
    loss = _run_sample(thetas, lams, deltas, encoded, target, lr=0.0, collect=collect)
    return loss, _repack(*collect)


def backprop_step(layers, sample, lr: float):
    """One gradient-descent update on a single (features, target) sample.

    Pure: returns a new network, leaving the input untouched.
    """
    features, target = sample
    _check_widths(features, layers)
    target = _checked_target(target)
    if not (isfinite(lr) and lr > 0):
        raise ParameterError(f"learning rate must be positive and finite, got {lr}")
    thetas, lams, deltas = _unpack(layers)
    encoded = [encode_angle(x) for x in features]
    loss = _run_sample(thetas, lams, deltas, encoded, target, lr)
    return _repack(thetas, lams, deltas), loss


def train(layers, X, y, learning_rate: float = 0.001, iterations: int = 15000):
    """Sequential per-sample gradient descent over the whole dataset.

    Each iteration runs one update per sample, in dataset order; the cost
    trace records the mean per-sample loss observed during each pass (each
    sample's loss is measured just before its own update).  Fully
    deterministic: no randomness enters after initialization.

    Returns
    -------
    (trained_layers, cost_trace)

    Raises
    ------
    DivergenceError
        If the mean cost turns non-finite, with the iteration index.
    """
    if not (isfinite(learning_rate) and learning_rate > 0):
        raise ParameterError(f"learning rate must be positive and finite, got {learning_rate}")
    if int(iterations) != iterations or iterations < 1:
        raise ParameterError(f"iterations must be a positive integer, got {iterations}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise DimensionError(
            f"expected nonempty X (n, d) with matching y (n,), got {X.shape} and {y.shape}"
        )
    targets = [_checked_target(t) for t in y]
    encoded = _encode_rows(X, layers)

    thetas, lams, deltas = _unpack(layers)
    n = len(encoded)
    trace = []
    for iteration in range(int(iterations)):
        total = 0.0
        for s in range(n):
            total += _run_sample(thetas, lams, deltas, encoded[s], targets[s], learning_rate)
        mean_cost = total / n
        if not isfinite(mean_cost):
            raise DivergenceError(
                f"training cost became non-finite at iteration {iteration}", iteration
            )
        trace.append(mean_cost)
    return _repack(thetas, lams, deltas), trace


def _checked_target(target) -> float:
    target = float(target)
    if not 0.0 <= target <= 1.0:
        raise FeatureRangeError(f"targets must lie in [0, 1], got {target}")
    return target


def _checked_seed(seed) -> int:
    if int(seed) != seed or seed < 0:
        raise ParameterError(f"seed must be a non-negative integer, got {seed}")
    return int(seed)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def layers_to_dict(layers) -> dict:
    """JSON-ready description of the network (exact float round trip)."""
    widths = [len(layers[0][0].theta)] + [len(layer) for layer in layers]
    return {
        "kind": "phase-rotation-mlp",
        "version": 1,
        "topology": widths,
        "layers": [
            [{"theta": list(n.theta), "lam": n.lam, "delta": n.delta} for n in layer]
            for layer in layers
        ],
    }


def layers_from_dict(payload: dict) -> list[list[QNeuron]]:
    if payload.get("kind") != "phase-rotation-mlp" or payload.get("version") != 1:
        raise ParameterError("payload does not describe a version-1 phase-rotation network")
    layers = [
        [
            QNeuron(theta=[float(t) for t in n["theta"]], lam=float(n["lam"]), delta=float(n["delta"]))
            for n in layer
        ]
        for layer in payload["layers"]
    ]
    if not layers or len(layers[-1]) != 1:
        raise ParameterError("serialized network must end in a single-neuron layer")
    return layers


# ---------------------------------------------------------------------------
# Estimator front end
# ---------------------------------------------------------------------------

class QBMLPRegressor(RegressorMixin, BaseEstimator):
    """Fuzzified-regression estimator around the phase-rotation network.

    Expects features and targets already scaled into [0, 1] (see
    ``dataset.FuzzyScaler``).  Training data must be strictly in range;
    prediction inputs outside [0, 1] — e.g. test rows scaled with
    train-partition bounds — are clamped to the encodable range with an
    ``EncodingRangeWarning``.

    Parameters
    ----------
    hidden_width : int
        Neurons in the single hidden layer (3 reproduces the reference
        3-3-1 shape on three features).
    learning_rate : float
    iterations : int
    seed : int
        Initialization seed; fixes the run bit-for-bit.

    Attributes
    ----------
    layers_ : trained network (list of lists of QNeuron)
    cost_trace_ : list of float, mean per-sample loss per iteration
    n_features_in_ : int
    """

    def __init__(self, hidden_width: int = 3, learning_rate: float = 0.001,
                 iterations: int = 15000, seed: int = 0):
        self.hidden_width = hidden_width
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.seed = seed

    def fit(self, X, y):
        X = check_array(X, dtype=float)
        y = check_array(y, dtype=float, ensure_2d=False)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DimensionError(f"y of shape {y.shape} does not match X of shape {X.shape}")
        if int(self.hidden_width) != self.hidden_width or self.hidden_width < 1:
            raise ParameterError(f"hidden_width must be a positive integer, got {self.hidden_width}")
        topology = (X.shape[1], int(self.hidden_width), 1)
        layers = init_network(topology, seed=self.seed)
        self.layers_, self.cost_trace_ = train(
            layers, X, y, learning_rate=self.learning_rate, iterations=self.iterations
        )
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "layers_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        clipped = np.clip(X, 0.0, 1.0)
        out_of_range = int(np.sum(np.any(clipped != X, axis=1)))
        if out_of_range:
            warnings.warn(
                f"{out_of_range} row(s) had features outside [0, 1] and were clamped "
                "to the encodable range",
                EncodingRangeWarning,
                stacklevel=2,
            )
        return np.array([network_forward(row, self.layers_) for row in clipped])
