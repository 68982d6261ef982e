"""Continuous-variable photonic network for fuzzified regression.

Features enter as phase-space displacements of otherwise-vacuum qumodes; each
network layer applies an interferometer (a rectangular beamsplitter mesh
followed by per-mode rotations), per-mode squeezers, optionally a second
interferometer, per-mode displacements, and per-mode Kerr nonlinearities.
The prediction is an affine rescaling of the position-quadrature mean of mode
0 (homodyne readout): with the default scale (0.25, 0.5) the readout range
[-2, 2] covers fuzzified targets in [0, 1].

Two layer layouts exist: ``"standard"`` as above, and ``"modified"``, which
omits each layer's second interferometer — strictly fewer gates (the two-mode
ones dominate the cost), measurably faster, same parameter families.

Training is full-batch gradient descent with central finite differences over
every real parameter (a complex displacement contributes its real and
imaginary components separately).  Given a seed the whole run is
deterministic: initialization is the only random draw and the forward pass is
pure, so gradient components may safely be evaluated concurrently on
independent state copies.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import fock
from .exceptions import (
    DimensionError,
    DivergenceError,
    EncodingRangeWarning,
    FeatureRangeError,
    ParameterError,
)

VARIANTS = ("standard", "modified")

#: Largest displacement amplitude the default cutoff represents faithfully.
ENCODING_BOUND = 2.0

DEFAULT_OUTPUT_SCALE = (0.25, 0.5)
DEFAULT_FD_EPSILON = 1e-3
DEFAULT_INIT_SPREAD = 0.05

__all__ = [
    "CVLayerParams",
    "CVNetwork",
    "TrainConfig",
    "CVQNNRegressor",
    "mesh_pairs",
    "beamsplitter_count",
    "layer_parameter_count",
    "validate_network",
    "build_network",
    "encode_input",
    "layer_gates",
    "layer_apply",
    "gate_count",
    "forward",
    "forward_batch",
    "cost_mse",
    "parameter_vector",
    "with_parameters",
    "network_parameter_count",
    "grad_fd",
    "train_sgd",
    "net_to_dict",
    "net_from_dict",
]


@dataclass
class CVLayerParams:
    """Parameters of one network layer over ``W`` modes.

    Both interferometers are W(W-1)/2 beamsplitter (theta, phi) pairs in
    :func:`mesh_pairs` order plus one rotation phase per mode.  The
    ``modified`` layout has no second interferometer, so its
    ``interferometer2_*`` lists are empty.
    """

    interferometer1_bs: list[tuple[float, float]]
    interferometer1_rot: list[float]
    squeeze_r: list[float]
    interferometer2_bs: list[tuple[float, float]]
    interferometer2_rot: list[float]
    displacement_alpha: list[complex]
    kerr_kappa: list[float]


@dataclass
class CVNetwork:
    """A stack of layers plus the fixed readout scaling.

    ``output_scale`` is (gain, offset): prediction = gain * <x of mode 0>
    + offset.  An empty ``layers`` list is legal and reads out the encoding
    directly.
    """

    modes: int
    cutoff: int
    layers: list[CVLayerParams]
    variant: str = "standard"
    output_scale: tuple[float, float] = DEFAULT_OUTPUT_SCALE


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    iterations: int = 200
    fd_epsilon: float = DEFAULT_FD_EPSILON
    seed: int = 0
    init_spread: float = DEFAULT_INIT_SPREAD


# ---------------------------------------------------------------------------
# Structure
# ---------------------------------------------------------------------------

def beamsplitter_count(modes: int) -> int:
    return modes * (modes - 1) // 2


def mesh_pairs(modes: int) -> list[tuple[int, int]]:
    """Mode pairs of the rectangular beamsplitter mesh, in application order.

    Alternating brickwork over adjacent modes: sweep ``l`` couples (i, i+1)
    for every i of parity ``l % 2``.  ``modes`` sweeps give the full
    W(W-1)/2-element mesh.
    """
    if not isinstance(modes, int) or modes < 1:
        raise DimensionError(f"modes must be a positive integer, got {modes!r}")
    pairs = []
    for sweep in range(modes):
        for i in range(sweep % 2, modes - 1, 2):
            pairs.append((i, i + 1))
    return pairs


def _zero_layer(modes: int, variant: str) -> CVLayerParams:
    nbs = beamsplitter_count(modes)
    second = variant == "standard"
    return CVLayerParams(
        interferometer1_bs=[(0.0, 0.0)] * nbs,
        interferometer1_rot=[0.0] * modes,
        squeeze_r=[0.0] * modes,
        interferometer2_bs=[(0.0, 0.0)] * nbs if second else [],
        interferometer2_rot=[0.0] * modes if second else [],
        displacement_alpha=[0j] * modes,
        kerr_kappa=[0.0] * modes,
    )


def layer_parameter_count(modes: int, variant: str) -> int:
    nbs = beamsplitter_count(modes)
    count = 2 * nbs + 5 * modes  # interferometer 1, squeezers, alpha re/im, Kerr
    if variant == "standard":
        count += 2 * nbs + modes
    return count


def network_parameter_count(net: CVNetwork) -> int:
    return len(net.layers) * layer_parameter_count(net.modes, net.variant)


def _validate_layer(params: CVLayerParams, modes: int, variant: str) -> None:
    nbs = beamsplitter_count(modes)
    standard = variant == "standard"
    shape = {
        "interferometer1_bs": (params.interferometer1_bs, nbs),
        "interferometer1_rot": (params.interferometer1_rot, modes),
        "squeeze_r": (params.squeeze_r, modes),
        "interferometer2_bs": (params.interferometer2_bs, nbs if standard else 0),
        "interferometer2_rot": (params.interferometer2_rot, modes if standard else 0),
        "displacement_alpha": (params.displacement_alpha, modes),
        "kerr_kappa": (params.kerr_kappa, modes),
    }
    for name, (values, expected) in shape.items():
        if len(values) != expected:
            raise DimensionError(
                f"{name} must have {expected} entries for {modes} modes "
                f"({variant} layout), got {len(values)}"
            )
    flat = []
    for pair in [*params.interferometer1_bs, *params.interferometer2_bs]:
        if len(pair) != 2:
            raise DimensionError(f"beamsplitter entries are (theta, phi) pairs, got {pair!r}")
        flat.extend(pair)
    flat.extend(params.interferometer1_rot)
    flat.extend(params.squeeze_r)
    flat.extend(params.interferometer2_rot)
    flat.extend(params.kerr_kappa)
    for alpha in params.displacement_alpha:
        alpha = complex(alpha)
        flat.extend((alpha.real, alpha.imag))
    if not all(math.isfinite(float(v)) for v in flat):
        raise ParameterError("layer parameters must all be finite")


def validate_network(net: CVNetwork) -> None:
    if not isinstance(net.modes, int) or net.modes < 1:
        raise DimensionError(f"modes must be a positive integer, got {net.modes!r}")
    if not isinstance(net.cutoff, int) or net.cutoff < 2:
        raise DimensionError(f"cutoff must be an integer >= 2, got {net.cutoff!r}")
    if net.variant not in VARIANTS:
        raise ParameterError(f"variant must be one of {VARIANTS}, got {net.variant!r}")
    gain, offset = net.output_scale
    if not (math.isfinite(gain) and math.isfinite(offset)):
        raise ParameterError(f"output scale must be finite, got {net.output_scale!r}")
    for params in net.layers:
        _validate_layer(params, net.modes, net.variant)


def build_network(modes: int = 3, cutoff: int = 10, n_layers: int = 1,
                  variant: str = "standard",
                  output_scale: tuple[float, float] = DEFAULT_OUTPUT_SCALE,
                  seed: int = 0, init_spread: float = DEFAULT_INIT_SPREAD) -> CVNetwork:
    """A freshly initialized network: seeded uniform(+-init_spread) parameters.

    The small default spread keeps early states close to vacuum, well inside
    the subspace the cutoff represents faithfully.
    """
    if not isinstance(n_layers, int) or n_layers < 0:
        raise DimensionError(f"n_layers must be a non-negative integer, got {n_layers!r}")
    net = CVNetwork(
        modes=modes,
        cutoff=cutoff,
        layers=[_zero_layer(modes, variant) for _ in range(n_layers)],
        variant=variant,
        output_scale=(float(output_scale[0]), float(output_scale[1])),
    )
    validate_network(net)
    rng = np.random.default_rng(_checked_seed(seed))
    if not (math.isfinite(init_spread) and init_spread >= 0):
        raise ParameterError(f"init_spread must be finite and >= 0, got {init_spread}")
    return with_parameters(net, rng.uniform(-init_spread, init_spread, network_parameter_count(net)))


# ---------------------------------------------------------------------------
# Parameter vector <-> structured layers
# ---------------------------------------------------------------------------
# Fixed flat ordering, per layer in gate-application order:
#   1. interferometer-1 beamsplitters: theta, phi per mesh pair
#   2. interferometer-1 rotations, mode order
#   3. squeeze magnitudes, mode order
#   4. (standard only) interferometer-2 beamsplitters, then its rotations
#   5. displacements: Re(alpha), Im(alpha) per mode
#   6. Kerr strengths, mode order

def parameter_vector(net: CVNetwork) -> np.ndarray:
    """All real parameters as one flat vector (ordering documented above)."""
    values = []
    for layer in net.layers:
        for theta, phi in layer.interferometer1_bs:
            values += [theta, phi]
        values += layer.interferometer1_rot
        values += layer.squeeze_r
        for theta, phi in layer.interferometer2_bs:
            values += [theta, phi]
        values += layer.interferometer2_rot
        for alpha in layer.displacement_alpha:
            alpha = complex(alpha)
            values += [alpha.real, alpha.imag]
        values += layer.kerr_kappa
    return np.asarray(values, dtype=float)


def with_parameters(net: CVNetwork, vector) -> CVNetwork:
    """A new network with the same structure and the given flat parameters."""
    vector = np.asarray(vector, dtype=float)
    expected = network_parameter_count(net)
    if vector.shape != (expected,):
        raise DimensionError(
            f"parameter vector must have shape ({expected},), got {vector.shape}"
        )
    values = vector.tolist()
    cursor = 0

    def take(count):
        nonlocal cursor
        chunk = values[cursor:cursor + count]
        cursor += count
        return chunk

    def take_pairs(count):
        return [tuple(take(2)) for _ in range(count)]

    nbs = beamsplitter_count(net.modes)
    second = net.variant == "standard"
    layers = []
    for _ in net.layers:
        layers.append(
            CVLayerParams(
                interferometer1_bs=take_pairs(nbs),
                interferometer1_rot=take(net.modes),
                squeeze_r=take(net.modes),
                interferometer2_bs=take_pairs(nbs) if second else [],
                interferometer2_rot=take(net.modes) if second else [],
                displacement_alpha=[complex(re, im) for re, im in take_pairs(net.modes)],
                kerr_kappa=take(net.modes),
            )
        )
    return CVNetwork(
        modes=net.modes,
        cutoff=net.cutoff,
        layers=layers,
        variant=net.variant,
        output_scale=net.output_scale,
    )


# ---------------------------------------------------------------------------
# Forward pass
# ---------------------------------------------------------------------------

def encode_input(x, cutoff: int) -> np.ndarray:
    """Vacuum state with each feature applied as a displacement of its mode.

    With hbar = 2 the encoded mode has position mean 2 * x_i.  Amplitudes
    beyond |x| <= 2 still run but truncation error becomes visible at the
    default cutoff, so they warn.
    """
    x = [float(v) for v in x]
    if not all(math.isfinite(v) for v in x):
        raise ParameterError(f"features must be finite, got {x}")
    worst = max((abs(v) for v in x), default=0.0)
    if worst > ENCODING_BOUND:
        warnings.warn(
            f"feature magnitude {worst:g} exceeds the faithful-encoding bound "
            f"{ENCODING_BOUND:g}; truncation error may be significant",
            EncodingRangeWarning,
            stacklevel=2,
        )
    state = fock.vacuum_state(len(x), cutoff)
    for mode, amplitude in enumerate(x):
        if amplitude != 0.0:
            gate = fock.build_gate(fock.Displacement(amplitude), cutoff)
            state = fock.apply_gate(state, gate, mode)
    return state


def layer_gates(params: CVLayerParams, variant: str):
    """The layer's gate sequence as (gate spec, target modes) pairs.

    This single list drives both application and gate counting, so the two
    cannot drift apart.
    """
    if variant not in VARIANTS:
        raise ParameterError(f"variant must be one of {VARIANTS}, got {variant!r}")
    modes = len(params.squeeze_r)
    _validate_layer(params, modes, variant)
    pairs = mesh_pairs(modes)
    gates = []
    for (theta, phi), target in zip(params.interferometer1_bs, pairs):
        gates.append((fock.Beamsplitter(theta, phi), target))
    for mode, phi in enumerate(params.interferometer1_rot):
        gates.append((fock.Rotation(phi), (mode,)))
    for mode, r in enumerate(params.squeeze_r):
        gates.append((fock.Squeeze(r), (mode,)))
    if variant == "standard":
        for (theta, phi), target in zip(params.interferometer2_bs, pairs):
            gates.append((fock.Beamsplitter(theta, phi), target))
        for mode, phi in enumerate(params.interferometer2_rot):
            gates.append((fock.Rotation(phi), (mode,)))
    for mode, alpha in enumerate(params.displacement_alpha):
        gates.append((fock.Displacement(complex(alpha)), (mode,)))
    for mode, kappa in enumerate(params.kerr_kappa):
        gates.append((fock.Kerr(kappa), (mode,)))
    return gates


def layer_apply(state, params: CVLayerParams, variant: str = "standard",
                num_modes: int | None = None) -> np.ndarray:
    """Apply one layer to an amplitude tensor (optionally batch-leading)."""
    state = np.asarray(state, dtype=complex)
    modes = state.ndim if num_modes is None else num_modes
    if len(params.squeeze_r) != modes:
        raise DimensionError(
            f"layer is over {len(params.squeeze_r)} modes but the state has {modes}"
        )
    cutoff = state.shape[-1]
    for spec, target in layer_gates(params, variant):
        state = fock.apply_gate(state, fock.build_gate(spec, cutoff), target, num_modes=modes)
    return state


def gate_count(net: CVNetwork) -> int:
    """Total gates one forward pass applies after encoding."""
    validate_network(net)
    return sum(len(layer_gates(params, net.variant)) for params in net.layers)


def _readout(state, net: CVNetwork, num_modes: int):
    for params in net.layers:
        state = layer_apply(state, params, net.variant, num_modes=num_modes)
    gain, offset = net.output_scale
    return gain * fock.expectation_x(state, 0, num_modes=num_modes) + offset


def forward(x, net: CVNetwork) -> float:
    """Encode one feature vector, run all layers, read out mode 0."""
    validate_network(net)
    if len(x) != net.modes:
        raise DimensionError(f"network expects {net.modes} features, got {len(x)}")
    return float(_readout(encode_input(x, net.cutoff), net, net.modes))


def forward_batch(X, net: CVNetwork) -> np.ndarray:
    """Forward passes for every row of X, sharing the gate work batch-wise."""
    validate_network(net)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] != net.modes:
        raise DimensionError(
            f"expected a nonempty (n, {net.modes}) feature matrix, got shape {X.shape}"
        )
    encoded = np.stack([encode_input(row, net.cutoff) for row in X])
    return np.asarray(_readout(encoded, net, net.modes), dtype=float)


def cost_mse(predicted, target) -> float:
    """Mean squared error between two equal-length sequences."""
    predicted = np.asarray(predicted, dtype=float)
    target = np.asarray(target, dtype=float)
    if predicted.ndim != 1 or predicted.shape != target.shape or predicted.size == 0:
        raise DimensionError(
            f"need equal-length nonempty 1-d sequences, got {predicted.shape} and {target.shape}"
        )
    return float(np.mean((predicted - target) ** 2))


# ---------------------------------------------------------------------------
# Gradients and training
# ---------------------------------------------------------------------------
# Flat parameters are consumed in exactly the order gates are applied, so a
# finite-difference pass can reuse the state up to the perturbed gate (its
# "prefix") and only re-run the circuit from there.  Every evaluation is
# float-identical to a full forward pass with one parameter shifted; it just
# skips recomputing an untouched prefix.

_PARAMS_PER_GATE = {
    fock.Beamsplitter: 2,
    fock.Rotation: 1,
    fock.Squeeze: 1,
    fock.Displacement: 2,
    fock.Kerr: 1,
}


def _spec_from_values(spec_type, values):
    if spec_type is fock.Beamsplitter:
        return fock.Beamsplitter(values[0], values[1])
    if spec_type is fock.Rotation:
        return fock.Rotation(values[0])
    if spec_type is fock.Squeeze:
        return fock.Squeeze(values[0])
    if spec_type is fock.Displacement:
        return fock.Displacement(complex(values[0], values[1]))
    return fock.Kerr(values[0])


def _circuit_slots(net: CVNetwork):
    """(vector slice, gate type, target modes) per gate, in application order.

    Derived by walking :func:`layer_gates`, so the mapping cannot diverge
    from what :func:`forward` applies.
    """
    slots = []
    cursor = 0
    for layer in net.layers:
        for spec, target in layer_gates(layer, net.variant):
            width = _PARAMS_PER_GATE[type(spec)]
            slots.append((slice(cursor, cursor + width), type(spec), target))
            cursor += width
    return slots


def _fd_gradient(net: CVNetwork, encoded, y, eps: float) -> np.ndarray:
    vector = parameter_vector(net)
    slots = _circuit_slots(net)
    cutoff = net.cutoff
    modes = net.modes
    gain, offset = net.output_scale

    prefixes = [encoded]
    for window, spec_type, target in slots:
        spec = _spec_from_values(spec_type, vector[window])
        gate = fock.build_gate(spec, cutoff)
        prefixes.append(fock.apply_gate(prefixes[-1], gate, target, num_modes=modes))

    def tail_cost(state, start):
        for window, spec_type, target in slots[start:]:
            spec = _spec_from_values(spec_type, vector[window])
            state = fock.apply_gate(state, fock.build_gate(spec, cutoff), target, num_modes=modes)
        outputs = gain * fock.expectation_x(state, 0, num_modes=modes) + offset
        return float(np.mean((np.asarray(outputs, dtype=float) - y) ** 2))

    grad = np.empty(vector.size)
    for position, (window, spec_type, target) in enumerate(slots):
        values = vector[window].copy()
        for local in range(values.size):
            sides = []
            for sign in (eps, -eps):
                shifted = values.copy()
                shifted[local] += sign
                gate = fock.build_gate(_spec_from_values(spec_type, shifted), cutoff)
                state = fock.apply_gate(prefixes[position], gate, target, num_modes=modes)
                sides.append(tail_cost(state, position + 1))
            grad[window.start + local] = (sides[0] - sides[1]) / (2.0 * eps)
    return grad


def _batch(net, batch):
    X, y = batch
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise DimensionError(
            f"expected nonempty X (n, d) with matching y (n,), got {X.shape} and {y.shape}"
        )
    if X.shape[1] != net.modes:
        raise DimensionError(f"network expects {net.modes} features, got {X.shape[1]}")
    return X, y


def grad_fd(net: CVNetwork, batch, eps: float = DEFAULT_FD_EPSILON) -> np.ndarray:
    """Central-finite-difference gradient of the batch MSE.

    One entry per real parameter, in :func:`parameter_vector` order; a network
    with no layers has no parameters and yields an empty vector.
    """
    validate_network(net)
    if not (math.isfinite(eps) and eps > 0):
        raise ParameterError(f"finite-difference step must be positive and finite, got {eps}")
    X, y = _batch(net, batch)
    encoded = np.stack([encode_input(row, net.cutoff) for row in X])
    return _fd_gradient(net, encoded, y, eps)


def _validate_config(cfg: TrainConfig) -> None:
    if not (math.isfinite(cfg.learning_rate) and cfg.learning_rate > 0):
        raise ParameterError(
            f"learning rate must be positive and finite, got {cfg.learning_rate}"
        )
    if int(cfg.iterations) != cfg.iterations or cfg.iterations < 1:
        raise ParameterError(f"iterations must be a positive integer, got {cfg.iterations}")
    if not (math.isfinite(cfg.fd_epsilon) and cfg.fd_epsilon > 0):
        raise ParameterError(
            f"finite-difference step must be positive and finite, got {cfg.fd_epsilon}"
        )
    if not (math.isfinite(cfg.init_spread) and cfg.init_spread >= 0):
        raise ParameterError(f"init_spread must be finite and >= 0, got {cfg.init_spread}")
    _checked_seed(cfg.seed)


def _checked_seed(seed) -> int:
    if int(seed) != seed or seed < 0:
        raise ParameterError(f"seed must be a non-negative integer, got {seed}")
    return int(seed)


def train_sgd(net: CVNetwork, data, cfg: TrainConfig = TrainConfig()):
    """Full-batch gradient descent from a fresh seeded initialization.

    ``net`` supplies the structure (modes, cutoff, layer count, variant,
    scale); its parameter values are replaced by a uniform(+-init_spread)
    draw from ``cfg.seed`` before the first iteration.  Each iteration
    records the current batch MSE and then takes one step against the
    finite-difference gradient, so the trace has ``cfg.iterations`` entries
    and the same seed reproduces it bit for bit.  The encoded input batch is
    computed once and shared by every cost evaluation.

    Returns
    -------
    (trained CVNetwork, cost trace list)

    Raises
    ------
    DivergenceError
        If the cost turns non-finite, naming the iteration.
    """
    validate_network(net)
    _validate_config(cfg)
    X, y = _batch(net, data)
    if not np.all((X >= 0.0) & (X <= 1.0)):
        raise FeatureRangeError("training features must lie in [0, 1]")

    rng = np.random.default_rng(int(cfg.seed))
    vector = rng.uniform(-cfg.init_spread, cfg.init_spread, network_parameter_count(net))
    encoded = np.stack([encode_input(row, net.cutoff) for row in X])

    current = with_parameters(net, vector)
    trace = []
    for iteration in range(int(cfg.iterations)):
        cost = cost_mse(_readout(encoded, current, net.modes), y)
        if not math.isfinite(cost):
            raise DivergenceError(
                f"training cost became non-finite at iteration {iteration}", iteration
            )
        trace.append(cost)
        vector = vector - cfg.learning_rate * _fd_gradient(current, encoded, y, cfg.fd_epsilon)
        current = with_parameters(net, vector)
    return current, trace


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def net_to_dict(net: CVNetwork) -> dict:
    """JSON-ready description of the network (exact float round trip)."""
    validate_network(net)
    gain, offset = net.output_scale
    return {
        "kind": "cv-regression-network",
        "version": 1,
        "variant": net.variant,
        "modes": net.modes,
        "cutoff": net.cutoff,
        "output_scale": [gain, offset],
        "layers": [
            {
                "interferometer1_bs": [[t, p] for t, p in layer.interferometer1_bs],
                "interferometer1_rot": list(layer.interferometer1_rot),
                "squeeze_r": list(layer.squeeze_r),
                "interferometer2_bs": [[t, p] for t, p in layer.interferometer2_bs],
                "interferometer2_rot": list(layer.interferometer2_rot),
                "displacement_alpha": [
                    [complex(a).real, complex(a).imag] for a in layer.displacement_alpha
                ],
                "kerr_kappa": list(layer.kerr_kappa),
            }
            for layer in net.layers
        ],
    }


def net_from_dict(payload: dict) -> CVNetwork:
    if payload.get("kind") != "cv-regression-network" or payload.get("version") != 1:
        raise ParameterError("payload does not describe a version-1 cv regression network")
    try:
        layers = [
            CVLayerParams(
                interferometer1_bs=[(float(t), float(p)) for t, p in raw["interferometer1_bs"]],
                interferometer1_rot=[float(v) for v in raw["interferometer1_rot"]],
                squeeze_r=[float(v) for v in raw["squeeze_r"]],
                interferometer2_bs=[(float(t), float(p)) for t, p in raw["interferometer2_bs"]],
                interferometer2_rot=[float(v) for v in raw["interferometer2_rot"]],
                displacement_alpha=[complex(re, im) for re, im in raw["displacement_alpha"]],
                kerr_kappa=[float(v) for v in raw["kerr_kappa"]],
            )
            for raw in payload["layers"]
        ]
        net = CVNetwork(
            modes=int(payload["modes"]),
            cutoff=int(payload["cutoff"]),
            layers=layers,
            variant=payload["variant"],
            output_scale=(float(payload["output_scale"][0]), float(payload["output_scale"][1])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed network payload: {exc}") from exc
    validate_network(net)
    return net


# ---------------------------------------------------------------------------
# Estimator front end
# ---------------------------------------------------------------------------

class CVQNNRegressor(RegressorMixin, BaseEstimator):
    """Photonic-network regressor with one qumode per feature.

    Expects fuzzified features in [0, 1]; targets should live in the readout
    range (the fixed scale maps homodyne means in [-2, 2] onto [0, 1]).
    Training cost grows with ``cutoff ** n_features``, and every iteration
    runs two forward batches per parameter, so this is much heavier than its
    phase-rotation sibling — the defaults (cutoff 10, one layer, 200
    iterations) are chosen to stay tractable.

    Parameters
    ----------
    cutoff : int
        Fock truncation dimension per mode.
    n_layers : int
    variant : str
        "standard" or "modified" (drops each layer's second interferometer).
    learning_rate : float
    iterations : int
    fd_epsilon : float
        Central finite-difference step for gradients.
    seed : int
    init_spread : float
        Half-width of the uniform parameter initialization.

    Attributes
    ----------
    network_ : trained CVNetwork
    cost_trace_ : list of float, batch MSE per iteration
    n_features_in_ : int
    """

    def __init__(self, cutoff: int = 10, n_layers: int = 1, variant: str = "standard",
                 learning_rate: float = 0.1, iterations: int = 200,
                 fd_epsilon: float = DEFAULT_FD_EPSILON, seed: int = 0,
                 init_spread: float = DEFAULT_INIT_SPREAD):
        self.cutoff = cutoff
        self.n_layers = n_layers
        self.variant = variant
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.fd_epsilon = fd_epsilon
        self.seed = seed
        self.init_spread = init_spread

    def fit(self, X, y):
        X = check_array(X, dtype=float)
        y = check_array(y, dtype=float, ensure_2d=False)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DimensionError(f"y of shape {y.shape} does not match X of shape {X.shape}")
        template = build_network(
            modes=X.shape[1],
            cutoff=self.cutoff,
            n_layers=self.n_layers,
            variant=self.variant,
            seed=self.seed,
            init_spread=self.init_spread,
        )
        cfg = TrainConfig(
            learning_rate=self.learning_rate,
            iterations=self.iterations,
            fd_epsilon=self.fd_epsilon,
            seed=self.seed,
            init_spread=self.init_spread,
        )
        self.network_, self.cost_trace_ = train_sgd(template, (X, y), cfg)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "network_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise DimensionError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return forward_batch(X, self.network_)
