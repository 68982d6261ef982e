"""Truncated-Fock-basis simulation of multi-mode continuous-variable states.

A state over ``W`` qumodes with cutoff dimension ``C`` is a complex ndarray of
shape ``(C,) * W``: axis ``k`` is the Fock (photon-number) index of mode ``k``,
so mode 0 is the slowest-varying index under C-order flattening.  All gates are
built by exponentiating the generator *after* truncating it to the cutoff,
which makes every gate matrix exactly unitary — truncation shows up as
approximation error against the untruncated operator, never as norm leakage.

Quadrature convention: ``hbar = 2``, so the position operator is
``x = a + a.conj().T`` and a coherent state ``D(alpha)|0>`` has position mean
``2 * Re(alpha)``.

Functions accept an optional leading batch dimension: pass ``num_modes`` to
mark how many *trailing* axes are mode axes, and anything in front is carried
along elementwise.
"""

from dataclasses import dataclass
from functools import lru_cache

import csv
import math
import numbers

import numpy as np
from scipy.linalg import expm

from .exceptions import DegenerateStateError, DimensionError, ParameterError

#: Value of hbar fixing the quadrature scale (x = sqrt(hbar/2) * (a + a†)).
HBAR = 2.0


# ---------------------------------------------------------------------------
# Gate specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Displacement:
    """Phase-space displacement by the complex amplitude ``alpha``."""

    alpha: complex


@dataclass(frozen=True)
class Squeeze:
    """Single-mode squeezing with magnitude ``r`` and angle ``phi``."""

    r: float
    phi: float = 0.0


@dataclass(frozen=True)
class Rotation:
    """Phase-space rotation by angle ``phi`` (phase ``e^{i n phi}`` on level n)."""

    phi: float


@dataclass(frozen=True)
class Kerr:
    """Self-Kerr interaction: phase ``e^{i kappa n^2}`` on level n."""

    kappa: float


@dataclass(frozen=True)
class Beamsplitter:
    """Two-mode beamsplitter with mixing angle ``theta`` and phase ``phi``."""

    theta: float
    phi: float = 0.0


GateSpec = Displacement | Squeeze | Rotation | Kerr | Beamsplitter

_SINGLE_MODE = (Displacement, Squeeze, Rotation, Kerr)


def gate_arity(spec: GateSpec) -> int:
    """Number of modes the gate acts on (1, or 2 for the beamsplitter)."""
    return 2 if isinstance(spec, Beamsplitter) else 1


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def annihilation(cutoff: int) -> np.ndarray:
    """The C x C annihilation matrix: sqrt(n) on the superdiagonal."""
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(complex)


def vacuum_state(modes: int, cutoff: int) -> np.ndarray:
    """All-modes-in-their-ground-state amplitude tensor.

    Parameters
    ----------
    modes : int
        Number of qumodes, at least 1.
    cutoff : int
        Fock-space truncation dimension per mode, at least 2.

    Returns
    -------
    ndarray of complex, shape ``(cutoff,) * modes``
        Amplitude 1 at index (0, ..., 0), zero elsewhere.
    """
    if not isinstance(modes, numbers.Integral) or modes < 1:
        raise DimensionError(f"modes must be a positive integer, got {modes!r}")
    if not isinstance(cutoff, numbers.Integral) or cutoff < 2:
        raise DimensionError(f"cutoff must be an integer >= 2, got {cutoff!r}")
    state = np.zeros((int(cutoff),) * int(modes), dtype=complex)
    state[(0,) * int(modes)] = 1.0
    return state


def _check_finite(spec: GateSpec) -> None:
    for name, value in vars(spec).items():
        if not math.isfinite(abs(complex(value))):
            raise ParameterError(f"{type(spec).__name__}.{name} must be finite, got {value!r}")


@lru_cache(maxsize=512)
def _build_gate_cached(spec: GateSpec, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff, dtype=float)
    if isinstance(spec, Rotation):
        gate = np.diag(np.exp(1j * spec.phi * n))
    elif isinstance(spec, Kerr):
        gate = np.diag(np.exp(1j * spec.kappa * n**2))
    elif isinstance(spec, Displacement):
        a = annihilation(cutoff)
        alpha = complex(spec.alpha)
        gate = expm(alpha * a.conj().T - np.conj(alpha) * a)
    elif isinstance(spec, Squeeze):
        a = annihilation(cutoff)
        z = spec.r * np.exp(1j * spec.phi)
        gate = expm((np.conj(z) * (a @ a) - z * (a.conj().T @ a.conj().T)) / 2.0)
    elif isinstance(spec, Beamsplitter):
        a = annihilation(cutoff)
        adag = a.conj().T
        # First of the two target modes is the kron-major index.
        coupling = np.exp(1j * spec.phi) * np.kron(a, adag)
        gate = expm(spec.theta * (coupling - coupling.conj().T))
    else:
        raise ParameterError(f"unknown gate spec {spec!r}")
    gate.flags.writeable = False
    return gate


def build_gate(spec: GateSpec, cutoff: int) -> np.ndarray:
    """Unitary matrix for ``spec`` truncated at ``cutoff``.

    Single-mode gates come back as C x C, the beamsplitter as C² x C² with
    the first target mode as the major (slow) index.  Results are cached and
    returned read-only; copy before mutating.
    """
    if not isinstance(cutoff, numbers.Integral) or cutoff < 2:
        raise DimensionError(f"cutoff must be an integer >= 2, got {cutoff!r}")
    if not isinstance(spec, (*_SINGLE_MODE, Beamsplitter)):
        raise ParameterError(f"unknown gate spec {spec!r}")
    _check_finite(spec)
    return _build_gate_cached(spec, int(cutoff))


# ---------------------------------------------------------------------------
# Application and measurement
# ---------------------------------------------------------------------------

def _mode_axes(state: np.ndarray, num_modes: int | None) -> tuple[int, int]:
    """Resolve (num_modes, first mode axis) for a possibly batched state."""
    if num_modes is None:
        num_modes = state.ndim
    if not 1 <= num_modes <= state.ndim:
        raise DimensionError(
            f"num_modes={num_modes} incompatible with state of ndim {state.ndim}"
        )
    return num_modes, state.ndim - num_modes


def apply_gate(state, gate, modes, num_modes=None) -> np.ndarray:
    """Contract ``gate`` into ``state`` along the given mode axes.

    Parameters
    ----------
    state : ndarray
        Amplitude tensor ``(C,) * W``, optionally with leading batch axes
        (pass ``num_modes=W`` in that case).
    gate : ndarray
        C x C or C² x C² unitary from :func:`build_gate`.
    modes : int or sequence of int
        Target mode index (single-mode gate) or pair of distinct indices
        (two-mode gate; the first is the gate's major index).
    num_modes : int, optional
        How many trailing axes of ``state`` are mode axes.  Defaults to all.

    Returns
    -------
    ndarray
        New amplitude tensor; the input is not modified.
    """
    state = np.asarray(state, dtype=complex)
    gate = np.asarray(gate)
    num_modes, offset = _mode_axes(state, num_modes)
    cutoff = state.shape[-1]
    if state.shape[offset:] != (cutoff,) * num_modes:
        raise DimensionError(f"mode axes of shape {state.shape[offset:]} are not uniform")

    if isinstance(modes, numbers.Integral):
        modes = (int(modes),)
    else:
        modes = tuple(int(m) for m in modes)
    if len(set(modes)) != len(modes):
        raise DimensionError(f"mode indices must be distinct, got {modes}")
    for m in modes:
        if not 0 <= m < num_modes:
            raise DimensionError(f"mode index {m} out of range for {num_modes} modes")

    if gate.ndim != 2 or gate.shape[0] != gate.shape[1]:
        raise DimensionError(f"gate must be a square matrix, got shape {gate.shape}")
    if gate.shape[0] == cutoff:
        arity = 1
    elif gate.shape[0] == cutoff**2:
        arity = 2
    else:
        raise DimensionError(
            f"gate dimension {gate.shape[0]} matches neither {cutoff} nor {cutoff**2}"
        )
    if len(modes) != arity:
        raise DimensionError(f"gate acts on {arity} mode(s) but {len(modes)} were given")

    if arity == 1:
        axis = offset + modes[0]
        out = np.tensordot(gate, state, axes=([1], [axis]))
        return np.moveaxis(out, 0, axis)

    axes = [offset + m for m in modes]
    g4 = gate.reshape(cutoff, cutoff, cutoff, cutoff)
    out = np.tensordot(g4, state, axes=([2, 3], axes))
    return np.moveaxis(out, [0, 1], axes)


def expectation_x(state, mode, num_modes=None):
    """Position-quadrature mean of one mode, normalized by the state's norm.

    Uses ``x = sqrt(hbar/2) (a + a†)`` with ``hbar = 2``.  With a leading
    batch axis (``num_modes`` given) an array of means is returned.
    """
    state = np.asarray(state, dtype=complex)
    num_modes, offset = _mode_axes(state, num_modes)
    cutoff = state.shape[-1]
    a = annihilation(cutoff)
    x_op = math.sqrt(HBAR / 2.0) * (a + a.conj().T)
    transformed = apply_gate(state, x_op, mode, num_modes=num_modes)

    sum_axes = tuple(range(offset, state.ndim))
    weight = np.sum(np.abs(state) ** 2, axis=sum_axes)
    if np.any(weight == 0.0):
        raise DegenerateStateError("state has zero norm; expectation undefined")
    value = np.sum(np.conj(state) * transformed, axis=sum_axes).real / weight
    return float(value) if np.ndim(value) == 0 else value


def norm(state) -> float:
    """Euclidean norm of the amplitude tensor."""
    return float(np.linalg.norm(np.asarray(state).ravel()))


def dump_amplitudes(state, path) -> None:
    """Write a CSV test-vector dump: one row per Fock index, re/im columns."""
    state = np.asarray(state, dtype=complex)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"n{k}" for k in range(state.ndim)] + ["re", "im"])
        for index in np.ndindex(*state.shape):
            amp = state[index]
            writer.writerow([*index, repr(float(amp.real)), repr(float(amp.imag))])
