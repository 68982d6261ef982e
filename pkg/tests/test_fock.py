"""Tests for the truncated-Fock simulator.

Oracle policy: every non-trivial expected value is computed here from an
independent closed form (coherent-state expansion, Poisson photon statistics,
squeezed-vacuum expansion, kron-built full-space matrices) — never by calling
the code under test a second way.
"""

import csv
import math

import numpy as np
import pytest

from qregress.exceptions import DegenerateStateError, DimensionError, ParameterError
from qregress.fock import (
    Beamsplitter,
    Displacement,
    Kerr,
    Rotation,
    Squeeze,
    annihilation,
    apply_gate,
    build_gate,
    dump_amplitudes,
    expectation_x,
    gate_arity,
    norm,
    vacuum_state,
)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def coherent_amplitude(alpha, n):
    """<n|D(alpha)|0> from the textbook expansion."""
    return math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n))


def poisson_pmf(mean, n):
    return math.exp(-mean) * mean**n / math.factorial(n)


def squeezed_vacuum_amplitude(r, phi, n):
    """<n|S(r e^{i phi})|0>; zero for odd n."""
    if n % 2:
        return 0.0
    k = n // 2
    coeff = math.sqrt(math.factorial(n)) / (2**k * math.factorial(k))
    return coeff * (-np.exp(1j * phi) * math.tanh(r)) ** k / math.sqrt(math.cosh(r))


def lowering_matrix(cutoff):
    """Annihilation operator built from scratch for cross-checks."""
    mat = np.zeros((cutoff, cutoff), dtype=complex)
    for n in range(1, cutoff):
        mat[n - 1, n] = math.sqrt(n)
    return mat


def embed_single_mode(gate, mode, num_modes, cutoff):
    """Full C^W x C^W matrix acting as `gate` on one mode, identity elsewhere."""
    out = np.array([[1.0 + 0j]])
    for k in range(num_modes):
        out = np.kron(out, gate if k == mode else np.eye(cutoff))
    return out


def test_lowering_matrix_matches_library_helper():
    np.testing.assert_allclose(annihilation(7), lowering_matrix(7), atol=0)


# ---------------------------------------------------------------------------
# Vacuum construction
# ---------------------------------------------------------------------------

class TestVacuumState:
    def test_single_mode_four_levels(self):
        np.testing.assert_array_equal(vacuum_state(1, 4), [1, 0, 0, 0])

    def test_three_modes_cutoff_ten_has_exactly_1000_amplitudes(self):
        state = vacuum_state(3, 10)
        assert state.shape == (10, 10, 10)
        assert state.size == 1000
        assert state[0, 0, 0] == 1.0
        assert np.count_nonzero(state) == 1

    def test_two_modes_cutoff_two(self):
        np.testing.assert_array_equal(vacuum_state(2, 2).ravel(), [1, 0, 0, 0])

    def test_dtype_is_complex(self):
        assert vacuum_state(2, 3).dtype == complex

    @pytest.mark.parametrize("modes,cutoff", [(0, 4), (-1, 4), (2, 1), (2, 0), (1.5, 4), (2, 2.5)])
    def test_rejects_bad_dimensions(self, modes, cutoff):
        with pytest.raises(DimensionError):
            vacuum_state(modes, cutoff)


# ---------------------------------------------------------------------------
# Gate construction
# ---------------------------------------------------------------------------

ONE_PARAM_GRID = [
    Displacement(0.0),
    Displacement(0.5),
    Displacement(0.3 - 0.4j),
    Displacement(1.5 + 0.5j),
    Squeeze(0.0),
    Squeeze(0.3),
    Squeeze(1.2, 2.0),
    Squeeze(2.0, -0.7),
    Rotation(0.0),
    Rotation(0.9),
    Rotation(-2.0),
    Kerr(0.0),
    Kerr(0.37),
    Kerr(-1.8),
    Beamsplitter(0.0, 0.0),
    Beamsplitter(0.8, 0.0),
    Beamsplitter(1.9, 1.1),
    Beamsplitter(-0.6, -2.0),
]


class TestBuildGate:
    def test_zero_displacement_is_identity(self):
        np.testing.assert_array_equal(build_gate(Displacement(0.0), 8), np.eye(8))

    def test_kerr_is_the_expected_diagonal(self):
        kappa = 0.73
        expected = np.diag([np.exp(1j * kappa * n**2) for n in range(4)])
        np.testing.assert_allclose(build_gate(Kerr(kappa), 4), expected, atol=1e-15)

    def test_rotation_is_the_expected_diagonal(self):
        phi = -1.1
        expected = np.diag([np.exp(1j * phi * n) for n in range(6)])
        np.testing.assert_allclose(build_gate(Rotation(phi), 6), expected, atol=1e-15)

    def test_zero_beamsplitter_is_identity(self):
        np.testing.assert_array_equal(build_gate(Beamsplitter(0.0, 0.0), 4), np.eye(16))

    def test_displacement_first_column_matches_coherent_expansion(self):
        gate = build_gate(Displacement(0.5), 12)
        expected = [coherent_amplitude(0.5, n) for n in range(12)]
        np.testing.assert_allclose(gate[:, 0], expected, atol=1e-8)

    def test_complex_displacement_first_column_matches_coherent_expansion(self):
        alpha = 0.2 + 0.35j
        gate = build_gate(Displacement(alpha), 14)
        expected = [coherent_amplitude(alpha, n) for n in range(8)]
        np.testing.assert_allclose(gate[:8, 0], expected, atol=1e-8)

    def test_beamsplitter_major_index_is_first_mode(self):
        # On the one-photon subspace the generator acts as
        # theta * [[0, -e^{-i phi}], [e^{i phi}, 0]] over {|1,0>, |0,1>}, so
        # |1,0> maps to cos(theta)|1,0> + e^{i phi} sin(theta)|0,1>; with
        # first-mode-major flattening |1,0> is row C, |0,1> is row 1.
        cutoff = 3
        theta, phi = 0.4, 0.6
        gate = build_gate(Beamsplitter(theta, phi), cutoff)
        column = gate[:, cutoff]  # input |1,0>
        assert abs(column[cutoff] - math.cos(theta)) < 1e-12
        assert abs(column[1] - np.exp(1j * phi) * math.sin(theta)) < 1e-12

    @pytest.mark.parametrize("spec", ONE_PARAM_GRID)
    @pytest.mark.parametrize("cutoff", [4, 8, 10, 16])
    def test_unitary_within_1e_10(self, spec, cutoff):
        gate = build_gate(spec, cutoff)
        identity = np.eye(gate.shape[0])
        assert np.max(np.abs(gate.conj().T @ gate - identity)) < 1e-10

    @pytest.mark.parametrize(
        "spec",
        [
            Displacement(complex("inf")),
            Displacement(complex("nan")),
            Squeeze(math.nan),
            Squeeze(0.3, math.inf),
            Rotation(math.nan),
            Kerr(-math.inf),
            Beamsplitter(math.nan, 0.0),
        ],
    )
    def test_rejects_non_finite_parameters(self, spec):
        with pytest.raises(ParameterError):
            build_gate(spec, 6)

    def test_rejects_cutoff_below_two(self):
        with pytest.raises(DimensionError):
            build_gate(Rotation(0.1), 1)

    def test_rejects_non_gate_spec(self):
        with pytest.raises(ParameterError):
            build_gate("displacement", 6)

    def test_cached_matrix_is_read_only(self):
        gate = build_gate(Rotation(0.25), 5)
        with pytest.raises(ValueError):
            gate[0, 0] = 0.0

    def test_gate_arity(self):
        assert gate_arity(Displacement(0.1)) == 1
        assert gate_arity(Beamsplitter(0.1)) == 2


# ---------------------------------------------------------------------------
# Gate application
# ---------------------------------------------------------------------------

def random_state(rng, modes, cutoff):
    raw = rng.standard_normal((cutoff,) * modes) + 1j * rng.standard_normal((cutoff,) * modes)
    return raw / np.linalg.norm(raw)


class TestApplyGate:
    def test_rotation_leaves_vacuum_unchanged(self):
        state = vacuum_state(1, 6)
        out = apply_gate(state, build_gate(Rotation(1.3), 6), 0)
        np.testing.assert_allclose(out, state, atol=1e-14)

    def test_displaced_vacuum_photon_distribution_is_poisson(self):
        alpha = 0.5
        state = apply_gate(vacuum_state(1, 12), build_gate(Displacement(alpha), 12), 0)
        probs = np.abs(state) ** 2
        expected = [poisson_pmf(alpha**2, n) for n in range(12)]
        np.testing.assert_allclose(probs, expected, atol=1e-6)

    def test_squeezed_vacuum_matches_closed_form(self):
        # Generous cutoff so truncation error at the compared levels is
        # far below the tolerance (amplitudes decay like tanh(r)^(n/2)).
        r, phi = 0.3, 0.9
        state = apply_gate(vacuum_state(1, 40), build_gate(Squeeze(r, phi), 40), 0)
        expected = [squeezed_vacuum_amplitude(r, phi, n) for n in range(12)]
        np.testing.assert_allclose(state[:12], expected, atol=1e-9)

    def test_squeezed_vacuum_odd_amplitudes_vanish(self):
        state = apply_gate(vacuum_state(1, 10), build_gate(Squeeze(0.3), 10), 0)
        assert np.max(np.abs(state[1::2])) < 1e-12

    @pytest.mark.parametrize("modes_pair", [(0, 1), (1, 2), (2, 0)])
    def test_two_mode_contraction_matches_kron_built_matrix(self, modes_pair):
        """The tensor contraction must agree with explicit full-space matmul."""
        cutoff, num_modes = 3, 3
        rng = np.random.default_rng(42)
        state = random_state(rng, num_modes, cutoff)
        gate = build_gate(Beamsplitter(0.7, 0.2), cutoff)

        out = apply_gate(state, gate, modes_pair, num_modes=num_modes)

        # Oracle: permute target modes to the front, kron with identity, matmul.
        order = list(modes_pair) + [m for m in range(num_modes) if m not in modes_pair]
        permuted = np.transpose(state, order)
        full = np.kron(gate, np.eye(cutoff ** (num_modes - 2)))
        expected_perm = (full @ permuted.ravel()).reshape((cutoff,) * num_modes)
        expected = np.transpose(expected_perm, np.argsort(order))
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_single_mode_contraction_matches_kron_built_matrix(self):
        cutoff, num_modes = 4, 3
        rng = np.random.default_rng(7)
        state = random_state(rng, num_modes, cutoff)
        gate = build_gate(Squeeze(0.4, 1.0), cutoff)
        out = apply_gate(state, gate, 1, num_modes=num_modes)
        full = embed_single_mode(np.asarray(gate), 1, num_modes, cutoff)
        expected = (full @ state.ravel()).reshape(state.shape)
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_norm_preserved_through_twenty_random_gates(self):
        rng = np.random.default_rng(2024)
        cutoff, num_modes = 6, 2
        state = random_state(rng, num_modes, cutoff)
        for _ in range(20):
            kind = rng.integers(0, 5)
            mode = int(rng.integers(0, num_modes))
            if kind == 0:
                spec, modes = Displacement(complex(*rng.uniform(-0.5, 0.5, 2))), mode
            elif kind == 1:
                spec, modes = Squeeze(rng.uniform(0, 1.0), rng.uniform(-np.pi, np.pi)), mode
            elif kind == 2:
                spec, modes = Rotation(rng.uniform(-np.pi, np.pi)), mode
            elif kind == 3:
                spec, modes = Kerr(rng.uniform(-1, 1)), mode
            else:
                spec, modes = Beamsplitter(rng.uniform(0, 2), rng.uniform(-np.pi, np.pi)), (0, 1)
            state = apply_gate(state, build_gate(spec, cutoff), modes)
        assert abs(norm(state) - 1.0) < 1e-9

    def test_single_mode_gate_is_local(self):
        """Marginal photon distributions of untouched modes must not move."""
        rng = np.random.default_rng(11)
        state = random_state(rng, 3, 5)
        out = apply_gate(state, build_gate(Displacement(0.4 - 0.2j), 5), 1)
        for other in (0, 2):
            axes = tuple(ax for ax in range(3) if ax != other)
            before = np.sum(np.abs(state) ** 2, axis=axes)
            after = np.sum(np.abs(out) ** 2, axis=axes)
            np.testing.assert_allclose(after, before, atol=1e-10)

    def test_batched_application_matches_per_sample(self):
        rng = np.random.default_rng(5)
        batch = np.stack([random_state(rng, 2, 4) for _ in range(3)])
        gate = build_gate(Beamsplitter(0.9, -0.3), 4)
        out = apply_gate(batch, gate, (0, 1), num_modes=2)
        for i in range(3):
            np.testing.assert_allclose(out[i], apply_gate(batch[i], gate, (0, 1)), atol=1e-13)

    def test_input_state_is_not_mutated(self):
        state = vacuum_state(1, 6)
        snapshot = state.copy()
        apply_gate(state, build_gate(Displacement(0.3), 6), 0)
        np.testing.assert_array_equal(state, snapshot)

    @pytest.mark.parametrize(
        "modes",
        [(0, 0), (0, 5), 3, (1,)],
    )
    def test_rejects_bad_mode_targets(self, modes):
        state = vacuum_state(3, 4)
        gate = build_gate(Beamsplitter(0.5), 4)
        with pytest.raises(DimensionError):
            apply_gate(state, gate, modes)

    def test_rejects_gate_of_wrong_dimension(self):
        state = vacuum_state(2, 4)
        with pytest.raises(DimensionError):
            apply_gate(state, np.eye(5), 0)

    def test_rejects_arity_mismatch(self):
        state = vacuum_state(2, 4)
        with pytest.raises(DimensionError):
            apply_gate(state, build_gate(Rotation(0.3), 4), (0, 1))


# ---------------------------------------------------------------------------
# Composition and convergence
# ---------------------------------------------------------------------------

class TestComposition:
    def test_rotations_add(self):
        a, b = 0.7, -1.9
        left = build_gate(Rotation(a), 8) @ build_gate(Rotation(b), 8)
        np.testing.assert_allclose(left, build_gate(Rotation(a + b), 8), atol=1e-14)

    @pytest.mark.parametrize("alpha", [0.5, -0.25, 0.3 + 0.4j])
    def test_displacement_inverts(self, alpha):
        product = build_gate(Displacement(alpha), 10) @ build_gate(Displacement(-alpha), 10)
        assert np.max(np.abs(product - np.eye(10))) < 1e-9


class TestCutoffConvergence:
    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.35 - 0.35j])
    def test_low_fock_amplitudes_stable_under_cutoff_increase(self, alpha):
        low = apply_gate(vacuum_state(1, 10), build_gate(Displacement(alpha), 10), 0)
        high = apply_gate(vacuum_state(1, 20), build_gate(Displacement(alpha), 20), 0)
        np.testing.assert_allclose(low[:5], high[:5], atol=1e-6)


# ---------------------------------------------------------------------------
# Measurement and bookkeeping
# ---------------------------------------------------------------------------

class TestExpectationX:
    def test_vacuum_mean_is_zero(self):
        assert expectation_x(vacuum_state(2, 6), 1) == pytest.approx(0.0, abs=1e-12)

    def test_real_displacement_doubles(self):
        state = apply_gate(vacuum_state(1, 12), build_gate(Displacement(0.3), 12), 0)
        assert expectation_x(state, 0) == pytest.approx(0.6, abs=1e-6)

    def test_imaginary_displacement_has_zero_position_mean(self):
        state = apply_gate(vacuum_state(1, 12), build_gate(Displacement(0.3j), 12), 0)
        assert expectation_x(state, 0) == pytest.approx(0.0, abs=1e-6)

    def test_normalizes_by_state_weight(self):
        state = apply_gate(vacuum_state(1, 12), build_gate(Displacement(0.2), 12), 0)
        assert expectation_x(0.5 * state, 0) == pytest.approx(0.4, abs=1e-6)

    def test_only_requested_mode_contributes(self):
        cutoff = 10
        state = vacuum_state(2, cutoff)
        state = apply_gate(state, build_gate(Displacement(0.25), cutoff), 0)
        state = apply_gate(state, build_gate(Displacement(-0.4), cutoff), 1)
        assert expectation_x(state, 0) == pytest.approx(0.5, abs=1e-6)
        assert expectation_x(state, 1) == pytest.approx(-0.8, abs=1e-6)

    def test_zero_state_raises(self):
        with pytest.raises(DegenerateStateError):
            expectation_x(np.zeros((4, 4), dtype=complex), 0)

    def test_batched_means_match_scalars(self):
        cutoff = 8
        gates = [build_gate(Displacement(a), cutoff) for a in (0.1, -0.3, 0.2j)]
        singles = [apply_gate(vacuum_state(1, cutoff), g, 0) for g in gates]
        batch = np.stack(singles)
        batched = expectation_x(batch, 0, num_modes=1)
        assert batched.shape == (3,)
        for got, state in zip(batched, singles):
            assert got == pytest.approx(expectation_x(state, 0), abs=1e-12)


class TestNormAndDump:
    def test_vacuum_norm_is_one(self):
        assert norm(vacuum_state(3, 4)) == 1.0

    def test_zeroed_tensor_norm_is_zero(self):
        assert norm(np.zeros((3, 3))) == 0.0

    def test_dump_round_trips(self, tmp_path):
        state = apply_gate(vacuum_state(2, 3), build_gate(Displacement(0.3 + 0.1j), 3), 1)
        path = tmp_path / "amps.csv"
        dump_amplitudes(state, path)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 9
        reconstructed = np.zeros((3, 3), dtype=complex)
        for row in rows:
            reconstructed[int(row["n0"]), int(row["n1"])] = float(row["re"]) + 1j * float(row["im"])
        np.testing.assert_array_equal(reconstructed, state)
