"""Tests for linear-optical transforms and the expansion engine."""

import math

import numpy as np
import pytest

from src.core.fock import FockState, ModeRegistry
from src.core.linops import (
    ExpansionEngine,
    ModeTransform,
    TransformError,
    apply,
    apply_parallel_polarization,
    beam_splitter,
    compose,
    haar_unitary,
    symmetric_multiport,
    unitarity_residual,
)
from src.interfaces import AmplitudeEngineABC


@pytest.fixture
def one_beam_pair() -> ModeRegistry:
    """Two modes: 1H, 1V."""
    return ModeRegistry.from_beams(["1"])


class TestModeTransform:
    """Test transform validation."""

    def test_non_unitary_rejected(self):
        """Test a non-unitary matrix is refused."""
        with pytest.raises(TransformError):
            ModeTransform(np.array([[1.0, 1.0], [0.0, 1.0]]))

    @pytest.mark.parametrize("theta", [math.nan, math.inf])
    def test_non_finite_angle_rejected(self, theta):
        """Test a NaN or infinite angle does not pass as unitary."""
        with pytest.raises(TransformError):
            beam_splitter(theta)

    def test_nan_matrix_rejected(self):
        """Test NaN entries are refused."""
        with pytest.raises(TransformError):
            ModeTransform(np.full((2, 2), np.nan))

    def test_non_square_rejected(self):
        """Test a non-square matrix is refused."""
        with pytest.raises(TransformError):
            ModeTransform(np.ones((2, 3)))

    def test_repeated_modes_rejected(self):
        """Test acted modes must be distinct."""
        with pytest.raises(TransformError):
            beam_splitter(0.3).on([1, 1])

    def test_mode_out_of_registry(self, one_beam_pair):
        """Test acted modes must exist in the state's registry."""
        state = FockState.vacuum(one_beam_pair)

        with pytest.raises(TransformError):
            apply(state, beam_splitter(0.3).on([1, 2]))

    def test_full_matrix_embeds_identity(self):
        """Test embedding leaves untouched modes as identity."""
        full = beam_splitter(math.pi / 4).on([0, 2]).full_matrix(3)

        assert full[1, 1] == 1
        assert full[0, 2] == pytest.approx(math.sqrt(0.5))
        assert unitarity_residual(full) < 1e-12


class TestBuilders:
    """Test splitter and multiport builders."""

    @pytest.mark.parametrize("theta", [0.0, 0.3, math.pi / 4, 1.2, math.pi / 2])
    def test_beam_splitter_unitary(self, theta):
        """Test splitters are unitary for any angle."""
        assert unitarity_residual(beam_splitter(theta).matrix) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_multiport_unitary(self, n):
        """Test multiports are unitary."""
        assert unitarity_residual(symmetric_multiport(n).matrix) < 1e-12

    def test_multiport_one_is_identity(self):
        """Test the 1-port is the identity."""
        assert symmetric_multiport(1).matrix[0, 0] == 1

    def test_multiport_uniform_magnitudes(self):
        """Test every entry has magnitude 1/sqrt(N)."""
        matrix = symmetric_multiport(3).matrix

        assert np.allclose(np.abs(matrix), 1 / math.sqrt(3))

    def test_multiport_zero_rejected(self):
        """Test N = 0 is invalid."""
        with pytest.raises(TransformError):
            symmetric_multiport(0)

    def test_haar_unitary(self, rng):
        """Test random unitaries pass the unitarity check."""
        for dim in (1, 2, 5):
            assert unitarity_residual(haar_unitary(dim, rng)) < 1e-12


class TestExpansionEngine:
    """Test the expansion engine."""

    def test_implements_abc(self):
        """Test ExpansionEngine implements AmplitudeEngineABC."""
        assert isinstance(ExpansionEngine(), AmplitudeEngineABC)

    def test_single_photon_splitting(self, one_beam_pair):
        """Test one photon maps to cos and sin amplitudes."""
        theta = 0.4
        state = FockState.basis(one_beam_pair, (1, 0))

        out = apply(state, beam_splitter(theta))

        assert out.amplitude((1, 0)) == pytest.approx(math.cos(theta))
        assert out.amplitude((0, 1)) == pytest.approx(math.sin(theta))

    def test_second_input_sign(self, one_beam_pair):
        """Test the second input picks up -cos on the second output."""
        theta = 0.4
        out = apply(FockState.basis(one_beam_pair, (0, 1)), beam_splitter(theta))

        assert out.amplitude((0, 1)) == pytest.approx(-math.cos(theta))

    def test_hong_ou_mandel(self, one_beam_pair):
        """Test two photons on a symmetric splitter never exit separately."""
        out = apply(FockState.basis(one_beam_pair, (1, 1)), beam_splitter(math.pi / 4))

        assert abs(out.amplitude((1, 1))) < 1e-14
        assert abs(out.amplitude((2, 0))) == pytest.approx(math.sqrt(0.5))
        assert abs(out.amplitude((0, 2))) == pytest.approx(math.sqrt(0.5))

    def test_vacuum_invariant(self, four_beam_registry):
        """Test the vacuum is unchanged."""
        vacuum = FockState.vacuum(four_beam_registry)

        out = apply(vacuum, symmetric_multiport(4).on([0, 2, 4, 6]))

        assert out.allclose(vacuum)

    def test_norm_and_photon_number_preserved(self, rng, make_random_state):
        """Test random transforms preserve norm and total photon number."""
        registry = ModeRegistry.from_beams(["1", "2", "3"])
        for photons in (1, 2, 3, 4):
            state = make_random_state(registry, photons, rng)
            transform = ModeTransform(haar_unitary(4, rng), (0, 2, 3, 5))

            out = apply(state, transform)

            assert out.norm_squared() == pytest.approx(1.0, abs=1e-12)
            assert out.photon_numbers() == {photons}

    def test_compose_matches_sequential(self, rng, make_random_state):
        """Test compose(a, b) equals applying a then b."""
        registry = ModeRegistry.from_beams(["1", "2"])
        state = make_random_state(registry, 3, rng)
        first = ModeTransform(haar_unitary(2, rng), (0, 1))
        second = ModeTransform(haar_unitary(3, rng), (1, 2, 3))

        sequential = apply(apply(state, first), second)
        combined = apply(state, compose(first, second))

        assert combined.allclose(sequential, atol=1e-12)

    def test_inverse_restores_state(self, rng, make_random_state):
        """Test U followed by U^dagger is the identity."""
        registry = ModeRegistry.from_beams(["1", "2"])
        state = make_random_state(registry, 2, rng)
        u = haar_unitary(4, rng)

        back = apply(apply(state, ModeTransform(u)), ModeTransform(u.conj().T))

        assert back.allclose(state, atol=1e-12)


class TestParallelPolarization:
    """Test polarization-parallel application."""

    def test_acts_on_both_polarizations(self):
        """Test H and V photons of a beam split alike."""
        registry = ModeRegistry.from_beams(["1", "5"])
        state = FockState.from_labels(registry, [({("1", "H"): 1, ("1", "V"): 1}, 1.0)])

        out = apply_parallel_polarization(state, beam_splitter(math.pi / 4), ["1", "5"])

        one_each = out.amplitude((1, 0, 0, 1))
        assert one_each == pytest.approx(0.5)
        assert out.norm_squared() == pytest.approx(1.0)

    def test_missing_polarization_rejected(self):
        """Test a beam without a V mode is refused before anything is applied."""
        registry = ModeRegistry((("1", "H"), ("1", "V"), ("5", "H")))
        state = FockState.vacuum(registry)

        with pytest.raises(TransformError):
            apply_parallel_polarization(state, beam_splitter(0.5), ["1", "5"])

    def test_size_mismatch_rejected(self, four_beam_registry):
        """Test transform size must match the beam count."""
        with pytest.raises(TransformError):
            apply_parallel_polarization(
                FockState.vacuum(four_beam_registry), symmetric_multiport(3), ["1", "2"]
            )
