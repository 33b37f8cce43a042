"""Tests for the permanent oracle."""

import itertools
import math

import numpy as np
import pytest
from scipy.special import comb

from src.core.fock import FockState, ModeRegistry
from src.core.linops import ExpansionEngine, ModeTransform, beam_splitter, haar_unitary
from src.core.oracle import (
    DenseBasis,
    DenseBasisLimitError,
    OracleError,
    PermanentEngine,
    dense_apply,
    permanent,
    transition_amplitude,
)
from src.interfaces import AmplitudeEngineABC


def naive_permanent(matrix: np.ndarray) -> complex:
    """Sum over all permutations."""
    n = matrix.shape[0]
    return sum(
        math.prod(matrix[i, sigma[i]] for i in range(n))
        for sigma in itertools.permutations(range(n))
    )


class TestPermanent:
    """Test Ryser's permanent."""

    def test_identity(self):
        """Test per(I) = 1."""
        assert permanent(np.eye(3)) == pytest.approx(1.0)

    def test_all_ones(self):
        """Test per(J_3) = 3!."""
        assert permanent(np.ones((3, 3))) == pytest.approx(6.0)

    def test_empty_matrix(self):
        """Test the 0 x 0 permanent is 1."""
        assert permanent(np.zeros((0, 0))) == 1

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_matches_naive(self, rng, n):
        """Test random complex matrices against the permutation sum."""
        matrix = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))

        assert permanent(matrix) == pytest.approx(naive_permanent(matrix), rel=1e-12, abs=1e-12)

    def test_zero_row(self, rng):
        """Test a zero row gives a zero permanent."""
        matrix = rng.normal(size=(4, 4)) + 0j
        matrix[2] = 0

        assert abs(permanent(matrix)) < 1e-14

    def test_row_permutation_invariant(self, rng):
        """Test permuting rows leaves the permanent unchanged."""
        matrix = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))

        shuffled = matrix[rng.permutation(5)]

        assert abs(permanent(shuffled) - permanent(matrix)) < 1e-10

    def test_non_square_rejected(self):
        """Test non-square input raises."""
        with pytest.raises(OracleError):
            permanent(np.ones((2, 3)))

    def test_size_limit(self):
        """Test matrices above the limit are refused."""
        with pytest.raises(OracleError):
            permanent(np.eye(21))


class TestDenseBasis:
    """Test dense basis enumeration."""

    @pytest.mark.parametrize("modes,photons", [(1, 0), (1, 3), (3, 2), (4, 3), (6, 4)])
    def test_dimension_and_order(self, modes, photons):
        """Test size C(n+M-1, M-1) and lexicographic order."""
        basis = DenseBasis(modes, photons)

        assert len(basis) == comb(photons + modes - 1, modes - 1, exact=True)
        assert len(basis) == DenseBasis.dimension(modes, photons)
        assert list(basis.states) == sorted(basis.states)
        assert all(state.total == photons for state in basis.states)

    def test_index_is_bijective(self):
        """Test index inverts the enumeration."""
        basis = DenseBasis(3, 3)

        assert [basis.index(s) for s in basis.states] == list(range(len(basis)))


class TestTransitionAmplitude:
    """Test single transition amplitudes."""

    def test_identity(self):
        """Test U = I maps a state to itself."""
        assert transition_amplitude(np.eye(3), (2, 0, 1), (2, 0, 1)) == pytest.approx(1.0)

    def test_hong_ou_mandel(self):
        """Test the HOM coincidence amplitude vanishes."""
        amplitude = transition_amplitude(beam_splitter(math.pi / 4).matrix, (1, 1), (1, 1))

        assert abs(amplitude) < 1e-14

    def test_single_photon_cosine(self):
        """Test one photon stays with amplitude cos(theta)."""
        theta = 0.9

        amplitude = transition_amplitude(beam_splitter(theta).matrix, (1, 0), (1, 0))

        assert amplitude == pytest.approx(math.cos(theta))

    def test_photon_number_mismatch(self):
        """Test differing totals raise."""
        with pytest.raises(OracleError):
            transition_amplitude(np.eye(2), (1, 0), (1, 1))


class TestDenseApply:
    """Test dense evolution."""

    def test_vacuum(self, two_beam_registry, haar_4):
        """Test the vacuum maps to itself."""
        vacuum = FockState.vacuum(two_beam_registry)

        assert dense_apply(vacuum, haar_4).allclose(vacuum)

    def test_agrees_with_expansion(self, rng, make_random_state):
        """Test the dense path matches the expansion engine."""
        registry = ModeRegistry.from_beams(["1", "2", "3"])
        for photons in (1, 2, 3):
            state = make_random_state(registry, photons, rng)
            u = haar_unitary(6, rng)

            expected = ExpansionEngine().apply(state, ModeTransform(u))

            assert dense_apply(state, u).allclose(expected, atol=1e-10)

    def test_fock_level_unitarity(self, rng):
        """Test the n-photon transition matrix is unitary."""
        modes, photons = 4, 3
        u = haar_unitary(modes, rng)
        basis = DenseBasis(modes, photons)

        big = np.array(
            [[transition_amplitude(u, s, t) for s in basis.states] for t in basis.states]
        )

        assert np.max(np.abs(big.conj().T @ big - np.eye(len(basis)))) < 1e-10

    def test_ceiling(self, four_beam_registry):
        """Test the resource guard refuses large bases."""
        state = FockState.basis(four_beam_registry, (1, 1, 1, 1, 0, 0, 0, 0))

        with pytest.raises(DenseBasisLimitError):
            dense_apply(state, np.eye(8), max_entries=10)

    def test_support_restricts_outputs(self, epr_state):
        """Test only supported outputs are evaluated."""
        out = dense_apply(epr_state, np.eye(4), support=lambda o: o[0] == 1)

        assert len(out) == 1
        assert out.norm_squared() == pytest.approx(0.5)

    def test_parallel_matches_serial(self, rng, make_random_state):
        """Test worker pools keep results unchanged."""
        registry = ModeRegistry.from_beams(["1", "2"])
        state = make_random_state(registry, 2, rng)
        u = haar_unitary(4, rng)

        serial = dense_apply(state, u)
        parallel = dense_apply(state, u, workers=2)

        assert parallel.allclose(serial, atol=1e-14)

    def test_support_heralds_hong_ou_mandel_bunching(self):
        """Test HOM heralding of one empty output mode through a support predicate."""
        registry = ModeRegistry.from_beams(["1"])
        state = FockState.basis(registry, (1, 1))

        heralded = dense_apply(
            state, beam_splitter(math.pi / 4).matrix, support=lambda o: o[1] == 0
        )

        assert heralded.norm_squared() == pytest.approx(0.5)
        assert list(heralded.terms) == [(2, 0)]


class TestPermanentEngine:
    """Test the engine wrapper."""

    def test_implements_abc(self):
        """Test PermanentEngine implements AmplitudeEngineABC."""
        assert isinstance(PermanentEngine(), AmplitudeEngineABC)

    def test_matches_expansion_on_subset(self, rng, make_random_state):
        """Test a transform on a mode subset agrees with the expansion engine."""
        registry = ModeRegistry.from_beams(["1", "2"])
        state = make_random_state(registry, 3, rng)
        transform = ModeTransform(haar_unitary(2, rng), (1, 3))

        dense = PermanentEngine().apply(state, transform)
        sparse = ExpansionEngine().apply(state, transform)

        assert dense.allclose(sparse, atol=1e-10)
