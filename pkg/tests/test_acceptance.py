"""End-to-end acceptance checks for the simulator."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.analysis import telecloning_protocol
from src.config import DEFAULT_SCAN_STEPS
from src.core.fock import FockState, ModeRegistry
from src.core.linops import ModeTransform, apply, beam_splitter, haar_unitary
from src.core.measure import outcome_distribution
from src.experiments import (
    four_photon_probability,
    four_photon_scheme,
    generalized_probability,
    generalized_scheme,
    run_crosscheck,
    scan_theta,
    telecloning_scheme,
)
from src.targets import fidelity
from tests.strategies import fock_states, random_normalized_state, seeds


class TestFourPhotonAcceptance:
    """Spin-1 generation from two EPR pairs."""

    def test_maximum(self):
        """Test 3/16 and unit fidelity at pi/4."""
        report = four_photon_scheme(math.pi / 4)

        assert abs(report.success_probability - 0.1875) < 1e-12
        assert abs(report.fidelity - 1.0) < 1e-12

    def test_full_scan(self):
        """Test a 101-point scan follows 3 sin^4 cos^4 pointwise."""
        rows = scan_theta(0.0, math.pi / 2, DEFAULT_SCAN_STEPS)

        deviation = max(abs(r.probability - four_photon_probability(r.theta)) for r in rows)
        assert len(rows) == 101
        assert deviation < 1e-12


class TestGeneralizedAcceptance:
    """The N-pair scheme against its closed form."""

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_closed_form_and_fidelity(self, n):
        """Test probability and unit fidelity for N up to 4."""
        report = generalized_scheme(n)

        assert abs(report.success_probability - generalized_probability(n)) < 1e-12
        assert abs(report.fidelity - 1.0) < 1e-12

    def test_four_pairs_value(self):
        """Test N = 4 gives 2880/1048576."""
        assert abs(generalized_scheme(4).success_probability - 2880 / 1048576) < 1e-12


class TestTelecloningAcceptance:
    """Telecloning-state generation and cloning."""

    def test_exact_and_chained(self):
        """Test 1/4 from the exact input and 3/64 chained."""
        exact = telecloning_scheme()
        chained = telecloning_scheme(chained=True)

        assert abs(exact.success_probability - 0.25) < 1e-12
        assert abs(exact.fidelity - 1.0) < 1e-12
        assert abs(chained.success_probability - 3 / 64) < 1e-12

    @settings(max_examples=25)
    @given(seeds)
    def test_cloning_on_random_inputs(self, seed):
        """Test random inputs: 1/4 per outcome, 5/6 per clone, equal clones."""
        rng = np.random.default_rng(seed)
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)

        for outcome in telecloning_protocol(v[0], v[1]):
            assert abs(outcome.probability - 0.25) < 1e-12
            assert all(abs(f - 5 / 6) < 1e-9 for f in outcome.fidelities)
            first, second = outcome.clones
            assert np.max(np.abs(first.matrix - second.matrix)) < 1e-10


class TestEngineAcceptance:
    """Expansion engine against the permanent oracle."""

    def test_hundred_random_circuits(self):
        """Test 100 seeded circuits agree within 1e-10."""
        summary = run_crosscheck(trials=100, max_modes=6, max_photons=4, seed=42)

        assert summary.max_deviation < 1e-10


class TestPropertyAcceptance:
    """Randomized property checks."""

    @given(seeds, st.integers(min_value=0, max_value=4))
    def test_norm_and_number_conservation(self, seed, photons):
        """Test random transforms preserve norm and photon number."""
        rng = np.random.default_rng(seed)
        registry = ModeRegistry.from_beams(["1", "2", "3"])
        state = random_normalized_state(registry, photons, rng)

        out = apply(state, ModeTransform(haar_unitary(6, rng)))

        assert abs(out.norm_squared() - 1.0) < 1e-12
        assert out.photon_numbers() == {photons}

    @given(seeds)
    def test_distribution_complete(self, seed):
        """Test outcome distributions sum to one."""
        rng = np.random.default_rng(seed)
        registry = ModeRegistry.from_beams(["1", "2", "3"])
        state = apply(random_normalized_state(registry, 3, rng), ModeTransform(haar_unitary(6, rng)))

        total = math.fsum(outcome_distribution(state, ["1", "2", "3"]).values())

        assert abs(total - 1.0) < 1e-12

    def test_hong_ou_mandel(self):
        """Test the coincidence amplitude vanishes."""
        state = FockState.basis(ModeRegistry.from_beams(["1"]), (1, 1))

        assert abs(apply(state, beam_splitter(math.pi / 4)).amplitude((1, 1))) < 1e-14

    @given(fock_states(), fock_states(), st.floats(min_value=0.0, max_value=2 * math.pi))
    def test_fidelity_symmetry_and_phase(self, a, b, phase):
        """Test fidelity is symmetric and blind to global phase."""
        assert abs(fidelity(a, b) - fidelity(b, a)) < 1e-14
        assert abs(fidelity(a, b.scale(np.exp(1j * phase))) - fidelity(a, b)) < 1e-12
