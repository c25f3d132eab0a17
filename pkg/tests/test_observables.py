import math

import numpy as np
import pytest

from spinsense.dynamics import density_from_pure
from spinsense.model import SystemParams, plus_minus_state
from spinsense.noise import NoiseEnsemble, analytic_averaged_density, mc_averaged_density
from spinsense.observables import (
    ObservableSeries,
    analytic_l1_coherence,
    analytic_return_probability,
    l1_coherence,
    return_probability,
)


class TestL1Coherence:
    def test_diagonal_state_has_none(self):
        assert l1_coherence(np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)) == 0.0

    def test_maximally_coherent_state(self):
        rho0 = density_from_pure(plus_minus_state())
        assert abs(l1_coherence(rho0) - 3.0) <= 1e-12
        assert abs(l1_coherence(rho0, normalized=True) - 1.0) <= 1e-12

    def test_averaged_state_closed_form(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            params = SystemParams(*rng.uniform(0.1, 2.0, size=3))
            t = float(rng.uniform(0.0, 3.0))
            got = l1_coherence(analytic_averaged_density(params, t), normalized=True)
            want = (1 + 2 * math.exp(-8 * params.epsilon**2 * t**2)) / 3
            assert abs(got - want) <= 1e-12


class TestReturnProbability:
    def test_self_overlap(self):
        psi = plus_minus_state()
        assert abs(return_probability(density_from_pure(psi), psi) - 1.0) <= 1e-12

    def test_noiseless_zero_crossing(self):
        # (1 + cos(pi))/2 = 0 at t = pi/4 with unit coupling and no field
        from spinsense.dynamics import evolve_density
        from spinsense.model import exchange_hamiltonian

        psi = plus_minus_state()
        rho = evolve_density(density_from_pure(psi), exchange_hamiltonian(1.0), math.pi / 4)
        assert abs(return_probability(rho, psi)) <= 1e-10

    def test_spot_value(self):
        # (1 + cos(4) e^{-2})/2 evaluated through the density-matrix route
        params = SystemParams(j0=1.0, epsilon=0.5, m=0.0)
        got = return_probability(analytic_averaged_density(params, 1.0), plus_minus_state())
        assert abs(got - 0.5 * (1 + math.cos(4.0) * math.exp(-2.0))) <= 1e-14
        assert abs(got - 0.4558) <= 5e-5

    def test_imaginary_residue_raises(self):
        # perturb all off-diagonal pairs coherently: each pair stays inside
        # the 1e-12 hermiticity tolerance but the quadratic-form residues add
        psi = plus_minus_state()
        signs = np.array([1.0, -1.0, 1.0, -1.0])
        rho = density_from_pure(psi).copy()
        for i in range(4):
            for j in range(i + 1, 4):
                bump = -signs[i] * signs[j] * 4.9e-13j
                rho[i, j] += bump
                rho[j, i] += bump
        with pytest.raises(RuntimeError, match="residue"):
            return_probability(rho, psi)


class TestClosedForms:
    def test_return_probability_at_zero(self):
        params = SystemParams(j0=1.3, epsilon=0.5, m=2.0)
        assert abs(analytic_return_probability(params, 0.0) - 1.0) <= 1e-15

    def test_return_probability_no_field(self):
        params = SystemParams(j0=1.0, epsilon=0.5, m=0.0)
        for t in np.linspace(0, 3, 31):
            want = 0.5 * (1 + np.cos(4 * t) * np.exp(-8 * 0.25 * t * t))
            assert abs(analytic_return_probability(params, float(t)) - want) <= 1e-15

    def test_return_probability_late_time(self):
        # once the envelope is dead only 3/8 + cos(4mt)/8 is left
        params = SystemParams(j0=1.0, epsilon=0.5, m=0.9)
        for t in [10.0, 25.0, 60.0]:
            want = 0.375 + 0.125 * math.cos(4 * params.m * t)
            assert abs(analytic_return_probability(params, t) - want) <= 1e-12

    def test_matches_density_route(self):
        rng = np.random.default_rng(52)
        psi = plus_minus_state()
        for _ in range(50):
            params = SystemParams(
                j0=float(rng.uniform(0.2, 2)),
                epsilon=float(rng.uniform(0, 1.5)),
                m=float(rng.uniform(-2, 2)),
            )
            t = float(rng.uniform(0, 4))
            via_rho = return_probability(analytic_averaged_density(params, t), psi)
            direct = analytic_return_probability(params, t)
            assert abs(via_rho - direct) <= 1e-12

    def test_coherence_at_zero_and_noiseless(self):
        assert analytic_l1_coherence(SystemParams(1.0, 0.5), 0.0) == 1.0
        params = SystemParams(j0=1.0, epsilon=0.0, m=1.0)
        for t in [0.0, 1.0, 50.0]:
            assert analytic_l1_coherence(params, t) == 1.0

    def test_coherence_field_independent(self):
        ts = np.linspace(0, 5, 101)
        base = analytic_l1_coherence(SystemParams(1.0, 0.5, 0.0), ts)
        for m in [-3.0, 0.5, 2.0]:
            other = analytic_l1_coherence(SystemParams(1.0, 0.5, m), ts)
            assert np.array_equal(base, other)

    def test_coherence_density_route_matches(self):
        rng = np.random.default_rng(53)
        for _ in range(30):
            params = SystemParams(
                j0=float(rng.uniform(0.2, 2)),
                epsilon=float(rng.uniform(0, 1.5)),
                m=float(rng.uniform(-2, 2)),
            )
            t = float(rng.uniform(0, 4))
            via_rho = l1_coherence(analytic_averaged_density(params, t), normalized=True)
            assert abs(via_rho - analytic_l1_coherence(params, t)) <= 1e-12

    def test_coherence_monotone(self):
        ts = np.linspace(0.0, 4.0, 201)
        values = analytic_l1_coherence(SystemParams(1.0, 0.7), ts)
        assert np.all(np.diff(values) <= 1e-15)
        at_t = [analytic_l1_coherence(SystemParams(1.0, e), 1.3) for e in np.linspace(0, 2, 21)]
        assert np.all(np.diff(at_t) <= 1e-15)

    def test_mc_coherence_field_invariant(self):
        ens = NoiseEnsemble(n_samples=200_000, master_seed=55)
        t = 1.2
        base = l1_coherence(mc_averaged_density(SystemParams(1.0, 0.5, 0.0), t, ens), True)
        with_field = l1_coherence(mc_averaged_density(SystemParams(1.0, 0.5, 1.5), t, ens), True)
        assert abs(with_field - base) <= 1e-2


class TestObservableSeries:
    def test_validates_lengths(self):
        with pytest.raises(ValueError):
            ObservableSeries([0.0, 1.0], [1.0], "return_prob")

    def test_validates_monotone_times(self):
        with pytest.raises(ValueError):
            ObservableSeries([0.0, 0.0], [1.0, 1.0], "return_prob")

    def test_validates_range(self):
        with pytest.raises(ValueError):
            ObservableSeries([0.0, 1.0], [0.5, 1.5], "return_prob")
        with pytest.raises(ValueError):
            ObservableSeries([0.0, 1.0], [-0.1, 2.9], "coherence_raw")

    def test_validates_kind_and_source(self):
        with pytest.raises(ValueError):
            ObservableSeries([0.0], [0.5], "entropy")
        with pytest.raises(ValueError):
            ObservableSeries([0.0], [0.5], "return_prob", source="guess")

    def test_detrended_allows_negative(self):
        series = ObservableSeries([0.0, 1.0], [-0.2, 0.2], "return_prob_detrended")
        assert len(series) == 2
