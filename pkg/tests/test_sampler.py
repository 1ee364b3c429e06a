import math

import numpy as np
import pytest

from fracbayes import fracops as fo
from fracbayes import prior, sampler
from fracbayes.errors import ConfigurationError, NumericalError


class LinearStub:
    """Forward operator G(u) = M u for small hand-checkable cases."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)

    def apply(self, values):
        return self.matrix @ values


def small_cov(n=21, gamma=0.01, d=0.05):
    grid = fo.GridSpec(1.0, 2.0, n, fo.make_psi_map("x"))
    return prior.build_covariance(grid, gamma=gamma, d=d)


class TestPotential:
    def test_zero_residual(self):
        model = sampler.PosteriorModel(
            forward=LinearStub(np.eye(3)), y=np.array([1.0, 2.0, 3.0]), sigma=0.1
        )
        grid = fo.GridSpec(0.0, 1.0, 3, fo.make_psi_map("x"))
        u = fo.Field(np.array([1.0, 2.0, 3.0]), grid)
        assert sampler.potential(u, model) == 0.0

    def test_scalar_case(self):
        # G(u) = 2, y = 1, sigma = 0.5 -> 0.5 * ((2-1)/0.5)^2 = 2
        model = sampler.PosteriorModel(
            forward=LinearStub([[2.0]]), y=np.array([1.0]), sigma=0.5
        )
        assert model.potential(np.array([1.0])) == pytest.approx(2.0, rel=1e-14)

    def test_unit_sigma_is_half_squared_norm(self):
        rng = np.random.default_rng(0)
        matrix = rng.standard_normal((4, 4))
        y = rng.standard_normal(4)
        u = rng.standard_normal(4)
        model = sampler.PosteriorModel(forward=LinearStub(matrix), y=y, sigma=1.0)
        assert model.potential(u) == pytest.approx(
            0.5 * np.sum((matrix @ u - y) ** 2), rel=1e-13
        )

    def test_null_model_energy_is_zero(self):
        model = sampler.PosteriorModel()
        assert model.energy(np.ones(5)) == 0.0


class TestProposal:
    def test_beta_one_returns_reference_draw(self):
        u = np.array([2.0, -1.0])
        w = np.array([0.5, 0.25])
        assert np.array_equal(sampler.pcn_propose(u, 1.0, w), w)

    def test_tiny_beta_stays_close(self):
        u = np.array([1.0, 2.0])
        w = np.array([-3.0, 4.0])
        v = sampler.pcn_propose(u, 1e-12, w)
        assert np.linalg.norm(v - u) <= 1e-10 * np.linalg.norm(w - u)

    def test_hand_checked_combination(self):
        v = sampler.pcn_propose(np.array([1.0, 0.0]), 0.6, np.array([0.0, 1.0]))
        assert np.allclose(v, [0.8, 0.6], atol=1e-15)


class TestAcceptanceProb:
    def model_with_energy(self, energies):
        class Stub:
            def __init__(self):
                self.table = energies

            def energy(self, values):
                return self.table[float(values[0])]

        return Stub()

    def test_equal_energies_accept(self):
        model = self.model_with_energy({0.0: 5.0, 1.0: 5.0})
        assert sampler.acceptance_prob(np.array([0.0]), np.array([1.0]), model) == 1.0

    def test_downhill_accepts(self):
        model = self.model_with_energy({0.0: 5.0, 1.0: 1.0})
        assert sampler.acceptance_prob(np.array([0.0]), np.array([1.0]), model) == 1.0

    def test_log_two_increase_gives_half(self):
        model = self.model_with_energy({0.0: 1.0, 1.0: 1.0 + math.log(2.0)})
        assert sampler.acceptance_prob(
            np.array([0.0]), np.array([1.0]), model
        ) == pytest.approx(0.5, rel=1e-14)

    def test_invariant_under_constant_shift(self):
        shifted = self.model_with_energy({0.0: 101.0, 1.0: 101.0 + math.log(2.0)})
        assert sampler.acceptance_prob(
            np.array([0.0]), np.array([1.0]), shifted
        ) == pytest.approx(0.5, rel=1e-14)


class TestRunChain:
    def posterior(self, cov, lam=1.0, sigma=0.05, seed=0):
        grid = cov.grid
        op = fo.RieszOperator(0.9, grid)
        penalty = prior.FractionalTvPenalty(lam, op)
        matrix = np.eye(grid.n_nodes)
        truth = np.sin(2 * np.pi * grid.x_nodes)
        y = truth + sigma * np.random.default_rng(seed).standard_normal(grid.n_nodes)
        return sampler.PosteriorModel(
            forward=LinearStub(matrix), y=y, sigma=sigma, penalty=penalty
        )

    def test_same_seed_same_chain(self):
        cov = small_cov()
        model = self.posterior(cov)
        a = sampler.run_chain(model, cov, beta=0.2, iterations=500, seed=11)
        b = sampler.run_chain(model, cov, beta=0.2, iterations=500, seed=11)
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.energies, b.energies)
        assert np.array_equal(a.accept_flags, b.accept_flags)

    def test_rejections_repeat_previous_state(self):
        cov = small_cov()
        model = self.posterior(cov, sigma=0.01)  # sharp posterior forces rejections
        chain = sampler.run_chain(model, cov, beta=0.5, iterations=400, seed=3)
        rejected = ~chain.accept_flags
        assert rejected.any() and chain.accept_flags.any()
        # states[i] corresponds to iteration i (burn_in=0 stores the initial state)
        for i in np.flatnonzero(rejected):
            assert np.array_equal(chain.states[i + 1], chain.states[i])

    def test_energy_bookkeeping(self):
        cov = small_cov()
        model = self.posterior(cov)
        chain = sampler.run_chain(model, cov, beta=0.2, iterations=300, seed=5)
        recomputed = np.array([model.energy(s) for s in chain.states])
        assert np.max(np.abs(recomputed - chain.state_energies)) <= 1e-10

    def test_storage_layout(self):
        cov = small_cov()
        model = sampler.PosteriorModel()
        chain = sampler.run_chain(model, cov, beta=0.3, iterations=100, seed=1)
        assert len(chain) == 101  # initial state plus every iteration
        thinned = sampler.run_chain(
            model, cov, beta=0.3, iterations=100, burn_in=40, thinning=10, seed=1
        )
        assert len(thinned) == 6
        assert thinned.energies.shape == (100,)
        assert 0.0 <= thinned.acceptance_rate <= 1.0

    def test_null_posterior_accepts_everything(self):
        cov = small_cov()
        chain = sampler.run_chain(
            sampler.PosteriorModel(), cov, beta=0.3, iterations=200, seed=2
        )
        assert chain.acceptance_rate == 1.0
        assert np.all(chain.energies == 0.0)

    def test_null_posterior_matches_reference_measure(self):
        # moderate-size check of the stationary variance and autocorrelation;
        # the acceptance suite runs the full-size version
        cov = small_cov(n=15, gamma=0.04, d=0.1)
        beta = 0.5
        chain = sampler.run_chain(
            sampler.PosteriorModel(), cov, beta=beta, iterations=40_000,
            burn_in=2_000, seed=7,
        )
        states = chain.states
        target = np.diag(cov.matrix)
        assert np.all(np.abs(states.var(axis=0) - target) <= 0.15 * target)
        x0, x1 = states[:-1], states[1:]
        corr = np.array(
            [np.corrcoef(x0[:, j], x1[:, j])[0, 1] for j in range(states.shape[1])]
        )
        assert np.max(np.abs(corr - math.sqrt(1 - beta**2))) <= 0.05

    def test_non_finite_energy_aborts(self):
        cov = small_cov()

        class BadForward:
            def apply(self, values):
                return np.full(values.shape, np.nan)

        model = sampler.PosteriorModel(
            forward=BadForward(), y=np.zeros(cov.grid.n_nodes), sigma=1.0
        )
        with pytest.raises(NumericalError):
            sampler.run_chain(model, cov, beta=0.2, iterations=10, seed=0)

    def test_parameter_validation(self):
        cov = small_cov()
        model = sampler.PosteriorModel()
        with pytest.raises(ConfigurationError):
            sampler.run_chain(model, cov, beta=0.0, iterations=10)
        with pytest.raises(ConfigurationError):
            sampler.run_chain(model, cov, beta=0.5, iterations=10, burn_in=10)
        with pytest.raises(ConfigurationError):
            sampler.run_chain(model, cov, beta=0.5, iterations=10, thinning=0)
