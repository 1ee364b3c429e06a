import numpy as np
import pytest

from fracbayes import fracops as fo
from fracbayes import stats
from fracbayes.sampler import Chain


def fabricate_chain(states, beta=0.3, seed=0):
    states = np.asarray(states, dtype=float)
    n = states.shape[1]
    grid = fo.GridSpec(0.0, 1.0, n, fo.make_psi_map("x")) if n >= 3 else None
    iterations = max(states.shape[0], 1)
    return Chain(
        states=states,
        state_energies=np.zeros(states.shape[0]),
        energies=np.zeros(iterations),
        accept_flags=np.ones(iterations, dtype=bool),
        beta=beta,
        seed=seed,
        grid=grid,
    )


class TestSummarize:
    def test_degenerate_chain(self):
        state = np.array([1.0, -2.0, 3.0])
        chain = fabricate_chain(np.tile(state, (50, 1)))
        summary = stats.summarize(chain)
        assert np.array_equal(summary.mean, state)
        assert np.array_equal(summary.ci_lower, state)
        assert np.array_equal(summary.ci_upper, state)

    def test_two_state_mean(self):
        a = np.array([0.0, 2.0, 4.0])
        b = np.array([2.0, 0.0, 0.0])
        summary = stats.summarize(fabricate_chain([a, b]))
        assert np.array_equal(summary.mean, (a + b) / 2.0)

    def test_normal_quantiles(self):
        draws = np.random.default_rng(1).standard_normal((10_000, 1))
        summary = stats.summarize(fabricate_chain(draws))
        assert abs(summary.ci_lower[0] + 1.96) <= 0.08
        assert abs(summary.ci_upper[0] - 1.96) <= 0.08

    def test_bounds_bracket_median(self):
        draws = np.random.default_rng(2).standard_normal((500, 4))
        summary = stats.summarize(fabricate_chain(draws))
        median = np.median(draws, axis=0)
        assert np.all(summary.ci_lower <= median)
        assert np.all(median <= summary.ci_upper)

    def test_affine_transform_of_states(self):
        draws = np.random.default_rng(3).standard_normal((400, 3))
        base = stats.summarize(fabricate_chain(draws))
        moved = stats.summarize(fabricate_chain(2.0 * draws + 1.0))
        assert np.allclose(moved.mean, 2.0 * base.mean + 1.0, rtol=1e-12)

    def test_empty_chain_rejected(self):
        with pytest.raises(ValueError):
            stats.summarize(fabricate_chain(np.empty((0, 3))))


class TestRmsd:
    def test_identical_vectors(self):
        x = np.arange(5.0)
        assert stats.rmsd(x, x) == 0.0

    def test_constant_offset(self):
        x = np.arange(6.0)
        assert stats.rmsd(x, x + 0.75) == pytest.approx(0.75, rel=1e-13)

    def test_hand_computed_value(self):
        assert stats.rmsd([0.0, 0.0], [3.0, 4.0]) == pytest.approx(
            3.5355339059327378, rel=1e-13
        )

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            stats.rmsd(np.zeros(3), np.zeros(4))


class TestMarginals:
    def test_degenerate_single_bin(self):
        chain = fabricate_chain(np.full((100, 3), 2.5))
        grid = stats.marginals(chain, [1], bins=10)
        density, edges = grid.histograms_1d[1]
        width = edges[1] - edges[0]
        assert np.count_nonzero(density) == 1
        assert density.max() == pytest.approx(1.0 / width, rel=1e-12)

    def test_histograms_normalized(self):
        draws = np.random.default_rng(4).standard_normal((20_000, 4))
        grid = stats.marginals(fabricate_chain(draws), [0, 2, 3], bins=25)
        for density, edges in grid.histograms_1d.values():
            assert abs(np.sum(density * np.diff(edges)) - 1.0) <= 1e-9
        assert set(grid.histograms_2d) == {(0, 2), (0, 3), (2, 3)}

    def test_independent_coordinates_factorize(self):
        draws = np.random.default_rng(5).standard_normal((100_000, 2))
        grid = stats.marginals(fabricate_chain(draws), [0, 1], bins=20)
        h2, xe, ye = grid.histograms_2d[(0, 1)]
        d0 = np.histogram(draws[:, 0], bins=xe, density=True)[0]
        d1 = np.histogram(draws[:, 1], bins=ye, density=True)[0]
        assert np.max(np.abs(h2 - np.outer(d0, d1))) <= 0.02

    def test_index_out_of_range(self):
        chain = fabricate_chain(np.zeros((10, 3)))
        with pytest.raises(IndexError):
            stats.marginals(chain, [5])

    def test_bins_validated(self):
        chain = fabricate_chain(np.zeros((10, 3)))
        with pytest.raises(ValueError):
            stats.marginals(chain, [0], bins=1)
