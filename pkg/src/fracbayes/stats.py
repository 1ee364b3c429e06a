"""Posterior summaries: mean, credible intervals, marginals, error metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampler import Chain

__all__ = ["PosteriorSummary", "MarginalGrid", "summarize", "rmsd", "marginals"]

DEFAULT_BINS = 40


@dataclass(frozen=True)
class PosteriorSummary:
    mean: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    acceptance_rate: float


def summarize(chain: Chain) -> PosteriorSummary:
    """Nodal mean and empirical 2.5/97.5 percentile bounds of the stored states."""
    if len(chain) == 0:
        raise ValueError("chain holds no stored states")
    lower, upper = np.percentile(chain.states, [2.5, 97.5], axis=0)
    return PosteriorSummary(
        mean=chain.states.mean(axis=0),
        ci_lower=lower,
        ci_upper=upper,
        acceptance_rate=chain.acceptance_rate,
    )


def rmsd(x: np.ndarray, y: np.ndarray) -> float:
    """Root-mean-squared deviation sqrt(mean |x_i - y_i|^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return float(np.sqrt(np.mean(np.abs(x - y) ** 2)))


@dataclass(frozen=True)
class MarginalGrid:
    """Per-node sample traces with normalized 1-D and pairwise 2-D histograms."""

    indices: tuple[int, ...]
    samples: np.ndarray  # shape (n_stored, len(indices))
    histograms_1d: dict  # index -> (density, bin_edges)
    histograms_2d: dict  # (index_i, index_j) -> (density, x_edges, y_edges)


def marginals(chain: Chain, indices, bins: int = DEFAULT_BINS) -> MarginalGrid:
    if bins < 2:
        raise ValueError(f"need at least 2 bins, got {bins}")
    indices = tuple(int(i) for i in indices)
    n = chain.states.shape[1]
    for i in indices:
        if not 0 <= i < n:
            raise IndexError(f"marginal index {i} outside grid of {n} nodes")
    samples = chain.states[:, list(indices)]
    hist1 = {}
    for k, i in enumerate(indices):
        density, edges = np.histogram(samples[:, k], bins=bins, density=True)
        hist1[i] = (density, edges)
    hist2 = {}
    for a in range(len(indices)):
        for b in range(a + 1, len(indices)):
            density, xe, ye = np.histogram2d(
                samples[:, a], samples[:, b], bins=bins, density=True
            )
            hist2[(indices[a], indices[b])] = (density, xe, ye)
    return MarginalGrid(
        indices=indices, samples=samples, histograms_1d=hist1, histograms_2d=hist2
    )
