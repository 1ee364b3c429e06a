"""Gaussian reference measure and total-variation penalty terms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .fracops import Field, GridSpec, RieszOperator

__all__ = [
    "CovarianceOperator",
    "FractionalTvPenalty",
    "FirstOrderTvPenalty",
    "build_covariance",
    "sample_gaussian",
]

# squared-exponential kernels on fine grids are numerically rank deficient;
# escalate the diagonal regularizer until the factorization goes through
_DEFAULT_JITTER_FRACTION = 1e-10
_MAX_JITTER_FRACTION = 1e-4


@dataclass(frozen=True)
class CovarianceOperator:
    """Dense squared-exponential covariance with a lower-triangular factor."""

    matrix: np.ndarray
    factor: np.ndarray
    gamma: float
    d: float
    jitter: float
    grid: GridSpec


def build_covariance(
    grid: GridSpec, gamma: float, d: float, jitter: float | None = None
) -> CovarianceOperator:
    """Assemble gamma * exp(-((x_i - x_j)/d)^2 / 2) over the physical nodes.

    The diagonal regularizer starts at ``jitter`` (default 1e-10 * gamma) and
    is escalated tenfold, up to 1e-4 * gamma, until the Cholesky factorization
    succeeds.  Escalation failure is a configuration error.
    """
    if gamma <= 0 or d <= 0:
        raise ConfigurationError(f"need gamma > 0 and d > 0, got gamma={gamma}, d={d}")
    if jitter is not None and jitter < 0:
        raise ConfigurationError(f"jitter must be nonnegative, got {jitter}")

    x = grid.x_nodes
    base = gamma * np.exp(-0.5 * ((x[:, None] - x[None, :]) / d) ** 2)
    eye = np.eye(grid.n_nodes)

    eps = _DEFAULT_JITTER_FRACTION * gamma if jitter is None else jitter
    cap = max(_MAX_JITTER_FRACTION * gamma, eps)
    while True:
        matrix = base + eps * eye
        try:
            factor = np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError:
            nxt = max(eps, _DEFAULT_JITTER_FRACTION * gamma) * 10.0
            if nxt > cap:
                raise ConfigurationError(
                    f"covariance factorization failed even with jitter {eps:g}"
                ) from None
            eps = nxt
            continue
        return CovarianceOperator(
            matrix=matrix, factor=factor, gamma=gamma, d=d, jitter=eps, grid=grid
        )


def sample_gaussian(cov: CovarianceOperator, rng: np.random.Generator) -> Field:
    """Draw one zero-mean sample as factor @ z with z standard normal."""
    z = rng.standard_normal(cov.grid.n_nodes)
    return Field(cov.factor @ z, cov.grid)


@dataclass(frozen=True)
class FractionalTvPenalty:
    """lam times the fractional total variation of the state."""

    lam: float
    op: RieszOperator

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError(f"penalty weight must be >= 0, got {self.lam}")

    @property
    def grid(self) -> GridSpec:
        return self.op.grid

    def evaluate(self, values: np.ndarray) -> float:
        return self.lam * self.op.ftv_of(values)

    def evaluate_field(self, u: Field) -> float:
        if u.grid != self.grid:
            raise ValueError("field grid does not match penalty grid")
        return self.evaluate(u.values)


@dataclass(frozen=True)
class FirstOrderTvPenalty:
    """lam times the first-order total variation h * sum |u_{l+1} - u_l|."""

    lam: float
    grid: GridSpec

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError(f"penalty weight must be >= 0, got {self.lam}")

    def evaluate(self, values: np.ndarray) -> float:
        return self.lam * self.grid.h * float(np.abs(np.diff(values)).sum())

    def evaluate_field(self, u: Field) -> float:
        if u.grid != self.grid:
            raise ValueError("field grid does not match penalty grid")
        return self.evaluate(u.values)
