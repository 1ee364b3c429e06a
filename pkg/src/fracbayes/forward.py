"""Forward operators for the three benchmark inverse problems.

All three act on nodal fields over a :class:`~fracbayes.fracops.GridSpec`.
When the grid carries a non-identity coordinate map the PDE operators are
rewritten in the mapped coordinate s, where the grid is uniform:

    d2u/dx2 = x'(s)^-2 * u_ss - x'(s)^-3 * x''(s) * u_s

and both s-derivatives are discretized with second-order central differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve, solve_banded

from .errors import ConfigurationError, NumericalError
from .fracops import Field, GridSpec

__all__ = [
    "ConvolutionModel",
    "HeatSourceModel",
    "EllipticModel",
    "build_convolution",
    "build_heat_model",
    "build_elliptic_model",
    "true_profile",
    "synthesize_data",
]


@dataclass(frozen=True)
class ConvolutionModel:
    """Discrete Gaussian blur: y_i = h * C * sum_j exp(-((i-j)h)^2 / 2r^2) f_j."""

    matrix: np.ndarray
    r: float
    grid: GridSpec

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values


def build_convolution(grid: GridSpec, r: float) -> ConvolutionModel:
    if r <= 0:
        raise ConfigurationError(f"kernel width must be positive, got {r}")
    h = grid.h
    c = 1.0 / (r * np.sqrt(2.0 * np.pi))
    idx = np.arange(grid.n_nodes)
    lag_h = (idx[:, None] - idx[None, :]) * h
    matrix = h * c * np.exp(-(lag_h ** 2) / (2.0 * r ** 2))
    return ConvolutionModel(matrix=matrix, r=r, grid=grid)


def _transport_coefficients(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients p, q of p * u_ss + q * u_s at the interior s-nodes."""
    s = grid.s_nodes[1:-1]
    xp = grid.psi.x_prime(s)
    xpp = grid.psi.x_second(s)
    return xp ** -2.0, -xpp * xp ** -3.0


def _interior_operators(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Dense central-difference u_ss and u_s maps on the interior unknowns."""
    m = grid.n_nodes - 2
    h = grid.h
    d2 = np.zeros((m, m))
    d1 = np.zeros((m, m))
    i = np.arange(m)
    d2[i, i] = -2.0 / h ** 2
    d2[i[:-1], i[:-1] + 1] = 1.0 / h ** 2
    d2[i[1:], i[1:] - 1] = 1.0 / h ** 2
    d1[i[:-1], i[:-1] + 1] = 0.5 / h
    d1[i[1:], i[1:] - 1] = -0.5 / h
    return d2, d1


@dataclass(frozen=True)
class HeatSourceModel:
    """Affine map from a heat source to the final-time interior temperature.

    ``apply`` returns u(., T) at the interior nodes for a source field given
    on all nodes: G(f) = A f_interior + b0, where b0 carries the initial
    condition with zero source.
    """

    A: np.ndarray
    b0: np.ndarray
    theta: float
    time_steps: int
    T: float
    grid: GridSpec

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.A @ values[1:-1] + self.b0


def build_heat_model(
    grid: GridSpec,
    time_steps: int,
    T: float,
    theta: float,
    phi: Field | np.ndarray,
) -> HeatSourceModel:
    """Assemble the time-stepped propagator by advancing all basis sources at once.

    The diffusion and drift terms are theta-weighted between time levels; the
    source enters each step explicitly.  Homogeneous Dirichlet values are
    imposed on the s-grid endpoints.
    """
    if not 0.0 <= theta <= 1.0:
        raise ConfigurationError(f"theta must lie in [0, 1], got {theta}")
    if time_steps < 1 or T <= 0:
        raise ConfigurationError("need time_steps >= 1 and T > 0")
    phi_values = phi.values if isinstance(phi, Field) else np.asarray(phi, dtype=float)
    if phi_values.shape != (grid.n_nodes,):
        raise ConfigurationError("initial condition does not match the grid")

    m = grid.n_nodes - 2
    dt = T / time_steps
    p, q = _transport_coefficients(grid)
    d2, d1 = _interior_operators(grid)
    lap = p[:, None] * d2 + q[:, None] * d1

    eye = np.eye(m)
    implicit = eye - dt * theta * lap
    explicit = eye + dt * (1.0 - theta) * lap
    try:
        lu = lu_factor(implicit)
    except np.linalg.LinAlgError as exc:  # cannot happen for theta=1/2, dt>0
        raise NumericalError("time-step system is singular") from exc

    A = np.zeros((m, m))
    b = phi_values[1:-1].copy()
    for _ in range(time_steps):
        A = lu_solve(lu, explicit @ A + dt * eye)
        b = lu_solve(lu, explicit @ b)
    return HeatSourceModel(A=A, b0=b, theta=theta, time_steps=time_steps, T=T, grid=grid)


@dataclass(frozen=True)
class EllipticModel:
    """Coefficient-to-interior-Neumann map for -u'' + q u = f with zero ends."""

    grid: GridSpec
    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if f.shape != (self.grid.n_nodes,):
            raise ConfigurationError("source does not match the grid")
        object.__setattr__(self, "f", f)

    def _bands(self, q_values: np.ndarray) -> np.ndarray:
        grid = self.grid
        h = grid.h
        p, r = _transport_coefficients(grid)
        m = grid.n_nodes - 2
        ab = np.zeros((3, m))
        ab[0, 1:] = (-p / h ** 2 - r / (2.0 * h))[:-1]  # super-diagonal
        ab[1, :] = 2.0 * p / h ** 2 + q_values[1:-1]
        ab[2, :-1] = (-p / h ** 2 + r / (2.0 * h))[1:]  # sub-diagonal
        return ab

    def system_matrix(self, q_values: np.ndarray) -> np.ndarray:
        """Dense interior system matrix, for residual checks."""
        ab = self._bands(q_values)
        m = ab.shape[1]
        mat = np.diag(ab[1])
        i = np.arange(m - 1)
        mat[i, i + 1] = ab[0, 1:]
        mat[i + 1, i] = ab[2, :-1]
        return mat

    def solve_state(self, q_values: np.ndarray) -> np.ndarray:
        """Full nodal solution u with the Dirichlet zeros attached."""
        try:
            u_in = solve_banded((1, 1), self._bands(q_values), self.f[1:-1])
        except np.linalg.LinAlgError as exc:
            raise NumericalError("elliptic system is singular") from exc
        u = np.zeros(self.grid.n_nodes)
        u[1:-1] = u_in
        return u

    def apply(self, q_values: np.ndarray) -> np.ndarray:
        """Interior derivative data du/dx by central differences in s."""
        u = self.solve_state(q_values)
        grid = self.grid
        du_ds = (u[2:] - u[:-2]) / (2.0 * grid.h)
        return du_ds / grid.psi.x_prime(grid.s_nodes[1:-1])


def build_elliptic_model(grid: GridSpec, f: Field | np.ndarray) -> EllipticModel:
    f_values = f.values if isinstance(f, Field) else np.asarray(f, dtype=float)
    return EllipticModel(grid=grid, f=f_values)


def _deconvolution_profile(x: np.ndarray) -> np.ndarray:
    v = np.zeros_like(x)
    m = (x >= 1.0) & (x <= 1.5)
    v[m] = -16.0 * (x[m] - 1.0) * (x[m] - 1.5)
    v[(x >= 1.7) & (x <= 1.9)] = 0.5
    return v


def _heat_source_profile(x: np.ndarray) -> np.ndarray:
    v = np.zeros_like(x)
    v[(x >= 1.15) & (x <= 1.35)] = 5.0
    m = (x >= 1.5) & (x <= 2.5)
    v[m] = 5.0 * (np.sin(6.0 * np.pi * x[m] + 0.5 * np.pi) + 1.0)
    v[(x >= 2.65) & (x <= 2.85)] = 5.0
    return v


def _elliptic_profile(x: np.ndarray) -> np.ndarray:
    v = np.zeros_like(x)
    v[(x >= 1.3) & (x < 1.6)] = 0.8
    v[(x >= 1.6) & (x < 1.8)] = 1.4
    m = (x >= 1.8) & (x < 2.2)
    v[m] = 13.0 * (x[m] - 1.8) * (x[m] - 2.2) + 1.4
    v[(x >= 2.2) & (x < 2.4)] = 1.4
    v[(x >= 2.4) & (x < 2.7)] = 0.8
    return v


_PROFILES = {
    "deconvolution": _deconvolution_profile,
    "heat_source": _heat_source_profile,
    "elliptic_param": _elliptic_profile,
}


def true_profile(example: str, grid: GridSpec) -> Field:
    """Nodal evaluation of the benchmark's exact piecewise profile."""
    try:
        profile = _PROFILES[example]
    except KeyError:
        raise ConfigurationError(f"unknown example {example!r}") from None
    return Field(profile(grid.x_nodes), grid)


def synthesize_data(model, u_true: Field, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Noisy observation y = G(u_true) + sigma * standard normal draws."""
    if sigma < 0:
        raise ConfigurationError(f"noise level must be >= 0, got {sigma}")
    clean = model.apply(u_true.values)
    return clean + sigma * rng.standard_normal(clean.shape[0])
