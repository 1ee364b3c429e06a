"""Coordinate maps, Grunwald weights, and discrete Riesz fractional derivatives.

The discrete operators act on nodal values over a grid that is uniform in the
mapped coordinate s = psi(x).  For psi(x) = x this is the classical uniform
grid; for psi(x) = ln(x) or exp(x) the physical nodes are non-uniform and the
one-sided schemes are applied to the composed function u(x(s)) on the s-grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "PsiKind",
    "PsiMap",
    "GridSpec",
    "FracOrder",
    "Field",
    "RieszOperator",
    "make_psi_map",
    "grunwald_weights",
    "riesz_derivative",
    "ftv",
    "sobolev_norm",
]


class PsiKind(enum.Enum):
    IDENTITY = "x"
    LOG = "ln"
    EXP = "exp"


@dataclass(frozen=True)
class PsiMap:
    """Increasing coordinate map s = psi(x), with inverse x(s) and derivatives.

    ``psi_prime`` must be nonzero on the working domain so that the inverse
    map and its derivatives x'(s) = 1/psi'(x(s)) and x''(s) are defined.
    """

    kind: PsiKind
    psi: Callable[[np.ndarray], np.ndarray]
    psi_prime: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    x_prime: Callable[[np.ndarray], np.ndarray]
    x_second: Callable[[np.ndarray], np.ndarray]


def _as_float(x):
    return np.asarray(x, dtype=float)


_PSI_MAPS = {
    PsiKind.IDENTITY: PsiMap(
        kind=PsiKind.IDENTITY,
        psi=lambda x: _as_float(x) + 0.0,
        psi_prime=lambda x: np.ones_like(_as_float(x)),
        inverse=lambda s: _as_float(s) + 0.0,
        x_prime=lambda s: np.ones_like(_as_float(s)),
        x_second=lambda s: np.zeros_like(_as_float(s)),
    ),
    PsiKind.LOG: PsiMap(
        kind=PsiKind.LOG,
        psi=lambda x: np.log(_as_float(x)),
        psi_prime=lambda x: 1.0 / _as_float(x),
        inverse=lambda s: np.exp(_as_float(s)),
        x_prime=lambda s: np.exp(_as_float(s)),
        x_second=lambda s: np.exp(_as_float(s)),
    ),
    PsiKind.EXP: PsiMap(
        kind=PsiKind.EXP,
        psi=lambda x: np.exp(_as_float(x)),
        psi_prime=lambda x: np.exp(_as_float(x)),
        inverse=lambda s: np.log(_as_float(s)),
        x_prime=lambda s: 1.0 / _as_float(s),
        x_second=lambda s: -1.0 / _as_float(s) ** 2,
    ),
}

_KIND_ALIASES = {
    "x": PsiKind.IDENTITY,
    "identity": PsiKind.IDENTITY,
    "ln": PsiKind.LOG,
    "log": PsiKind.LOG,
    "exp": PsiKind.EXP,
}


def make_psi_map(kind: PsiKind | str, domain: tuple[float, float] | None = None) -> PsiMap:
    """Return the coordinate map for ``kind``, validating it against ``domain``.

    The log map requires a strictly positive domain.
    """
    if isinstance(kind, str):
        try:
            kind = _KIND_ALIASES[kind.lower()]
        except KeyError:
            raise ConfigurationError(f"unknown coordinate map kind {kind!r}") from None
    if domain is not None and kind is PsiKind.LOG and domain[0] <= 0.0:
        raise ConfigurationError(
            f"log coordinate map needs a positive domain, got left endpoint {domain[0]}"
        )
    return _PSI_MAPS[kind]


@dataclass(frozen=True)
class GridSpec:
    """Grid of ``n_nodes`` points, uniform in s = psi(x) over [psi(a), psi(b)]."""

    a: float
    b: float
    n_nodes: int
    psi: PsiMap = field(default=_PSI_MAPS[PsiKind.IDENTITY])

    def __post_init__(self):
        if not self.b > self.a:
            raise ConfigurationError(f"need b > a, got [{self.a}, {self.b}]")
        if self.n_nodes < 3:
            raise ConfigurationError("grid needs at least 3 nodes")
        if self.psi.kind is PsiKind.LOG and self.a <= 0.0:
            raise ConfigurationError("log coordinate map needs a > 0")

    @property
    def n_intervals(self) -> int:
        return self.n_nodes - 1

    @cached_property
    def h(self) -> float:
        """Spacing in the s-coordinate."""
        return (float(self.psi.psi(self.b)) - float(self.psi.psi(self.a))) / self.n_intervals

    @cached_property
    def s_nodes(self) -> np.ndarray:
        s0 = float(self.psi.psi(self.a))
        return s0 + self.h * np.arange(self.n_nodes)

    @cached_property
    def x_nodes(self) -> np.ndarray:
        return self.psi.inverse(self.s_nodes)

    @cached_property
    def interior_dx(self) -> np.ndarray:
        """Quadrature weights x'(s_l) * h at the interior nodes."""
        return self.psi.x_prime(self.s_nodes[1:-1]) * self.h


@dataclass(frozen=True)
class FracOrder:
    """Fractional order alpha with the associated scheme order n = floor(alpha) + 1.

    Orders in (0, 1) use the unshifted one-sided sums (n = 1); orders in (1, 2)
    use the shifted sums (n = 2).  Integer alpha is rejected unless ``n`` is
    forced explicitly, which exists only so the alpha = 1 degeneration of the
    n = 1 scheme can be exercised.
    """

    alpha: float
    n: int | None = None

    def __post_init__(self):
        if self.n is None:
            if not (0.0 < self.alpha < 1.0 or 1.0 < self.alpha < 2.0):
                raise ConfigurationError(
                    f"fractional order must lie in (0,1) or (1,2), got {self.alpha}"
                )
            object.__setattr__(self, "n", math.floor(self.alpha) + 1)
        else:
            if self.n not in (1, 2):
                raise ConfigurationError(f"scheme order n must be 1 or 2, got {self.n}")
            if not 0.0 < self.alpha <= 2.0:
                raise ConfigurationError(f"fractional order must be positive, got {self.alpha}")


@dataclass(frozen=True)
class Field:
    """Nodal values of a grid function."""

    values: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"field has {values.shape} values for a grid of {self.grid.n_nodes} nodes"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(np.zeros(grid.n_nodes), grid)

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(np.asarray(fn(grid.x_nodes), dtype=float), grid)


def grunwald_weights(alpha: float, count: int) -> np.ndarray:
    """Weights w_0..w_count of the Grunwald difference of order ``alpha``.

    Computed by the stable recursion w_0 = 1, w_j = (1 - (1 + alpha)/j) w_{j-1},
    which equals the alternating binomial coefficients (-1)^j C(alpha, j).
    """
    if alpha <= 0:
        raise ConfigurationError(f"weights need alpha > 0, got {alpha}")
    if count < 1:
        raise ConfigurationError(f"weights need count >= 1, got {count}")
    j = np.arange(1, count + 1, dtype=float)
    w = np.empty(count + 1)
    w[0] = 1.0
    w[1:] = np.cumprod(1.0 - (1.0 + alpha) / j)
    return w


class RieszOperator:
    """Symmetrized one-sided fractional difference operator on a grid.

    The interior rows implement the half-sum of left and right Grunwald sums
    (unshifted for n = 1, shifted for n = 2) scaled by 1/(2 h^alpha); the two
    endpoint rows copy the nearest interior row.  The action is a dense linear
    map, precomputed once so repeated applications are a single matvec.
    """

    def __init__(self, order: FracOrder | float, grid: GridSpec):
        if not isinstance(order, FracOrder):
            order = FracOrder(float(order))
        self.order = order
        self.grid = grid
        self.psi = grid.psi
        # indices up to N+1 are touched by the shifted sums
        self.weights = grunwald_weights(order.alpha, grid.n_nodes)
        self.matrix = self._build_matrix()
        self._interior_matrix = self.matrix[1:-1]
        self._interior_dx = grid.interior_dx

    def _build_matrix(self) -> np.ndarray:
        n_nodes = self.grid.n_nodes
        w = self.weights
        scale = 1.0 / (2.0 * self.grid.h ** self.order.alpha)
        idx = np.arange(n_nodes)
        lag = idx[:, None] - idx[None, :]  # row minus column

        def w_at(k):
            return np.where(k >= 0, w[np.clip(k, 0, len(w) - 1)], 0.0)

        if self.order.n == 1:
            mat = scale * (w_at(lag) - w_at(-lag))
        else:
            mat = scale * (w_at(lag + 1) + w_at(1 - lag))
        mat[0, :] = mat[1, :]
        mat[-1, :] = mat[-2, :]
        return mat

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values

    def ftv_of(self, values: np.ndarray) -> float:
        """Rectangle-rule integral of the absolute derivative over the interior."""
        return float(np.abs(self._interior_matrix @ values) @ self._interior_dx)


def _check_grid(u: Field, op: RieszOperator):
    if u.grid != op.grid:
        raise ValueError("field grid does not match operator grid")


def riesz_derivative(u: Field, op: RieszOperator) -> Field:
    """Apply the discrete symmetrized fractional derivative to ``u``."""
    _check_grid(u, op)
    return Field(op.apply(u.values), u.grid)


def ftv(u: Field, op: RieszOperator) -> float:
    """Fractional total variation: integral of |D u| in the physical coordinate."""
    _check_grid(u, op)
    return op.ftv_of(u.values)


def sobolev_norm(u: Field, op: RieszOperator, p: int) -> float:
    """Norm (sum |u|^p dx + sum |D u|^p dx)^(1/p) over the interior nodes."""
    if p not in (1, 2):
        raise ConfigurationError(f"only p = 1 and p = 2 are supported, got {p}")
    _check_grid(u, op)
    dx = op._interior_dx
    uu = np.abs(u.values[1:-1])
    du = np.abs(op._interior_matrix @ u.values)
    if p == 1:
        return float(uu @ dx + du @ dx)
    return float(math.sqrt(uu ** 2 @ dx + du ** 2 @ dx))
