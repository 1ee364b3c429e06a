"""Preconditioned Crank-Nicolson sampling of the posterior measure."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericalError
from .fracops import Field, GridSpec
from .prior import CovarianceOperator

__all__ = [
    "PosteriorModel",
    "Chain",
    "potential",
    "pcn_propose",
    "acceptance_prob",
    "run_chain",
]


@dataclass(frozen=True)
class PosteriorModel:
    """Negative log-posterior terms relative to the Gaussian reference measure.

    ``forward=None`` (or ``sigma=0``) switches the data-misfit term off and
    ``penalty=None`` the regularization term, which gives the null model whose
    energy is identically zero; the chain then samples the reference measure.
    """

    forward: object | None = None
    y: np.ndarray | None = None
    sigma: float = 1.0
    penalty: object | None = None

    def potential(self, values: np.ndarray) -> float:
        if self.forward is None or self.sigma == 0.0:
            return 0.0
        residual = (self.forward.apply(values) - self.y) / self.sigma
        return 0.5 * float(residual @ residual)

    def regularization(self, values: np.ndarray) -> float:
        if self.penalty is None:
            return 0.0
        return self.penalty.evaluate(values)

    def energy(self, values: np.ndarray) -> float:
        return self.potential(values) + self.regularization(values)


def potential(u: Field, model: PosteriorModel) -> float:
    """Data-misfit term 0.5 * ||(G(u) - y) / sigma||^2."""
    return model.potential(u.values)


def pcn_propose(u: np.ndarray, beta: float, w: np.ndarray) -> np.ndarray:
    """Proposal sqrt(1 - beta^2) * u + beta * w."""
    return math.sqrt(1.0 - beta * beta) * u + beta * w


def acceptance_prob(u: np.ndarray, v: np.ndarray, model: PosteriorModel) -> float:
    """min(1, exp(energy(u) - energy(v)))."""
    diff = model.energy(u) - model.energy(v)
    return 1.0 if diff >= 0.0 else math.exp(diff)


@dataclass(frozen=True)
class Chain:
    """Stored states and per-iteration bookkeeping of one sampler run.

    ``states`` holds the post-burn-in states at the thinning stride (plus the
    initial state when there is no burn-in); ``energies`` and ``accept_flags``
    cover every iteration.
    """

    states: np.ndarray
    state_energies: np.ndarray
    energies: np.ndarray
    accept_flags: np.ndarray
    beta: float
    seed: int
    grid: GridSpec

    @property
    def acceptance_rate(self) -> float:
        return float(self.accept_flags.mean())

    def __len__(self) -> int:
        return self.states.shape[0]


def run_chain(
    model: PosteriorModel,
    cov: CovarianceOperator,
    beta: float,
    iterations: int,
    burn_in: int = 0,
    thinning: int = 1,
    seed: int = 0,
    u0: Field | np.ndarray | None = None,
) -> Chain:
    """Run the preconditioned Crank-Nicolson kernel.

    Each iteration draws w from the reference measure, proposes
    v = sqrt(1 - beta^2) u + beta w, draws theta uniform on [0, 1] and accepts
    when theta <= min(1, exp(energy(u) - energy(v))).  A single generator
    (PCG64, seeded with ``seed``) drives the reference draws and the uniform
    draws in strict alternation, so runs are reproducible.
    """
    if not 0.0 < beta <= 1.0:
        raise ConfigurationError(f"beta must lie in (0, 1], got {beta}")
    if burn_in >= iterations:
        raise ConfigurationError(f"burn_in ({burn_in}) must be below iterations ({iterations})")
    if thinning < 1:
        raise ConfigurationError(f"thinning must be >= 1, got {thinning}")

    n = cov.grid.n_nodes
    rng = np.random.default_rng(seed)
    if u0 is None:
        u = np.zeros(n)
    else:
        u = np.array(u0.values if isinstance(u0, Field) else u0, dtype=float)
        if u.shape != (n,):
            raise ConfigurationError("initial state does not match the grid")

    e_u = model.energy(u)
    if not np.isfinite(e_u):
        raise NumericalError(f"non-finite energy {e_u} at the initial state")

    n_stored = (iterations - burn_in) // thinning + (1 if burn_in == 0 else 0)
    states = np.empty((n_stored, n))
    state_energies = np.empty(n_stored)
    energies = np.empty(iterations)
    accept_flags = np.zeros(iterations, dtype=bool)

    stored = 0
    if burn_in == 0:
        states[0] = u
        state_energies[0] = e_u
        stored = 1

    factor = cov.factor
    keep = math.sqrt(1.0 - beta * beta)
    for i in range(1, iterations + 1):
        w = factor @ rng.standard_normal(n)
        v = keep * u + beta * w
        e_v = model.energy(v)
        if not np.isfinite(e_v):
            raise NumericalError(
                f"non-finite energy {e_v} at iteration {i}; "
                "the forward model or penalty is mis-configured"
            )
        diff = e_u - e_v
        accept = 1.0 if diff >= 0.0 else math.exp(diff)
        theta = rng.uniform()
        if theta <= accept:
            u = v
            e_u = e_v
            accept_flags[i - 1] = True
        energies[i - 1] = e_u
        if i > burn_in and (i - burn_in) % thinning == 0:
            states[stored] = u
            state_energies[stored] = e_u
            stored += 1

    return Chain(
        states=states,
        state_energies=state_energies,
        energies=energies,
        accept_flags=accept_flags,
        beta=beta,
        seed=seed,
        grid=cov.grid,
    )
