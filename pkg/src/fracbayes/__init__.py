"""Bayesian inversion with fractional total-variation hybrid priors.

Gaussian reference measures, discrete fractional-order total variation built
from Grunwald weights, three benchmark forward problems (deconvolution, heat
source recovery, elliptic coefficient identification), and a preconditioned
Crank-Nicolson sampler with posterior summaries and a command-line runner.
"""

from .errors import ConfigurationError, NumericalError
from .fracops import (
    Field,
    FracOrder,
    GridSpec,
    PsiKind,
    PsiMap,
    RieszOperator,
    ftv,
    grunwald_weights,
    make_psi_map,
    riesz_derivative,
    sobolev_norm,
)
from .prior import (
    CovarianceOperator,
    FirstOrderTvPenalty,
    FractionalTvPenalty,
    build_covariance,
    sample_gaussian,
)

__version__ = "0.1.0"
