"""Piecewise-Legendre projection density estimation with honest confidence bands.

Modules
-------
basis        Legendre polynomials, orthonormal rescalings, piecewise cell bases.
gproc        The finite-rank Gaussian process built on the basis: covariances,
             sup-tail Monte Carlo, Rice up-crossing counts, tail asymptotics.
chi          Optimization of the remainder exponent of the sup-tail expansion.
estimator    The projection density estimator, deviation statistics, bias tools.
bands        Accompanying laws, quantiles, confidence bands, Gumbel normalizers.
experiments  The claw-density study: sampling, CDF convergence, coverage.
cli          Batch command-line front end.
"""

__version__ = "0.1.0"

from .bands import AccompanyingLaw, ConfidenceBand, SbrNormalizers
from .basis import BasisSpec, PlateauError
from .estimator import EstimateResult, ProjectionDensityEstimator, Sample
from .gproc import GaussianProcessModel, SupTailEstimate

__all__ = [
    "AccompanyingLaw",
    "BasisSpec",
    "ConfidenceBand",
    "EstimateResult",
    "GaussianProcessModel",
    "PlateauError",
    "ProjectionDensityEstimator",
    "Sample",
    "SbrNormalizers",
    "SupTailEstimate",
    "__version__",
]
