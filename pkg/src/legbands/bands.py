"""Accompanying laws and honest confidence bands for the projection estimate.

The law A_M(x) = exp(-M * tail(x)) for x >= c_M (0 below) approximates the
distribution of sqrt(n/M) * D_n, with tail(u) = 2k(1 - Phi(u/sqrt(S))) built
from the k boundary maxima of the cell process.  Inverting the quadratic
inequality |p_hat - p| <= k_alpha sqrt(p) in sqrt(p) turns its (1-alpha)
quantile into a simultaneous band around p_hat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import optimize

from .estimator import EstimateResult, _cell_basis_at, _cell_grid
from .gproc import norm_cdf


@dataclass(frozen=True)
class AccompanyingLaw:
    """Distribution function with cutoff c_M = sqrt(2 S ln M) - S and Gaussian tail terms."""

    S: float
    k: int
    M: int

    def __post_init__(self):
        if self.S <= 0:
            raise ValueError("S must be positive")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.M < 2:
            raise ValueError("M must be >= 2")

    @property
    def c_M(self) -> float:
        return math.sqrt(2.0 * self.S * math.log(self.M)) - self.S

    def tail(self, u):
        """Sum of the per-maximum sup-tail terms, 2k(1 - Phi(u / sqrt(S)))."""
        z = np.asarray(u, dtype=float) / math.sqrt(self.S)
        return 2.0 * self.k * (1.0 - norm_cdf(z))

    def to_dict(self) -> dict:
        return {"S": self.S, "k": self.k, "M": self.M, "c_M": self.c_M}


def accompanying_cdf(law: AccompanyingLaw, x):
    """A_M(x): the exp branch on [c_M, inf), zero below the cutoff."""
    x = np.asarray(x, dtype=float)
    vals = np.where(x >= law.c_M, np.exp(-law.M * law.tail(x)), 0.0)
    return float(vals) if vals.ndim == 0 else vals


class Quantile(NamedTuple):
    value: float
    at_jump: bool


def quantile(law: AccompanyingLaw, alpha: float) -> Quantile:
    """(1-alpha) quantile of A_M by bisection; flags when it sits at the jump c_M."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    target = 1.0 - alpha
    if accompanying_cdf(law, law.c_M) >= target:
        return Quantile(value=law.c_M, at_jump=True)
    hi = law.c_M + 20.0 * math.sqrt(law.S)
    if accompanying_cdf(law, hi) < target:
        raise ValueError(f"quantile bracket too small for alpha={alpha}")
    q = optimize.brentq(
        lambda u: accompanying_cdf(law, u) - target, law.c_M, hi, xtol=1e-12, rtol=8.9e-16
    )
    return Quantile(value=float(q), at_jump=False)


def half_width_k(law: AccompanyingLaw, n: int, alpha: float) -> tuple[float, bool]:
    """Band parameter k = sqrt(M/n) * q_{alpha, M}."""
    q = quantile(law, alpha)
    return math.sqrt(law.M / n) * q.value, q.at_jump


def band_envelopes(p_hat, k: float):
    """Solve |p_hat - p| <= k sqrt(p) for p: roots p_hat + k^2/2 -+ sqrt(p_hat k^2 + k^4/4).

    Where the radicand is negative (p_hat < -k^2/4) the solution set is empty
    and both envelopes are reported as 0.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    radicand = p_hat * k * k + k**4 / 4.0
    empty = radicand < 0.0
    root = np.sqrt(np.where(empty, 0.0, radicand))
    mid = p_hat + k * k / 2.0
    lower = np.where(empty, 0.0, np.maximum(mid - root, 0.0))
    upper = np.where(empty, 0.0, mid + root)
    return lower, upper, empty


def membership(p_hat, p, k: float):
    """The defining inequality |p_hat - p| <= k sqrt(p) (p must be >= 0)."""
    p_hat = np.asarray(p_hat, dtype=float)
    p = np.asarray(p, dtype=float)
    return np.abs(p_hat - p) <= k * np.sqrt(p)


@dataclass(frozen=True)
class ConfidenceBand:
    """Pointwise envelopes of the simultaneous (1-alpha) band on an evaluation grid."""

    alpha: float
    k_alpha_M: float
    grid: np.ndarray
    lower: np.ndarray
    p_hat: np.ndarray
    upper: np.ndarray
    n_negative: int
    n_empty: int
    at_jump: bool

    def covers(self, truth_values) -> bool:
        """Whether the truth lies inside the band simultaneously over the grid."""
        p = np.asarray(truth_values, dtype=float)
        return bool(np.all((self.lower <= p) & (p <= self.upper)))


def build_band(
    result: EstimateResult, law: AccompanyingLaw, alpha: float, grid_per_cell: int = 32
) -> ConfidenceBand:
    """Band around the fitted estimate on the per-cell grid."""
    k, at_jump = half_width_k(law, result.n, alpha)
    spec = result.spec
    rel, points = _cell_grid(spec, grid_per_cell)
    p_hat = (result.coeffs @ _cell_basis_at(spec, rel)).ravel()
    grid = points.ravel()
    lower, upper, empty = band_envelopes(p_hat, k)
    return ConfidenceBand(
        alpha=alpha,
        k_alpha_M=k,
        grid=grid,
        lower=lower,
        p_hat=p_hat,
        upper=upper,
        n_negative=int(np.count_nonzero(p_hat < 0)),
        n_empty=int(np.count_nonzero(empty)),
        at_jump=at_jump,
    )


@dataclass(frozen=True)
class SbrNormalizers:
    """Centering/scaling under which A_M approaches the Gumbel law exp(-e^{-x})."""

    S: float
    c0: float
    a_M: float
    Lambda_M: float

    def u(self, x):
        """u_M(x) = a_M + x S / a_M."""
        return self.a_M + np.asarray(x, dtype=float) * self.S / self.a_M


def sbr_normalizers(law: AccompanyingLaw, c0: float) -> SbrNormalizers:
    """Normalizers a_M, u_M and the correction size Lambda_M = (ln ln M)^2 / (16 ln M).

    a_M = c - (S/c) ln(c / c0) with c = sqrt(2 S ln M); this choice makes
    M * tail(a_M) -> 1, so A_M(u_M(x)) -> exp(-e^{-x}) with error O(Lambda_M).
    """
    if law.M < 3:
        raise ValueError("M must be >= 3 for the Gumbel normalizers")
    if c0 <= 0:
        raise ValueError("c0 must be positive")
    log_m = math.log(law.M)
    c = math.sqrt(2.0 * law.S * log_m)
    a_m = c - (law.S / c) * math.log(c / c0)
    lam = math.log(log_m) ** 2 / (16.0 * log_m)
    return SbrNormalizers(S=law.S, c0=c0, a_M=a_m, Lambda_M=lam)
