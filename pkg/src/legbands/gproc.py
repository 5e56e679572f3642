"""The Gaussian process Y(t) = sum_j psi_j(t) Z_j on [A, B].

Covariances and their partial derivatives come analytically from the basis;
sup tails are estimated by Monte Carlo on a fine grid and compared against
the boundary-maximum asymptote; expected up-crossing counts use the Rice
integral with the conditional-mean/variance reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from ._rng import substream
from .basis import BasisSpec, psi_matrix, sigma2, sigma2_deriv, variance_max

_SQRT2PI = math.sqrt(2.0 * math.pi)

DEFAULT_GRID_SIZE = 4001
_BATCH = 2048


def norm_cdf(x):
    """Standard normal CDF via the complementary error function."""
    return ndtr(x)


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / _SQRT2PI


@dataclass(frozen=True)
class GaussianProcessModel:
    """Process spec plus its variance maximum S, argmax set and tail constant."""

    spec: BasisSpec
    S: float
    argmax: tuple[float, ...]
    c0: float

    @property
    def n_maxima(self) -> int:
        return len(self.argmax)


@dataclass(frozen=True)
class SupTailEstimate:
    u: float
    p_hat: float
    std_err: float
    n_rep: int
    grid_size: int
    seed: int


@dataclass(frozen=True)
class CrossingEstimate:
    """Monte Carlo mean up-crossing count with a Poisson-floored standard error."""

    u: float
    mean: float
    std_err: float
    total_crossings: int
    n_rep: int
    grid_size: int
    seed: int


def build_model(spec: BasisSpec) -> GaussianProcessModel:
    """Assemble the process model; the tail constant is k * sqrt(2 S / pi)."""
    if spec.M != 1:
        raise ValueError("the Gaussian process model uses the unpartitioned basis (M=1)")
    S, argmax = variance_max(spec)
    c0 = len(argmax) * math.sqrt(2.0 * S / math.pi)
    return GaussianProcessModel(spec=spec, S=S, argmax=tuple(argmax), c0=c0)


def covariance(model: GaussianProcessModel, k: int, l: int, s, t):
    """r_kl(s, t) = sum_j psi_j^(k)(s) psi_j^(l)(t) for k, l in {0, 1, 2}."""
    if k not in (0, 1, 2) or l not in (0, 1, 2):
        raise ValueError("derivative orders must be 0, 1 or 2")
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    shape = np.broadcast_shapes(s.shape, t.shape)
    sb = np.broadcast_to(s, shape).ravel()
    tb = np.broadcast_to(t, shape).ravel()
    left = psi_matrix(model.spec, sb, order=k)
    right = psi_matrix(model.spec, tb, order=l)
    res = np.sum(left * right, axis=0).reshape(shape)
    return float(res) if res.ndim == 0 else res


def _replicate_normals(seed: int, start: int, count: int, dim: int) -> np.ndarray:
    out = np.empty((count, dim))
    for i in range(count):
        out[i] = substream(seed, start + i).standard_normal(dim)
    return out


def simulate_sup(
    model: GaussianProcessModel,
    u: float,
    n_rep: int,
    grid_size: int = DEFAULT_GRID_SIZE,
    seed: int = 0,
) -> SupTailEstimate:
    """Monte Carlo estimate of P{ sup |Y(t)| >= u } by grid maxima.

    Replicate i draws its Z-vector from the Philox stream keyed by (seed, i),
    so the result is a pure function of (seed, n_rep, grid_size).
    """
    if n_rep < 1:
        raise ValueError("n_rep must be >= 1")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    spec = model.spec
    grid = np.linspace(spec.A, spec.B, grid_size)
    basis = psi_matrix(spec, grid)  # (J+1, grid)
    hits = 0
    for start in range(0, n_rep, _BATCH):
        count = min(_BATCH, n_rep - start)
        Z = _replicate_normals(seed, start, count, spec.J + 1)
        sup = np.max(np.abs(Z @ basis), axis=1)
        hits += int(np.count_nonzero(sup >= u))
    p_hat = hits / n_rep
    std_err = math.sqrt(p_hat * (1.0 - p_hat) / n_rep)
    return SupTailEstimate(
        u=float(u), p_hat=p_hat, std_err=std_err, n_rep=n_rep, grid_size=grid_size, seed=seed
    )


def asymptotic_tail(model: GaussianProcessModel, u: float) -> float:
    """Leading sup-tail term: 2(1 - Phi(u / sqrt(S))) per boundary variance maximum.

    Only valid when every variance maximum sits at an endpoint with nonzero
    variance slope (the boundary case of the expansion); otherwise the
    up-crossing term would enter and no closed form is packaged here.
    """
    if u <= 0:
        raise ValueError("u must be positive")
    spec = model.spec
    tol = 1e-9 * spec.width
    slope_scale = 1e-8 * max(model.S / spec.width, 1.0)
    for point in model.argmax:
        if abs(point - spec.A) > tol and abs(point - spec.B) > tol:
            raise ValueError(f"variance maximum at interior point {point}: no packaged tail")
        if abs(sigma2_deriv(spec, point)) <= slope_scale:
            raise ValueError(f"variance slope vanishes at maximum {point}: no packaged tail")
    z = u / math.sqrt(model.S)
    return float(model.n_maxima * 2.0 * (1.0 - norm_cdf(z)))


def positive_part_mean(m: float, d: float) -> float:
    """E[X 1{X > 0}] for X ~ N(m, d^2): m Phi(m/d) + d phi(m/d)."""
    if d <= 0:
        raise ValueError("d must be positive")
    z = m / d
    return float(m * norm_cdf(z) + d * norm_pdf(z))


def rice_upcrossings(model: GaussianProcessModel, u: float, region: tuple[float, float]) -> float:
    """Expected number of up-crossings of level u on the region, by the Rice integral.

    E N_u^+ = int (2 pi)^{-1/2} sigma(t)^{-1} exp(-u^2/(2 sigma^2(t)))
                  * [m(t) Phi(m/d) + d(t) phi(m/d)] dt,
    with m(t) = u r_10(t,t) / r(t,t) and d^2(t) = r_11(t,t) - r_10^2(t,t)/r(t,t).
    """
    lo, hi = region
    spec = model.spec
    if not (spec.A - 1e-12 <= lo < hi <= spec.B + 1e-12):
        raise ValueError(f"region {region} not inside [{spec.A}, {spec.B}]")

    def integrand(t):
        r = covariance(model, 0, 0, t, t)
        if r <= 0:
            raise FloatingPointError(f"zero variance at t={t}")
        r10 = covariance(model, 1, 0, t, t)
        r11 = covariance(model, 1, 1, t, t)
        d2 = r11 - r10 * r10 / r
        if d2 <= 0:
            raise FloatingPointError(f"degenerate conditional derivative at t={t}")
        m = u * r10 / r
        sig = math.sqrt(r)
        return (
            math.exp(-u * u / (2.0 * r))
            / (_SQRT2PI * sig)
            * positive_part_mean(m, math.sqrt(d2))
        )

    value, _ = integrate.quad(integrand, lo, hi, epsabs=1e-12, epsrel=1e-10, limit=200)
    return float(value)


def simulate_upcrossings(
    model: GaussianProcessModel,
    u: float,
    region: tuple[float, float],
    n_rep: int,
    grid_size: int = 2001,
    seed: int = 0,
) -> CrossingEstimate:
    """Monte Carlo mean count of strict up-crossings of level u on a trajectory grid.

    A crossing is a grid step where Y - u moves from <= 0 to > 0.  The standard
    error carries a Poisson floor sqrt(total + 1)/n_rep so the estimate stays
    usable when crossings are rare.
    """
    if n_rep < 1:
        raise ValueError("n_rep must be >= 1")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    lo, hi = region
    spec = model.spec
    if not (spec.A - 1e-12 <= lo < hi <= spec.B + 1e-12):
        raise ValueError(f"region {region} not inside [{spec.A}, {spec.B}]")
    grid = np.linspace(lo, hi, grid_size)
    basis = psi_matrix(spec, grid)
    total = 0
    sum_sq = 0.0
    for start in range(0, n_rep, _BATCH):
        count = min(_BATCH, n_rep - start)
        Z = _replicate_normals(seed, start, count, spec.J + 1)
        traj = Z @ basis
        below = traj[:, :-1] <= u
        above = traj[:, 1:] > u
        crossings = np.count_nonzero(below & above, axis=1)
        total += int(crossings.sum())
        sum_sq += float(np.sum(crossings.astype(float) ** 2))
    mean = total / n_rep
    var = max(sum_sq / n_rep - mean * mean, 0.0)
    sample_se = math.sqrt(var / n_rep)
    std_err = max(sample_se, math.sqrt(total + 1.0) / n_rep)
    return CrossingEstimate(
        u=float(u),
        mean=mean,
        std_err=std_err,
        total_crossings=total,
        n_rep=n_rep,
        grid_size=grid_size,
        seed=seed,
    )
