"""The claw-density study: sampling, CDF convergence, band coverage.

The target is the five-spike normal mixture ("claw"): a N(0,1) half plus five
narrow N(j/2 - 1, 0.01) spikes at weight 1/10 each, estimated on [-3, 3].
For each sample size the scaled deviation sqrt(n/M) * D_n is computed over
independent runs, its empirical CDF is compared to the accompanying law, and
simultaneous band coverage is measured.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._rng import derived_seed, substream
from .bands import AccompanyingLaw, accompanying_cdf, half_width_k
from .basis import BasisSpec
from .estimator import (
    OutsideIntervalWarning,
    Sample,
    default_n_cells,
    fit,
    max_deviation,
    projection_coeffs,
)
from .gproc import build_model

CLAW_INTERVAL = (-3.0, 3.0)


@dataclass(frozen=True)
class MixtureDensity:
    """Normal mixture with analytic moments."""

    weights: tuple[float, ...]
    means: tuple[float, ...]
    variances: tuple[float, ...]

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        if any(w <= 0 for w in self.weights) or any(v <= 0 for v in self.variances):
            raise ValueError("weights and variances must be positive")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for w, mu, var in zip(self.weights, self.means, self.variances):
            total += w * np.exp(-0.5 * (x - mu) ** 2 / var) / math.sqrt(2.0 * math.pi * var)
        return total

    __call__ = pdf

    def mean(self) -> float:
        return sum(w * mu for w, mu in zip(self.weights, self.means))

    def variance(self) -> float:
        second = sum(w * (var + mu * mu) for w, mu, var in zip(self.weights, self.means, self.variances))
        return second - self.mean() ** 2

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        cum = np.cumsum(self.weights)
        comp = np.searchsorted(cum, rng.random(n))
        comp = np.minimum(comp, len(self.weights) - 1)
        z = rng.standard_normal(n)
        mu = np.asarray(self.means)[comp]
        sd = np.sqrt(np.asarray(self.variances))[comp]
        return mu + sd * z


CLAW = MixtureDensity(
    weights=(0.5, 0.1, 0.1, 0.1, 0.1, 0.1),
    means=(0.0, -1.0, -0.5, 0.0, 0.5, 1.0),
    variances=(1.0, 0.01, 0.01, 0.01, 0.01, 0.01),
)


def claw_density(x):
    """The claw mixture density."""
    return CLAW.pdf(x)


def sample_claw(n: int, seed: int) -> Sample:
    """n claw draws from the Philox stream keyed by seed, on the [-3, 3] interval."""
    if n < 1:
        raise ValueError("n must be >= 1")
    values = CLAW.sample(n, substream(seed))
    return Sample(values=values, interval=CLAW_INTERVAL)


def claw_law(J: int, M: int) -> AccompanyingLaw:
    """Accompanying law for the degree-J basis on [-3, 3] cut into M cells."""
    model = build_model(BasisSpec(J=J, interval=CLAW_INTERVAL))
    return AccompanyingLaw(S=model.S, k=model.n_maxima, M=M)


@dataclass(frozen=True)
class ExperimentReport:
    """Scaled-deviation statistics and their Kolmogorov distances to the law."""

    n_values: tuple[int, ...]
    runs: int
    J: int
    exponent: float
    seed: int
    m_values: tuple[int, ...]
    sup_distance: tuple[float, ...]
    statistics: tuple[tuple[float, ...], ...]
    run_seeds: tuple[tuple[int, ...], ...]
    coverage: float | None = None

    def to_dict(self) -> dict:
        return {
            "n_values": list(self.n_values),
            "runs": self.runs,
            "J": self.J,
            "exponent": self.exponent,
            "seed": self.seed,
            "m_values": list(self.m_values),
            "sup_distance": list(self.sup_distance),
            "statistics": [list(s) for s in self.statistics],
            "run_seeds": [list(s) for s in self.run_seeds],
            "coverage": self.coverage,
        }


def kolmogorov_distance(values, law: AccompanyingLaw) -> float:
    """sup_t |ECDF(t) - A_M(t)|, evaluated at the empirical jumps and at c_M."""
    t = np.sort(np.asarray(values, dtype=float))
    r = t.size
    a_vals = accompanying_cdf(law, t)
    hi = np.arange(1, r + 1) / r
    lo = np.arange(0, r) / r
    d = max(float(np.max(np.abs(hi - a_vals))), float(np.max(np.abs(lo - a_vals))))
    ecdf_left = np.count_nonzero(t < law.c_M) / r
    ecdf_at = np.count_nonzero(t <= law.c_M) / r
    d = max(d, ecdf_left)  # A_M is 0 left of the jump
    d = max(d, abs(ecdf_at - accompanying_cdf(law, law.c_M)))
    return min(d, 1.0)


def _scaled_deviation_run(spec, law, n, run_seed, grid_per_cell, expected_coeffs):
    sample = sample_claw(n, run_seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OutsideIntervalWarning)
        result = fit(sample, J=spec.J, M=spec.M)
    d_n, _ = max_deviation(result, claw_density, grid_per_cell, expected_coeffs)
    return math.sqrt(n / spec.M) * d_n, result


def figure_ff_pipeline(
    n_values,
    runs: int,
    J: int = 4,
    exponent: float = 2.0 / 3.0,
    seed: int = 0,
    grid_per_cell: int = 32,
) -> ExperimentReport:
    """Per sample size: fit `runs` claw samples, compare sqrt(n/M) D_n with the law.

    Run r of the i-th sample size draws from the child seed derived from
    (seed, i, r), so the whole report is a pure function of its arguments.
    """
    if runs < 10:
        raise ValueError("runs must be >= 10")
    if not 1.0 / 3.0 < exponent < 1.0:
        raise ValueError("the cell exponent must lie in (1/3, 1)")
    n_values = tuple(int(n) for n in n_values)
    m_values = []
    distances = []
    all_stats = []
    all_seeds = []
    for i, n in enumerate(n_values):
        m = default_n_cells(n, exponent)
        spec = BasisSpec(J=J, interval=CLAW_INTERVAL, M=m)
        law = claw_law(J, m)
        expected = projection_coeffs(spec, claw_density)
        seeds = [derived_seed(seed, i, r) for r in range(runs)]
        stats = [
            _scaled_deviation_run(spec, law, n, s, grid_per_cell, expected)[0] for s in seeds
        ]
        m_values.append(m)
        distances.append(kolmogorov_distance(stats, law))
        all_stats.append(tuple(stats))
        all_seeds.append(tuple(seeds))
    return ExperimentReport(
        n_values=n_values,
        runs=runs,
        J=J,
        exponent=exponent,
        seed=seed,
        m_values=tuple(m_values),
        sup_distance=tuple(distances),
        statistics=tuple(all_stats),
        run_seeds=tuple(all_seeds),
    )


def coverage_study(
    n: int,
    runs: int,
    alpha: float,
    seed: int = 0,
    J: int = 4,
    exponent: float = 2.0 / 3.0,
    grid_per_cell: int = 32,
) -> float:
    """Fraction of runs whose band contains the claw density over the whole grid.

    Simultaneous containment is equivalent to sqrt(n/M) D_n <= q_{alpha,M},
    i.e. to the grid deviation staying below the band parameter k.
    """
    if runs < 10:
        raise ValueError("runs must be >= 10")
    if not 1.0 / 3.0 < exponent < 1.0:
        raise ValueError("the cell exponent must lie in (1/3, 1)")
    m = default_n_cells(n, exponent)
    spec = BasisSpec(J=J, interval=CLAW_INTERVAL, M=m)
    law = claw_law(J, m)
    k, _ = half_width_k(law, n, alpha)
    expected = projection_coeffs(spec, claw_density)
    hits = 0
    for r in range(runs):
        run_seed = derived_seed(seed, 0, r)
        stat, _ = _scaled_deviation_run(spec, law, n, run_seed, grid_per_cell, expected)
        if stat <= math.sqrt(n / m) * k:
            hits += 1
    return hits / runs
