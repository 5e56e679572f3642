"""Legendre bases: reference polynomials, orthonormal rescalings, piecewise cells.

The reference system lives on [-1, 1].  ``psi`` gives the orthonormal basis
affinely rescaled to an arbitrary interval [A, B]; ``psi_cell`` gives the
sqrt(M)-scaled copy on the m-th of M equal subintervals, which stays
orthonormal on its cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# evaluation points may overshoot [-1, 1] by at most this much
DOMAIN_TOL = 1e-12

# Gauss-Legendre order used for inner products (exact through degree 255)
QUAD_NODES = 128


class PlateauError(RuntimeError):
    """Variance maximum is attained on a plateau instead of finitely many points."""

    def __init__(self, message, S=None, argmax=None):
        super().__init__(message)
        self.S = S
        self.argmax = argmax


def _check_reference_domain(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < -1.0 - DOMAIN_TOL) or np.any(t > 1.0 + DOMAIN_TOL):
        bad = t[(t < -1.0 - DOMAIN_TOL) | (t > 1.0 + DOMAIN_TOL)]
        raise ValueError(f"point {bad.flat[0]!r} outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def legendre_table(J, t):
    """All P_0..P_J at points t via the Bonnet recurrence, shape (J+1, len(t))."""
    t = np.atleast_1d(_check_reference_domain(t))
    out = np.empty((J + 1, t.size))
    out[0] = 1.0
    if J >= 1:
        out[1] = t
    for j in range(1, J):
        out[j + 1] = ((2 * j + 1) * t * out[j] - j * out[j - 1]) / (j + 1)
    return out


def legendre(j: int, x) -> float | np.ndarray:
    """Legendre polynomial P_j(x) on [-1, 1]."""
    if j < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    res = legendre_table(j, x.ravel())[j].reshape(x.shape)
    return float(res) if res.ndim == 0 else res


def legendre_deriv_table(J, t, order=1):
    """P_j', or P_j'', for j=0..J, shape (J+1, len(t)).

    Interior points use (1-t^2) P_j' = j (P_{j-1} - t P_j) and the Legendre ODE
    (1-t^2) P_j'' = 2 t P_j' - j(j+1) P_j; at t = +-1 the analytic limits
    P_j'(+-1) = (+-1)^{j-1} j(j+1)/2 and P_j''(+-1) = (+-1)^j (j-1)j(j+1)(j+2)/8
    replace the 0/0 quotients.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    t = np.atleast_1d(_check_reference_domain(t))
    p = legendre_table(J, t)
    j = np.arange(J + 1)[:, None].astype(float)
    one_m_t2 = 1.0 - t * t
    at_edge = one_m_t2 < 1e-9
    safe = np.where(at_edge, 1.0, one_m_t2)

    pm1 = np.vstack([np.zeros_like(t), p[:-1]]) if J >= 1 else np.zeros_like(p)
    d1 = j * (pm1 - t * p) / safe
    sign = np.where(t < 0, (-1.0) ** (j - 1), 1.0)
    d1 = np.where(at_edge, sign * j * (j + 1) / 2.0, d1)
    if order == 1:
        return d1
    d2 = (2.0 * t * d1 - j * (j + 1) * p) / safe
    sign2 = np.where(t < 0, (-1.0) ** j, 1.0)
    edge2 = sign2 * (j - 1) * j * (j + 1) * (j + 2) / 8.0
    return np.where(at_edge, edge2, d2)


def legendre_deriv(j: int, x, order: int = 1) -> float | np.ndarray:
    """First or second derivative of P_j on [-1, 1]."""
    if j < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float)
    res = legendre_deriv_table(j, x.ravel(), order)[j].reshape(x.shape)
    return float(res) if res.ndim == 0 else res


@dataclass(frozen=True)
class BasisSpec:
    """Legendre basis of degree <= J on [A, B], optionally cut into M cells."""

    J: int
    interval: tuple[float, float] = (-1.0, 1.0)
    M: int = 1

    def __post_init__(self):
        A, B = self.interval
        if self.J < 0:
            raise ValueError("J must be >= 0")
        if not A < B:
            raise ValueError("interval must satisfy A < B")
        if self.M < 1:
            raise ValueError("M must be >= 1")

    @property
    def A(self) -> float:
        return self.interval[0]

    @property
    def B(self) -> float:
        return self.interval[1]

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def delta(self) -> float:
        """Cell length (B - A) / M."""
        return self.width / self.M

    def cell_bounds(self, m: int) -> tuple[float, float]:
        if not 1 <= m <= self.M:
            raise IndexError(f"cell index {m} outside 1..{self.M}")
        return (self.A + self.delta * (m - 1), self.A + self.delta * m)

    def cell_index(self, x):
        """Cell containing x: cells are left-closed, the last one also right-closed."""
        x = np.asarray(x, dtype=float)
        if np.any(x < self.A - DOMAIN_TOL * max(1.0, abs(self.A))) or np.any(
            x > self.B + DOMAIN_TOL * max(1.0, abs(self.B))
        ):
            raise ValueError(f"point outside [{self.A}, {self.B}]")
        idx = np.floor((x - self.A) / self.delta).astype(int) + 1
        idx = np.clip(idx, 1, self.M)
        return int(idx) if idx.ndim == 0 else idx

    def to_reference(self, x):
        """Affine map [A, B] -> [-1, 1]."""
        return (2.0 * np.asarray(x, dtype=float) - self.A - self.B) / self.width


def psi_matrix(spec: BasisSpec, x, order: int = 0) -> np.ndarray:
    """Values (or derivatives) of psi_0..psi_J on [A, B], shape (J+1, len(x)).

    psi_j(x) = sqrt(2/(B-A)) * sqrt((2j+1)/2) * P_j(map(x)); each derivative
    order picks up a chain factor 2/(B-A).
    """
    t = np.atleast_1d(spec.to_reference(x))
    if order == 0:
        table = legendre_table(spec.J, t)
    else:
        table = legendre_deriv_table(spec.J, t, order)
    norms = np.sqrt((2.0 * np.arange(spec.J + 1) + 1.0) / spec.width)
    chain = (2.0 / spec.width) ** order
    return table * norms[:, None] * chain


def psi(spec: BasisSpec, j: int, x) -> float | np.ndarray:
    """Orthonormal basis function psi_j on [A, B] (unpartitioned)."""
    if not 0 <= j <= spec.J:
        raise IndexError(f"basis index {j} outside 0..{spec.J}")
    x = np.asarray(x, dtype=float)
    res = psi_matrix(spec, x.ravel())[j].reshape(x.shape)
    return float(res) if res.ndim == 0 else res


def psi_deriv(spec: BasisSpec, j: int, x, order: int = 1) -> float | np.ndarray:
    """Derivative of psi_j on [A, B]."""
    if not 0 <= j <= spec.J:
        raise IndexError(f"basis index {j} outside 0..{spec.J}")
    x = np.asarray(x, dtype=float)
    res = psi_matrix(spec, x.ravel(), order)[j].reshape(x.shape)
    return float(res) if res.ndim == 0 else res


def cell_matrix(spec: BasisSpec, x, cells=None) -> np.ndarray:
    """Values of psi_j^{(m)} at points x lying in their assigned cells.

    Returns shape (J+1, len(x)).  ``cells`` overrides the cell assignment
    (1-based); by default each point uses ``spec.cell_index``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if cells is None:
        cells = spec.cell_index(x)
    cells = np.atleast_1d(cells)
    a_m = spec.A + spec.delta * (cells - 1)
    y = spec.M * (x - a_m) + spec.A
    # fp guard: the rescaled point may overshoot B by a few ulps
    y = np.clip(y, spec.A, spec.B)
    return np.sqrt(spec.M) * psi_matrix(spec, y)


def psi_cell(spec: BasisSpec, m: int, j: int, x) -> float | np.ndarray:
    """Cell basis function psi_j^{(m)}(x) = sqrt(M) psi_j(M(x - a_m) + A); 0 off the cell."""
    if not 0 <= j <= spec.J:
        raise IndexError(f"basis index {j} outside 0..{spec.J}")
    a_m, b_m = spec.cell_bounds(m)
    x = np.asarray(x, dtype=float)
    flat = np.atleast_1d(x).astype(float)
    inside = (flat >= a_m) & (flat <= b_m)
    vals = np.zeros_like(flat)
    if np.any(inside):
        vals[inside] = cell_matrix(spec, flat[inside], np.full(inside.sum(), m))[j]
    res = vals.reshape(x.shape)
    return float(res) if res.ndim == 0 else res


def sigma2(spec: BasisSpec, t) -> float | np.ndarray:
    """Variance sum_{j<=J} psi_j(t)^2 of the basis process on [A, B]."""
    t = np.asarray(t, dtype=float)
    res = np.sum(psi_matrix(spec, t.ravel()) ** 2, axis=0).reshape(t.shape)
    return float(res) if res.ndim == 0 else res


def sigma2_deriv(spec: BasisSpec, t) -> float | np.ndarray:
    """(sigma^2)'(t) = 2 sum psi_j(t) psi_j'(t)."""
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    res = 2.0 * np.sum(psi_matrix(spec, flat) * psi_matrix(spec, flat, 1), axis=0)
    res = res.reshape(t.shape)
    return float(res) if res.ndim == 0 else res


def variance_max(spec: BasisSpec, grid_n: int = 10_000):
    """Maximum S of sigma^2 and its argmax points, by grid search plus refinement.

    Raises PlateauError when more than J + 2 local maxima tie at the top,
    i.e. the finitely-many-maxima assumption fails (constant variance at J=0).
    """
    if spec.M != 1:
        raise ValueError("variance_max applies to the unpartitioned basis (M=1)")
    grid = np.linspace(spec.A, spec.B, grid_n)
    vals = sigma2(spec, grid)
    s_max = float(vals.max())
    if s_max - float(vals.min()) <= 1e-12 * max(s_max, 1.0):
        raise PlateauError(
            "variance is constant on the whole interval (degenerate plateau)",
            S=s_max,
            argmax=None,
        )

    # candidate maxima: interior grid peaks refined by bisection on (sigma^2)',
    # plus the two endpoints
    candidates = []
    interior = np.where((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:]))[0] + 1
    for i in interior:
        lo, hi = grid[i - 1], grid[i + 1]
        dlo, dhi = sigma2_deriv(spec, lo), sigma2_deriv(spec, hi)
        if dlo > 0 > dhi:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if hi - lo < 1e-14 * spec.width:
                    break
                if sigma2_deriv(spec, mid) > 0:
                    lo = mid
                else:
                    hi = mid
            candidates.append(0.5 * (lo + hi))
        else:
            candidates.append(float(grid[i]))
    candidates.extend([spec.A, spec.B])
    candidates = np.array(sorted(set(candidates)))
    cand_vals = sigma2(spec, candidates)
    s_star = float(cand_vals.max())
    tie = np.abs(cand_vals - s_star) <= 1e-9 * max(s_star, 1.0)
    argmax = [float(c) for c in candidates[tie]]
    if len(argmax) > spec.J + 2:
        raise PlateauError(
            f"{len(argmax)} variance maxima tie within tolerance",
            S=s_star,
            argmax=argmax,
        )
    return s_star, argmax


def gauss_legendre_nodes(n: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on [a, b]."""
    t, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * t + 0.5 * (a + b), half * w


def inner_product(spec: BasisSpec, f, g, n_nodes: int = QUAD_NODES) -> float:
    """Integral of f*g over [A, B] by fixed-order Gauss-Legendre quadrature."""
    x, w = gauss_legendre_nodes(n_nodes, spec.A, spec.B)
    return float(np.sum(w * f(x) * g(x)))
