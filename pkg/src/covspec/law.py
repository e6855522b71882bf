"""The limiting spectral law: density, distribution function, moments.

The law is pinned down by the ratio c and the population measure H.  Its
density on the real line is recovered from the solved transform by boundary
evaluation just above the axis with Richardson extrapolation in the offset;
the distribution function adds the point mass max(0, 1 - 1/c) at zero that
appears once the dimension exceeds the sample count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .functionals import FunctionalSpec
from .kernels import contour_around_support
from .mp import (ConvergenceError, continuous_support, solve_mbar_grid,
                 support_interval)
from .spectrum import SpectralMeasure

_EPS_LADDER = (1e-3, 5e-4, 2.5e-4)
_GRID_MAX_ITER = 30000


@dataclass
class LimitLaw:
    """Limiting sample-spectrum distribution for ratio c and population H.

    Density and CDF grids are built lazily on first use and then reused;
    instances are read-only after that, so sharing across threads is safe.
    """

    c: float
    H: SpectralMeasure
    grid_points: int = 2001
    pad: float = 0.05
    _grid_x: Optional[np.ndarray] = field(default=None, repr=False)
    _grid_f: Optional[np.ndarray] = field(default=None, repr=False)
    _grid_F: Optional[np.ndarray] = field(default=None, repr=False)
    _cdf_spline: Optional[object] = field(default=None, repr=False)
    _mean_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("ratio c must be positive")

    @property
    def atom_at_zero(self) -> float:
        return max(0.0, 1.0 - 1.0 / self.c)

    def bulk_window(self) -> tuple[float, float]:
        """Padded interval around the continuous part of the spectrum."""
        lo, hi = continuous_support(self.H, self.c)
        span = hi - lo if hi > lo else hi
        floor = lo / 2.0 if lo > 0 else 1e-9
        return max(lo - self.pad * span, floor), hi + self.pad * span

    def ensure_grids(self):
        if self._grid_x is not None:
            return
        x = _edge_clustered_grid(self, self.grid_points)
        # finer offset ladder than the default: the cached grid feeds
        # quadrature, so the edge boundary layers must be thin
        f = np.maximum(density(x, self, eps=2.5e-4), 0.0)
        spline = PchipInterpolator(x, f).antiderivative()
        self._grid_x = x
        self._grid_f = f
        self._cdf_spline = spline
        self._grid_F = self.atom_at_zero + np.asarray(spline(x)) - float(spline(x[0]))

    @property
    def density_grid(self) -> tuple[np.ndarray, np.ndarray]:
        self.ensure_grids()
        return self._grid_x, self._grid_f

    @property
    def cdf_grid(self) -> tuple[np.ndarray, np.ndarray]:
        self.ensure_grids()
        return self._grid_x, self._grid_F

    def total_mass(self) -> float:
        self.ensure_grids()
        return float(self._grid_F[-1])

    def continuous_cdf(self, x) -> np.ndarray:
        """Mass of the continuous part up to x."""
        self.ensure_grids()
        lo, hi = self._grid_x[0], self._grid_x[-1]
        xx = np.clip(np.asarray(x, dtype=float), lo, hi)
        return np.asarray(self._cdf_spline(xx)) - float(self._cdf_spline(lo))


def _bulk_edges(H: SpectralMeasure, c: float) -> np.ndarray:
    """Real stationary values of the inverse map: candidate bulk edges.

    Stationary points satisfy 1/m^2 = c * sum w_k t_k^2/(1 + t_k m)^2, a
    polynomial condition; mapping real roots through the inverse gives the
    edge locations where the density has square-root behavior.
    """
    from numpy.polynomial import polynomial as npoly

    t, w = H.atoms, H.weights
    prod_all = np.array([1.0])
    for tk in t:
        prod_all = npoly.polymul(prod_all, npoly.polypow([1.0, tk], 2))
    total = prod_all.copy()
    for k, tk in enumerate(t):
        partial = np.array([1.0])
        for j, tj in enumerate(t):
            if j != k:
                partial = npoly.polymul(partial, npoly.polypow([1.0, tj], 2))
        term = npoly.polymul([0.0, 0.0, c * w[k] * tk ** 2], partial)
        total = npoly.polysub(total, term)
    roots = npoly.polyroots(total)
    real = roots[np.abs(roots.imag) < 1e-9 * (1 + np.abs(roots.real))].real
    edges = []
    for m in real:
        if m == 0 or np.any(np.abs(1.0 + t * m) < 1e-12):
            continue
        edges.append(-1.0 / m + c * np.sum(w * t / (1.0 + t * m)))
    return np.unique(np.asarray(edges, dtype=float))


def _edge_clustered_grid(law: LimitLaw, total: int) -> np.ndarray:
    """Composite cosine grid refined at every candidate spectral edge."""
    lo, hi = law.bulk_window()
    span = hi - lo
    inner = [e for e in _bulk_edges(law.H, law.c) if lo + 1e-9 * span < e < hi - 1e-9 * span]
    breaks = np.array([lo] + sorted(inner) + [hi])
    # drop near-coincident breakpoints
    keep = np.concatenate([[True], np.diff(breaks) > 1e-9 * span])
    breaks = breaks[keep]
    lengths = np.diff(breaks)
    counts = np.maximum((total * lengths / lengths.sum()).astype(int), 65)
    pieces = []
    for (a, b), npts in zip(zip(breaks[:-1], breaks[1:]), counts):
        theta = np.linspace(np.pi, 0.0, npts)
        pieces.append(0.5 * (a + b) + 0.5 * (b - a) * np.cos(theta))
    return np.unique(np.concatenate(pieces))


def density(x, law: LimitLaw, eps: float = _EPS_LADDER[0]):
    """Density of the limiting law at x (scalar or array).

    Evaluates Im m(x + i*eps)/pi on a three-level geometric ladder of
    offsets and Richardson-extrapolates, which cancels the first- and
    second-order offset errors.  Tiny negatives from the extrapolation are
    clamped to zero.
    """
    scalar = np.isscalar(x)
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    if law.atom_at_zero > 0 and np.any(xx == 0):
        raise ValueError("density undefined at the atom; use cdf_limit")
    vals = []
    guess = None
    for k, e in enumerate((eps, eps / 2.0, eps / 4.0)):
        z = xx + 1j * e
        mbar, res, _ = solve_mbar_grid(z, law.H, law.c, max_iter=_GRID_MAX_ITER,
                                       initial=guess)
        worst = float(res.max())
        if worst > 1e-12:
            raise ConvergenceError("density evaluation failed", worst)
        guess = mbar
        m = (mbar + (1.0 - law.c) / z) / law.c
        vals.append(m.imag / np.pi)
    f1, f2, f3 = vals
    out = (8.0 * f3 - 6.0 * f2 + f1) / 3.0
    out = np.where((out < 0) & (out >= -1e-8), 0.0, out)
    return float(out[0]) if scalar else out


def cdf_limit(x, law: LimitLaw):
    """Distribution function of the limiting law at x, in [0, 1]."""
    scalar = np.isscalar(x)
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.clip(law.continuous_cdf(xx), 0.0, 1.0) + law.atom_at_zero * (xx >= 0)
    out = np.minimum(out, 1.0)
    return float(out[0]) if scalar else out


def _degenerate_moment(k: int, c: float, t: float) -> float:
    # classic Marchenko-Pastur moments, scaled by the atom
    if k == 0:
        return 1.0
    s = sum(comb(k, r) * comb(k - 1, r) / (r + 1) * c ** r for r in range(k))
    return t ** k * s


def limit_moments(law: LimitLaw, k: int) -> float:
    """k-th moment of the limiting law.

    Closed form for a degenerate population, grid quadrature otherwise.
    """
    if k < 0:
        raise ValueError("moment order must be nonnegative")
    if k == 0:
        return 1.0
    if law.H.is_degenerate:
        return _degenerate_moment(k, law.c, law.H.t_min)
    x, f = law.density_grid
    integrand = PchipInterpolator(x, f * x ** k).antiderivative()
    return float(integrand(x[-1]) - integrand(x[0]))


def mean_functional_density(law: LimitLaw, g: FunctionalSpec) -> float:
    """Integral of g against the law by quadrature on the cached density grid."""
    if g.needs_positive_support:
        lo, _ = law.bulk_window()
        if lo <= 0 or law.atom_at_zero > 0:
            raise ValueError("log functional needs the spectrum bounded away from zero")
    x, f = law.density_grid
    integrand = PchipInterpolator(x, f * np.asarray(g(x), dtype=float)).antiderivative()
    val = float(integrand(x[-1]) - integrand(x[0]))
    if law.atom_at_zero > 0:
        val += law.atom_at_zero * float(g(0.0))
    return val


def mean_functional(law: LimitLaw, g: FunctionalSpec, method: str = "auto") -> float:
    """Integral of g against the limiting law.

    'auto' uses exact moments for polynomials under a degenerate population
    and otherwise a contour integral of g(z) m(z) around the support, which
    is far more accurate than quadrature of the extrapolated density.
    """
    key = (g.kind, g.coeffs, method)
    if key in law._mean_cache:
        return law._mean_cache[key]
    if method == "density":
        val = mean_functional_density(law, g)
    elif g.kind == "poly" and law.H.is_degenerate:
        val = float(sum(coef * limit_moments(law, d) for d, coef in enumerate(g.coeffs)))
    else:
        val = _mean_functional_contour(law, g)
    law._mean_cache[key] = val
    return val


def _mean_functional_contour(law: LimitLaw, g: FunctionalSpec, nodes_per_side: int = 1024) -> float:
    lo, hi = support_interval(law.H, law.c)
    if g.needs_positive_support and (lo <= 0 or law.atom_at_zero > 0):
        raise ValueError("log functional needs the spectrum bounded away from zero")
    contour = contour_around_support(law.H, law.c, margin=0.05, v0=1.0,
                                     nodes_per_side=nodes_per_side)
    z, w = contour.nodes()
    mbar, res, _ = solve_mbar_grid(z, law.H, law.c, max_iter=_GRID_MAX_ITER)
    worst = float(res.max())
    if worst > 1e-12:
        raise ConvergenceError("contour mean evaluation failed", worst)
    m = (mbar + (1.0 - law.c) / z) / law.c
    total = np.sum(g(z) * m * w)
    val = (-total / (2j * np.pi)).real
    if law.atom_at_zero > 0 and contour.u_l > 0:
        # contour misses the mass at zero; add it back
        val += law.atom_at_zero * float(g(0.0))
    return float(val)
