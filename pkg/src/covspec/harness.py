"""Monte Carlo replication harness and theoretical covariance evaluation.

Replicates are mutually independent, seeded by (seed, replicate), and may
run on any number of worker threads; results land in their own row so the
assembled matrix never depends on scheduling.  Theory comes in two
independently computed flavors: a double contour integral of the covariance
kernel, and the simplified variance formula available when the population
spectrum is a single point mass.
"""

from __future__ import annotations

import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .eigen import eig_decompose
from .functionals import FunctionalSpec, poly_product
from .kernels import Contour, contour_pair, kernel_from_mbar, mbar_on_nodes
from .law import LimitLaw, mean_functional
from .model import ModelConfig, build_sample_cov, realize_direction, realize_population
from .mp import solve_mbar
from .spectrum import SpectralMeasure
from .weighted import weighted_spectrum, y_process

WORKERS_ENV = "COVSPEC_WORKERS"


def _worker_count(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def realized_law(cfg: ModelConfig) -> LimitLaw:
    """Limit law at the realized ratio n/N and realized population measure."""
    tdiag = realize_population(cfg.population, cfg.n)
    return LimitLaw(c=cfg.n / cfg.N, H=SpectralMeasure.empirical(tdiag))


def run_replications(cfg: ModelConfig, gs: Sequence[FunctionalSpec], R: int,
                     workers: Optional[int] = None) -> np.ndarray:
    """R x k matrix of linear spectral statistics, one replicate per row.

    Row r is computed from the stream keyed on (cfg.seed, r), so the matrix
    is identical no matter how many workers execute it.
    """
    if R < 2:
        raise ValueError("need at least 2 replications")
    gs = list(gs)
    law = realized_law(cfg)
    if any(g.needs_positive_support for g in gs) and not (0 < cfg.ratio < 1):
        raise ValueError("log functionals need 0 < n/N < 1")
    x = realize_direction(cfg.direction, cfg.n)
    means = np.array([mean_functional(law, g) for g in gs])
    rootN = np.sqrt(cfg.N)
    out = np.empty((R, len(gs)))

    def one(r: int):
        try:
            es = eig_decompose(build_sample_cov(cfg, replicate=r))
            ws = weighted_spectrum(es, x)
            for j, g in enumerate(gs):
                gv = np.asarray(g(ws.lambdas), dtype=float)
                out[r, j] = rootN * (np.dot(ws.weights, gv) - means[j])
        except Exception as exc:
            raise RuntimeError(f"replicate {r} failed: {exc}") from exc

    nworkers = _worker_count(workers)
    if nworkers == 1:
        for r in range(R):
            one(r)
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            list(pool.map(one, range(R)))
    return out


def estimate_mean_cov(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean vector and unbiased covariance matrix of the rows."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] < 2:
        raise ValueError("need an R x k matrix with R >= 2")
    mean = values.mean(axis=0)
    cov = np.atleast_2d(np.cov(values, rowvar=False, ddof=1))
    return mean, cov


def theoretical_cov_contour(g1: FunctionalSpec, g2: FunctionalSpec,
                            H: SpectralMeasure, c: float,
                            contour1: Optional[Contour] = None,
                            contour2: Optional[Contour] = None,
                            case: str = "real",
                            imag_warn: float = 1e-6) -> float:
    """Theoretical covariance by double contour integration of the kernel.

    The two rectangles must be disjoint (one strictly inside the other),
    both enclosing the support.  Composite trapezoid on midpoint-shifted
    nodes; the conjugate-symmetric node sets make the imaginary part cancel,
    and any residue beyond ``imag_warn`` triggers a warning.
    """
    if contour1 is None or contour2 is None:
        c1, c2 = contour_pair(H, c)
        contour1 = contour1 or c1
        contour2 = contour2 or c2
    if contour1.intersects(contour2):
        raise ValueError("contours intersect; use nested rectangles")
    from .mp import support_interval
    lo, hi = support_interval(H, c)
    for cont in (contour1, contour2):
        if not (cont.u_l < lo if lo > 0 else cont.u_l < 0) or cont.u_r <= hi:
            raise ValueError("contour does not enclose the support")
        if (g1.needs_positive_support or g2.needs_positive_support) and cont.u_l <= 0:
            raise ValueError("log functional needs contours with u_l > 0")
    z1, w1, m1 = mbar_on_nodes(contour1, H, c)
    z2, w2, m2 = mbar_on_nodes(contour2, H, c)
    g1v = g1(z1) * w1
    g2v = g2(z2) * w2
    total = 0.0 + 0.0j
    chunk = 1024
    for start in range(0, z1.size, chunk):
        sl = slice(start, start + chunk)
        k = kernel_from_mbar(z1[sl, None], m1[sl, None], z2[None, :], m2[None, :],
                             c, case=case)
        total += np.sum(g1v[sl, None] * g2v[None, :] * k)
    val = -total / (4.0 * np.pi ** 2)
    if abs(val.imag) > imag_warn:
        warnings.warn(f"contour covariance imaginary residue {val.imag:.2e}")
    return float(val.real)


def theoretical_cov_simplified(g1: FunctionalSpec, g2: FunctionalSpec,
                               law: LimitLaw) -> float:
    """Simplified covariance (2/c) * (E[g1 g2] - E[g1] E[g2]) under the law.

    Valid only for a degenerate population spectrum; exact through moments
    for polynomials, density quadrature when logs are involved.
    """
    if not law.H.is_degenerate:
        raise ValueError("simplified covariance requires a degenerate population spectrum")
    if g1.kind == "poly" and g2.kind == "poly":
        cross = mean_functional(law, poly_product(g1, g2))
        m1 = mean_functional(law, g1)
        m2 = mean_functional(law, g2)
    else:
        x, f = law.density_grid
        from scipy.interpolate import PchipInterpolator

        def integrate(vals):
            s = PchipInterpolator(x, f * vals).antiderivative()
            return float(s(x[-1]) - s(x[0]))

        g1v = np.asarray(g1(x), dtype=float)
        g2v = np.asarray(g2(x), dtype=float)
        cross = integrate(g1v * g2v)
        m1 = integrate(g1v)
        m2 = integrate(g2v)
    return float(2.0 / law.c * (cross - m1 * m2))


def bb_samples(cfg: ModelConfig, grid: Sequence[float], R: int,
               workers: Optional[int] = None) -> np.ndarray:
    """R x len(grid) matrix of partial-sum process values across replicates."""
    grid = np.asarray(grid, dtype=float)
    x = realize_direction(cfg.direction, cfg.n)
    out = np.empty((R, grid.size))

    def one(r: int):
        es = eig_decompose(build_sample_cov(cfg, replicate=r))
        ws = weighted_spectrum(es, x)
        for j, t in enumerate(grid):
            out[r, j] = y_process(ws, t)

    nworkers = _worker_count(workers)
    if nworkers == 1:
        for r in range(R):
            one(r)
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            list(pool.map(one, range(R)))
    return out


def bb_covariance(cfg: ModelConfig, grid: Sequence[float], R: int,
                  workers: Optional[int] = None) -> np.ndarray:
    """Empirical covariance of the partial-sum process on a time grid.

    Only meaningful in the exactly-rotation-invariant case: real Gaussian
    entries with a scalar population matrix.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any((grid <= 0) | (grid >= 1)):
        raise ValueError("grid values must lie strictly inside (0, 1)")
    if cfg.entry_dist != "real-gaussian" or not cfg.population.spectrum.is_degenerate:
        raise ValueError("bridge check needs real-gaussian entries and a scalar population")
    samples = bb_samples(cfg, grid, R, workers=workers)
    return np.atleast_2d(np.cov(samples, rowvar=False, ddof=1))


def bb_target(grid: Sequence[float]) -> np.ndarray:
    """Brownian-bridge covariance min(s,t) - s*t on the grid."""
    g = np.asarray(grid, dtype=float)
    return np.minimum(g[:, None], g[None, :]) - g[:, None] * g[None, :]


@dataclass
class MCReport:
    """Summary of one Monte Carlo covariance verification run."""

    R: int
    functionals: list
    sample_mean: np.ndarray
    sample_cov: np.ndarray
    theory_cov_contour: np.ndarray
    theory_cov_simplified: Optional[np.ndarray]
    standard_errors: np.ndarray
    n: int
    N: int
    seed: int
    entry_dist: str
    wall_time: float

    def to_dict(self) -> dict:
        return {
            "R": self.R,
            "functionals": list(self.functionals),
            "sample_mean": self.sample_mean.tolist(),
            "sample_cov": self.sample_cov.tolist(),
            "theory_cov_contour": self.theory_cov_contour.tolist(),
            "theory_cov_simplified": (None if self.theory_cov_simplified is None
                                      else self.theory_cov_simplified.tolist()),
            "standard_errors": self.standard_errors.tolist(),
            "n": self.n,
            "N": self.N,
            "seed": self.seed,
            "entry_dist": self.entry_dist,
            "wall_time": self.wall_time,
        }


def run_clt(cfg: ModelConfig, gs: Sequence[FunctionalSpec], R: int,
            workers: Optional[int] = None, nodes_per_side: int = 512) -> MCReport:
    """Full verification run: replicate, estimate, and evaluate both theory paths."""
    t0 = time.perf_counter()
    gs = list(gs)
    values = run_replications(cfg, gs, R, workers=workers)
    mean, cov = estimate_mean_cov(values)
    law = realized_law(cfg)
    case = "complex" if cfg.entry_dist == "complex-gaussian" else "real"
    k = len(gs)
    theory = np.empty((k, k))
    c1, c2 = contour_pair(law.H, law.c, nodes_per_side=nodes_per_side)
    for i in range(k):
        for j in range(i, k):
            theory[i, j] = theory[j, i] = theoretical_cov_contour(
                gs[i], gs[j], law.H, law.c, c1, c2, case=case)
    simplified = None
    if law.H.is_degenerate:
        simplified = np.empty((k, k))
        for i in range(k):
            for j in range(i, k):
                val = theoretical_cov_simplified(gs[i], gs[j], law)
                if case == "complex":
                    val /= 2.0
                simplified[i, j] = simplified[j, i] = val
    return MCReport(
        R=R,
        functionals=[g.label for g in gs],
        sample_mean=mean,
        sample_cov=cov,
        theory_cov_contour=theory,
        theory_cov_simplified=simplified,
        standard_errors=np.sqrt(np.diag(cov) / R),
        n=cfg.n,
        N=cfg.N,
        seed=cfg.seed,
        entry_dist=cfg.entry_dist,
        wall_time=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class Tolerances:
    abs_tol: float = 0.0
    rel_tol: float = 0.0

    @classmethod
    def monte_carlo(cls, R: int) -> "Tolerances":
        # 3 standard errors of a variance estimate plus a finite-n allowance
        return cls(abs_tol=0.0, rel_tol=3.0 * np.sqrt(2.0 / R) + 0.10)


@dataclass
class CompareVerdict:
    passed: bool
    failures: list


def compare_report(mc: MCReport, tolerances: Tolerances) -> CompareVerdict:
    """Entrywise |sample - theory| <= abs_tol + rel_tol*|theory| verdict."""
    sample = np.asarray(mc.sample_cov)
    theory = np.asarray(mc.theory_cov_contour)
    if sample.shape != theory.shape:
        raise ValueError("sample and theory covariance shapes differ")
    failures = []
    k = sample.shape[0]
    for i in range(k):
        for j in range(k):
            bound = tolerances.abs_tol + tolerances.rel_tol * abs(theory[i, j])
            if abs(sample[i, j] - theory[i, j]) > bound:
                failures.append({"entry": (i, j), "sample": float(sample[i, j]),
                                 "theory": float(theory[i, j]), "bound": float(bound)})
    return CompareVerdict(passed=not failures, failures=failures)


def direction_condition_gap(tdiag: np.ndarray, x: np.ndarray, mbar: complex, N: int) -> float:
    """Finite-n mismatch between the direction's resolvent weight and its average.

    sqrt(N) * | x*(mbar T + I)^(-1) x  -  integral dH_n/(mbar t + 1) |;
    identically zero for scalar T, required to vanish asymptotically for the
    Gaussian limit to hold for a given (population, direction) pair.
    """
    tdiag = np.asarray(tdiag, dtype=float)
    lhs = np.sum(np.abs(x) ** 2 / (mbar * tdiag + 1.0))
    h = SpectralMeasure.empirical(tdiag)
    rhs = np.sum(h.weights / (mbar * h.atoms + 1.0))
    return float(np.sqrt(N) * abs(lhs - rhs))


def condition_profile(population, direction, c: float, z: complex,
                      ns: Sequence[int] = (100, 200, 400)) -> list[float]:
    """Direction-condition gap across dimensions; warns if it is not decreasing."""
    gaps = []
    for n in ns:
        N = int(round(n / c))
        tdiag = realize_population(population, n)
        x = realize_direction(direction, n)
        h = SpectralMeasure.empirical(tdiag)
        sol = solve_mbar(z, h, n / N)
        gaps.append(direction_condition_gap(tdiag, x, sol.mbar, N))
    if any(b > a for a, b in zip(gaps, gaps[1:])):
        warnings.warn(f"direction-condition gap is not decreasing across n={tuple(ns)}: {gaps}")
    return gaps
