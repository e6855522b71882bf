"""Random matrix model: population realization, directions, sample covariance.

The model draws an n x N matrix X of i.i.d. standardized entries, and forms
the sample covariance A = (1/N) T^(1/2) X X* T^(1/2) for a diagonal
nonnegative population matrix T realized from a discrete spectral measure.
Replicates are seeded through a counter-based generator keyed on
(seed, replicate) so results never depend on execution order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .spectrum import SpectralMeasure

ENTRY_DISTS = ("real-gaussian", "complex-gaussian", "rademacher", "uniform-rescaled")

_SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class PopulationSpec:
    """Population covariance description: the spectral measure of T."""

    spectrum: SpectralMeasure

    @classmethod
    def identity(cls) -> "PopulationSpec":
        return cls(SpectralMeasure.point(1.0))


@dataclass(frozen=True)
class DirectionSpec:
    """How to pick the fixed unit vector the eigenvector weights project onto.

    ``basis(i)`` gives the i-th standard basis vector, ``uniform()`` the
    constant vector (1,...,1)/sqrt(n), ``custom(v)`` normalizes ``v``.
    """

    kind: str
    index: int = 0
    vector: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("basis", "uniform", "custom"):
            raise ValueError(f"unknown direction kind {self.kind!r}")
        if self.kind == "custom":
            if self.vector is None or len(self.vector) == 0:
                raise ValueError("custom direction needs a vector")

    @classmethod
    def basis(cls, index: int = 0) -> "DirectionSpec":
        return cls(kind="basis", index=index)

    @classmethod
    def uniform(cls) -> "DirectionSpec":
        return cls(kind="uniform")

    @classmethod
    def custom(cls, vector) -> "DirectionSpec":
        return cls(kind="custom", vector=tuple(np.asarray(vector).tolist()))


@dataclass(frozen=True)
class ModelConfig:
    """Full experiment description for one sample covariance draw."""

    n: int
    N: int
    entry_dist: str
    population: PopulationSpec
    direction: DirectionSpec
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ValueError("n must be >= 1")
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 1):
            raise ValueError("N must be >= 1")
        if self.entry_dist not in ENTRY_DISTS:
            raise ValueError(f"entry_dist must be one of {ENTRY_DISTS}")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def ratio(self) -> float:
        """Dimension-to-sample ratio c_n = n/N."""
        return self.n / self.N


def replicate_rng(seed: int, replicate: int = 0) -> np.random.Generator:
    """Counter-based generator for one replicate, keyed on (seed, replicate)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate),))
    return np.random.Generator(np.random.Philox(ss))


def realize_population(spec: PopulationSpec, n: int) -> np.ndarray:
    """Diagonal of T: atom multiplicities by largest-remainder rounding of n*w.

    Ties among remainders go to the smaller atom.  Raises if n is smaller
    than the number of atoms carrying positive weight.
    """
    meas = spec.spectrum
    k = meas.atoms.size
    if n < k:
        raise ValueError("dimension too small")
    ideal = n * meas.weights
    counts = np.floor(ideal).astype(int)
    leftover = n - counts.sum()
    if leftover > 0:
        remainders = ideal - counts
        # stable sort on (-remainder, atom): largest remainder first, ties to smaller atom
        order = np.lexsort((meas.atoms, -remainders))
        counts[order[:leftover]] += 1
    return np.repeat(meas.atoms, counts)


def realize_direction(spec: DirectionSpec, n: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Unit vector of length n according to the direction spec."""
    if spec.kind == "basis":
        if not (0 <= spec.index < n):
            raise ValueError(f"basis index {spec.index} out of range for n={n}")
        x = np.zeros(n)
        x[spec.index] = 1.0
        return x
    if spec.kind == "uniform":
        return np.full(n, 1.0 / np.sqrt(n))
    v = np.asarray(spec.vector, dtype=complex if np.iscomplexobj(spec.vector) else float)
    if v.size != n:
        raise ValueError(f"custom vector has length {v.size}, expected {n}")
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("custom direction vector is zero")
    return v / norm


def draw_entries(entry_dist: str, n: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """n x N matrix of i.i.d. entries with mean 0 and unit second absolute moment."""
    if entry_dist == "real-gaussian":
        return rng.standard_normal((n, N))
    if entry_dist == "complex-gaussian":
        re = rng.standard_normal((n, N))
        im = rng.standard_normal((n, N))
        return (re + 1j * im) / np.sqrt(2.0)
    if entry_dist == "rademacher":
        return rng.integers(0, 2, size=(n, N)).astype(float) * 2.0 - 1.0
    if entry_dist == "uniform-rescaled":
        return rng.uniform(-_SQRT3, _SQRT3, size=(n, N))
    raise ValueError(f"unknown entry distribution {entry_dist!r}")


def build_sample_cov(cfg: ModelConfig, replicate: int = 0, entries: Optional[np.ndarray] = None) -> np.ndarray:
    """Sample covariance A = (1/N) T^(1/2) X X* T^(1/2), Hermitian nonnegative.

    ``entries`` overrides the random draw with a fixed n x N matrix (test hook).
    """
    tdiag = realize_population(cfg.population, cfg.n)
    if entries is None:
        rng = replicate_rng(cfg.seed, replicate)
        x = draw_entries(cfg.entry_dist, cfg.n, cfg.N, rng)
    else:
        x = np.asarray(entries)
        if x.shape != (cfg.n, cfg.N):
            raise ValueError(f"entries must have shape {(cfg.n, cfg.N)}")
    root = np.sqrt(tdiag)
    y = root[:, None] * x
    a = (y @ y.conj().T) / cfg.N
    # force exact Hermitian symmetry against roundoff
    return (a + a.conj().T) / 2.0


def companion_sample_cov(cfg: ModelConfig, replicate: int = 0) -> np.ndarray:
    """The N x N companion (1/N) X* T X sharing the nonzero spectrum of A."""
    tdiag = realize_population(cfg.population, cfg.n)
    rng = replicate_rng(cfg.seed, replicate)
    x = draw_entries(cfg.entry_dist, cfg.n, cfg.N, rng)
    y = np.sqrt(tdiag)[:, None] * x
    b = (y.conj().T @ y) / cfg.N
    return (b + b.conj().T) / 2.0
