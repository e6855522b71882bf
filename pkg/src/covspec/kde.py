"""Gaussian kernel density estimation with the Silverman rule."""

from __future__ import annotations

import numpy as np


def silverman_bandwidth(samples: np.ndarray) -> float:
    """1.06 * sigma_hat * R^(-1/5); raises on degenerate samples."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise ValueError("need at least 2 samples")
    sigma = samples.std(ddof=1)
    if sigma == 0:
        raise ValueError("zero bandwidth")
    return float(1.06 * sigma * samples.size ** (-0.2))


def kde(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Gaussian KDE of the samples evaluated on the grid."""
    samples = np.asarray(samples, dtype=float).ravel()
    grid = np.asarray(grid, dtype=float)
    h = silverman_bandwidth(samples)
    u = (grid[:, None] - samples[None, :]) / h
    vals = np.exp(-0.5 * u * u).sum(axis=1) / (samples.size * h * np.sqrt(2 * np.pi))
    return vals


def default_grid(samples: np.ndarray, points: int = 512) -> np.ndarray:
    """Evaluation grid spanning the samples plus four bandwidths on each side."""
    samples = np.asarray(samples, dtype=float)
    h = silverman_bandwidth(samples)
    return np.linspace(samples.min() - 4 * h, samples.max() + 4 * h, points)
