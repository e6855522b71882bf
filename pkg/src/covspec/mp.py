"""Generalized Marchenko-Pastur equation solver and related transforms.

Everything here is phrased in terms of the companion Stieltjes transform
``mbar`` of the limiting sample spectrum: the unique upper-half-plane
solution of

    mbar = -1 / (z - c * integral t / (1 + t*mbar) dH(t)),

where H is the population spectral measure and c the dimension ratio.
The transform of the n-dimensional spectrum itself is recovered through
``m = (mbar + (1 - c)/z) / c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectrum import SpectralMeasure

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10000
_DAMP_FLOOR = 1.0 / 64
_NEWTON_AT = 1e-2


class ConvergenceError(RuntimeError):
    """Fixed-point iteration did not reach tolerance; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class StieltjesSolution:
    """Solution of the self-consistent equation at one point z."""

    z: complex
    mbar: complex
    m: complex
    residual: float
    iterations: int


def solve_mbar_grid(z, H: SpectralMeasure, c: float,
                    tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                    initial=None):
    """Vectorized solve of the companion transform at an array of points.

    Parameters
    ----------
    z : array_like of complex
        Evaluation points, none on the real axis.  Points in the lower
        half-plane are solved at the conjugate and conjugated back.
    H : SpectralMeasure
        Population spectral measure.
    c : float
        Dimension ratio, > 0.
    tol : float
        Bound on the fixed-point residual |mbar + 1/(z - c*I(mbar))|.
    max_iter : int
        Iteration budget per point.
    initial : array_like of complex, optional
        Starting guess; defaults to -1/z.

    Returns
    -------
    (mbar, residual, iterations) arrays of the same shape as ``z``.

    Notes
    -----
    Damped fixed-point iteration: the damping factor starts at 1, is halved
    whenever the step size grows (oscillation), floored at 1/64, and allowed
    to recover on sustained decrease.  Once the residual is small the root is
    polished by Newton steps on g(m) = m + 1/(z - c*I(m)), rejecting any step
    that would leave the upper half-plane.
    """
    if c <= 0:
        raise ValueError("ratio c must be positive")
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    zf = z.ravel()
    if np.any(zf.imag == 0):
        raise ValueError("boundary evaluation requires density()")
    flip = zf.imag < 0
    zz = np.where(flip, zf.conj(), zf)
    if initial is None:
        m = -1.0 / zz
    else:
        m = np.broadcast_to(np.asarray(initial, dtype=complex).ravel(), zz.shape).copy()
        m = np.where(flip, m.conj(), m)
        bad = m.imag <= 0
        m[bad] = -1.0 / zz[bad]
    t = H.atoms[:, None]
    w = H.weights[:, None]

    def h_int(ma):
        return np.sum(w * t / (1.0 + t * ma[None, :]), axis=0)

    damp = np.ones(zz.shape)
    prev_step = np.full(zz.shape, np.inf)
    res = np.full(zz.shape, np.inf)
    iters = np.zeros(zz.shape, dtype=int)
    active = np.ones(zz.shape, dtype=bool)
    allow_newton = np.ones(zz.shape, dtype=bool)

    for k in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        ma, za = m[idx], zz[idx]
        integ = h_int(ma)
        target = -1.0 / (za - c * integ)
        step = np.abs(target - ma)

        # damped fixed-point step; Newton takes over near the root, where the
        # plain iteration can stall (its rate degrades toward the spectrum)
        d = damp[idx]
        grew = step > prev_step[idx]
        d = np.where(grew, np.maximum(d / 2.0, _DAMP_FLOOR), np.minimum(d * 2.0, 1.0))
        damp[idx] = d
        mnew = d * target + (1.0 - d) * ma

        close = (step < _NEWTON_AT) & allow_newton[idx]
        if np.any(close):
            mc, zc = ma[close], za[close]
            ic = np.sum(w * t / (1.0 + t * mc[None, :]), axis=0)
            dic = -np.sum(w * t * t / (1.0 + t * mc[None, :]) ** 2, axis=0)
            denom = zc - c * ic
            g = mc + 1.0 / denom
            gp = 1.0 + c * dic / denom ** 2
            safe = np.where(gp == 0, 1.0, gp)
            cand = mc - g / safe
            ok = (gp != 0) & (cand.imag > 0)
            mnew[close] = np.where(ok, cand, mnew[close])

        prev_step[idx] = step
        r = np.abs(mnew + 1.0 / (za - c * h_int(mnew)))
        # a Newton step that made things worse is disabled until progress resumes
        allow_newton[idx] = r <= np.maximum(res[idx], tol)
        m[idx] = mnew
        res[idx] = r
        iters[idx] = k
        active[idx] = r > tol
        if not active.any():
            break

    m = np.where(flip, m.conj(), m)
    return m.reshape(shape), res.reshape(shape), iters.reshape(shape)


def solve_mbar(z: complex, H: SpectralMeasure, c: float,
               tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
               initial=None) -> StieltjesSolution:
    """Solve the self-consistent equation at one point; raises on non-convergence."""
    zc = complex(z)
    mbar, res, iters = solve_mbar_grid(np.array([zc]), H, c, tol=tol,
                                       max_iter=max_iter, initial=initial)
    residual = float(res[0])
    if residual > tol:
        raise ConvergenceError(f"no convergence at z={zc} after {max_iter} iterations",
                               residual)
    mb = complex(mbar[0])
    return StieltjesSolution(z=zc, mbar=mb, m=companion_transform(mb, zc, c, "to_m"),
                             residual=residual, iterations=int(iters[0]))


def companion_transform(value: complex, z: complex, c: float, direction: str) -> complex:
    """Convert between the two Stieltjes transforms.

    ``to_mbar``: mbar = -(1-c)/z + c*m, ``to_m``: the inverse map.
    """
    if z == 0:
        raise ValueError("transform relation is singular at z = 0")
    if direction == "to_mbar":
        return -(1.0 - c) / z + c * value
    if direction == "to_m":
        return (value + (1.0 - c) / z) / c
    raise ValueError("direction must be 'to_mbar' or 'to_m'")


def inverse_z(mbar: complex, H: SpectralMeasure, c: float) -> complex:
    """Explicit inverse map z(mbar) = -1/mbar + c * integral t/(1 + t*mbar) dH."""
    mbar = complex(mbar)
    if mbar == 0:
        raise ValueError("inverse map is singular at mbar = 0")
    factors = 1.0 + H.atoms * mbar
    if np.any(np.abs(factors) < 1e-14):
        raise ValueError("pole: 1 + t*mbar vanishes at an atom")
    return -1.0 / mbar + c * np.sum(H.weights * H.atoms / factors)


def closed_form_mp(z: complex, c: float, t: float = 1.0) -> complex:
    """Companion transform for a single-atom population, by quadratic formula.

    For atom t the equation reduces (after rescaling) to
    w*u^2 + (w + 1 - c)*u + 1 = 0 at w = z/t, with the root chosen in the
    upper half-plane; test oracle only.
    """
    if t <= 0:
        raise ValueError("atom must be positive")
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("closed form expects Im z > 0")
    w = z / t
    b = w + 1.0 - c
    disc = np.sqrt(b * b - 4.0 * w)
    r1 = (-b + disc) / (2.0 * w)
    r2 = (-b - disc) / (2.0 * w)
    root = r1 if r1.imag > 0 else r2
    return complex(root) / t


def support_interval(H: SpectralMeasure, c: float) -> tuple[float, float]:
    """Interval certain to contain the limiting spectrum.

    Lower endpoint is t_min*(1-sqrt(c))^2 for 0 < c < 1 and zero otherwise
    (zero eigenvalues appear once c >= 1); upper is t_max*(1+sqrt(c))^2.
    """
    if c <= 0:
        raise ValueError("ratio c must be positive")
    root = np.sqrt(c)
    lo = H.t_min * (1.0 - root) ** 2 if 0 < c < 1 else 0.0
    hi = H.t_max * (1.0 + root) ** 2
    return float(lo), float(hi)


def continuous_support(H: SpectralMeasure, c: float) -> tuple[float, float]:
    """Edges of the continuous spectral bulk, ignoring any mass at zero."""
    root = np.sqrt(c)
    return (float(H.t_min * (1.0 - root) ** 2), float(H.t_max * (1.0 + root) ** 2))
