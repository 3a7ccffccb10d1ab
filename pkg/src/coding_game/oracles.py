"""Independent reference computations used to cross-check the main path.

* Closed forms for the planar case (``n = 2``), built from elementary
  functions only.
* A brute-force solution of the adversary's problem on a finite set of
  magnitudes: maximize ``sum psi_i f_i`` subject to ``sum phi_i f_i = alpha``
  and ``f`` a probability vector. A linear program with two equality
  constraints has an optimal basic solution with at most two nonzero
  weights, so enumerating all pairs is exact for the discretized problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .kernels import GameParams, phi, psi


def disk_cap_area(r, c):
    """Area of the part of a disk of radius ``r`` beyond the chord at distance ``c``."""
    r = np.asarray(r, dtype=float)
    c = np.clip(np.asarray(c, dtype=float), -r, r)
    out = r * r * np.arccos(c / r) - c * np.sqrt(np.maximum(r * r - c * c, 0.0))
    return float(out) if out.ndim == 0 else out


def disk_cap_first_moment(r, c):
    """``(2/3) (r^2 - c^2)^(3/2)``: first moment of a disk cap along its axis."""
    r = np.asarray(r, dtype=float)
    c = np.asarray(c, dtype=float)
    out = (2.0 / 3.0) * np.maximum(r * r - c * c, 0.0) ** 1.5
    return float(out) if out.ndim == 0 else out


def disk_cap_second_moment(r, c):
    """Second moment ``int ||x||^2`` over a disk cap."""
    r = np.asarray(r, dtype=float)
    c = np.asarray(c, dtype=float)
    out = 0.5 * r * r * disk_cap_area(r, c) + 0.5 * c * disk_cap_first_moment(r, c)
    return float(out) if out.ndim == 0 else out


def planar_phi(delta: float, eta: float, z):
    """Acceptance kernel for ``n = 2`` from disk-cap areas."""
    z = np.asarray(z, dtype=float)
    lo, hi = (eta - 1.0) * delta, (eta + 1.0) * delta
    zz = np.clip(z, lo if lo > 0 else 1e-300, hi)
    u = (zz * zz + delta * delta * (1.0 - eta * eta)) / (2.0 * zz)
    lens = (disk_cap_area(delta, u) + disk_cap_area(eta * delta, zz - u)) / (math.pi * delta * delta)
    out = np.where(z <= lo, 1.0, np.where(z >= hi, 0.0, lens))
    return float(out) if out.ndim == 0 else out


def planar_psi(delta: float, eta: float, z):
    """Error kernel for ``n = 2`` from disk-cap areas and first moments."""
    z = np.asarray(z, dtype=float)
    lo, hi = (eta - 1.0) * delta, (eta + 1.0) * delta
    zz = np.clip(z, lo if lo > 0 else 1e-300, hi)
    u = (zz * zz + delta * delta * (1.0 - eta * eta)) / (2.0 * zz)
    w = zz - u
    big = eta * delta
    lens = (
        (0.5 * delta**2 + zz**2) * disk_cap_area(delta, u)
        + (0.5 * big**2 + 4.0 * zz**2) * disk_cap_area(big, w)
        + 0.5 * u * disk_cap_first_moment(delta, u)
        - 0.5 * (3.0 * zz + u) * disk_cap_first_moment(big, w)
    ) / (math.pi * delta * delta)
    out = np.where(z <= lo, z * z + 0.5 * delta * delta, np.where(z >= hi, 0.0, lens))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TwoPointSolution:
    """Optimal discrete adversary: value ``sum psi f`` and its support."""

    value: float
    z: tuple
    weights: tuple


def two_point_lp(params: GameParams, alpha: float, points: int = 200) -> TwoPointSolution:
    """Solve the discretized adversary problem by enumerating supports.

    ``points`` magnitudes are spaced uniformly over the partial-overlap
    interval. Returns the best value of ``sum psi_i f_i`` (which equals
    ``4 alpha c_eta(alpha)`` in the continuum limit).
    """
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    z = np.linspace(params.z_low, params.z_high, int(points))
    q = np.asarray(phi(params, z), dtype=float)
    y = np.asarray(psi(params, z), dtype=float)
    q[0], q[-1], y[-1] = 1.0, 0.0, 0.0

    best = TwoPointSolution(-math.inf, (), ())
    exact = np.nonzero(q == alpha)[0]
    if exact.size:
        i = exact[np.argmax(y[exact])]
        best = TwoPointSolution(float(y[i]), (float(z[i]),), (1.0,))

    low = np.nonzero(q < alpha)[0]
    high = np.nonzero(q > alpha)[0]
    if low.size and high.size:
        ql, yl = q[low][:, None], y[low][:, None]
        qh, yh = q[high][None, :], y[high][None, :]
        wh = (alpha - ql) / (qh - ql)
        val = yl + wh * (yh - yl)
        flat = int(np.argmax(val))
        a, b = np.unravel_index(flat, val.shape)
        if val[a, b] > best.value:
            w = float(wh[a, b])
            zi, zj = float(z[high[b]]), float(z[low[a]])
            best = TwoPointSolution(float(val[a, b]), (zi, zj), (w, 1.0 - w))
    return best
