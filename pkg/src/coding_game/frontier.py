"""Characteristic curve of the adversary.

The locus ``(phi(z), psi(z))`` is swept over the partial-overlap interval,
its upper concave envelope is taken as a function of ``q = phi(z)``, and the
largest MSE the adversary can force at acceptance probability ``alpha`` is
``envelope(alpha) / (4 alpha)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize

from .errors import DegenerateInputError, DomainError
from .kernels import GameParams, KernelSample, phi, psi

DEFAULT_GRID = 4001
DEFAULT_ALPHA_MIN = 1e-6
ENDPOINT_POINTS = 32
HULL_REL_TOL = 1e-12
CSV_HEADER = ("alpha", "c_eta", "eta", "n", "delta")


@dataclass(frozen=True, eq=False)
class Locus:
    """Kernel samples ordered by increasing ``z`` (so decreasing ``q``).

    ``exact`` marks a locus produced by :func:`sweep`, whose points lie on
    the true kernel curve and may be re-evaluated between samples.
    """

    params: GameParams
    z: np.ndarray
    q: np.ndarray
    psi: np.ndarray
    grid_size: int
    exact: bool = False

    @property
    def samples(self) -> list[KernelSample]:
        return [KernelSample(float(a), float(b), float(c)) for a, b, c in zip(self.z, self.q, self.psi)]

    def __len__(self) -> int:
        return len(self.z)


def phi_inverse(params: GameParams, q, tol: float = 1e-12):
    """Magnitude ``z`` in the partial-overlap interval with ``phi(z) = q``.

    Arrays are solved by vectorized bisection; scalars by Brent's bracketed
    root finder. Both stop once ``z`` is known to ``tol * delta``.
    """
    q_arr = np.asarray(q, dtype=float)
    if np.any(~((q_arr >= 0) & (q_arr <= 1))):
        raise DomainError(f"acceptance probability must lie in [0, 1], got {q!r}")
    if q_arr.ndim == 0:
        qs = float(q_arr)
        if qs >= 1.0:
            return params.z_low
        if qs <= 0.0:
            return params.z_high
        return optimize.brentq(
            lambda z: phi(params, z) - qs, params.z_low, params.z_high, xtol=tol * params.delta, rtol=1e-15
        )
    lo = np.full(q_arr.shape, params.z_low)
    hi = np.full(q_arr.shape, params.z_high)
    width = params.z_high - params.z_low
    steps = int(math.ceil(math.log2(width / (tol * params.delta)))) + 1
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        above = np.asarray(phi(params, mid)) > q_arr
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    z = 0.5 * (lo + hi)
    z = np.where(q_arr >= 1.0, params.z_low, z)
    z = np.where(q_arr <= 0.0, params.z_high, z)
    return float(z) if z.ndim == 0 else z


def _sweep_points(params: GameParams, grid_size: int, q_points: int) -> np.ndarray:
    lo, hi, d = params.z_low, params.z_high, params.delta
    near = d * np.logspace(-12, -6, ENDPOINT_POINTS)
    parts = [np.linspace(lo, hi, grid_size), lo + near, hi - near]
    if q_points > 0:
        inner = np.linspace(0.0, 1.0, q_points + 2)[1:-1]
        parts.append(np.asarray(phi_inverse(params, inner, tol=1e-10)))
    z = np.unique(np.clip(np.concatenate(parts), lo, hi))
    return z


def sweep(params: GameParams, grid_size: int = DEFAULT_GRID, q_points: int | None = None) -> Locus:
    """Sample the kernel locus over ``[(eta-1) delta, (eta+1) delta]``.

    The grid is uniform in ``z`` with geometric refinement next to both
    endpoints. ``q_points`` extra magnitudes, spaced uniformly in ``q``, are
    added as well (defaults to ``grid_size``); at high dimension the
    acceptance kernel drops from 1 to 0 over a narrow band of ``z`` and a
    uniform ``z`` grid alone resolves ``q`` poorly.

    Samples whose ``q`` does not strictly decrease (floating-point plateaus
    at ``q`` = 1 or 0) are dropped so the locus is a function of ``q``.
    """
    if int(grid_size) < 3:
        raise DomainError(f"grid_size must be >= 3, got {grid_size}")
    grid_size = int(grid_size)
    if q_points is None:
        q_points = grid_size
    z = _sweep_points(params, grid_size, int(q_points))
    q = np.asarray(phi(params, z), dtype=float)
    p = np.asarray(psi(params, z), dtype=float)
    q[0], q[-1] = 1.0, 0.0
    p[-1] = 0.0
    prev_min = np.minimum.accumulate(np.concatenate(([np.inf], q[:-1])))
    keep = q < prev_min
    # the exact endpoint must survive even if the previous sample rounded to 0
    keep[-1] = True
    keep[:-1] &= q[:-1] > 0.0
    z, q, p = z[keep], q[keep], p[keep]
    for arr in (z, q, p):
        arr.setflags(write=False)
    return Locus(params, z, q, p, grid_size, exact=True)


@dataclass(frozen=True, eq=False)
class CharacteristicCurve:
    """Upper concave envelope of the locus, as vertices with increasing ``q``.

    ``sample_index`` gives the position of each vertex in the ascending-``q``
    ordering of the locus; an edge between vertices whose indices differ by
    more than one skips raw samples and is a genuine chord.
    """

    params: GameParams
    q: np.ndarray
    psi: np.ndarray
    z: np.ndarray
    sample_index: np.ndarray
    contact_flags: np.ndarray
    locus: Locus = field(repr=False)
    alpha_min: float = DEFAULT_ALPHA_MIN

    def envelope(self, q):
        """The envelope, linearly interpolated between vertices."""
        out = np.interp(np.asarray(q, dtype=float), self.q, self.psi)
        return float(out) if np.ndim(out) == 0 else out

    def psi_star(self, q):
        """Envelope value with exact kernel evaluation on contact edges.

        Between two adjacent locus samples the envelope coincides with the
        raw curve, so it is evaluated as ``psi(phi_inverse(q))`` there; only
        chords that skip samples are interpolated linearly. This removes the
        O(h^2) interpolation error of the sampled curve.
        """
        q = np.asarray(q, dtype=float)
        out = np.asarray(np.interp(q, self.q, self.psi), dtype=float).copy()
        k = np.clip(np.searchsorted(self.q, q, side="right") - 1, 0, len(self.q) - 2)
        on_raw = ~self.chord_edges()[k] & (q > 0.0) & (q < 1.0)
        if self.locus.exact and np.any(on_raw):
            if out.ndim == 0:
                out = np.asarray(psi(self.params, phi_inverse(self.params, float(q))))
            else:
                out[on_raw] = psi(self.params, phi_inverse(self.params, q[on_raw]))
        return float(out) if out.ndim == 0 else out

    def chord_edges(self) -> np.ndarray:
        """Boolean per edge: True where the edge bridges skipped samples."""
        return np.diff(self.sample_index) > 1

    def bracket(self, alpha: float) -> int:
        """Index ``k`` of the edge ``[q[k], q[k+1]]`` containing ``alpha``."""
        k = int(np.searchsorted(self.q, alpha, side="right")) - 1
        return min(max(k, 0), len(self.q) - 2)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.psi) / np.diff(self.q)


def _upper_hull(x: np.ndarray, y: np.ndarray) -> list[int]:
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            ux, uy = x[b] - x[a], y[b] - y[a]
            vx, vy = x[i] - x[a], y[i] - y[a]
            cross = ux * vy - uy * vx
            # tolerance scales with the rounding error of the cross product itself,
            # so nearly vertical edges next to q = 1 are not mistaken for collinear
            scale = abs(ux * vy) + abs(uy * vx)
            if cross >= -HULL_REL_TOL * scale:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def upper_concave_envelope(locus: Locus, alpha_min: float = DEFAULT_ALPHA_MIN) -> CharacteristicCurve:
    """Upper hull of the points ``(q, psi)`` by Andrew's monotone chain.

    Points on a common line (relative cross-product below 1e-12) are
    dropped, so vertex sets are deterministic.
    """
    q = np.asarray(locus.q, dtype=float)[::-1]
    p = np.asarray(locus.psi, dtype=float)[::-1]
    z = np.asarray(locus.z, dtype=float)[::-1]
    if len(np.unique(q)) < 2:
        raise DegenerateInputError("envelope needs at least two distinct q values")
    # exact end points: nothing is accepted at q = 0, and q = 1 is the inner boundary
    if q[0] != 0.0:
        q, p, z = np.r_[0.0, q], np.r_[0.0, p], np.r_[locus.params.z_high, z]
    idx = np.asarray(_upper_hull(q, p), dtype=int)
    arrays = [q[idx], p[idx], z[idx], idx, np.ones(len(idx), dtype=bool)]
    for arr in arrays:
        arr.setflags(write=False)
    return CharacteristicCurve(locus.params, *arrays, locus=locus, alpha_min=float(alpha_min))


def characteristic_curve(
    params: GameParams, grid_size: int = DEFAULT_GRID, alpha_min: float = DEFAULT_ALPHA_MIN
) -> CharacteristicCurve:
    """Sweep and envelope in one call."""
    return upper_concave_envelope(sweep(params, grid_size), alpha_min=alpha_min)


def check_alpha(curve: CharacteristicCurve, alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if np.any(~(a > curve.alpha_min)):
        raise DomainError(f"alpha must exceed the configured floor alpha_min={curve.alpha_min:g}, got {alpha!r}")
    if np.any(a > 1.0):
        raise DomainError(f"alpha must be <= 1, got {alpha!r}")
    return a


def c_eta(curve: CharacteristicCurve, alpha):
    """Largest MSE reachable at acceptance probability ``alpha``.

    Chords of the envelope are interpolated linearly in ``q``; on contact
    edges the kernel is evaluated exactly (see
    :meth:`CharacteristicCurve.psi_star`).
    """
    a = check_alpha(curve, alpha)
    out = np.asarray(curve.psi_star(a)) / (4.0 * a)
    return float(out) if out.ndim == 0 else out


def default_alpha_grid(points: int = 1000) -> np.ndarray:
    return np.linspace(1.0 / points, 1.0, points)


def curve_rows(curve: CharacteristicCurve, alphas: Iterable[float] | None = None) -> list[tuple]:
    a = np.sort(np.asarray(default_alpha_grid() if alphas is None else list(alphas), dtype=float))
    values = np.atleast_1d(c_eta(curve, a))
    p = curve.params
    return [(float(x), float(y), p.eta, p.n, p.delta) for x, y in zip(a, values)]


def write_curve_csv(path, curves: Sequence[CharacteristicCurve], alphas: Iterable[float] | None = None) -> Path:
    """Write ``alpha,c_eta,eta,n,delta`` rows sorted by alpha, then eta.

    Floats use ``repr`` so they round-trip exactly.
    """
    alphas = None if alphas is None else list(alphas)
    rows = [row for curve in curves for row in curve_rows(curve, alphas)]
    rows.sort(key=lambda r: (r[0], r[2]))
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for alpha, c, eta, n, delta in rows:
            writer.writerow((repr(alpha), repr(c), repr(float(eta)), n, repr(float(delta))))
    return path
