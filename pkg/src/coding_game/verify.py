"""Verification suites: Monte-Carlo kernel agreement, planar closed forms, LP oracle."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import geometry as geo
from . import oracles
from .frontier import c_eta, characteristic_curve
from .kernels import GameParams, phi, psi
from .simulate import FixedMagnitude, SimConfig, run

# (n, eta, z) combinations spanning dimensions 1 to 25, delta = 1
KERNEL_GRID = (
    (1, 2.0, 1.5),
    (1, 3.0, 3.0),
    (1, 5.0, 5.5),
    (2, 2.0, 1.8),
    (2, 5.0, 4.4857),
    (2, 8.0, 8.2),
    (3, 2.0, 2.0),
    (3, 4.0, 3.5),
    (3, 6.0, 6.3),
    (25, 2.0, 1.9),
    (25, 4.0, 3.8642),
    (25, 8.0, 7.5),
)
LP_ALPHAS = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True)
class Check:
    name: str
    analytic: float
    observed: float
    metric: str
    distance: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _sigma_check(name: str, analytic: float, observed: float, stderr: float, k: float) -> Check:
    if stderr > 0:
        dist = abs(observed - analytic) / stderr
    else:
        dist = 0.0 if observed == analytic else math.inf
    return Check(name, float(analytic), float(observed), "sigma", float(dist), k, bool(dist <= k))


def kernel_checks(
    params: GameParams, z: float, samples: int = 1_000_000, seed: int = 0, chunk_size: int = 8192, sigmas: float = 4.0
) -> list[Check]:
    """Empirical PA and conditional MSE at fixed magnitude against the kernels."""
    res = run(SimConfig(params, FixedMagnitude(z), samples, seed, chunk_size))
    q, p = float(phi(params, z)), float(psi(params, z))
    tag = f"n={params.n} eta={params.eta:g} z={z:g}"
    out = [_sigma_check(f"pa {tag}", q, res.pa_hat, res.pa_stderr, sigmas)]
    if q > 0 and res.mse_hat is not None:
        out.append(_sigma_check(f"mse {tag}", p / (4.0 * q), res.mse_hat, res.mse_stderr, sigmas))
    return out


def kernel_suite(
    combos: Iterable[tuple] = KERNEL_GRID, samples: int = 1_000_000, seed: int = 0, chunk_size: int = 8192
) -> list[Check]:
    checks = []
    for i, (n, eta, z) in enumerate(combos):
        checks += kernel_checks(GameParams(n, 1.0, eta), z, samples, seed + i, chunk_size)
    return checks


def default_magnitudes(params: GameParams) -> list[float]:
    """One always-accepted magnitude and three inside the overlap band."""
    lo, hi = params.z_low, params.z_high
    return [0.5 * lo, lo + 0.25 * (hi - lo), lo + 0.5 * (hi - lo), lo + 0.75 * (hi - lo)]


def _max_rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(b), 1e-300)
    return float(np.max(np.abs(a - b) / scale))


def closed_form_suite(points: int = 10, tol: float = 1e-9) -> list[Check]:
    """General-dimension geometry at ``n = 2`` against elementary closed forms.

    Uses a ``points x points`` grid of radii and cuts (cuts strictly inside
    the ball), plus a check that ``n = 1`` cap volumes equal ``r - c``.
    """
    r = np.linspace(0.5, 8.0, points)
    t = np.linspace(-0.95, 0.95, points)
    rr, tt = np.meshgrid(r, t)
    rr, cc = rr.ravel(), (rr * tt).ravel()
    k = geo.cap_volume_log(2, rr, cc).to_real()
    q = geo.cap_first_moment_log(2, rr, cc).to_real()
    j = geo.cap_second_moment_log(2, rr, cc).to_real()
    errs = {
        "cap volume n=2": _max_rel(k, oracles.disk_cap_area(rr, cc)),
        "cap first moment n=2": _max_rel(q, oracles.disk_cap_first_moment(rr, cc)),
        "cap second moment n=2": _max_rel(j, oracles.disk_cap_second_moment(rr, cc)),
    }
    checks = [Check(name, 0.0, e, "max_rel", e, tol, bool(e <= tol)) for name, e in errs.items()]
    c1 = rr * tt.ravel()
    e1 = _max_rel(geo.cap_volume_log(1, rr, c1).to_real(), rr - c1)
    checks.append(Check("cap volume n=1", 0.0, e1, "max_rel", e1, 1e-14, bool(e1 <= 1e-14)))
    return checks


def kernel_closed_form_checks(eta: float, points: int = 101, tol: float = 1e-9) -> list[Check]:
    """Planar kernels against their closed forms over the overlap band."""
    p = GameParams(2, 1.0, eta)
    z = np.linspace(p.z_low, p.z_high, points)[1:-1]
    e_phi = float(np.max(np.abs(np.asarray(phi(p, z)) - oracles.planar_phi(1.0, eta, z))))
    e_psi = _max_rel(psi(p, z), oracles.planar_psi(1.0, eta, z))
    return [
        Check(f"phi n=2 eta={eta:g}", 0.0, e_phi, "max_abs", e_phi, tol, bool(e_phi <= tol)),
        Check(f"psi n=2 eta={eta:g}", 0.0, e_psi, "max_rel", e_psi, tol, bool(e_psi <= tol)),
    ]


def lp_checks(
    params: GameParams,
    alphas: Sequence[float] = LP_ALPHAS,
    points: int = 200,
    tol: float = 2e-3,
    grid_size: int = 4001,
) -> list[Check]:
    """Envelope value ``4 alpha c_eta`` against brute-force two-point supports."""
    curve = characteristic_curve(params, grid_size)
    checks = []
    for a in alphas:
        ref = 4.0 * a * c_eta(curve, a)
        got = oracles.two_point_lp(params, a, points).value
        gap = abs(got - ref) / abs(ref)
        checks.append(
            Check(f"lp n={params.n} eta={params.eta:g} alpha={a:g} grid={points}", ref, got, "rel", gap, tol, bool(gap <= tol))
        )
    return checks


def run_suite(
    params: GameParams,
    samples: int = 1_000_000,
    seed: int = 0,
    chunk_size: int = 8192,
    grid_size: int = 4001,
    magnitudes: Optional[Sequence[float]] = None,
) -> dict:
    """Default verification for one game: MC kernels, closed forms, LP oracle."""
    checks: list[Check] = []
    zs = default_magnitudes(params) if magnitudes is None else magnitudes
    for i, z in enumerate(zs):
        checks += kernel_checks(params, z, samples, seed + i, chunk_size)
    checks += closed_form_suite()
    if params.n == 2:
        checks += kernel_closed_form_checks(params.eta)
    checks += lp_checks(params, grid_size=grid_size)
    return {
        "n": params.n,
        "delta": params.delta,
        "eta": params.eta,
        "samples": samples,
        "seed": seed,
        "passed": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
