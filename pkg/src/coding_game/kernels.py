"""Acceptance and error kernels of the coding game.

For an adversarial noise vector of fixed magnitude ``z`` and honest noise
uniform in the ball of radius ``delta``, :func:`phi` is the probability that
the two reports are within ``eta * delta`` of each other, and :func:`psi` is
``4 * phi * E[||(N_h + N_a)/2||^2 | accept]``. Both are isotropic, so only the
magnitude of the adversarial noise matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import DomainError

# Relative drift outside the support that is silently clamped.
CLAMP_REL = 1e-12


@dataclass(frozen=True)
class GameParams:
    """Physical setting of one game: dimension, honest radius, threshold."""

    n: int
    delta: float = 1.0
    eta: float = 2.0

    def __post_init__(self):
        geo._check_dim(self.n)
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise DomainError(f"delta must be a positive finite number, got {self.delta!r}")
        if not (self.eta >= 2 and math.isfinite(self.eta)):
            raise DomainError(f"eta must be >= 2 (acceptance thresholds below 2 are not supported), got {self.eta!r}")

    @property
    def z_low(self) -> float:
        """Largest magnitude that is always accepted, ``(eta - 1) delta``."""
        return (self.eta - 1.0) * self.delta

    @property
    def z_high(self) -> float:
        """Smallest magnitude that is never accepted, ``(eta + 1) delta``."""
        return (self.eta + 1.0) * self.delta

    def with_eta(self, eta: float) -> "GameParams":
        return GameParams(self.n, self.delta, eta)


@dataclass(frozen=True)
class KernelSample:
    z: float
    q: float
    psi: float


def _as_magnitude(params: GameParams, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z)) or np.any(z < -CLAMP_REL * params.z_high):
        raise DomainError(f"noise magnitude must be finite and >= 0, got {z!r}")
    return np.maximum(z, 0.0)


def cut_point(params: GameParams, z):
    """Signed distance from the honest-ball centre to the radical hyperplane.

    ``u_c = (z^2 + delta^2 (1 - eta^2)) / (2 z)``.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("cut point is undefined at z <= 0")
    d = params.delta
    return geo._out((z * z + d * d * (1.0 - params.eta**2)) / (2.0 * z))


def _lens_mask(params: GameParams, z: np.ndarray) -> np.ndarray:
    return (z > params.z_low) & (z < params.z_high)


def _lens_cuts(params: GameParams, z: np.ndarray):
    d = params.delta
    u = (z * z + d * d * (1.0 - params.eta**2)) / (2.0 * z)
    u = np.clip(u, -d, d)
    w = np.clip(z - u, -params.eta * d, params.eta * d)
    return u, w


def phi(params: GameParams, z):
    """Acceptance probability for adversarial noise of magnitude ``z``."""
    z = _as_magnitude(params, z)
    out = np.where(z <= params.z_low, 1.0, 0.0)
    lens = _lens_mask(params, z)
    if np.any(lens):
        out = out.astype(float)
        out[lens] = np.clip(
            np.asarray(geo.intersection_fraction(params.n, params.delta, params.eta * params.delta, z[lens])),
            0.0,
            1.0,
        )
    return geo._out(out)


def _psi_lens(params: GameParams, z: np.ndarray) -> np.ndarray:
    n, d, eta = params.n, params.delta, params.eta
    u, w = _lens_cuts(params, z)
    big = eta * d
    log_z = np.log(z)
    j1 = geo.cap_second_moment_log(n, d, u)
    k1 = geo.cap_volume_log(n, d, u).shift(2.0 * log_z)
    j2 = geo.cap_second_moment_log(n, big, w)
    k2 = geo.cap_volume_log(n, big, w).shift(math.log(4.0) + 2.0 * log_z)
    q2 = geo.cap_first_moment_log(n, big, w).shift(math.log(2.0) + log_z, sign=-1.0)
    total = geo.signed_logsum(j1, k1, j2, k2, q2)
    scaled = total.shift(-float(geo.ball_volume_log(n, d).log_magnitude))
    return np.maximum(np.asarray(scaled.to_real(), dtype=float), 0.0)


def psi(params: GameParams, z):
    """Error weight ``4 * Pr(accept) * E[||(N_h + N_a)/2||^2 | accept]`` at magnitude ``z``.

    Inside the always-accept region this is ``z^2 + n delta^2/(n+2)``; beyond
    ``(eta + 1) delta`` it vanishes.
    """
    z = _as_magnitude(params, z)
    n, d = params.n, params.delta
    out = np.where(z <= params.z_low, z * z + n * d * d / (n + 2.0), 0.0)
    lens = _lens_mask(params, z)
    if np.any(lens):
        out = out.astype(float)
        out[lens] = _psi_lens(params, z[lens])
    return geo._out(out)


def phi_psi(params: GameParams, z):
    """Both kernels at once, as a pair."""
    return phi(params, z), psi(params, z)


def conditional_mse(params: GameParams, z):
    """``psi / (4 phi)``: the MSE of a single-shell adversary at radius ``z``."""
    q, p = phi_psi(params, z)
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(q > 0, np.asarray(p) / (4.0 * q), np.nan)
    return geo._out(out)
