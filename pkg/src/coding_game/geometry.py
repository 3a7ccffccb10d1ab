"""Volumes and moments of N-balls, hyperspherical caps and two-ball lenses.

Every quantity that scales like ``r**n`` is handled as a normalized fraction
of its own ball times a log-space scale factor, so that dimensions in the
hundreds (``8**250`` overflows a double) stay finite. Functions accept
scalars or numpy arrays for the radius/cut arguments and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Integral
from typing import Union

import numpy as np
from scipy import integrate, special

from .errors import DomainError

ArrayLike = Union[float, np.ndarray]

# |c| within this fraction of r is treated as the exact degenerate cap.
DEGENERATE_REL = 1e-12
# Signed sums cancelling below this fraction of the largest term are zero.
CANCEL_REL = 1e-15
# Below this, betainc loses relative accuracy; switch to the series form.
_BETAINC_FLOOR = 1e-280

LOG_PI = math.log(math.pi)


def _out(x):
    """Unwrap 0-d arrays to Python floats, leave real arrays alone."""
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class LogValue:
    """A real number stored as ``sign * exp(log_magnitude)``.

    ``sign`` is -1, 0 or +1; zero is represented by ``sign == 0`` with
    ``log_magnitude == -inf``. Both fields may be numpy arrays of a common
    shape, in which case the value is elementwise.
    """

    sign: ArrayLike
    log_magnitude: ArrayLike

    @classmethod
    def from_real(cls, x: ArrayLike) -> "LogValue":
        x = np.asarray(x, dtype=float)
        sign = np.sign(x)
        with np.errstate(divide="ignore"):
            logm = np.log(np.abs(x))
        return cls(_out(sign), _out(logm))

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(0.0, -math.inf)

    def to_real(self) -> ArrayLike:
        sign = np.asarray(self.sign, dtype=float)
        with np.errstate(over="ignore", under="ignore"):
            mag = np.exp(np.asarray(self.log_magnitude, dtype=float))
        return _out(np.where(sign == 0, 0.0, sign * mag))

    def shift(self, log_factor: ArrayLike, sign: ArrayLike = 1.0) -> "LogValue":
        """Multiply by ``sign * exp(log_factor)``."""
        new_sign = np.asarray(self.sign, dtype=float) * np.sign(sign)
        new_log = np.asarray(self.log_magnitude, dtype=float) + np.asarray(log_factor, dtype=float)
        new_log = np.where(new_sign == 0, -np.inf, new_log)
        return LogValue(_out(new_sign), _out(new_log))

    def __neg__(self) -> "LogValue":
        return LogValue(_out(-np.asarray(self.sign, dtype=float)), self.log_magnitude)


def signed_logsum(*terms: LogValue, cancel_rel: float = CANCEL_REL) -> LogValue:
    """Sum signed log-space values without leaving log space.

    The largest magnitude is factored out before exponentiating, so terms
    far outside double range combine correctly. A result whose magnitude is
    below ``cancel_rel`` times the largest term is reported as exact zero.
    """
    if not terms:
        return LogValue.zero()
    signs = np.broadcast_arrays(*[np.asarray(t.sign, dtype=float) for t in terms])
    logs = np.broadcast_arrays(*[np.asarray(t.log_magnitude, dtype=float) for t in terms])
    signs = np.stack(signs)
    logs = np.where(signs == 0, -np.inf, np.stack(logs))
    top = np.max(logs, axis=0)
    finite_top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(under="ignore"):
        scaled = np.sum(signs * np.exp(logs - finite_top), axis=0)
    zero = ~np.isfinite(top) | (np.abs(scaled) <= cancel_rel)
    with np.errstate(divide="ignore"):
        log_mag = np.where(zero, -np.inf, finite_top + np.log(np.abs(scaled)))
    sign = np.where(zero, 0.0, np.sign(scaled))
    return LogValue(_out(sign), _out(log_mag))


def _check_dim(n) -> int:
    if isinstance(n, bool) or not isinstance(n, Integral):
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n}")
    return int(n)


def _check_positive(name: str, value: ArrayLike) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"{name} must be > 0, got {value!r}")
    return arr


def _log_unit_ball(n: int) -> float:
    # n = 0 is allowed internally: the 0-ball has unit volume.
    return 0.5 * n * LOG_PI - special.gammaln(0.5 * n + 1.0)


def ball_volume_log(n: int, r: ArrayLike) -> LogValue:
    """Log of the volume ``pi**(n/2) r**n / Gamma(n/2 + 1)`` of an n-ball."""
    n = _check_dim(n)
    r = _check_positive("radius", r)
    logv = _log_unit_ball(n) + n * np.log(r)
    return LogValue(_out(np.ones_like(logv)), _out(logv))


def ball_second_moment(n: int, r: ArrayLike) -> ArrayLike:
    """Mean of ``||X||**2`` for X uniform on the n-ball of radius r."""
    n = _check_dim(n)
    r = _check_positive("radius", r)
    return _out(n * r * r / (n + 2.0))


def log_betainc(a: float, b: float, x: ArrayLike) -> ArrayLike:
    """Natural log of the regularized incomplete beta ``I_x(a, b)``.

    Uses the hypergeometric series when the direct value would lose
    relative precision to underflow.
    """
    x = np.asarray(x, dtype=float)
    direct = special.betainc(a, b, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(direct)
        tiny = (direct < _BETAINC_FLOOR) & (x > 0) & (x < 0.5)
        if np.any(tiny):
            xs = x[tiny]
            series = (
                a * np.log(xs)
                + b * np.log1p(-xs)
                - math.log(a)
                - special.betaln(a, b)
                + np.log(special.hyp2f1(a + b, 1.0, a + 1.0, xs))
            )
            out = np.where(tiny, 0.0, out)
            out[tiny] = series
    return _out(out)


def _normalized_cut(r: np.ndarray, c: np.ndarray) -> np.ndarray:
    if np.any(np.abs(c) > r * (1.0 + DEGENERATE_REL)):
        raise DomainError(f"cut distance must satisfy |c| <= r (c={c!r}, r={r!r})")
    return np.clip(c / r, -1.0, 1.0)


def log_cap_fraction(n: int, r: ArrayLike, c: ArrayLike) -> ArrayLike:
    """Log of the fraction of the ball of radius r lying in ``{x_1 >= c}``."""
    n = _check_dim(n)
    r = _check_positive("radius", r)
    c = np.asarray(c, dtype=float)
    r, c = np.broadcast_arrays(r, c)
    t = _normalized_cut(r, c)
    x = (1.0 - t) * (1.0 + t)
    a = 0.5 * (n + 1)
    lb = np.asarray(log_betainc(a, 0.5, x), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        upper = math.log(0.5) + lb
        lower = np.log1p(-np.exp(upper))
        out = np.where(t >= 0.0, upper, lower)
    out = np.where(t >= 1.0 - DEGENERATE_REL, -np.inf, out)
    out = np.where(t <= -1.0 + DEGENERATE_REL, 0.0, out)
    return _out(out)


def cap_fraction(n: int, r: ArrayLike, c: ArrayLike) -> ArrayLike:
    """Fraction of the ball's volume in the cap ``{x_1 >= c}``.

    Production path: ``1/2 * I_{1-(c/r)^2}((n+1)/2, 1/2)`` for ``c >= 0`` and
    its complement for ``c < 0``. See :func:`cap_fraction_quadrature` for the
    independent integral evaluation.
    """
    return _out(np.exp(np.asarray(log_cap_fraction(n, r, c), dtype=float)))


def cap_fraction_quadrature(n: int, r: float, c: float) -> float:
    """Cap fraction by adaptive quadrature of ``(1 - t^2)^((n-1)/2)``.

    Scalar only; kept as a cross-check on :func:`cap_fraction`.
    """
    n = _check_dim(n)
    r = float(_check_positive("radius", r))
    t0 = float(_normalized_cut(np.asarray(r), np.asarray(float(c))))
    if t0 >= 1.0 - DEGENERATE_REL:
        return 0.0
    if t0 <= -1.0 + DEGENERATE_REL:
        return 1.0
    m = 0.5 * (n - 1)

    def integrand(t):
        return (1.0 - t * t) ** m

    # mass concentrates near t = 0 with width ~ n**-0.5
    pts = [p for p in (0.0, 3.0 / math.sqrt(n), -3.0 / math.sqrt(n)) if t0 < p < 1.0]
    num, _ = integrate.quad(integrand, t0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=400, points=pts or None)
    total = math.exp(special.betaln(0.5, m + 1.0))
    return num / total


def cap_volume_log(n: int, r: ArrayLike, c: ArrayLike) -> LogValue:
    """Log of the cap volume ``K_N(r, c)``."""
    logf = np.asarray(log_cap_fraction(n, r, c), dtype=float)
    logv = np.asarray(ball_volume_log(n, r).log_magnitude, dtype=float)
    total = logv + logf
    sign = np.where(np.isfinite(total), 1.0, 0.0)
    return LogValue(_out(sign), _out(np.where(sign == 0, -np.inf, total)))


def cap_first_moment_log(n: int, r: ArrayLike, c: ArrayLike) -> LogValue:
    """Log of ``Q_N(r, c) = (r^2 - c^2)/(n+1) * V_{n-1}(sqrt(r^2 - c^2))``.

    The moment depends on the cut only through the chord height, so it is
    the same for ``c`` and ``-c``.
    """
    n = _check_dim(n)
    r = _check_positive("radius", r)
    c = np.asarray(c, dtype=float)
    r, c = np.broadcast_arrays(r, c)
    t = _normalized_cut(r, c)
    h2 = (r - np.abs(c)) * (r + np.abs(c))
    degenerate = (np.abs(t) >= 1.0 - DEGENERATE_REL) | (h2 <= 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_h2 = np.log(np.where(degenerate, 1.0, h2))
        logq = log_h2 - math.log(n + 1.0) + _log_unit_ball(n - 1) + 0.5 * (n - 1) * log_h2
    sign = np.where(degenerate, 0.0, 1.0)
    return LogValue(_out(sign), _out(np.where(degenerate, -np.inf, logq)))


def cap_second_moment_log(n: int, r: ArrayLike, c: ArrayLike) -> LogValue:
    """Log of ``J_N(r, c) = n r^2/(n+2) K_N + 2c/(n+2) Q_N``.

    The second term is negative for ``c < 0``; the combination is a signed
    log-space sum.
    """
    n = _check_dim(n)
    r = np.asarray(r, dtype=float)
    c = np.asarray(c, dtype=float)
    k = cap_volume_log(n, r, c)
    q = cap_first_moment_log(n, r, c)
    with np.errstate(divide="ignore"):
        vol_term = k.shift(np.log(n * r * r / (n + 2.0)))
        mom_term = q.shift(np.log(2.0 * np.abs(c) / (n + 2.0)), sign=np.sign(c))
    return signed_logsum(vol_term, mom_term)


def shifted_cap_moments_log(n: int, r: ArrayLike, c: ArrayLike, z: ArrayLike) -> tuple[LogValue, LogValue]:
    """First and second moments of a left-oriented cap of a ball centred at ``z e_1``.

    The cap is ``{x : ||x - z e_1|| <= r, z - x_1 >= c}``. Returns log-space
    ``(z K - Q, z^2 K - 2 z Q + J)``.
    """
    n = _check_dim(n)
    r = _check_positive("radius", r)
    c = np.asarray(c, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(c < 0) or np.any(c > r * (1.0 + DEGENERATE_REL)):
        raise DomainError(f"shifted cap needs 0 <= c <= r (c={c!r}, r={r!r})")
    if np.any(z < 0):
        raise DomainError(f"shift must be >= 0, got {z!r}")
    k = cap_volume_log(n, r, c)
    q = cap_first_moment_log(n, r, c)
    j = cap_second_moment_log(n, r, c)
    with np.errstate(divide="ignore"):
        log_z = np.log(z)
    first = signed_logsum(k.shift(log_z), -q)
    second = signed_logsum(k.shift(2.0 * log_z), (-q).shift(math.log(2.0) + log_z), j)
    return first, second


def log_intersection_fraction(n: int, r1: ArrayLike, r2: ArrayLike, d: ArrayLike) -> ArrayLike:
    """Log of the two-ball intersection volume over the volume of ball 1."""
    n = _check_dim(n)
    r1 = _check_positive("r1", r1)
    r2 = _check_positive("r2", r2)
    d = np.asarray(d, dtype=float)
    if np.any(~(d >= 0)):
        raise DomainError(f"centre distance must be >= 0, got {d!r}")
    r1, r2, d = np.broadcast_arrays(r1, r2, d)
    log_ratio = n * (np.log(r2) - np.log(r1))

    disjoint = d >= r1 + r2
    contained = d <= np.abs(r1 - r2)
    partial = ~(disjoint | contained)

    out = np.full(d.shape, -np.inf)
    out = np.where(contained, np.minimum(0.0, log_ratio), out)
    if np.any(partial):
        dp, a, b = d[partial], r1[partial], r2[partial]
        c1 = (dp * dp + a * a - b * b) / (2.0 * dp)
        c2 = (dp * dp + b * b - a * a) / (2.0 * dp)
        c1 = np.clip(c1, -a, a)
        c2 = np.clip(c2, -b, b)
        f1 = LogValue(1.0, log_cap_fraction(n, a, c1))
        f2 = LogValue(1.0, np.asarray(log_cap_fraction(n, b, c2)) + log_ratio[partial])
        f1 = LogValue(np.where(np.isfinite(f1.log_magnitude), 1.0, 0.0), f1.log_magnitude)
        f2 = LogValue(np.where(np.isfinite(f2.log_magnitude), 1.0, 0.0), f2.log_magnitude)
        total = signed_logsum(f1, f2)
        out[partial] = np.minimum(np.asarray(total.log_magnitude, dtype=float), 0.0)
    return _out(out)


def intersection_fraction(n: int, r1: ArrayLike, r2: ArrayLike, d: ArrayLike) -> ArrayLike:
    """Intersection volume of two n-balls normalized by the first ball's volume.

    Three regimes: disjoint (``d >= r1 + r2``) gives 0, containment
    (``d <= |r1 - r2|``) gives ``min(1, (r2/r1)^n)``, and partial overlap sums
    the two caps cut by the radical hyperplane. Values below ~1e-300 return 0.
    """
    return _out(np.exp(np.asarray(log_intersection_fraction(n, r1, r2, d), dtype=float)))
