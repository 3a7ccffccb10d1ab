"""Leader-follower equilibrium of the coding game.

The adversary (follower) picks an acceptance probability ``alpha`` on the
characteristic curve to maximize its utility; the data collector (leader)
picks the threshold ``eta`` that maximizes its utility against the worst of
the adversary's best responses. :func:`build_noise` turns the chosen point
into a concrete noise distribution.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ConfigurationError, DomainError
from .frontier import (
    DEFAULT_ALPHA_MIN,
    DEFAULT_GRID,
    CharacteristicCurve,
    c_eta,
    characteristic_curve,
    check_alpha,
    phi_inverse,
)
from .kernels import GameParams, phi, psi

FORMS = ("log_linear", "linear", "ratio")
ALPHA_GRID = 4001
ALPHA_TOL = 1e-10
GAP_REL = 1e-8
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def value_tolerance(best: float) -> float:
    """Utility values within this of the maximum count as ties."""
    return 1e-9 * (1.0 + abs(best))


# --------------------------------------------------------------------------
# utilities


@dataclass(frozen=True)
class UtilitySpec:
    """One of three utility families over ``(mse, pa)``.

    ``log_linear``: ``a ln(mse) + b ln(pa)``; ``linear``: ``a mse + b pa``;
    ``ratio``: ``pa / mse**p`` with ``params == (p,)``.
    """

    form: str
    params: tuple

    def __post_init__(self):
        if self.form not in FORMS:
            raise ConfigurationError(f"unknown utility form {self.form!r}; expected one of {FORMS}")
        expected = 1 if self.form == "ratio" else 2
        params = tuple(float(v) for v in self.params)
        if len(params) != expected or not all(math.isfinite(v) for v in params):
            raise ConfigurationError(f"{self.form} utility needs {expected} finite parameter(s), got {self.params!r}")
        object.__setattr__(self, "params", params)

    @classmethod
    def log_linear(cls, a: float, b: float) -> "UtilitySpec":
        return cls("log_linear", (a, b))

    @classmethod
    def linear(cls, a: float, b: float) -> "UtilitySpec":
        return cls("linear", (a, b))

    @classmethod
    def ratio(cls, p: float) -> "UtilitySpec":
        return cls("ratio", (p,))

    @classmethod
    def from_dict(cls, data: dict) -> "UtilitySpec":
        try:
            form = data["form"]
            if form == "ratio":
                params = (data["p"],) if "p" in data else tuple(data["params"])
            else:
                params = (data["a"], data["b"]) if "a" in data else tuple(data["params"])
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"malformed utility specification {data!r}") from exc
        return cls(form, params)

    def to_dict(self) -> dict:
        if self.form == "ratio":
            return {"form": "ratio", "p": self.params[0]}
        return {"form": self.form, "a": self.params[0], "b": self.params[1]}

    def check_role(self, role: str) -> "UtilitySpec":
        """Raise :class:`ConfigurationError` unless the monotonicity fits ``role``.

        The adversary must be strictly increasing in both MSE and PA; the
        data collector must be non-increasing in MSE and non-decreasing in PA.
        """
        if role == "adversary":
            if self.form == "ratio":
                raise ConfigurationError("ratio utilities decrease in MSE and cannot describe the adversary")
            a, b = self.params
            if not (a > 0 and b > 0):
                raise ConfigurationError(
                    f"adversary utility must be strictly increasing in MSE and PA (need a > 0, b > 0), got a={a}, b={b}"
                )
        elif role == "dc":
            if self.form == "ratio":
                if not self.params[0] >= 0:
                    raise ConfigurationError(f"DC ratio utility needs p >= 0, got {self.params[0]}")
            else:
                a, b = self.params
                if not (a <= 0 and b >= 0):
                    raise ConfigurationError(
                        f"DC utility must be non-increasing in MSE and non-decreasing in PA (need a <= 0, b >= 0), got a={a}, b={b}"
                    )
        else:
            raise ConfigurationError(f"unknown role {role!r}")
        return self


def evaluate_utility(spec: UtilitySpec, mse, pa):
    """Evaluate ``spec`` at ``(mse, pa)``; logarithms are natural."""
    mse = np.asarray(mse, dtype=float)
    pa = np.asarray(pa, dtype=float)
    if np.any(~(mse > 0)):
        raise DomainError(f"mse must be > 0, got {mse!r}")
    if np.any(~((pa > 0) & (pa <= 1))):
        raise DomainError(f"pa must lie in (0, 1], got {pa!r}")
    if spec.form == "log_linear":
        a, b = spec.params
        out = a * np.log(mse) + b * np.log(pa)
    elif spec.form == "linear":
        a, b = spec.params
        out = a * mse + b * pa
    else:
        out = pa / mse ** spec.params[0]
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# noise distributions


@dataclass(frozen=True)
class SingleShell:
    """Noise uniform on the sphere of radius ``z``."""

    z: float
    variant: str = field(default="single_shell", init=False)

    def radii(self) -> tuple:
        return (self.z,)

    def weights(self) -> tuple:
        return (1.0,)

    def validate(self, params: GameParams) -> "SingleShell":
        tol = 1e-12 * params.delta
        if not (params.z_low - tol <= self.z <= params.z_high + tol):
            raise DomainError(f"shell radius {self.z} outside [{params.z_low}, {params.z_high}]")
        return self

    def to_dict(self) -> dict:
        return {"variant": self.variant, "z": self.z}


@dataclass(frozen=True)
class TwoShellMixture:
    """Mixture of two uniform spheres, radii ``z1 < z2`` with weights ``beta1, beta2``."""

    z1: float
    z2: float
    beta1: float
    beta2: float
    variant: str = field(default="two_shell_mixture", init=False)

    def __post_init__(self):
        if not self.z1 < self.z2:
            raise DomainError(f"mixture radii must satisfy z1 < z2, got {self.z1}, {self.z2}")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise DomainError(f"mixture weights must lie in (0, 1), got {self.beta1}, {self.beta2}")
        if abs(self.beta1 + self.beta2 - 1.0) > 1e-12:
            raise DomainError(f"mixture weights must sum to 1, got {self.beta1 + self.beta2!r}")

    def radii(self) -> tuple:
        return (self.z1, self.z2)

    def weights(self) -> tuple:
        return (self.beta1, self.beta2)

    def validate(self, params: GameParams, alpha: float | None = None) -> "TwoShellMixture":
        tol = 1e-12 * params.delta
        for z in self.radii():
            if not (params.z_low - tol <= z <= params.z_high + tol):
                raise DomainError(f"shell radius {z} outside [{params.z_low}, {params.z_high}]")
        if alpha is not None:
            got = self.beta1 * phi(params, self.z1) + self.beta2 * phi(params, self.z2)
            if abs(got - alpha) > 1e-9:
                raise DomainError(f"mixture acceptance {got} does not match target {alpha}")
        return self

    def to_dict(self) -> dict:
        return {"variant": self.variant, "z1": self.z1, "z2": self.z2, "beta1": self.beta1, "beta2": self.beta2}


NoiseSpec = Union[SingleShell, TwoShellMixture]


def noise_from_dict(data: dict) -> NoiseSpec:
    variant = data.get("variant")
    if variant == "single_shell":
        return SingleShell(float(data["z"]))
    if variant == "two_shell_mixture":
        return TwoShellMixture(float(data["z1"]), float(data["z2"]), float(data["beta1"]), float(data["beta2"]))
    raise ConfigurationError(f"unknown noise variant {variant!r}")


def noise_moments(params: GameParams, noise: NoiseSpec) -> tuple[float, float]:
    """Acceptance probability and MSE induced by ``noise``."""
    z = np.asarray(noise.radii())
    w = np.asarray(noise.weights())
    pa = float(np.dot(w, phi(params, z)))
    weight = float(np.dot(w, psi(params, z)))
    return pa, (weight / (4.0 * pa) if pa > 0 else math.nan)


def build_noise(curve: CharacteristicCurve, alpha_star: float) -> NoiseSpec:
    """Adversarial noise achieving the envelope at ``alpha_star``.

    A single shell at ``phi_inverse(alpha_star)`` when the envelope touches
    the raw locus there (relative gap at most 1e-8); otherwise the two
    shells at the ends of the bracketing chord. Mixture shells are ordered
    by radius, so ``z1`` belongs to the larger acceptance probability.
    """
    alpha = float(check_alpha(curve, alpha_star))
    params = curve.params
    k = curve.bracket(alpha)
    if not curve.chord_edges()[k]:
        return SingleShell(float(phi_inverse(params, alpha)))
    q_lo, q_hi = float(curve.q[k]), float(curve.q[k + 1])
    z_raw = float(phi_inverse(params, alpha))
    env = float(curve.envelope(alpha))
    raw = float(psi(params, z_raw))
    if alpha in (q_lo, q_hi) or abs(env - raw) <= GAP_REL * max(abs(env), 1e-300):
        return SingleShell(z_raw)
    z_small, z_large = float(curve.z[k + 1]), float(curve.z[k])
    beta1 = (alpha - q_lo) / (q_hi - q_lo)
    return TwoShellMixture(z_small, z_large, beta1, 1.0 - beta1)


# --------------------------------------------------------------------------
# follower


@dataclass(frozen=True)
class BestResponse:
    """Maximizers of the adversary's utility along the curve."""

    alphas: tuple
    value: float
    plateau: tuple | None = None


def _golden_max(f, lo: float, hi: float, tol: float = ALPHA_TOL) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    candidates = [(f(x), x), (fc, c), (fd, d)]
    best = max(candidates, key=lambda t: t[0])
    return best[1], best[0]


def _dedupe(values, tol: float = 1e-9) -> list:
    out: list = []
    for v in sorted(values):
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


def _alpha_grid(curve: CharacteristicCurve, points: int) -> np.ndarray:
    grid = np.linspace(curve.alpha_min, 1.0, points)[1:]
    chords = np.nonzero(curve.chord_edges())[0]
    ends = np.concatenate([curve.q[chords], curve.q[chords + 1]])
    ends = ends[(ends > curve.alpha_min) & (ends <= 1.0)]
    return np.unique(np.concatenate([grid, ends]))


def best_response(curve: CharacteristicCurve, adv: UtilitySpec, grid_points: int = ALPHA_GRID) -> BestResponse:
    """All ``alpha`` maximizing ``U_AD(c_eta(alpha), alpha)`` up to the tie tolerance.

    A dense grid locates the local maxima, each is refined by golden-section
    search to 1e-10 in ``alpha``, and every refined point whose value is
    within ``1e-9 (1 + |max|)`` of the best is returned. When the grid shows
    a flat run of maximal values, its endpoints are reported as the plateau.
    """
    adv.check_role("adversary")
    alphas = _alpha_grid(curve, grid_points)

    def utility(a):
        return evaluate_utility(adv, c_eta(curve, a), a)

    values = np.asarray(utility(alphas))
    top = float(values.max())
    margin = 1e-3 * (1.0 + abs(top))
    left = np.r_[-np.inf, values[:-1]]
    right = np.r_[values[1:], -np.inf]
    peaks = np.nonzero((values >= left) & (values >= right) & (values >= top - margin))[0]
    peaks = peaks[np.argsort(-values[peaks], kind="stable")][:50]

    found = []
    for i in peaks:
        lo = alphas[max(i - 1, 0)]
        hi = alphas[min(i + 1, len(alphas) - 1)]
        x, fx = _golden_max(utility, float(lo), float(hi))
        if values[i] > fx:
            x, fx = float(alphas[i]), float(values[i])
        found.append((x, fx))
    best = max(v for _, v in found)
    eps = value_tolerance(best)
    winners = _dedupe(x for x, v in found if v >= best - eps)

    plateau = None
    flat = np.nonzero(values >= best - eps)[0]
    if len(flat) > 1:
        plateau = (float(alphas[flat[0]]), float(alphas[flat[-1]]))
        winners = _dedupe(list(winners) + [float(alphas[j]) for j in flat])
    return BestResponse(tuple(float(w) for w in winners), float(best), plateau)


def worst_case_dc_value(curve: CharacteristicCurve, responses: Iterable[float], dc: UtilitySpec) -> tuple[float, float]:
    """The tied best response that is worst for the data collector.

    Ties in the DC's utility go to the smallest ``alpha``.
    """
    dc.check_role("dc")
    alphas = sorted(float(a) for a in responses)
    if not alphas:
        raise DomainError("response set is empty")
    values = [evaluate_utility(dc, c_eta(curve, a), a) for a in alphas]
    worst = min(values)
    eps = value_tolerance(worst)
    for a, v in zip(alphas, values):
        if v <= worst + eps:
            return a, float(v)
    raise AssertionError("unreachable")


# --------------------------------------------------------------------------
# leader


@dataclass(frozen=True)
class EtaRow:
    eta: float
    alpha: float
    mse: float
    u_ad: float
    u_dc: float


@dataclass(frozen=True)
class EquilibriumReport:
    eta_star: float
    alpha_star: float
    mse_star: float
    u_ad: float
    u_dc: float
    noise: NoiseSpec
    per_eta_table: tuple
    diagnostics: dict = field(default_factory=dict)

    @property
    def pa_star(self) -> float:
        return self.alpha_star

    def to_dict(self) -> dict:
        return {
            "eta_star": self.eta_star,
            "alpha_star": self.alpha_star,
            "mse_star": self.mse_star,
            "u_ad": self.u_ad,
            "u_dc": self.u_dc,
            "noise": self.noise.to_dict(),
            "per_eta_table": [asdict(row) for row in self.per_eta_table],
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return dumps_sig(self.to_dict())


def _round_sig(obj, digits: int = 10):
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}") if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round_sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_sig(v, digits) for v in obj]
    return obj


def dumps_sig(obj, digits: int = 10) -> str:
    """JSON with every float rounded to ``digits`` significant digits."""
    return json.dumps(_round_sig(obj, digits), indent=2) + "\n"


@dataclass(frozen=True)
class _EtaOutcome:
    curve: CharacteristicCurve
    response: BestResponse
    row: EtaRow


def solve_eta(
    params: GameParams,
    adv: UtilitySpec,
    dc: UtilitySpec,
    grid_size: int = DEFAULT_GRID,
    alpha_min: float = DEFAULT_ALPHA_MIN,
    alpha_points: int = ALPHA_GRID,
) -> _EtaOutcome:
    """Curve, follower response and worst-case leader value at one ``eta``."""
    curve = characteristic_curve(params, grid_size, alpha_min)
    response = best_response(curve, adv, alpha_points)
    alpha, u_dc = worst_case_dc_value(curve, response.alphas, dc)
    mse = c_eta(curve, alpha)
    row = EtaRow(params.eta, alpha, mse, evaluate_utility(adv, mse, alpha), u_dc)
    return _EtaOutcome(curve, response, row)


def optimal_eta(
    n: int,
    delta: float,
    eta_grid: Sequence[float],
    adv: UtilitySpec,
    dc: UtilitySpec,
    grid_size: int = DEFAULT_GRID,
    alpha_min: float = DEFAULT_ALPHA_MIN,
    alpha_points: int = ALPHA_GRID,
    refine: bool = False,
    workers: int = 1,
) -> EquilibriumReport:
    """Threshold maximizing the data collector's worst-case utility over ``eta_grid``.

    Ties in the leader's value go to the smallest ``eta``. With
    ``refine=True`` a golden-section search between the neighbours of the
    grid winner may move ``eta_star`` off the grid.
    """
    adv.check_role("adversary")
    dc.check_role("dc")
    etas = sorted({float(e) for e in eta_grid})
    if not etas:
        raise ConfigurationError("eta grid is empty")
    base = [GameParams(n, delta, e) for e in etas]

    def job(p):
        return solve_eta(p, adv, dc, grid_size, alpha_min, alpha_points)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(job, base))
    else:
        outcomes = [job(p) for p in base]

    best_val = max(o.row.u_dc for o in outcomes)
    eps = value_tolerance(best_val)
    winner = next(o for o in outcomes if o.row.u_dc >= best_val - eps)

    if refine and len(etas) > 1:
        i = etas.index(winner.row.eta)
        lo, hi = etas[max(i - 1, 0)], etas[min(i + 1, len(etas) - 1)]
        cache: dict = {}

        def leader(e):
            if e not in cache:
                cache[e] = job(GameParams(n, delta, e))
            return cache[e].row.u_dc

        e_ref, _ = _golden_max(leader, lo, hi, tol=1e-4)
        refined = cache.get(e_ref) or job(GameParams(n, delta, e_ref))
        if refined.row.u_dc > winner.row.u_dc + value_tolerance(winner.row.u_dc):
            winner = refined

    noise = build_noise(winner.curve, winner.row.alpha).validate(winner.curve.params)
    diagnostics = {
        "n": n,
        "delta": delta,
        "grid_size": grid_size,
        "alpha_min": alpha_min,
        "responses": list(winner.response.alphas),
        "plateau": list(winner.response.plateau) if winner.response.plateau else None,
        "hull_vertices": int(len(winner.curve.q)),
    }
    return EquilibriumReport(
        eta_star=winner.row.eta,
        alpha_star=winner.row.alpha,
        mse_star=winner.row.mse,
        u_ad=winner.row.u_ad,
        u_dc=winner.row.u_dc,
        noise=noise,
        per_eta_table=tuple(o.row for o in outcomes),
        diagnostics=diagnostics,
    )


def eta_grid(start: float = 2.0, stop: float = 8.0, step: float = 0.2) -> list[float]:
    """Inclusive arithmetic grid, rounded to suppress accumulation error."""
    if step <= 0:
        raise ConfigurationError(f"eta step must be > 0, got {step}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]
