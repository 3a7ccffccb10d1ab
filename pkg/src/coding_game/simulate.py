"""Monte-Carlo replay of the two-node acceptance test.

The shared ground truth cancels in both the acceptance statistic and the
error of the averaged estimate, so only the honest noise ``N_h`` and the
adversarial noise ``N_a`` are sampled.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ConfigurationError, DomainError
from .game import NoiseSpec, SingleShell, TwoShellMixture
from .kernels import GameParams

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One step of the SplitMix64 mixer (Steele, Lea and Flood)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for chunk ``index``; independent of how chunks are scheduled."""
    return np.random.Generator(np.random.PCG64((int(seed) & _MASK64) ^ splitmix64(index)))


@dataclass(frozen=True)
class FixedMagnitude:
    """Adversarial noise of exact magnitude ``z`` in a uniform random direction."""

    z: float

    def radii(self) -> tuple:
        return (self.z,)

    def weights(self) -> tuple:
        return (1.0,)


def _directions(n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    g = rng.standard_normal((size, n))
    norm = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero Gaussian vector has probability zero; guard anyway
    bad = norm[:, 0] == 0
    if np.any(bad):
        g[bad, 0], norm[bad] = 1.0, 1.0
    return g / norm


def sample_uniform_ball(n: int, r: float, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Uniform draws from the solid ball: direction times ``r U**(1/n)``."""
    if not r > 0:
        raise DomainError(f"radius must be > 0, got {r}")
    m = 1 if size is None else int(size)
    radius = r * rng.random(m) ** (1.0 / n)
    out = _directions(n, rng, m) * radius[:, None]
    return out[0] if size is None else out


def sample_shell(n: int, z: float, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Uniform draws from the sphere of radius ``z``."""
    if not z > 0:
        raise DomainError(f"shell radius must be > 0, got {z}")
    m = 1 if size is None else int(size)
    out = _directions(n, rng, m) * z
    return out[0] if size is None else out


def sample_noise(
    spec: Union[NoiseSpec, FixedMagnitude], n: int, rng: np.random.Generator, size: Optional[int] = None
) -> np.ndarray:
    """Draws from a shell or two-shell mixture noise distribution."""
    if isinstance(spec, (SingleShell, FixedMagnitude)):
        if spec.z == 0:
            return np.zeros(n) if size is None else np.zeros((int(size), n))
        return sample_shell(n, spec.z, rng, size)
    if isinstance(spec, TwoShellMixture):
        m = 1 if size is None else int(size)
        first = rng.random(m) < spec.beta1
        radius = np.where(first, spec.z1, spec.z2)
        out = _directions(n, rng, m) * radius[:, None]
        return out[0] if size is None else out
    raise ConfigurationError(f"unsupported noise specification {spec!r}")


@dataclass(frozen=True)
class SimConfig:
    params: GameParams
    noise: Union[NoiseSpec, FixedMagnitude]
    samples: int
    seed: int = 0
    chunk_size: int = 8192
    workers: int = 1

    def __post_init__(self):
        if int(self.samples) < 1:
            raise ConfigurationError(f"samples must be >= 1, got {self.samples}")
        if int(self.chunk_size) < 1:
            raise ConfigurationError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if not 0 <= int(self.seed) <= _MASK64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if int(self.workers) < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class SimResult:
    pa_hat: float
    pa_stderr: float
    mse_hat: Optional[float]
    mse_stderr: Optional[float]
    accepted: int
    samples: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "pa_hat": self.pa_hat,
            "pa_stderr": self.pa_stderr,
            "mse_hat": self.mse_hat,
            "mse_stderr": self.mse_stderr,
            "accepted": self.accepted,
            "samples": self.samples,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _chunk_stats(config: SimConfig, index: int, size: int) -> tuple[int, float, float]:
    """Accepted count, mean and centred sum of squares of the error in one chunk."""
    p = config.params
    rng = chunk_rng(config.seed, index)
    honest = sample_uniform_ball(p.n, p.delta, rng, size)
    adv = sample_noise(config.noise, p.n, rng, size)
    gap = np.linalg.norm(honest - adv, axis=1)
    accept = gap <= p.eta * p.delta
    k = int(accept.sum())
    if k == 0:
        return 0, 0.0, 0.0
    err = np.sum((0.5 * (honest[accept] + adv[accept])) ** 2, axis=1)
    mean = float(err.mean())
    return k, mean, float(np.sum((err - mean) ** 2))


def run(config: SimConfig) -> SimResult:
    """Empirical acceptance probability and conditional MSE.

    Samples are split into chunks of ``chunk_size``, each with its own
    generator, and per-chunk statistics are merged in chunk order, so the
    result is bit-identical for any number of workers.
    """
    total, size = int(config.samples), int(config.chunk_size)
    sizes = [min(size, total - start) for start in range(0, total, size)]
    jobs = list(enumerate(sizes))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=int(config.workers)) as pool:
            stats = list(pool.map(lambda job: _chunk_stats(config, *job), jobs))
    else:
        stats = [_chunk_stats(config, *job) for job in jobs]

    # Chan et al. pairwise merge of (count, mean, M2), in chunk order
    count, mean, m2 = 0, 0.0, 0.0
    for k, mu, s in stats:
        if k == 0:
            continue
        new = count + k
        delta = mu - mean
        mean += delta * k / new
        m2 += s + delta * delta * count * k / new
        count = new

    pa = count / total
    pa_se = math.sqrt(pa * (1.0 - pa) / total)
    if count == 0:
        return SimResult(pa, pa_se, None, None, 0, total, int(config.seed))
    mse_se = math.sqrt(m2 / (count - 1) / count) if count > 1 else math.inf
    return SimResult(pa, pa_se, mean, mse_se, count, total, int(config.seed))
