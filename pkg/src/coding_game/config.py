"""Run configuration: JSON files, bundled manifests and flag overrides.

Precedence is command-line flags over file values over defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import ConfigurationError, DomainError
from .frontier import DEFAULT_ALPHA_MIN, DEFAULT_GRID
from .game import UtilitySpec, eta_grid
from .kernels import GameParams

MANIFESTS = ("example1", "example2_case1", "example2_case2", "example3")


@dataclass(frozen=True)
class SimSettings:
    samples: int = 1_000_000
    seed: int = 0
    chunk_size: int = 8192
    workers: int = 1


@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    delta: float = 1.0
    etas: tuple = (5.0,)
    grid_size: int = DEFAULT_GRID
    alpha_min: float = DEFAULT_ALPHA_MIN
    adversary: Optional[UtilitySpec] = None
    dc: Optional[UtilitySpec] = None
    sim: SimSettings = field(default_factory=SimSettings)
    out_dir: str = "out"

    def params(self, eta: Optional[float] = None) -> GameParams:
        return GameParams(self.n, self.delta, self.etas[0] if eta is None else eta)

    def validate(self) -> "RunConfig":
        """Check every invariant up front so no command fails half-way."""
        if not self.etas:
            raise ConfigurationError("eta grid is empty")
        for eta in self.etas:
            if not eta >= 2:
                raise ConfigurationError(f"eta={eta} is below the acceptance-policy floor eta >= 2")
        try:
            for eta in self.etas:
                GameParams(self.n, self.delta, eta)
        except DomainError as exc:
            raise ConfigurationError(str(exc)) from exc
        if self.grid_size < 3:
            raise ConfigurationError(f"grid_size must be >= 3, got {self.grid_size}")
        if not (0 < self.alpha_min < 1):
            raise ConfigurationError(f"alpha_min must lie in (0, 1), got {self.alpha_min}")
        if self.adversary is not None:
            self.adversary.check_role("adversary")
        if self.dc is not None:
            self.dc.check_role("dc")
        s = self.sim
        if s.samples < 1 or s.chunk_size < 1 or s.workers < 1:
            raise ConfigurationError(f"simulation counts must be positive, got {s}")
        if not 0 <= s.seed < 2**64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {s.seed}")
        return self


def _etas_from(game: dict) -> tuple:
    if "eta" in game:
        return (float(game["eta"]),)
    grid = game.get("eta_grid")
    if grid is None:
        return RunConfig.etas
    if isinstance(grid, dict):
        return tuple(eta_grid(float(grid.get("start", 2.0)), float(grid.get("stop", 8.0)), float(grid.get("step", 0.2))))
    if isinstance(grid, list):
        return tuple(float(e) for e in grid)
    raise ConfigurationError(f"eta_grid must be a list or a start/stop/step table, got {grid!r}")


def _number(value, kind, name):
    try:
        out = kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{name} must be a number, got {value!r}") from exc
    if kind is int and float(value) != out:
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if kind is float and not math.isfinite(out):
        raise ConfigurationError(f"{name} must be finite, got {value!r}")
    return out


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("configuration must be a JSON object")
    game = data.get("game", {})
    sweep = data.get("sweep", {})
    utils = data.get("utilities", {}) or {}
    sim = data.get("sim", {}) or {}
    output = data.get("output", {}) or {}
    base = RunConfig()
    return RunConfig(
        n=_number(game.get("n", base.n), int, "game.n"),
        delta=_number(game.get("delta", base.delta), float, "game.delta"),
        etas=_etas_from(game),
        grid_size=_number(sweep.get("grid_size", base.grid_size), int, "sweep.grid_size"),
        alpha_min=_number(sweep.get("alpha_min", base.alpha_min), float, "sweep.alpha_min"),
        adversary=UtilitySpec.from_dict(utils["adversary"]) if "adversary" in utils else None,
        dc=UtilitySpec.from_dict(utils["dc"]) if "dc" in utils else None,
        sim=SimSettings(
            samples=_number(sim.get("samples", base.sim.samples), int, "sim.samples"),
            seed=_number(sim.get("seed", base.sim.seed), int, "sim.seed"),
            chunk_size=_number(sim.get("chunk_size", base.sim.chunk_size), int, "sim.chunk_size"),
            workers=_number(sim.get("workers", base.sim.workers), int, "sim.workers"),
        ),
        out_dir=str(output.get("dir", base.out_dir)),
    )


def read_manifest(name: str) -> dict:
    """Raw JSON of a bundled example manifest."""
    if name not in MANIFESTS:
        raise ConfigurationError(f"unknown manifest {name!r}; bundled: {', '.join(MANIFESTS)}")
    text = resources.files("coding_game").joinpath("manifests", f"{name}.json").read_text()
    return json.loads(text)


def load(source: Optional[str] = None) -> RunConfig:
    """Load a config from a file path or a bundled manifest name."""
    if source is None:
        return RunConfig()
    path = Path(source)
    if path.is_file():
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    elif source in MANIFESTS:
        data = read_manifest(source)
    else:
        raise ConfigurationError(f"config {source!r} is neither a readable file nor a bundled manifest")
    return from_dict(data)


def apply_overrides(
    config: RunConfig,
    eta: Optional[float] = None,
    grid: Optional[int] = None,
    seed: Optional[int] = None,
    samples: Optional[int] = None,
    out: Optional[str] = None,
) -> RunConfig:
    """Flag values replace file values when given."""
    sim = config.sim
    if seed is not None:
        sim = replace(sim, seed=int(seed))
    if samples is not None:
        sim = replace(sim, samples=int(samples))
    return replace(
        config,
        etas=(float(eta),) if eta is not None else config.etas,
        grid_size=int(grid) if grid is not None else config.grid_size,
        sim=sim,
        out_dir=out if out is not None else config.out_dir,
    )
