"""Experiment configuration documents."""
from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from qnoise.analysis import DEFAULT_WINDOW
from qnoise.averaging import (
    SERIES_TOLERANCE,
    Mode,
    NoiseModel,
    QuadratureSpec,
    log_time_grid,
)
from qnoise.errors import ConfigError
from qnoise.noise import Family, NoiseDensity
from qnoise.qubit import DensityMatrix

_logger = logging.getLogger(__name__)


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DensityBlock(_Block):
    """A noise density by family name and shape parameters.

    `half_width` is eta for the centered families and w for the shifted ones.
    """

    family: Family
    half_width: float = Field(default=1.0, ge=0)
    n: int = Field(default=0, ge=0)
    k: int = Field(default=0, ge=0)
    center: float = 0.0

    def to_density(self) -> NoiseDensity:
        return NoiseDensity(
            self.family,
            half_width=self.half_width,
            n=self.n,
            k=self.k,
            center=self.center,
        )

    @model_validator(mode="after")
    def _check_density(self) -> DensityBlock:
        self.to_density()
        return self


class ModelBlock(_Block):
    eps: float = Field(gt=0)
    mu_o: DensityBlock
    mu_d: DensityBlock

    def to_model(self) -> NoiseModel:
        return NoiseModel(self.eps, self.mu_o.to_density(), self.mu_d.to_density())

    @model_validator(mode="after")
    def _check_model(self) -> ModelBlock:
        self.to_model()
        return self


class StateBlock(_Block):
    rho11: float = Field(default=1.0, ge=0, le=1)
    re_rho12: float = 0.0
    im_rho12: float = 0.0

    def to_state(self) -> DensityMatrix:
        return DensityMatrix(self.rho11, complex(self.re_rho12, self.im_rho12))

    @model_validator(mode="after")
    def _check_positive(self) -> StateBlock:
        if not self.to_state().is_positive():
            msg = "initial state is not positive: |rho12|^2 > rho11 * (1 - rho11)"
            raise ValueError(msg)
        return self


class TimeGridBlock(_Block):
    t_min: float = Field(default=1e2, ge=0)
    t_max: float = Field(default=1e4, gt=0)
    points_per_decade: int = Field(default=40, ge=40)
    spacing: Literal["log", "linear"] = "log"
    points: int | None = Field(default=None, ge=2)

    @model_validator(mode="after")
    def _check_range(self) -> TimeGridBlock:
        if self.t_max <= self.t_min:
            msg = "t_max must exceed t_min"
            raise ValueError(msg)
        if self.spacing == "log" and self.t_min <= 0:
            msg = "log spacing needs t_min > 0"
            raise ValueError(msg)
        if self.spacing == "linear" and self.points is None:
            msg = "linear spacing needs 'points'"
            raise ValueError(msg)
        return self

    def times(self) -> np.ndarray:
        if self.spacing == "linear":
            return np.linspace(self.t_min, self.t_max, self.points or 2)
        return log_time_grid(self.t_min, self.t_max, self.points_per_decade)


class QuadratureBlock(_Block):
    base_order: int = Field(default=12, ge=4)
    panels_per_unit_phase: float = Field(default=0.5, gt=0)
    tolerance: float = Field(default=SERIES_TOLERANCE, gt=0)
    mode: Mode = Mode.QUADRATURE
    samples: int = Field(default=100_000, ge=1)

    def to_spec(self, seed: int) -> QuadratureSpec:
        return QuadratureSpec(
            base_order=self.base_order,
            panels_per_unit_phase=self.panels_per_unit_phase,
            tolerance=self.tolerance,
            mode=self.mode,
            samples=self.samples,
            seed=seed,
        )


class FrozenBlock(_Block):
    """A single noise realization for the evolve command."""

    x: float = 0.0
    y: float = 0.0


class FitBlock(_Block):
    t_min: float = Field(default=DEFAULT_WINDOW[0], gt=0)
    t_max: float = Field(default=DEFAULT_WINDOW[1], gt=0)

    @model_validator(mode="after")
    def _check_window(self) -> FitBlock:
        if self.t_max <= self.t_min:
            msg = "fit t_max must exceed t_min"
            raise ValueError(msg)
        return self

    @property
    def window(self) -> tuple[float, float]:
        return self.t_min, self.t_max


class OutputBlock(_Block):
    directory: str = "out"


class ExperimentConfig(_Block):
    """Everything needed to reproduce one experiment."""

    model: ModelBlock
    initial_state: StateBlock = StateBlock()
    time_grid: TimeGridBlock = TimeGridBlock()
    quadrature: QuadratureBlock = QuadratureBlock()
    seed: int = Field(default=0, ge=0)
    threads: int = Field(default=1, ge=1)
    frozen: FrozenBlock | None = None
    fit: FitBlock = FitBlock()
    output: OutputBlock = OutputBlock()

    @property
    def noise_model(self) -> NoiseModel:
        return self.model.to_model()

    @property
    def rho0(self) -> DensityMatrix:
        return self.initial_state.to_state()

    @property
    def spec(self) -> QuadratureSpec:
        return self.quadrature.to_spec(self.seed)

    @property
    def out_dir(self) -> Path:
        return Path(self.output.directory)

    def with_overrides(
        self,
        seed: int | None = None,
        out: str | None = None,
        threads: int | None = None,
    ) -> ExperimentConfig:
        """Apply command-line overrides and re-validate."""
        data = self.resolved()
        if seed is not None:
            data["seed"] = seed
        if out is not None:
            data["output"] = {"directory": out}
        if threads is not None:
            data["threads"] = threads
        return parse_config(json.dumps(data))

    def resolved(self) -> dict:
        """The full config, defaults included, as plain JSON data."""
        return self.model_dump(mode="json")


def _line_of(text: str, loc: tuple[int | str, ...]) -> int | None:
    keys = [part for part in loc if isinstance(part, str)]
    if not keys:
        return None
    pattern = re.compile(rf'"{re.escape(keys[-1])}"\s*:')
    for number, line in enumerate(text.splitlines(), start=1):
        if pattern.search(line):
            return number
    return None


def parse_config(text: str) -> ExperimentConfig:
    """Parse a JSON config, turning every failure into a ConfigError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as ex:
        msg = f"Config is not valid JSON (line {ex.lineno}): {ex.msg}"
        raise ConfigError(msg) from ex

    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as ex:
        error = ex.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or "<root>"
        line = _line_of(text, error["loc"])
        where = f" (line {line})" if line else ""
        msg = f"{field}{where}: {error['msg']}"
        raise ConfigError(msg) from ex


def load_config(path: Path) -> ExperimentConfig:
    try:
        text = path.read_text()
    except OSError as ex:
        msg = f"Couldn't read config {path}: {ex}"
        raise ConfigError(msg) from ex
    _logger.debug("Loaded config %s", path)
    return parse_config(text)
