"""Run configuration: YAML files validated into a frozen pydantic model."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from bubbleflow import CONFIG_DIR
from bubbleflow.constants import (
    BOUNDARY_TOL,
    CONSTRAINT_TOL,
    DEFAULT_L_MAX,
    DEFAULT_N_PHI,
    DEFAULT_N_THETA,
    FIRST_DAMPING,
    LAMBDA_CAP,
    MAX_NEWTON,
    MIN_L_MAX,
    STOP_TOL,
    TRACE_ORDER_GAP,
)
from bubbleflow.exceptions import ConfigError
from bubbleflow.utils.yaml_utils import resolve_includes

SUITE_NAMES = (
    "round",
    "anchors",
    "surfaces",
    "barycenter",
    "expansion",
    "third_derivative",
    "critical_points",
    "flow",
    "parity",
    "ode",
    "convergence",
)


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PlaneConfig(_Model):
    kind: Literal["plane"] = "plane"


class SphereConfig(_Model):
    kind: Literal["sphere"] = "sphere"
    radius: float = Field(1.0, gt=0)
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)


class EllipsoidConfig(_Model):
    kind: Literal["ellipsoid"] = "ellipsoid"
    a: float = Field(1.0, gt=0)
    b: float = Field(1.2, gt=0)
    c: float = Field(0.8, gt=0)


class GraphConfig(_Model):
    kind: Literal["graph"] = "graph"
    amplitude: float = 0.1
    width: float = Field(1.0, gt=0)
    center: tuple[float, float] = (0.0, 0.0)


SurfaceConfig = Annotated[PlaneConfig | SphereConfig | EllipsoidConfig | GraphConfig, Field(discriminator="kind")]


class StartConfig(_Model):
    #: World point near the host; defaults to the surface's own anchor.
    anchor: tuple[float, float, float] | None = None
    #: Chart coordinates of the starting barycenter relative to the anchor.
    p0: tuple[float, float] = (0.0, 0.0)


class ModeAmplitude(_Model):
    l: int = Field(ge=0)
    m: int
    amplitude: float

    @model_validator(mode="after")
    def _check_order(self) -> ModeAmplitude:
        if abs(self.m) > self.l:
            raise ValueError(f"mode order |m|={abs(self.m)} exceeds degree l={self.l}")
        if (self.l - abs(self.m)) % 2:
            raise ValueError(f"seed mode (l={self.l}, m={self.m}) is not in the Neumann class (l - |m| must be even)")
        return self


class SeedConfig(_Model):
    modes: list[ModeAmplitude] = Field(default_factory=list)


class ResolutionConfig(_Model):
    l_max: int = Field(DEFAULT_L_MAX, ge=MIN_L_MAX)
    n_theta: int = DEFAULT_N_THETA
    n_phi: int = DEFAULT_N_PHI
    #: Highest longitudinal order of the boundary traces; `null` picks l_max - 3, the largest allowed.
    trace_order: int = Field(ge=1)

    @model_validator(mode="before")
    @classmethod
    def _default_trace_order(cls, data: Any) -> Any:
        l_max = data.get("l_max", DEFAULT_L_MAX) if isinstance(data, dict) else None
        if isinstance(l_max, int) and data.get("trace_order") is None:
            data = {**data, "trace_order": l_max - TRACE_ORDER_GAP}
        return data

    @model_validator(mode="after")
    def _check_grid(self) -> ResolutionConfig:
        if self.trace_order + 3 > self.l_max:
            raise ValueError(f"trace_order + 3 must not exceed l_max ({self.trace_order} + 3 > {self.l_max})")
        needed = 2 * self.l_max + 2
        if self.n_theta < needed or self.n_phi < needed:
            raise ValueError(f"n_theta and n_phi must be at least 2*l_max + 2 = {needed}")
        return self


class TimeConfig(_Model):
    #: Step of the rescaled clock; `null` picks the stability bound of the resolution.
    dt: float | None = Field(None, gt=0)
    t_end: float = Field(0.02, gt=0)
    max_steps: int = Field(2000, ge=1)
    stop_tol: float = Field(STOP_TOL, gt=0)
    record_every: int = Field(1, ge=1)
    snapshot_every: int = Field(100, ge=1)


class SolverConfig(_Model):
    boundary_tol: float = Field(BOUNDARY_TOL, gt=0)
    constraint_tol: float = Field(CONSTRAINT_TOL, gt=0)
    max_newton: int = Field(MAX_NEWTON, ge=1)
    first_damping: float = Field(FIRST_DAMPING, gt=0, le=1)


class OutputConfig(_Model):
    out_dir: Path | None = None


class VerifyConfig(_Model):
    suites: list[str] = Field(default_factory=lambda: ["round", "anchors", "surfaces", "barycenter"])
    lambdas: list[float] = Field(default_factory=lambda: [0.08, 0.04, 0.02])

    @field_validator("suites")
    @classmethod
    def _known_suites(cls, value: list[str]) -> list[str]:
        unknown = [s for s in value if s != "all" and s not in SUITE_NAMES]
        if unknown:
            raise ValueError(f"unknown suites {unknown}; choose from {['all', *SUITE_NAMES]}")
        return value

    @field_validator("lambdas")
    @classmethod
    def _positive(cls, value: list[float]) -> list[float]:
        if any(lam <= 0 or lam > LAMBDA_CAP for lam in value):
            raise ValueError(f"lambdas must lie in (0, {LAMBDA_CAP}]")
        return value


class RunConfig(_Model):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    surface: SurfaceConfig = Field(default_factory=SphereConfig)
    lam: float = Field(0.05, alias="lambda")
    start: StartConfig = Field(default_factory=StartConfig)
    seed: SeedConfig = Field(default_factory=SeedConfig)
    resolution: ResolutionConfig = Field(default_factory=ResolutionConfig)
    time: TimeConfig = Field(default_factory=TimeConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    random_seed: int = Field(0, ge=0)
    threads: int = Field(1, ge=1)

    @field_validator("lam")
    @classmethod
    def _lambda_range(cls, value: float) -> float:
        if not 0 < value <= LAMBDA_CAP:
            raise ValueError(f"lambda must be in (0, lambda_max] with lambda_max = {LAMBDA_CAP}")
        return value

    @model_validator(mode="after")
    def _seed_resolved(self) -> RunConfig:
        too_high = [(mode.l, mode.m) for mode in self.seed.modes if mode.l > self.resolution.l_max]
        if too_high:
            raise ValueError(f"seed modes {too_high} are above l_max={self.resolution.l_max}")
        return self

    @property
    def suites(self) -> list[str]:
        return list(SUITE_NAMES) if "all" in self.verify.suites else list(self.verify.suites)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json", by_alias=True), sort_keys=False)


def config_hash(config: RunConfig) -> str:
    canonical = json.dumps(config.model_dump(mode="json", by_alias=True), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _format_validation_error(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item["loc"]) or "<root>"
        if item["type"] == "extra_forbidden":
            lines.append(f"{loc}: unknown key")
        else:
            lines.append(f"{loc}: {item['msg']}")
    return "; ".join(lines)


def config_from_dict(data: dict | None) -> RunConfig:
    try:
        return RunConfig.model_validate(data or {})
    except ValidationError as e:
        raise ConfigError(f"invalid config: {_format_validation_error(e)}") from e


def parse_config(path: Path) -> RunConfig:
    """Read, include-resolve and validate a YAML run config."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        text = resolve_includes(path.read_text(), base_dir=path.parent, fallback_dir=CONFIG_DIR)
        data = yaml.safe_load(text)
    except FileNotFoundError as e:
        raise ConfigError(str(e)) from e
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ""
        raise ConfigError(f"cannot parse {path}{where}: {getattr(e, 'problem', e)}") from e
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path} must contain a mapping at the top level")
    return config_from_dict(data)
