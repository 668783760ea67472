"""Experiment configuration: schema validation with every violation reported at once."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .curves import DiscreteCurve, circle, ellipse, perturbed_circle
from .flow import FlowConfig
from .spaces import SpaceForm


class ConfigError(ValueError):
    def __init__(self, errors: list):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SpaceSpec(_Strict):
    kind: Literal["euclidean", "sphere", "hyperbolic"] = "euclidean"
    curvature: Optional[float] = None

    @model_validator(mode="after")
    def _curvature(self):
        K = self.curvature
        if K is None:
            self.curvature = {"euclidean": 0.0, "sphere": 1.0, "hyperbolic": -1.0}[self.kind]
            return self
        if K > 1.0:
            raise ValueError("K̄ ≤ 1 required")
        if self.kind == "euclidean" and K != 0.0:
            raise ValueError("euclidean space must have curvature 0")
        if self.kind == "sphere" and not K > 0:
            raise ValueError("sphere requires curvature > 0")
        if self.kind == "hyperbolic" and not K < 0:
            raise ValueError("hyperbolic space requires curvature < 0")
        return self

    def build(self) -> SpaceForm:
        return SpaceForm(self.kind, self.curvature)


class CircleInit(_Strict):
    kind: Literal["circle"]
    radius: float = Field(1.0, gt=0)
    center: tuple[float, float] = (0.0, 0.0)
    intrinsic: bool = False


class PerturbedCircleInit(_Strict):
    kind: Literal["perturbed_circle"]
    radius: float = Field(1.0, gt=0)
    amplitude: float = Field(0.1, ge=0, lt=1)
    modes: int = Field(5, ge=1)
    min_mode: int = Field(2, ge=1)


class EllipseInit(_Strict):
    kind: Literal["ellipse"]
    a: float = Field(2.0, gt=0)
    b: float = Field(1.0, gt=0)


class FileInit(_Strict):
    kind: Literal["file"]
    path: str


InitialSpec = Annotated[Union[CircleInit, PerturbedCircleInit, EllipseInit, FileInit],
                        Field(discriminator="kind")]


class Guards(_Strict):
    max_kappa: float = Field(1e6, gt=0)
    cfl: float = Field(0.05, gt=0)
    energy_tol: float = Field(1e-10, ge=0)
    max_halvings: int = Field(40, ge=0)
    dt_min: float = Field(1e-14, gt=0)


class ChecksSpec(_Strict):
    """Parameters of the inequality checks (all optional)."""

    surface: Literal["sphere", "torus"] = "sphere"
    grid: int = Field(64, ge=16)
    samples: int = Field(100, ge=1)
    ladder: list[int] = [128, 256, 512]
    p: float = 3.0
    j: int = Field(1, ge=0)
    s: int = Field(2, ge=1)


class ExperimentConfig(_Strict):
    space: SpaceSpec = SpaceSpec()
    m: int = 1
    N: int = Field(256, ge=16)
    t_end: float = Field(1.0, gt=0)
    sample_every: int = Field(10, ge=1)
    snapshot_every: Optional[int] = Field(None, ge=1)
    seed: int = 0
    initial: InitialSpec = CircleInit(kind="circle")
    guards: Guards = Guards()
    scheme: Literal["semi_implicit", "explicit"] = "semi_implicit"
    dt0: float = Field(1e-4, gt=0)
    dt_max: float = Field(1e-2, gt=0)
    norm_order: int = Field(3, ge=0)
    quadrature: Literal["speed", "chord"] = "speed"
    out: Optional[str] = None
    checks: ChecksSpec = ChecksSpec()

    @field_validator("m")
    @classmethod
    def _m(cls, v):
        if v < 1:
            raise ValueError("m must be ≥ 1 for n=1")
        return v

    def flow_config(self) -> FlowConfig:
        g = self.guards
        return FlowConfig(m=self.m, t_end=self.t_end, dt0=self.dt0, dt_max=self.dt_max, dt_min=g.dt_min,
                          max_halvings=g.max_halvings, energy_tol=g.energy_tol, max_kappa=g.max_kappa,
                          cfl=g.cfl, scheme=self.scheme, sample_every=self.sample_every,
                          norm_order=self.norm_order, quadrature=self.quadrature)

    def space_form(self) -> SpaceForm:
        return self.space.build()

    def initial_curve(self, N: int | None = None, base_dir: Path | None = None) -> DiscreteCurve:
        N = N or self.N
        space = self.space_form()
        init = self.initial
        if isinstance(init, CircleInit):
            return circle(N, init.radius, space, init.center, intrinsic=init.intrinsic)
        if isinstance(init, PerturbedCircleInit):
            return perturbed_circle(N, init.radius, init.amplitude, init.modes, self.seed, space,
                                    init.min_mode)
        if isinstance(init, EllipseInit):
            return ellipse(N, init.a, init.b, space, reparam=True)
        from .io import read_snapshot
        path = Path(init.path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return read_snapshot(path)


def _format_errors(err: ValidationError) -> list:
    out = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"] if not (isinstance(p, str) and p in
                                                         ("circle", "perturbed_circle", "ellipse", "file")))
        msg = e["msg"].removeprefix("Value error, ")
        out.append(f"{loc}: {msg}" if loc else msg)
    return out


def validate_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_errors(err)) from None


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists() or path.is_dir():
        raise ConfigError([f"config file not found: {path}"])
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError([f"malformed JSON: {err}"]) from None
    if not isinstance(data, dict):
        raise ConfigError(["top-level JSON value must be an object"])
    return validate_config(data)


def jsonable(obj):
    """Recursively replace non-finite floats with strings so the output is strict JSON."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return jsonable(obj.item())
    return obj
