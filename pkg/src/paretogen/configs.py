"""Config schema shared by the harness, the HTTP service and the CLI.

Configs are plain pydantic models, so the same document validates as a
YAML/JSON file on disk and as a request body.  Builders turn the
validated configs into the numpy-side objects.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, Field, model_validator

from .diffusion import GmmModel, NoiseSchedule, make_schedule, standard_normal_model
from .objectives import ObjectiveSpec, make_multiwell

ALGORITHMS = ("img", "egd", "diffsbdd_mean", "diffsbdd_spea2", "hybrid")


class ScheduleConfig(BaseModel, extra="forbid"):
    T: int = 100
    beta_min: float = 1e-4
    beta_max: float = 0.02
    sigma_mode: Literal["marginal", "zero"] = "marginal"


class GmmConfig(BaseModel, extra="forbid"):
    weights: list[float]
    means: list[list[float]]
    covariances: list[list[float]]


class ProblemConfig(BaseModel, extra="forbid"):
    name: str
    kind: Literal["multiwell"] = "multiwell"
    n: int
    d: int
    anchors: list[list[float]]
    bounds: Optional[list[list[float]]] = None


class ImgParams(BaseModel, extra="forbid"):
    N: int = 64
    M: int = 8
    tau: int = 100
    selection: Literal["greedy", "probabilistic"] = "greedy"
    preference_source: Literal["qmc", "mc"] = "qmc"
    c_mode: Literal["running_max", "fixed"] = "running_max"
    fixed_c: Optional[list[float] | float] = None
    eps: float = 1e-3


class EaParams(BaseModel, extra="forbid"):
    P: int = 64
    generations: int = 3000
    tau: int = 25


class HybridParams(BaseModel, extra="forbid"):
    P: int = 64
    ea_steps: int = 500
    ea_tau: int = 25


class RunConfig(BaseModel, extra="forbid"):
    problem: ProblemConfig
    algorithm: Literal["img", "egd", "diffsbdd_mean", "diffsbdd_spea2", "hybrid"]
    model: Optional[GmmConfig] = None
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    img: Optional[ImgParams] = None
    ea: Optional[EaParams] = None
    hybrid: Optional[HybridParams] = None
    seeds: list[int] = Field(default_factory=lambda: [0])
    budget: Optional[int] = None
    out_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check(self):
        if self.algorithm == "img":
            if self.img is None:
                self.img = ImgParams()
        elif self.algorithm == "hybrid":
            if self.img is None:
                self.img = ImgParams()
            if self.hybrid is None:
                self.hybrid = HybridParams()
        else:
            if self.ea is None:
                self.ea = EaParams()
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        expected = expected_budget(self)
        if self.budget is not None and self.budget != expected:
            raise ValueError(
                f"budget {self.budget} is inconsistent with parameters "
                f"(expected {expected})")
        return self


def expected_budget(cfg: RunConfig) -> int:
    """Counted evaluations one seed of this config must consume."""
    if cfg.algorithm == "img":
        p = cfg.img or ImgParams()
        return p.N * p.M * p.tau
    if cfg.algorithm == "hybrid":
        ip = cfg.img or ImgParams()
        hp = cfg.hybrid or HybridParams()
        return hp.ea_steps * hp.P + ip.N * ip.M * ip.tau
    p = cfg.ea or EaParams()
    return p.P * p.generations


def build_schedule(cfg: ScheduleConfig) -> NoiseSchedule:
    return make_schedule(T=cfg.T, beta_min=cfg.beta_min, beta_max=cfg.beta_max,
                         sigma_mode=cfg.sigma_mode)


def build_model(cfg: Optional[GmmConfig], d: int) -> GmmModel:
    if cfg is None:
        return standard_normal_model(d)
    model = GmmModel(weights=np.asarray(cfg.weights),
                     means=np.asarray(cfg.means),
                     covariances=np.asarray(cfg.covariances))
    if model.d != d:
        raise ValueError(f"model dimension {model.d} != problem dimension {d}")
    return model


def build_problem(cfg: ProblemConfig) -> ObjectiveSpec:
    anchors = np.asarray(cfg.anchors, dtype=float)
    bounds = None if cfg.bounds is None else np.asarray(cfg.bounds, dtype=float)
    return make_multiwell(cfg.n, cfg.d, anchors, bounds=bounds, name=cfg.name)


def load_run_config(path) -> RunConfig:
    """Parse a YAML or JSON config file into a validated RunConfig."""
    with open(path, "r") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a mapping")
    return RunConfig(**data)
