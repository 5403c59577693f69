"""HTTP facade over the toolkit.

Runs execute synchronously inside the request and write their artifacts
to the server's filesystem, mirroring the CLI.  Request and response
bodies are the same pydantic models the config files use, so a config
file can be POSTed as-is.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__, harness
from .configs import RunConfig
from .metrics import hypervolume_exact, hypervolume_mc, pareto_front
from .preferences import min_pairwise_geodesic, preference_batch


class HealthResponse(BaseModel):
    status: str
    version: str


class RunRequest(BaseModel, extra="forbid"):
    config: RunConfig
    seed: Optional[int] = None
    out_dir: Optional[str] = None


class RunResponse(BaseModel):
    out_dir: str
    run_dirs: list[str]
    algorithm: str
    seeds: list[int]
    evaluations_per_seed: int
    summary: dict


class SummarizeRequest(BaseModel, extra="forbid"):
    run_dirs: list[str]
    out_file: Optional[str] = None
    checkpoints: Optional[list[int]] = None


class FrontsRequest(BaseModel, extra="forbid"):
    run_dirs: list[str]
    combined: bool = True
    out_file: Optional[str] = None


class PreferencesRequest(BaseModel, extra="forbid"):
    N: int = Field(ge=1)
    n: int = Field(ge=1)
    source: Literal["qmc", "mc"] = "qmc"
    seed: int = 0
    eps: float = 1e-3


class PreferencesResponse(BaseModel):
    vectors: list[list[float]]
    min_geodesic: Optional[float]


class HypervolumeRequest(BaseModel, extra="forbid"):
    points: list[list[float]]
    reference: Optional[list[float]] = None
    method: Literal["exact", "mc"] = "exact"
    samples: int = 100_000
    seed: int = 0


class HypervolumeResponse(BaseModel):
    value: float
    stderr: Optional[float] = None


class ParetoRequest(BaseModel, extra="forbid"):
    points: list[list[float]]


def create_app() -> FastAPI:
    app = FastAPI(title="paretogen", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/runs", response_model=RunResponse)
    def runs(req: RunRequest):
        try:
            manifest = harness.run(req.config, seed=req.seed, out_dir=req.out_dir)
        except (ValueError, RuntimeError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return RunResponse(**manifest)

    @app.post("/summarize")
    def summarize(req: SummarizeRequest):
        try:
            return harness.summarize(req.run_dirs, out_file=req.out_file,
                                     checkpoints=req.checkpoints)
        except (ValueError, FileNotFoundError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/fronts")
    def fronts(req: FrontsRequest):
        try:
            return harness.fronts(req.run_dirs, combined=req.combined,
                                  out_file=req.out_file)
        except (ValueError, FileNotFoundError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/preferences", response_model=PreferencesResponse)
    def preferences(req: PreferencesRequest):
        rng = np.random.default_rng(req.seed)
        try:
            rows = preference_batch(req.N, req.n, req.source, rng, eps=req.eps)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        geo = min_pairwise_geodesic(rows.T) if req.N > 1 and req.n > 1 else None
        return PreferencesResponse(vectors=rows.tolist(), min_geodesic=geo)

    @app.post("/hypervolume", response_model=HypervolumeResponse)
    def hypervolume(req: HypervolumeRequest):
        Y = np.asarray(req.points, dtype=float)
        ref = None if req.reference is None else np.asarray(req.reference, dtype=float)
        try:
            if req.method == "exact":
                return HypervolumeResponse(value=hypervolume_exact(Y, ref))
            est, se = hypervolume_mc(Y, ref, n_samples=req.samples,
                                     rng=np.random.default_rng(req.seed))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return HypervolumeResponse(value=est, stderr=se)

    @app.post("/pareto")
    def pareto(req: ParetoRequest):
        idx = pareto_front(np.asarray(req.points, dtype=float))
        return {"indices": idx.tolist()}

    return app


app = create_app()
