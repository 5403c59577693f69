"""Preference-guided candidate selection on top of the analytic sampler.

Each of N instances carries its own preference direction lam.  At every
reverse step each instance spawns M candidate transitions; the pooled
B = N*M candidates are scored with the soft-min weight

    W(y; lam) = sum_k exp(-(y_k - c_k) / lam_k),

where c_k is a running upper bound of the observed k-th objective.  The
bound stands in for the intractable per-objective log-normalizer; only
weight ratios matter, so any common rescaling of W leaves selection
unchanged.  Instances then pick candidates from the shared pool without
replacement, either greedily or by categorical sampling, and the chain
continues from the selected points.  Exponents reach +-1e3 for entries
near the preference clamp floor, so all scoring stays in log space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .diffusion import GmmModel, NoiseSchedule, reverse_kernel
from .objectives import EvalCounter, ObjectiveSpec, evaluate_batch, normalize
from .preferences import preference_batch

SELECTION_RULES = ("greedy", "probabilistic")
C_MODES = ("running_max", "fixed")


def log_weight(y: np.ndarray, lam: np.ndarray, c: np.ndarray) -> np.ndarray:
    """log W(y; lam) for one objective row or a (K, n) stack of rows."""
    y = np.asarray(y, dtype=float)
    lam = np.asarray(lam, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.any(lam <= 0.0):
        raise ValueError("preference entries must be positive")
    if not np.all(np.isfinite(c)):
        raise ValueError("coefficients must be finite before weighting")
    single = y.ndim == 1
    Y = np.atleast_2d(y)
    expo = -(Y - c[None, :]) / lam[None, :]
    out = logsumexp(expo, axis=1)
    return float(out[0]) if single else out


def nll(y: np.ndarray, lam: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Negative log of the soft-min weight; the loss view of selection."""
    lw = log_weight(y, lam, c)
    return -lw if not np.isscalar(lw) else -lw


def tilted_logpdf_unnorm(base_logpdf, f, lam_k: float, X: np.ndarray) -> np.ndarray:
    """Unnormalized log density of a single-objective exponential tilt."""
    if lam_k <= 0.0:
        raise ValueError("lam_k must be positive")
    return np.asarray(base_logpdf(X), dtype=float) - np.asarray(f(X), dtype=float) / lam_k


def mixture_target_logpdf_unnorm(base_logpdf, objective_fn, lam: np.ndarray,
                                 c: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Unnormalized log density of the preference-weighted tilt mixture."""
    Y = np.atleast_2d(np.asarray(objective_fn(X), dtype=float))
    return np.asarray(base_logpdf(X), dtype=float) + log_weight(Y, lam, c)


class CoefficientTracker:
    """Per-objective upper bounds c_k, running-max or pinned."""

    def __init__(self, n: int, mode: str = "running_max",
                 fixed: np.ndarray | float | None = None):
        if mode not in C_MODES:
            raise ValueError(f"mode must be one of {C_MODES}, got {mode!r}")
        self.n = int(n)
        self.mode = mode
        if mode == "fixed":
            if fixed is None:
                raise ValueError("fixed mode needs coefficient values")
            vals = np.asarray(fixed, dtype=float)
            if vals.ndim == 0:
                vals = np.full(self.n, float(vals))
            if vals.shape != (self.n,):
                raise ValueError(f"fixed coefficients must have shape ({self.n},)")
            self.values = vals.copy()
        else:
            self.values = np.full(self.n, -np.inf)

    def update(self, Y: np.ndarray):
        """Fold a batch of observed objective rows into the bounds."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[1] != self.n:
            raise ValueError(f"expected {self.n} objectives, got {Y.shape[1]}")
        if self.mode == "running_max":
            self.values = np.maximum(self.values, Y.max(axis=0))
        return self.values


def update_coefficients(tracker: CoefficientTracker, Y: np.ndarray) -> np.ndarray:
    return tracker.update(Y)


@dataclass
class CandidateBuffer:
    """Pooled candidates with objectives and liveness flags."""

    X: np.ndarray
    Y: np.ndarray
    alive: np.ndarray = None

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        if self.X.shape[0] != self.Y.shape[0]:
            raise ValueError("X and Y must agree on the number of candidates")
        if self.alive is None:
            self.alive = np.ones(self.X.shape[0], dtype=bool)
        else:
            self.alive = np.asarray(self.alive, dtype=bool)

    @property
    def B(self) -> int:
        return self.X.shape[0]


def resample_greedy(buffer: CandidateBuffer, lam: np.ndarray, c: np.ndarray,
                    remove: bool = True) -> int:
    """Index of the highest-weight live candidate; ties take the lowest index."""
    alive = np.flatnonzero(buffer.alive)
    if alive.size == 0:
        raise ValueError("no live candidates left in the buffer")
    lw = log_weight(buffer.Y[alive], lam, c)
    b = int(alive[int(np.argmax(lw))])
    if remove:
        buffer.alive[b] = False
    return b


def resample_probabilistic(buffer: CandidateBuffer, lam: np.ndarray, c: np.ndarray,
                           rng: np.random.Generator, remove: bool = True) -> int:
    """Categorical draw over live candidates with probabilities prop. to W."""
    alive = np.flatnonzero(buffer.alive)
    if alive.size == 0:
        raise ValueError("no live candidates left in the buffer")
    lw = log_weight(buffer.Y[alive], lam, c)
    p = np.exp(lw - lw.max())
    p /= p.sum()
    b = int(alive[rng.choice(alive.size, p=p)])
    if remove:
        buffer.alive[b] = False
    return b


@dataclass
class ImgConfig:
    """Knobs of one guided-sampling run."""

    N: int = 64
    M: int = 8
    tau: int = 100
    selection: str = "greedy"
    preference_source: str = "qmc"
    preferences: np.ndarray | None = None
    c_mode: str = "running_max"
    fixed_c: np.ndarray | float | None = None
    eps: float = 1e-3
    seed: int = 0
    with_replacement: bool = False

    def __post_init__(self):
        if self.N < 1 or self.M < 1 or self.tau < 1:
            raise ValueError("N, M and tau must all be >= 1")
        if self.selection not in SELECTION_RULES:
            raise ValueError(f"selection must be one of {SELECTION_RULES}")
        if self.c_mode not in C_MODES:
            raise ValueError(f"c_mode must be one of {C_MODES}")
        if self.c_mode == "fixed" and self.fixed_c is None:
            raise ValueError("c_mode='fixed' requires fixed_c")
        if self.with_replacement and self.selection != "probabilistic":
            raise ValueError("with_replacement only applies to probabilistic selection")


@dataclass
class StepRecord:
    """Selected batch state after one reverse step."""

    t: int
    indices: np.ndarray
    points: np.ndarray
    y: np.ndarray
    log_weights: np.ndarray
    c: np.ndarray


@dataclass
class ImgResult:
    points: np.ndarray          # (N, d) final clean points
    y: np.ndarray               # (N, n) their normalized objectives
    preferences: np.ndarray     # (N, n) clamped preference rows
    steps: list                 # per-step StepRecord, t = tau .. 1
    evaluations: int


def img_generate(model: GmmModel, spec: ObjectiveSpec, schedule: NoiseSchedule,
                 config: ImgConfig, x_ref: np.ndarray | None = None,
                 counter: EvalCounter | None = None) -> ImgResult:
    """Run guided sampling; exactly N*M*tau counted evaluations.

    Candidates are pooled instance-major (rows i*M .. i*M+M-1 belong to
    instance i) and instances select in index order.  A single seeded
    generator drives preferences, initial noise, transitions and any
    selection draws; parallel rollouts should spawn child streams from
    this seed rather than sharing the generator.
    """
    if spec.d != model.d:
        raise ValueError(f"objective dimension {spec.d} != model dimension {model.d}")
    if config.tau > schedule.T:
        raise ValueError(f"tau = {config.tau} exceeds schedule T = {schedule.T}")
    rng = np.random.default_rng(config.seed)
    counter = EvalCounter() if counter is None else counter
    N, M, tau = config.N, config.M, config.tau
    lam_rows = preference_batch(N, spec.n, config.preference_source, rng,
                                eps=config.eps, user=config.preferences)
    if x_ref is None:
        X = rng.standard_normal((N, model.d))
    else:
        R = np.atleast_2d(np.asarray(x_ref, dtype=float))
        if R.shape == (1, model.d):
            R = np.repeat(R, N, axis=0)
        if R.shape != (N, model.d):
            raise ValueError(f"x_ref must be one point or ({N}, {model.d})")
        abar = schedule.alpha_bar[tau]
        X = np.sqrt(abar) * R + np.sqrt(1.0 - abar) * rng.standard_normal((N, model.d))

    tracker = CoefficientTracker(spec.n, mode=config.c_mode, fixed=config.fixed_c)
    steps: list[StepRecord] = []
    for t in range(tau, 0, -1):
        tiled = np.repeat(X, M, axis=0)
        cand = reverse_kernel(model, tiled, t, schedule, rng)
        Yn = normalize(evaluate_batch(spec, cand, counter), spec)
        tracker.update(Yn)
        buf = CandidateBuffer(X=cand, Y=Yn)
        idx = np.empty(N, dtype=int)
        lw = np.empty(N)
        for i in range(N):
            if config.selection == "greedy":
                b = resample_greedy(buf, lam_rows[i], tracker.values)
            else:
                b = resample_probabilistic(buf, lam_rows[i], tracker.values, rng,
                                           remove=not config.with_replacement)
            idx[i] = b
            lw[i] = log_weight(Yn[b], lam_rows[i], tracker.values)
        X = cand[idx]
        steps.append(StepRecord(t=t, indices=idx, points=X.copy(), y=Yn[idx],
                                log_weights=lw, c=tracker.values.copy()))
    return ImgResult(points=X, y=steps[-1].y, preferences=lam_rows, steps=steps,
                     evaluations=N * M * tau)
