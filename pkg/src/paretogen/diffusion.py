"""Analytic diffusion sampling over Gaussian-mixture data distributions.

The forward process is the usual variance-preserving construction

    x_t = sqrt(abar_t) * x_0 + sqrt(1 - abar_t) * z,    z ~ N(0, I),

with abar_t the cumulative product of (1 - beta_s) and abar_0 = 1.
Because the data distribution is an explicit Gaussian mixture with
diagonal covariances, every quantity a trained noise predictor would
approximate (noise-prediction, score, clean-data posterior) is available
in closed form, so the reverse sampler is exact and cheap to verify.

The reverse transition renoises a clean-data estimate:

    x_{t-1} = sqrt(abar_{t-1}) * x0_draw
              + sqrt(1 - abar_{t-1} - sigma_t^2) * eps_implied
              + sigma_t * z.

With the default sigma_t = sqrt(1 - abar_{t-1}) the middle term vanishes
and the transition is the plain renoising form; drawing x0 from the
exact posterior p(x_0 | x_t) makes the step marginal-preserving for any
sigma_t within the bound.  The final step (t = 1) returns the posterior
mean, so outputs are deterministic given x_1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

SIGMA_MODES = ("marginal", "zero")

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class NoiseSchedule:
    """Linear beta schedule with cached cumulative quantities.

    Attributes
    ----------
    T : int
        Number of diffusion steps.
    beta : ndarray, shape (T,)
        Per-step noise rates; beta[t-1] belongs to step t.
    alpha_bar : ndarray, shape (T+1,)
        Cumulative signal fractions, alpha_bar[0] = 1.
    sigma : ndarray, shape (T,)
        Reverse-transition noise scales; sigma[t-1] belongs to step t.
    sigma_mode : str
        "marginal" (sigma_t = sqrt(1 - abar_{t-1}), the largest scale
        compatible with marginal preservation) or "zero".
    """

    T: int
    beta: np.ndarray
    alpha_bar: np.ndarray
    sigma: np.ndarray
    sigma_mode: str = "marginal"

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float)
        self.alpha_bar = np.asarray(self.alpha_bar, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.beta.shape != (self.T,) or self.sigma.shape != (self.T,):
            raise ValueError("beta and sigma must have shape (T,)")
        if self.alpha_bar.shape != (self.T + 1,):
            raise ValueError("alpha_bar must have shape (T+1,)")
        if not np.all((self.beta > 0.0) & (self.beta < 1.0)):
            raise ValueError("beta values must lie in (0, 1)")
        if self.alpha_bar[0] != 1.0:
            raise ValueError("alpha_bar[0] must be 1")
        if np.any(np.diff(self.alpha_bar) >= 0.0):
            raise ValueError("alpha_bar must be strictly decreasing")
        if self.alpha_bar[-1] <= 0.0:
            raise ValueError("alpha_bar[T] must stay positive")
        # marginal-preservation bound for the renoising transition form
        bound = np.sqrt(1.0 - self.alpha_bar[:-1])
        if np.any(self.sigma > bound + 1e-12):
            raise ValueError("sigma_t must not exceed sqrt(1 - alpha_bar_{t-1})")
        if np.any(self.sigma < 0.0):
            raise ValueError("sigma_t must be nonnegative")


def make_schedule(T: int = 100, beta_min: float = 1e-4, beta_max: float = 0.02,
                  sigma_mode: str = "marginal") -> NoiseSchedule:
    """Build a linear beta schedule with T steps."""
    if not isinstance(T, (int, np.integer)) or T < 1:
        raise ValueError(f"T must be a positive integer, got {T!r}")
    if not (0.0 < beta_min <= beta_max < 1.0):
        raise ValueError(f"need 0 < beta_min <= beta_max < 1, got ({beta_min}, {beta_max})")
    if sigma_mode not in SIGMA_MODES:
        raise ValueError(f"sigma_mode must be one of {SIGMA_MODES}, got {sigma_mode!r}")
    beta = np.linspace(beta_min, beta_max, T)
    alpha_bar = np.concatenate([[1.0], np.cumprod(1.0 - beta)])
    if sigma_mode == "marginal":
        sigma = np.sqrt(1.0 - alpha_bar[:-1])
    else:
        sigma = np.zeros(T)
    return NoiseSchedule(T=int(T), beta=beta, alpha_bar=alpha_bar, sigma=sigma,
                         sigma_mode=sigma_mode)


@dataclass
class GmmModel:
    """Gaussian mixture data distribution with diagonal covariances.

    weights : ndarray, shape (J,); nonnegative, sums to 1.
    means : ndarray, shape (J, d).
    covariances : ndarray, shape (J, d); per-coordinate variances.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        self.means = np.atleast_2d(np.asarray(self.means, dtype=float))
        self.covariances = np.atleast_2d(np.asarray(self.covariances, dtype=float))
        J = self.weights.shape[0]
        if self.means.shape[0] != J or self.covariances.shape != self.means.shape:
            raise ValueError("weights, means, covariances disagree on shape")
        if np.any(self.weights < 0.0):
            raise ValueError("mixture weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError(f"mixture weights must sum to 1, got {self.weights.sum()}")
        if np.any(self.covariances <= 0.0):
            raise ValueError("covariance entries must be positive")

    @property
    def d(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]


def standard_normal_model(d: int) -> GmmModel:
    """Single-component N(0, I) mixture in d dimensions."""
    return GmmModel(weights=np.ones(1), means=np.zeros((1, d)),
                    covariances=np.ones((1, d)))


@dataclass
class PointBatch:
    """A batch of points tagged with their diffusion step."""

    points: np.ndarray
    t: int

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.ndim != 2:
            raise ValueError("points must be a (K, d) array")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("points must be finite")
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t}")

    @property
    def K(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def _as_points(x) -> np.ndarray:
    if isinstance(x, PointBatch):
        return x.points
    return np.atleast_2d(np.asarray(x, dtype=float))


def _check_t(t: int, schedule: NoiseSchedule, lo: int = 1):
    if not (lo <= t <= schedule.T):
        raise ValueError(f"t must be in [{lo}, {schedule.T}], got {t}")


def _noised_params(model: GmmModel, t: int, schedule: NoiseSchedule):
    """Signal scale and per-component marginal variances at step t."""
    abar = schedule.alpha_bar[t]
    a = np.sqrt(abar)
    var = abar * model.covariances + (1.0 - abar)   # (J, d)
    return a, var


def gmm_logpdf(model: GmmModel, X, t: int, schedule: NoiseSchedule) -> np.ndarray:
    """Log density of the noised mixture at step t (t = 0 gives the data law)."""
    X = _as_points(X)
    _check_t(t, schedule, lo=0)
    a, var = _noised_params(model, t, schedule)
    diff = X[:, None, :] - a * model.means[None, :, :]          # (K, J, d)
    log_comp = -0.5 * np.sum(diff * diff / var[None, :, :] + np.log(var)[None, :, :]
                             + LOG_2PI, axis=2)                  # (K, J)
    return logsumexp(log_comp + np.log(model.weights)[None, :], axis=1)


def _log_responsibilities(model: GmmModel, X: np.ndarray, t: int,
                          schedule: NoiseSchedule) -> np.ndarray:
    a, var = _noised_params(model, t, schedule)
    diff = X[:, None, :] - a * model.means[None, :, :]
    log_comp = -0.5 * np.sum(diff * diff / var[None, :, :] + np.log(var)[None, :, :]
                             + LOG_2PI, axis=2)
    log_num = log_comp + np.log(model.weights)[None, :]
    return log_num - logsumexp(log_num, axis=1, keepdims=True)


def score(model: GmmModel, X, t: int, schedule: NoiseSchedule) -> np.ndarray:
    """Gradient of log p_t at the given points."""
    X = _as_points(X)
    _check_t(t, schedule, lo=0)
    a, var = _noised_params(model, t, schedule)
    resp = np.exp(_log_responsibilities(model, X, t, schedule))   # (K, J)
    grad_comp = -(X[:, None, :] - a * model.means[None, :, :]) / var[None, :, :]
    return np.sum(resp[:, :, None] * grad_comp, axis=1)


def predict_noise(model: GmmModel, x, t: int, schedule: NoiseSchedule) -> np.ndarray:
    """Noise prediction implied by the exact score of the noised mixture.

    eps(x, t) = -sqrt(1 - abar_t) * grad log p_t(x).
    """
    X = _as_points(x)
    _check_t(t, schedule)
    abar = schedule.alpha_bar[t]
    return -np.sqrt(1.0 - abar) * score(model, X, t, schedule)


def posterior_x0(x, t: int, eps: np.ndarray, schedule: NoiseSchedule) -> np.ndarray:
    """Clean-data posterior mean implied by a noise prediction.

    x0_hat = (x_t - sqrt(1 - abar_t) * eps) / sqrt(abar_t).
    """
    X = _as_points(x)
    _check_t(t, schedule)
    abar = schedule.alpha_bar[t]
    return (X - np.sqrt(1.0 - abar) * np.asarray(eps, dtype=float)) / np.sqrt(abar)


def posterior_x0_mean(model: GmmModel, X, t: int, schedule: NoiseSchedule) -> np.ndarray:
    """posterior_x0 evaluated with the model's own noise prediction."""
    X = _as_points(X)
    return posterior_x0(X, t, predict_noise(model, X, t, schedule), schedule)


def posterior_x0_sample(model: GmmModel, X, t: int, schedule: NoiseSchedule,
                        rng: np.random.Generator) -> np.ndarray:
    """Exact draw from p(x_0 | x_t) under the mixture model.

    The posterior is again a mixture: responsibilities over components,
    then a diagonal Gaussian per component.
    """
    X = _as_points(X)
    _check_t(t, schedule)
    abar = schedule.alpha_bar[t]
    a = np.sqrt(abar)
    resp = np.exp(_log_responsibilities(model, X, t, schedule))   # (K, J)
    # per-component posterior over x0: precision = 1/cov + abar/(1-abar)
    pvar = model.covariances * (1.0 - abar) / ((1.0 - abar) + abar * model.covariances)  # (J, d)
    u = rng.random(X.shape[0])
    comp = (u[:, None] > np.cumsum(resp, axis=1)).sum(axis=1)
    comp = np.minimum(comp, model.n_components - 1)
    v = pvar[comp]                                                # (K, d)
    mean = v * (model.means[comp] / model.covariances[comp] + a * X / (1.0 - abar))
    return mean + np.sqrt(v) * rng.standard_normal(X.shape)


def reverse_kernel(model: GmmModel, X: np.ndarray, t: int, schedule: NoiseSchedule,
                   rng: np.random.Generator) -> np.ndarray:
    """One reverse transition on a raw (K, d) array."""
    _check_t(t, schedule)
    if t == 1:
        # sigma_1 = 0 and the implied-noise coefficient vanishes: the final
        # output is the posterior mean, deterministic given x_1.
        return posterior_x0_mean(model, X, 1, schedule)
    abar_t = schedule.alpha_bar[t]
    abar_prev = schedule.alpha_bar[t - 1]
    sig = schedule.sigma[t - 1]
    x0 = posterior_x0_sample(model, X, t, schedule, rng)
    coef = np.sqrt(max(1.0 - abar_prev - sig * sig, 0.0))
    out = np.sqrt(abar_prev) * x0
    if coef > 0.0:
        eps_implied = (X - np.sqrt(abar_t) * x0) / np.sqrt(1.0 - abar_t)
        out = out + coef * eps_implied
    if sig > 0.0:
        out = out + sig * rng.standard_normal(X.shape)
    return out


def reverse_step(model: GmmModel, x: PointBatch, t: int, schedule: NoiseSchedule,
                 rng: np.random.Generator) -> PointBatch:
    """One reverse transition from step t to t-1."""
    if isinstance(x, PointBatch) and x.t != t:
        raise ValueError(f"batch is tagged t={x.t} but step t={t} was requested")
    X = _as_points(x)
    return PointBatch(points=reverse_kernel(model, X, t, schedule, rng), t=t - 1)


def forward_noise(x: PointBatch, tau: int, schedule: NoiseSchedule,
                  rng: np.random.Generator) -> PointBatch:
    """Noise clean points to step tau; tau = 0 returns a copy unchanged."""
    if isinstance(x, PointBatch) and x.t != 0:
        raise ValueError(f"forward_noise expects clean points (t=0), got t={x.t}")
    X = _as_points(x)
    if not (0 <= tau <= schedule.T):
        raise ValueError(f"tau must be in [0, {schedule.T}], got {tau}")
    if tau == 0:
        return PointBatch(points=X.copy(), t=0)
    abar = schedule.alpha_bar[tau]
    pts = np.sqrt(abar) * X + np.sqrt(1.0 - abar) * rng.standard_normal(X.shape)
    return PointBatch(points=pts, t=tau)


def sample_candidates(model: GmmModel, x, t: int, M: int, schedule: NoiseSchedule,
                      rng: np.random.Generator) -> np.ndarray:
    """Spawn M exchangeable reverse-transition candidates from one point."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    X = _as_points(x)
    if X.shape[0] != 1:
        raise ValueError("sample_candidates expects a single point")
    tiled = np.repeat(X, M, axis=0)
    return reverse_kernel(model, tiled, t, schedule, rng)


def reverse_chain(model: GmmModel, X: np.ndarray, t_start: int,
                  schedule: NoiseSchedule, rng: np.random.Generator) -> np.ndarray:
    """Run the reverse transitions t_start, ..., 1 on a (K, d) array."""
    _check_t(t_start, schedule)
    out = np.asarray(X, dtype=float)
    for t in range(t_start, 0, -1):
        out = reverse_kernel(model, out, t, schedule, rng)
    return out


def sample_prior(K: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Terminal-noise draws, the conventional start of a reverse chain."""
    return rng.standard_normal((K, d))


def sample_data(model: GmmModel, K: int, rng: np.random.Generator) -> np.ndarray:
    """Exact draws from the clean-data mixture (test and baseline helper)."""
    comp = rng.choice(model.n_components, size=K, p=model.weights)
    return model.means[comp] + np.sqrt(model.covariances[comp]) * rng.standard_normal((K, model.d))


def mixture_moments(model: GmmModel, t: int, schedule: NoiseSchedule):
    """Analytic mean and per-coordinate variance of the noised mixture."""
    a, var = _noised_params(model, t, schedule)
    m = a * model.means                                  # (J, d)
    mean = np.sum(model.weights[:, None] * m, axis=0)
    second = np.sum(model.weights[:, None] * (var + m * m), axis=0)
    return mean, second - mean * mean


def to_config(model: GmmModel, schedule: NoiseSchedule) -> dict:
    """Flat, human-readable description of model plus schedule."""
    if schedule.sigma_mode not in SIGMA_MODES:
        raise ValueError(f"cannot serialize sigma_mode {schedule.sigma_mode!r}")
    return {
        "weights": model.weights.tolist(),
        "means": model.means.tolist(),
        "covariances": model.covariances.tolist(),
        "T": int(schedule.T),
        "beta_min": float(schedule.beta[0]),
        "beta_max": float(schedule.beta[-1]),
        "sigma_mode": schedule.sigma_mode,
    }


def from_config(cfg: dict):
    """Inverse of to_config; returns (GmmModel, NoiseSchedule)."""
    model = GmmModel(weights=np.asarray(cfg["weights"], dtype=float),
                     means=np.asarray(cfg["means"], dtype=float),
                     covariances=np.asarray(cfg["covariances"], dtype=float))
    schedule = make_schedule(T=int(cfg["T"]), beta_min=float(cfg["beta_min"]),
                             beta_max=float(cfg["beta_max"]),
                             sigma_mode=cfg.get("sigma_mode", "marginal"))
    return model, schedule
