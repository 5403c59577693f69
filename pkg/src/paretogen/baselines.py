"""Evolutionary baselines that reproduce through the diffusion sampler.

Both baselines diversify by noising the population to step tau and
denoising back; they differ in recombination and survivor selection.
The first (generational, "diffsbdd" style) replaces parents with their
offspring wholesale and only orders them by an aggregated fitness.  The
second ("egd") crosses pairs in noise space and keeps the best P of
parents plus offspring under the strength/density fitness, so its best
member never worsens.  A run of G generations costs exactly G*P counted
evaluations: the first generation pays for evaluating the freshly
sampled population, every later one for its offspring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffusion import GmmModel, NoiseSchedule, reverse_chain, sample_prior
from .engine import ImgConfig, ImgResult, img_generate
from .metrics import pareto_front
from .objectives import EvalCounter, ObjectiveSpec, evaluate_batch, normalize

AGGREGATIONS = ("mean", "spea2")


@dataclass
class Population:
    """Points with cached normalized objectives and a generation tag."""

    points: np.ndarray
    objectives: np.ndarray | None = None
    generation: int = 0

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.objectives is not None:
            self.objectives = np.atleast_2d(np.asarray(self.objectives, dtype=float))
            if self.objectives.shape[0] != self.points.shape[0]:
                raise ValueError("objectives and points disagree on population size")

    @property
    def P(self) -> int:
        return self.points.shape[0]


def spea2_fitness(Y: np.ndarray) -> np.ndarray:
    """Strength/raw/density fitness; non-dominated members score < 1.

    strength(i) counts members i dominates; raw(i) sums the strengths of
    everyone dominating i; density uses the distance to the
    floor(sqrt(P))-th nearest neighbour in objective space.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    P = Y.shape[0]
    if P < 2:
        raise ValueError("fitness needs at least two members")
    le = np.all(Y[:, None, :] <= Y[None, :, :], axis=2)
    lt = np.any(Y[:, None, :] < Y[None, :, :], axis=2)
    dom = le & lt                       # dom[i, j]: i dominates j
    strength = dom.sum(axis=1).astype(float)
    raw = np.array([strength[dom[:, i]].sum() for i in range(P)])
    dist = np.sqrt(np.maximum(np.sum((Y[:, None, :] - Y[None, :, :]) ** 2, axis=2), 0.0))
    np.fill_diagonal(dist, np.inf)
    k = int(np.floor(np.sqrt(P)))
    k = min(max(k, 1), P - 1)
    sigma_k = np.sort(dist, axis=1)[:, k - 1]
    density = 1.0 / (sigma_k + 2.0)
    return raw + density


def _selection_order(Y: np.ndarray) -> np.ndarray:
    """Stable best-first order under spea2 fitness, ties by density, index."""
    fit = spea2_fitness(Y)
    dist = np.sqrt(np.maximum(np.sum((Y[:, None, :] - Y[None, :, :]) ** 2, axis=2), 0.0))
    np.fill_diagonal(dist, np.inf)
    k = min(max(int(np.floor(np.sqrt(Y.shape[0]))), 1), Y.shape[0] - 1)
    density = 1.0 / (np.sort(dist, axis=1)[:, k - 1] + 2.0)
    return np.lexsort((np.arange(Y.shape[0]), density, fit))


def init_population(model: GmmModel, schedule: NoiseSchedule, P: int,
                    rng: np.random.Generator) -> Population:
    """Plain reverse-diffusion draws; objectives not yet evaluated."""
    if P < 2:
        raise ValueError(f"P must be >= 2, got {P}")
    x = reverse_chain(model, sample_prior(P, model.d, rng), schedule.T, schedule, rng)
    return Population(points=x, objectives=None, generation=0)


def evaluate_population(pop: Population, spec: ObjectiveSpec,
                        counter: EvalCounter) -> Population:
    """Fill cached objectives; P counted evaluations."""
    Y = normalize(evaluate_batch(spec, pop.points, counter), spec)
    return Population(points=pop.points, objectives=Y, generation=pop.generation)


def _noise_to(points: np.ndarray, tau: int, schedule: NoiseSchedule,
              rng: np.random.Generator) -> np.ndarray:
    abar = schedule.alpha_bar[tau]
    return np.sqrt(abar) * points + np.sqrt(1.0 - abar) * rng.standard_normal(points.shape)


def diffsbdd_ea_step(pop: Population, model: GmmModel, spec: ObjectiveSpec,
                     schedule: NoiseSchedule, tau: int, aggregation: str,
                     counter: EvalCounter, rng: np.random.Generator) -> Population:
    """Generational step: noise all parents, denoise, keep the offspring.

    Offspring are ordered best-first by the aggregated fitness (mean of
    normalized objectives, or spea2).  tau = 0 is the identity edge: no
    noise, no transitions, offspring equal parents.
    """
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}")
    if not (0 <= tau <= schedule.T):
        raise ValueError(f"tau must be in [0, {schedule.T}], got {tau}")
    if tau == 0:
        off = pop.points.copy()
    else:
        off = reverse_chain(model, _noise_to(pop.points, tau, schedule, rng),
                            tau, schedule, rng)
    Y = normalize(evaluate_batch(spec, off, counter), spec)
    if aggregation == "mean":
        order = np.argsort(Y.mean(axis=1), kind="stable")
    else:
        order = _selection_order(Y)
    order = order[: pop.P]
    return Population(points=off[order], objectives=Y[order],
                      generation=pop.generation + 1)


def crossover_pairs(noised: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random pairing plus uniform per-coordinate swap.

    Each random pair (a, b) yields two complementary children: where one
    child takes a coordinate from a, its sibling takes it from b, so the
    per-dimension multiset of values is preserved exactly.
    """
    P = noised.shape[0]
    if P % 2 != 0:
        raise ValueError(f"population size must be even, got {P}")
    perm = rng.permutation(P)
    a = noised[perm[0::2]]
    b = noised[perm[1::2]]
    mask = rng.random(a.shape) < 0.5
    children = np.empty_like(noised)
    children[0::2] = np.where(mask, a, b)
    children[1::2] = np.where(mask, b, a)
    return children


def egd_step(pop: Population, model: GmmModel, spec: ObjectiveSpec,
             schedule: NoiseSchedule, tau: int, counter: EvalCounter,
             rng: np.random.Generator) -> Population:
    """Elitist step: crossover in noise space, denoise, keep best of 2P."""
    if pop.objectives is None:
        raise ValueError("parents must carry cached objectives")
    if pop.P % 2 != 0:
        raise ValueError(f"population size must be even, got {pop.P}")
    if not (1 <= tau <= schedule.T):
        raise ValueError(f"tau must be in [1, {schedule.T}], got {tau}")
    noised = _noise_to(pop.points, tau, schedule, rng)
    children = crossover_pairs(noised, rng)
    off = reverse_chain(model, children, tau, schedule, rng)
    Y_off = normalize(evaluate_batch(spec, off, counter), spec)
    pool_x = np.vstack([pop.points, off])
    pool_y = np.vstack([pop.objectives, Y_off])
    order = _selection_order(pool_y)[: pop.P]
    return Population(points=pool_x[order], objectives=pool_y[order],
                      generation=pop.generation + 1)


def run_ea(algorithm: str, model: GmmModel, spec: ObjectiveSpec,
           schedule: NoiseSchedule, P: int, generations: int, tau: int,
           seed: int, counter: EvalCounter | None = None,
           callback=None) -> Population:
    """Run a baseline for G generations; exactly G*P counted evaluations.

    algorithm is one of "egd", "diffsbdd_mean", "diffsbdd_spea2".  The
    callback, if given, sees the population after every generation.
    """
    if generations < 1:
        raise ValueError("generations must be >= 1")
    rng = np.random.default_rng(seed)   # accepts ints and seed sequences
    counter = EvalCounter() if counter is None else counter
    pop = evaluate_population(init_population(model, schedule, P, rng), spec, counter)
    pop = Population(points=pop.points, objectives=pop.objectives, generation=1)
    if callback is not None:
        callback(pop)
    for _ in range(generations - 1):
        if algorithm == "egd":
            pop = egd_step(pop, model, spec, schedule, tau, counter, rng)
        elif algorithm == "diffsbdd_mean":
            pop = diffsbdd_ea_step(pop, model, spec, schedule, tau, "mean", counter, rng)
        elif algorithm == "diffsbdd_spea2":
            pop = diffsbdd_ea_step(pop, model, spec, schedule, tau, "spea2", counter, rng)
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")
        if callback is not None:
            callback(pop)
    return pop


def hybrid_egd_img(model: GmmModel, spec: ObjectiveSpec, schedule: NoiseSchedule,
                   img_config: ImgConfig, P: int, ea_steps: int, ea_tau: int,
                   counter: EvalCounter | None = None, ea_callback=None) -> ImgResult:
    """EGD warm start followed by guided sampling.

    The EA's final population seeds the per-instance references: the N
    best members under spea2 fitness (plain order if the EA phase is
    skipped with ea_steps = 0).  Total counted evaluations:
    ea_steps*P + N*M*tau.  The EA phase draws from a child stream
    seeded as (seed, 1) so the generation phase sees the exact stream a
    standalone run with the same config would.
    """
    if ea_steps < 0:
        raise ValueError("ea_steps must be >= 0")
    if img_config.N > P:
        raise ValueError(f"need N <= P to seed references, got N={img_config.N}, P={P}")
    counter = EvalCounter() if counter is None else counter
    ea_seed = (img_config.seed, 1)
    if ea_steps == 0:
        pop = init_population(model, schedule, P, np.random.default_rng(ea_seed))
        refs = pop.points[: img_config.N]
    else:
        pop = run_ea("egd", model, spec, schedule, P, ea_steps, ea_tau,
                     seed=ea_seed, counter=counter, callback=ea_callback)
        order = _selection_order(pop.objectives)
        refs = pop.points[order[: img_config.N]]
    return img_generate(model, spec, schedule, img_config, x_ref=refs, counter=counter)
