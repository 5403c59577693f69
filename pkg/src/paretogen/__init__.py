"""Multi-objective black-box optimization on analytic diffusion samplers.

Generation-time guidance: a batch of diffusion rollouts shares a pool of
candidate transitions each step, and every rollout picks candidates that
favour its own preference-weighted blend of the objectives.  Includes
diffusion-based evolutionary baselines, hypervolume metrics, an
experiment harness, an HTTP service and a CLI.
"""

__version__ = "0.1.0"

from .diffusion import (GmmModel, NoiseSchedule, PointBatch, forward_noise,
                        from_config, make_schedule, posterior_x0, predict_noise,
                        reverse_step, sample_candidates, standard_normal_model,
                        to_config)
from .engine import (CandidateBuffer, CoefficientTracker, ImgConfig, ImgResult,
                     img_generate, log_weight, nll, resample_greedy,
                     resample_probabilistic, update_coefficients)
from .metrics import (ParetoArchive, combined_front_contributions, dominates,
                      hypervolume_exact, hypervolume_mc, pareto_front)
from .objectives import (EvalCounter, ObjectiveSpec, evaluate, evaluate_batch,
                         make_multiwell, make_quadratic, normalize)
from .preferences import (clamp_preferences, lattice_points, mc_sphere,
                          min_pairwise_geodesic, preference_batch, qmc_sphere,
                          save_preferences, sphere_map)
from .baselines import (Population, crossover_pairs, diffsbdd_ea_step, egd_step,
                        hybrid_egd_img, init_population, run_ea, spea2_fitness)
