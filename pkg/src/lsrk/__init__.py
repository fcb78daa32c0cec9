"""Log-sum regularized Kaczmarz recovery of sparse and low-rank tensors.

A transform along modes 3..m turns tensor-tensor multiplication into
independent facewise matrix products; row-action (Kaczmarz) iterations with
log-sum shrinkage then recover sparse or low-tubal-rank solutions of the
linear constraint A * X = B.
"""

from .data import (build_destripe_operator, gen_synthetic_lowrank,
                   gen_synthetic_sparse, smooth_image_stack,
                   stripe_rows_periodic, stripe_rows_sampled)
from .errors import (ConfigError, DegenerateRowError, DimensionMismatchError,
                     DivergenceError, FileFormatError, NonRealResultError,
                     ParameterError, UndefinedMetricError)
from .experiments import (CurveArtifact, ExperimentConfig, ProxAuditReport,
                          default_config, grid_prox_oracle, load_config,
                          prox_audit, run_experiment)
from .metrics import MetricReport, metric_report, psnr, relative_error, ssim
from .regularizers import (CriterionReport, LogSumParams,
                           check_prox_criterion, log_sum_prox,
                           log_sum_prox_scalar, log_sum_value,
                           nuclear_log_sum_prox, nuclear_log_sum_value)
from .solvers import (BlockStrategy, IndexSchedule, SolveReport, SolverConfig,
                      bregman_distance, kaczmarz_z_update, make_schedule,
                      solve_lowrank, solve_sparse, step_bound)
from .tensors import (bdiag, complex_tensor, dense_tensor, frobenius_norm,
                      horizontal_slice, horizontal_subtensor, inner_product,
                      load_tns, save_tns, trailing_shape)
from .tlinalg import (TSVDFactors, conj_transpose, facewise_product,
                      identity_tensor, t_product, t_product_slices, t_svd)
from .transforms import (TransformCheck, TransformSpec, explicit_transform,
                         forward, inverse, make_transform, mode_product,
                         parse_transform, verify_transform)

__version__ = "0.1.0"
