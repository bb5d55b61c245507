"""Totally-corrective asymmetric boosting toolkit.

Trains node classifiers whose objective favors very high detection at a
moderate false-positive rate, by column generation over decision stumps with
an entropic-gradient simplex QP in the inner loop; includes closed-form
asymmetric/Fisher post-processing, the worst-case accuracy calculus for
distribution families, and multi-exit cascade training.
"""

from .boosting import (BoostConfig, BoostModel, DualState, QSpec, TrainTrace,
                       adaboost_train, build_q, dual_objective, fit_offset,
                       primal_objective, recover_duals, train)
from .cascade import (BootstrapResult, CascadeConfig, CascadeGoal, CascadeLimits,
                      CascadeModel, ExitNode, FinitePool, GeneratorPool,
                      NegativePool, bootstrap, cascade_rates, margin_normality,
                      train_cascade)
from .data import (Dataset, DecisionStump, DegenerateClassError, InputError,
                   ResponseMatrix, build_balance_vector, build_response_column,
                   compute_margins, ensemble_scores)
from .linear_asym import (ClassStats, CovarianceDiagnostic, LinearFit, class_stats,
                          covariance_diagnostic, lac_fit, lda_fit)
from .metrics import EvalReport, detection_rate_at, log_average_rate, roc, roc_points
from .model_io import (ModelFormatError, load_dataset_csv, load_model,
                       read_csv, save_dataset_csv, save_model, write_csv)
from .mpm import (DistributionFamily, normal_cdf, normal_quantile, phi,
                  phi_inverse, worst_case_constraint_slack, worst_case_gamma)
from .simplex_qp import (EGConfig, SimplexQP, SolveResult, eg_solve,
                         lipschitz_bound, oracle_solve, warm_start)
from .stumps import StumpSearchResult, best_stump, stump_edge
from .synth import SyntheticSpec, generate, ring_negative_pool

__version__ = "0.1.0"
