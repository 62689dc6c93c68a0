"""Accelerated forward-backward and proximal-extragradient solvers with
certified approximate proximal steps.

The package is organized around a primal-dual measure of prox inexactness:
inner solvers return certificates whose gap is checked against a tolerance
mixing relative and absolute error terms, and the outer accelerated methods
carry worst-case guarantees that hold under exactly that acceptance test.
"""

from .linops import (LinearOperator, box_blur, dot, image_divergence,
                     image_gradient, load_matrix_csv, norm, power_iteration,
                     save_matrix_csv)
from .oracles import (ApproxProxCertificate, ProxFriendlyFunction, ProxRequest,
                      SmoothOracle, check_smoothness_inequality,
                      check_strong_convexity_inequality)
from .criterion import (GapEvaluation, ToleranceInputs, accept_prox,
                        epsilon_tolerance, exact_prox_certificate, pd_gap,
                        pd_gap_direct)
from .schedules import ToleranceSchedule
from .proxlib import (GroupFamily, GroupNormRegularizer, QuadraticRegularizer,
                      SeparableL1, TvRegularizer, ZeroFunction,
                      group_soft_threshold, prox_group_dual_bca,
                      prox_tv_dual_fista, prox_with_tikhonov, soft_threshold)
from .guarantees import (afb_growth_factor, ahpe_growth_factor, bound_ahpe,
                         bound_cor1, bound_cor2, bound_cor3, lyapunov)
from .problems import (CurProblem, Problem, TvProblem, build_lasso,
                       cur_lipschitz, cur_value_grad, make_cur_instance,
                       make_lasso_instance, make_piecewise_image,
                       make_tv_instance, tv_value_grad)
from .afb import (AfbConfig, BacktrackingFloorError, IterationRecord,
                  ProxToleranceError, SolveResult, SolverState, a_next_afb,
                  afb_solve, afb_step, eta, extrapolate_y, smooth_condition,
                  update_z)
from .ahpe import AhpeConfig, a_next_ahpe, ahpe_solve, ahpe_step

__version__ = "0.1.0"
