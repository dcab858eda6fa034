"""Analysis and simulation of two-fold singularities in piecewise-smooth
dynamical systems: layer (blow-up) dynamics on the switching surface, folded
singularities of the induced slow-fast system, the coordinate change linking
the two, and event-driven / regularized time integration."""

__version__ = "0.1.0"

from .expr import ExpressionError, parse_expr
from .fields import (PiecewiseSmoothSystem, SmoothField, TwoFoldParams,
                     eval_combination, eval_piecewise, normal_form_system,
                     parse_field)
from .integrate import (EJECT_MINUS, EJECT_PLUS, STAY_SLIDING, Event,
                        IntegratorOptions, NonconvergentEventError,
                        RepellingPolicy, Trajectory, eject_at,
                        integrate_blowup, integrate_filippov,
                        integrate_smooth, integrate_smoothed)
from .scenarios import (ConfigError, Scenario, builtin, builtin_names,
                        load_config, save_config, save_run)
from .singularities import (AlphaZeroError, BoundarySingularityError,
                            DegenerateTypeError, FoldedSingularity,
                            PrefactorSingularError, TwoFoldFlavor,
                            classify_two_fold, folded_constants,
                            folded_singularities, folded_type,
                            slow_projection_field)
from .sliding import (ContractViolation, CurveL, DegeneracyReport,
                      SlidingSolution, curve_L, degeneracy_report,
                      region_classify, sliding_lambda, sliding_vector)
from .transform import (TransformContext, TransformDomainError,
                        curve_functions, equivalence_residual,
                        folded_normal_field, from_x_tilde, from_y,
                        jacobian_to_x_tilde, pushforward, to_x_tilde, to_y,
                        transform_check)

__all__ = [name for name in dir() if not name.startswith("_")]
