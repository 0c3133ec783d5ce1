"""Numerical laboratory for the (p, delta)-structure operator and its A-approximation."""
from .continuation import (LadderReport, check_uniform_bounds, run_a_ladder,
                           run_delta_ladder)
from .errors import (CertificationError, ConfigError, DomainError, LinearSolveFailure,
                     LineSearchFailure, MaxIterations, MeshMismatchError,
                     MollificationFailure, PDeltaError, SingularityError, SolverError)
from .grid import (Diagnostics, Field, Mesh, assemble_energy, assemble_gradient,
                   assemble_hessian, build_mesh, quasinorm_report, sym_gradient_at)
from .nfunc import (DELTA_MIN, CharacteristicsEstimate, PDeltaParams, check_shift_change,
                    conjugate_eval, empirical_characteristics, omega_eval, shift_eval)
from .operator import (AApprox, SymTensor, a_small_eval, build_a_approx, ds_apply,
                       f_eval, hammer_ratios, pp_form, s_eval, ua_eval)
from .parabolic import ParabolicRun, mollify_initial, run_parabolic, step_implicit
from .solver import (Solution, SolverOptions, linear_oracle, manufactured_load_p2,
                     solve_steady)

__version__ = "0.1.0"
