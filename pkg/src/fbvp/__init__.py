"""Solver and verifier for parameter-dependent perturbed Hammerstein
integral equations arising from third-order delay differential equations
with functional boundary conditions.

The package finds pairs (lambda, u) with u = psi + lambda * (A u) on a
prescribed sphere of the affine cone psi + K0, checks the hypotheses of
the underlying cone-theoretic existence theorem numerically, and verifies
returned pairs against the differential formulation with independent
finite-difference and marching oracles.
"""

from .errors import (
    DomainError,
    FunctionalEvalError,
    IntegrationBlowup,
    NoBracket,
    NonConvergence,
)
from .funcspace import (
    GridFn,
    Interval,
    Segment,
    boundary_sample,
    in_cone_K0,
    norm_c1,
    norm_inf,
    segment,
)
from .hammerstein import (
    ProblemDef,
    affine_map,
    apply_F_op,
    fixed_point_residual,
    integrate_kernel_weighted,
)
from .hypotheses import (
    HypothesisReport,
    check_structural,
    condc_value,
    estimate_eta_delta,
    estimate_inf_F,
    run_check,
)
from .kernels import (
    BCKind,
    dk_hat_dt,
    extend_gamma,
    extend_gamma_deriv,
    extend_k,
    gamma_hat,
    gamma_hat_deriv,
    green_solve,
    k_hat,
)
from .registry import (
    BoundaryFunctional,
    SegmentFunctional,
    delay_functional,
)
from .solver import (
    PairResult,
    SolveOptions,
    find_pair,
    fixed_point_solve,
    lambda_bar_bound,
    norm_response,
    sweep,
)
from .verify import (
    VerifyReport,
    bc_residual,
    history_match,
    method_of_steps_check,
    ode_residual,
    verify_pair,
)

__version__ = "0.1.0"
