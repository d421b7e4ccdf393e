"""Fixed-point solution at fixed lambda and the eigenpair search.

The solve strategy is damped Picard iteration (the map is contractive for
small lambda, where continuation starts), switching to a finite-difference
Newton method on the stacked (values, derivatives) unknowns if Picard
stalls.  The pair search walks lambda up from 0 with warm starts until the
norm response crosses the target level rho, then refines the crossing with
an Illinois secant iteration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import FunctionalEvalError, NoBracket, NonConvergence
from .funcspace import GridFn, norm_c1
from .hammerstein import affine_map, fixed_point_residual

log = logging.getLogger(__name__)

_NORM_MATCH_RTOL = 1e-6  # |N(lambda*) - rho| <= rho * this


@dataclass
class SolveOptions:
    tol: float = 1e-10
    max_iter: int = 500
    damping: float = 1.0
    newton_after: int = 50
    lambda_step: float = 0.05
    lambda_max: float = 50.0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class PairResult:
    """An eigenpair on the rho-sphere of the cone translate."""

    lambda_star: float
    u_star: GridFn
    rho: float
    residual: float
    n_iterations: int
    n_continuation_steps: int


@dataclass
class SweepRow:
    lam: float
    norm: float
    residual: float
    converged: bool


class _SolveStats:
    __slots__ = ("iterations",)

    def __init__(self):
        self.iterations = 0


def _pack(u):
    k = u.idx0
    return np.concatenate([u.values[k:], u.derivs[k:]])


def _unpack(x, psi):
    k = psi.idx0
    n01 = len(psi.values) - k
    vals = np.concatenate([psi.values[:k], x[:n01]])
    ders = np.concatenate([psi.derivs[:k], x[n01:]])
    return GridFn(psi.r, psi.m, vals, ders)


def fixed_point_solve(p, lam, u0=None, opts=None, stats=None):
    """Solve u = psi + lambda * A u to the residual tolerance.

    Returns the solution GridFn; raises NonConvergence with the best
    residual and iteration trace if neither Picard nor Newton gets there.
    """
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    opts = opts or SolveOptions()
    asm = p.assembly()
    psi = asm.psi
    u = u0 if u0 is not None else psi
    d = opts.damping
    trace = []
    best_res = np.inf
    best_u = u
    it = 0

    def blown(res):
        return not np.isfinite(res) or res > max(1e3 * best_res, 1e12)

    # -- damped Picard phase ----------------------------------------------
    while it < min(opts.newton_after, opts.max_iter):
        it += 1
        if stats is not None:
            stats.iterations += 1
        try:
            target = affine_map(p, lam, u)
            res = norm_c1(u - target, asm.full)
        except FunctionalEvalError:
            res = np.inf
        trace.append(res)
        if res <= opts.tol:
            return u
        if blown(res):
            d *= 0.5
            u = best_u
            if d < opts.damping / 1024.0:
                raise NonConvergence(
                    f"Picard iteration diverged at lambda={lam}",
                    residual=best_res, iterations=it, trace=trace,
                )
            continue
        if res < best_res:
            best_res, best_u = res, u
        u = (1.0 - d) * u + d * target

    # -- finite-difference Newton phase ------------------------------------
    u = best_u

    def residual_vec(x):
        uu = _unpack(x, psi)
        target = affine_map(p, lam, uu)
        return _pack(uu) - _pack(target)

    x = _pack(u)
    try:
        g = residual_vec(x)
    except FunctionalEvalError:
        raise NonConvergence(
            f"operator evaluation failed entering Newton at lambda={lam}",
            residual=best_res, iterations=it, trace=trace,
        )
    while it < opts.max_iter:
        it += 1
        if stats is not None:
            stats.iterations += 1
        res = float(np.max(np.abs(g)))
        trace.append(res)
        if res <= opts.tol:
            return _unpack(x, psi)
        n = len(x)
        J = np.empty((n, n))
        try:
            for q in range(n):
                hq = 1e-7 * (1.0 + abs(x[q]))
                xq = x.copy()
                xq[q] += hq
                J[:, q] = (residual_vec(xq) - g) / hq
        except FunctionalEvalError:
            raise NonConvergence(
                f"operator evaluation failed in Newton at lambda={lam}",
                residual=res, iterations=it, trace=trace,
            )
        try:
            step = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -g, rcond=None)[0]
        alpha = 1.0
        improved = False
        while alpha > 1e-6:
            try:
                g_new = residual_vec(x + alpha * step)
            except FunctionalEvalError:
                alpha *= 0.5
                continue
            if np.max(np.abs(g_new)) < res:
                x = x + alpha * step
                g = g_new
                improved = True
                break
            alpha *= 0.5
        if not improved:
            raise NonConvergence(
                f"Newton stalled at lambda={lam} (residual {res:.3e})",
                residual=res, iterations=it, trace=trace,
            )
    res = float(np.max(np.abs(g)))
    raise NonConvergence(
        f"no convergence within {opts.max_iter} iterations at lambda={lam}",
        residual=min(res, best_res), iterations=it, trace=trace,
    )


def norm_response(p, lam, opts=None, u0=None):
    """N(lambda): C1 norm on [0,1] of (solution at lambda) - psi."""
    asm = p.assembly()
    u = fixed_point_solve(p, lam, u0=u0, opts=opts)
    return norm_c1(u - asm.psi, asm.unit)


def lambda_bar_bound(p, rho, inf_F):
    """Upper bound for the eigenvalue of a pair on the rho-sphere.

    (R + ||psi||) / inf ||A u||, with R the sup of the C1 norm over the
    sphere of the translate; psi and the cone part have disjoint supports,
    so R = max(||psi||, rho) exactly.
    """
    if inf_F <= 0:
        raise ValueError("lambda bound needs a positive infimum for ||A u||")
    asm = p.assembly()
    psi_norm = norm_c1(asm.psi, asm.full)
    return (max(psi_norm, rho) + psi_norm) / inf_F


def sweep(p, lambdas, opts=None, parallel=False):
    """Norm response at each lambda; non-converged rows are flagged, not fatal.

    Sequential execution warm-starts each solve from the previous row.
    ``parallel`` evaluates rows independently (cold starts) in a thread
    pool; results are returned in input order either way.
    """
    opts = opts or SolveOptions()
    asm = p.assembly()
    lambdas = [float(v) for v in np.ravel(np.asarray(lambdas, dtype=float))]

    def solve_row(lam, u0):
        try:
            u = fixed_point_solve(p, lam, u0=u0, opts=opts)
            return SweepRow(lam, norm_c1(u - asm.psi, asm.unit),
                            fixed_point_residual(p, lam, u), True), u
        except (NonConvergence, ValueError) as exc:
            res = getattr(exc, "residual", None)
            return SweepRow(lam, float("nan"),
                            float(res) if res is not None else float("nan"), False), None

    rows = []
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as ex:
            rows = [r for r, _ in ex.map(lambda l: solve_row(l, None), lambdas)]
    else:
        warm = None
        for lam in lambdas:
            row, u = solve_row(lam, warm)
            if u is not None:
                warm = u
            rows.append(row)
    return rows


def find_pair(p, rho, opts=None):
    """Continuation + secant search for lambda* with N(lambda*) = rho.

    Walks lambda up from 0 in steps of lambda_step with warm starts (the
    step is halved and retried when the inner solver diverges, so a fold
    just beyond the current point does not abort a reachable bracket).
    Once N brackets rho the crossing is refined by an Illinois iteration
    until the norm matches to rho * 1e-6 and the lambda bracket is tight.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    opts = opts or SolveOptions()
    asm = p.assembly()
    stats = _SolveStats()
    n_steps = 0

    def solve_at(lam, u0):
        nonlocal n_steps
        u = fixed_point_solve(p, lam, u0=u0, opts=opts, stats=stats)
        n_steps += 1
        return u, norm_c1(u - asm.psi, asm.unit)

    lam_lo, n_lo, u_lo = 0.0, 0.0, asm.psi
    step = opts.lambda_step
    bracket = None
    while bracket is None:
        lam_hi = lam_lo + step
        if lam_hi > opts.lambda_max + 1e-12:
            raise NoBracket(
                f"norm response reached {n_lo:.6g} < rho={rho} at lambda_max",
                lambda_last=lam_lo, norm_last=n_lo, reason="lambda_max reached",
            )
        try:
            u_hi, n_hi = solve_at(lam_hi, u_lo)
        except NonConvergence as exc:
            step *= 0.5
            if step < opts.lambda_step * 1e-6:
                raise NoBracket(
                    f"solver diverged near lambda={lam_hi:.6g} before the "
                    f"norm response (last {n_lo:.6g}) reached rho={rho}",
                    lambda_last=lam_lo, norm_last=n_lo, reason=str(exc),
                ) from exc
            continue
        log.debug("continuation lambda=%.6g N=%.6g", lam_hi, n_hi)
        if n_hi >= rho:
            bracket = (lam_lo, n_lo, u_lo, lam_hi, n_hi, u_hi)
        else:
            lam_lo, n_lo, u_lo = lam_hi, n_hi, u_hi

    a, na, ua, b, nb, ub = bracket
    ga, gb = na - rho, nb - rho
    # best actually-solved point (Illinois deflates ga/gb, so those are
    # bookkeeping values only and never feed the returned pair)
    lam_star, u_star, n_star = b, ub, nb
    for _ in range(300):
        tight = (b - a) <= max(1e-9 * b, 1e-12)
        if abs(n_star - rho) <= _NORM_MATCH_RTOL * rho and tight:
            break
        denom = gb - ga
        x = b - gb * (b - a) / denom if denom != 0.0 else 0.5 * (a + b)
        if not a < x < b:
            x = 0.5 * (a + b)
        try:
            ux, nx = solve_at(x, ub if (b - x) <= (x - a) else ua)
        except NonConvergence as exc:
            raise NoBracket(
                f"solver diverged at lambda={x:.6g} inside the bracket",
                lambda_last=a, norm_last=rho + ga, reason=str(exc),
            ) from exc
        gx = nx - rho
        if abs(gx) <= abs(n_star - rho):
            lam_star, u_star, n_star = x, ux, nx
        if gx == 0.0:
            a = b = x
        elif gx < 0:
            a, ga, ua = x, gx, ux
            gb *= 0.5
        else:
            b, gb, ub = x, gx, ux
            ga *= 0.5
    else:
        raise NoBracket(
            "refinement did not converge", lambda_last=a, norm_last=rho + ga,
            reason="refinement iteration cap",
        )

    return PairResult(
        lambda_star=lam_star,
        u_star=u_star,
        rho=rho,
        residual=fixed_point_residual(p, lam_star, u_star),
        n_iterations=stats.iterations,
        n_continuation_steps=n_steps,
    )
