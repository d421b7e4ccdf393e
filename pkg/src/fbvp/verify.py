"""Independent verification of a claimed pair against the differential problem.

Two separate oracles, neither of which touches the integral-operator
solver path:

* finite differences: the third derivative is reconstructed from the
  stored derivative array by two passes of a first-derivative stencil
  (4th-order central in the interior, 2nd-order one-sided at the ends)
  and inserted into the differential equation;
* method of steps: the delay ODE is re-integrated from t = 0 by classical
  RK4 at a quarter of the grid step, with delayed arguments read from the
  already-computed trajectory (or from the prescribed history for
  negative times), and the trajectory compared with the candidate.

Both only consume GridFn evaluation plus the problem's nonlinearities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationBlowup
from .funcspace import GridFn
from .kernels import BCKind


@dataclass
class VerifyReport:
    ode_residual: float
    bc_at0_value: float
    bc_at0_deriv: float
    bc_terminal: float
    history_mismatch: float
    steps_deviation: float
    tolerances: dict
    passed: bool

    def to_dict(self):
        return {
            "ode_residual": self.ode_residual,
            "bc_at0_value": self.bc_at0_value,
            "bc_at0_deriv": self.bc_at0_deriv,
            "bc_terminal": self.bc_terminal,
            "history_mismatch": self.history_mismatch,
            "steps_deviation": self.steps_deviation,
            "tolerances": dict(self.tolerances),
            "passed": self.passed,
        }


def _d1(f, h):
    """First derivative of uniform samples: 4th-order central stencil in the
    interior, 2nd-order central/one-sided at the two nodes nearest each end."""
    f = np.asarray(f, dtype=float)
    n = len(f)
    if n < 7:
        raise ValueError("need at least 7 samples for the derivative stencils")
    g = np.empty(n)
    g[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    g[1] = (f[2] - f[0]) / (2 * h)
    g[-2] = (f[-1] - f[-3]) / (2 * h)
    g[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    g[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return g


def _d1_onesided4(f, h):
    """4th-order 5-point one-sided first derivative at the first sample."""
    return (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)


def ode_residual(p, lam, u):
    """Sup of |u''' + lambda F(t, u_t)| over interior nodes of [0, 1].

    u''' comes from the stored derivative array via two first-derivative
    passes; the sup excludes the 4 nodes nearest each endpoint, where the
    one-sided boundary stencils contaminate the doubly-differentiated
    values at first order in h.
    """
    if u.m < 32:
        raise ValueError(f"grid too coarse for the residual stencils: m={u.m} < 32")
    asm = p.assembly()
    k0 = u.idx0
    t01 = u.nodes[k0:]
    d1 = _d1(u.derivs[k0:], u.h)
    d3 = _d1(d1, u.h)
    fvals = asm.F.evaluate_grid(u, t01)
    res = np.abs(d3 + lam * fvals)
    return float(np.max(res[4:-4]))


def bc_residual(p, lam, u):
    """Residuals of the three boundary conditions for the selected family.

    Returns (|u(0)|, |u'(0)|, terminal) where the terminal residual is
    |u(1) - lam*B|, |u'(1) - lam*B| or |u''(1) - lam*B| according to the
    family; u''(1) is read from the derivative array with a 4th-order
    one-sided stencil.
    """
    asm = p.assembly()
    bval = asm.boundary_value(u, lam)
    at0_v = abs(float(u.eval(0.0)))
    at0_d = abs(float(u.eval_deriv(0.0)))
    if p.bc == BCKind.BC1:
        term = abs(float(u.eval(1.0)) - lam * bval)
    elif p.bc == BCKind.BC2:
        term = abs(float(u.eval_deriv(1.0)) - lam * bval)
    else:
        upp1 = _d1_onesided4(u.derivs[::-1], -u.h)
        term = abs(upp1 - lam * bval)
    return at0_v, at0_d, term


def history_match(p, u):
    """Max deviation of (u, u') from the prescribed history on [-r, 0]."""
    asm = p.assembly()
    k = u.idx0 + 1
    dv = np.max(np.abs(u.values[:k] - asm.psi.values[:k]))
    dd = np.max(np.abs(u.derivs[:k] - asm.psi.derivs[:k]))
    return float(max(dv, dd))


class _StepSegment:
    """History view during marching: stage state at theta = 0, computed
    trajectory (cubic Hermite on the fine grid) for earlier times, and the
    prescribed history function for negative times."""

    __slots__ = ("t", "y", "times", "U", "DU", "DDU", "n_done", "psi", "dt")

    def __init__(self, t, y, times, U, DU, DDU, n_done, psi, dt):
        self.t = t
        self.y = y
        self.times = times
        self.U = U
        self.DU = DU
        self.DDU = DDU
        self.n_done = n_done
        self.psi = psi
        self.dt = dt

    def _traj(self, tau, arr0, arr1):
        i = int(np.floor(tau / self.dt))
        i = min(max(i, 0), self.n_done - 2)
        x = tau / self.dt - i
        if x < 1e-12:
            return arr0[i]
        if x > 1 - 1e-12:
            return arr0[i + 1]
        h = self.dt
        v0, v1, d0, d1 = arr0[i], arr0[i + 1], arr1[i], arr1[i + 1]
        x2, x3 = x * x, x * x * x
        return (
            (2 * x3 - 3 * x2 + 1) * v0
            + h * (x3 - 2 * x2 + x) * d0
            + (-2 * x3 + 3 * x2) * v1
            + h * (x3 - x2) * d1
        )

    def _read(self, theta, stage_idx, arr0, arr1, psi_eval):
        if theta > -1e-12:
            return self.y[stage_idx]
        tau = self.t + theta
        if tau <= 1e-14:
            return psi_eval(min(tau, 0.0))
        if tau > self.times[self.n_done - 1] + 1e-12:
            raise IntegrationBlowup(
                f"delayed argument {tau:.6g} ahead of the computed trajectory "
                f"(delay shorter than the marching step)"
            )
        return self._traj(tau, arr0, arr1)

    def value(self, theta):
        return self._read(theta, 0, self.U, self.DU, self.psi.eval)

    def deriv(self, theta):
        return self._read(theta, 1, self.DU, self.DDU, self.psi.eval_deriv)

    __call__ = value


def method_of_steps_check(p, lam, u, blowup=1e8):
    """Re-integrate the delay ODE and return the sup deviation from u.

    The initial curvature u''(0) is read from the candidate (the missing
    initial condition of the boundary problem), so this checks consistency
    of the candidate with the marching dynamics, not existence.
    """
    asm = p.assembly()
    psi = asm.psi
    m = u.m
    dt = u.h / 4.0
    n = 4 * m + 1
    times = np.arange(n) * dt
    U = np.zeros(n)
    DU = np.zeros(n)
    DDU = np.zeros(n)
    k0 = u.idx0
    c0 = _d1_onesided4(u.derivs[k0:], u.h)
    y = np.array([u.values[k0], u.derivs[k0], c0])
    U[0], DU[0], DDU[0] = y

    def rhs(t, state, n_done):
        seg = _StepSegment(t, state, times, U, DU, DDU, n_done, psi, dt)
        f = asm.F.evaluate(t, seg)
        return np.array([state[1], state[2], -lam * f])

    for i in range(n - 1):
        t = times[i]
        k1 = rhs(t, y, i + 1)
        k2 = rhs(t + dt / 2, y + dt / 2 * k1, i + 1)
        k3 = rhs(t + dt / 2, y + dt / 2 * k2, i + 1)
        k4 = rhs(t + dt, y + dt * k3, i + 1)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > blowup:
            raise IntegrationBlowup(
                f"marching integration left the trust region at t={times[i + 1]:.6g}"
            )
        U[i + 1], DU[i + 1], DDU[i + 1] = y

    dev_v = np.max(np.abs(U - u.eval(times)))
    dev_d = np.max(np.abs(DU - u.eval_deriv(times)))
    return float(max(dev_v, dev_d))


def verify_pair(
    p,
    lam,
    u,
    tol_ode=1e-3,
    tol_bc=1e-6,
    tol_history=1e-12,
    tol_steps=1e-4,
):
    """Run all four checks and aggregate a pass/fail report."""
    ode = ode_residual(p, lam, u)
    b0v, b0d, bterm = bc_residual(p, lam, u)
    hist = history_match(p, u)
    steps = method_of_steps_check(p, lam, u)
    tols = {
        "ode_residual": tol_ode,
        "bc": tol_bc,
        "history_mismatch": tol_history,
        "steps_deviation": tol_steps,
    }
    passed = (
        ode <= tol_ode
        and max(b0v, b0d, bterm) <= tol_bc
        and hist <= tol_history
        and steps <= tol_steps
    )
    return VerifyReport(
        ode_residual=ode,
        bc_at0_value=b0v,
        bc_at0_deriv=b0d,
        bc_terminal=bterm,
        history_mismatch=hist,
        steps_deviation=steps,
        tolerances=tols,
        passed=passed,
    )
