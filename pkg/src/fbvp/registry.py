"""Registry of built-in nonlinearities: segment functionals F, boundary
functionals B, weight functions g, and history functions psi.

Problems reference built-ins by name with numeric parameters, which keeps
problem files declarative and the trusted base small.  Python callers can
also wrap an arbitrary pointwise-delay right-hand side with
``delay_functional``.

Where a built-in admits a provable lower bound on the rho-sphere of the
cone translate (needed by the hypothesis checker), the entry declares it;
bounds estimated from samples are labelled empirical by the checker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson

from .errors import FunctionalEvalError
from .funcspace import GridFn, Segment, segment

_EXP_CLAMP = 700.0  # exp overflow guard; exceeding it is a divergence signal


@dataclass
class SegmentFunctional:
    """Nonlinearity F(t, phi) acting on history segments, non-negative."""

    name: str
    fn: Callable[[float, Segment], float]
    grid_fn: Optional[Callable[[GridFn, np.ndarray], np.ndarray]] = None
    # rho, psi -> callable lower bound on [0,1], valid on the rho-sphere
    delta_lower: Optional[Callable[[float, GridFn], Callable]] = None

    def evaluate(self, t, phi):
        v = float(self.fn(t, phi))
        if not np.isfinite(v):
            raise FunctionalEvalError(f"F[{self.name}] not finite at t={t}", t=t)
        if v < 0.0:
            raise FunctionalEvalError(f"F[{self.name}] negative at t={t}: {v}", t=t)
        return v

    def evaluate_grid(self, u, ts):
        """Vectorized evaluation of F(t, u_t) over an array of anchors."""
        ts = np.asarray(ts, dtype=float)
        if self.grid_fn is not None:
            out = np.asarray(self.grid_fn(u, ts), dtype=float)
            bad = ~np.isfinite(out)
            if bad.any():
                t_bad = float(ts[np.argmax(bad)])
                raise FunctionalEvalError(
                    f"F[{self.name}] not finite at t={t_bad}", t=t_bad
                )
            if (out < 0.0).any():
                t_bad = float(ts[np.argmax(out < 0.0)])
                raise FunctionalEvalError(
                    f"F[{self.name}] negative at t={t_bad}", t=t_bad
                )
            return out
        return np.array([self.evaluate(t, segment(u, t)) for t in ts])


@dataclass
class BoundaryFunctional:
    """Functional B[u] of the whole trajectory, non-negative on the cone."""

    name: str
    fn: Callable[[GridFn], float]
    # rho, psi -> provable lower bound over the rho-sphere of psi + K0
    eta_lower: Optional[Callable[[float, GridFn], float]] = None

    def evaluate(self, u):
        v = float(self.fn(u))
        if not np.isfinite(v):
            raise FunctionalEvalError(f"B[{self.name}] not finite")
        if v < 0.0:
            raise FunctionalEvalError(f"B[{self.name}] negative: {v}")
        return v


def delay_functional(name, f, r1, r2):
    """Segment functional reading point values with two delays:

        F(t, phi) = f(t, phi(0), phi'(0), phi(-r1), phi'(-r2))

    f must be numpy-vectorized in all five arguments.
    """

    def fn(t, phi):
        return f(t, phi.value(0.0), phi.deriv(0.0), phi.value(-r1), phi.deriv(-r2))

    def grid_fn(u, ts):
        return f(ts, u.eval(ts), u.eval_deriv(ts), u.eval(ts - r1), u.eval_deriv(ts - r2))

    return SegmentFunctional(name=name, fn=fn, grid_fn=grid_fn)


# -- built-in F ----------------------------------------------------------------


def _make_F_constant(params, r):
    c = float(params.get("c", 1.0))
    if c < 0:
        raise ValueError("constant F requires c >= 0")
    sf = SegmentFunctional(
        name="constant",
        fn=lambda t, phi: c,
        grid_fn=lambda u, ts: np.full_like(np.asarray(ts, dtype=float), c),
        delta_lower=lambda rho, psi: (lambda s: c + 0.0 * np.asarray(s, dtype=float)),
    )
    return sf


def _make_F_delay_exp(params, r):
    """Exponential-growth delay nonlinearity

        F(t, phi) = t * exp(phi(0) + phi'(-r2)^2) * (1 + phi'(0)^2 + phi(-r1)^2)

    On the cone translate phi(0) >= 0, so F(t, .) >= t, which the entry
    declares as its lower bound.
    """
    r1 = float(params.get("r1", 1.0 / 3.0))
    r2 = float(params.get("r2", 0.5))
    if max(r1, r2) > r + 1e-12:
        raise ValueError(f"delays r1={r1}, r2={r2} exceed the horizon r={r}")

    def f(t, u, v, p, q):
        expo = u + q * q
        expo_arr = np.asarray(expo)
        if np.any(expo_arr > _EXP_CLAMP):
            t_arr = np.broadcast_to(np.asarray(t, dtype=float), expo_arr.shape)
            t_bad = float(t_arr[np.argmax(expo_arr > _EXP_CLAMP)]) if t_arr.ndim else float(t_arr)
            raise FunctionalEvalError(
                f"exponent {float(np.max(expo_arr)):.3g} exceeds overflow guard", t=t_bad
            )
        return t * np.exp(expo) * (1.0 + v * v + p * p)

    sf = delay_functional("delay_exp", f, r1, r2)
    sf.delta_lower = lambda rho, psi: (lambda s: np.asarray(s, dtype=float) + 0.0)
    return sf


def _make_F_zero(params, r):
    return SegmentFunctional(
        name="zero",
        fn=lambda t, phi: 0.0,
        grid_fn=lambda u, ts: np.zeros_like(np.asarray(ts, dtype=float)),
        delta_lower=lambda rho, psi: (lambda s: 0.0 * np.asarray(s, dtype=float)),
    )


# -- built-in B ----------------------------------------------------------------


def _make_B_zero(params):
    return BoundaryFunctional(name="zero", fn=lambda u: 0.0, eta_lower=lambda rho, psi: 0.0)


def _make_B_constant(params):
    c = float(params.get("c", 1.0))
    if c < 0:
        raise ValueError("constant B requires c >= 0")
    return BoundaryFunctional(name="constant", fn=lambda u: c, eta_lower=lambda rho, psi: c)


def _history_energy(psi):
    """integral over [-r, 0] of t^3 * psi'(t)^2 dt (non-positive for t <= 0)."""
    k = psi.idx0 + 1
    t = psi.nodes[:k]
    return float(simpson(t**3 * psi.derivs[:k] ** 2, dx=psi.h))


def _make_B_point_energy(params):
    """B[u] = 1 / (1 + u(a)^2) + integral over [-r,1] of t^3 u'(t)^2 dt.

    The energy part is negative on the history interval, so the provable
    sphere bound is 1/(1+rho^2) plus the (fixed) history contribution.
    """
    a = float(params.get("a", 0.5))
    if not 0.0 <= a <= 1.0:
        raise ValueError("point_energy requires the read point a in [0, 1]")

    def fn(u):
        energy = simpson(u.nodes**3 * u.derivs**2, dx=u.h)
        return 1.0 / (1.0 + u.eval(a) ** 2) + float(energy)

    def eta_lower(rho, psi):
        return max(0.0, 1.0 / (1.0 + rho * rho) + _history_energy(psi))

    return BoundaryFunctional(name="point_energy", fn=fn, eta_lower=eta_lower)


# -- built-in g ----------------------------------------------------------------


def _make_g_one(params):
    return lambda s: np.ones_like(np.asarray(s, dtype=float))


def _make_g_zero(params):
    return lambda s: np.zeros_like(np.asarray(s, dtype=float))


def _make_g_constant(params):
    c = float(params.get("c", 1.0))
    return lambda s: np.full_like(np.asarray(s, dtype=float), c)


def _make_g_power(params):
    p = float(params.get("p", 1.0))
    return lambda s: np.asarray(s, dtype=float) ** p


# -- built-in psi --------------------------------------------------------------


def _make_psi_zero(r, m):
    return GridFn.zeros(r, m)


def _make_psi_parabolic(r, m):
    """t^2 on [-r, 0] and 0 on [0, 1] (C1 across the junction)."""
    base = GridFn.zeros(r, m)
    t = base.nodes
    vals = np.where(t < 0.0, t * t, 0.0)
    ders = np.where(t < 0.0, 2.0 * t, 0.0)
    return GridFn(r, base.m, vals, ders)


F_REGISTRY = {
    "constant": _make_F_constant,
    "zero": _make_F_zero,
    "delay_exp": _make_F_delay_exp,
}

B_REGISTRY = {
    "zero": _make_B_zero,
    "constant": _make_B_constant,
    "point_energy": _make_B_point_energy,
}

G_REGISTRY = {
    "one": _make_g_one,
    "zero": _make_g_zero,
    "constant": _make_g_constant,
    "power": _make_g_power,
}

PSI_REGISTRY = {
    "zero": _make_psi_zero,
    "parabolic_history": _make_psi_parabolic,
}


def _lookup(registry, kind, name):
    if name not in registry:
        known = ", ".join(sorted(registry))
        raise ValueError(f"unknown {kind} '{name}'; known names: {known}")
    return registry[name]


def make_F(name, params, r):
    return _lookup(F_REGISTRY, "segment functional F", name)(params or {}, r)


def make_B(name, params):
    return _lookup(B_REGISTRY, "boundary functional B", name)(params or {})


def make_g(name, params):
    return _lookup(G_REGISTRY, "weight function g", name)(params or {})


def make_psi(name, r, m):
    return _lookup(PSI_REGISTRY, "history function psi", name)(r, m)
