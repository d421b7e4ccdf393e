"""Green's functions of -u''' = y on [0,1] for the three terminal conditions.

Family i fixes u(0) = u'(0) = 0 plus one condition at t = 1:

    BC1: u(1) = 0      BC2: u'(1) = 0      BC3: u''(1) = 0

Each kernel is piecewise polynomial with the branch switch at s = t, and
both kernel and t-derivative are continuous across the diagonal.  The
Heaviside extensions vanish identically for t < 0, matching the history
interval where solutions are pinned to the prescribed initial function.
"""

from __future__ import annotations

import enum

import numpy as np

from . import quadrature
from .errors import DomainError
from .funcspace import GridFn


class BCKind(enum.IntEnum):
    """Which derivative order carries the functional terminal condition."""

    BC1 = 1  # u(1)
    BC2 = 2  # u'(1)
    BC3 = 3  # u''(1)


# Branch formulas; the t-derivatives below are hand differentiations of
# these (validated against central differences in the test suite).
def _k1_below(t, s):
    return 0.5 * s * (1.0 - t) * (2.0 * t - t * s - s)


def _k1_above(t, s):
    return 0.5 * (1.0 - s) ** 2 * t * t


def _k2_below(t, s):
    return 0.5 * (2.0 * t - t * t - s) * s


def _k2_above(t, s):
    return 0.5 * (1.0 - s) * t * t


def _k3_below(t, s):
    return 0.5 * s * (2.0 * t - s)


def _k3_above(t, s):
    return 0.5 * t * t + 0.0 * s


def _dk1_below(t, s):
    # d/dt [ s(1-t)(2t - ts - s)/2 ] = s (1 + ts - 2t)
    return s * (1.0 + t * s - 2.0 * t)


def _dk1_above(t, s):
    return (1.0 - s) ** 2 * t


def _dk2_below(t, s):
    return s * (1.0 - t)


def _dk2_above(t, s):
    return (1.0 - s) * t


def _dk3_below(t, s):
    return s + 0.0 * t


def _dk3_above(t, s):
    return t + 0.0 * s


_BRANCHES = {
    BCKind.BC1: (_k1_below, _k1_above, _dk1_below, _dk1_above),
    BCKind.BC2: (_k2_below, _k2_above, _dk2_below, _dk2_above),
    BCKind.BC3: (_k3_below, _k3_above, _dk3_below, _dk3_above),
}


def branches(i):
    """(below, above, d_below, d_above) branch callables for family i."""
    return _BRANCHES[BCKind(i)]


def _check_unit(x, name):
    x = np.asarray(x, dtype=float)
    if x.size and (x.min() < -1e-12 or x.max() > 1.0 + 1e-12):
        raise DomainError(f"{name} outside [0, 1]")
    return x


def k_hat(i, t, s):
    """Green's function value for family i at (t, s) in [0,1]^2."""
    scalar = np.ndim(t) == 0 and np.ndim(s) == 0
    t = _check_unit(t, "t")
    s = _check_unit(s, "s")
    below, above, _, _ = branches(i)
    out = np.where(s <= t, below(t, s), above(t, s))
    return float(out) if scalar else out


def dk_hat_dt(i, t, s):
    """t-derivative of the Green's function (continuous across s = t)."""
    scalar = np.ndim(t) == 0 and np.ndim(s) == 0
    t = _check_unit(t, "t")
    s = _check_unit(s, "s")
    _, _, dbelow, dabove = branches(i)
    out = np.where(s <= t, dbelow(t, s), dabove(t, s))
    return float(out) if scalar else out


def gamma_hat(i, t):
    """Solution of gamma''' = 0, gamma(0) = gamma'(0) = 0, unit terminal data."""
    scalar = np.ndim(t) == 0
    t = _check_unit(t, "t")
    out = t * t if BCKind(i) == BCKind.BC1 else 0.5 * t * t
    return float(out) if scalar else out


def gamma_hat_deriv(i, t):
    scalar = np.ndim(t) == 0
    t = _check_unit(t, "t")
    out = 2.0 * t if BCKind(i) == BCKind.BC1 else t
    return float(out) if scalar else out


def _extend(fn, i, t, *rest):
    scalar = np.ndim(t) == 0
    t = np.asarray(t, dtype=float)
    if t.size and t.max() > 1.0 + 1e-12:
        raise DomainError("t outside [-r, 1]")
    tpos = np.clip(t, 0.0, 1.0)
    out = np.where(t < 0.0, 0.0, fn(i, tpos, *rest))
    return float(out) if scalar else out


def extend_k(i, t, s):
    """Heaviside extension: zero for t < 0, else the kernel value."""
    return _extend(k_hat, i, t, s)


def extend_gamma(i, t):
    return _extend(gamma_hat, i, t)


def extend_gamma_deriv(i, t):
    return _extend(gamma_hat_deriv, i, t)


def aligned_panels(m, panels):
    """Round a panel count up to a multiple of m (grid nodes on panel edges)."""
    p = int(panels)
    if p < 1:
        raise ValueError("panel count must be positive")
    return ((p + m - 1) // m) * m


def green_solve(i, y, quad=None):
    """Solve -u''' = y with the homogeneous BCs of family i by quadrature.

    y is read on [0, 1] (its history part is ignored); the result is a
    GridFn on y's grid, zero on [-r, 0], with the derivative obtained from
    the kernel's t-derivative.
    """
    i = BCKind(i)
    m = y.m
    p = aligned_panels(m, quad if quad is not None else 2 * m)
    s = quadrature.sample_nodes(p)
    wts = quadrature.simpson_weights(p)
    ys = y.eval(s)
    below, above, dbelow, dabove = branches(i)
    t01 = y.nodes[y.idx0 :]
    K = quadrature.kernel_matrix(below, above, t01, p)
    DK = quadrature.kernel_matrix(dbelow, dabove, t01, p)
    wy = wts * ys
    vals01 = K @ wy
    ders01 = DK @ wy
    zeros = np.zeros(y.idx0)
    return GridFn(
        y.r,
        y.m,
        np.concatenate([zeros, vals01]),
        np.concatenate([zeros, ders01]),
    )
