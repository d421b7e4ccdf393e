"""Grid representation of C1 functions on [-r, 1].

A function is stored as (value, derivative) pairs on a uniform grid with
step h = 1/m covering [-r, 1]; between nodes it is the cubic Hermite
interpolant of those pairs, so a function and its derivative are evaluable
anywhere in the domain.  Norms are grid sups: the resolution m is the
accuracy knob and norm values are exactly reproducible.

The cone of interest is the set of non-negative functions that vanish
together with their derivative on the history interval [-r, 0]; solutions
are sought in the translate of that cone by a prescribed history function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Relative offset below which an evaluation point is snapped onto a node,
# so stored node data is returned exactly.
_SNAP = 1e-12

CONE_TOL = 1e-10


def resolve_resolution(r, m):
    """Smallest m' >= m such that r is an integer multiple of 1/m'.

    Keeps both t = -r and t = 0 on grid nodes, so delay lookups of the
    form t - r never interpolate across the history junction.
    """
    if r <= 0:
        raise ValueError(f"delay horizon r must be positive, got {r}")
    m = int(m)
    if m < 16:
        raise ValueError(f"grid resolution m must be at least 16, got {m}")
    for cand in range(m, m + 100001):
        rm = r * cand
        if abs(rm - round(rm)) <= 1e-9 * max(1.0, rm):
            return cand
    raise ValueError(f"cannot place -r on a node for r={r} with m >= {m}")


@dataclass(frozen=True)
class GridFn:
    """A C1 function on [-r, 1]: node values and node derivative values.

    Immutable after construction (the arrays are marked read-only); all
    operations return new instances, so instances are safe to share.
    """

    r: float
    m: int
    values: np.ndarray
    derivs: np.ndarray

    def __post_init__(self):
        m = int(self.m)
        r = float(self.r)
        if r <= 0:
            raise ValueError(f"delay horizon r must be positive, got {r}")
        n_hist = round(r * m)
        if abs(r * m - n_hist) > 1e-9 * max(1.0, r * m):
            raise ValueError(f"r={r} is not an integer multiple of 1/m (m={m})")
        n_nodes = n_hist + m + 1
        vals = np.ascontiguousarray(self.values, dtype=float).copy()
        ders = np.ascontiguousarray(self.derivs, dtype=float).copy()
        if vals.shape != (n_nodes,) or ders.shape != (n_nodes,):
            raise ValueError(
                f"values/derivs must have shape ({n_nodes},) for r={r}, m={m}; "
                f"got {vals.shape} and {ders.shape}"
            )
        vals.flags.writeable = False
        ders.flags.writeable = False
        nodes = (np.arange(n_nodes) - n_hist) / m
        nodes.flags.writeable = False
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "derivs", ders)
        object.__setattr__(self, "_n_hist", n_hist)
        object.__setattr__(self, "_nodes", nodes)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_callable(cls, f, df, r, m):
        """Sample a function and its derivative on the grid for (r, m).

        m is rounded up if needed so -r lands on a node.
        """
        m = resolve_resolution(r, m)
        n_hist = round(r * m)
        nodes = (np.arange(n_hist + m + 1) - n_hist) / m
        vals = np.asarray([float(f(t)) for t in nodes])
        ders = np.asarray([float(df(t)) for t in nodes])
        return cls(r, m, vals, ders)

    @classmethod
    def zeros(cls, r, m):
        m = resolve_resolution(r, m)
        n = round(r * m) + m + 1
        return cls(r, m, np.zeros(n), np.zeros(n))

    # -- basic geometry --------------------------------------------------------

    @property
    def h(self):
        return 1.0 / self.m

    @property
    def nodes(self):
        return self._nodes

    @property
    def idx0(self):
        """Index of the node at t = 0."""
        return self._n_hist

    def same_grid(self, other):
        return self.m == other.m and abs(self.r - other.r) < 1e-12

    # -- evaluation ------------------------------------------------------------

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        if t.size and (t.min() < -self.r - 1e-9 or t.max() > 1.0 + 1e-9):
            raise DomainError(
                f"evaluation point outside [-{self.r}, 1]: "
                f"range [{t.min()}, {t.max()}]"
            )
        pos = (t + self.r) * self.m
        j = np.clip(np.floor(pos).astype(int), 0, len(self.values) - 2)
        x = pos - j
        return j, x

    def eval(self, t):
        """Interpolated value; exact stored value when t is a node."""
        scalar = np.isscalar(t) or np.ndim(t) == 0
        j, x = self._locate(t)
        v0, v1 = self.values[j], self.values[j + 1]
        d0, d1 = self.derivs[j], self.derivs[j + 1]
        h = self.h
        x2 = x * x
        x3 = x2 * x
        out = (
            (2 * x3 - 3 * x2 + 1) * v0
            + h * (x3 - 2 * x2 + x) * d0
            + (-2 * x3 + 3 * x2) * v1
            + h * (x3 - x2) * d1
        )
        out = np.where(x < _SNAP, v0, out)
        out = np.where(x > 1.0 - _SNAP, v1, out)
        return float(out) if scalar else out

    def eval_deriv(self, t):
        """Derivative of the interpolant; exact stored derivative at nodes."""
        scalar = np.isscalar(t) or np.ndim(t) == 0
        j, x = self._locate(t)
        v0, v1 = self.values[j], self.values[j + 1]
        d0, d1 = self.derivs[j], self.derivs[j + 1]
        h = self.h
        x2 = x * x
        out = (
            (6 * x2 - 6 * x) * v0 / h
            + (3 * x2 - 4 * x + 1) * d0
            + (-6 * x2 + 6 * x) * v1 / h
            + (3 * x2 - 2 * x) * d1
        )
        out = np.where(x < _SNAP, d0, out)
        out = np.where(x > 1.0 - _SNAP, d1, out)
        return float(out) if scalar else out

    # -- arithmetic (same grid required) ----------------------------------------

    def _binary(self, other, op):
        if not isinstance(other, GridFn):
            return NotImplemented
        if not self.same_grid(other):
            raise ValueError("grid mismatch in GridFn arithmetic")
        return GridFn(self.r, self.m, op(self.values, other.values), op(self.derivs, other.derivs))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return GridFn(self.r, self.m, c * self.values, c * self.derivs)

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self


@dataclass(frozen=True)
class Segment:
    """History slice of a grid function: theta -> origin(t + theta) on [-r, 0]."""

    origin: GridFn
    t: float

    def _shift(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.size and (theta.min() < -self.origin.r - 1e-9 or theta.max() > 1e-9):
            raise DomainError(f"segment argument outside [-{self.origin.r}, 0]")
        return self.t + theta

    def value(self, theta):
        return self.origin.eval(self._shift(theta))

    def deriv(self, theta):
        return self.origin.eval_deriv(self._shift(theta))

    __call__ = value


def segment(u, t):
    """The history segment of u anchored at time t in [0, 1]."""
    if not (-1e-12 <= t <= 1.0 + 1e-12):
        raise DomainError(f"segment anchor t={t} outside [0, 1]")
    return Segment(u, float(min(max(t, 0.0), 1.0)))


@dataclass(frozen=True)
class Interval:
    """A compact subinterval of [-r, 1]; norms snap its ends to grid nodes."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")


def _node_span(u, itv):
    if itv.lo < -u.r - 1e-9 or itv.hi > 1.0 + 1e-9:
        raise DomainError(f"interval [{itv.lo}, {itv.hi}] outside [-{u.r}, 1]")
    i0 = int(round((itv.lo + u.r) * u.m))
    i1 = int(round((itv.hi + u.r) * u.m))
    i0 = max(i0, 0)
    i1 = min(i1, len(u.values) - 1)
    return i0, i1


def norm_inf(u, itv):
    """Sup of |u| over the grid nodes of the interval."""
    i0, i1 = _node_span(u, itv)
    return float(np.max(np.abs(u.values[i0 : i1 + 1])))


def norm_c1(u, itv):
    """max of the sup norms of u and u' over the interval's grid nodes."""
    i0, i1 = _node_span(u, itv)
    seg_v = np.max(np.abs(u.values[i0 : i1 + 1]))
    seg_d = np.max(np.abs(u.derivs[i0 : i1 + 1]))
    return float(max(seg_v, seg_d))


def in_cone_K0(u, tol=CONE_TOL):
    """Membership test for the cone: u >= 0 on [-r,1], u = u' = 0 on [-r,0].

    Checked at grid nodes with tolerance ``tol`` (iteration/quadrature noise
    floor).
    """
    if np.min(u.values) < -tol:
        return False
    k = u.idx0 + 1
    return bool(
        np.max(np.abs(u.values[:k])) <= tol and np.max(np.abs(u.derivs[:k])) <= tol
    )


def _bernstein(coef, t):
    """Non-negative bump combination sum_i c_i B_{i,d}(t) and its derivative."""
    d = len(coef) - 1
    b = np.zeros_like(t)
    db = np.zeros_like(t)
    for i, c in enumerate(coef):
        if c == 0.0:
            continue
        w = math.comb(d, i)
        b += c * w * t**i * (1.0 - t) ** (d - i)
        # derivative of t^i (1-t)^(d-i)
        term = np.zeros_like(t)
        if i > 0:
            term += i * t ** (i - 1) * (1.0 - t) ** (d - i)
        if d - i > 0:
            term -= (d - i) * t**i * (1.0 - t) ** (d - i - 1)
        db += c * w * term
    return b, db


def boundary_sample(psi, rho, n, seed, degree=6):
    """Draw n functions on the rho-sphere of the cone translate psi + K0.

    Each sample is psi + v with v = t^2 * (random non-negative Bernstein
    bump combination) on [0, 1], zero on [-r, 0], rescaled so that the C1
    norm of v over [0, 1] equals rho.  Deterministic per seed.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    n = int(n)
    if n < 0:
        raise ValueError("sample count must be non-negative")
    rng = np.random.default_rng(seed)
    tpos = psi.nodes[psi.idx0 :]
    k_hist = psi.idx0
    i01 = Interval(0.0, 1.0)
    out = []
    for _ in range(n):
        coef = rng.random(degree + 1)
        b, db = _bernstein(coef, tpos)
        vals = np.concatenate([np.zeros(k_hist), tpos**2 * b])
        ders = np.concatenate([np.zeros(k_hist), 2 * tpos * b + tpos**2 * db])
        v = GridFn(psi.r, psi.m, vals, ders)
        nrm = norm_c1(v, i01)
        if nrm < 1e-14:  # all-zero draw; fall back to the plain t^2 profile
            v = GridFn(
                psi.r,
                psi.m,
                np.concatenate([np.zeros(k_hist), tpos**2]),
                np.concatenate([np.zeros(k_hist), 2 * tpos]),
            )
            nrm = norm_c1(v, i01)
        out.append(psi + (rho / nrm) * v)
    return out
