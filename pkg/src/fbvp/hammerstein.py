"""Assembly of the perturbed Hammerstein operator.

The operator acting on a trajectory u is

    (A u)(t) = integral over [0,1] of k(t, s) g(s) F(s, u_s) ds + gamma(t) B[u]

with k, gamma the Heaviside-extended Green's function data of the selected
terminal-condition family, F a segment functional of the history slice u_s
and B a functional of the whole trajectory.  The parameter-dependent map
whose fixed points are sought is  u -> psi + lambda * (A u).

Problems are described declaratively by ProblemDef; the expensive
u-independent data (kernel matrices at the grid nodes against the
quadrature nodes, with Simpson weights and the weight function g folded
in) is assembled once and cached on the instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import kernels, quadrature, registry
from .errors import FunctionalEvalError
from .funcspace import GridFn, Interval, norm_c1, resolve_resolution
from .kernels import BCKind
from .registry import BoundaryFunctional, SegmentFunctional


def _spec(entry, default_name):
    """Normalize a registry reference: name string or {name, params} dict."""
    if entry is None:
        return default_name, {}
    if isinstance(entry, str):
        return entry, {}
    if isinstance(entry, dict):
        return entry.get("name", default_name), entry.get("params", {}) or {}
    return entry, None  # already-built object


@dataclass
class ProblemDef:
    """A full problem instance.

    psi, g, F, B may be registry references (name or {name, params}) or
    already-built objects.  ``quad`` is the Simpson panel count on [0, 1];
    it is rounded up to a multiple of m so that every grid node is a panel
    edge and the kernel kink never falls inside a panel.
    """

    bc: BCKind
    r: float
    m: int = 64
    quad: Optional[int] = None
    psi: Union[GridFn, str, dict] = "zero"
    g: Union[str, dict] = "one"
    F: Union[SegmentFunctional, str, dict] = "constant"
    B: Union[BoundaryFunctional, str, dict] = "zero"
    b_includes_lambda: bool = False
    homogeneous_bc: bool = False
    c4_interval: tuple = (0.0, 1.0)
    validate: bool = True

    def __post_init__(self):
        self.bc = BCKind(self.bc)
        self.m = resolve_resolution(self.r, self.m)
        q = self.quad if self.quad is not None else 2 * self.m
        self.quad = kernels.aligned_panels(self.m, q)
        self._asm = None

    def assembly(self):
        if self._asm is None:
            self._asm = Assembly(self)
        return self._asm


class Assembly:
    """Cached u-independent discretization data for a ProblemDef."""

    def __init__(self, p):
        self.p = p
        m, r = p.m, p.r

        if isinstance(p.psi, GridFn):
            psi = p.psi
            if psi.m != m or abs(psi.r - r) > 1e-12:
                raise ValueError("psi grid does not match the problem grid")
        else:
            name, params = _spec(p.psi, "zero")
            psi = registry.make_psi(name, r, m)
        self.psi = psi

        name, params = _spec(p.F, "constant")
        self.F = p.F if params is None else registry.make_F(name, params, r)
        name, params = _spec(p.B, "zero")
        self.B = p.B if params is None else registry.make_B(name, params)
        name, params = _spec(p.g, "one")
        self.g = registry.make_g(name, params) if params is not None else p.g

        self.panels = p.quad
        self.s = quadrature.sample_nodes(self.panels)
        self.wts = quadrature.simpson_weights(self.panels)
        self.g_samples = np.asarray(self.g(self.s), dtype=float)

        below, above, dbelow, dabove = kernels.branches(p.bc)
        self.t01 = psi.nodes[psi.idx0 :]
        self.K = quadrature.kernel_matrix(below, above, self.t01, self.panels)
        self.DK = quadrature.kernel_matrix(dbelow, dabove, self.t01, self.panels)
        wg = self.wts * self.g_samples
        self.KW = self.K * wg[None, :]
        self.DKW = self.DK * wg[None, :]
        self.gamma = kernels.gamma_hat(p.bc, self.t01)
        self.dgamma = kernels.gamma_hat_deriv(p.bc, self.t01)
        self.full = Interval(-r, 1.0)
        self.unit = Interval(0.0, 1.0)

        if p.validate:
            self._validate()

    def _validate(self):
        psi = self.psi
        if np.min(psi.values) < -1e-12:
            raise ValueError("psi must be non-negative on [-r, 1]")
        k0 = psi.idx0
        if max(np.max(np.abs(psi.values[k0:])), np.max(np.abs(psi.derivs[k0:]))) > 1e-12:
            raise ValueError("psi and psi' must vanish on [0, 1]")
        if np.min(self.g_samples) < -1e-12:
            raise ValueError("g must be non-negative on [0, 1]")

    def f_samples(self, u):
        """F(s, u_s) at the quadrature nodes."""
        return self.F.evaluate_grid(u, self.s)

    def boundary_value(self, u, lam=1.0):
        """Effective B contribution (0 when forced homogeneous; scaled by
        lambda when the problem declares B as carrying its own factor)."""
        if self.p.homogeneous_bc:
            return 0.0
        b = self.B.evaluate(u)
        return lam * b if self.p.b_includes_lambda else b

    def lift(self, vals01, ders01):
        """Zero-extend [0,1] node data to a GridFn on [-r, 1]."""
        zeros = np.zeros(self.psi.idx0)
        return GridFn(
            self.psi.r,
            self.psi.m,
            np.concatenate([zeros, vals01]),
            np.concatenate([zeros, ders01]),
        )


def integrate_kernel_weighted(i, t, w):
    """integral over [0,1] of k_i(t, s) * w(s) ds for samples w on the
    composite Simpson nodes, splitting the kink panel at s = t."""
    below, above, _, _ = kernels.branches(i)
    return quadrature.integrate_split(below, above, float(t), w)


def apply_F_op(p, u, lam=1.0):
    """The operator value A u as a GridFn (zero on the history interval).

    ``lam`` only matters for problems flagged b_includes_lambda, where the
    boundary functional carries its own parameter factor.
    """
    asm = p.assembly()
    w = asm.f_samples(u)
    bval = asm.boundary_value(u, lam)
    vals01 = asm.KW @ w + asm.gamma * bval
    ders01 = asm.DKW @ w + asm.dgamma * bval
    return asm.lift(vals01, ders01)


def affine_map(p, lam, u):
    """psi + lambda * A u, the map whose fixed points solve the problem."""
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    asm = p.assembly()
    return asm.psi + lam * apply_F_op(p, u, lam)


def fixed_point_residual(p, lam, u):
    """C1 distance (on [-r, 1]) between u and its image under the map."""
    asm = p.assembly()
    return norm_c1(u - affine_map(p, lam, u), asm.full)
