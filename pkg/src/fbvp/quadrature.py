"""Composite Simpson machinery for kernels with a kink on the diagonal.

The kernels integrated here are piecewise smooth in s with the branch
switch at s = t, so panels must never straddle that point.  Two paths:

* aligned: when t is a panel edge (always true on the assembly hot path,
  where panel counts are multiples of the grid resolution), every panel
  lies in one branch and the rule is a plain weighted dot product;
* split: for arbitrary t the panel containing it is split at t and each
  half integrated by a 3-point Simpson rule, resampling the integrand
  samples with 4-point Lagrange interpolation (order-preserving).
"""

from __future__ import annotations

import numpy as np

_EDGE_TOL = 1e-12


def sample_nodes(panels):
    """The 2*panels + 1 composite Simpson nodes on [0, 1]."""
    return np.linspace(0.0, 1.0, 2 * int(panels) + 1)


def simpson_weights(panels):
    """Node weights of the composite Simpson rule with the given panel count."""
    p = int(panels)
    if p < 1:
        raise ValueError("need at least one panel")
    w = np.zeros(2 * p + 1)
    d = 1.0 / p
    w[0:-1:2] += d / 6.0
    w[1::2] += 4.0 * d / 6.0
    w[2::2] += d / 6.0
    return w


def simpson_weights_sub(panels, a, b):
    """Weights restricted to the panels of [a, b] (ends snapped to edges)."""
    p = int(panels)
    ia = int(round(a * p))
    ib = int(round(b * p))
    ia = max(ia, 0)
    ib = min(ib, p)
    if ib <= ia:
        raise ValueError(f"subinterval [{a}, {b}] snaps to an empty panel range")
    w = np.zeros(2 * p + 1)
    d = 1.0 / p
    w[2 * ia : 2 * ib : 2] += d / 6.0
    w[2 * ia + 1 : 2 * ib : 2] += 4.0 * d / 6.0
    w[2 * ia + 2 : 2 * ib + 1 : 2] += d / 6.0
    return w


def panel_count(n_samples):
    if n_samples < 3 or n_samples % 2 == 0:
        raise ValueError(
            f"need an odd sample count >= 3 on the Simpson nodes, got {n_samples}"
        )
    return (n_samples - 1) // 2


def kernel_matrix(below, above, tgrid, panels):
    """Matrix K[j, k] of kernel values at (tgrid[j], node_k), branch-correct.

    At s = t both branches agree for the kernels used here, so the
    comparison direction is immaterial on the diagonal.
    """
    s = sample_nodes(panels)
    T = np.asarray(tgrid, dtype=float)[:, None]
    S = s[None, :]
    return np.where(S <= T, below(T, S), above(T, S))


def _lagrange4(w, xq, delta):
    """Cubic Lagrange resample of uniform samples w (spacing delta) at xq."""
    n = len(w)
    i = int(np.clip(np.floor(xq / delta) - 1, 0, n - 4))
    xs = (i + np.arange(4)) * delta
    val = 0.0
    for a in range(4):
        lag = 1.0
        for b in range(4):
            if b != a:
                lag *= (xq - xs[b]) / (xs[a] - xs[b])
        val += w[i + a] * lag
    return val


def _panel_simpson(kfun, t, w, a, b, delta):
    """3-point Simpson of kfun(t, s) * w(s) on [a, b], w resampled as needed."""
    mid = 0.5 * (a + b)
    fs = []
    for s in (a, mid, b):
        k = round(s / delta)
        if abs(s - k * delta) < _EDGE_TOL and 0 <= k < len(w):
            ws = w[k]
        else:
            ws = _lagrange4(w, s, delta)
        fs.append(kfun(t, s) * ws)
    return (b - a) / 6.0 * (fs[0] + 4.0 * fs[1] + fs[2])


def integrate_split(below, above, t, w):
    """integral over [0,1] of k(t, s) * w(s) ds with the kink panel split at s = t.

    ``w`` holds samples at the composite Simpson nodes (odd length).
    """
    w = np.asarray(w, dtype=float)
    p = panel_count(len(w))
    delta = 1.0 / (2 * p)
    s = sample_nodes(p)

    edges = np.linspace(0.0, 1.0, p + 1)
    j = int(np.clip(np.floor(t * p), 0, p - 1))
    interior = (
        0.0 < t < 1.0
        and abs(t - edges[j]) > _EDGE_TOL
        and abs(t - edges[j + 1]) > _EDGE_TOL
    )

    if not interior:
        kv = np.where(s <= t, below(t, s), above(t, s))
        return float(np.dot(simpson_weights(p), kv * w))

    total = 0.0
    # full panels left/right of the kink panel lie in a single branch
    if j > 0:
        wl = simpson_weights_sub(p, 0.0, edges[j])
        total += np.dot(wl, below(t, s) * w)
    if j < p - 1:
        wr = simpson_weights_sub(p, edges[j + 1], 1.0)
        total += np.dot(wr, above(t, s) * w)
    total += _panel_simpson(below, t, w, edges[j], t, delta)
    total += _panel_simpson(above, t, w, t, edges[j + 1], delta)
    return float(total)
