"""Green's kernel of the order-alpha two-point Dirichlet problem on [0,1].

The kernel has the two-branch form

    G(t,s,alpha) = [ (t(1-s))^(alpha-1) - (t-s)^(alpha-1) ] / Gamma(alpha),  s <= t,
    G(t,s,alpha) =   (t(1-s))^(alpha-1) / Gamma(alpha),                      t <= s,

with 1 < alpha <= 2.  At alpha = 2 it reduces to the classical kernel
s(1-t) / t(1-s).  Besides pointwise evaluation this module integrates the
kernel exactly against piecewise-linear hat functions: both required
antiderivatives are elementary powers, so no quadrature is involved and the
derivative kink along s = t costs no accuracy.

All functions are pure and safe to call concurrently.
"""

import math

import numpy as np

from .errors import HypothesisError

ALPHA_MIN = 1.0
ALPHA_MAX = 2.0


def check_order(alpha):
    """Validate the differentiation order ``1 < alpha <= 2``."""
    alpha = float(alpha)
    if not ALPHA_MIN < alpha <= ALPHA_MAX:
        raise HypothesisError(
            "order-range", f"order alpha must lie in (1, 2], got {alpha!r}")
    return alpha


def gamma(x):
    """Gamma function for positive real arguments.

    Standard double-precision evaluation (relative error well below 1e-12).
    Raises ``ValueError`` for non-positive arguments.
    """
    x = float(x)
    if x <= 0.0:
        raise ValueError(f"gamma requires a positive argument, got {x!r}")
    return math.gamma(x)


def green_eval(t, s, alpha):
    """Evaluate G(t, s, alpha); ``t`` and ``s`` may be scalars or arrays.

    Both coordinates must lie in [0, 1].  The second branch term
    (t-s)^(alpha-1) is clipped at zero so a single expression covers both
    branches.
    """
    alpha = check_order(alpha)
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0) or np.any(s < 0.0) or np.any(s > 1.0):
        raise ValueError("kernel arguments must lie in the unit square")
    a1 = alpha - 1.0
    out = ((t * (1.0 - s)) ** a1 - np.maximum(t - s, 0.0) ** a1) / math.gamma(alpha)
    return out if out.ndim else float(out)


def _powdiff(x, y, e):
    """x**e - y**e for x >= y >= 0, without cancellation.

    The hat-function slopes scale like the reciprocal element width, so the
    power differences they multiply must be exact to relative (not absolute)
    rounding; the expm1/log1p form delivers that for any gap size.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    y_safe = np.where(y > 0.0, y, 1.0)
    stable = y_safe ** e * np.expm1(e * np.log1p((x - y) / y_safe))
    return np.where(y > 0.0, stable, x ** e)


def _segment_integral(t, s1, s2, a, b, alpha):
    """Exact integral of G(t, s, alpha) * (a + b*s) over s in [s1, s2].

    Vectorized over ``t``.  The separable branch contributes over the whole
    segment; the (t-s)^(alpha-1) branch only over [s1, min(s2, t)], which the
    clipped differences below select automatically (this is the closed-form
    split of a segment containing s = t).
    """
    a1 = alpha - 1.0
    ap1 = alpha + 1.0

    sig1 = 1.0 - s1
    sig2 = 1.0 - s2
    c_sep = ((a + b) * _powdiff(sig1, sig2, alpha) / alpha
             - b * _powdiff(sig1, sig2, ap1) / ap1)
    part_sep = t ** a1 * c_sep

    tm1 = np.maximum(t - s1, 0.0)
    tm2 = np.maximum(t - s2, 0.0)
    part_sing = ((a + b * t) * _powdiff(tm1, tm2, alpha) / alpha
                 - b * _powdiff(tm1, tm2, ap1) / ap1)
    return (part_sep - part_sing) / math.gamma(alpha)


def green_hat_integral(t, node_index, mesh, alpha):
    """Integral of G(t, ., alpha) against the hat function of one mesh node.

    Returns ``\\int_0^1 G(t, s, alpha) hat_j(s) ds`` in closed form, where
    ``hat_j`` is the piecewise-linear nodal basis function of ``mesh`` at
    ``node_index``.  ``t`` may be a scalar or an array (one value per row of
    an operator matrix).
    """
    alpha = check_order(alpha)
    nodes = mesh.nodes
    j = int(node_index)
    if not 0 <= j < len(nodes):
        raise IndexError(f"node index {j} out of range for mesh with "
                         f"{len(nodes)} nodes")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
        raise ValueError("evaluation points must lie in [0, 1]")
    out = np.zeros(t_arr.shape)
    if j > 0:
        s1, s2 = nodes[j - 1], nodes[j]
        d = s2 - s1
        out += _segment_integral(t_arr, s1, s2, -s1 / d, 1.0 / d, alpha)
    if j < len(nodes) - 1:
        s1, s2 = nodes[j], nodes[j + 1]
        d = s2 - s1
        out += _segment_integral(t_arr, s1, s2, s2 / d, -1.0 / d, alpha)
    return out if out.ndim else float(out)


def green_integral(t, alpha):
    """Closed form of the full kernel integral: t^(alpha-1)(1-t)/Gamma(alpha+1)."""
    alpha = check_order(alpha)
    t = np.asarray(t, dtype=float)
    out = t ** (alpha - 1.0) * (1.0 - t) / math.gamma(alpha + 1.0)
    return out if out.ndim else float(out)
