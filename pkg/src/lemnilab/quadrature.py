"""Adaptive tensor-product panel quadrature on rectangles.

Each rectangular panel is integrated with a 15-node Kronrod rule per axis;
the embedded 7-node Gauss subset provides the error estimate, exactly as in
one-dimensional QUADPACK but tensorized.  Panels are split 2x2, worst
estimated error first, until the summed error estimate meets the tolerance
or limits are hit.  Panel bookkeeping is fully deterministic: ties break on
creation index and the final sum runs in creation order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

# Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (abscissae symmetric).
_XGK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

# full 15-point Kronrod arrays, ascending nodes
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss-7 weights aligned on the Kronrod grid (Gauss nodes sit at odd slots)
_WGFULL = np.zeros(15)
_WGFULL[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass
class QuadratureResult:
    value: float
    error_bound: float
    cells_used: int
    converged: bool


def _panel_rule(f, xlo, xhi, ylo, yhi):
    """Kronrod and Gauss tensor estimates of the panel integral."""
    hx = 0.5 * (xhi - xlo)
    hy = 0.5 * (yhi - ylo)
    x = xlo + hx * (_NODES + 1.0)
    y = ylo + hy * (_NODES + 1.0)
    X, Y = np.meshgrid(x, y, indexing="ij")
    vals = f(X.ravel(), Y.ravel()).reshape(15, 15)
    k = hx * hy * float(_WK @ vals @ _WK)
    g = hx * hy * float(_WGFULL @ vals @ _WGFULL)
    return k, abs(k - g)


def integrate_rectangles(
    f,
    x_edges,
    y_edges,
    abs_tolerance: float,
    max_depth: int = 12,
    max_panels: int = 40000,
) -> QuadratureResult:
    """Integrate f(x, y) over the grid spanned by the given panel edges.

    f must accept flat ndarrays (x, y) and return an ndarray of values.
    x_edges / y_edges define the initial panel layout (they need not be
    uniform; geometric radial layouts are the intended use).
    """
    if abs_tolerance <= 0.0:
        raise ValueError("abs_tolerance must be positive")
    panels = {}   # id -> (xlo, xhi, ylo, yhi, depth, value, err)
    heap = []     # (-err, id)
    next_id = 0
    for i in range(len(x_edges) - 1):
        for j in range(len(y_edges) - 1):
            v, e = _panel_rule(f, x_edges[i], x_edges[i + 1], y_edges[j], y_edges[j + 1])
            panels[next_id] = (x_edges[i], x_edges[i + 1], y_edges[j], y_edges[j + 1], 0, v, e)
            heapq.heappush(heap, (-e, next_id))
            next_id += 1

    total_err = sum(p[6] for p in panels.values())
    while total_err > abs_tolerance and len(panels) < max_panels and heap:
        neg_err, pid = heapq.heappop(heap)
        if pid not in panels:
            continue
        xlo, xhi, ylo, yhi, depth, v, e = panels[pid]
        if -neg_err != e:
            continue  # stale heap entry
        if depth >= max_depth:
            continue  # cannot refine further; its error stays counted
        del panels[pid]
        total_err -= e
        xm = 0.5 * (xlo + xhi)
        ym = 0.5 * (ylo + yhi)
        for (a, b, c, d) in (
            (xlo, xm, ylo, ym), (xm, xhi, ylo, ym),
            (xlo, xm, ym, yhi), (xm, xhi, ym, yhi),
        ):
            cv, ce = _panel_rule(f, a, b, c, d)
            panels[next_id] = (a, b, c, d, depth + 1, cv, ce)
            heapq.heappush(heap, (-ce, next_id))
            total_err += ce
            next_id += 1

    value = 0.0
    err = 0.0
    for pid in sorted(panels):
        value += panels[pid][5]
        err += panels[pid][6]
    return QuadratureResult(
        value=value, error_bound=err, cells_used=len(panels), converged=err <= abs_tolerance
    )
