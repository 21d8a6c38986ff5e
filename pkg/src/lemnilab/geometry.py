"""Lemniscate geometry: extraction of {|p(z)| = 1} as polylines.

The level set is traced by marching squares on g(z) = |p(z)| - 1 over the
square bounding the certified radius outside which |p| > 1.  The grid is
hierarchical: a coarse full sweep finds the large-scale loops, each loop is
then refined independently (children of its own cells, curve-following
breadth-first expansion) until its length converges, and every computed
root of p that no loop encloses triggers a local drill-down around that
root.  The drill is what makes components far below the global grid scale
detectable: each component of {|p| < 1} contains a root, so chasing
unenclosed roots is a complete search.

Cell-sign conventions: a corner with g <= 0 counts as inside.  Ambiguous
(saddle) cells are resolved by the sign at the cell center; saddles still
present at the deepest level are reported in ``unresolved_cells`` and such
extractions should be excluded from component statistics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .ensembles import ComplexPolynomial, horner

_LOG_ROOT_RESIDUAL = math.log(1e-8)


class DegeneratePolynomialError(ValueError):
    """Leading coefficient vanishes; degree is not what it claims."""


class RootConvergenceError(RuntimeError):
    """Simultaneous iteration failed; carries the best iterate found."""

    def __init__(self, message, best, residuals):
        super().__init__(message)
        self.best = best
        self.residuals = residuals


class CertificateParameterError(ValueError):
    """Certificate exponents out of range or degree too small for them."""


class GiantOutcome(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class GridConfig:
    """Extraction effort knobs."""

    initial_cells_per_axis: int = 64
    max_depth: int = 12
    vertex_tolerance: float = 1e-9
    length_refine_tolerance: float = 1e-7

    def __post_init__(self):
        if self.initial_cells_per_axis < 4:
            raise ValueError("initial_cells_per_axis must be >= 4")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not (self.vertex_tolerance > 0.0):
            raise ValueError("vertex_tolerance must be positive")
        if not (self.length_refine_tolerance > 0.0):
            raise ValueError("length_refine_tolerance must be positive")


@dataclass
class LevelSetCurve:
    """Extracted polyline components of {|p| = 1} plus quality flags."""

    components: list
    per_component_length: list
    total_length: float
    b0: int
    unresolved_cells: int
    length_converged: bool = True
    depth_used: int = 0
    unenclosed_roots: int = 0
    enclosure_conflicts: int = 0

    def flagged(self) -> bool:
        """True when the extraction should be excluded from statistics."""
        return (
            self.unresolved_cells > 0
            or not self.length_converged
            or self.unenclosed_roots > 0
            or self.enclosure_conflicts > 0
        )

    def to_json_dict(self) -> dict:
        return {
            "b0": self.b0,
            "total_length": self.total_length,
            "per_component_length": list(self.per_component_length),
            "unresolved_cells": self.unresolved_cells,
            "length_converged": self.length_converged,
            "depth_used": self.depth_used,
            "unenclosed_roots": self.unenclosed_roots,
            "enclosure_conflicts": self.enclosure_conflicts,
            "components": [
                [[v.real, v.imag] for v in comp] for comp in self.components
            ],
        }


def polyline_length(vertices: np.ndarray) -> float:
    """Length of a closed polyline given as a complex vertex array."""
    if len(vertices) < 2:
        return 0.0
    d = np.abs(np.diff(vertices))
    return float(d.sum() + abs(vertices[0] - vertices[-1]))


def arc_length(curve: LevelSetCurve) -> float:
    """Total polyline length of an extracted curve."""
    return float(sum(polyline_length(c) for c in curve.components))


def bounding_radius(p: ComplexPolynomial) -> float:
    """A radius R certified to satisfy |p(z)| > 1 for every |z| >= R.

    Uses |p(z)| >= |c_n| R^n - sum_{k<n} |c_k| R^k; in the normalized form
    h(R) = |c_n| - sum_{k<n} |c_k| R^{k-n} - R^{-n} the left side is
    increasing in R, so doubling until h > 0 and bisecting back is exact:
    once h(R) > 0, |p| > 1 on every circle of radius >= R.
    """
    c = np.abs(p.coeff_array())
    n = p.degree
    if c[-1] == 0.0:
        raise DegeneratePolynomialError("leading coefficient is zero")
    k = np.arange(n, dtype=np.float64)

    def h(r: float) -> float:
        rk = r ** (k - n)        # decreasing in r for every k < n
        return c[-1] - float(c[:-1] @ rk) - r ** (-n)

    hi = 1.0
    for _ in range(4000):
        if h(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise DegeneratePolynomialError("no bounding radius below overflow range")
    lo = hi / 2.0 if hi > 1.0 else 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid <= 0.0:
            break
        if h(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 1.02 * hi


def _residual_log_bound(p: ComplexPolynomial, z: np.ndarray) -> np.ndarray:
    cmax = float(np.max(np.abs(p.coeff_array())))
    return _LOG_ROOT_RESIDUAL + math.log(cmax) + p.degree * np.log(
        np.maximum(1.0, np.abs(z))
    )


def roots(p: ComplexPolynomial, max_iterations: int | None = None) -> np.ndarray:
    """All n roots by Aberth-Ehrlich simultaneous iteration.

    Initial guesses sit on a circle whose radius is a root bound (the
    smaller of the Cauchy and Fujiwara bounds), angularly offset to break
    symmetry.  A root is accepted when the residual satisfies
    |p(root)| <= 1e-8 max_k|c_k| max(1, |root|)^n.
    """
    c = p.coeff_array()
    n = p.degree
    if c[-1] == 0.0:
        raise DegeneratePolynomialError("leading coefficient is zero")
    if n == 1:
        return np.array([-c[0] / c[1]])
    if max_iterations is None:
        # the simultaneous collapse from the bounding circle advances the
        # radius by a factor (1 - 2/n) per sweep, so the budget grows with n
        max_iterations = max(200, 4 * n)
    dc = c[1:] * np.arange(1, n + 1)
    ratios = np.abs(c[:-1]) / np.abs(c[-1])
    cauchy = 1.0 + float(np.max(ratios))
    with np.errstate(divide="ignore"):
        fujiwara = 2.0 * float(
            np.max(ratios ** (1.0 / (n - np.arange(n, dtype=np.float64))))
        )
    radius = min(cauchy, max(fujiwara, 1e-12))
    ang = 2.0 * np.pi * (np.arange(n) + 0.376) / n
    z = radius * np.exp(1j * ang)

    for _ in range(max_iterations):
        pv = horner(c, z)
        dv = horner(dc, z)
        dv = np.where(dv == 0, 1e-300, dv)
        w = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = (1.0 / diff).sum(axis=1)
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-30, 1.0, denom)
        corr = w / denom
        z = z - corr
        if np.max(np.abs(corr)) < 1e-14 * (1.0 + np.max(np.abs(z))):
            break

    res = np.abs(horner(c, z))
    ok = np.log(np.maximum(res, 1e-300)) <= _residual_log_bound(p, z)
    if not np.all(ok):
        raise RootConvergenceError(
            f"{int((~ok).sum())} of {n} roots failed the residual test",
            best=z,
            residuals=res,
        )
    return z


def points_in_polygon(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Even-odd containment of complex points in a closed complex polygon.

    Coordinates are re-centered on the polygon centroid first: polygons can
    be smaller than the ULP of their position (sub-noise components sit at
    radius 1/|p'| around their root), and the test must keep its relative
    precision there.
    """
    pts = np.atleast_1d(points)
    center = complex(vertices.mean())
    pts = pts - center
    vertices = vertices - center
    px = pts.real[None, :]
    py = pts.imag[None, :]
    crossings = np.zeros(pts.shape, dtype=np.int64)
    block = max(1, (1 << 22) // max(pts.size, 1))
    nv = len(vertices)
    rolled = np.roll(vertices, -1)
    for start in range(0, nv, block):
        v1 = vertices[start:start + block]
        v2 = rolled[start:start + block]
        x1 = v1.real[:, None]
        y1 = v1.imag[:, None]
        x2 = v2.real[:, None]
        y2 = v2.imag[:, None]
        straddle = (y1 > py) != (y2 > py)
        denom = np.where(y2 == y1, 1.0, y2 - y1)
        xcross = x1 + (py - y1) * (x2 - x1) / denom
        crossings += (straddle & (px < xcross)).sum(axis=0)
    return (crossings & 1).astype(bool)


# marching-squares segment table: case -> pairs of local edge ids
# local edges: 0 bottom, 1 right, 2 top, 3 left; corner bits: 1 A=(i,j),
# 2 B=(i+1,j), 4 C=(i+1,j+1), 8 D=(i,j+1); bit set = corner inside
_SEGMENTS = {
    1: ((3, 0),),
    2: ((0, 1),),
    3: ((3, 1),),
    4: ((1, 2),),
    6: ((0, 2),),
    7: ((3, 2),),
    8: ((2, 3),),
    9: ((0, 2),),
    11: ((1, 2),),
    12: ((3, 1),),
    13: ((0, 1),),
    14: ((0, 3),),
}
_SADDLE_CENTER_IN = {5: ((0, 1), (3, 2)), 10: ((3, 0), (1, 2))}
_SADDLE_CENTER_OUT = {5: ((3, 0), (1, 2)), 10: ((0, 1), (3, 2))}


def _edge_key(ci: int, cj: int, local: int):
    if local == 0:
        return (0, ci, cj)          # horizontal, bottom
    if local == 2:
        return (0, ci, cj + 1)      # horizontal, top
    if local == 3:
        return (1, ci, cj)          # vertical, left
    return (1, ci + 1, cj)          # vertical, right


_EDGE_NEIGHBOR = {0: (0, -1), 1: (1, 0), 2: (0, 1), 3: (-1, 0)}


@dataclass
class _WaveResult:
    segments: list = field(default_factory=list)     # (ek1, ek2, cell)
    crossing_cells: set = field(default_factory=set)
    saddle_cells: set = field(default_factory=set)
    blocked_edges: int = 0                           # neighbor outside window/domain


class _Extractor:
    """Shared state for one polynomial over one square frame."""

    def __init__(self, p: ComplexPolynomial, x0: float, y0: float, width: float,
                 cfg: GridConfig):
        self.coeffs = p.coeff_array()
        self.x0 = x0
        self.y0 = y0
        self.width = width
        self.n0 = cfg.initial_cells_per_axis
        self.cfg = cfg
        self.gcache: dict[int, dict] = {}    # level -> {(i,j): g}
        self.vcache: dict[int, dict] = {}    # level -> {edgekey: vertex}
        self.evaluations = 0

    def cells_per_axis(self, level: int) -> int:
        return self.n0 << level

    def h(self, level: int) -> float:
        return self.width / self.cells_per_axis(level)

    def _corner_z(self, level: int, ij: np.ndarray) -> np.ndarray:
        hh = self.h(level)
        return (self.x0 + ij[:, 0] * hh) + 1j * (self.y0 + ij[:, 1] * hh)

    def _g(self, z: np.ndarray) -> np.ndarray:
        self.evaluations += z.size
        return np.abs(horner(self.coeffs, z)) - 1.0

    def corner_values(self, level: int, keys: list) -> list:
        """g at the given corner indices, filling the cache as needed."""
        cache = self.gcache.setdefault(level, {})
        missing = [k for k in keys if k not in cache]
        if missing:
            if level > 0:
                parent = self.gcache.get(level - 1)
                if parent:
                    still = []
                    for (i, j) in missing:
                        if not (i & 1) and not (j & 1) and (i >> 1, j >> 1) in parent:
                            cache[(i, j)] = parent[(i >> 1, j >> 1)]
                        else:
                            still.append((i, j))
                    missing = still
            if missing:
                ij = np.array(missing, dtype=np.int64)
                vals = self._g(self._corner_z(level, ij))
                for k, v in zip(missing, vals):
                    cache[k] = float(v)
        return [cache[k] for k in keys]

    def full_sweep(self, level: int) -> _WaveResult:
        """Classify every cell of the level at once (vectorized)."""
        n = self.cells_per_axis(level)
        return self.patch_sweep(level, 0, n - 1, 0, n - 1)

    def patch_sweep(self, level: int, i0: int, i1: int, j0: int, j1: int) -> _WaveResult:
        """Classify every cell of an index rectangle (corners vectorized)."""
        hh = self.h(level)
        xs = self.x0 + hh * np.arange(i0, i1 + 2)
        ys = self.y0 + hh * np.arange(j0, j1 + 2)
        Z = xs[:, None] + 1j * ys[None, :]
        G = self._g(Z.ravel()).reshape(xs.size, ys.size)
        cache = self.gcache.setdefault(level, {})
        inside = G <= 0.0
        case = (
            inside[:-1, :-1].astype(np.int8)
            + 2 * inside[1:, :-1]
            + 4 * inside[1:, 1:]
            + 8 * inside[:-1, 1:]
        )
        mixed = (case != 0) & (case != 15)
        cells = np.argwhere(mixed)
        # cache only corners of mixed cells (the rest are never revisited)
        for ci, cj in cells:
            for (i, j) in ((ci, cj), (ci + 1, cj), (ci + 1, cj + 1), (ci, cj + 1)):
                cache[(int(i + i0), int(j + j0))] = float(G[i, j])
        out = _WaveResult()
        saddle_cells = []
        for ci, cj in cells:
            cs = int(case[ci, cj])
            cell = (int(ci + i0), int(cj + j0))
            if cs in (5, 10):
                saddle_cells.append((cell, cs))
            else:
                out.crossing_cells.add(cell)
                for (e1, e2) in _SEGMENTS[cs]:
                    out.segments.append(
                        (_edge_key(*cell, e1), _edge_key(*cell, e2), cell)
                    )
        self._finish_saddles(level, saddle_cells, out)
        return out

    def _finish_saddles(self, level, saddle_cells, out: _WaveResult):
        if not saddle_cells:
            return
        hh = self.h(level)
        centers = np.array(
            [
                (self.x0 + (ci + 0.5) * hh) + 1j * (self.y0 + (cj + 0.5) * hh)
                for (ci, cj), _ in saddle_cells
            ]
        )
        gc = self._g(centers)
        for ((cell, cs), g) in zip(saddle_cells, gc):
            table = _SADDLE_CENTER_IN if g <= 0.0 else _SADDLE_CENTER_OUT
            out.crossing_cells.add(cell)
            out.saddle_cells.add(cell)
            for (e1, e2) in table[cs]:
                out.segments.append((_edge_key(*cell, e1), _edge_key(*cell, e2), cell))

    def trace(self, level: int, seeds, window=None) -> _WaveResult:
        """Breadth-first curve-following over cells starting from seeds.

        Expansion crosses only edges where the sign changes, so the walk
        stays on curve components connected to the seed set.  ``window``
        (imin, imax, jmin, jmax), inclusive, fences the walk; edges leading
        outside it are counted as blocked.
        """
        nmax = self.cells_per_axis(level) - 1
        out = _WaveResult()
        done = set()
        frontier = []
        for cell in seeds:
            if cell not in done:
                done.add(cell)
                frontier.append(cell)
        saddles = []
        while frontier:
            keys = []
            for (ci, cj) in frontier:
                keys.extend(((ci, cj), (ci + 1, cj), (ci + 1, cj + 1), (ci, cj + 1)))
            keyvals = dict(zip(keys, self.corner_values(level, keys)))
            next_frontier = []
            for cell in frontier:
                ci, cj = cell
                ga = keyvals[(ci, cj)]
                gb = keyvals[(ci + 1, cj)]
                gc = keyvals[(ci + 1, cj + 1)]
                gd = keyvals[(ci, cj + 1)]
                cs = (
                    (1 if ga <= 0.0 else 0)
                    | (2 if gb <= 0.0 else 0)
                    | (4 if gc <= 0.0 else 0)
                    | (8 if gd <= 0.0 else 0)
                )
                if cs in (0, 15):
                    continue
                if cs in (5, 10):
                    saddles.append((cell, cs))
                    crossing_locals = (0, 1, 2, 3)
                else:
                    out.crossing_cells.add(cell)
                    segs = _SEGMENTS[cs]
                    crossing_locals = {e for pair in segs for e in pair}
                    for (e1, e2) in segs:
                        out.segments.append(
                            (_edge_key(ci, cj, e1), _edge_key(ci, cj, e2), cell)
                        )
                for loc in crossing_locals:
                    di, dj = _EDGE_NEIGHBOR[loc]
                    nb = (ci + di, cj + dj)
                    if nb in done:
                        continue
                    if nb[0] < 0 or nb[1] < 0 or nb[0] > nmax or nb[1] > nmax:
                        out.blocked_edges += 1
                        continue
                    if window is not None and not (
                        window[0] <= nb[0] <= window[1] and window[2] <= nb[1] <= window[3]
                    ):
                        out.blocked_edges += 1
                        continue
                    done.add(nb)
                    next_frontier.append(nb)
            frontier = next_frontier
        self._finish_saddles(level, saddles, out)
        return out

    def vertex_positions(self, level: int, edge_keys: list) -> list:
        """Bisected crossing points for the given edges of one level."""
        cache = self.vcache.setdefault(level, {})
        missing = [ek for ek in edge_keys if ek not in cache]
        if missing:
            hh = self.h(level)
            gcache = self.gcache[level]
            za = np.empty(len(missing), dtype=np.complex128)
            zb = np.empty(len(missing), dtype=np.complex128)
            gav = np.empty(len(missing))
            gbv = np.empty(len(missing))
            for idx, (orient, i, j) in enumerate(missing):
                p1 = (i, j)
                p2 = (i + 1, j) if orient == 0 else (i, j + 1)
                z1 = (self.x0 + p1[0] * hh) + 1j * (self.y0 + p1[1] * hh)
                z2 = (self.x0 + p2[0] * hh) + 1j * (self.y0 + p2[1] * hh)
                if gcache[p1] <= 0.0:
                    za[idx], zb[idx] = z1, z2
                    gav[idx], gbv[idx] = gcache[p1], gcache[p2]
                else:
                    za[idx], zb[idx] = z2, z1
                    gav[idx], gbv[idx] = gcache[p2], gcache[p1]
            verts = self._bisect(za, zb, gav, gbv)
            for ek, v in zip(missing, verts):
                cache[ek] = complex(v)
        return [cache[ek] for ek in edge_keys]

    def _bisect(self, za: np.ndarray, zb: np.ndarray, ga=None, gb=None) -> np.ndarray:
        """za inside (g <= 0), zb outside; returns points with |g| <= tol.

        Safeguarded false position with the Illinois stagnation fix: the
        bracket stays valid while convergence is superlinear, which keeps
        the evaluation count per vertex in the single digits.
        """
        vtol = self.cfg.vertex_tolerance
        za = np.array(za, dtype=np.complex128)
        zb = np.array(zb, dtype=np.complex128)
        ga = self._g(za) if ga is None else np.asarray(ga, dtype=np.float64).copy()
        gb = self._g(zb) if gb is None else np.asarray(gb, dtype=np.float64).copy()
        ga = np.minimum(ga, 0.0)
        gb = np.maximum(gb, 1e-300)
        result = 0.5 * (za + zb)
        active = np.arange(za.size)
        last = np.zeros(za.size, dtype=np.int8)
        for _ in range(48):
            a_ = za[active]
            b_ = zb[active]
            ga_ = ga[active]
            gb_ = gb[active]
            t = np.clip(ga_ / (ga_ - gb_), 0.02, 0.98)
            zm = a_ + t * (b_ - a_)
            gm = self._g(zm)
            result[active] = zm
            inside = gm <= 0.0
            ia = active[inside]
            ib = active[~inside]
            # Illinois: when the same endpoint moves twice running, halve
            # the opposite residual so the next secant crosses the root
            gb[ia[last[ia] == -1]] *= 0.5
            ga[ib[last[ib] == 1]] *= 0.5
            za[ia] = zm[inside]
            ga[ia] = np.minimum(gm[inside], 0.0)
            last[ia] = -1
            zb[ib] = zm[~inside]
            gb[ib] = gm[~inside]
            last[ib] = 1
            keep = np.abs(gm) > vtol
            active = active[keep]
            if active.size == 0:
                break
        return result

    def build_cycles(self, level: int, result: _WaveResult):
        """Chain segments into closed cycles; returns (cycles, n_open).

        A cycle is a dict with 'edges' (cyclic edge-key list), 'cells',
        'level', 'vertices' (complex array) and 'length'.
        """
        adj: dict = {}
        for (e1, e2, cell) in result.segments:
            adj.setdefault(e1, []).append((e2, cell))
            adj.setdefault(e2, []).append((e1, cell))
        visited = set()
        cycles = []
        n_open = 0
        for start in sorted(adj):
            if start in visited or len(adj[start]) != 2:
                continue
            edges = [start]
            cells = set()
            prev_cell = None
            cur = start
            closed = False
            while True:
                nxt = None
                for (other, cell) in adj[cur]:
                    if cell != prev_cell:
                        nxt = (other, cell)
                        break
                if nxt is None:
                    break
                other, cell = nxt
                cells.add(cell)
                prev_cell = cell
                if other == start:
                    closed = True
                    break
                if other in visited or len(adj[other]) != 2:
                    break
                visited.add(other)
                edges.append(other)
                cur = other
            visited.update(edges)
            if not closed:
                n_open += 1
                continue
            verts = np.array(self.vertex_positions(level, edges))
            cycles.append(
                {
                    "edges": edges,
                    "cells": cells,
                    "level": level,
                    "vertices": verts,
                    "length": polyline_length(verts),
                }
            )
        # open endpoints with degree 1 (never enter the sorted scan above)
        n_open += sum(1 for v in adj.values() if len(v) == 1) // 2
        return cycles, n_open


@dataclass
class _Group:
    """One curve component under refinement (may split into subcycles)."""

    cycles: list
    level: int
    length: float
    converged: bool = False
    final_saddles: int = 0


def _children(cells) -> list:
    out = []
    for (ci, cj) in cells:
        ci2, cj2 = 2 * ci, 2 * cj
        out.extend(((ci2, cj2), (ci2 + 1, cj2), (ci2, cj2 + 1), (ci2 + 1, cj2 + 1)))
    return out


def _refine_group(ex: _Extractor, group: _Group, tol_rel: float, tol_abs: float,
                  max_depth: int):
    """Refine one component group until its length settles.

    Convergence means the length moved by at most max(tol_rel * length,
    tol_abs) across one refinement; the absolute floor keeps swarms of
    near-grid-scale loops (whose own relative error is meaningless for the
    total) from forcing the cascade to the depth cap.
    """
    if group.level >= max_depth and group.length <= tol_abs:
        group.converged = True   # discovered at the cap; contributes below the floor
        return
    while group.level < max_depth:
        seeds = _children(set().union(*(c["cells"] for c in group.cycles)))
        res = ex.trace(group.level + 1, seeds)
        cycles, n_open = ex.build_cycles(group.level + 1, res)
        if not cycles or n_open:
            # refinement lost the curve (domain fence or numeric freak):
            # keep the previous level's answer, flagged unconverged
            group.converged = False
            group.final_saddles += n_open
            return
        newlen = sum(c["length"] for c in cycles)
        moved = abs(newlen - group.length)
        group.cycles = cycles
        group.level += 1
        group.length = newlen
        group.final_saddles = len(res.saddle_cells)
        fidelity = (min(len(c["vertices"]) for c in cycles) >= 12
                    or newlen <= tol_abs)
        if moved <= max(tol_rel * newlen, tol_abs) and not res.saddle_cells and fidelity:
            group.converged = True
            return
    group.converged = False


_SKELETON_LEVELS = 2
_DRILL_WINDOW = 24    # half-width of the drill fence, in cells


def _analytic_closure(ex: _Extractor, p: ComplexPolynomial, root: complex,
                      rts: np.ndarray, ridx: int, rays: int = 32):
    """Certified extraction of a component far smaller than any grid.

    On the circle |z - root| = d the Taylor expansion around the root gives
    |p(z)| >= |q1| d - |p(root)| - sum_{k>=2} |q_k| d^k.  If that lower
    bound exceeds 1 and no other root lies within 2d, the component of
    {|p| < 1} containing the root cannot cross the circle, so exactly one
    lemniscate component lies inside the disk.

    Every quantity in the bound is made rigorous against double-precision
    noise: |q_k| is replaced by the absolute-coefficient majorant
    A_k = sum_m |c_m| C(m,k) |root|^(m-k) >= |q_k|, and |p(root)| by its
    computed value plus the standard Horner error term ~ 2n u A_0.  Such
    components can sit far below the evaluation noise floor (|q1| of
    order 1e18 occurs routinely outside the unit circle), in which case
    the vertices are placed on the linearization circle of radius 1/|q1|,
    exact to relative order A_2 / |q1|^2; otherwise rays from the root
    are bisected like ordinary grid vertices.
    """
    n = p.degree
    q = _shifted_coefficients(p, root)
    aq = np.abs(q)
    amag = np.abs(p.coeff_array()) @ (_binomial_matrix(n) * _power_matrix(abs(root), n))
    eps = np.finfo(float).eps
    noise0 = 2.0 * (n + 1) * eps * amag[0]
    q1 = aq[1]
    if q1 <= 100.0 * (n + 1) * eps * amag[1]:
        return None   # derivative itself is below noise; no linearization
    others = np.delete(np.abs(rts - root), ridx)
    min_sep = float(others.min()) if others.size else math.inf
    kk = np.arange(2, n + 1, dtype=np.float64)
    d = 4.0 / q1
    while 2.0 * d < min_sep and d < 1.0:
        with np.errstate(over="ignore", under="ignore"):
            tail = float(amag[2:] @ d ** kk)
        if math.isfinite(tail):
            lower = q1 * d * (1.0 - 1e-12) - (aq[0] + noise0) - tail
            if lower > 1.0:
                ang = np.exp(2j * np.pi * np.arange(rays) / rays)
                if noise0 <= 0.01 and aq[0] <= 0.01:
                    za = np.full(rays, complex(root))
                    verts = ex._bisect(za, root + d * ang,
                                       np.full(rays, aq[0] - 1.0), None)
                else:
                    # curve below the evaluation noise floor: emit the
                    # linearization circle |q1| r = 1 (exact in truth to
                    # relative order A_2 / q1^2)
                    verts = root + (1.0 / q1) * ang
                return {
                    "edges": [], "cells": set(), "level": ex.cfg.max_depth,
                    "vertices": verts, "length": polyline_length(verts),
                    "rootset": frozenset({int(ridx)}),
                }
        d *= 4.0
    return None


@lru_cache(maxsize=8)
def _power_index(n: int) -> np.ndarray:
    return np.subtract.outer(np.arange(n + 1), np.arange(n + 1))


def _power_matrix(r: float, n: int) -> np.ndarray:
    d = _power_index(n)
    pw = np.power(r, np.arange(n + 1, dtype=np.float64))
    return np.where(d >= 0, pw[np.clip(d, 0, n)], 0.0)


def _extract(p: ComplexPolynomial, cfg: GridConfig, x0, y0, width,
             root_list=None) -> LevelSetCurve:
    ex = _Extractor(p, x0, y0, width, cfg)
    tol = cfg.length_refine_tolerance

    # coarse skeleton: full sweep, then two refinements of the active band
    res = ex.full_sweep(0)
    level = 0
    while level < min(_SKELETON_LEVELS, cfg.max_depth):
        seeds = _children(res.crossing_cells | res.saddle_cells)
        if root_list is not None:
            hh = ex.h(level + 1)
            nmax = ex.cells_per_axis(level + 1) - 1
            for r in root_list:
                ci = min(max(int((r.real - x0) / hh), 0), nmax)
                cj = min(max(int((r.imag - y0) / hh), 0), nmax)
                seeds.append((ci, cj))
        level += 1
        res = ex.trace(level, seeds)
    cycles, n_open_skel = ex.build_cycles(level, res)

    groups = [
        _Group(cycles=[c], level=level, length=c["length"])
        for c in sorted(cycles, key=lambda c: min(c["edges"]))
    ]
    tol_abs = tol * sum(c["length"] for c in cycles) / 64.0
    for g in groups:
        _refine_group(ex, g, tol, tol_abs, cfg.max_depth)

    unresolved = sum(g.final_saddles for g in groups)
    all_cycles = [c for g in groups for c in g.cycles]
    length_converged = all(g.converged for g in groups)

    unenclosed_count = 0
    if root_list is not None and len(root_list):
        rts = np.asarray(root_list)
        enclosed = np.zeros(len(rts), dtype=bool)
        for c in all_cycles:
            enclosed |= points_in_polygon(rts, c["vertices"])
        # chase every root no loop encloses: its component is sub-grid.
        # Components far below the grid (radius ~ 1/|p'|, which can be
        # exponentially small) are closed analytically: once the Taylor
        # bound certifies |p| > 1 on a circle around the root, the
        # component provably lies inside it and radial bisection places
        # true curve vertices.  Grid-scale stragglers fall back to a
        # swept patch whose scale comes from the same linearization.
        dcoef = ex.coeffs[1:] * np.arange(1, p.degree + 1)
        dmag = np.abs(horner(dcoef, rts))
        order = sorted(np.flatnonzero(~enclosed),
                       key=lambda i: (rts[i].real, rts[i].imag))
        for ridx in order:
            if enclosed[ridx]:
                continue
            root = rts[ridx]
            tiny = _analytic_closure(ex, p, root, rts, ridx)
            if tiny is not None:
                all_cycles.append(tiny)
                enclosed[ridx] = True
                continue
            scale = 2.0 / max(dmag[ridx], 1e-12)
            lvl_est = int(math.ceil(math.log2(max(
                6.0 * width / (ex.n0 * scale), 1.0))))
            lvl_est = min(max(lvl_est, level + 1), cfg.max_depth)
            candidates = sorted(
                range(level + 1, cfg.max_depth + 1),
                key=lambda l: (abs(l - lvl_est), l),
            )
            found = None
            for lvl in candidates:
                hh = ex.h(lvl)
                nmax = ex.cells_per_axis(lvl) - 1
                ci = min(max(int((root.real - x0) / hh), 0), nmax)
                cj = min(max(int((root.imag - y0) / hh), 0), nmax)
                res_d = ex.patch_sweep(
                    lvl,
                    max(ci - _DRILL_WINDOW, 0), min(ci + _DRILL_WINDOW, nmax),
                    max(cj - _DRILL_WINDOW, 0), min(cj + _DRILL_WINDOW, nmax),
                )
                dcycles, _ = ex.build_cycles(lvl, res_d)
                hits = [
                    c for c in dcycles
                    if points_in_polygon(np.array([root]), c["vertices"])[0]
                ]
                if hits:
                    found = _Group(
                        cycles=hits, level=lvl,
                        length=sum(c["length"] for c in hits),
                        final_saddles=len(res_d.saddle_cells),
                    )
                    break
            if found is None:
                unenclosed_count += 1
                continue
            _refine_group(ex, found, tol, tol_abs, cfg.max_depth)
            unresolved += found.final_saddles
            length_converged = length_converged and found.converged
            all_cycles.extend(found.cycles)
            for c in found.cycles:
                enclosed |= points_in_polygon(rts, c["vertices"])

        # deduplicate by enclosed-root set: distinct components have
        # disjoint root sets, so equal nonempty sets mean the same loop
        # was traced twice at different depths; keep the finer trace
        kept = {}
        orphans = []
        conflict_roots = np.zeros(len(rts), dtype=int)
        for c in all_cycles:
            key = c.get("rootset")
            if key is None:
                mask = points_in_polygon(rts, c["vertices"])
                key = frozenset(np.flatnonzero(mask).tolist())
            if not key:
                if c["length"] > tol_abs:
                    orphans.append(c)
                continue
            prev = kept.get(key)
            if prev is None or len(c["vertices"]) > len(prev["vertices"]):
                kept[key] = c
        for key in kept:
            for i in key:
                conflict_roots[i] += 1
        conflicts = int((conflict_roots > 1).sum()) + len(orphans)
        final_cycles = [kept[k] for k in sorted(kept, key=sorted)]
    else:
        final_cycles = all_cycles
        conflicts = 0

    if n_open_skel:
        unresolved += n_open_skel

    comps = [c["vertices"] for c in final_cycles]
    lengths = [c["length"] for c in final_cycles]
    return LevelSetCurve(
        components=comps,
        per_component_length=lengths,
        total_length=float(sum(lengths)),
        b0=len(comps),
        unresolved_cells=unresolved,
        length_converged=length_converged,
        depth_used=max((c["level"] for c in final_cycles), default=level),
        unenclosed_roots=unenclosed_count,
        enclosure_conflicts=conflicts,
    )


def extract_lemniscate(p: ComplexPolynomial, cfg: GridConfig | None = None) -> LevelSetCurve:
    """Extract {|p| = 1} over its certified bounding square."""
    cfg = cfg or GridConfig()
    radius = bounding_radius(p)
    root_list = roots(p)
    return _extract(p, cfg, -radius, -radius, 2.0 * radius, root_list=root_list)


def extract_in_window(p: ComplexPolynomial, center: complex, halfwidth: float,
                      cfg: GridConfig | None = None) -> LevelSetCurve:
    """Extract the level-set pieces closed inside a given square window.

    Loops that leave the window are dropped; only components entirely
    inside are reported.  No root verification is performed.
    """
    cfg = cfg or GridConfig()
    center = complex(center)
    return _extract(
        p, cfg, center.real - halfwidth, center.imag - halfwidth, 2.0 * halfwidth,
        root_list=None,
    )


def betti0(p: ComplexPolynomial, cfg: GridConfig | None = None) -> int:
    """Number of connected components of the lemniscate."""
    return extract_lemniscate(p, cfg).b0


def component_enclosing(curve: LevelSetCurve, point: complex):
    """Index of the component enclosing the point, or None."""
    for i, comp in enumerate(curve.components):
        if points_in_polygon(np.array([complex(point)]), comp)[0]:
            return i
    return None


@lru_cache(maxsize=8)
def _binomial_matrix(n: int) -> np.ndarray:
    try:
        b = np.zeros((n + 1, n + 1))
        for m in range(n + 1):
            for j in range(m + 1):
                b[m, j] = float(math.comb(m, j))
    except OverflowError as exc:
        raise CertificateParameterError(f"degree {n} too large for certificates") from exc
    if not np.all(np.isfinite(b)):
        raise CertificateParameterError(f"degree {n} too large for certificates")
    return b


def _shifted_coefficients(p: ComplexPolynomial, zeta: complex) -> np.ndarray:
    """Taylor coefficients q_j = p^(j)(zeta)/j! of p around zeta."""
    n = p.degree
    c = p.coeff_array()
    b = _binomial_matrix(n)
    pw = np.power(complex(zeta), np.arange(n + 1))
    d = np.subtract.outer(np.arange(n + 1), np.arange(n + 1))
    m = b * np.where(d >= 0, pw[np.clip(d, 0, n)], 0.0)
    return c @ m


def taylor_certificate(p: ComplexPolynomial, zeta: complex, alpha: float = 0.4,
                       beta: float = 0.05) -> bool:
    """Certificate that a lemniscate component lies in |z - zeta| < n^(-1-alpha).

    Requires p(zeta) ~ 0 (to root residual tolerance), |p'(zeta)| > 2 n^(1+alpha)
    and |p^(k)(zeta)| < n^(k + 1/2 + beta) for k = 2..n.  Exponent constraints:
    0 < beta < alpha < 1/2 and alpha - beta > 1/2 - alpha; for n >= 2 the degree
    must satisfy n^(beta + 1/2 - 2 alpha) e^(n^-alpha) < 1 so the Taylor tail
    stays below 1 on the witness circle (for n = 1 the tail is empty).
    """
    if not (0.0 < beta < alpha < 0.5 and alpha - beta > 0.5 - alpha):
        raise CertificateParameterError(
            f"need 0 < beta < alpha < 1/2 and alpha - beta > 1/2 - alpha, "
            f"got alpha={alpha}, beta={beta}"
        )
    n = p.degree
    if n >= 2:
        margin = (beta + 0.5 - 2.0 * alpha) * math.log(n) + n ** (-alpha)
        if margin >= 0.0:
            raise CertificateParameterError(
                f"degree {n} too small for alpha={alpha}, beta={beta}: "
                "the Taylor tail bound does not close"
            )
    q = _shifted_coefficients(p, zeta)
    logres = _residual_log_bound(p, np.array([complex(zeta)]))[0]
    if math.log(max(abs(q[0]), 1e-300)) > logres:
        return False
    if not (abs(q[1]) > 2.0 * n ** (1.0 + alpha)):
        return False
    ln_n = math.log(n)
    for k in range(2, n + 1):
        mag = abs(q[k])
        logmag = math.log(mag) + math.lgamma(k + 1.0) if mag > 0.0 else -math.inf
        if not (logmag < (k + 0.5 + beta) * ln_n):
            return False
    return True


def giant_event(p: ComplexPolynomial, r: float, max_samples: int = 1 << 18) -> GiantOutcome:
    """Certified test of sup_{|z| = r} |p| < 1 (a giant-component witness).

    Samples m points on the circle; the Lipschitz bound
    sup |p'| <= sum_k k |c_k| r^(k-1) turns the sampled maximum plus slack
    into a certificate.  A sample with |p| >= 1 certifies false.  If the
    sampled maximum sits inside the slack band, m doubles up to the cap,
    after which the outcome is indeterminate (never counted as true).
    """
    if not (0.0 < r < 1.0):
        raise ValueError(f"r must lie in (0, 1), got {r!r}")
    c = p.coeff_array()
    k = np.arange(1, p.degree + 1)
    lipschitz = float((k * np.abs(c[1:])) @ r ** (k - 1.0))
    m = 256
    while m <= max_samples:
        z = r * np.exp(2j * np.pi * np.arange(m) / m)
        mx = float(np.max(np.abs(horner(c, z))))
        if mx >= 1.0:
            return GiantOutcome.FALSE
        if mx + lipschitz * (math.pi * r / m) < 1.0:
            return GiantOutcome.TRUE
        m *= 2
    return GiantOutcome.INDETERMINATE
