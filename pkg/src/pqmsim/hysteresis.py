"""Geometry of closed input-output curves: pinch points, lobes and the
form factor F = 4*pi*A / P**2.

A pinch point is a place where the curve meets itself: a transversal
crossing, an isolated touching of two passes (e.g. two lobes joined at the
origin), or a cusp where the curve doubles back on itself (the tangential
pinch of a memristor loop at zero input).  Runs of coincident vertices,
where the curve retraces itself exactly, are not pinch points.

The enclosed area A is the sum of the absolute shoelace areas of the simple
lobes obtained by cutting the curve at its double points; the perimeter P
is the arc length of the whole curve.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import math
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

MAX_DOUBLE_POINTS = 16
DEFAULT_CUSP_ANGLE = 120.0   # degrees of turning that count as doubling back


class LoopNotClosedError(ValueError):
    pass


@dataclass(frozen=True)
class ParametricLoop:
    """Closed polyline; ``points[-1]`` is an exact copy of ``points[0]``."""

    points: np.ndarray
    closure_tol: float = 1e-9

    @property
    def vertices(self):
        return self.points[:-1]

    def __len__(self):
        return len(self.points)


class Lobe(NamedTuple):
    area: float
    perimeter: float
    orientation: int   # +1 counter-clockwise, -1 clockwise, 0 degenerate


@dataclass(frozen=True)
class FormFactorReport:
    area: float
    perimeter: float
    form_factor: float
    lobes: list
    pinch_points: list
    notes: dict = field(default_factory=dict)

    @property
    def lobe_area_ratio(self):
        areas = [lobe.area for lobe in self.lobes]
        if len(areas) < 2 or max(areas) == 0:
            return 1.0
        return min(areas) / max(areas)


def close_loop(points, closure_tol=1e-9, periodic=False, smooth=False):
    """Turn one period of (x, y) samples into a closed loop.

    By default the samples must include the period endpoint, which has to
    land within ``closure_tol`` of the first point.  With ``periodic=True``
    the samples cover one period without its endpoint and the closing edge
    is added unconditionally.  ``smooth`` applies a cyclic 3-point moving
    average (for shot-noise data).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    if len(pts) < 8:
        raise ValueError("a loop needs at least 8 points")
    gap = float(np.hypot(*(pts[-1] - pts[0])))
    if gap <= closure_tol:
        pts = pts[:-1]
    elif not periodic:
        raise LoopNotClosedError(
            f"endpoint gap {gap:.3e} exceeds closure tolerance {closure_tol:.1e}")
    if smooth:
        pts = (np.roll(pts, 1, axis=0) + pts + np.roll(pts, -1, axis=0)) / 3.0
    return ParametricLoop(np.vstack([pts, pts[:1]]), closure_tol)


def _vertices(loop):
    v = loop.vertices if isinstance(loop, ParametricLoop) else np.asarray(loop, float)
    keep = np.any(v != np.roll(v, 1, axis=0), axis=1)
    if not keep.any():
        return v[:1]
    return v[keep]


def _scale_tol(v, rel_tol):
    diag = float(np.hypot(*(v.max(axis=0) - v.min(axis=0))))
    return rel_tol * diag if diag > 0 else rel_tol


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _side(a, d, p):
    return _cross(d, p - a)


def _crossings(v, tol):
    """Transversal crossings of non-adjacent edges as (pos_i, pos_j, xy).

    Candidate pairs come from a sweep over x-sorted edge bounding boxes.
    A crossing must separate the endpoints of both edges by more than
    ``tol``; near-collinear round-off intersections of a curve retracing
    itself are dropped.  A crossing within ``tol`` of a vertex is accepted
    once, on the edge starting there, when the vertex's neighbours lie on
    opposite sides of the other edge.
    """
    n = len(v)
    a = v
    b = np.roll(v, -1, axis=0)
    d = b - a
    length = np.hypot(d[:, 0], d[:, 1])
    lo_xy, hi_xy = np.minimum(a, b), np.maximum(a, b)
    order = np.argsort(lo_xy[:, 0], kind="stable")
    xs = lo_xy[order, 0]
    width = float((hi_xy[:, 0] - lo_xy[:, 0]).max())
    events = []

    def dist(e, p):
        return _cross(d[e], p - a[e]) / length[e]

    def splits(e, vk):
        # neighbours of vertex vk on opposite sides of edge e's line
        return dist(e, v[vk - 1]) * dist(e, v[(vk + 1) % n]) < 0 and \
            min(abs(dist(e, v[vk - 1])), abs(dist(e, v[(vk + 1) % n]))) > tol

    for i in range(n):
        lo = np.searchsorted(xs, lo_xy[i, 0] - width - tol, "left")
        hi = np.searchsorted(xs, hi_xy[i, 0] + tol, "right")
        j = order[lo:hi]
        j = j[(j > i + 1) & ~((i == 0) & (j == n - 1))]
        j = j[(hi_xy[j, 0] >= lo_xy[i, 0] - tol)
              & (hi_xy[j, 1] >= lo_xy[i, 1] - tol) & (lo_xy[j, 1] <= hi_xy[i, 1] + tol)]
        if not j.size:
            continue
        denom = _cross(d[i], d[j])
        ok = np.abs(denom) > 1e-12 * length[i] * length[j]
        j, denom = j[ok], denom[ok]
        r = a[j] - a[i]
        s = _cross(r, d[j]) / denom
        u = _cross(r, d[i]) / denom
        ei, ej = tol / length[i], tol / length[j]
        ok = (s >= -ei) & (s < 1 - ei) & (u >= -ej) & (u < 1 - ej)
        for jj, si, uj, ejj in zip(j[ok], s[ok], u[ok], ej[ok]):
            jj, si, uj = int(jj), float(si), float(uj)
            at_i, at_j = si <= ei, uj <= ejj
            if at_i and at_j:
                continue  # vertex meets vertex: handled by _touches
            if at_i:
                if not splits(jj, i):
                    continue
                si = 0.0
            elif at_j:
                if not splits(i, jj):
                    continue
                uj = 0.0
            else:
                sa, sb = dist(i, a[jj]), dist(i, b[jj])
                ta, tb = dist(jj, a[i]), dist(jj, b[i])
                if not (sa * sb < 0 and ta * tb < 0 and
                        min(abs(sa), abs(sb), abs(ta), abs(tb)) > tol):
                    continue
            xy = a[i] + si * d[i]
            events.append((i + si, jj + uj, (float(xy[0]), float(xy[1]))))
    return events


def _touches(v, tol):
    """Isolated pairs of coincident, non-adjacent vertices."""
    n = len(v)
    pairs = cKDTree(v).query_pairs(tol, output_type="ndarray")
    close = set()
    for i, j in pairs:
        i, j = (int(i), int(j)) if i < j else (int(j), int(i))
        if j - i >= 2 and not (i == 0 and j == n - 1):
            close.add((i, j))
    events = []
    for i, j in close:
        retrace = False
        for di in (-1, 1):
            for dj in (-1, 1):
                p, q = (i + di) % n, (j + dj) % n
                if (min(p, q), max(p, q)) in close:
                    retrace = True
        if not retrace:
            events.append((float(i), float(j), (float(v[i, 0]), float(v[i, 1]))))
    return events


def _cusps(v, cusp_angle):
    u = v - np.roll(v, 1, axis=0)
    w = np.roll(v, -1, axis=0) - v
    nu = np.hypot(u[:, 0], u[:, 1])
    nw = np.hypot(w[:, 0], w[:, 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.einsum("ij,ij->i", u, w) / (nu * nw)
    hit = np.nonzero((nu > 0) & (nw > 0) & (cos < math.cos(math.radians(cusp_angle))))[0]
    return [(int(k), (float(v[k, 0]), float(v[k, 1]))) for k in hit]


def _double_points(v, tol):
    touches = _touches(v, tol)
    crossings = _crossings(v, tol)
    # canonical order: touches first, then by location; independent of the
    # starting sample so the decomposition is too
    events = [(0,) + e for e in touches] + [(1,) + e for e in crossings]
    events.sort(key=lambda e: (e[0], round(e[3][0] / tol), round(e[3][1] / tol)))
    return events


def _dedup(points, tol):
    out = []
    for p in points:
        if all(math.hypot(p[0] - q[0], p[1] - q[1]) > tol for q in out):
            out.append(p)
    return out


def _pinches(v, tol, events, cusp_angle):
    located = [(min(e[1], e[2]), e[3]) for e in events]
    located += [(float(k), xy) for k, xy in _cusps(v, cusp_angle)]
    located.sort()
    return _dedup([xy for _, xy in located], tol)


def self_intersections(loop, rel_tol=1e-9, cusp_angle=DEFAULT_CUSP_ANGLE):
    """Pinch points of a closed loop as a list of (x, y), in curve order.

    Points closer than ``rel_tol`` times the bounding-box diagonal are
    merged.
    """
    v = _vertices(loop)
    if len(v) < 3:
        return []
    tol = _scale_tol(v, rel_tol)
    return _pinches(v, tol, _double_points(v, tol), cusp_angle)


def _augment(v, events):
    """Insert crossing points as vertices; return coords and event index pairs."""
    inserts = {}
    for e_id, (_, pa, pb, xy) in enumerate(events):
        for slot, pos in enumerate((pa, pb)):
            edge = int(math.floor(pos + 1e-12))
            frac = pos - edge
            inserts.setdefault(edge % len(v), []).append((max(frac, 0.0), e_id, slot, xy))
    coords, ids = [], [[None, None] for _ in events]
    for k in range(len(v)):
        for frac, e_id, slot, xy in sorted(inserts.get(k, []), key=lambda x: x[0]):
            if frac <= 1e-12:
                ids[e_id][slot] = len(coords)  # the vertex itself, appended next
        coords.append(v[k])
        for frac, e_id, slot, xy in sorted(inserts.get(k, []), key=lambda x: x[0]):
            if frac > 1e-12:
                ids[e_id][slot] = len(coords)
                coords.append(np.array(xy))
    return np.array(coords), ids


def _split(v, events):
    """Cut at each double point whose two passes still share a sub-loop."""
    coords, ids = _augment(v, events)
    loops = {0: list(range(len(coords)))}
    owner = {k: 0 for k in loops[0]}
    next_id = 1
    for a, b in ids:
        la, lb = owner[a], owner[b]
        if la != lb:
            continue   # the two passes now belong to different lobes
        seq = loops.pop(la)
        pos = {k: i for i, k in enumerate(seq)}
        ka, kb = sorted((pos[a], pos[b]))
        for part in (seq[ka:kb], seq[kb:] + seq[:ka]):
            loops[next_id] = part
            for k in part:
                owner[k] = next_id
            next_id += 1
    return [coords[seq] for _, seq in sorted(loops.items())]


def _shoelace(p):
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _perimeter(p):
    d = np.roll(p, -1, axis=0) - p
    return float(np.sum(np.hypot(d[:, 0], d[:, 1])))


def _analyse(loop, rel_tol, cusp_angle):
    v = _vertices(loop)
    if len(v) < 3:
        return v, [v], []
    tol = _scale_tol(v, rel_tol)
    events = _double_points(v, tol)
    if len(events) > MAX_DOUBLE_POINTS:
        raise ValueError(f"{len(events)} self-intersections; loop is probably under-sampled")
    return v, _split(v, events), _pinches(v, tol, events, cusp_angle)


def decompose_lobes(loop, rel_tol=1e-9):
    """Cut the loop at its double points into closed sub-loops (vertex arrays).

    Each sub-loop is free of self-crossings; the sub-loops together use every
    edge of the original curve exactly once.  More than 16 double points is
    taken as a sign of under-sampling and rejected.
    """
    return _analyse(loop, rel_tol, DEFAULT_CUSP_ANGLE)[1]


def form_factor(loop, rel_tol=1e-9, cusp_angle=DEFAULT_CUSP_ANGLE):
    v, parts, pinches = _analyse(loop, rel_tol, cusp_angle)
    perimeter = _perimeter(v)
    if perimeter <= 0:
        raise ValueError("loop has zero perimeter")
    lobes = []
    for part in parts:
        signed = _shoelace(part) if len(part) >= 3 else 0.0
        lobes.append(Lobe(abs(signed), _perimeter(part), int(np.sign(signed))))
    area = sum(lobe.area for lobe in lobes)
    return FormFactorReport(
        area=area, perimeter=perimeter, form_factor=4 * math.pi * area / perimeter**2,
        lobes=lobes, pinch_points=pinches,
        notes={"area": "sum of |lobe areas| over the full loop"})


def loop_from_trace(trace, x, y, period=None, closure_tol=1e-9, periodic=False, smooth=False):
    """Closed loop of columns ``x`` vs ``y`` over the last drive period."""
    t = trace.column("t")
    period = period if period is not None else trace.info.get("T_osc", 1.0)
    if periodic:
        sel = t > t[-1] - period + 1e-9 * period
    else:
        sel = t >= t[-1] - period - 1e-9 * period
    pts = np.column_stack([trace.column(x)[sel], trace.column(y)[sel]])
    return close_loop(pts, closure_tol=closure_tol, periodic=periodic, smooth=smooth)


def _grid_point(args):
    generator, value = args
    return form_factor(generator(value))


def sweep_reports(trace_generator, T_int_grid, max_workers=None):
    """[(T_int, FormFactorReport)] in grid order.

    With ``max_workers`` > 1 the grid is evaluated in worker processes (the
    generator must then be picklable).
    """
    grid = [float(g) for g in T_int_grid]
    if any(g <= 0 for g in grid):
        raise ValueError("T_int grid values must be positive")
    jobs = [(trace_generator, g) for g in grid]
    if max_workers and max_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            reports = list(pool.map(_grid_point, jobs))
    else:
        reports = [_grid_point(job) for job in jobs]
    return list(zip(grid, reports))


def sweep_form_factor(trace_generator, T_int_grid, max_workers=None):
    """[(T_int, F)] for each grid value; ``trace_generator(T_int)`` returns a loop."""
    return [(g, r.form_factor) for g, r in sweep_reports(trace_generator, T_int_grid, max_workers)]
