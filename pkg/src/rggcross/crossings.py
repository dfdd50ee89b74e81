"""Enumeration of the crossing point process: every unordered pair of
vertex-disjoint edges whose projections onto the plane intersect, together
with the intersection location.

The accelerated path keys each edge by the grid cell (side delta) of its
lexicographically smaller projected endpoint and scans a 5x5 stencil: a
projected edge has length at most delta, and two crossing edges have all
endpoints within 2*delta of the crossing, so candidate pairs always share a
stencil.  Orientation signs are floating-filtered with an exact fallback, so
the event set is independent of the candidate generation strategy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._grid import grid_cells, grid_strides, half_stencil, pairs_cross_cell, \
    pairs_same_cell
from .geometry import ORIENT_ERRBOUND, ProjectionPlane, project_points, \
    segments_intersect
from .sampling import Graph

__all__ = ["CrossingEvent", "enumerate_crossings",
           "enumerate_crossings_bruteforce", "count_in_region",
           "crossing_pairs_and_locations"]


@dataclass(frozen=True)
class CrossingEvent:
    """One crossing: two vertex-disjoint edges (canonical order) and the
    intersection point of their projections."""

    edge_a: tuple[int, int]
    edge_b: tuple[int, int]
    location: tuple[float, float]

    def sort_key(self):
        return (self.edge_a, self.edge_b)


def _orient_batch(ax, ay, bx, by, cx, cy):
    """Vectorized orientation determinant plus a reliability mask: where the
    mask is True the floating sign (including exact zero) is trustworthy."""
    detl = (ax - cx) * (by - cy)
    detr = (ay - cy) * (bx - cx)
    det = detl - detr
    detsum = np.abs(detl) + np.abs(detr)
    reliable = np.abs(det) >= ORIENT_ERRBOUND * detsum
    return det, reliable


def _eval_candidates(P, edges, ci, cj, chunk=400_000):
    """Evaluate candidate edge-index pairs (each with ci < cj): returns the
    crossing pairs and intersection locations as arrays.

    A closed bounding-box overlap prefilter runs first; box overlap is
    necessary for closed segments to intersect, so the rejection is exact.
    """
    # per-edge projected bounding boxes, computed once
    ax_all = P[edges[:, 0], 0]
    ay_all = P[edges[:, 0], 1]
    bx_all = P[edges[:, 1], 0]
    by_all = P[edges[:, 1], 1]
    xlo = np.minimum(ax_all, bx_all)
    xhi = np.maximum(ax_all, bx_all)
    ylo = np.minimum(ay_all, by_all)
    yhi = np.maximum(ay_all, by_all)

    out_i = []
    out_j = []
    out_x = []
    out_y = []
    for s in range(0, len(ci), chunk):
        ei = ci[s:s + chunk]
        ej = cj[s:s + chunk]
        keep = ((xlo[ei] <= xhi[ej]) & (xlo[ej] <= xhi[ei])
                & (ylo[ei] <= yhi[ej]) & (ylo[ej] <= yhi[ei]))
        ei = ei[keep]
        ej = ej[keep]
        if not len(ei):
            continue
        e1 = edges[ei]
        e2 = edges[ej]
        disjoint = ((e1[:, 0] != e2[:, 0]) & (e1[:, 0] != e2[:, 1])
                    & (e1[:, 1] != e2[:, 0]) & (e1[:, 1] != e2[:, 1]))
        ei = ei[disjoint]
        ej = ej[disjoint]
        if not len(ei):
            continue
        a = P[edges[ei, 0]]
        b = P[edges[ei, 1]]
        c = P[edges[ej, 0]]
        d = P[edges[ej, 1]]
        d1, r1 = _orient_batch(a[:, 0], a[:, 1], b[:, 0], b[:, 1], c[:, 0], c[:, 1])
        d2, r2 = _orient_batch(a[:, 0], a[:, 1], b[:, 0], b[:, 1], d[:, 0], d[:, 1])
        d3, r3 = _orient_batch(c[:, 0], c[:, 1], d[:, 0], d[:, 1], a[:, 0], a[:, 1])
        d4, r4 = _orient_batch(c[:, 0], c[:, 1], d[:, 0], d[:, 1], b[:, 0], b[:, 1])
        reliable = r1 & r2 & r3 & r4
        p12 = d1 * d2
        p34 = d3 * d4
        certain_yes = reliable & (p12 < 0) & (p34 < 0)
        certain_no = reliable & ((p12 > 0) | (p34 > 0))
        k = np.nonzero(certain_yes)[0]
        if len(k):
            t = d3[k] / (d3[k] - d4[k])
            out_i.append(ei[k])
            out_j.append(ej[k])
            out_x.append(a[k, 0] + t * (b[k, 0] - a[k, 0]))
            out_y.append(a[k, 1] + t * (b[k, 1] - a[k, 1]))
        undecided = np.nonzero(~(certain_yes | certain_no))[0]
        if len(undecided):
            ui = []
            ux = []
            uy = []
            for idx in undecided:
                pt = segments_intersect(
                    (a[idx, 0], a[idx, 1]), (b[idx, 0], b[idx, 1]),
                    (c[idx, 0], c[idx, 1]), (d[idx, 0], d[idx, 1]))
                if pt is not None:
                    ui.append(idx)
                    ux.append(pt[0])
                    uy.append(pt[1])
            if ui:
                ui = np.array(ui)
                out_i.append(ei[ui])
                out_j.append(ej[ui])
                out_x.append(np.array(ux))
                out_y.append(np.array(uy))
    if not out_i:
        return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
                np.empty(0), np.empty(0))
    return (np.concatenate(out_i), np.concatenate(out_j),
            np.concatenate(out_x), np.concatenate(out_y))


def _grid_candidates(P, edges, delta):
    """Candidate edge-index pairs (lo < hi) from the 2-D edge-key grid."""
    pa = P[edges[:, 0]]
    pb = P[edges[:, 1]]
    swap = (pb[:, 0] < pa[:, 0]) | ((pb[:, 0] == pa[:, 0]) & (pb[:, 1] < pa[:, 1]))
    keys = np.where(swap[:, None], pb, pa)
    cells, _, shape = grid_cells(keys, delta)
    flat = cells @ grid_strides(shape)
    order = np.argsort(flat, kind="stable")
    flat_sorted = flat[order]
    cells_sorted = cells[order]
    uniq, starts, counts = np.unique(flat_sorted, return_index=True,
                                     return_counts=True)
    i1, j1 = pairs_same_cell(counts, starts)
    i2, j2 = pairs_cross_cell(cells_sorted, shape, half_stencil(2, 2),
                              starts, counts, uniq)
    ci = order[np.concatenate([i1, i2])]
    cj = order[np.concatenate([j1, j2])]
    return np.minimum(ci, cj), np.maximum(ci, cj)


def crossing_pairs_and_locations(graph: Graph, plane: ProjectionPlane):
    """Fast path: ((k,) first-edge indices, (k,) second-edge indices,
    (k, 2) locations), unsorted.  Same multiset as enumerate_crossings."""
    edges = graph.edges
    if len(edges) < 2:
        return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
                np.empty((0, 2)))
    P = project_points(graph.vertices, plane)
    lo, hi = _grid_candidates(P, edges, graph.delta)
    ei, ej, x, y = _eval_candidates(P, edges, lo, hi)
    return ei, ej, np.column_stack([x, y])


def _finalize(ei, ej, x, y, edges) -> list[CrossingEvent]:
    events = []
    for n in range(len(ei)):
        ea = (int(edges[ei[n], 0]), int(edges[ei[n], 1]))
        eb = (int(edges[ej[n], 0]), int(edges[ej[n], 1]))
        if eb < ea:
            ea, eb = eb, ea
        events.append(CrossingEvent(ea, eb, (float(x[n]), float(y[n]))))
    events.sort(key=CrossingEvent.sort_key)
    return events


def enumerate_crossings(graph: Graph, plane: ProjectionPlane) -> list[CrossingEvent]:
    """All crossings of the projected graph, each unordered pair of
    vertex-disjoint edges reported exactly once, in canonical order."""
    edges = graph.edges
    if len(edges) < 2:
        return []
    P = project_points(graph.vertices, plane)
    lo, hi = _grid_candidates(P, edges, graph.delta)
    ei, ej, x, y = _eval_candidates(P, edges, lo, hi)
    return _finalize(ei, ej, x, y, edges)


def enumerate_crossings_bruteforce(graph: Graph,
                                   plane: ProjectionPlane) -> list[CrossingEvent]:
    """O(m^2) scan over all edge pairs; enumeration oracle with the same
    output contract as the accelerated path."""
    edges = graph.edges
    m = len(edges)
    if m < 2:
        return []
    P = project_points(graph.vertices, plane)
    ci, cj = np.triu_indices(m, k=1)
    ei, ej, x, y = _eval_candidates(P, edges, ci.astype(np.int64),
                                    cj.astype(np.int64))
    return _finalize(ei, ej, x, y, edges)


def count_in_region(events: list[CrossingEvent], region) -> int:
    """Number of events whose location lies in the closed region."""
    if not events:
        return 0
    locs = np.array([e.location for e in events])
    return int(np.count_nonzero(region.contains(locs)))


def event_locations(events: list[CrossingEvent]) -> np.ndarray:
    """(k, 2) array of event locations (empty-safe)."""
    if not events:
        return np.empty((0, 2))
    return np.array([e.location for e in events])
