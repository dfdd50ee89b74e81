"""Internal fixed-radius grid joins shared by the graph builder (d-dim) and
the projected-edge crossing search (2-D)."""

from __future__ import annotations

import numpy as np

__all__ = ["grid_cells", "half_stencil", "pairs_same_cell", "pairs_cross_cell",
           "grid_strides"]


def grid_cells(points: np.ndarray, delta: float):
    """Integer cell coordinates (cell size delta), grid origin and shape.

    The cell width carries a one-part-in-1e12 guard so index rounding can
    never place two points at distance <= delta more than one cell apart.
    """
    n, d = points.shape
    if n == 0:
        origin = np.zeros(d)
        return np.zeros((0, d), dtype=np.int64), origin, (1,) * d
    origin = points.min(axis=0)
    cells = np.floor((points - origin) / (delta * (1.0 + 1e-12))).astype(np.int64)
    shape = cells.max(axis=0) + 1
    return cells, origin, tuple(int(s) for s in shape)


def grid_strides(shape) -> np.ndarray:
    strides = np.ones(len(shape), dtype=np.int64)
    for k in range(len(shape) - 2, -1, -1):
        strides[k] = strides[k + 1] * shape[k + 1]
    return strides


def half_stencil(d: int, reach: int = 1) -> np.ndarray:
    """Lexicographically positive offsets covering a (2*reach+1)^d stencil."""
    grids = np.meshgrid(*([np.arange(-reach, reach + 1)] * d), indexing="ij")
    offs = np.stack([g.ravel() for g in grids], axis=1)
    keep = []
    for o in offs:
        nz = np.nonzero(o)[0]
        if len(nz) and o[nz[0]] > 0:
            keep.append(o)
    return np.array(keep, dtype=np.int64)


def pairs_same_cell(counts: np.ndarray, starts: np.ndarray):
    """All (i, j) index pairs, i < j, within runs of a sorted array.
    Runs are batched by length so the work is vectorized per distinct size."""
    m = counts[counts >= 2]
    s = starts[counts >= 2]
    if len(m) == 0:
        return (np.empty(0, dtype=np.int64),) * 2
    first = []
    second = []
    for size in np.unique(m):
        ii, jj = np.triu_indices(int(size), k=1)
        base = s[m == size]
        first.append((base[:, None] + ii[None, :]).ravel())
        second.append((base[:, None] + jj[None, :]).ravel())
    return np.concatenate(first), np.concatenate(second)


def pairs_cross_cell(cells_sorted, shape, offsets, starts, counts, uniq):
    """Candidate (i, j) pairs between each item and every item of its
    positive-offset neighbor cells (indices into the sorted order)."""
    strides = grid_strides(shape)
    shape_arr = np.asarray(shape)
    out_i = []
    out_j = []
    for off in offsets:
        nb_cells = cells_sorted + off
        valid = np.all((nb_cells >= 0) & (nb_cells < shape_arr), axis=1)
        if not valid.any():
            continue
        idx = np.nonzero(valid)[0]
        nb_flat = nb_cells[idx] @ strides
        pos = np.searchsorted(uniq, nb_flat)
        found = (pos < len(uniq)) & (uniq[np.minimum(pos, len(uniq) - 1)] == nb_flat)
        if not found.any():
            continue
        idx = idx[found]
        pos = pos[found]
        cnt = counts[pos]
        st = starts[pos]
        rep_i = np.repeat(idx, cnt)
        run = np.arange(int(cnt.sum()), dtype=np.int64) - np.repeat(
            np.cumsum(cnt) - cnt, cnt)
        rep_j = np.repeat(st, cnt) + run
        out_i.append(rep_i)
        out_j.append(rep_j)
    if not out_i:
        return (np.empty(0, dtype=np.int64),) * 2
    return np.concatenate(out_i), np.concatenate(out_j)
