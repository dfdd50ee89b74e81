"""Poisson point process sampling in a window and grid-accelerated
construction of the random geometric graph (edges between all point pairs at
Euclidean distance <= delta).

Replications draw from counter-based streams: the generator for
(seed, stream) is bit-for-bit reproducible and independent across streams, so
replications can run in any order or in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._grid import (grid_cells, grid_strides, half_stencil, pairs_cross_cell,
                    pairs_same_cell)
from .geometry import Window

__all__ = [
    "RegimeSpec",
    "RngStream",
    "Graph",
    "delta_for",
    "sample_poisson_process",
    "build_rgg",
    "edges_bruteforce",
]


@dataclass(frozen=True)
class RegimeSpec:
    """Rule mapping intensity t to the connection radius delta_t.

    sparse:        t^2 * delta^(d+1) = c   (crossing count converges)
    thermodynamic: t   * delta^d     = c   (vertex degree converges)
    explicit:      delta fixed
    """

    kind: str
    dimension: int
    c: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.kind not in ("sparse", "thermodynamic", "explicit"):
            raise ValueError(f"unknown regime kind {self.kind!r}")
        if self.kind == "explicit":
            if self.delta is None or self.delta <= 0:
                raise ValueError("explicit regime needs delta > 0")
        else:
            if self.c is None or self.c <= 0:
                raise ValueError(f"{self.kind} regime needs c > 0")
        if self.dimension < 3:
            raise ValueError("dimension must be >= 3")

    @classmethod
    def sparse(cls, c: float, dimension: int) -> "RegimeSpec":
        return cls("sparse", dimension, c=c)

    @classmethod
    def thermodynamic(cls, c: float, dimension: int) -> "RegimeSpec":
        return cls("thermodynamic", dimension, c=c)

    @classmethod
    def explicit(cls, delta: float, dimension: int = 3) -> "RegimeSpec":
        return cls("explicit", dimension, delta=delta)

    def delta_for(self, t: float) -> float:
        return delta_for(self, t)


def delta_for(regime: RegimeSpec, t: float) -> float:
    """Exact algebraic inversion of the regime's defining relation."""
    if t <= 0:
        raise ValueError("intensity t must be > 0")
    d = regime.dimension
    if regime.kind == "sparse":
        return (regime.c / t ** 2) ** (1.0 / (d + 1))
    if regime.kind == "thermodynamic":
        return (regime.c / t) ** (1.0 / d)
    return float(regime.delta)


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream: (seed, stream) -> independent generator."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


def sample_poisson_process(window: Window, t: float, rng) -> np.ndarray:
    """Homogeneous Poisson process of intensity t on the unit-volume window:
    N ~ Poisson(t) points, i.i.d. uniform (direct for the cube, rejection
    from the bounding cube for the ball)."""
    if t <= 0:
        raise ValueError("intensity t must be > 0")
    gen = _as_generator(rng)
    d = window.dimension
    n = int(gen.poisson(t))
    if window.kind == "cube":
        return gen.random((n, d))
    r = window.ball_radius
    accept = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) / 2.0 ** d
    out = np.empty((n, d))
    have = 0
    while have < n:
        m = max(64, int((n - have) / accept * 1.2))
        cand = gen.uniform(-r, r, size=(m, d))
        ok = np.einsum("ij,ij->i", cand, cand) <= r * r
        acc = cand[ok]
        take = min(len(acc), n - have)
        out[have:have + take] = acc[:take]
        have += take
    return out


@dataclass
class Graph:
    """Sampled vertex set with its delta-edges and the spatial grid used to
    build them (cell size exactly delta, 3^d neighbor stencil)."""

    vertices: np.ndarray          # (n, d)
    edges: np.ndarray             # (m, 2), each row i < j, rows sorted
    delta: float
    grid_origin: np.ndarray = field(default=None, repr=False)
    grid_shape: tuple = field(default=None, repr=False)
    cell_index: np.ndarray = field(default=None, repr=False)  # (n,) flat ids

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def build_rgg(points: np.ndarray, delta: float) -> Graph:
    """Grid-accelerated fixed-radius graph: candidate pairs from same and
    adjacent cells, exact distance filter.  The edge set equals the
    brute-force all-pairs scan."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        if points.size == 0:
            points = points.reshape(0, 3)
        else:
            raise ValueError("points must be an (n, d) array")
    n, d = points.shape
    if n == 0:
        return Graph(points, np.empty((0, 2), dtype=np.int64), delta,
                     np.zeros(d), (1,) * d, np.empty(0, dtype=np.int64))
    cells, origin, shape = grid_cells(points, delta)
    flat = cells @ grid_strides(shape)
    order = np.argsort(flat, kind="stable")
    flat_sorted = flat[order]
    cells_sorted = cells[order]
    pts_sorted = points[order]
    uniq, starts, counts = np.unique(flat_sorted, return_index=True,
                                     return_counts=True)

    i1, j1 = pairs_same_cell(counts, starts)
    i2, j2 = pairs_cross_cell(cells_sorted, shape, half_stencil(d, 1),
                              starts, counts, uniq)
    ci = np.concatenate([i1, i2])
    cj = np.concatenate([j1, j2])
    if len(ci):
        diff = pts_sorted[ci] - pts_sorted[cj]
        ok = np.einsum("ij,ij->i", diff, diff) <= delta * delta
        ci = ci[ok]
        cj = cj[ok]
    a = order[ci]
    b = order[cj]
    edges = np.column_stack([np.minimum(a, b), np.maximum(a, b)]).astype(np.int64)
    if len(edges):
        edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    return Graph(points, edges, delta, origin, shape, flat)


def edges_bruteforce(points: np.ndarray, delta: float) -> np.ndarray:
    """O(n^2) blocked pair scan; reference for the grid construction."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    rows = []
    block = 1024
    for s in range(0, n, block):
        blk = points[s:s + block]
        diff = blk[:, None, :] - points[None, :, :]
        d2 = np.einsum("abk,abk->ab", diff, diff)
        ii, jj = np.nonzero(d2 <= delta * delta)
        ii = ii + s
        keep = ii < jj
        if keep.any():
            rows.append(np.column_stack([ii[keep], jj[keep]]))
    if not rows:
        return np.empty((0, 2), dtype=np.int64)
    edges = np.concatenate(rows).astype(np.int64)
    return edges[np.lexsort((edges[:, 1], edges[:, 0]))]
