"""Stress of a spatial point configuration against its planar projection:
the weighted sum over unordered vertex pairs of the squared gap between the
ambient distance d0 and the projected distance d1.

With the natural inverse-square weight w = 1/d0^2 each pair contributes
(1 - d1/d0)^2, which lies in [0, 1] because orthogonal projection is
1-Lipschitz.  Every pair contributes (there is no connection radius), so the
total is an all-pairs computation, blocked for cache locality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import ProjectionPlane

__all__ = ["StressWeight", "pair_stress", "stress_total", "stress_terms"]


@dataclass(frozen=True)
class StressWeight:
    """Pair weight: 'inverse_sq' (w = 1/d0^2, bound 1), 'unit' (w = 1), or
    'custom' (callable of the ambient distance array, with declared bound)."""

    kind: str = "inverse_sq"
    bound: float = 1.0
    func: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.kind not in ("inverse_sq", "unit", "custom"):
            raise ValueError(f"unknown stress weight {self.kind!r}")
        if self.kind == "custom" and self.func is None:
            raise ValueError("custom weight needs a callable")
        if self.bound <= 0:
            raise ValueError("stress bound must be > 0")

    def evaluate(self, d0: np.ndarray, d1: np.ndarray) -> np.ndarray:
        """Per-pair stress values given distance arrays (d1 <= d0)."""
        if self.kind == "inverse_sq":
            with np.errstate(invalid="ignore", divide="ignore"):
                ratio = np.where(d0 > 0, d1 / d0, 1.0)
            ratio = np.minimum(ratio, 1.0)
            return (1.0 - ratio) ** 2
        gap = (d0 - d1) ** 2
        if self.kind == "unit":
            return gap
        return self.func(d0) * gap


def _axis_split(basis: np.ndarray):
    """(plane axes, complement axes) when the basis is two positive
    coordinate axes, else None."""
    axes = []
    for row in basis:
        nz = np.nonzero(row)[0]
        if len(nz) != 1 or abs(row[nz[0]] - 1.0) > 1e-15:
            return None
        axes.append(int(nz[0]))
    if axes[0] == axes[1]:
        return None
    rest = [k for k in range(basis.shape[1]) if k not in axes]
    return axes, rest


def _distances(diff: np.ndarray, basis: np.ndarray):
    """d1 and d0 for displacement rows; d0 is accumulated as d1^2 plus the
    orthogonal part so that d1 <= d0 holds exactly in floating point."""
    split = _axis_split(basis)
    if split is not None:
        axes, rest = split
        d1sq = diff[:, axes[0]] ** 2 + diff[:, axes[1]] ** 2
        orthsq = np.zeros_like(d1sq)
        for k in rest:
            orthsq += diff[:, k] ** 2
    else:
        proj = diff @ basis.T
        d1sq = np.einsum("ij,ij->i", proj, proj)
        orth = diff - proj @ basis
        orthsq = np.einsum("ij,ij->i", orth, orth)
    d0 = np.sqrt(d1sq + orthsq)
    d1 = np.sqrt(d1sq)
    return d0, d1


def pair_stress(v1, v2, plane: ProjectionPlane,
                wspec: StressWeight = StressWeight()) -> float:
    """Stress of one vertex pair."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if np.array_equal(v1, v2):
        raise ValueError("pair stress undefined for identical points")
    d0, d1 = _distances((v1 - v2)[None, :], plane.basis)
    if d1[0] > d0[0]:
        raise AssertionError("projection produced d1 > d0")
    return float(wspec.evaluate(d0, d1)[0])


def stress_terms(points: np.ndarray, plane: ProjectionPlane,
                 wspec: StressWeight, block: int = 256) -> float:
    """Sum of pair stress over unordered pairs via blocked row sweeps."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n < 2:
        return 0.0
    basis = plane.basis
    block_sums = []
    for s in range(0, n, block):
        blk = points[s:s + block]
        rest = points[s:]            # pairs (i, j) with j >= i only
        diff = (blk[:, None, :] - rest[None, :, :]).reshape(-1, points.shape[1])
        d0, d1 = _distances(diff, basis)
        bad = d1 > d0
        if bad.any():
            raise AssertionError("projection produced d1 > d0")
        vals = wspec.evaluate(d0, d1)
        # strike the diagonal and the j < i half of this block's stripe
        k = len(blk)
        m = len(rest)
        vals = vals.reshape(k, m)
        mask = np.arange(m)[None, :] > np.arange(k)[:, None]
        block_sums.append(float(np.sum(vals, where=mask)))
    return float(np.sum(block_sums))


def stress_total(points: np.ndarray, plane: ProjectionPlane,
                 wspec: StressWeight = StressWeight()) -> float:
    """Total stress: sum over unordered vertex pairs (equivalently half the
    sum over ordered pairs)."""
    return stress_terms(points, plane, wspec)
