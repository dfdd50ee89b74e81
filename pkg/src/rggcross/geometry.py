"""Deterministic geometric substrate: observation windows, planar projection,
fiber (slice) measures, inner parallel sets, and exact 2-D segment intersection.

Windows are unit-volume convex bodies in R^d (d >= 3): the cube [0,1]^d or the
centered ball of radius kappa_d^(-1/d).  The projection plane L is spanned by
two orthonormal vectors; for the cube it must be a pair of coordinate axes so
that slice measures stay in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "ConfigurationError",
    "Window",
    "ProjectionPlane",
    "Rectangle",
    "Disk",
    "FullPlane",
    "project",
    "project_points",
    "orient2d",
    "segments_intersect",
    "fiber_measure",
    "fiber_measure_points",
    "fiber_integral",
    "fiber_sq_integral",
    "inner_parallel_contains",
]


class ConfigurationError(ValueError):
    """Unsupported window / plane combination or invalid configuration."""


def _ball_volume(n: int) -> float:
    # volume of the n-dimensional unit ball, pi^(n/2) / Gamma(n/2 + 1)
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


# ---------------------------------------------------------------------------
# windows and planes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Unit-volume convex observation window: 'cube' ([0,1]^d) or 'ball'
    (centered at the origin, radius chosen so the volume is one)."""

    kind: str
    dimension: int

    def __post_init__(self):
        if self.kind not in ("cube", "ball"):
            raise ConfigurationError(f"unknown window kind {self.kind!r}")
        if self.dimension < 3:
            raise ConfigurationError("window dimension must be >= 3")

    @property
    def ball_radius(self) -> float:
        """Radius of the unit-volume ball, kappa_d^(-1/d)."""
        if self.kind != "ball":
            raise ConfigurationError("ball_radius only defined for ball windows")
        return _ball_volume(self.dimension) ** (-1.0 / self.dimension)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned box (lo, hi) containing the window."""
        d = self.dimension
        if self.kind == "cube":
            return np.zeros(d), np.ones(d)
        r = self.ball_radius
        return np.full(d, -r), np.full(d, r)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean membership for an (n, d) array of points (closed window)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "cube":
            return np.all((pts >= 0.0) & (pts <= 1.0), axis=1)
        r = self.ball_radius
        return np.einsum("ij,ij->i", pts, pts) <= r * r


@dataclass(frozen=True)
class ProjectionPlane:
    """Two-dimensional projection plane given by an orthonormal basis (2, d)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != 2:
            raise ConfigurationError("plane basis must have shape (2, d)")
        gram = b @ b.T
        if not np.allclose(gram, np.eye(2), atol=1e-12):
            raise ConfigurationError("plane basis must be orthonormal (tol 1e-12)")
        object.__setattr__(self, "basis", b)

    @classmethod
    def default(cls, dimension: int) -> "ProjectionPlane":
        """Plane spanned by the first two coordinate axes."""
        b = np.zeros((2, dimension))
        b[0, 0] = 1.0
        b[1, 1] = 1.0
        return cls(b)

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    @property
    def axis_indices(self) -> tuple[int, int] | None:
        """If both basis vectors are positive coordinate axes, their indices."""
        idx = []
        for row in self.basis:
            nz = np.nonzero(row)[0]
            if len(nz) != 1 or abs(row[nz[0]] - 1.0) > 1e-15:
                return None
            idx.append(int(nz[0]))
        if idx[0] == idx[1]:
            return None
        return idx[0], idx[1]


def project(p, plane: ProjectionPlane) -> tuple[float, float]:
    """Orthogonal projection of one point onto the plane (coordinates in the
    plane basis)."""
    p = np.asarray(p, dtype=float)
    out = plane.basis @ p
    return float(out[0]), float(out[1])


def project_points(points: np.ndarray, plane: ProjectionPlane) -> np.ndarray:
    """Project an (n, d) array to (n, 2) plane coordinates."""
    return np.asarray(points, dtype=float) @ plane.basis.T


# ---------------------------------------------------------------------------
# planar regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rectangle:
    """Closed axis-aligned rectangle [lo, hi] in the plane."""

    lo: tuple[float, float]
    hi: tuple[float, float]

    def __post_init__(self):
        if not (self.lo[0] <= self.hi[0] and self.lo[1] <= self.hi[1]):
            raise ValueError("rectangle needs lo <= hi componentwise")

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return (
            (pts[:, 0] >= self.lo[0]) & (pts[:, 0] <= self.hi[0])
            & (pts[:, 1] >= self.lo[1]) & (pts[:, 1] <= self.hi[1])
        )

    def bbox(self):
        return (self.lo[0], self.lo[1], self.hi[0], self.hi[1])


@dataclass(frozen=True)
class Disk:
    """Closed disk in the plane."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("disk radius must be >= 0")

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        dx = pts[:, 0] - self.center[0]
        dy = pts[:, 1] - self.center[1]
        return dx * dx + dy * dy <= self.radius * self.radius

    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)


@dataclass(frozen=True)
class FullPlane:
    """The whole plane (integrals truncate to the window's projected box)."""

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.ones(len(pts), dtype=bool)

    def bbox(self):
        return None


Region2 = Rectangle | Disk | FullPlane


# ---------------------------------------------------------------------------
# exact 2-D orientation and segment intersection
# ---------------------------------------------------------------------------

# First-stage filter bound for the orientation determinant (two products of
# differences); below it the floating sign may be wrong and we fall back to
# rational arithmetic.
_EPS = 2.0 ** -53
ORIENT_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS


def _orient2d_exact(ax, ay, bx, by, cx, cy) -> int:
    acx = Fraction(ax) - Fraction(cx)
    acy = Fraction(ay) - Fraction(cy)
    bcx = Fraction(bx) - Fraction(cx)
    bcy = Fraction(by) - Fraction(cy)
    det = acx * bcy - acy * bcx
    if det > 0:
        return 1
    if det < 0:
        return -1
    return 0


def orient2d(a, b, c) -> int:
    """Exact sign of the orientation of (a, b, c): +1 counterclockwise,
    -1 clockwise, 0 collinear.  Floating filter with rational fallback."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    if detleft > 0.0:
        if detright <= 0.0:
            return 1 if det > 0 else (-1 if det < 0 else 0)
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return 1 if det > 0 else (-1 if det < 0 else 0)
        detsum = -detleft - detright
    else:
        return 1 if det > 0 else (-1 if det < 0 else 0)
    if abs(det) >= ORIENT_ERRBOUND * detsum:
        return 1 if det > 0 else -1
    return _orient2d_exact(ax, ay, bx, by, cx, cy)


def _between_collinear(a, b, q) -> bool:
    # q known collinear with [a, b]; closed-interval test on both axes
    return (min(a[0], b[0]) <= q[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= q[1] <= max(a[1], b[1]))


def _collinear_overlap_midpoint(a1, a2, b1, b2):
    # all four points collinear: midpoint of the closed overlap, if any
    axis = 0 if abs(a1[0] - a2[0]) >= abs(a1[1] - a2[1]) else 1
    pts = sorted([a1, a2], key=lambda p: p[axis])
    qts = sorted([b1, b2], key=lambda p: p[axis])
    lo = max(pts[0][axis], qts[0][axis])
    hi = min(pts[1][axis], qts[1][axis])
    if lo > hi:
        return None
    # recover the second coordinate by linear interpolation along [a1, a2]
    def at(t_axis):
        if pts[1][axis] == pts[0][axis]:
            return pts[0]
        s = (t_axis - pts[0][axis]) / (pts[1][axis] - pts[0][axis])
        other = pts[0][1 - axis] + s * (pts[1][1 - axis] - pts[0][1 - axis])
        return (t_axis, other) if axis == 0 else (other, t_axis)
    plo = at(lo)
    phi = at(hi)
    return (0.5 * (plo[0] + phi[0]), 0.5 * (plo[1] + phi[1]))


def segments_intersect(a1, a2, b1, b2):
    """Intersection point of the closed segments [a1,a2] and [b1,b2], or None.

    The yes/no decision uses exact orientation signs, so it is correct for
    every representable input; for a transversal crossing the returned point
    is the unique intersection, computed in floating point.  Endpoint touching
    counts; a collinear overlap returns the midpoint of the overlap interval.
    """
    a_degenerate = a1[0] == a2[0] and a1[1] == a2[1]
    b_degenerate = b1[0] == b2[0] and b1[1] == b2[1]
    if a_degenerate and b_degenerate:
        if a1[0] == b1[0] and a1[1] == b1[1]:
            return (float(a1[0]), float(a1[1]))
        return None
    if a_degenerate:
        if orient2d(b1, b2, a1) == 0 and _between_collinear(b1, b2, a1):
            return (float(a1[0]), float(a1[1]))
        return None
    if b_degenerate:
        if orient2d(a1, a2, b1) == 0 and _between_collinear(a1, a2, b1):
            return (float(b1[0]), float(b1[1]))
        return None
    o1 = orient2d(a1, a2, b1)
    o2 = orient2d(a1, a2, b2)
    o3 = orient2d(b1, b2, a1)
    o4 = orient2d(b1, b2, a2)

    if o1 == 0 and o2 == 0:
        return _collinear_overlap_midpoint(a1, a2, b1, b2)
    if o1 == 0 and _between_collinear(a1, a2, b1):
        return (float(b1[0]), float(b1[1]))
    if o2 == 0 and _between_collinear(a1, a2, b2):
        return (float(b2[0]), float(b2[1]))
    if o3 == 0 and _between_collinear(b1, b2, a1):
        return (float(a1[0]), float(a1[1]))
    if o4 == 0 and _between_collinear(b1, b2, a2):
        return (float(a2[0]), float(a2[1]))
    if o1 * o2 < 0 and o3 * o4 < 0:
        rx = a2[0] - a1[0]
        ry = a2[1] - a1[1]
        sx = b2[0] - b1[0]
        sy = b2[1] - b1[1]
        denom = rx * sy - ry * sx
        if denom == 0.0:
            # near-parallel transversal crossing whose float denominator
            # underflowed; redo the division exactly
            frx = Fraction(a2[0]) - Fraction(a1[0])
            fry = Fraction(a2[1]) - Fraction(a1[1])
            fsx = Fraction(b2[0]) - Fraction(b1[0])
            fsy = Fraction(b2[1]) - Fraction(b1[1])
            fden = frx * fsy - fry * fsx
            ft = ((Fraction(b1[0]) - Fraction(a1[0])) * fsy
                  - (Fraction(b1[1]) - Fraction(a1[1])) * fsx) / fden
            return (float(Fraction(a1[0]) + ft * frx),
                    float(Fraction(a1[1]) + ft * fry))
        t = ((b1[0] - a1[0]) * sy - (b1[1] - a1[1]) * sx) / denom
        return (a1[0] + t * rx, a1[1] + t * ry)
    return None


# ---------------------------------------------------------------------------
# fiber (slice) measures
# ---------------------------------------------------------------------------

def _require_supported(window: Window, plane: ProjectionPlane) -> None:
    if plane.dimension != window.dimension:
        raise ConfigurationError("plane and window dimensions differ")
    if window.kind == "cube" and plane.axis_indices is None:
        raise ConfigurationError(
            "cube window requires an axis-aligned projection plane"
        )


def fiber_measure_points(window: Window, plane: ProjectionPlane,
                         vs: np.ndarray) -> np.ndarray:
    """(d-2)-volume of the window slice over each plane point in vs (n, 2)."""
    _require_supported(window, plane)
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    if window.kind == "cube":
        inside = np.all((vs >= 0.0) & (vs <= 1.0), axis=1)
        return inside.astype(float)
    r = window.ball_radius
    rho2 = np.einsum("ij,ij->i", vs, vs)
    rem = r * r - rho2
    out = np.zeros(len(vs))
    m = rem >= 0.0
    k = window.dimension - 2
    out[m] = _ball_volume(k) * rem[m] ** (k / 2.0)
    return out


def fiber_measure(window: Window, plane: ProjectionPlane, v) -> float:
    """Scalar version of :func:`fiber_measure_points`."""
    return float(fiber_measure_points(window, plane, np.asarray(v))[0])


def _window_plane_bbox(window: Window, plane: ProjectionPlane):
    # bounding box of the projected window W|_L in plane coordinates
    if window.kind == "cube":
        return 0.0, 0.0, 1.0, 1.0
    r = window.ball_radius
    return -r, -r, r, r


def _fiber_power_integral(window, plane, region, resolution, power):
    _require_supported(window, plane)
    if resolution is None:
        resolution = 1024
    n = int(resolution)
    if n <= 0:
        raise ValueError("quadrature resolution must be positive")
    wx0, wy0, wx1, wy1 = _window_plane_bbox(window, plane)
    rb = region.bbox()
    if rb is not None:
        wx0 = max(wx0, rb[0])
        wy0 = max(wy0, rb[1])
        wx1 = min(wx1, rb[2])
        wy1 = min(wy1, rb[3])
    if wx0 >= wx1 or wy0 >= wy1:
        return 0.0
    xs = wx0 + (np.arange(n) + 0.5) * (wx1 - wx0) / n
    ys = wy0 + (np.arange(n) + 0.5) * (wy1 - wy0) / n
    cell = (wx1 - wx0) * (wy1 - wy0) / (n * n)
    total = 0.0
    # row blocks keep the (n x n) evaluation memory-bounded
    block = max(1, 2 ** 22 // n)
    for s in range(0, n, block):
        gx, gy = np.meshgrid(xs[s:s + block], ys, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        vals = fiber_measure_points(window, plane, pts)
        if not isinstance(region, FullPlane):
            vals = vals * region.contains(pts)
        if power != 1:
            vals = vals ** power
        total += float(vals.sum()) * cell
    return total


def fiber_sq_integral(window: Window, plane: ProjectionPlane,
                      region: Region2, resolution: int | None = None) -> float:
    """Midpoint-rule integral of fiber_measure^2 over the region (intersected
    with the projected window's bounding box); deterministic for a fixed
    resolution (default 1024 cells per axis)."""
    return _fiber_power_integral(window, plane, region, resolution, 2)


def fiber_integral(window: Window, plane: ProjectionPlane,
                   region: Region2, resolution: int | None = None) -> float:
    """Midpoint-rule integral of fiber_measure (normalizes to the window
    volume over the full plane)."""
    return _fiber_power_integral(window, plane, region, resolution, 1)


def inner_parallel_contains(window: Window, x, delta: float) -> bool:
    """True iff the closed delta-ball around x lies inside the window."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    x = np.asarray(x, dtype=float)
    if window.kind == "cube":
        return bool(np.all(x >= delta) and np.all(x <= 1.0 - delta))
    return float(np.linalg.norm(x)) <= window.ball_radius - delta
