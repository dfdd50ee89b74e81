"""Closed-form limit constants and moment formulas for the crossing process,
each with an independent Monte Carlo oracle so that no constant rests on a
single code path.

Notation used throughout: kappa_n is the volume of the n-dimensional unit
ball; B(a, b) the Euler beta function; d the ambient dimension (>= 3); the
plane L is two-dimensional; delta the connection radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import FullPlane, ProjectionPlane, Window, fiber_sq_integral
from .geometry import _require_supported
from .sampling import RngStream
from .stress import StressWeight, _distances

__all__ = [
    "LimitConstants",
    "CubeMoments",
    "unit_ball_volume",
    "c_d_closed",
    "c_d_montecarlo",
    "c_d_prime_closed",
    "c_d_prime_montecarlo",
    "limit_constants",
    "limit_intensity",
    "expected_crossings_leading",
    "cube_variance_crossings",
    "cube_pair_volume",
    "cube_moments",
    "intensity_sandwich",
    "stress_profile_S1",
    "cube_stress_integrals",
    "cube_covariance_cross_stress",
    "normalize_F",
]


def unit_ball_volume(n: int) -> float:
    """kappa_n = pi^(n/2) / Gamma(n/2 + 1)."""
    if n < 0:
        raise ValueError("dimension must be >= 0")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _beta(a: float, b: float) -> float:
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


@dataclass(frozen=True)
class LimitConstants:
    """Dimension-dependent constants entering the limit formulas."""

    d: int
    kappa: float          # kappa_{d-2}
    c_d: float
    c_d_prime: float


@dataclass(frozen=True)
class CubeMoments:
    """Leading moments for the cube window in the degree-convergent regime,
    plus the limiting covariance matrix of the normalized pair (F1, F2)."""

    t: float
    delta: float
    c: float
    exp_crossings: float
    var_crossings: float
    var_stress: float
    cov_cross_stress: float
    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.shape != (2, 2) or abs(s[0, 1] - s[1, 0]) > 1e-12:
            raise ValueError("sigma must be a symmetric 2x2 matrix")
        if s[0, 0] <= 0 or s[1, 1] <= 0 or np.linalg.det(s) < -1e-12:
            raise ValueError("sigma must be numerically positive semidefinite")
        object.__setattr__(self, "sigma", s)


def c_d_closed(d: int) -> float:
    """Crossing-kernel constant: the measure of (w1, w2, w3) in
    B_d x B_d x 2B_2 such that the projected segments [0, w1] and
    [w3, w3 + w2] intersect.

    Integrating over the offset w3 first leaves the area of the Minkowski
    parallelogram [0, w1|_L] + [-w2|_L, 0], namely |w1|_L x w2|_L| (always
    inside 2B_2), so the constant factors into radial moments of the
    projected radius R = |w|_L| of a uniform point in B_d and a mean |sin|
    of the angle between two isotropic directions:

        c_d = kappa_d^2 * E[R]^2 * (2/pi),
        E[R] = pi * kappa_{d-2} * B(3/2, d/2) / kappa_d,

    which simplifies to 2*pi * kappa_{d-2}^2 * B(3/2, d/2)^2.
    """
    if d < 3:
        raise ValueError("dimension must be >= 3")
    k = unit_ball_volume(d - 2)
    return 2.0 * math.pi * k * k * _beta(1.5, d / 2.0) ** 2


def c_d_prime_closed(d: int) -> float:
    """Shared-segment crossing constant: the measure of (x, y1, y2, z1, z2)
    in B_d x (2B_2)^2 x B_d^2 such that the projected segment [0, x] crosses
    both [y1, y1 + z1] and [y2, y2 + z2].

    Conditioning on x, each offset integral again gives the parallelogram
    area |x|_L x z|_L|, so

        c_d' = int_{B_d} (kappa_d * E[R] * (2/pi) * |x|_L|)^2 dx
             = 4*pi * kappa_{d-2}^3 * B(3/2, d/2)^2 * B(2, d/2),

    using E[R^2] = pi * kappa_{d-2} * B(2, d/2) / kappa_d.
    """
    if d < 3:
        raise ValueError("dimension must be >= 3")
    k = unit_ball_volume(d - 2)
    return (4.0 * math.pi * k ** 3 * _beta(1.5, d / 2.0) ** 2
            * _beta(2.0, d / 2.0))


def _sample_ball(gen: np.random.Generator, n: int, dim: int) -> np.ndarray:
    x = gen.standard_normal((n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x * (gen.random(n) ** (1.0 / dim))[:, None]


def _segments_cross_batch(ax, ay, bx, by, cx, cy, dx, dy):
    # plain floating transversality test; boundary cases have measure zero
    d1 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    d2 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    d3 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    d4 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    return (d1 * d2 <= 0) & (d3 * d4 <= 0)


def c_d_montecarlo(d: int, n_samples: int, rng: RngStream | int = 0,
                   chunk: int = 2_000_000) -> tuple[float, float]:
    """Monte Carlo oracle for c_d_closed: direct rejection estimate of the
    defining triple integral.  Returns (estimate, standard error)."""
    if n_samples < 1_000:
        raise ValueError("need at least 1e3 samples")
    gen = rng.generator() if isinstance(rng, RngStream) else \
        RngStream(int(rng)).generator()
    volume = 4.0 * math.pi * unit_ball_volume(d) ** 2
    hits = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        w1 = _sample_ball(gen, m, d)
        w2 = _sample_ball(gen, m, d)
        w3 = 2.0 * _sample_ball(gen, m, 2)
        zero = np.zeros(m)
        h = _segments_cross_batch(zero, zero, w1[:, 0], w1[:, 1],
                                  w3[:, 0], w3[:, 1],
                                  w3[:, 0] + w2[:, 0], w3[:, 1] + w2[:, 1])
        hits += int(h.sum())
        done += m
    p = hits / n_samples
    est = volume * p
    se = volume * math.sqrt(max(p * (1.0 - p), 1e-300) / n_samples)
    return est, se


def c_d_prime_montecarlo(d: int, n_samples: int, rng: RngStream | int = 0,
                         chunk: int = 1_000_000) -> tuple[float, float]:
    """Monte Carlo oracle for c_d_prime_closed over (x, y1, y2, z1, z2)."""
    if n_samples < 1_000:
        raise ValueError("need at least 1e3 samples")
    gen = rng.generator() if isinstance(rng, RngStream) else \
        RngStream(int(rng)).generator()
    volume = (4.0 * math.pi) ** 2 * unit_ball_volume(d) ** 3
    hits = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x = _sample_ball(gen, m, d)
        z1 = _sample_ball(gen, m, d)
        z2 = _sample_ball(gen, m, d)
        y1 = 2.0 * _sample_ball(gen, m, 2)
        y2 = 2.0 * _sample_ball(gen, m, 2)
        zero = np.zeros(m)
        h1 = _segments_cross_batch(zero, zero, x[:, 0], x[:, 1],
                                   y1[:, 0], y1[:, 1],
                                   y1[:, 0] + z1[:, 0], y1[:, 1] + z1[:, 1])
        h2 = _segments_cross_batch(zero, zero, x[:, 0], x[:, 1],
                                   y2[:, 0], y2[:, 1],
                                   y2[:, 0] + z2[:, 0], y2[:, 1] + z2[:, 1])
        hits += int((h1 & h2).sum())
        done += m
    p = hits / n_samples
    est = volume * p
    se = volume * math.sqrt(max(p * (1.0 - p), 1e-300) / n_samples)
    return est, se


def limit_constants(d: int) -> LimitConstants:
    return LimitConstants(d, unit_ball_volume(d - 2), c_d_closed(d),
                          c_d_prime_closed(d))


# ---------------------------------------------------------------------------
# intensity and cube moment formulas
# ---------------------------------------------------------------------------

def limit_intensity(window: Window, plane: ProjectionPlane, c: float,
                    region, resolution: int | None = None) -> float:
    """Limit intensity of the crossing process on the region when
    t^2 delta^(d+1) -> c:  (1/8) c_d c^2 * int_region fiber^2."""
    if c <= 0:
        raise ValueError("c must be > 0")
    d = window.dimension
    return c_d_closed(d) / 8.0 * c * c * fiber_sq_integral(
        window, plane, region, resolution)


def expected_crossings_leading(window: Window, plane: ProjectionPlane,
                               t: float, delta: float,
                               resolution: int | None = None) -> float:
    """Leading term of the expected total crossing count:
    (1/8) c_d t^4 delta^(2d+2) * int fiber^2 (relative error O(delta))."""
    if t < 0 or delta < 0:
        raise ValueError("t and delta must be >= 0")
    if delta == 0.0 or t == 0.0:
        return 0.0
    d = window.dimension
    return (c_d_closed(d) / 8.0 * t ** 4 * delta ** (2 * d + 2)
            * fiber_sq_integral(window, plane, FullPlane(), resolution))


def cube_variance_crossings(t: float, c: float, d: int = 3) -> float:
    """Leading variance of the total crossing count for the cube window in
    the degree-convergent regime (t delta^d = c):
    (1/8) c^4 t^3 delta^4 (2 c_d^2 + c_d' / c)."""
    if t <= 0 or c <= 0:
        raise ValueError("t and c must be > 0")
    delta = (c / t) ** (1.0 / d)
    cd = c_d_closed(d)
    cdp = c_d_prime_closed(d)
    return c ** 4 * t ** 3 * delta ** 4 / 8.0 * (2.0 * cd * cd + cdp / c)


def cube_pair_volume(delta: float, d: int = 3) -> float:
    """Exact value of the pair-proximity integral over the unit cube,
    int int 1{|x - y| <= delta} dx dy  (delta <= 1): expanding the product
    of per-axis tent densities gives
    delta^d * sum_k C(d,k) (-delta)^k pi^((d-k)/2) / Gamma((d+k)/2 + 1).

    The expected edge count of the graph at intensity t is t^2/2 times this.
    """
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    total = 0.0
    for k in range(d + 1):
        m_k = math.pi ** ((d - k) / 2.0) / math.gamma((d + k) / 2.0 + 1.0)
        total += math.comb(d, k) * (-delta) ** k * m_k
    return delta ** d * total


# ---------------------------------------------------------------------------
# stress profile and its cube integrals
# ---------------------------------------------------------------------------

def _qmc_points(window: Window, n_points: int) -> tuple[np.ndarray, float]:
    """Low-discrepancy points covering the window's bounding box, with the
    box volume (integration weight before the inside-window indicator)."""
    from scipy.stats import qmc
    d = window.dimension
    eng = qmc.Sobol(d, scramble=False, seed=0)
    m = max(8, math.ceil(math.log2(max(n_points, 2))))
    pts = eng.random_base2(m)
    lo, hi = window.bounding_box()
    return lo + pts * (hi - lo), float(np.prod(hi - lo))


def stress_profile_S1(window: Window, plane: ProjectionPlane, v,
                      n_points: int = 100_000,
                      wspec: StressWeight = StressWeight(),
                      method: str = "qmc",
                      rng: RngStream | None = None) -> float:
    """First-order stress profile at an interior point v: the integral of the
    pair stress S(v, u) over u in the window (equivalently over the shifted
    window W - v).  Values lie in [0, bound]."""
    v = np.asarray(v, dtype=float)
    if not window.contains(v[None, :])[0]:
        raise ValueError("profile point must lie in the window")
    if method == "qmc":
        pts, box = _qmc_points(window, n_points)
    elif method == "mc":
        gen = (rng or RngStream(0)).generator()
        lo, hi = window.bounding_box()
        pts = gen.uniform(lo, hi, size=(n_points, window.dimension))
        box = float(np.prod(hi - lo))
    else:
        raise ValueError("method must be 'qmc' or 'mc'")
    inside = window.contains(pts)
    diff = pts - v
    d0, d1 = _distances(diff, plane.basis)
    vals = wspec.evaluate(d0, d1)
    return float(np.mean(vals * inside) * box)


_CUBE_STRESS_CACHE: dict = {}


def _cube_canonical_nodes(d: int, outer_grid: int):
    """Midpoint-grid nodes reduced by the symmetry group of the cube with an
    axis-aligned plane: reflections of every coordinate and the swap of the
    two in-plane axes.  Returns (nodes, multiplicities)."""
    half = (np.arange(outer_grid // 2) + 0.5) / outer_grid   # < 1/2 side
    grids = np.meshgrid(*([half] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    keep = nodes[:, 0] <= nodes[:, 1]
    nodes = nodes[keep]
    mult = np.full(len(nodes), 2.0 ** d)          # reflection orbit
    mult[nodes[:, 0] < nodes[:, 1]] *= 2.0        # swap orbit
    return nodes, mult


def cube_stress_integrals(d: int = 3, outer_grid: int = 32,
                          inner_points: int = 100_000) -> tuple[float, float]:
    """(int_W S1, int_W S1^2) for the cube window with the default plane and
    inverse-square weight: nested quadrature with a midpoint outer grid of
    outer_grid^d nodes (reduced by cube symmetry) and a shared
    low-discrepancy inner point set."""
    key = (d, outer_grid, inner_points)
    if key in _CUBE_STRESS_CACHE:
        return _CUBE_STRESS_CACHE[key]
    if outer_grid % 2:
        raise ValueError("outer_grid must be even")
    window = Window("cube", d)
    plane = ProjectionPlane.default(d)
    inner, _ = _qmc_points(window, inner_points)
    nodes, mult = _cube_canonical_nodes(d, outer_grid)
    wspec = StressWeight()
    s1 = np.empty(len(nodes))
    chunk = max(1, 2 ** 22 // len(inner))
    for s in range(0, len(nodes), chunk):
        blk = nodes[s:s + chunk]
        diff = (inner[None, :, :] - blk[:, None, :]).reshape(-1, d)
        d0, d1 = _distances(diff, plane.basis)
        vals = wspec.evaluate(d0, d1).reshape(len(blk), -1)
        s1[s:s + chunk] = vals.mean(axis=1)
    total = mult.sum()
    result = (float(np.sum(s1 * mult) / total),
              float(np.sum(s1 ** 2 * mult) / total))
    _CUBE_STRESS_CACHE[key] = result
    return result


def cube_covariance_cross_stress(t: float, c: float, d: int = 3,
                                 outer_grid: int = 32,
                                 inner_points: int = 100_000) -> float:
    """Leading covariance between the total crossing count and the stress for
    the cube window (t delta^d = c):  (1/2) c_d t^3 delta^2 int_W S1."""
    if t <= 0 or c <= 0:
        raise ValueError("t and c must be > 0")
    delta = (c / t) ** (1.0 / d)
    s1_int, _ = cube_stress_integrals(d, outer_grid, inner_points)
    return 0.5 * c_d_closed(d) * t ** 3 * delta ** 2 * s1_int


def cube_moments(t: float, c: float, d: int = 3, outer_grid: int = 32,
                 inner_points: int = 100_000) -> CubeMoments:
    """Bundle of the leading cube-window moments at intensity t
    (t delta^d = c) and the limiting covariance matrix of (F1, F2)."""
    delta = (c / t) ** (1.0 / d)
    window = Window("cube", d)
    plane = ProjectionPlane.default(d)
    s1_int, s1_sq_int = cube_stress_integrals(d, outer_grid, inner_points)
    cd = c_d_closed(d)
    var_f1 = (2.0 * cd * cd + c_d_prime_closed(d) / c) / 8.0
    cov_f = 0.5 * cd * s1_int
    sigma = np.array([[var_f1, cov_f], [cov_f, s1_sq_int]])
    return CubeMoments(
        t=t,
        delta=delta,
        c=c,
        exp_crossings=expected_crossings_leading(window, plane, t, delta),
        var_crossings=cube_variance_crossings(t, c, d),
        var_stress=s1_sq_int * t ** 3,
        cov_cross_stress=cube_covariance_cross_stress(
            t, c, d, outer_grid, inner_points),
        sigma=sigma,
    )


def intensity_sandwich(window: Window, plane: ProjectionPlane, t: float,
                       delta: float, region,
                       resolution: int | None = None) -> tuple[float, float]:
    """Bracket for the expected crossing count on a region:

      lower = (1/8) c_d t^4 delta^(2d+2)
              * int_A inf over the 4*delta disk of fiber(W_-3delta)^2,
      upper = same with sup over the 4*delta disk of fiber(W)^2.

    The infimum/supremum over the disk are evaluated exactly from the slice
    structure: for the cube the slice is an inset-square indicator, for the
    ball it is radially decreasing.  The true expectation lies between the
    two for every Borel region; the bracket width is O(delta).
    """
    if t <= 0 or delta < 0:
        raise ValueError("t must be > 0 and delta >= 0")
    _require_supported(window, plane)
    d = window.dimension
    pref = c_d_closed(d) / 8.0 * t ** 4 * delta ** (2 * d + 2)
    n = int(resolution or 1024)
    if n <= 0:
        raise ValueError("quadrature resolution must be positive")

    if window.kind == "cube":
        # fiber of W_-3delta is (1-6delta)^(d-2) on [3delta, 1-3delta]^2;
        # inf over the 4delta-disk is that value iff the whole disk fits
        lo_side = 7.0 * delta
        hi_side = 1.0 - 7.0 * delta
        inset_fiber = max(1.0 - 6.0 * delta, 0.0) ** (d - 2)

        def area(rect_lo, rect_hi):
            if rect_lo >= rect_hi:
                return 0.0
            xs = rect_lo + (np.arange(n) + 0.5) * (rect_hi - rect_lo) / n
            cell = ((rect_hi - rect_lo) / n) ** 2
            gx, gy = np.meshgrid(xs, xs, indexing="ij")
            pts = np.column_stack([gx.ravel(), gy.ravel()])
            return float(region.contains(pts).sum()) * cell

        lower = pref * inset_fiber ** 2 * area(lo_side, hi_side)
        # sup of the cube fiber over the disk is 1 iff the disk meets [0,1]^2
        b0 = -4.0 * delta
        b1 = 1.0 + 4.0 * delta
        upper = pref * area(b0, b1)
        return lower, upper

    r = window.ball_radius
    r_in = max(r - 3.0 * delta, 0.0)
    k = d - 2
    kappa = unit_ball_volume(k)

    def sq_int(radius_fn, rad_window, bound):
        xs = -bound + (np.arange(n) + 0.5) * (2 * bound) / n
        cell = (2 * bound / n) ** 2
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        rho = np.hypot(pts[:, 0], pts[:, 1])
        eff = radius_fn(rho)
        rem = rad_window ** 2 - eff ** 2
        vals = np.where(rem > 0, kappa * np.maximum(rem, 0) ** (k / 2.0),
                        0.0) ** 2
        vals = vals * region.contains(pts)
        return float(vals.sum()) * cell

    # radially decreasing fiber: inf at rho + 4delta, sup at max(rho-4delta,0)
    lower = pref * sq_int(lambda rho: rho + 4.0 * delta, r_in, r)
    upper = pref * sq_int(lambda rho: np.maximum(rho - 4.0 * delta, 0.0),
                          r, r + 4.0 * delta)
    return lower, upper


def normalize_F(t: float, delta: float, crossings, stress,
                exp_crossings: float, exp_stress: float, d: int = 3):
    """Componentwise centering and scaling of (crossing count, stress):
    F1 = (crossings - E) / (t^(7/2) delta^(2d+2)),
    F2 = (stress - E) / t^(3/2).
    Centering constants are supplied by the caller (empirical means across
    replications, so the normalized means vanish by construction)."""
    if t <= 0 or delta <= 0:
        raise ValueError("t and delta must be > 0")
    f1 = (np.asarray(crossings, dtype=float) - exp_crossings) \
        / (t ** 3.5 * delta ** (2 * d + 2))
    f2 = (np.asarray(stress, dtype=float) - exp_stress) / t ** 1.5
    return f1, f2
