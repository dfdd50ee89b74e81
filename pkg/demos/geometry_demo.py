#!/usr/bin/env python3
"""Windows, slice measures, and exact segment intersection.

Everything downstream rests on three deterministic ingredients: unit-volume
windows with closed-form slice ("fiber") measures, orthogonal projection onto
a plane, and a segment-intersection predicate whose yes/no answer is exact.
"""

from rggcross import (Disk, FullPlane, ProjectionPlane, Rectangle, Window,
                      fiber_integral, fiber_measure, fiber_sq_integral,
                      inner_parallel_contains, project, segments_intersect)

plane = ProjectionPlane.default(3)
cube = Window("cube", 3)
ball = Window("ball", 3)

print("projection of (0.3, 0.7, 0.9):", project((0.3, 0.7, 0.9), plane))
print("ball radius for unit volume:", round(ball.ball_radius, 6))

print("\nfiber (slice) measures over plane points:")
print("  cube over (0.2, 0.9):", fiber_measure(cube, plane, (0.2, 0.9)))
print("  cube over (1.2, 0.5):", fiber_measure(cube, plane, (1.2, 0.5)))
print("  ball over the center:", round(fiber_measure(ball, plane, (0, 0)), 6),
      "(the central chord, 2r)")

print("\nintegrals recover the window volume (Fubini):")
print("  cube:", fiber_integral(cube, plane, FullPlane()))
print("  ball:", round(fiber_integral(ball, plane, FullPlane()), 6))
print("squared-fiber integrals drive the crossing intensity:")
print("  cube full plane:", fiber_sq_integral(cube, plane, FullPlane()))
print("  cube quadrant:  ",
      fiber_sq_integral(cube, plane, Rectangle((0, 0), (0.5, 0.5))))
print("  ball disk r=0.3:",
      round(fiber_sq_integral(ball, plane, Disk((0, 0), 0.3)), 6))

print("\ninner parallel set membership (delta-ball inside the window):")
print("  cube center, delta=0.4:",
      inner_parallel_contains(cube, (0.5, 0.5, 0.5), 0.4))
print("  cube near a face, delta=0.1:",
      inner_parallel_contains(cube, (0.05, 0.5, 0.5), 0.1))

print("\nsegment intersection (closed segments, exact decision):")
cases = [
    (((0, 0), (1, 1)), ((0, 1), (1, 0)), "transversal X"),
    (((0, 0), (1, 0)), ((0, 1), (1, 1)), "parallel, disjoint"),
    (((0, 0), (1, 0)), ((1, 0), (1, 1)), "shared endpoint"),
    (((0, 0), (2, 0)), ((1, 0), (3, 0)), "collinear overlap"),
]
for (a1, a2), (b1, b2), label in cases:
    print(f"  {label:>18}: {segments_intersect(a1, a2, b1, b2)}")

print("\nthe decision stays exact under brutal near-degeneracy:")
eps = 2.0 ** -52
a1, a2 = (0.0, 0.0), (1.0, 1.0)
on = (0.5, 0.5)
off = (0.5, 0.5 + eps)
print(f"  point on the diagonal      : "
      f"{segments_intersect(a1, a2, on, on) is not None}")
print(f"  point one ulp off          : "
      f"{segments_intersect(a1, a2, off, off) is not None}")
