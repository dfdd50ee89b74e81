"""Crossing statistics of projected random geometric graphs.

Build a random geometric graph on a unit-volume window in R^d, project it
onto a plane, enumerate the edge-crossing point process, evaluate closed-form
limit quantities (intensity, variances, covariance with the graph stress),
and statistically verify Poisson convergence and the bivariate central limit
behavior with a replication harness.
"""

__version__ = "0.1.0"

from .geometry import (ConfigurationError, Disk, FullPlane, ProjectionPlane,
                       Rectangle, Window, fiber_integral, fiber_measure,
                       fiber_sq_integral, inner_parallel_contains, project,
                       project_points, segments_intersect)
from .sampling import (Graph, RegimeSpec, RngStream, build_rgg, delta_for,
                       edges_bruteforce, sample_poisson_process)
from .crossings import (CrossingEvent, count_in_region, enumerate_crossings,
                        enumerate_crossings_bruteforce)
from .stress import StressWeight, pair_stress, stress_total
from .theory import (CubeMoments, LimitConstants, c_d_closed, c_d_montecarlo,
                     c_d_prime_closed, c_d_prime_montecarlo,
                     cube_covariance_cross_stress, cube_moments,
                     cube_pair_volume, cube_stress_integrals,
                     cube_variance_crossings, expected_crossings_leading,
                     intensity_sandwich, limit_constants, limit_intensity,
                     normalize_F, stress_profile_S1, unit_ball_volume)
from .stats import (ExperimentConfig, ReplicationRecord, TestReport,
                    calibration_suite, clt_battery, clt_test,
                    dispersion_test, independence_test, local_intensity_check,
                    poisson_battery, poisson_gof, records_from_csv,
                    records_to_csv, reports_to_jsonl, run_replications)

__all__ = [name for name in dir() if not name.startswith("_")]
