"""Replication harness and the statistical test battery: index-of-dispersion,
chi-square goodness of fit to a Poisson law, independence of region counts,
local intensity agreement, and the bivariate CLT checks (covariance match plus
marginal normality).

Every test returns a TestReport; batteries aggregate reports and an exit
status.  Replications run on independent counter-based streams, so results
are bitwise reproducible for a fixed (seed, config) regardless of scheduling.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import stats as sps

from .crossings import crossing_pairs_and_locations
from .geometry import Disk, FullPlane, ProjectionPlane, Rectangle, Window
from .sampling import RegimeSpec, RngStream, build_rgg, delta_for, \
    sample_poisson_process
from .stress import StressWeight, stress_total
from .theory import limit_intensity, normalize_F

__all__ = [
    "ExperimentConfig",
    "ReplicationRecord",
    "TestReport",
    "run_replications",
    "dispersion_test",
    "poisson_gof",
    "independence_test",
    "local_intensity_check",
    "clt_test",
    "poisson_battery",
    "clt_battery",
    "calibration_suite",
    "records_to_csv",
    "records_from_csv",
    "reports_to_jsonl",
]


# ---------------------------------------------------------------------------
# configuration and records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a replication experiment."""

    regime: RegimeSpec
    t_values: tuple[float, ...] = (1000.0,)
    replications: int = 1000
    window_kind: str = "cube"
    regions: tuple = ()
    seed: int = 0
    weight: StressWeight = field(default_factory=StressWeight)
    record_stress: bool = True
    threads: int = 1
    intensity_budget: float = 0.05   # relative O(delta) slack for intensity
    level: float = 0.01

    def validate(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.t_values or any(t <= 0 for t in self.t_values):
            raise ValueError("t_values must be positive")
        if self.window_kind not in ("cube", "ball"):
            raise ValueError(f"unknown window_kind {self.window_kind!r}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not 0 < self.level < 1:
            raise ValueError("level must lie in (0, 1)")
        if self.intensity_budget < 0:
            raise ValueError("intensity_budget must be >= 0")

    @property
    def window(self) -> Window:
        return Window(self.window_kind, self.regime.dimension)

    @property
    def plane(self) -> ProjectionPlane:
        return ProjectionPlane.default(self.regime.dimension)


@dataclass
class ReplicationRecord:
    """Per-replication observables."""

    t: float
    replication: int
    n_points: int
    n_edges: int
    total_crossings: int
    region_counts: tuple[int, ...]
    stress: float
    f1: float = float("nan")
    f2: float = float("nan")

    def _key(self):
        # NaN-tolerant identity: unrecorded stress compares equal
        def k(x):
            return "nan" if isinstance(x, float) and math.isnan(x) else x
        return (self.t, self.replication, self.n_points, self.n_edges,
                self.total_crossings, self.region_counts, k(self.stress),
                k(self.f1), k(self.f2))

    def __eq__(self, other):
        if not isinstance(other, ReplicationRecord):
            return NotImplemented
        return self._key() == other._key()


@dataclass
class TestReport:
    """Outcome of one statistical test."""

    __test__ = False          # not a pytest class despite the name

    name: str
    statistic: float
    passed: bool
    level: float
    reference: float | None = None
    p_value: float | None = None
    z_score: float | None = None
    degenerate: bool = False
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = asdict(self)
        return out


# ---------------------------------------------------------------------------
# replication harness
# ---------------------------------------------------------------------------

def _stream_id(t_index: int, rep: int) -> int:
    # one 64-bit stream id per (t, replication)
    return (t_index << 32) | rep


def _run_block(cfg: ExperimentConfig, t: float, t_index: int,
               rep_lo: int, rep_hi: int):
    window = cfg.window
    plane = cfg.plane
    delta = delta_for(cfg.regime, t)
    nreg = len(cfg.regions)
    reps = rep_hi - rep_lo
    n_points = np.empty(reps, dtype=np.int64)
    n_edges = np.empty(reps, dtype=np.int64)
    totals = np.empty(reps, dtype=np.int64)
    counts = np.empty((reps, nreg), dtype=np.int64)
    stress = np.full(reps, np.nan)
    for k, rep in enumerate(range(rep_lo, rep_hi)):
        gen = RngStream(cfg.seed, _stream_id(t_index, rep)).generator()
        pts = sample_poisson_process(window, t, gen)
        graph = build_rgg(pts, delta)
        _, _, locs = crossing_pairs_and_locations(graph, plane)
        n_points[k] = len(pts)
        n_edges[k] = graph.n_edges
        totals[k] = len(locs)
        for r, region in enumerate(cfg.regions):
            counts[k, r] = int(np.count_nonzero(region.contains(locs))) \
                if len(locs) else 0
        if cfg.record_stress:
            stress[k] = stress_total(pts, plane, cfg.weight)
    return n_points, n_edges, totals, counts, stress


def run_replications(cfg: ExperimentConfig, t: float | None = None,
                     t_index: int = 0) -> list[ReplicationRecord]:
    """One record per replication, reproducible from (seed, stream id) and
    independent across replications.  With cfg.threads > 1 the blocks run in
    worker processes; assembly order is by replication id either way."""
    cfg.validate()
    if t is None:
        t = cfg.t_values[t_index]
    reps = cfg.replications
    if cfg.threads <= 1 or reps < 8:
        blocks = [_run_block(cfg, t, t_index, 0, reps)]
    else:
        nblocks = min(4 * cfg.threads, reps)
        bounds = np.linspace(0, reps, nblocks + 1).astype(int)
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            futures = [pool.submit(_run_block, cfg, t, t_index, int(lo), int(hi))
                       for lo, hi in zip(bounds[:-1], bounds[1:])
                       if hi > lo]
            blocks = [f.result() for f in futures]
    n_points = np.concatenate([b[0] for b in blocks])
    n_edges = np.concatenate([b[1] for b in blocks])
    totals = np.concatenate([b[2] for b in blocks])
    counts = np.concatenate([b[3] for b in blocks])
    stress = np.concatenate([b[4] for b in blocks])

    delta = delta_for(cfg.regime, t)
    exp_x = float(totals.mean())
    exp_s = float(np.nanmean(stress)) if cfg.record_stress else 0.0
    f1, f2 = normalize_F(t, delta, totals, stress, exp_x, exp_s,
                         cfg.regime.dimension)
    records = []
    for rep in range(reps):
        records.append(ReplicationRecord(
            t=t, replication=rep, n_points=int(n_points[rep]),
            n_edges=int(n_edges[rep]), total_crossings=int(totals[rep]),
            region_counts=tuple(int(c) for c in counts[rep]),
            stress=float(stress[rep]), f1=float(f1[rep]), f2=float(f2[rep])))
    return records


# ---------------------------------------------------------------------------
# individual tests
# ---------------------------------------------------------------------------

def dispersion_test(counts, level: float = 0.01) -> TestReport:
    """Index of dispersion D = Var/mean with the conditional chi-square null
    (n-1) D ~ chi^2_(n-1) that holds for i.i.d. Poisson counts."""
    counts = np.asarray(counts, dtype=float)
    n = len(counts)
    if n < 100:
        raise ValueError("dispersion test needs >= 100 counts")
    mean = counts.mean()
    if mean == 0:
        return TestReport("dispersion", float("nan"), True, level,
                          degenerate=True,
                          details={"reason": "all counts zero"})
    disp = counts.var(ddof=1) / mean
    stat = (n - 1) * disp
    p = 2.0 * min(sps.chi2.cdf(stat, n - 1), sps.chi2.sf(stat, n - 1))
    z = sps.norm.isf(sps.chi2.sf(stat, n - 1))
    return TestReport("dispersion", float(disp), bool(p >= level), level,
                      reference=1.0, p_value=float(p), z_score=float(z),
                      details={"n": n, "mean": float(mean)})


def poisson_gof(counts, mean: float, level: float = 0.01,
                mean_estimated: bool = False) -> TestReport:
    """Chi-square goodness of fit of the count histogram to Poisson(mean),
    tail bins merged so every expected cell is at least 5."""
    if mean <= 0:
        raise ValueError("mean must be > 0")
    counts = np.asarray(counts, dtype=int)
    n = len(counts)
    kmax = int(counts.max())
    observed = np.bincount(counts, minlength=kmax + 2).astype(float)
    expected = sps.poisson.pmf(np.arange(kmax + 2), mean) * n
    expected[-1] = sps.poisson.sf(kmax, mean) * n  # upper tail lump

    # merge from both ends until every expected cell >= 5
    obs_bins = []
    exp_bins = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            obs_bins.append(acc_o)
            exp_bins.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and obs_bins:
        obs_bins[-1] += acc_o
        exp_bins[-1] += acc_e
    if len(obs_bins) < 2:
        return TestReport("poisson_gof", float("nan"), True, level,
                          reference=mean, degenerate=True,
                          details={"reason": "fewer than 2 usable bins"})
    obs_arr = np.array(obs_bins)
    exp_arr = np.array(exp_bins) * (obs_arr.sum() / np.sum(exp_bins))
    stat = float(np.sum((obs_arr - exp_arr) ** 2 / exp_arr))
    dof = len(obs_bins) - 1 - (1 if mean_estimated else 0)
    dof = max(dof, 1)
    p = float(sps.chi2.sf(stat, dof))
    return TestReport("poisson_gof", stat, bool(p >= level), level,
                      reference=float(mean), p_value=p,
                      details={"bins": len(obs_bins), "dof": dof,
                               "mean_estimated": mean_estimated})


def _regions_overlap(a, b) -> bool:
    """True when the interiors of the two regions intersect."""
    if isinstance(a, FullPlane) or isinstance(b, FullPlane):
        return True
    if isinstance(a, Rectangle) and isinstance(b, Rectangle):
        return (a.lo[0] < b.hi[0] and b.lo[0] < a.hi[0]
                and a.lo[1] < b.hi[1] and b.lo[1] < a.hi[1])
    if isinstance(a, Disk) and isinstance(b, Disk):
        dx = a.center[0] - b.center[0]
        dy = a.center[1] - b.center[1]
        return math.hypot(dx, dy) < a.radius + b.radius
    # mixed rectangle/disk: closest rectangle point to the disk center
    rect, disk = (a, b) if isinstance(a, Rectangle) else (b, a)
    cx = min(max(disk.center[0], rect.lo[0]), rect.hi[0])
    cy = min(max(disk.center[1], rect.lo[1]), rect.hi[1])
    return math.hypot(disk.center[0] - cx, disk.center[1] - cy) < disk.radius


def independence_test(records_or_counts, regions=None,
                      level: float = 0.01) -> TestReport:
    """Pairwise Pearson correlations of per-region counts, Fisher-z against
    zero, Bonferroni-corrected over region pairs."""
    if regions is not None:
        for i in range(len(regions)):
            for j in range(i + 1, len(regions)):
                if _regions_overlap(regions[i], regions[j]):
                    raise ValueError(
                        f"regions {i} and {j} are not disjoint")
        counts = np.array([r.region_counts for r in records_or_counts],
                          dtype=float)
    else:
        counts = np.asarray(records_or_counts, dtype=float)
    n, nreg = counts.shape
    if nreg < 2:
        raise ValueError("need at least 2 regions")
    pairs = [(i, j) for i in range(nreg) for j in range(i + 1, nreg)]
    npairs = len(pairs)
    worst_r = 0.0
    min_p = 1.0
    rs = {}
    for i, j in pairs:
        x = counts[:, i]
        y = counts[:, j]
        if x.std() == 0 or y.std() == 0:
            r = 0.0
        else:
            r = float(np.corrcoef(x, y)[0, 1])
        zstat = math.atanh(min(max(r, -0.999999), 0.999999)) * math.sqrt(n - 3)
        p = 2.0 * sps.norm.sf(abs(zstat))
        rs[f"r_{i}_{j}"] = r
        if abs(r) > abs(worst_r):
            worst_r = r
        min_p = min(min_p, p)
    adj_p = min(1.0, min_p * npairs)
    return TestReport("independence", float(worst_r), bool(adj_p >= level),
                      level, reference=0.0, p_value=float(adj_p),
                      details={"pairs": npairs, **rs})


def local_intensity_check(records, regions, references, level: float = 0.01,
                          n_se: float = 3.0,
                          rel_budget: float = 0.05) -> TestReport:
    """Per-region empirical mean against its reference intensity; the pass
    band is n_se standard errors plus a relative budget for the O(delta)
    remainder of the intensity formula."""
    counts = np.array([r.region_counts for r in records], dtype=float)
    n = len(counts)
    details = {}
    worst = 0.0
    ok = True
    for r, (region, ref) in enumerate(zip(regions, references)):
        mean = counts[:, r].mean()
        se = counts[:, r].std(ddof=1) / math.sqrt(n) if n > 1 else 0.0
        tol = n_se * se + rel_budget * ref
        gap = abs(mean - ref)
        z = gap / se if se > 0 else 0.0
        details[f"region_{r}"] = {"mean": float(mean), "reference": float(ref),
                                  "se": float(se), "z": float(z)}
        if gap > tol and not (ref == 0.0 and mean == 0.0):
            ok = False
        worst = max(worst, z)
    return TestReport("local_intensity", float(worst), ok, level,
                      details=details)


def _lilliefors_norm(x: np.ndarray) -> tuple[float, float]:
    from statsmodels.stats.diagnostic import lilliefors
    stat, p = lilliefors(x, dist="norm", pvalmethod="table")
    return float(stat), float(p)


def clt_test(records_or_f, sigma_ref=None, level: float = 0.01,
             var_rtol: float = 0.10, cov_rtol: float = 0.15) -> TestReport:
    """Bivariate CLT battery on the normalized vector (F1, F2):
    (a) sample covariance against sigma_ref entrywise (skipped when absent),
    (b) marginal normality by Lilliefors-corrected Kolmogorov-Smirnov,
    (c) marginal skewness and excess kurtosis z-tests (null standard errors
        sqrt(6/n) and sqrt(24/n)).
    The significance sub-tests share the level by Bonferroni (six of them),
    so the whole battery is calibrated at the stated level under the null.
    """
    if isinstance(records_or_f, np.ndarray):
        F = records_or_f
    else:
        F = np.array([[r.f1, r.f2] for r in records_or_f], dtype=float)
    n = len(F)
    if n < 500:
        raise ValueError("clt test needs >= 500 records")
    cov = np.cov(F.T)
    if not np.all(np.isfinite(cov)) or np.linalg.det(cov) <= 0:
        return TestReport("clt", float("nan"), True, level, degenerate=True,
                          details={"reason": "singular sample covariance"})
    details: dict = {"n": n}
    ok = True
    if sigma_ref is not None:
        sigma_ref = np.asarray(sigma_ref, dtype=float)
        rel = np.abs(cov - sigma_ref) / np.abs(sigma_ref)
        details["cov_sample"] = cov.tolist()
        details["cov_reference"] = sigma_ref.tolist()
        details["cov_rel_gap"] = rel.tolist()
        cov_ok = (rel[0, 0] <= var_rtol and rel[1, 1] <= var_rtol
                  and rel[0, 1] <= cov_rtol)
        details["cov_ok"] = bool(cov_ok)
        ok = ok and cov_ok
    sub_level = level / 6.0
    z_crit = float(sps.norm.isf(sub_level / 2.0))
    ks_stats = []
    for k, name in enumerate(("f1", "f2")):
        x = F[:, k]
        z = (x - x.mean()) / x.std(ddof=1)
        stat, p = _lilliefors_norm(z)
        sk = float(sps.skew(x))
        ku = float(sps.kurtosis(x))
        z_sk = sk / math.sqrt(6.0 / n)
        z_ku = ku / math.sqrt(24.0 / n)
        ks_ok = p >= sub_level
        mom_ok = abs(z_sk) <= z_crit and abs(z_ku) <= z_crit
        details[name] = {"ks_stat": stat, "ks_p": p, "skew": sk,
                         "ex_kurtosis": ku, "z_skew": z_sk,
                         "z_kurtosis": z_ku, "ks_ok": bool(ks_ok),
                         "moments_ok": bool(mom_ok)}
        ks_stats.append(stat)
        ok = ok and ks_ok and mom_ok
    return TestReport("clt", float(max(ks_stats)), bool(ok), level,
                      details=details)


# ---------------------------------------------------------------------------
# batteries
# ---------------------------------------------------------------------------

def poisson_battery(cfg: ExperimentConfig,
                    records: list[ReplicationRecord] | None = None
                    ) -> list[TestReport]:
    """Sparse-regime battery: dispersion, Poisson goodness of fit (empirical
    mean, shape-only), independence over configured regions, and local
    intensity against the limit formula."""
    if cfg.regime.kind != "sparse":
        raise ValueError("poisson battery requires the sparse regime")
    if records is None:
        records = run_replications(cfg)
    totals = np.array([r.total_crossings for r in records])
    reports = [dispersion_test(totals, cfg.level)]
    mean = float(totals.mean())
    if mean > 0:
        reports.append(poisson_gof(totals, mean, cfg.level,
                                   mean_estimated=True))
    refs = [limit_intensity(cfg.window, cfg.plane, cfg.regime.c, region)
            for region in cfg.regions]
    if len(cfg.regions) >= 2:
        reports.append(independence_test(records, cfg.regions, cfg.level))
    if cfg.regions:
        reports.append(local_intensity_check(
            records, cfg.regions, refs, cfg.level,
            rel_budget=cfg.intensity_budget))
    return reports


def clt_battery(cfg: ExperimentConfig, sigma_ref=None,
                records_by_t: dict | None = None,
                var_rtol: float = 0.10, cov_rtol: float = 0.15
                ) -> list[TestReport]:
    """Thermodynamic-regime battery: covariance match (when a reference is
    supplied) plus marginal normality, at every configured t."""
    if cfg.regime.kind != "thermodynamic":
        raise ValueError("clt battery requires the thermodynamic regime")
    reports = []
    for idx, t in enumerate(cfg.t_values):
        if records_by_t is not None and t in records_by_t:
            records = records_by_t[t]
        else:
            records = run_replications(cfg, t=t, t_index=idx)
        rep = clt_test(records, sigma_ref=sigma_ref, level=cfg.level,
                       var_rtol=var_rtol, cov_rtol=cov_rtol)
        rep.details["t"] = t
        rep.name = f"clt_t{t:g}"
        reports.append(rep)
    return reports


# ---------------------------------------------------------------------------
# null calibration
# ---------------------------------------------------------------------------

def calibration_suite(level: float = 0.01, n_trials: int = 200,
                      n_samples: int = 2000, seed: int = 1234) -> dict:
    """Rejection rate of every test on data generated under its own null
    hypothesis; each should stay below level + 2*sqrt(level/n_trials)."""
    rates = {}
    bound = level + 2.0 * math.sqrt(level / n_trials)

    def rate(fn):
        rejections = 0
        for trial in range(n_trials):
            if not fn(RngStream(seed, trial).generator()).passed:
                rejections += 1
        return rejections / n_trials

    rates["dispersion"] = rate(
        lambda g: dispersion_test(g.poisson(5.0, size=n_samples), level))
    rates["poisson_gof"] = rate(
        lambda g: poisson_gof(c := g.poisson(5.0, size=n_samples),
                              float(np.mean(c)), level, mean_estimated=True))
    rates["independence"] = rate(
        lambda g: independence_test(
            g.poisson(5.0, size=(n_samples, 2)).astype(float), level=level))

    def _local(g):
        counts = g.poisson(5.0, size=(n_samples, 1))
        recs = [ReplicationRecord(0, i, 0, 0, 0, (int(c),), 0.0)
                for i, c in enumerate(counts[:, 0])]
        return local_intensity_check(recs, [FullPlane()], [5.0], level)
    rates["local_intensity"] = rate(_local)

    sigma = np.array([[1.0, 0.3], [0.3, 1.0]])
    chol = np.linalg.cholesky(sigma)

    def _clt(g):
        F = g.standard_normal(size=(n_samples, 2)) @ chol.T
        return clt_test(F, sigma_ref=None, level=level)
    rates["clt"] = rate(_clt)

    return {"level": level, "n_trials": n_trials, "bound": bound,
            "rates": rates,
            "ok": all(v <= bound for v in rates.values())}


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def _region_columns(nreg: int) -> list[str]:
    return [f"region_{k}" for k in range(nreg)]


def records_to_csv(records: list[ReplicationRecord], path) -> None:
    """One row per replication, stable column order; floats round-trip."""
    nreg = len(records[0].region_counts) if records else 0
    cols = ["t", "replication", "n_points", "n_edges", "total_crossings",
            *_region_columns(nreg), "stress", "f1", "f2"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in records:
            w.writerow([repr(r.t), r.replication, r.n_points, r.n_edges,
                        r.total_crossings, *r.region_counts,
                        repr(r.stress), repr(r.f1), repr(r.f2)])


def records_from_csv(path) -> list[ReplicationRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        nreg = sum(1 for c in header if c.startswith("region_"))
        out = []
        for row in reader:
            t, rep, npts, nedg, tot = row[:5]
            regions = tuple(int(v) for v in row[5:5 + nreg])
            stress, f1, f2 = row[5 + nreg:8 + nreg]
            out.append(ReplicationRecord(
                float(t), int(rep), int(npts), int(nedg), int(tot),
                regions, float(stress), float(f1), float(f2)))
    return out


def reports_to_jsonl(reports: list[TestReport], path) -> None:
    with open(path, "w") as fh:
        for rep in reports:
            fh.write(json.dumps(rep.to_json()) + "\n")
