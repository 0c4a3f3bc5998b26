"""Sweep drivers: sample size, dimension, displacement, projections, noise.

A sweep is a grid of cells (grid value x replicate), each drawing fresh data
and evaluating every requested divergence. Cells are independent and may run
in a process pool; rows are always assembled in (grid index, replicate, spec)
order, so output does not depend on the number of workers.

Seeding: replicate ``r`` uses its own direction/noise seed derived from the
plan seed and ``r``. Within a replicate the data, directions and noise streams
are shared across the grid (common random numbers) except where the axis
itself changes the data (sample size, dimension).
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .divergences import DivergenceSpec
from .estimator import SmoothedSliceConfig, analytic_gsswd_gaussian, estimate_gssd, report_from_values
from .sampling import DATA, RngStream, SampleSet, derive_key, load_csv

__all__ = [
    "Axis",
    "CsvScenario",
    "GaussianScenario",
    "SweepError",
    "SweepPlan",
    "SweepResult",
    "SweepRow",
    "CSV_HEADER",
    "fit_loglog_slope",
    "run_dimension_sweep",
    "run_displacement",
    "run_noise_sweep",
    "run_projection_complexity",
    "run_sample_complexity",
    "run_sweep",
]

CSV_HEADER = ("divergence", "p", "sigma", "L", "n", "d", "axis", "axis_value", "replicate",
              "estimate", "stderr", "wall_time_ms", "error")

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0+unknown"

# Accepted distance from a theoretical rate exponent.
SLOPE_BAND = 0.15


class SweepError(ValueError):
    pass


class Axis(str, enum.Enum):
    SAMPLE_SIZE = "samples"
    DIMENSION = "dimension"
    DISPLACEMENT = "displacement"
    PROJECTIONS = "projections"
    NOISE_LEVEL = "noise"


@dataclass(frozen=True)
class GaussianScenario:
    """Isotropic Gaussians N(mu_mean 1, mu_scale^2 I) and N(nu_mean 1, nu_scale^2 I).

    ``identical=True`` hands the very same sample set to both sides.
    The second set is drawn as ``nu_mean + nu_scale * Z`` with Z fixed per
    (replicate, n, d), so changing ``nu_mean`` shifts the same points.
    """

    d: int = 10
    n: int = 500
    mu_mean: float = 0.0
    nu_mean: float = 0.0
    mu_scale: float = 1.0
    nu_scale: float = 1.0
    identical: bool = False

    def draw(self, seed: int, replicate: int, n: int | None = None, d: int | None = None,
             nu_mean: float | None = None) -> tuple[SampleSet, SampleSet]:
        n = self.n if n is None else int(n)
        d = self.d if d is None else int(d)
        nu_mean = self.nu_mean if nu_mean is None else nu_mean
        st = RngStream(seed, (DATA, replicate, n, d))
        z_mu = st.child(0).generator().standard_normal((n, d))
        mu = SampleSet(self.mu_mean + self.mu_scale * z_mu, derive_key(seed, replicate, "mu"))
        if self.identical:
            return mu, mu
        z_nu = st.child(1).generator().standard_normal((n, d))
        nu = SampleSet(nu_mean + self.nu_scale * z_nu, derive_key(seed, replicate, "nu"))
        return mu, nu

    def population_sw2(self, sigma: float, d: int | None = None, nu_mean: float | None = None) -> float:
        d = self.d if d is None else d
        nu_mean = self.nu_mean if nu_mean is None else nu_mean
        if self.identical:
            return 0.0
        return analytic_gsswd_gaussian(self.mu_mean, self.mu_scale, nu_mean, self.nu_scale, sigma, d)

    def describe(self) -> str:
        if self.identical:
            return f"gaussian identical N({self.mu_mean}*1, {self.mu_scale}^2 I)"
        return (f"gaussian N({self.mu_mean}*1, {self.mu_scale}^2 I) vs "
                f"N({self.nu_mean}*1, {self.nu_scale}^2 I)")


@dataclass(frozen=True)
class CsvScenario:
    """Two CSV datasets; a sweep cell subsamples n rows of each without replacement."""

    path_mu: str
    path_nu: str
    n: int | None = None
    shared_noise_key: bool = False

    @cached_property
    def _data(self) -> tuple[SampleSet, SampleSet]:
        mu = load_csv(self.path_mu)
        nu = load_csv(self.path_nu, noise_key=mu.noise_key if self.shared_noise_key else None)
        if mu.d != nu.d:
            raise SweepError(f"dimension mismatch: {self.path_mu} has d={mu.d}, {self.path_nu} has d={nu.d}")
        return mu, nu

    @property
    def d(self) -> int:
        return self._data[0].d

    def draw(self, seed: int, replicate: int, n: int | None = None, d: int | None = None,
             nu_mean: float | None = None) -> tuple[SampleSet, SampleSet]:
        if nu_mean is not None:
            raise SweepError("displacement sweeps need a synthetic scenario")
        mu, nu = self._data
        if d is not None and d != mu.d:
            raise SweepError("dimension sweeps need a synthetic scenario")
        n = self.n if n is None else int(n)
        if n is None:
            return mu, nu
        out = []
        for role, s in (("mu", mu), ("nu", nu)):
            if n > s.n:
                raise SweepError(f"requested n={n} rows but dataset has only {s.n}")
            gen = RngStream(seed, (DATA, replicate, n, derive_key(role))).generator()
            rows = np.sort(gen.choice(s.n, size=n, replace=False))
            out.append(SampleSet(s.points[rows], s.noise_key))
        return out[0], out[1]

    def population_sw2(self, *args, **kwargs):
        return None

    def describe(self) -> str:
        return f"csv {self.path_mu} vs {self.path_nu}"


@dataclass(frozen=True)
class SweepPlan:
    axis: Axis
    grid: tuple
    replicates: int = 20
    specs: tuple[DivergenceSpec, ...] = (DivergenceSpec(),)
    cfg: SmoothedSliceConfig = field(default_factory=SmoothedSliceConfig)
    scenario: GaussianScenario | CsvScenario = field(default_factory=GaussianScenario)
    inner_grid: tuple = ()
    L_ref: int = 10000
    jobs: int = 1
    timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "grid", tuple(self.grid))
        object.__setattr__(self, "inner_grid", tuple(self.inner_grid))
        object.__setattr__(self, "specs", tuple(self.specs))
        if not self.grid:
            raise SweepError("grid must be non-empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise SweepError("grid must be strictly increasing")
        if self.replicates < 1:
            raise SweepError("replicates must be >= 1")
        if not self.specs:
            raise SweepError("at least one divergence is required")

    def replicate_cfg(self, r: int, **changes) -> SmoothedSliceConfig:
        return replace(self.cfg, seed=derive_key(self.cfg.seed, "replicate", r), **changes)


@dataclass
class SweepRow:
    divergence: str
    p: float
    sigma: float
    L: int
    n: int
    d: int
    axis: str
    axis_value: float
    replicate: int
    estimate: float
    stderr: float
    wall_time_ms: float | None = None
    error: str = ""


@dataclass
class SweepResult:
    """Rows plus fitted diagnostics.

    ``slope``/``slope_r2`` map a divergence label to the fitted log-log slope
    (sample-size and projection axes only). ``extras`` carries per-axis
    summaries such as argmins, per-dimension slopes or oracle values.
    """

    axis: Axis
    rows: list[SweepRow]
    slope: dict[str, float] | None = None
    slope_r2: dict[str, float] | None = None
    extras: dict = field(default_factory=dict)

    def mean_by(self, label: str, key: str = "axis_value") -> dict:
        groups: dict = {}
        for row in self.rows:
            if row.divergence == label and not row.error:
                groups.setdefault(getattr(row, key), []).append(row.estimate)
        return {k: float(np.mean(v)) for k, v in groups.items()}

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows:
            writer.writerow([_fmt(getattr(row, name)) for name in CSV_HEADER])
        return buf.getvalue()

    def metadata(self, plan: SweepPlan) -> dict:
        return {
            "seed": plan.cfg.seed,
            "axis": plan.axis.value,
            "scenario": plan.scenario.describe(),
            "grid": list(plan.grid),
            "inner_grid": list(plan.inner_grid),
            "replicates": plan.replicates,
            "divergences": [dataclasses.asdict(s) | {"kind": s.label} for s in plan.specs],
            "sigma": plan.cfg.sigma,
            "L": plan.cfg.L,
            "slope": self.slope,
            "slope_r2": self.slope_r2,
            "estimate_column": ESTIMATE_NOTES[plan.axis],
            "replicate_aggregate": "mean",
            "software_version": __version__,
            **self.extras,
        }

    def write(self, path: str | os.PathLike, plan: SweepPlan) -> str:
        """Write the CSV and its ``.meta.json`` sidecar, each via temp file + rename."""
        path = os.fspath(path)
        meta_path = os.path.splitext(path)[0] + ".meta.json"
        _atomic_write(path, self.csv_text())
        _atomic_write(meta_path, json.dumps(_jsonable(self.metadata(plan)), indent=2, sort_keys=True) + "\n")
        return meta_path


ESTIMATE_NOTES = {
    Axis.SAMPLE_SIZE: "mean over directions of D^p; with identical source laws this is the "
                      "error itself; slope fitted on (replicate mean)^(1/p) vs n",
    Axis.DIMENSION: "as for samples, per dimension",
    Axis.DISPLACEMENT: "mean over directions of D^p",
    Axis.PROJECTIONS: "|estimate(L) - estimate(L_ref)|; slope fitted on replicate mean vs L",
    Axis.NOISE_LEVEL: "mean over directions of D^p",
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fit_loglog_slope(xs, ys) -> tuple[float, float]:
    """OLS fit of log y on log x; returns (slope, R^2)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size != ys.size:
        raise ValueError("xs and ys differ in length")
    if xs.size < 3:
        raise ValueError(f"need at least 3 points, got {xs.size}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs strictly positive values")
    lx, ly = np.log(xs), np.log(ys)
    lx_c = lx - lx.mean()
    ly_c = ly - ly.mean()
    slope = float(lx_c @ ly_c / (lx_c @ lx_c))
    ss_tot = float(ly_c @ ly_c)
    resid = ly_c - slope * lx_c
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(resid @ resid) / ss_tot
    return slope, r2


# ---------------------------------------------------------------- cell execution

@dataclass(frozen=True)
class _Cell:
    value: float
    replicate: int
    n: int | None = None
    d: int | None = None
    sigma: float | None = None
    L: int | None = None
    nu_mean: float | None = None


def _estimate_rows(plan: SweepPlan, cell: _Cell) -> list[SweepRow]:
    mu, nu = plan.scenario.draw(plan.cfg.seed, cell.replicate, n=cell.n, d=cell.d,
                                nu_mean=cell.nu_mean)
    changes = {}
    if cell.sigma is not None:
        changes["sigma"] = cell.sigma
    if cell.L is not None:
        changes["L"] = cell.L
    rows = []
    for spec in plan.specs:
        cfg = plan.replicate_cfg(cell.replicate, spec=spec, **changes)
        t0 = time.perf_counter()
        err = ""
        try:
            rep = estimate_gssd(mu, nu, cfg)
            est, se = rep.value, rep.stderr
        except (ValueError, ArithmeticError) as exc:
            est, se, err = math.nan, math.nan, f"{type(exc).__name__}: {exc}"
        elapsed = (time.perf_counter() - t0) * 1e3 if plan.timing else None
        rows.append(SweepRow(
            divergence=spec.label, p=spec.p, sigma=cfg.sigma, L=cfg.L, n=mu.n, d=mu.d,
            axis=plan.axis.value, axis_value=cell.value, replicate=cell.replicate,
            estimate=est, stderr=se, wall_time_ms=elapsed, error=err,
        ))
    return rows


def _run_cell(args):
    plan, cell = args
    return _estimate_rows(plan, cell)


def _execute(plan: SweepPlan, cells: list[_Cell]) -> list[SweepRow]:
    work = [(plan, c) for c in cells]
    if plan.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
            chunks = list(pool.map(_run_cell, work))
    else:
        chunks = [_run_cell(w) for w in work]
    return [row for chunk in chunks for row in chunk]


def _slopes_from_means(xs, means_by_label: dict, power: dict) -> tuple[dict, dict, dict]:
    """Slopes of (mean)^(1/p), their R^2, and the slope of the raw mean."""
    slope, r2, raw = {}, {}, {}
    for label, means in means_by_label.items():
        ys = np.array([means[x] for x in xs])
        try:
            slope[label], r2[label] = fit_loglog_slope(xs, ys ** (1.0 / power[label]))
            raw[label] = fit_loglog_slope(xs, ys)[0]
        except ValueError:
            slope[label] = r2[label] = raw[label] = math.nan
    return slope, r2, raw


def _check_axis(plan: SweepPlan, axis: Axis):
    if plan.axis is not axis:
        raise SweepError(f"plan axis is {plan.axis.value}, expected {axis.value}")


# ---------------------------------------------------------------- drivers

def _sample_size_rows(plan: SweepPlan, grid, d=None, sigma=None, axis_value=None) -> list[SweepRow]:
    if any(int(n) != n or n < 2 for n in grid):
        raise SweepError("sample sizes must be integers >= 2")
    cells = [_Cell(value=n if axis_value is None else axis_value, replicate=r, n=int(n), d=d, sigma=sigma)
             for n in grid for r in range(plan.replicates)]
    return _execute(plan, cells)


def _sample_size_slopes(plan: SweepPlan, rows: list[SweepRow], grid) -> tuple[dict, dict, dict]:
    means, power = {}, {}
    for spec in plan.specs:
        groups: dict = {}
        for row in rows:
            if row.divergence == spec.label and not row.error:
                groups.setdefault(row.n, []).append(row.estimate)
        means[spec.label] = {n: float(np.mean(groups[n])) if n in groups else math.nan for n in grid}
        power[spec.label] = spec.p
    for m in means.values():
        if all(v == 0 for v in m.values()):
            raise SweepError("degenerate sweep: every estimate is 0, slope undefined")
    return _slopes_from_means(grid, means, power)


def run_sample_complexity(plan: SweepPlan) -> SweepResult:
    """Estimates for growing n; slope of log (mean estimate)^(1/p) against log n."""
    _check_axis(plan, Axis.SAMPLE_SIZE)
    grid = [int(n) for n in plan.grid]
    rows = _sample_size_rows(plan, grid)
    result = SweepResult(plan.axis, rows)
    if len(grid) >= 3:
        slope, r2, raw = _sample_size_slopes(plan, rows, grid)
        result.slope, result.slope_r2 = slope, r2
        result.extras["value_slope"] = raw
    elif all(r.estimate == 0 for r in rows if not r.error):
        raise SweepError("degenerate sweep: every estimate is 0, slope undefined")
    return result


def run_dimension_sweep(plan: SweepPlan) -> SweepResult:
    """Sample-size sweeps for each dimension; reports per-dimension slopes and the max gap."""
    _check_axis(plan, Axis.DIMENSION)
    if isinstance(plan.scenario, CsvScenario):
        raise SweepError("dimension sweeps need a synthetic scenario")
    inner = [int(n) for n in plan.inner_grid]
    if len(inner) < 3:
        raise SweepError("dimension sweep needs an inner sample-size grid with >= 3 points")
    rows: list[SweepRow] = []
    by_dim: dict[str, dict] = {s.label: {} for s in plan.specs}
    r2_by_dim: dict[str, dict] = {s.label: {} for s in plan.specs}
    for d in plan.grid:
        sub = _sample_size_rows(plan, inner, d=int(d), axis_value=d)
        rows.extend(sub)
        slope, r2, _ = _sample_size_slopes(plan, sub, inner)
        for label in slope:
            by_dim[label][int(d)] = slope[label]
            r2_by_dim[label][int(d)] = r2[label]
    gaps = {label: (max(v.values()) - min(v.values())) for label, v in by_dim.items()}
    return SweepResult(plan.axis, rows, extras={
        "slopes_by_dimension": by_dim, "r2_by_dimension": r2_by_dim, "max_slope_gap": gaps,
    })


def run_displacement(plan: SweepPlan) -> SweepResult:
    """Second mean swept over the grid (mean s * 1) against a fixed first set."""
    _check_axis(plan, Axis.DISPLACEMENT)
    if not isinstance(plan.scenario, GaussianScenario):
        raise SweepError("displacement sweeps need a synthetic scenario")
    cells = [_Cell(value=s, replicate=r, nu_mean=float(s))
             for s in plan.grid for r in range(plan.replicates)]
    rows = _execute(plan, cells)
    result = SweepResult(plan.axis, rows)
    argmin = {}
    for spec in plan.specs:
        means = result.mean_by(spec.label)
        if means:
            argmin[spec.label] = min(means, key=lambda s: (means[s], s))
    result.extras["argmin"] = argmin
    result.extras["mean_estimate"] = {s.label: result.mean_by(s.label) for s in plan.specs}
    result.extras["analytic_sw2"] = {
        s: plan.scenario.population_sw2(plan.cfg.sigma, nu_mean=float(s)) for s in plan.grid
    }
    return result


def run_projection_complexity(plan: SweepPlan) -> SweepResult:
    """|estimate(L) - estimate(L_ref)| over an L grid; slope of the mean error vs L."""
    _check_axis(plan, Axis.PROJECTIONS)
    if plan.L_ref in plan.grid:
        raise SweepError(f"L_ref={plan.L_ref} is in the grid (self-comparison)")
    if any(int(L) != L or L < 1 for L in plan.grid):
        raise SweepError("projection counts must be positive integers")
    cells = []
    for r in range(plan.replicates):
        # one reference per replicate, shared by every L of that replicate
        cells.append(_GroupedCell(tuple(int(L) for L in plan.grid), r))
    chunks = _execute_grouped(plan, cells)
    # reorder to (grid index, replicate, spec)
    order = {L: i for i, L in enumerate(plan.grid)}
    spec_order = {spec.label: k for k, spec in enumerate(plan.specs)}
    rows = sorted(chunks, key=lambda row: (order[row.axis_value], row.replicate, spec_order[row.divergence]))
    result = SweepResult(plan.axis, rows)
    if len(plan.grid) >= 3:
        slope, r2 = {}, {}
        for spec in plan.specs:
            means = result.mean_by(spec.label)
            xs = np.asarray(plan.grid, dtype=np.float64)
            slope[spec.label], r2[spec.label] = fit_loglog_slope(xs, [means[L] for L in plan.grid])
        result.slope, result.slope_r2 = slope, r2
    result.extras["L_ref"] = plan.L_ref
    return result


@dataclass(frozen=True)
class _GroupedCell:
    grid: tuple
    replicate: int


def _run_grouped(args):
    """All L of one replicate. The estimate at L < L_ref is the running mean of
    the first L per-direction values of the reference (directions and noise are
    prefix-stable), so the reference is computed once and reused."""
    plan, gc = args
    rows = []
    mu, nu = plan.scenario.draw(plan.cfg.seed, gc.replicate)
    for spec in plan.specs:
        cfg_ref = plan.replicate_cfg(gc.replicate, spec=spec, L=plan.L_ref)
        try:
            ref = estimate_gssd(mu, nu, cfg_ref)
            ref_err = ""
        except (ValueError, ArithmeticError) as exc:
            ref, ref_err = None, f"reference failed: {type(exc).__name__}: {exc}"
        for L in gc.grid:
            t0 = time.perf_counter()
            err = ref_err
            est = se = math.nan
            if ref is not None:
                try:
                    if L <= plan.L_ref:
                        rep = report_from_values(ref.per_projection[:L].copy(), spec.p)
                    else:
                        rep = estimate_gssd(mu, nu, replace(cfg_ref, L=L))
                    est, se = abs(rep.value - ref.value), rep.stderr
                except (ValueError, ArithmeticError) as exc:
                    err = f"{type(exc).__name__}: {exc}"
            elapsed = (time.perf_counter() - t0) * 1e3 if plan.timing else None
            rows.append(SweepRow(spec.label, spec.p, cfg_ref.sigma, L, mu.n, mu.d, plan.axis.value,
                                 L, gc.replicate, est, se, elapsed, err))
    return rows


def _execute_grouped(plan, cells):
    work = [(plan, c) for c in cells]
    if plan.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
            chunks = list(pool.map(_run_grouped, work))
    else:
        chunks = [_run_grouped(w) for w in work]
    return [row for chunk in chunks for row in chunk]


def run_noise_sweep(plan: SweepPlan) -> SweepResult:
    """Estimates per noise level, crossed with an inner sample-size grid.

    Data, directions and the underlying standard-normal noise draws are shared
    across noise levels, so sigma = 0 reproduces the plain sliced estimate.
    """
    _check_axis(plan, Axis.NOISE_LEVEL)
    if any(s < 0 for s in plan.grid):
        raise SweepError("noise levels must be non-negative")
    inner = [int(n) for n in plan.inner_grid] or [plan.scenario.n]
    cells = [_Cell(value=s, replicate=r, n=n, sigma=float(s))
             for s in plan.grid for n in inner for r in range(plan.replicates)]
    rows = _execute(plan, cells)
    result = SweepResult(plan.axis, rows)
    summary: dict[str, dict] = {}
    for spec in plan.specs:
        per_sigma = {}
        for s in plan.grid:
            per_n = {}
            for n in inner:
                vals = [r.estimate for r in rows if r.divergence == spec.label and not r.error
                        and r.axis_value == s and r.n == n]
                ses = [r.stderr for r in rows if r.divergence == spec.label and not r.error
                       and r.axis_value == s and r.n == n]
                if vals:
                    per_n[n] = {"mean": float(np.mean(vals)), "mean_stderr": float(np.mean(ses))}
            per_sigma[s] = per_n
        summary[spec.label] = per_sigma
    result.extras["per_sigma"] = summary
    if len(inner) >= 3:
        slopes = {}
        for spec in plan.specs:
            slopes[spec.label] = {}
            for s in plan.grid:
                ys = [summary[spec.label][s].get(n, {}).get("mean", math.nan) for n in inner]
                try:
                    slopes[spec.label][s] = fit_loglog_slope(inner, np.asarray(ys) ** (1.0 / spec.p))[0]
                except ValueError:
                    slopes[spec.label][s] = None
        result.extras["slope_by_sigma"] = slopes
    pop = {s: plan.scenario.population_sw2(float(s)) for s in plan.grid}
    if all(v is not None for v in pop.values()):
        result.extras["analytic_sw2"] = pop
    return result


_DRIVERS = {
    Axis.SAMPLE_SIZE: run_sample_complexity,
    Axis.DIMENSION: run_dimension_sweep,
    Axis.DISPLACEMENT: run_displacement,
    Axis.PROJECTIONS: run_projection_complexity,
    Axis.NOISE_LEVEL: run_noise_sweep,
}


def run_sweep(plan: SweepPlan) -> SweepResult:
    return _DRIVERS[plan.axis](plan)
