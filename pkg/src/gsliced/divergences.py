"""Base divergences between one-dimensional empirical distributions.

All functions take unsorted 1D arrays and treat them as uniform empirical
measures. Arguments are put in a canonical order before any floating-point
reduction, so every divergence is bitwise symmetric in its two arguments.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .entropic import entropic_ot_1d

__all__ = [
    "DivergenceError",
    "DivergenceKind",
    "DivergenceSpec",
    "base_divergence",
    "divergence_power",
    "gaussian_kernel_quadratic_form",
    "mean_pairwise_distance",
    "mmd_1d",
    "sinkhorn_divergence_1d",
    "wasserstein_1d",
    "wasserstein_1d_bruteforce",
]


class DivergenceError(ValueError):
    pass


class DivergenceKind(str, enum.Enum):
    WASSERSTEIN = "wasserstein"
    SINKHORN = "sinkhorn"
    MMD = "mmd"


@dataclass(frozen=True)
class DivergenceSpec:
    """Which base divergence to use and its parameters.

    ``mmd_bandwidth=None`` selects the mean pairwise distance of the pooled
    values, recomputed for every call; a float fixes the bandwidth.
    """

    kind: DivergenceKind = DivergenceKind.WASSERSTEIN
    p: float = 2.0
    sinkhorn_lambda: float = 0.1
    sinkhorn_tol: float = 1e-9
    sinkhorn_max_iter: int = 10000
    mmd_bandwidth: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", DivergenceKind(self.kind))
        if not self.p >= 1:
            raise ValueError(f"order p must be >= 1, got {self.p}")
        if not self.sinkhorn_lambda > 0:
            raise ValueError(f"sinkhorn_lambda must be > 0, got {self.sinkhorn_lambda}")
        if not self.sinkhorn_tol > 0:
            raise ValueError(f"sinkhorn_tol must be > 0, got {self.sinkhorn_tol}")
        if self.sinkhorn_max_iter < 1:
            raise ValueError("sinkhorn_max_iter must be positive")
        if self.mmd_bandwidth is not None and not self.mmd_bandwidth > 0:
            raise ValueError(f"fixed MMD bandwidth must be > 0, got {self.mmd_bandwidth}")

    @property
    def label(self) -> str:
        return self.kind.value


def _as_1d(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise DivergenceError("empty input")
    if not np.all(np.isfinite(x)):
        raise DivergenceError("input contains NaN or infinite values")
    return x


def _canonical(x, y):
    """Sorted copies of x and y, ordered by (size, values) lexicographically."""
    xs = np.sort(_as_1d(x))
    ys = np.sort(_as_1d(y))
    if xs.size != ys.size:
        return (xs, ys) if xs.size < ys.size else (ys, xs)
    diff = np.flatnonzero(xs != ys)
    if diff.size and xs[diff[0]] > ys[diff[0]]:
        return ys, xs
    return xs, ys


def wasserstein_1d(x, y, p: float = 2.0) -> float:
    """W_p^p between the uniform empirical measures on x and y.

    Equal sizes match order statistics. Otherwise the quantile integral is
    evaluated exactly on the merged breakpoint grid {k/n} U {l/m}, using
    integer positions on the common denominator n*m.
    """
    if p < 1:
        raise DivergenceError(f"order p must be >= 1, got {p}")
    xs, ys = _canonical(x, y)
    n, m = xs.size, ys.size
    if n == m:
        return float(np.mean(np.abs(xs - ys) ** p))
    # breakpoints k*m and l*n on [0, n*m]
    cuts = np.union1d(np.arange(0, n * m + 1, m, dtype=np.int64),
                      np.arange(0, n * m + 1, n, dtype=np.int64))
    left, right = cuts[:-1], cuts[1:]
    qx = xs[left // m]
    qy = ys[left // n]
    weights = (right - left) / (n * m)
    return float(np.sum(weights * np.abs(qx - qy) ** p))


def wasserstein_1d_bruteforce(x, y, p: float = 2.0) -> float:
    """Minimum over all matchings of (1/n) sum |x_i - y_pi(i)|^p; n = m <= 8."""
    x = _as_1d(x)
    y = _as_1d(y)
    if x.size != y.size:
        raise DivergenceError(f"brute force needs equal sizes, got {x.size} and {y.size}")
    if x.size > 8:
        raise DivergenceError(f"brute force limited to n <= 8, got {x.size}")
    best = math.inf
    for perm in itertools.permutations(range(y.size)):
        best = min(best, float(np.mean(np.abs(x - y[list(perm)]) ** p)))
    return best


@functools.lru_cache(maxsize=256)
def _self_cost(raw: bytes, p: float, lam: float, tol: float, max_iter: int) -> float:
    # sweeps often reuse one smoothed projection against many partners
    xs = np.frombuffer(raw, dtype=np.float64)
    return entropic_ot_1d(xs, xs, p=p, lam=lam, tol=tol, max_iter=max_iter).value


def sinkhorn_divergence_1d(x, y, spec: DivergenceSpec) -> float:
    """Debiased entropic cost W(x,y) - W(x,x)/2 - W(y,y)/2 (not yet raised to p).

    Values in (-10 tol, 0) from finite convergence are clamped to 0; anything
    more negative raises.
    """
    xs, ys = _canonical(x, y)
    kw = dict(p=spec.p, lam=spec.sinkhorn_lambda, tol=spec.sinkhorn_tol,
              max_iter=spec.sinkhorn_max_iter)
    cross = entropic_ot_1d(xs, ys, **kw).value
    if xs.size == ys.size and np.array_equal(xs, ys):
        return 0.0
    self_x = _self_cost(xs.tobytes(), spec.p, spec.sinkhorn_lambda, spec.sinkhorn_tol, spec.sinkhorn_max_iter)
    self_y = _self_cost(ys.tobytes(), spec.p, spec.sinkhorn_lambda, spec.sinkhorn_tol, spec.sinkhorn_max_iter)
    value = cross - 0.5 * self_x - 0.5 * self_y
    if value < 0:
        if value > -10 * spec.sinkhorn_tol:
            return 0.0
        raise DivergenceError(f"Sinkhorn divergence is negative beyond tolerance: {value:.3e}")
    return value


def mean_pairwise_distance(z) -> float:
    """Mean of |z_i - z_j| over all pairs i < j."""
    z = np.sort(_as_1d(z))
    N = z.size
    if N < 2:
        return 0.0
    coef = 2.0 * np.arange(N) - (N - 1)
    return float(np.dot(coef, z) / (N * (N - 1) / 2))


_SERIES_TERMS = 14  # |u v| <= 1/4 inside a box pair: (1/4)^14 / 14! ~ 4e-20
_DENSE_LIMIT = 512


def gaussian_kernel_quadratic_form(z, w, h: float) -> float:
    """sum_ij w_i w_j exp(-(z_i - z_j)^2 / (2 h^2)).

    Small inputs are summed densely. Larger ones are split into boxes of width
    h; for a box pair with centre gap delta (in units of h) and offsets u, v the
    kernel factors exactly as

        exp(-delta^2/2) * exp(-u^2/2 - delta u) * exp(-v^2/2 + delta v) * exp(u v)

    and only exp(u v) with |u v| <= 1/4 is expanded in a Taylor series, so the
    sum is exact to rounding at O(boxes * N) cost.
    """
    z = np.asarray(z, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    order = np.argsort(z, kind="stable")
    z, w = z[order], w[order]
    N = z.size
    t = z / h
    if N <= _DENSE_LIMIT:
        return float(w @ np.exp(-0.5 * (t[:, None] - t[None, :]) ** 2) @ w)

    starts = [0]
    while True:
        nxt = int(np.searchsorted(t, t[starts[-1]] + 1.0, side="left"))
        if nxt >= N:
            break
        starts.append(nxt)
    starts = np.asarray(starts)
    if starts.size > 256:
        # very spread-out data: fall back to blocked dense sums
        total = 0.0
        for s in range(0, N, 2048):
            blk = np.exp(-0.5 * (t[s:s + 2048, None] - t[None, :]) ** 2)
            total += float(w[s:s + 2048] @ blk @ w)
        return total

    ends = np.append(starts[1:], N)
    box = np.repeat(np.arange(starts.size), ends - starts)
    centres = 0.5 * (t[starts] + t[ends - 1])
    u = t - centres[box]
    k = np.arange(_SERIES_TERMS)
    upow = u[:, None] ** k[None, :]  # N x K
    base = w * np.exp(-0.5 * u * u)
    inv_fact = np.array([1.0 / math.factorial(int(i)) for i in k])
    total = 0.0
    for a in range(starts.size):
        sl = slice(starts[a], ends[a])
        delta = centres[a] - centres  # per box b
        near = np.abs(delta) < 40.0  # exp(-39^2/2) underflows anyway
        delta = np.where(near, delta, 0.0)
        # moments of box a against every box b: K x B
        ea = np.exp(-np.outer(u[sl], delta))  # |A| x B
        ma = (upow[sl] * base[sl, None]).T @ ea
        # moments of every box b against box a
        eb = base * np.exp(delta[box] * u)
        mb = np.zeros((_SERIES_TERMS, starts.size))
        mb[:, :] = np.add.reduceat(upow * eb[:, None], starts, axis=0).T
        pair = np.where(near, np.exp(-0.5 * delta * delta) * (inv_fact @ (ma * mb)), 0.0)
        total += float(pair.sum())
    return total


def mmd_1d(x, y, spec: DivergenceSpec) -> float:
    """Biased (V-statistic) Gaussian-kernel MMD, not yet raised to p."""
    xs, ys = _canonical(x, y)
    if spec.mmd_bandwidth is None:
        h = mean_pairwise_distance(np.concatenate([xs, ys]))
        if h == 0.0:
            raise DivergenceError("degenerate bandwidth: all pooled values are identical")
    else:
        h = float(spec.mmd_bandwidth)
    if xs.size == ys.size and np.array_equal(xs, ys):
        return 0.0
    n, m = xs.size, ys.size
    z = np.concatenate([xs, ys])
    w = np.concatenate([np.full(n, 1.0 / n), np.full(m, -1.0 / m)])
    bracket = gaussian_kernel_quadratic_form(z, w, h)
    return math.sqrt(max(bracket, 0.0))


def base_divergence(x, y, spec: DivergenceSpec) -> float:
    """D(x, y): W_p, the Sinkhorn divergence, or the MMD."""
    if spec.kind is DivergenceKind.WASSERSTEIN:
        return wasserstein_1d(x, y, spec.p) ** (1.0 / spec.p)
    if spec.kind is DivergenceKind.SINKHORN:
        return sinkhorn_divergence_1d(x, y, spec)
    return mmd_1d(x, y, spec)


def divergence_power(x, y, spec: DivergenceSpec) -> float:
    """D(x, y)^p, the per-direction quantity averaged by the sliced estimator."""
    if spec.kind is DivergenceKind.WASSERSTEIN:
        return wasserstein_1d(x, y, spec.p)
    return base_divergence(x, y, spec) ** spec.p
