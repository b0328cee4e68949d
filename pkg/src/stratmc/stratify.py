"""Conditional Gaussian samplers for strata defined by linear projections,
allocation rules, and the stratified / plain / LHS estimators.

Strata are slabs of standard-normal space: for a direction set with columns
e_1..e_d' and per-direction interval counts K_1..K_d', stratum (k_1..k_d')
collects the z with e_i . z in the k_i-th marginal quantile interval.  For
orthogonal directions the strata are equiprobable with p_k = 1/prod(K_j) and
draws carry weight 1.  For non-orthogonal directions the joint probability of
a box is unknown; draws are generated through sequentially conditioned
coordinates on the Gram-Schmidt frame and carry the product of conditional
interval probabilities as a likelihood weight, which replaces the p_k factor
in the estimator.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import (
    AllZeroSigma,
    EmptyBoundInterval,
    IndexOutOfRange,
    NotOrthogonal,
)
from .gaussian import RandomStream, stratum_uniform
from .gaussian import lhs_normals as _lhs_normals
from .linalg import gram_schmidt

__all__ = [
    "DirectionSet",
    "StratumSpec",
    "StratifiedDraw",
    "AllocationPlan",
    "EstimateReport",
    "sample_stratum_1d",
    "sample_stratum_orthogonal",
    "sample_stratum_nonorthogonal",
    "optimal_allocation",
    "equal_allocation",
    "stratified_estimate",
    "two_stage_estimate",
    "plain_mc_estimate",
    "lhs_estimate",
]

_P_FLOOR = np.nextafter(0.0, 1.0)
_P_CEIL = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class DirectionSet:
    """d' unit direction columns in R^d, plus an orthogonality flag."""

    columns: np.ndarray
    orthogonal: bool = False

    def __post_init__(self):
        cols = np.atleast_2d(np.asarray(self.columns, dtype=float))
        if cols.ndim != 2:
            raise ValueError("columns must form a 2-d array")
        object.__setattr__(self, "columns", cols)
        norms = np.linalg.norm(cols, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("direction columns must have unit norm")
        if self.orthogonal:
            gram = cols.T @ cols
            if np.max(np.abs(gram - np.eye(self.count))) > 1e-10:
                raise NotOrthogonal("columns are not orthonormal")
        else:
            gram_schmidt(cols.T)  # raises RankDeficient on dependence

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    @property
    def count(self) -> int:
        return self.columns.shape[1]


@dataclass(frozen=True)
class StratumSpec:
    """Per-direction interval counts; marginal intervals are equiprobable."""

    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in np.atleast_1d(self.counts))
        if any(c < 1 for c in counts):
            raise ValueError("interval counts must be >= 1")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(np.prod(self.counts))

    def indices(self):
        """All stratum multi-indices (1-based), last direction fastest."""
        for idx in np.ndindex(*self.counts):
            yield tuple(i + 1 for i in idx)

    def marginal_bounds(self, direction: int, k: int) -> tuple[float, float]:
        """Quantile interval (a^-, a^+) of stratum k along one direction."""
        n = self.counts[direction]
        if not 1 <= k <= n:
            raise IndexOutOfRange(f"stratum {k} outside 1..{n}")
        lo = -np.inf if k == 1 else float(ndtri((k - 1) / n))
        hi = np.inf if k == n else float(ndtri(k / n))
        return lo, hi


@dataclass
class StratifiedDraw:
    """Sampled standard-normal points with stratum index and weight.

    z has shape (n, d) for a batch of n draws; weight is 1.0 for orthogonal
    strata and an (n,)-array of conditional box probabilities otherwise.
    """

    z: np.ndarray
    stratum: tuple[int, ...]
    weight: np.ndarray | float = 1.0


@dataclass
class AllocationPlan:
    """Stratum probabilities p_k, fractions q_k and integer counts n_k."""

    p: np.ndarray
    q: np.ndarray
    n: np.ndarray
    total: int

    def __post_init__(self):
        if abs(float(np.sum(self.q)) - 1.0) > 1e-12:
            raise ValueError("allocation fractions must sum to 1")
        if int(np.sum(self.n)) != self.total:
            raise ValueError("integer counts must sum to the total")


@dataclass
class EstimateReport:
    """Price estimate with variance bookkeeping.

    `variance` is the single-draw-equivalent value n_used * Var(estimator),
    directly comparable with a plain-MC sample variance; `est_variance` is
    the variance of the estimator itself.
    """

    price: float
    variance: float
    est_variance: float
    wall_time: float
    n_samples: int
    n_strata: int
    stratum_means: np.ndarray | None = None
    stratum_sigmas: np.ndarray | None = None
    stratum_counts: np.ndarray | None = None
    stratum_empty: np.ndarray | None = field(default=None, repr=False)

    @property
    def std_error(self) -> float:
        return float(np.sqrt(max(self.est_variance, 0.0)))


# --- samplers ----------------------------------------------------------------


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    return v


def sample_stratum_1d(v, k: int, n_strata: int, stream: RandomStream,
                      size: int = 1) -> StratifiedDraw:
    """Draw z | v.z in the k-th of n_strata equiprobable slabs.

    V = (k-U)/K, X = Phi^{-1}(V), and the residual is completed in O(d):
    z = v X + (Z' - v (v . Z')).
    """
    v = _unit(v)
    vv = stratum_uniform(k, n_strata, stream, size=size)
    x = ndtri(vv)
    zp = stream.normal((size, v.size))
    z = zp - np.outer(zp @ v, v) + np.outer(x, v)
    return StratifiedDraw(z=z, stratum=(k,), weight=1.0)


def sample_stratum_orthogonal(dirs: DirectionSet, k: tuple[int, ...],
                              spec: StratumSpec, stream: RandomStream,
                              size: int = 1) -> StratifiedDraw:
    """Draw z with each orthogonal projection pinned to its interval."""
    cols = dirs.columns
    gram = cols.T @ cols
    if np.max(np.abs(gram - np.eye(dirs.count))) > 1e-8:
        raise NotOrthogonal("direction columns deviate from orthonormality")
    if len(k) != dirs.count or len(spec.counts) != dirs.count:
        raise IndexOutOfRange("stratum index arity mismatch")
    x = np.empty((size, dirs.count))
    for j in range(dirs.count):
        vv = stratum_uniform(k[j], spec.counts[j], stream, size=size)
        x[:, j] = ndtri(vv)
    zp = stream.normal((size, dirs.dim))
    z = zp - (zp @ cols) @ cols.T + x @ cols.T
    return StratifiedDraw(z=z, stratum=tuple(k), weight=1.0)


def sample_stratum_nonorthogonal(dirs: DirectionSet, k: tuple[int, ...],
                                 spec: StratumSpec, stream: RandomStream,
                                 size: int = 1) -> StratifiedDraw:
    """Draw z with every (possibly correlated) projection in its box.

    The direction set E is orthonormalized to a frame F; coordinate i along
    f_i is drawn from the normal restricted to the sequential interval
    (a_i^- - s_i, a_i^+ - s_i) / ||f'_i|| with s_i the shift contributed by
    the already-drawn coordinates.  Each draw's weight is the product of the
    conditional interval probabilities; the joint box probability is never
    needed because the weights absorb it in the estimator.

    Raises EmptyBoundInterval when a conditional interval has numerically
    zero probability (an unreachable corner: callers assign the stratum zero
    draws and zero contribution).
    """
    e = dirs.columns
    d, dp = e.shape
    if len(k) != dp or len(spec.counts) != dp:
        raise IndexOutOfRange("stratum index arity mismatch")
    f, _ = gram_schmidt(e.T)
    m = e.T @ f  # lower triangular; m[i, i] = ||f'_i||
    x = np.empty((size, dp))
    weight = np.ones(size)
    for i in range(dp):
        a_lo, a_hi = spec.marginal_bounds(i, k[i])
        shift = x[:, :i] @ m[i, :i]
        ta_lo = (a_lo - shift) / m[i, i]
        ta_hi = (a_hi - shift) / m[i, i]
        p_lo = ndtr(ta_lo)
        width = ndtr(ta_hi) - p_lo
        if np.any(width <= 0.0):
            raise EmptyBoundInterval(
                f"stratum {tuple(k)}: conditional interval {i} has zero probability")
        u = stream.uniform_open(size=size)
        p = np.clip(p_lo + u * width, _P_FLOOR, _P_CEIL)
        x[:, i] = np.clip(ndtri(p), ta_lo, ta_hi)
        weight *= width
    zp = stream.normal((size, d))
    z = zp - (zp @ f) @ f.T + x @ f.T
    return StratifiedDraw(z=z, stratum=tuple(k), weight=weight)


# --- allocation --------------------------------------------------------------


def _largest_remainder(q: np.ndarray, total: int, n_min: int,
                       active: np.ndarray) -> np.ndarray:
    """Integerize fractions q*total, keeping the sum exact and n >= n_min
    on active strata (inactive strata get 0)."""
    target = np.where(active, q * total, 0.0)
    n = np.floor(target).astype(int)
    short = total - int(n.sum())
    if short > 0:
        order = np.argsort(-(target - n), kind="stable")
        order = order[active[order]]
        n[order[:short]] += 1
    low = active & (n < n_min)
    n[low] = n_min
    surplus = int(n.sum()) - total
    while surplus > 0:
        i = int(np.argmax(np.where(active & (n > n_min), n, -1)))
        if n[i] <= n_min:
            raise ValueError("total too small for n_min per stratum")
        take = min(surplus, n[i] - n_min)
        n[i] -= take
        surplus -= take
    return n


def optimal_allocation(p, sigma_hat, n_total: int, n_min: int = 2) -> AllocationPlan:
    """Counts n_k proportional to p_k * sigma_k (the variance-minimizing rule).

    Strata with p_k == 0 are treated as unreachable and get zero draws;
    strata with sigma_hat == 0 still get n_min so stage two can correct a
    lucky pilot.
    """
    p = np.asarray(p, dtype=float)
    s = np.asarray(sigma_hat, dtype=float)
    if np.any(p < 0.0) or float(p.sum()) > 1.0 + 1e-9:
        raise ValueError("stratum probabilities must be >= 0 and sum to <= 1")
    if np.any(s < 0.0):
        raise ValueError("sigma estimates must be >= 0")
    active = p > 0.0
    w = p * s
    if not np.any(w > 0.0):
        raise AllZeroSigma("every stratum std estimate is zero")
    q = w / w.sum()
    n = _largest_remainder(q, n_total, n_min, active)
    return AllocationPlan(p=p, q=q, n=n, total=n_total)


def equal_allocation(p, n_total: int, n_min: int = 2) -> AllocationPlan:
    """Equal counts across reachable strata (the constant allocation rule;
    identical to proportional allocation when strata are equiprobable)."""
    p = np.asarray(p, dtype=float)
    active = p > 0.0
    k_active = int(active.sum())
    if k_active == 0:
        raise ValueError("no reachable strata")
    q = np.where(active, 1.0 / k_active, 0.0)
    n = _largest_remainder(q, n_total, n_min, active)
    return AllocationPlan(p=p, q=q, n=n, total=n_total)


# --- estimators ---------------------------------------------------------------


def _run_strata(worker, n_strata: int, threads: int):
    """Evaluate worker(k) for k in 0..K-1, storing results by index so the
    reduction order (hence the float result) is independent of scheduling."""
    results = [None] * n_strata
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for k, res in zip(range(n_strata), pool.map(worker, range(n_strata))):
                results[k] = res
    else:
        for k in range(n_strata):
            results[k] = worker(k)
    return results


def stratified_estimate(evaluator, directions: DirectionSet, spec: StratumSpec,
                        plan: AllocationPlan, stream: RandomStream,
                        threads: int = 1) -> EstimateReport:
    """Single-stage stratified estimator over every stratum in spec.

    Orthogonal directions: estimate = sum_k p_k * mean_k and the estimator
    variance is sum_k p_k^2 s_k^2 / n_k.  Non-orthogonal: the draws carry
    weights, estimate = sum_k mean(weight * g) with no p_k factor, and the
    variance uses the within-stratum sample variance of weight * g.

    Stratum k consumes substream stream.child(k), so results are identical
    for any thread count.
    """
    t0 = time.perf_counter()
    multi = list(spec.indices())
    n_strata = spec.total
    if plan.n.shape[0] != n_strata:
        raise ValueError("allocation plan does not match stratum spec")
    orthogonal = directions.orthogonal or directions.count == 1

    def worker(k: int):
        n_k = int(plan.n[k])
        if n_k <= 0:
            return 0.0, 0.0, 0, False
        sub = stream.child(k)
        try:
            if orthogonal:
                draw = sample_stratum_orthogonal(directions, multi[k], spec, sub,
                                                 size=n_k)
                vals = np.asarray(evaluator(draw.z), dtype=float)
            else:
                draw = sample_stratum_nonorthogonal(directions, multi[k], spec, sub,
                                                    size=n_k)
                vals = np.asarray(evaluator(draw.z), dtype=float) * draw.weight
        except EmptyBoundInterval:
            return 0.0, 0.0, 0, True
        mean = float(vals.mean())
        sd = float(vals.std(ddof=1)) if n_k > 1 else 0.0
        return mean, sd, n_k, False

    rows = _run_strata(worker, n_strata, threads)
    means = np.array([r[0] for r in rows])
    sigmas = np.array([r[1] for r in rows])
    counts = np.array([r[2] for r in rows], dtype=int)
    empty = np.array([r[3] for r in rows], dtype=bool)

    used = counts > 0
    if orthogonal:
        price = float(np.sum(plan.p[used] * means[used]))
        est_var = float(np.sum(
            (plan.p[used] * sigmas[used]) ** 2 / counts[used]))
    else:
        price = float(np.sum(means[used]))
        est_var = float(np.sum(sigmas[used] ** 2 / counts[used]))
    n_used = int(counts.sum())
    return EstimateReport(
        price=price,
        variance=est_var * n_used,
        est_variance=est_var,
        wall_time=time.perf_counter() - t0,
        n_samples=n_used,
        n_strata=n_strata,
        stratum_means=means,
        stratum_sigmas=sigmas,
        stratum_counts=counts,
        stratum_empty=empty,
    )


def two_stage_estimate(evaluator, directions: DirectionSet, spec: StratumSpec,
                       n_total: int, stream: RandomStream,
                       allocation: str = "opt", pilot_fraction: float = 0.1,
                       n_min: int = 2, threads: int = 1) -> EstimateReport:
    """Stratified estimate under the constant or the two-stage optimal rule.

    "const": every reachable stratum gets an equal share of n_total in one
    stage.  "opt": a pilot stage (pilot_fraction of the budget, equal
    allocation) estimates the per-stratum stds, the remaining budget is
    allocated proportionally to p_k * sigma_hat_k, and the reported price
    and variance come from the main stage alone.  n_samples reports the
    full budget either way.
    """
    t0 = time.perf_counter()
    n_strata = spec.total
    # equiprobable marginals make orthogonal strata exactly uniform; for
    # non-orthogonal strata the joint probability is unknown and a uniform
    # surrogate makes the optimal rule reduce to n_k proportional to sigma_k
    p = np.full(n_strata, 1.0 / n_strata)

    if allocation == "const":
        plan = equal_allocation(p, n_total, n_min=n_min)
        report = stratified_estimate(evaluator, directions, spec, plan,
                                     stream.child(1), threads=threads)
        report.wall_time = time.perf_counter() - t0
        return report
    if allocation != "opt":
        raise ValueError(f"unknown allocation rule: {allocation!r}")

    n_pilot = max(int(round(pilot_fraction * n_total)), n_min * n_strata)
    n_main = n_total - n_pilot
    if n_main < n_min * n_strata:
        raise ValueError("budget too small for a two-stage run")
    pilot_plan = equal_allocation(p, n_pilot, n_min=n_min)
    pilot = stratified_estimate(evaluator, directions, spec, pilot_plan,
                                stream.child(1), threads=threads)
    p_eff = np.where(pilot.stratum_empty, 0.0, p)
    plan = optimal_allocation(p_eff, pilot.stratum_sigmas, n_main, n_min=n_min)
    report = stratified_estimate(evaluator, directions, spec, plan,
                                 stream.child(2), threads=threads)
    report.n_samples = pilot.n_samples + report.n_samples
    report.variance = report.est_variance * (report.n_samples)
    report.wall_time = time.perf_counter() - t0
    return report


def plain_mc_estimate(evaluator, dim: int, n_total: int, stream: RandomStream,
                      chunk: int = 200_000) -> EstimateReport:
    """Plain Monte Carlo baseline; variance is the single-draw sample variance."""
    t0 = time.perf_counter()
    if n_total < 2:
        raise ValueError("need at least two draws")
    vals = np.empty(n_total)
    done = 0
    while done < n_total:
        m = min(chunk, n_total - done)
        z = stream.normal((m, dim))
        vals[done:done + m] = evaluator(z)
        done += m
    var1 = float(vals.var(ddof=1))
    return EstimateReport(
        price=float(vals.mean()),
        variance=var1,
        est_variance=var1 / n_total,
        wall_time=time.perf_counter() - t0,
        n_samples=n_total,
        n_strata=1,
    )


def lhs_estimate(evaluator, rotation: np.ndarray, n_total: int,
                 replications: int, stream: RandomStream,
                 threads: int = 1) -> EstimateReport:
    """Latin Hypercube estimator on rotated coordinates.

    Each replication evaluates the payoff on rotation @ L^T for an
    independent LHS matrix L; the price is the grand mean and the variance
    is estimated across replication means, reported in single-draw units
    (var of means times the per-replication size).
    """
    t0 = time.perf_counter()
    rotation = np.asarray(rotation, dtype=float)
    d = rotation.shape[0]
    if rotation.shape != (d, d) or \
            np.max(np.abs(rotation.T @ rotation - np.eye(d))) > 1e-8:
        raise NotOrthogonal("rotation matrix is not orthogonal")
    if replications < 2:
        raise ValueError("need at least two replications")
    n_rep = n_total // replications
    if n_rep < 2:
        raise ValueError("budget too small for the replication count")

    def worker(r: int) -> float:
        lhs = _lhs_normals(n_rep, d, stream.child(r))
        return float(np.mean(evaluator(lhs @ rotation.T)))

    means = np.array(_run_strata(worker, replications, threads))
    var_rep = float(means.var(ddof=1))
    n_used = n_rep * replications
    return EstimateReport(
        price=float(means.mean()),
        variance=var_rep * n_rep,
        est_variance=var_rep / replications,
        wall_time=time.perf_counter() - t0,
        n_samples=n_used,
        n_strata=1,
    )
