"""Desk-scale self-test criteria.

Ten end-to-end checks covering sampler correctness, the non-orthogonal
weighting scheme, direction-engine identities and angles, price
reproduction, variance-reduction ordering, allocation optimality,
recurrence invariants, output determinism and payoff monotonicity.
The same functions back `stratmc selftest` and tests/test_acceptance.py.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .directions import (
    bs_gradient,
    cir_mean_gradient,
    cir_workspace,
    la_direction_bs,
    la_direction_cir,
    lt_directions_bs,
    lt_directions_cir,
    pca_directions,
)
from .experiment import ExperimentConfig, format_rows, run_experiment
from .gaussian import RandomStream
from .linalg import angle_degrees, gram_schmidt
from .models import (
    bs_basket_g,
    bs_paths,
    cir_euler_path,
    cir_zero_noise_path,
    path_covariance,
    path_factor,
)
from .payoffs import asian_barrier_complete, asian_barrier_expiry, asian_basket
from .presets import (
    basket_params,
    bs_asian_params,
    bs_barrier_params,
    cir_asian_params,
    payoff_for,
)
from .stratify import (
    DirectionSet,
    StratumSpec,
    optimal_allocation,
    plain_mc_estimate,
    sample_stratum_1d,
    sample_stratum_nonorthogonal,
    sample_stratum_orthogonal,
    two_stage_estimate,
)

__all__ = ["Criterion", "CRITERIA", "run_all"]


@dataclass(frozen=True)
class Criterion:
    number: int
    slug: str
    budget_seconds: float
    func: object

    def run(self) -> tuple[bool, str]:
        t0 = time.perf_counter()
        ok, detail = self.func()
        elapsed = time.perf_counter() - t0
        if elapsed > self.budget_seconds:
            ok = False
            detail += f"; exceeded {self.budget_seconds:.0f}s budget"
        return ok, f"{detail} [{elapsed:.1f}s]"


def _fails(checks: list[tuple[bool, str]]) -> tuple[bool, str]:
    bad = [msg for ok, msg in checks if not ok]
    if bad:
        return False, "; ".join(bad)
    return True, "; ".join(msg for _, msg in checks)


# --- 1: sampler membership and conditional covariance -------------------------


def _criterion_1():
    stream = RandomStream(101)
    d = 8
    v = stream.normal(d)
    v /= np.linalg.norm(v)
    n_strata = 8
    spec1 = StratumSpec((n_strata,))
    per = 12_500
    residuals = np.empty((n_strata * per, d))
    member_1d = True
    for k in range(1, n_strata + 1):
        draw = sample_stratum_1d(v, k, n_strata, stream.child(k), size=per)
        lo, hi = spec1.marginal_bounds(0, k)
        proj = draw.z @ v
        member_1d &= bool(np.all((proj > lo) & (proj < hi)))
        residuals[(k - 1) * per:k * per] = draw.z - np.outer(proj, v)
    cov = np.cov(residuals, rowvar=False)
    cov_err = float(np.max(np.abs(cov - (np.eye(d) - np.outer(v, v)))))

    base = stream.normal((d, 2))
    f, _ = gram_schmidt(base.T)
    odirs = DirectionSet(f, orthogonal=True)
    ospec = StratumSpec((4, 4))
    member_orth = True
    for idx, mk in enumerate(ospec.indices()):
        draw = sample_stratum_orthogonal(odirs, mk, ospec, stream.child(100 + idx),
                                         size=500)
        for j in range(2):
            lo, hi = ospec.marginal_bounds(j, mk[j])
            proj = draw.z @ f[:, j]
            member_orth &= bool(np.all((proj > lo) & (proj < hi)))

    e1 = np.zeros(d)
    e1[0] = 1.0
    e2 = np.zeros(d)
    e2[0] = e2[1] = np.sqrt(0.5)
    ndirs = DirectionSet(np.column_stack([e1, e2]), orthogonal=False)
    member_non = True
    for idx, mk in enumerate(ospec.indices()):
        draw = sample_stratum_nonorthogonal(ndirs, mk, ospec,
                                            stream.child(200 + idx), size=500)
        for j, e in enumerate((e1, e2)):
            lo, hi = ospec.marginal_bounds(j, mk[j])
            proj = draw.z @ e
            member_non &= bool(np.all((proj >= lo - 1e-9) & (proj <= hi + 1e-9)))

    return _fails([
        (member_1d, "1-d draws inside declared slabs"),
        (member_orth, "orthogonal draws inside declared boxes"),
        (member_non, "non-orthogonal draws inside declared boxes"),
        (cov_err <= 0.02, f"conditional covariance error {cov_err:.4f} <= 0.02"),
    ])


# --- 2: non-orthogonal weighting against a rejection oracle -------------------


def _criterion_2():
    stream = RandomStream(202)
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([np.sqrt(0.5), np.sqrt(0.5), 0.0])
    dirs = DirectionSet(np.column_stack([e1, e2]), orthogonal=False)
    spec = StratumSpec((4, 4))
    per = 4_000

    strata = list(spec.indices())
    m_z1 = np.empty(len(strata))
    m_exp = np.empty(len(strata))
    m_w = np.empty(len(strata))
    se_z1 = np.empty(len(strata))
    se_exp = np.empty(len(strata))
    se_w = np.empty(len(strata))
    for i, mk in enumerate(strata):
        draw = sample_stratum_nonorthogonal(dirs, mk, spec, stream.child(i),
                                            size=per)
        wz1 = draw.weight * draw.z[:, 0]
        wexp = draw.weight * np.exp(draw.z[:, 0] + draw.z[:, 1])
        m_z1[i], se_z1[i] = wz1.mean(), wz1.std(ddof=1) / np.sqrt(per)
        m_exp[i], se_exp[i] = wexp.mean(), wexp.std(ddof=1) / np.sqrt(per)
        m_w[i], se_w[i] = draw.weight.mean(), draw.weight.std(ddof=1) / np.sqrt(per)

    # oracle: unconditional draws; E[w g | stratum k] drawn stratified equals
    # E[g 1_{box k}] drawn plainly, and E[w] equals the box probability
    n_plain = 4_000_000
    chunk = 1_000_000
    sums = np.zeros((len(strata), 3))
    sq = np.zeros((len(strata), 3))
    ostream = stream.child(10_000)
    bounds = [(spec.marginal_bounds(0, mk[0]), spec.marginal_bounds(1, mk[1]))
              for mk in strata]
    for _ in range(n_plain // chunk):
        z = ostream.normal((chunk, 3))
        p1 = z @ e1
        p2 = z @ e2
        g1 = z[:, 0]
        g2 = np.exp(z[:, 0] + z[:, 1])
        for i, ((lo1, hi1), (lo2, hi2)) in enumerate(bounds):
            ind = (p1 > lo1) & (p1 <= hi1) & (p2 > lo2) & (p2 <= hi2)
            for col, vals in enumerate((g1 * ind, g2 * ind, ind.astype(float))):
                sums[i, col] += vals.sum()
                sq[i, col] += (vals ** 2).sum()
    o_mean = sums / n_plain
    o_se = np.sqrt(np.maximum(sq / n_plain - o_mean ** 2, 0.0) / n_plain)

    ok_z1 = bool(np.all(np.abs(m_z1 - o_mean[:, 0])
                        <= 3 * np.sqrt(se_z1 ** 2 + o_se[:, 0] ** 2)))
    ok_exp = bool(np.all(np.abs(m_exp - o_mean[:, 1])
                         <= 3 * np.sqrt(se_exp ** 2 + o_se[:, 1] ** 2)))
    ok_w = bool(np.all(np.abs(m_w - o_mean[:, 2])
                       <= 3 * np.sqrt(se_w ** 2 + o_se[:, 2] ** 2)))

    # orthant: both projections positive has probability 3/8 at 45 degrees
    ospec = StratumSpec((2, 2))
    draw = sample_stratum_nonorthogonal(dirs, (2, 2), ospec,
                                        stream.child(20_000), size=100_000)
    w_mean = float(draw.weight.mean())
    w_se = float(draw.weight.std(ddof=1) / np.sqrt(draw.weight.size))
    ok_orthant = abs(w_mean - 0.375) <= 3 * w_se

    return _fails([
        (ok_z1, "weighted means of z1 match oracle"),
        (ok_exp, "weighted means of exp(z1+z2) match oracle"),
        (ok_w, "mean weights match oracle box probabilities"),
        (ok_orthant, f"orthant weight {w_mean:.4f} vs 3/8"),
    ])


# --- 3: LA equals the first LT column in BS -----------------------------------


def _criterion_3():
    checks = []
    for label, params in (("asian", bs_asian_params()), ("basket", basket_params())):
        factor = path_factor(params)
        la = la_direction_bs(params, factor)
        lt1 = lt_directions_bs(params, 1, factor).columns[:, 0]
        ang = angle_degrees(la, lt1)
        checks.append((ang <= 1e-8, f"{label}: angle(la, lt1) = {ang:.2e} deg"))
    return _fails(checks)


# --- 4: angle reproduction -----------------------------------------------------


def _criterion_4():
    bs = bs_asian_params()
    la = la_direction_bs(bs)
    pca = pca_directions(path_covariance(bs), 1)[0].columns[:, 0]
    ang_bs = angle_degrees(la, pca)

    cir = cir_asian_params()
    ang_cir = angle_degrees(la_direction_cir(cir),
                            lt_directions_cir(cir, 1).columns[:, 0])
    return _fails([
        (abs(ang_bs - 52.73) <= 1.0,
         f"bs angle(la, pca) = {ang_bs:.4f} vs 52.73 +- 1"),
        (abs(ang_cir - 1.00) <= 0.5,
         f"cir angle(la, lt) = {ang_cir:.4f} vs 1.00 +- 0.5"),
    ])


# --- 5: price reproduction at desk scale ---------------------------------------


def _price_check(label, evaluator, dim, stream, target, half_ulp,
                 n_samples=100_000):
    rep = plain_mc_estimate(evaluator, dim, n_samples, stream)
    # combine our SE with the SE of the reference run (2e6 draws) and allow
    # half an ulp of the printed value
    se_ref = np.sqrt(rep.variance / 2_000_000)
    tol = 3.0 * np.sqrt(rep.est_variance + se_ref ** 2) + half_ulp
    ok = abs(rep.price - target) <= tol
    return rep, (ok, f"{label}: {rep.price:.4f} vs {target} (tol {tol:.4f})")


def _criterion_5():
    stream = RandomStream(23)
    checks = []

    asian = bs_asian_params()
    factor = path_factor(asian)
    for i, (strike, target) in enumerate([(45.0, 7.02), (50.0, 4.02), (55.0, 2.06)]):
        spec = payoff_for(asian, strike)
        ev = (lambda sp: lambda z: sp.discount * np.maximum(
            bs_basket_g(z, asian, factor) - sp.strike, 0.0))(spec)
        _, chk = _price_check(f"bs K={strike:g}", ev, asian.dim,
                              stream.child(i), target, 0.005)
        checks.append(chk)

    barrier = bs_barrier_params()
    bfactor = path_factor(barrier)
    spec_e = payoff_for(barrier, 50.0, "asian-barrier-expiry", 60.0)
    spec_c = payoff_for(barrier, 50.0, "asian-barrier-complete", 60.0)
    ev_e = lambda z: asian_barrier_expiry(bs_paths(z, barrier, bfactor), spec_e)
    ev_c = lambda z: asian_barrier_complete(bs_paths(z, barrier, bfactor), spec_c)
    _, chk = _price_check("barrier-expiry", ev_e, barrier.dim,
                          stream.child(10), 1.38, 0.005)
    checks.append(chk)
    _, chk = _price_check("barrier-complete", ev_c, barrier.dim,
                          stream.child(11), 1.22, 0.005)
    checks.append(chk)

    basket = basket_params()
    kfactor = path_factor(basket)
    spec_b = payoff_for(basket, 40.0)
    ev_b = lambda z: spec_b.discount * np.maximum(
        bs_basket_g(z, basket, kfactor) - spec_b.strike, 0.0)
    _, chk = _price_check("basket K=40", ev_b, basket.dim,
                          stream.child(12), 4.15, 0.005)
    checks.append(chk)

    cir = cir_asian_params()
    spec_k = payoff_for(cir, 100.0)
    ev_k = lambda z: asian_basket(cir_euler_path(z, cir), spec_k)
    rep, chk = _price_check("cir K=100", ev_k, cir.n_steps,
                            stream.child(13), 10.6, 0.05)
    checks.append(chk)
    checks.append((abs(rep.variance - 310.0) <= 31.0,
                   f"cir var {rep.variance:.1f} vs 310 +- 10%"))
    return _fails(checks)


# --- 6: variance-reduction ordering --------------------------------------------


def _criterion_6():
    stream = RandomStream(606)
    n_samples, n_strata = 100_000, 100
    spec1 = StratumSpec((n_strata,))

    bs = bs_asian_params()
    factor = path_factor(bs)
    pay = payoff_for(bs, 50.0)
    ev = lambda z: pay.discount * np.maximum(
        bs_basket_g(z, bs, factor) - pay.strike, 0.0)
    mc = plain_mc_estimate(ev, bs.dim, n_samples, stream.child(0))
    la_set = DirectionSet(la_direction_bs(bs, factor)[:, None], orthogonal=True)
    pca_set = pca_directions(path_covariance(bs), 1)[0]
    la = two_stage_estimate(ev, la_set, spec1, n_samples, stream.child(1), "opt")
    pca = two_stage_estimate(ev, pca_set, spec1, n_samples, stream.child(2), "opt")
    ratio_bs = mc.variance / la.variance

    cir = cir_asian_params()
    pay_c = payoff_for(cir, 100.0)
    ev_c = lambda z: asian_basket(cir_euler_path(z, cir), pay_c)
    mc_c = plain_mc_estimate(ev_c, cir.n_steps, n_samples, stream.child(3))
    la_c_set = DirectionSet(la_direction_cir(cir)[:, None], orthogonal=True)
    la_c = two_stage_estimate(ev_c, la_c_set, spec1, n_samples,
                              stream.child(4), "opt")
    ratio_cir = mc_c.variance / la_c.variance

    return _fails([
        (ratio_bs >= 100.0, f"bs var(mc)/var(la-opt) = {ratio_bs:.0f} >= 100"),
        (la.variance < pca.variance < mc.variance,
         f"ordering la {la.variance:.3g} < pca {pca.variance:.3g} "
         f"< mc {mc.variance:.3g}"),
        (ratio_cir >= 100.0, f"cir var(mc)/var(la-opt) = {ratio_cir:.0f} >= 100"),
    ])


# --- 7: allocation optimality ----------------------------------------------------


def _criterion_7():
    rng = np.random.default_rng(707)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(2, 40))
        p = rng.random(k) + 1e-3
        p /= p.sum()
        sigma = rng.random(k) * rng.integers(0, 2, k)  # allow zero sigmas
        if not np.any(p * sigma > 0):
            sigma[0] = 1.0
        plan = optimal_allocation(p, sigma, 10_000, n_min=2)
        live = sigma > 0
        var_opt = float(np.sum((p[live] * sigma[live]) ** 2 / plan.q[live]))
        var_prop = float(np.sum(p[live] * sigma[live] ** 2))
        worst = max(worst, var_opt - var_prop * (1 + 1e-12))
    ok = worst <= 0.0
    return ok, f"max(var_opt - var_prop) = {worst:.3e} over 100 instances"


# --- 8: recurrence invariants and gradients ---------------------------------------


def _criterion_8():
    cir = cir_asian_params()
    stream = RandomStream(808)
    checks = []

    exact = True
    for trial in range(5):
        zhat = 0.5 * stream.normal(cir.n_steps)
        ws = cir_workspace(cir, zhat)
        exact &= ws.t[-1] == ws.beta[-1]
        lhs = ws.w[:, 1:]  # lhs[m, j] is w[m, j+1]
        rhs = ws.w[:, :-1] * ws.alpha[None, :]
        rows, cols = np.indices(lhs.shape)
        valid = cols >= rows  # recurrence propagates right of the diagonal seed
        exact &= bool(np.all(lhs[valid] == rhs[valid]))
    checks.append((exact, "t_N == beta_{N-1} and w recurrence exact"))

    skel = cir_zero_noise_path(cir)
    euler = cir_euler_path(np.zeros(cir.n_steps), cir).values[0, :]
    err = float(np.max(np.abs(euler - skel[1:]) / np.abs(skel[1:])))
    checks.append((err <= 1e-12, f"zero-noise closed form rel err {err:.2e}"))

    bs = bs_asian_params()
    factor = path_factor(bs)
    h = 1e-5
    dim = bs.dim
    eps = np.vstack([np.eye(dim) * h, -np.eye(dim) * h])
    g_vals = bs_basket_g(eps, bs, factor)
    fd = (g_vals[:dim] - g_vals[dim:]) / (2 * h)
    grad = bs_gradient(bs, np.zeros(dim), factor)
    rel_bs = float(np.linalg.norm(fd - grad) / np.linalg.norm(grad))
    checks.append((rel_bs < 1e-5, f"bs gradient vs FD rel err {rel_bs:.2e}"))

    h = 1e-6
    n = cir.n_steps
    eps = np.vstack([np.eye(n) * h, -np.eye(n) * h])
    sums = cir_euler_path(eps, cir).values[:, 0, :].sum(axis=1)
    fd_c = (sums[:n] - sums[n:]) / (2 * h)
    grad_c = cir_mean_gradient(cir, np.zeros(n))
    rel_cir = float(np.linalg.norm(fd_c - grad_c) / np.linalg.norm(grad_c))
    checks.append((rel_cir < 1e-4, f"cir gradient vs FD rel err {rel_cir:.2e}"))
    return _fails(checks)


# --- 9: determinism across thread counts ------------------------------------------


def _criterion_9():
    def run(threads: int) -> str:
        config = ExperimentConfig(
            model="bs", bs=bs_asian_params(),
            payoffs=[payoff_for(bs_asian_params(), 50.0)],
            methods=["mc", "la", "lhs"], allocs=["opt"],
            strata=20, n_samples=20_000, lhs_replications=10,
            seed=909, threads=threads)
        return format_rows(run_experiment(config), "csv")

    a, b = run(1), run(3)
    if a == b:
        return True, "csv identical for --threads 1 and --threads 3"
    return False, "csv differs across thread counts"


# --- 10: barrier monotonicity -------------------------------------------------------


def _criterion_10():
    params = bs_barrier_params()
    stream = RandomStream(1010)
    eps = stream.normal((10_000, params.dim))
    paths = bs_paths(eps, params, path_factor(params))
    plain_spec = payoff_for(params, 50.0)
    e_spec = payoff_for(params, 50.0, "asian-barrier-expiry", 60.0)
    c_spec = payoff_for(params, 50.0, "asian-barrier-complete", 60.0)
    plain = asian_basket(paths, plain_spec)
    expiry = asian_barrier_expiry(paths, e_spec)
    complete = asian_barrier_complete(paths, c_spec)
    violations = int(np.sum(complete > expiry) + np.sum(expiry > plain))
    ok = violations == 0
    return ok, f"{violations} ordering violations over 10000 paths"


CRITERIA = (
    Criterion(1, "sampler-membership-covariance", 10.0, _criterion_1),
    Criterion(2, "nonorthogonal-oracle", 30.0, _criterion_2),
    Criterion(3, "la-equals-lt1-bs", 10.0, _criterion_3),
    Criterion(4, "angle-reproduction", 1.0, _criterion_4),
    Criterion(5, "price-reproduction", 120.0, _criterion_5),
    Criterion(6, "variance-reduction-ordering", 120.0, _criterion_6),
    Criterion(7, "allocation-optimality", 10.0, _criterion_7),
    Criterion(8, "recurrences-and-gradients", 10.0, _criterion_8),
    Criterion(9, "thread-determinism", 60.0, _criterion_9),
    Criterion(10, "barrier-monotonicity", 10.0, _criterion_10),
)


def run_all(numbers=None) -> list[tuple[Criterion, bool, str]]:
    results = []
    for crit in CRITERIA:
        if numbers and crit.number not in numbers:
            continue
        ok, detail = crit.run()
        results.append((crit, ok, detail))
    return results
