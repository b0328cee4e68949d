"""Conditional samplers, allocation rules and the estimators.

Oracles:
- truncated-normal mean (phi(a) - phi(b)) / (Phi(b) - Phi(a)) for per-stratum
  projection means
- plain Monte Carlo for full-space consistency of the weighted estimator
- the discarded unweighted scheme is kept as a negative control: it must
  disagree with the truth for correlated directions while the weighted
  estimator agrees
"""
import numpy as np
import pytest

from stratmc import (
    AllZeroSigma,
    DirectionSet,
    EmptyBoundInterval,
    IndexOutOfRange,
    NotOrthogonal,
    RandomStream,
    RankDeficient,
    StratumSpec,
    equal_allocation,
    lhs_estimate,
    normal_cdf,
    normal_inv_cdf,
    optimal_allocation,
    plain_mc_estimate,
    sample_stratum_1d,
    sample_stratum_nonorthogonal,
    sample_stratum_orthogonal,
    stratified_estimate,
    two_stage_estimate,
)


def phi(x):
    return np.exp(-0.5 * np.asarray(x, dtype=float) ** 2) / np.sqrt(2 * np.pi)


def truncated_mean(a, b):
    """E[X | a < X < b] for standard normal X; handles infinite endpoints."""
    pa = 0.0 if np.isinf(a) else phi(a)
    pb = 0.0 if np.isinf(b) else phi(b)
    ca = 0.0 if a == -np.inf else normal_cdf(a)
    cb = 1.0 if b == np.inf else normal_cdf(b)
    return (pa - pb) / (cb - ca)


class TestDirectionSet:
    def test_requires_unit_columns(self):
        with pytest.raises(ValueError):
            DirectionSet(np.array([[2.0], [0.0]]), orthogonal=True)

    def test_orthogonal_flag_checked(self):
        cols = np.column_stack([[1.0, 0.0], [np.sqrt(0.5), np.sqrt(0.5)]])
        with pytest.raises(NotOrthogonal):
            DirectionSet(cols, orthogonal=True)
        ds = DirectionSet(cols, orthogonal=False)
        assert ds.dim == 2 and ds.count == 2

    def test_dependent_columns_rejected(self):
        cols = np.column_stack([[1.0, 0.0], [1.0, 0.0]])
        with pytest.raises(RankDeficient):
            DirectionSet(cols, orthogonal=False)


class TestStratumSpec:
    def test_indices_lexicographic_one_based(self):
        spec = StratumSpec((2, 3))
        assert spec.total == 6
        assert list(spec.indices()) == [(1, 1), (1, 2), (1, 3),
                                        (2, 1), (2, 2), (2, 3)]

    def test_marginal_bounds(self):
        spec = StratumSpec((4,))
        lo, hi = spec.marginal_bounds(0, 1)
        assert lo == -np.inf
        assert hi == pytest.approx(normal_inv_cdf(0.25))
        lo, hi = spec.marginal_bounds(0, 4)
        assert lo == pytest.approx(normal_inv_cdf(0.75))
        assert hi == np.inf

    def test_bad_index(self):
        spec = StratumSpec((4,))
        with pytest.raises(IndexOutOfRange):
            spec.marginal_bounds(0, 0)
        with pytest.raises(IndexOutOfRange):
            spec.marginal_bounds(0, 5)


class TestSample1d:
    def test_membership_strict(self):
        stream = RandomStream(50)
        v = np.array([3.0, 4.0]) / 5.0
        spec = StratumSpec((6,))
        for k in range(1, 7):
            draw = sample_stratum_1d(v, k, 6, stream.child(k), size=2_000)
            lo, hi = spec.marginal_bounds(0, k)
            proj = draw.z @ v
            assert np.all((proj > lo) & (proj < hi))
            assert draw.weight == 1.0
            assert draw.stratum == (k,)

    def test_projection_mean_matches_truncated_normal(self):
        stream = RandomStream(51)
        v = np.array([1.0, 0.0, 0.0])
        spec = StratumSpec((4,))
        n = 40_000
        for k in range(1, 5):
            draw = sample_stratum_1d(v, k, 4, stream.child(k), size=n)
            proj = draw.z @ v
            target = truncated_mean(*spec.marginal_bounds(0, k))
            se = proj.std(ddof=1) / np.sqrt(n)
            assert abs(proj.mean() - target) < 3.5 * se

    def test_unstratified_coordinates_stay_standard_normal(self):
        stream = RandomStream(52)
        v = np.array([1.0, 0.0])
        draw = sample_stratum_1d(v, 1, 8, stream, size=50_000)
        other = draw.z[:, 1]
        assert abs(other.mean()) < 3.5 / np.sqrt(other.size)
        assert abs(other.std(ddof=1) - 1.0) < 0.02

    def test_bad_stratum(self):
        with pytest.raises(IndexOutOfRange):
            sample_stratum_1d(np.array([1.0, 0.0]), 9, 8, RandomStream(0))


class TestSampleOrthogonal:
    def test_quadrant_case(self):
        # identity directions in d=2: stratum (2, 2) is the positive quadrant
        dirs = DirectionSet(np.eye(2), orthogonal=True)
        spec = StratumSpec((2, 2))
        draw = sample_stratum_orthogonal(dirs, (2, 2), spec, RandomStream(53),
                                         size=4_000)
        assert np.all(draw.z > 0.0)

    def test_membership_all_strata(self):
        rng = np.random.default_rng(54)
        base = rng.normal(size=(5, 2))
        q, _ = np.linalg.qr(base)
        dirs = DirectionSet(q, orthogonal=True)
        spec = StratumSpec((3, 4))
        stream = RandomStream(55)
        for i, k in enumerate(spec.indices()):
            draw = sample_stratum_orthogonal(dirs, k, spec, stream.child(i),
                                             size=500)
            for j in range(2):
                lo, hi = spec.marginal_bounds(j, k[j])
                proj = draw.z @ q[:, j]
                assert np.all((proj > lo) & (proj < hi))

    def test_rejects_nonorthogonal_set(self):
        cols = np.column_stack([[1.0, 0.0], [np.sqrt(0.5), np.sqrt(0.5)]])
        ds = DirectionSet(cols, orthogonal=False)
        with pytest.raises(NotOrthogonal):
            sample_stratum_orthogonal(ds, (1, 1), StratumSpec((2, 2)),
                                      RandomStream(0))


class TestSampleNonOrthogonal:
    def dirs45(self, d=3):
        e1 = np.zeros(d)
        e1[0] = 1.0
        e2 = np.zeros(d)
        e2[0] = e2[1] = np.sqrt(0.5)
        return DirectionSet(np.column_stack([e1, e2]), orthogonal=False)

    def test_membership_closed_bounds(self):
        dirs = self.dirs45()
        spec = StratumSpec((3, 3))
        stream = RandomStream(56)
        for i, k in enumerate(spec.indices()):
            draw = sample_stratum_nonorthogonal(dirs, k, spec, stream.child(i),
                                                size=800)
            assert np.all((draw.weight > 0.0) & (draw.weight <= 1.0))
            for j in range(2):
                lo, hi = spec.marginal_bounds(j, k[j])
                proj = draw.z @ dirs.columns[:, j]
                assert np.all((proj >= lo - 1e-9) & (proj <= hi + 1e-9))

    def test_orthant_weight_three_eighths(self):
        # P(z1 > 0 and (z1 + z2)/sqrt(2) > 0) = 1/4 + 1/8 at 45 degrees
        draw = sample_stratum_nonorthogonal(self.dirs45(), (2, 2),
                                            StratumSpec((2, 2)),
                                            RandomStream(57), size=60_000)
        se = draw.weight.std(ddof=1) / np.sqrt(draw.weight.size)
        assert abs(draw.weight.mean() - 0.375) < 3.5 * se

    def test_empty_interval_raises(self):
        # nearly parallel directions: bottom box on e1 makes the top box on
        # e2 unreachable
        theta = np.radians(5.0)
        cols = np.column_stack([[1.0, 0.0], [np.cos(theta), np.sin(theta)]])
        dirs = DirectionSet(cols, orthogonal=False)
        spec = StratumSpec((50, 50))
        with pytest.raises(EmptyBoundInterval):
            sample_stratum_nonorthogonal(dirs, (1, 50), spec, RandomStream(58),
                                         size=100)

    def test_weighted_full_space_consistency(self):
        # summing weighted stratum means over every stratum must reproduce
        # the unconditional expectation
        dirs = self.dirs45()
        spec = StratumSpec((4, 4))
        stream = RandomStream(59)
        per = 2_500
        total, var_acc = 0.0, 0.0
        for i, k in enumerate(spec.indices()):
            draw = sample_stratum_nonorthogonal(dirs, k, spec, stream.child(i),
                                                size=per)
            wg = draw.weight * np.exp(draw.z[:, 0])
            total += wg.mean()
            var_acc += wg.var(ddof=1) / per
        truth = np.exp(0.5)  # E[exp(z1)]
        assert abs(total - truth) < 3.5 * np.sqrt(var_acc)

    def test_unweighted_scheme_is_biased_negative_control(self):
        # treating the sequentially-sampled strata as equiprobable and exact
        # (no weights) must NOT reproduce the truth for correlated
        # directions; this pins down why the weights exist
        dirs = self.dirs45()
        spec = StratumSpec((4, 4))
        stream = RandomStream(60)
        per = 4_000
        naive, naive_var = 0.0, 0.0
        weighted, weighted_var = 0.0, 0.0
        for i, k in enumerate(spec.indices()):
            draw = sample_stratum_nonorthogonal(dirs, k, spec, stream.child(i),
                                                size=per)
            g = np.exp(draw.z[:, 0] + draw.z[:, 1])
            naive += g.mean() / spec.total
            naive_var += g.var(ddof=1) / per / spec.total ** 2
            wg = draw.weight * g
            weighted += wg.mean()
            weighted_var += wg.var(ddof=1) / per
        truth = np.exp(1.0)  # Var(z1 + z2) = 2
        assert abs(weighted - truth) < 3.5 * np.sqrt(weighted_var)
        assert abs(naive - truth) > 5.0 * np.sqrt(naive_var)


class TestAllocation:
    def test_optimal_textbook_split(self):
        plan = optimal_allocation([0.5, 0.5], [1.0, 3.0], 400)
        np.testing.assert_array_equal(plan.n, [100, 300])
        np.testing.assert_allclose(plan.q, [0.25, 0.75])
        assert plan.total == 400

    def test_equal_allocation_largest_remainder(self):
        plan = equal_allocation([1 / 3, 1 / 3, 1 / 3], 10)
        assert plan.n.sum() == 10
        assert sorted(plan.n) == [3, 3, 4]
        plan = equal_allocation([1 / 3, 1 / 3, 1 / 3], 100)
        assert sorted(plan.n) == [33, 33, 34]

    def test_zero_probability_stratum_gets_nothing(self):
        plan = optimal_allocation([0.0, 0.5, 0.5], [2.0, 1.0, 1.0], 100)
        assert plan.n[0] == 0
        assert plan.n.sum() == 100

    def test_zero_sigma_keeps_n_min(self):
        plan = optimal_allocation([0.5, 0.5], [0.0, 1.0], 100, n_min=2)
        np.testing.assert_array_equal(plan.n, [2, 98])

    def test_all_zero_sigma_raises(self):
        with pytest.raises(AllZeroSigma):
            optimal_allocation([0.5, 0.5], [0.0, 0.0], 100)

    def test_optimal_never_worse_than_proportional(self):
        # continuous-allocation variances; Cauchy-Schwarz makes this exact
        rng = np.random.default_rng(61)
        for _ in range(20):
            k = int(rng.integers(2, 20))
            p = rng.random(k)
            p /= p.sum()
            sigma = rng.random(k)
            plan = optimal_allocation(p, sigma, 5_000)
            var_opt = np.sum((p * sigma) ** 2 / plan.q)
            var_prop = np.sum(p * sigma ** 2)
            assert var_opt <= var_prop * (1 + 1e-12)

    def test_counts_respect_n_min_and_total(self):
        rng = np.random.default_rng(62)
        for _ in range(20):
            k = int(rng.integers(2, 30))
            p = rng.random(k)
            p /= p.sum()
            sigma = rng.random(k) + 0.01
            total = int(rng.integers(10 * k, 2000))
            plan = optimal_allocation(p, sigma, total, n_min=2)
            assert plan.n.sum() == total
            assert np.all(plan.n[p > 0] >= 2)


class TestEstimators:
    def v_first(self, d):
        v = np.zeros(d)
        v[0] = 1.0
        return DirectionSet(v[:, None], orthogonal=True)

    def test_constant_payoff_is_exact(self):
        dirs = self.v_first(3)
        spec = StratumSpec((8,))
        plan = equal_allocation(np.full(8, 1 / 8), 800)
        rep = stratified_estimate(lambda z: np.full(z.shape[0], 7.25), dirs,
                                  spec, plan, RandomStream(63))
        assert rep.price == pytest.approx(7.25, abs=1e-14)
        assert rep.variance == pytest.approx(0.0, abs=1e-20)

    def test_linear_payoff_variance_collapses(self):
        # stratifying along v removes all explained variance of g(z) = v.z;
        # the optimal rule then spends the budget on the wide tail strata
        d = 4
        dirs = self.v_first(d)
        spec = StratumSpec((100,))
        n = 50_000
        ev = lambda z: z[:, 0]
        strat = two_stage_estimate(ev, dirs, spec, n, RandomStream(64), "opt")
        mc = plain_mc_estimate(ev, d, n, RandomStream(65))
        assert mc.variance / strat.variance > 1e3

    def test_stratum_means_match_truncated_normal(self):
        dirs = self.v_first(2)
        spec = StratumSpec((8,))
        plan = equal_allocation(np.full(8, 1 / 8), 64_000)
        rep = stratified_estimate(lambda z: z[:, 0], dirs, spec, plan,
                                  RandomStream(66))
        for k in range(1, 9):
            target = truncated_mean(*spec.marginal_bounds(0, k))
            n_k = rep.stratum_counts[k - 1]
            se = rep.stratum_sigmas[k - 1] / np.sqrt(n_k)
            assert abs(rep.stratum_means[k - 1] - target) < 4 * se

    def test_two_stage_opt_concentrates_on_high_sigma_strata(self):
        # relu payoff: deep-negative strata are constant zero, so the
        # optimal rule starves them down to n_min
        dirs = self.v_first(3)
        spec = StratumSpec((10,))
        ev = lambda z: np.maximum(z[:, 0], 0.0)
        rep = two_stage_estimate(ev, dirs, spec, 40_000, RandomStream(67), "opt")
        counts = rep.stratum_counts
        assert counts[0] == 2  # n_min floor in the main stage
        assert counts[-1] > counts[0] * 10
        assert rep.n_samples == 40_000

    def test_two_stage_const_is_equal_split(self):
        dirs = self.v_first(2)
        spec = StratumSpec((5,))
        rep = two_stage_estimate(lambda z: z[:, 0] ** 2, dirs, spec, 1_000,
                                 RandomStream(68), "const")
        np.testing.assert_array_equal(rep.stratum_counts, np.full(5, 200))

    def test_estimate_matches_plain_mc(self):
        # cross-estimator agreement on a smooth payoff
        d = 6
        rng = np.random.default_rng(69)
        v = rng.normal(size=d)
        v /= np.linalg.norm(v)
        dirs = DirectionSet(v[:, None], orthogonal=True)
        ev = lambda z: np.exp(0.3 * z @ v + 0.2 * z[:, 1])
        strat = two_stage_estimate(ev, dirs, StratumSpec((50,)), 50_000,
                                   RandomStream(70), "opt")
        mc = plain_mc_estimate(ev, d, 200_000, RandomStream(71))
        se = np.sqrt(strat.est_variance + mc.est_variance)
        assert abs(strat.price - mc.price) < 3.5 * se

    def test_nonorthogonal_estimator_consistency(self):
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([np.sqrt(0.5), np.sqrt(0.5), 0.0])
        dirs = DirectionSet(np.column_stack([e1, e2]), orthogonal=False)
        spec = StratumSpec((5, 5))
        ev = lambda z: np.exp(z[:, 0])
        plan = equal_allocation(np.full(25, 1 / 25), 50_000)
        rep = stratified_estimate(ev, dirs, spec, plan, RandomStream(72))
        mc = plain_mc_estimate(ev, 3, 200_000, RandomStream(73))
        se = np.sqrt(rep.est_variance + mc.est_variance)
        assert abs(rep.price - mc.price) < 3.5 * se

    def test_threads_do_not_change_results(self):
        dirs = self.v_first(4)
        spec = StratumSpec((16,))
        ev = lambda z: np.maximum(z[:, 0] + 0.1 * z[:, 1], 0.0)
        reps = [two_stage_estimate(ev, dirs, spec, 8_000, RandomStream(74),
                                   "opt", threads=t) for t in (1, 4)]
        assert reps[0].price == reps[1].price
        assert reps[0].variance == reps[1].variance

    def test_report_bookkeeping(self):
        dirs = self.v_first(2)
        spec = StratumSpec((4,))
        plan = equal_allocation(np.full(4, 0.25), 400)
        rep = stratified_estimate(lambda z: z[:, 0], dirs, spec, plan,
                                  RandomStream(75))
        assert rep.n_strata == 4
        assert rep.n_samples == 400
        np.testing.assert_array_equal(rep.stratum_counts, plan.n)
        assert rep.std_error == pytest.approx(np.sqrt(rep.est_variance))
        assert rep.variance == pytest.approx(rep.est_variance * 400)


class TestLhsEstimator:
    def test_additive_payoff_collapses(self):
        d = 5
        ev = lambda z: z.sum(axis=1)
        lhs = lhs_estimate(ev, np.eye(d), 20_000, 20, RandomStream(76))
        mc = plain_mc_estimate(ev, d, 20_000, RandomStream(77))
        assert lhs.variance < mc.variance / 50

    def test_constant_payoff_zero_variance(self):
        rep = lhs_estimate(lambda z: np.full(z.shape[0], 3.0), np.eye(3),
                           3_000, 10, RandomStream(78))
        assert rep.price == pytest.approx(3.0, abs=1e-14)
        assert rep.variance == 0.0

    def test_rotation_must_be_orthogonal(self):
        bad = np.array([[1.0, 0.9], [0.0, 1.0]])
        with pytest.raises(NotOrthogonal):
            lhs_estimate(lambda z: z[:, 0], bad, 1_000, 5, RandomStream(79))

    def test_unbiased_under_rotation(self):
        rng = np.random.default_rng(80)
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        ev = lambda z: np.exp(z[:, 0])
        rep = lhs_estimate(ev, q, 40_000, 20, RandomStream(81))
        se = np.sqrt(rep.est_variance)
        assert abs(rep.price - np.exp(0.5)) < 4 * se
