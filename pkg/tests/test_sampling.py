import math
from decimal import ROUND_CEILING, Decimal, getcontext

import numpy as np
import pytest

from bosonbin import rng as rng_policy
from bosonbin.binning import make_partition
from bosonbin.distribution import full_distribution
from bosonbin.linalg import haar_unitary_from_seed, identity_unitary
from bosonbin.sampling import (
    ALIAS_METHOD_THRESHOLD,
    SamplePlan,
    chernoff_sample_size,
    draw_outcomes,
    empirical_binned,
    estimate_mpb,
    total_variation,
)


def decimal_sample_size(num_bins, epsilon, delta, eta, gamma):
    """High-precision reimplementation of the plan formula (50 digits)."""
    getcontext().prec = 50
    eps, dlt, eta_, gam = (Decimal(str(v)) for v in (epsilon, delta, eta, gamma))
    val = 3 * num_bins / (eps - dlt) ** 2 * (2 * (1 - gam) / (eta_ - gam)).ln()
    return int(val.to_integral_value(rounding=ROUND_CEILING))


@pytest.mark.parametrize(
    "num_bins,epsilon,delta,eta,gamma,n_min",
    [
        (2, 0.1, 0.05, 0.05, 0.01, 9365),
        (4, 0.1, 0.05, 0.05, 0.01, 18730),
        (3, 0.2, 0.0, 0.1, 0.0, 675),
        (8, 0.05, 0.01, 0.02, 0.005, 73318),
        (2, 0.1, 0.0, 0.05, 0.0, 2214),
        (16, 0.3, 0.1, 0.2, 0.05, 3047),
    ],
)
def test_chernoff_sample_size_pinned(num_bins, epsilon, delta, eta, gamma, n_min):
    plan = chernoff_sample_size(num_bins, epsilon, delta, eta, gamma)
    assert plan.n_min == n_min
    assert plan.n_min == decimal_sample_size(num_bins, epsilon, delta, eta, gamma)
    assert plan.num_bins == num_bins
    assert plan.epsilon == epsilon


def test_chernoff_scales_linearly_in_bins():
    base = chernoff_sample_size(2, 0.1, 0.05, 0.05, 0.01)
    for d in (4, 6, 8):
        scaled = chernoff_sample_size(d, 0.1, 0.05, 0.05, 0.01)
        assert scaled.n_min == pytest.approx(base.n_min * d / 2, abs=1)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(num_bins=1, epsilon=0.1, delta=0.0, eta=0.05, gamma=0.0),
        dict(num_bins=2.5, epsilon=0.1, delta=0.0, eta=0.05, gamma=0.0),
        dict(num_bins=2, epsilon=0.1, delta=0.1, eta=0.05, gamma=0.0),
        dict(num_bins=2, epsilon=0.1, delta=0.2, eta=0.05, gamma=0.0),
        dict(num_bins=2, epsilon=1.0, delta=0.0, eta=0.05, gamma=0.0),
        dict(num_bins=2, epsilon=0.1, delta=-0.01, eta=0.05, gamma=0.0),
        dict(num_bins=2, epsilon=0.1, delta=0.0, eta=0.05, gamma=0.05),
        dict(num_bins=2, epsilon=0.1, delta=0.0, eta=0.05, gamma=0.06),
        dict(num_bins=2, epsilon=0.1, delta=0.0, eta=1.0, gamma=0.0),
        dict(num_bins=2, epsilon=0.1, delta=0.0, eta=0.05, gamma=-0.01),
    ],
)
def test_chernoff_rejects_bad_budgets(kwargs):
    with pytest.raises(ValueError):
        chernoff_sample_size(**kwargs)


@pytest.fixture(scope="module")
def haar_dist():
    u = haar_unitary_from_seed(8, 6)
    return full_distribution(u, (1, 1, 0, 0, 0, 0, 0, 0))


def test_draw_outcomes_counts_sum_to_runs(haar_dist):
    counts = draw_outcomes(haar_dist, 5000, rng_policy.generator(1))
    assert counts.shape == (haar_dist.space.size,)
    assert counts.dtype == np.int64
    assert int(counts.sum()) == 5000
    assert np.all(counts >= 0)


def test_draw_outcomes_deterministic_per_seed(haar_dist):
    a = draw_outcomes(haar_dist, 2000, rng_policy.generator(7))
    b = draw_outcomes(haar_dist, 2000, rng_policy.generator(7))
    c = draw_outcomes(haar_dist, 2000, rng_policy.generator(8))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_draw_outcomes_auto_is_cumulative_below_threshold(haar_dist):
    assert haar_dist.space.size < ALIAS_METHOD_THRESHOLD
    a = draw_outcomes(haar_dist, 1000, rng_policy.generator(3), method="auto")
    b = draw_outcomes(haar_dist, 1000, rng_policy.generator(3), method="cumulative")
    assert np.array_equal(a, b)


@pytest.mark.parametrize("method", ["cumulative", "alias"])
def test_draw_outcomes_converges_in_total_variation(haar_dist, method):
    runs = 200_000
    counts = draw_outcomes(haar_dist, runs, rng_policy.generator(11), method=method)
    tv = total_variation(counts / runs, haar_dist.probabilities)
    # expected TV at this run count is about 0.005; 4x headroom
    assert tv < 0.02


def test_draw_outcomes_point_mass():
    dist = full_distribution(identity_unitary(5), (0, 2, 0, 1, 0))
    counts = draw_outcomes(dist, 100, rng_policy.generator(0))
    assert int(counts[dist.space.index_of((0, 2, 0, 1, 0))]) == 100


def test_draw_outcomes_input_checks(haar_dist):
    with pytest.raises(ValueError):
        draw_outcomes(haar_dist, 0, rng_policy.generator(1))
    with pytest.raises(ValueError):
        draw_outcomes(haar_dist, 10, rng_policy.generator(1), method="metropolis")


def test_empirical_binned_aggregates_counts(haar_dist):
    counts = draw_outcomes(haar_dist, 3000, rng_policy.generator(5))
    part = make_partition(haar_dist.space.size, 4)
    emp = empirical_binned(counts, part)
    assert emp.runs == 3000
    for label in range(4):
        lo, hi = part.offsets[label], part.offsets[label + 1]
        assert emp.counts[label] == int(counts[lo:hi].sum())
    assert emp.frequencies.sum() == pytest.approx(1.0, abs=1e-12)


def test_empirical_binned_shape_check():
    part = make_partition(10, 2)
    with pytest.raises(ValueError, match="expected counts"):
        empirical_binned(np.zeros(11, dtype=np.int64), part)


def test_estimate_mpb_uses_plan_and_is_deterministic(haar_dist):
    part = make_partition(haar_dist.space.size, 4)
    plan = chernoff_sample_size(4, 0.1, 0.0, 0.05, 0.0)
    r1, emp1 = estimate_mpb(haar_dist, part, plan, rng_policy.generator(42))
    r2, emp2 = estimate_mpb(haar_dist, part, plan, rng_policy.generator(42))
    assert emp1.runs == plan.n_min
    assert np.array_equal(emp1.counts, emp2.counts)
    assert r1 == r2
    assert r1.p0 == pytest.approx(float(emp1.frequencies.max()), rel=1e-14)


def test_estimate_mpb_matches_exact_winner_when_gap_is_wide():
    # exact gap 0.0898 at 4 bins; a plan resolving 0.02 should hit label 2
    u = haar_unitary_from_seed(11, 11)
    dist = full_distribution(u, (1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0))
    part = make_partition(dist.space.size, 4)
    plan = chernoff_sample_size(4, 0.02, 0.0, 0.05, 0.0)
    result, emp = estimate_mpb(dist, part, plan, rng_policy.generator(12345))
    assert result.label == 2
    assert not result.tie_flag
    assert emp.runs == plan.n_min


def test_estimate_mpb_tie_threshold_is_resolvable_accuracy(haar_dist):
    part = make_partition(haar_dist.space.size, 4)
    # epsilon - delta = 0.5 exceeds any possible frequency gap here
    plan = chernoff_sample_size(4, 0.6, 0.1, 0.05, 0.0)
    result, _ = estimate_mpb(haar_dist, part, plan, rng_policy.generator(9))
    assert result.tie_flag


def test_estimate_mpb_bin_count_mismatch(haar_dist):
    part = make_partition(haar_dist.space.size, 4)
    plan = chernoff_sample_size(2, 0.1, 0.0, 0.05, 0.0)
    with pytest.raises(ValueError, match="bins"):
        estimate_mpb(haar_dist, part, plan, rng_policy.generator(1))


def test_sample_plan_is_frozen():
    plan = chernoff_sample_size(2, 0.1, 0.0, 0.05, 0.0)
    assert isinstance(plan, SamplePlan)
    with pytest.raises(AttributeError):
        plan.n_min = 1


def test_total_variation_basics():
    p = np.array([0.5, 0.5, 0.0])
    q = np.array([0.0, 0.0, 1.0])
    assert total_variation(p, p) == 0.0
    assert total_variation(p, q) == pytest.approx(1.0)
    assert total_variation(p, np.array([0.25, 0.75, 0.0])) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        total_variation(p, np.array([0.5, 0.5]))


def test_total_variation_symmetry():
    rng = rng_policy.generator(77)
    p = rng.random(20)
    p /= p.sum()
    q = rng.random(20)
    q /= q.sum()
    assert total_variation(p, q) == total_variation(q, p)
    assert 0.0 <= total_variation(p, q) <= 1.0
