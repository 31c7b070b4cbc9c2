import numpy as np
import pytest

from polarv import AlphaDistribution, make_bec, make_bsc, transform_report
from polarv.generators import random_alpha_distribution
from polarv.mc import (
    SamplingError,
    block_rngs,
    entropy_sample,
    estimate_cov,
    estimate_moments,
    estimate_transform,
    sample_bde,
    transform_sample,
)


def test_same_seed_same_estimate():
    F = make_bsc(0.2)
    a = estimate_cov(F, F, n_samples=20_000, seed=3)
    b = estimate_cov(F, F, n_samples=20_000, seed=3)
    assert a == b
    assert a.n_samples == 20_000 and a.seed == 3
    assert a.std_error == pytest.approx(np.sqrt(a.variance_of_estimator))
    assert estimate_cov(F, F, n_samples=20_000, seed=4).mean != a.mean


def test_blocks_are_independent_of_sharding():
    # each block has its own stream, so drawing blocks in any order gives the same numbers
    F = make_bsc(0.2)
    fwd = [transform_sample(F, F, r, 50)[0].sum() for r in block_rngs(9, 10)]
    rev = [transform_sample(F, F, r, 50)[0].sum() for r in reversed(block_rngs(9, 10))]
    assert fwd == rev[::-1]


def test_bec_entropy_estimate():
    est = estimate_moments(make_bec(0.3), n_samples=10**6, seed=11)["H"]
    assert abs(est.z_score(0.3)) < 3


def test_bsc_varentropy_estimate():
    F = make_bsc(0.11)
    est = estimate_moments(F, n_samples=10**6, seed=12)["V"]
    assert abs(est.z_score(F.varentropy())) < 3


def test_bec_pair_covariance():
    F = make_bec(0.5)
    est = estimate_cov(F, F, n_samples=10**6, seed=13)
    assert abs(est.z_score(0.0625)) < 3


def test_extreme_member_gives_zero_covariance():
    G = AlphaDistribution([0.15, 0.6, 0.9], [0.3, 0.3, 0.4])
    for X in (AlphaDistribution.point(0.5), AlphaDistribution([0.0, 1.0], [0.5, 0.5])):
        est = estimate_cov(X, G, n_samples=200_000, seed=14)
        assert abs(est.mean) <= 3 * est.std_error + 1e-12


def test_random_three_atom_pair_matches_closed_form():
    rng = np.random.default_rng(15)
    F1 = random_alpha_distribution(rng, 3, min_atoms=3, special_rate=0)
    F2 = random_alpha_distribution(rng, 3, min_atoms=3, special_rate=0)
    r = transform_report(F1, F2)
    est = estimate_transform(F1, F2, n_samples=10**6, seed=16)
    ref = {"cov": r.cov_total, "h_minus": r.h_out[0], "h_plus": r.h_out[1],
           "v_minus": r.v_out[0], "v_plus": r.v_out[1]}
    for key, value in ref.items():
        assert abs(est[key].z_score(value)) < 3, key


def test_perfect_gives_zero_entropy():
    rng = np.random.default_rng(0)
    x, a = sample_bde(AlphaDistribution([0.0, 1.0], [0.4, 0.6]), rng, 1000)
    assert np.all(entropy_sample(x, a) == 0.0)
    x1, a1 = sample_bde(make_bsc(0.2), rng)
    assert x1 in (0, 1) and a1 in (0.2, 0.8)


def test_impossible_sample_is_rejected():
    with pytest.raises(SamplingError):
        entropy_sample(np.array([1]), np.array([1.0]))


def test_too_few_samples():
    with pytest.raises(ValueError):
        estimate_cov(make_bsc(0.1), make_bsc(0.1), n_samples=50)


def test_error_shrinks_with_more_samples(record_property):
    # informational: errors at 4n samples should be about half those at n
    F = make_bsc(0.2)
    ref = transform_report(F, F).cov_total
    small = [abs(estimate_cov(F, F, 20_000, seed=s).mean - ref) for s in range(20)]
    large = [abs(estimate_cov(F, F, 80_000, seed=100 + s).mean - ref) for s in range(20)]
    record_property("median_error_ratio", float(np.median(small) / np.median(large)))
    se_small = estimate_cov(F, F, 20_000, seed=0).std_error
    se_large = estimate_cov(F, F, 80_000, seed=0).std_error
    assert se_small / se_large == pytest.approx(2.0, rel=0.25)
