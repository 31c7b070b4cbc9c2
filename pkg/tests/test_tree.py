import json

import numpy as np
import pytest

from polarv import AlphaDistribution, classify, make_bec, make_bsc, polar_pair, transform_report
from polarv.exhaustive import enumerate_transform
from polarv.generators import random_alpha_distribution
from polarv.mc import estimate_level_vbar
from polarv.tree import (
    AtomBudgetError,
    QuantizeConfig,
    bad_fraction_lower_bound,
    c_functional,
    entropy_histogram,
    polar_transform_n,
    polarize_iid,
    quantize,
    quantize_report,
)

# scalar erasure recursion z -> (2z - z^2, z^2), averaged z(1-z) over 2^n indices
BEC_HALF_VBAR = [
    0.25, 0.1875, 0.15234375, 0.1203460693359375, 0.09982631332240999,
    0.08061175251153097, 0.06616810442701934, 0.05435552929541783,
    0.04475971946904378, 0.03685764577144386, 0.03033357092662889,
]


def erasure_probs(z0, n):
    zs = [z0]
    for _ in range(n):
        zs = [2 * z - z * z for z in zs] + [z * z for z in zs]
    return zs


def bitrev(i, n):
    return int(format(i, f"0{n}b")[::-1], 2) if n else 0


def test_order_two_is_polar_pair():
    F1, F2 = make_bsc(0.1), AlphaDistribution([0.2, 0.7], [0.4, 0.6])
    out = polar_transform_n([F1, F2])
    fm, fp = polar_pair(F1, F2)
    assert out[0] == fm and out[1] == fp


def test_bec_order_eight_follows_scalar_recursion():
    out = polar_transform_n([make_bec(0.5)] * 8)
    zs = erasure_probs(0.5, 3)
    for i, F in enumerate(out):
        c = classify(F)
        assert c.is_erasing
        assert c.erasure_probability == pytest.approx(zs[bitrev(i, 3)], abs=1e-14)


def test_bec_first_level():
    trace = polarize_iid(make_bec(0.5), 1)
    assert trace.v_bar[1] == pytest.approx(0.1875, abs=1e-15)
    assert trace.levels[1].d_n == pytest.approx(-0.0625, abs=1e-15)
    assert trace.levels[1].d_n == pytest.approx(-c_functional(make_bec(0.5)), abs=1e-15)
    assert trace.levels[0].d_n is None


def test_bec_ten_levels_match_oracle():
    trace = polarize_iid(make_bec(0.5), 10)
    np.testing.assert_allclose(trace.v_bar, BEC_HALF_VBAR, rtol=0, atol=1e-13)
    assert all(b < a for a, b in zip(trace.v_bar, trace.v_bar[1:]))
    assert max(r.max_atoms for r in trace.levels) <= 3


@pytest.mark.parametrize("eps", [0.1, 0.3, 0.5, 0.9])
def test_c_functional_bec(eps):
    assert c_functional(make_bec(eps)) == pytest.approx(eps**2 * (1 - eps) ** 2, abs=1e-15)


def test_c_functional_extreme_and_oracle():
    assert c_functional(AlphaDistribution.point(0.5)) == 0.0
    assert c_functional(AlphaDistribution([0.0, 1.0], [0.3, 0.7])) == 0.0
    F = make_bsc(0.11)
    assert c_functional(F) == pytest.approx(enumerate_transform(F, F)["cov"], abs=1e-10)


def test_c_functional_bounds():
    rng = np.random.default_rng(21)
    for _ in range(300):
        F = random_alpha_distribution(rng, 6)
        c = c_functional(F)
        assert abs(c - transform_report(F, F).cov_total) <= 1e-10
        assert -1e-12 <= c <= F.varentropy() + 1e-12


@pytest.mark.parametrize("F0", [AlphaDistribution.point(0.5), AlphaDistribution.point(1.0),
                                AlphaDistribution([0.0, 1.0], [0.2, 0.8])])
def test_extreme_input_never_moves(F0):
    trace = polarize_iid(F0, 5)
    assert all(v == 0.0 for v in trace.v_bar)


def test_quantized_three_levels_close_to_exact():
    exact = polarize_iid(make_bsc(0.11), 3)
    quant = polarize_iid(make_bsc(0.11), 3, quantize_cfg=QuantizeConfig(256, 256))
    assert abs(exact.v_bar[3] - quant.v_bar[3]) < 1e-3


def test_quantization_error_shrinks_with_bins():
    exact = polarize_iid(make_bsc(0.11), 6).v_bar[-1]
    errs = [abs(exact - polarize_iid(make_bsc(0.11), 6,
                                     quantize_cfg=QuantizeConfig(32, b)).v_bar[-1])
            for b in (256, 1024, 4096)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_quantize_identity_and_conservation():
    F = make_bsc(0.2)
    assert quantize(F, QuantizeConfig()) is F
    rng = np.random.default_rng(5)
    F = AlphaDistribution._from_raw(rng.random(500), rng.random(500))
    Q, diag = quantize_report(F, QuantizeConfig(max_atoms=16, bin_count=32))
    assert len(Q) <= 32 and diag.atoms_in == 500 and diag.atoms_out == len(Q)
    assert Q.masses.sum() == pytest.approx(1.0, abs=1e-12)
    assert Q.mean() == pytest.approx(F.mean(), abs=1e-12)
    assert abs(diag.delta_h) <= diag.bound_h
    assert abs(diag.delta_v) <= diag.bound_v


def test_merging_equal_atoms_is_lossless():
    F = AlphaDistribution._from_raw(np.array([0.3, 0.3, 0.8]), np.array([0.2, 0.3, 0.5]))
    G = AlphaDistribution([0.3, 0.8], [0.5, 0.5])
    assert F.conditional_entropy() == G.conditional_entropy()
    assert F.varentropy() == G.varentropy()


def test_quantize_config_validation():
    with pytest.raises(ValueError):
        QuantizeConfig(1, 10)
    with pytest.raises(ValueError):
        QuantizeConfig(10, 1)


def _mixed_inputs(rng, N):
    pool = [make_bsc(float(rng.uniform(0, 0.5))) for _ in range(N // 2)]
    pool += [make_bec(float(rng.uniform(0, 1))) for _ in range(N // 4)]
    while len(pool) < N:
        pool.append(random_alpha_distribution(rng, 3))
    rng.shuffle(pool)
    return pool


@pytest.mark.parametrize("N", [4, 8])
def test_heterogeneous_contraction_and_conservation(N):
    rng = np.random.default_rng(N)
    for _ in range(10 if N == 4 else 3):
        inputs = _mixed_inputs(rng, N)
        out = polar_transform_n(inputs)
        v_in = sum(F.varentropy() for F in inputs)
        v_out = sum(F.varentropy() for F in out)
        assert v_out <= v_in + 1e-9
        h_in = sum(F.conditional_entropy() for F in inputs)
        assert sum(F.conditional_entropy() for F in out) == pytest.approx(h_in, abs=1e-8)


def test_transform_n_rejects_bad_length():
    with pytest.raises(ValueError):
        polar_transform_n([make_bsc(0.1)] * 3)
    with pytest.raises(ValueError):
        polar_transform_n([])


def test_iid_order_is_bit_reversal():
    F0 = make_bsc(0.2)
    n = 3
    trace = polarize_iid(F0, n, keep_distributions=True)
    direct = polar_transform_n([F0] * (1 << n))
    for i, F in enumerate(trace.distributions[n]):
        assert F.allclose(direct[bitrev(i, n)], atol=1e-13)


def test_entropy_conservation_and_decrement_identity():
    F0 = make_bsc(0.11)
    trace = polarize_iid(F0, 6, keep_distributions=True)
    h0 = F0.conditional_entropy()
    for rec in trace.levels:
        assert rec.h_sum == pytest.approx((1 << rec.n) * h0, abs=1e-8)
    for n in range(6):
        dists = trace.distributions[n]
        c_mean = np.mean([transform_report(F, F).cov_total for F in dists])
        assert trace.levels[n + 1].d_n == pytest.approx(-c_mean, abs=1e-9)
        assert trace.levels[n + 1].d_n == pytest.approx(
            trace.v_bar[n + 1] - trace.v_bar[n], abs=1e-12)


def test_exact_trace_nonincreasing():
    rng = np.random.default_rng(2)
    for _ in range(5):
        trace = polarize_iid(random_alpha_distribution(rng, 3), 3)
        assert all(b <= a + 1e-9 for a, b in zip(trace.v_bar, trace.v_bar[1:]))


def test_bad_fraction_lower_bound_holds():
    for trace in (polarize_iid(make_bec(0.5), 8), polarize_iid(make_bsc(0.11), 6)):
        for r in trace.levels:
            assert r.p_n_delta >= bad_fraction_lower_bound(r.v_bar, trace.delta) - 1e-12


def test_bec_histogram_polarizes():
    trace = polarize_iid(make_bec(0.5), 10, keep_distributions=True)
    hist = trace.levels[10].entropy_histogram
    assert sum(hist) == 1024
    hs = np.array([F.conditional_entropy() for F in trace.distributions[10]])
    zs = np.array(erasure_probs(0.5, 10))
    np.testing.assert_allclose(hs, zs, atol=1e-12)
    fraction = np.mean((hs < 0.01) | (hs > 0.99))
    assert fraction == np.mean((zs < 0.01) | (zs > 0.99))
    assert fraction > 0.6
    # the extreme cells are narrower than the 0.01 cutoffs
    assert (hist[0] + hist[100]) / 1024 <= fraction


def test_entropy_histogram_cells():
    h = entropy_histogram([0.0, 0.004, 0.006, 0.5, 0.999, 1.0])
    assert len(h) == 101
    assert h[0] == 2 and h[1] == 1 and h[50] == 1 and h[100] == 2


def test_atom_budget_error():
    with pytest.raises(AtomBudgetError, match="quantization"):
        polarize_iid(make_bsc(0.11), 6, max_exact_pairs=1000)


def test_trace_serialization():
    trace = polarize_iid(make_bec(0.3), 3)
    rows = trace.to_csv().splitlines()
    header = rows[0].split(",")
    assert header[:4] == ["n", "v_bar", "d_n", "p_n_delta"] and len(header) == 105
    assert len(rows) == 5
    first = rows[1].split(",")
    assert first[2] == "" and float(first[1]) == pytest.approx(0.21)
    doc = json.loads(trace.to_json())
    assert doc["delta"] == 0.05
    assert [lv["n"] for lv in doc["levels"]] == [0, 1, 2, 3]
    assert doc["levels"][3]["v_bar"] == trace.v_bar[3]


def test_trace_is_reproducible():
    cfg = QuantizeConfig(64, 128)
    a = polarize_iid(make_bsc(0.11), 6, quantize_cfg=cfg).to_csv()
    b = polarize_iid(make_bsc(0.11), 6, quantize_cfg=cfg, n_jobs=2).to_csv()
    assert a == b


def test_fused_kernel_matches_binned_exact_transform():
    from polarv.tree import FUSED_PAIR_THRESHOLD, evolve_pair
    rng = np.random.default_rng(0)
    k = int(np.sqrt(FUSED_PAIR_THRESHOLD)) + 50
    F = AlphaDistribution._from_raw(rng.random(k), rng.random(k))
    cfg = QuantizeConfig(64, 512)
    fused = evolve_pair(F, F, cfg)
    fm, fp = polar_pair(F, F)
    for got, ref in zip(fused, (quantize(fm, cfg), quantize(fp, cfg))):
        assert got.allclose(ref, atol=1e-9)


def test_level_three_matches_sampling_oracle():
    F0 = make_bsc(0.11)
    exact = polarize_iid(F0, 3).v_bar[3]
    est = estimate_level_vbar(F0, 3, n_samples=200_000, seed=5)
    assert abs(est.z_score(exact)) < 4
