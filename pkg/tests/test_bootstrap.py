import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bootsgd.bootstrap import (BootstrapConfig, BootstrapEnsemble, Constant, InverseSqrt,
                               aggregate_type1, aggregate_type2, aggregate_type3,
                               draw_bootstrap_indices, huber_weight, one_step_w_estimate,
                               order_interval, replicate_rng, replicate_sample_sequence,
                               run_bootstrap_sgd, run_sgd)
from bootsgd.datagen import Dataset, generate_dataset, generate_linear_dataset
from bootsgd.losses import LossKind
from bootsgd.models import Linear, ModelState, RbfKernel, predict_batch, sgd_step


def _kernel_config(data, B=5, T=400, loss=LossKind.LEAST_SQUARES, seed=3):
    return BootstrapConfig(B=B, T=T, step_schedule=InverseSqrt(2.0), loss=loss,
                           model=RbfKernel(0.5, data.x), master_seed=seed)


@pytest.fixture(scope="module")
def small():
    return generate_dataset(40, seed=11)


def test_schedules():
    np.testing.assert_allclose(InverseSqrt(2.0).etas(4), [2.0, 2 / math.sqrt(2), 2 / math.sqrt(3), 1.0])
    np.testing.assert_array_equal(Constant(0.1).etas(3), [0.1, 0.1, 0.1])
    with pytest.raises(ValueError):
        InverseSqrt(0.0)
    with pytest.raises(ValueError):
        Constant(-1.0)


def test_config_validation(small):
    spec = RbfKernel(1.0, small.x)
    with pytest.raises(ValueError):
        BootstrapConfig(B=0, T=1, step_schedule=Constant(1.0), loss=LossKind.LEAST_SQUARES, model=spec)
    with pytest.raises(ValueError):
        BootstrapConfig(B=1, T=1, step_schedule=Constant(1.0), loss=LossKind.LEAST_SQUARES,
                        model=spec, m=0)
    cfg = BootstrapConfig(B=2, T=5, step_schedule=Constant(1.0), loss=LossKind.LEAST_SQUARES, model=spec)
    assert cfg.sample_size(40) == 40 and cfg.replace(m=7).sample_size(40) == 7
    assert cfg.describe()["model"] == {"family": "rbf", "sigma": 1.0, "n_anchors": 40}


def test_index_matrix_shape_and_range():
    idx = draw_bootstrap_indices(7, 9, 4, seed=0)
    assert idx.shape == (4, 9)
    assert idx.min() >= 0 and idx.max() < 7


def test_index_matrix_deterministic_and_prefix_stable():
    a = draw_bootstrap_indices(50, 50, 10, seed=42)
    np.testing.assert_array_equal(a, draw_bootstrap_indices(50, 50, 10, seed=42))
    # row b depends only on (seed, b), not on B
    np.testing.assert_array_equal(a[:3], draw_bootstrap_indices(50, 50, 3, seed=42))
    assert not np.array_equal(a, draw_bootstrap_indices(50, 50, 10, seed=43))


def test_index_frequencies_uniform():
    n, m, B = 20, 50, 2000
    idx = draw_bootstrap_indices(n, m, B, seed=5)
    counts = np.bincount(idx.ravel(), minlength=n)
    total = m * B
    sd = math.sqrt(total * (1 / n) * (1 - 1 / n))
    assert np.all(np.abs(counts - total / n) < 4.5 * sd)


def test_hit_count_matches_binomial_law():
    # times example n-1 (0-based) lands in a size-m sample ~ Binomial(m, 1/n)
    n, m, B = 10, 10, 20000
    idx = draw_bootstrap_indices(n, m, B, seed=9)
    hits = (idx == n - 1).sum(axis=1)
    emp = np.bincount(hits, minlength=m + 1) / B
    pmf = np.array([math.comb(m, r) * (n - 1) ** (m - r) / n**m for r in range(m + 1)])
    sd = np.sqrt(pmf * (1 - pmf) / B)
    assert np.all(np.abs(emp - pmf) <= 4 * sd + 1e-12)


def test_sample_sequence_draws_from_bootstrap_sample():
    idx = draw_bootstrap_indices(30, 12, 3, seed=1)
    for b in range(3):
        seq = replicate_sample_sequence(30, 12, 500, seed=1, b=b)
        assert set(seq) <= set(idx[b])


def test_run_is_deterministic_and_thread_invariant(small):
    cfg = _kernel_config(small, B=6)
    e1 = run_bootstrap_sgd(small, cfg)
    e2 = run_bootstrap_sgd(small, cfg, n_jobs=3)
    np.testing.assert_array_equal(e1.coefficients, e2.coefficients)
    np.testing.assert_array_equal(e1.indices, e2.indices)
    np.testing.assert_array_equal(e1.indices, draw_bootstrap_indices(40, 40, 6, cfg.master_seed))


def test_replicates_independent_of_B(small):
    e_small = run_bootstrap_sgd(small, _kernel_config(small, B=2))
    e_big = run_bootstrap_sgd(small, _kernel_config(small, B=5))
    np.testing.assert_array_equal(e_small.coefficients, e_big.coefficients[:2])


def test_matches_brute_force_reference_loop(small):
    cfg = _kernel_config(small, B=3, T=150, loss=LossKind.LOGISTIC_REGRESSION)
    ens = run_bootstrap_sgd(small, cfg)
    etas = cfg.step_schedule.etas(cfg.T)
    for b in range(cfg.B):
        rng = replicate_rng(cfg.master_seed, b)
        idx = rng.integers(0, 40, size=40)
        j = rng.integers(0, 40, size=cfg.T)
        m = ModelState.zeros(cfg.model)
        for t in range(cfg.T):
            i = idx[j[t]]
            m = sgd_step(m, cfg.loss, small.x[i], small.y[i], etas[t], anchor_index=i)
        np.testing.assert_allclose(ens.coefficients[b], m.coefficients, rtol=1e-12, atol=1e-14)


def test_linear_model_run():
    data = generate_linear_dataset(60, 3, seed=4)
    cfg = BootstrapConfig(B=4, T=600, step_schedule=Constant(0.1),
                          loss=LossKind.LOGISTIC_REGRESSION, model=Linear(3))
    ens = run_bootstrap_sgd(data, cfg)
    assert ens.coefficients.shape == (4, 3)
    # fitted direction should correlate with the generating one
    full = run_sgd(data, cfg)
    pred = predict_batch(full, data.x)
    assert np.corrcoef(pred, data.y)[0, 1] > 0.5


def test_validation_errors(small):
    cfg = _kernel_config(small)
    other = generate_dataset(40, seed=12)
    with pytest.raises(ValueError):
        run_bootstrap_sgd(other, cfg)
    with pytest.raises(ValueError):
        run_bootstrap_sgd(small, cfg.replace(loss=LossKind.LOGISTIC_CLASSIFICATION))
    with pytest.raises(ValueError):
        run_bootstrap_sgd(generate_linear_dataset(10, 2, 0), cfg.replace(model=Linear(3)))


def test_type1_equals_type2(small):
    ens = run_bootstrap_sgd(small, _kernel_config(small, B=7))
    grid = np.linspace(0, 33, 300)
    h1 = predict_batch(aggregate_type1(ens), grid)
    np.testing.assert_allclose(h1, aggregate_type2(ens, grid), rtol=0, atol=1e-9)


def test_type3_median_example():
    spec = Linear(1)
    members = [ModelState(spec, [c]) for c in (1.0, 5.0, 2.0)]
    ens = BootstrapEnsemble.from_members(members)
    np.testing.assert_allclose(aggregate_type3(ens, [1.0, -1.0]), [2.0, -2.0])
    np.testing.assert_allclose(aggregate_type2(ens, [3.0]), [8.0])


def test_order_interval_example():
    v = np.array([[5.0], [1.0], [4.0], [2.0], [3.0]])
    lo, hi = order_interval(v, 2, 4)
    assert lo[0] == 2.0 and hi[0] == 4.0
    with pytest.raises(ValueError):
        order_interval(v, 3, 2)
    with pytest.raises(ValueError):
        order_interval(v, 1, 6)


@given(B=st.integers(3, 41), data=st.data())
def test_interval_survives_bounded_corruption(B, data):
    r = data.draw(st.integers(1, (B + 1) // 2))
    s = data.draw(st.integers(max(r, B // 2 + 1), B))
    seed = data.draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    clean = rng.standard_normal((B, 8))
    k = min(r - 1, B - s)
    corrupted = clean.copy()
    for col in range(8):
        who = rng.choice(B, size=k, replace=False)
        corrupted[who, col] = rng.choice([-1e9, 1e9], size=k)
    lo, hi = order_interval(corrupted, r, s)
    assert np.all(lo >= clean.min(axis=0)) and np.all(hi <= clean.max(axis=0))
    assert np.all(lo <= hi)


def test_interval_breaks_beyond_breakdown():
    B, r, s = 11, 3, 9
    clean = np.arange(B, dtype=float)[:, None]
    bad = clean.copy()
    bad[:r] = -1e9  # r corruptions below reach the r-th order statistic
    lo, _ = order_interval(bad, r, s)
    assert lo[0] < clean.min()


def test_w_estimate_equals_mean_when_weights_are_one(small):
    ens = run_bootstrap_sgd(small, _kernel_config(small, B=5))
    ref = run_sgd(small, _kernel_config(small))
    w = one_step_w_estimate(ens, ref, weight=lambda d: 1.0)
    np.testing.assert_array_equal(w.coefficients, aggregate_type1(ens).coefficients)


def test_w_estimate_downweights_outlying_member():
    spec = Linear(2)
    members = [ModelState(spec, c) for c in ([1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [100.0, 0.0])]
    ens = BootstrapEnsemble.from_members(members)
    ref = ModelState.zeros(spec)
    u = huber_weight(ens, ref)
    # distances 1, 1, sqrt2, 100 -> kappa = (1 + sqrt2)/2
    kappa = (1 + math.sqrt(2)) / 2
    assert u(members[0]) == 1.0
    assert u(members[3]) == pytest.approx(kappa / 100)
    w = one_step_w_estimate(ens, ref)
    weights = np.array([1.0, 1.0, kappa / math.sqrt(2), kappa / 100])
    expected = weights @ ens.coefficients / weights.sum()
    np.testing.assert_allclose(w.coefficients, expected)
    assert w.coefficients[0] < aggregate_type1(ens).coefficients[0] / 5


def test_w_estimate_rejects_bad_weights():
    ens = BootstrapEnsemble.from_members([ModelState(Linear(1), [1.0])])
    with pytest.raises(ValueError):
        one_step_w_estimate(ens, ModelState.zeros(Linear(1)), weight=lambda d: 0.0)
    with pytest.raises(ValueError):
        one_step_w_estimate(ens, ModelState.zeros(Linear(2)))


def test_full_train_reference_is_deterministic(small):
    cfg = _kernel_config(small)
    a, b = run_sgd(small, cfg), run_sgd(small, cfg)
    np.testing.assert_array_equal(a.coefficients, b.coefficients)


def test_logistic_median_curve_resists_cauchy_outlier():
    # quick-preset geometry with a bounded-gradient loss: the median stays near the signal
    data = generate_dataset(200, seed=2)
    assert np.max(np.abs(data.y)) > 500
    cfg = BootstrapConfig(B=31, T=50 * 200, step_schedule=InverseSqrt(10.0),
                          loss=LossKind.LOGISTIC_REGRESSION,
                          model=RbfKernel(1 / math.sqrt(20), data.x), master_seed=0)
    h3 = aggregate_type3(run_bootstrap_sgd(data, cfg), np.linspace(0, 33, 256))
    assert np.max(np.abs(h3)) <= 50


def test_dataset_rows_align_with_indices():
    data = Dataset(np.array([0.0, 1.0, 2.0]), np.array([5.0, 6.0, 7.0]))
    assert data[2] == (2.0, 7.0)


def test_visit_frequency_of_last_example():
    n, m, T, B = 25, 25, 1000, 100
    p = 1 / n
    visits = sum(np.count_nonzero(replicate_sample_sequence(n, m, T, seed=77, b=b) == n - 1)
                 for b in range(B))
    # draws within a replicate share one bootstrap sample: the per-replicate rate is
    # Bin(m, p)/m plus within-sample noise
    var = (p * (1 - p) / m + p * (1 - p) / T) / B
    assert abs(visits / (T * B) - p) <= 3 * math.sqrt(var)


def test_hit_count_law_two_points():
    n, m, B = 2, 3, 40000
    hits = (draw_bootstrap_indices(n, m, B, seed=2) == n - 1).sum(axis=1)
    emp = np.bincount(hits, minlength=m + 1) / B
    pmf = np.array([math.comb(m, r) * (n - 1) ** (m - r) / n**m for r in range(m + 1)])
    assert np.all(np.abs(emp - pmf) <= 3 * np.sqrt(pmf * (1 - pmf) / B))


def test_type_equivalence_random_points(small, rng):
    ens = run_bootstrap_sgd(small, _kernel_config(small, B=9))
    x = rng.uniform(0, 33, 1000)
    h1 = predict_batch(aggregate_type1(ens), x)
    assert np.max(np.abs(aggregate_type2(ens, x) - h1)) <= 1e-9
    lin = generate_linear_dataset(50, 2, seed=1)
    cfg = BootstrapConfig(B=6, T=200, step_schedule=Constant(0.2), loss=LossKind.LEAST_SQUARES,
                          model=Linear(2))
    ens = run_bootstrap_sgd(lin, cfg)
    X = rng.standard_normal((1000, 2))
    assert np.max(np.abs(aggregate_type2(ens, X) - predict_batch(aggregate_type1(ens), X))) <= 1e-9


def test_even_B_median_is_midpoint():
    ens = BootstrapEnsemble.from_members([ModelState(Linear(1), [c]) for c in (1.0, 2.0, 4.0, 9.0)])
    assert aggregate_type3(ens, [1.0])[0] == 3.0
