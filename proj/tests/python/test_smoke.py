import numpy as np
import pytest

import augmentor as aug


def test_version():
    assert aug.__version__


def test_codec_round_trip_lossless():
    table = aug.simulate_linear(40, np.array([2.0, -1.0, 0.5]), 1.0, 3)
    pixels, manifest = aug.encode(table, "exponential", 0.05, 0)
    assert pixels.shape == table.shape
    assert 0.0 <= pixels.min() and pixels.max() <= 1.0
    assert manifest["quantization_bits"] == 0
    back = aug.decode(pixels, manifest)
    np.testing.assert_allclose(back, table, rtol=1e-9, atol=1e-9)


def test_surrogate_identity_at_tiny_strength():
    table = aug.simulate_linear(20, np.array([1.0, 1.0]), 1.0, 1)
    pixels, _ = aug.encode(table)
    out = aug.generate_surrogate(pixels, 0.001, 5)
    np.testing.assert_array_equal(out, pixels)


def test_w1_1d_matches_sorted_difference():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=50), rng.normal(1.0, 1.0, size=50)
    expected = np.mean(np.abs(np.sort(a) - np.sort(b)))
    assert aug.w1_1d(a, b) == pytest.approx(expected, rel=1e-12)


def test_mmd_of_identical_sets_is_zero():
    x = np.random.default_rng(1).normal(size=(30, 2))
    assert aug.mmd(x, x, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_ols_matches_numpy():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(60, 3))
    y = x @ np.array([1.0, -2.0, 0.5]) + 0.3 + rng.normal(size=60)
    fit = aug.fit_ols(x, y)
    design = np.column_stack([np.ones(60), x])
    ref, *_ = np.linalg.lstsq(design, y, rcond=None)
    assert fit["intercept"] == pytest.approx(ref[0], abs=1e-9)
    np.testing.assert_allclose(fit["coefficients"], ref[1:], atol=1e-9)


def test_lasso_large_penalty_zeroes_coefficients():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(50, 4))
    y = x[:, 0] + rng.normal(size=50)
    fit = aug.fit_lasso(x, y, 1e3)
    assert all(c == 0.0 for c in fit["coefficients"])


def test_filter_quantile_keeps_closest():
    rng = np.random.default_rng(4)
    originals = rng.normal(size=(40, 2))
    near = rng.normal(size=(5, 2))
    far = rng.normal(size=(5, 2)) + 8.0
    report = aug.filter_candidates(originals, np.vstack([near, far]), "mmd", "quantile", 0.5)
    assert report["retained_indices"] == [0, 1, 2, 3, 4]


def test_bound_holds_for_absolute_loss():
    rng = np.random.default_rng(5)
    real, synth = rng.uniform(size=200), rng.uniform(size=200) * 0.9
    loss = {"kind": "absolute_linear", "hypothesis": [0.0, 1.0], "bound": 2.0}
    report = aug.bound_check(real, synth, loss, 0.05, 7, 200)
    assert report["holds"]


def test_pipeline_runs_from_dict(tmp_path):
    config = {
        "data_source": {"kind": "simulate_linear", "n": 80, "p": 3, "beta": [2.0, -1.0, 0.5]},
        "strength_grid": {"start": 0.02, "stop": 0.06, "step": 0.02},
        "filter": {"kind": "none"},
        "augmentation_sizes": [0, 20],
        "repetitions": 1,
        "seed": 9,
        "threads": 1,
        "output_dir": str(tmp_path),
    }
    manifest = aug.run_pipeline(config)
    curve = manifest["per_size_curve"]
    assert [p["augmentation_size"] for p in curve] == [0, 20]
    assert curve[0]["mean_error"] == pytest.approx(manifest["baseline_error"])


def test_bad_config_raises():
    with pytest.raises(ValueError):
        aug.run_pipeline({"repetitions": 0})
