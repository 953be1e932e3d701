import numpy as np
import pytest

from pointops.basis import build_basis, project
from pointops.dataset import in_memory_pairs, random_input_image
from pointops.image import intensities, psnr
from pointops.oracle import bin_stats, optimal_tone_curve
from pointops.style import (
    StyleSet,
    ccm_free_params,
    ccm_from_free_params,
    chain_styles,
    enhance_with_style,
    features,
    fit_style,
    interpolate_styles,
    load_style_set,
    predict,
    predict_params,
    save_style_set,
    style_set_from_json,
    style_set_to_json,
)
from pointops.transform import (
    as_color_matrix,
    enhance,
    identity_curve,
    identity_matrix,
    is_monotone_curve,
)
from pointops.image import gamma_bt709

from conftest import random_image


def curves_of(pairs):
    return [optimal_tone_curve(bin_stats(inp, gt)) for inp, gt in pairs]


def fit_from_pairs(pairs, ridge=1e-3, name="style", m=None):
    curves = curves_of(pairs)
    basis = build_basis(curves, min(m or 10, len(curves)))
    return fit_style(pairs, basis, ridge=ridge, name=name)


@pytest.fixture(scope="module")
def consistent_pairs():
    pairs, curve, ccm = in_memory_pairs(12, 48, 48, seed=99)
    return pairs, curve, ccm


@pytest.fixture(scope="module")
def identity_profile():
    rng = np.random.default_rng(5)
    pairs = [(img, img) for img in (random_input_image(rng, 32, 32) for _ in range(6))]
    return fit_from_pairs(pairs, name="identity")


class TestFeatures:
    def test_all_black(self):
        img = np.zeros((4, 4, 3), dtype=np.uint8)
        f = features(img)
        assert f[0] == 1.0 and np.all(f[1:32] == 0.0)
        assert np.all(f[32:35] == 0.0)  # means
        assert np.all(f[38:44] == 0.0)  # percentiles
        assert np.all(f[44:] == 0.0)

    def test_all_white(self):
        img = np.full((4, 4, 3), 255, dtype=np.uint8)
        f = features(img)
        assert f[31] == 1.0
        assert np.all(f[32:35] == 255.0)

    def test_two_gray_populations(self):
        img = np.zeros((2, 4, 3), dtype=np.uint8)
        img[0] = 64
        img[1] = 192
        f = features(img)
        assert f[8] == 0.5 and f[24] == 0.5
        assert np.all(f[32:35] == 128.0)  # means
        assert np.all(f[35:38] == 64.0)  # stds
        assert np.all(f[38:41] == 64.0)  # 5th percentile
        assert np.all(f[41:44] == 192.0)  # 95th percentile

    def test_histogram_normalized(self, rng):
        for _ in range(10):
            f = features(random_image(rng, 9, 7))
            assert abs(f[:32].sum() - 1.0) <= 1e-9
            assert np.all(np.isfinite(f))

    def test_size(self, rng):
        assert features(random_image(rng)).shape == (48,)


class TestCcmParams:
    def test_roundtrip(self):
        ccm = as_color_matrix([[0.8, 0.15, 0.05], [0.1, 0.85, 0.05], [0.2, 0.2, 0.6]])
        again = ccm_from_free_params(ccm_free_params(ccm))
        np.testing.assert_allclose(again, ccm, atol=1e-15)

    def test_rows_sum_to_one_by_construction(self, rng):
        # eps-level regardless of input, far inside the 1e-9 contract
        for _ in range(20):
            ccm = ccm_from_free_params(rng.uniform(-0.5, 0.5, size=6))
            assert np.abs(ccm.sum(axis=1) - 1.0).max() <= 1e-15


class TestFitStyle:
    def test_consistent_style_recoverability(self, consistent_pairs):
        pairs, _, _ = consistent_pairs
        curves = curves_of(pairs)
        basis = build_basis(curves, 10)
        profile = fit_style(pairs, basis, ridge=1e-6)
        # predictions on the training inputs reproduce the oracle targets
        assert profile.fit_rmse <= 1e-3

    def test_single_pair_interpolates_at_zero_ridge(self, consistent_pairs):
        pairs, _, _ = consistent_pairs
        pair = pairs[0]
        curves = curves_of([pair])
        basis = build_basis(curves, 1)
        profile = fit_style([pair], basis, ridge=0.0)
        assert profile.fit_rmse <= 1e-9

    def test_huge_ridge_predicts_mean_target(self, consistent_pairs, rng):
        pairs, _, _ = consistent_pairs
        curves = curves_of(pairs)
        basis = build_basis(curves, 4)
        profile = fit_style(pairs, basis, ridge=1e12)
        # weights collapse to bias-only: every input maps to the mean target
        assert np.abs(profile.coeff_weights[:48]).max() <= 1e-6
        targets = np.array(
            [project(basis, c) for c in curves]
        )
        mean_target = targets.mean(axis=0)
        c_a, k_a = predict_params(profile, pairs[0][0])
        c_b, k_b = predict_params(profile, random_image(rng))
        np.testing.assert_allclose(c_a, c_b, atol=1e-5)
        np.testing.assert_allclose(k_a, k_b, atol=1e-9)
        np.testing.assert_allclose(c_a, mean_target, atol=0.05)

    def test_permutation_invariance(self, consistent_pairs):
        pairs, _, _ = consistent_pairs
        curves = curves_of(pairs)
        basis = build_basis(curves, 6)
        fwd = fit_style(pairs, basis, ridge=1e-3)
        rev = fit_style(pairs[::-1], basis, ridge=1e-3)
        np.testing.assert_allclose(fwd.coeff_weights, rev.coeff_weights, atol=1e-7)
        np.testing.assert_allclose(fwd.ccm_weights, rev.ccm_weights, atol=1e-9)

    def test_empty_pairs_rejected(self, identity_profile):
        with pytest.raises(ValueError, match="at least one"):
            fit_style([], identity_profile.basis)

    def test_negative_ridge_rejected(self, consistent_pairs, identity_profile):
        pairs, _, _ = consistent_pairs
        with pytest.raises(ValueError, match="ridge"):
            fit_style(pairs[:1], identity_profile.basis, ridge=-1.0)


class TestPredict:
    def test_always_feasible(self, consistent_pairs, rng):
        pairs, _, _ = consistent_pairs
        profile = fit_from_pairs(pairs)
        for _ in range(10):
            curve, ccm = predict(profile, random_image(rng))
            assert is_monotone_curve(curve)
            assert np.abs(ccm.sum(axis=1) - 1.0).max() <= 1e-15

    def test_identity_style_is_near_identity(self, identity_profile, rng):
        for _ in range(5):
            img = random_input_image(rng, 32, 32)
            out = enhance_with_style(img, identity_profile)
            assert psnr(out, img) >= 40.0

    def test_deterministic(self, identity_profile, rng):
        img = random_image(rng)
        a = enhance_with_style(img, identity_profile)
        b = enhance_with_style(img, identity_profile)
        assert np.array_equal(a, b)

    def test_brightening_style_brightens(self, rng):
        pairs = []
        for _ in range(8):
            img = random_input_image(rng, 32, 32)
            pairs.append((img, gamma_bt709(img, "encode")))
        profile = fit_from_pairs(pairs, name="brighten")
        img = random_input_image(rng, 32, 32)
        out = enhance_with_style(img, profile)
        assert intensities(out).mean() > intensities(img).mean()


@pytest.fixture(scope="module")
def two_styles():
    rng = np.random.default_rng(17)
    imgs = [random_input_image(rng, 32, 32) for _ in range(8)]
    shift = np.clip(identity_curve() + 60.0, 0.0, 255.0)
    square = identity_curve() ** 2 / 255.0
    pairs_a = [(img, enhance(img, shift, identity_matrix())) for img in imgs]
    pairs_b = [(img, enhance(img, square, identity_matrix())) for img in imgs]
    curves = curves_of(pairs_a) + curves_of(pairs_b)
    basis = build_basis(curves, 10)
    a = fit_style(pairs_a, basis, name="lift")
    b = fit_style(pairs_b, basis, name="crush")
    return a, b


class TestInterpolate:
    def test_endpoints_bit_identical(self, two_styles, rng):
        a, b = two_styles
        img = random_image(rng)
        for t, ref in ((0.0, a), (1.0, b)):
            mixed = interpolate_styles(a, b, t)
            curve_m, ccm_m = predict(mixed, img)
            curve_r, ccm_r = predict(ref, img)
            assert np.array_equal(curve_m, curve_r)
            assert np.array_equal(ccm_m, ccm_r)

    def test_midpoint_coefficients_are_means(self, two_styles, rng):
        a, b = two_styles
        img = random_image(rng)
        mixed = interpolate_styles(a, b, 0.5)
        c_m, k_m = predict_params(mixed, img)
        c_a, k_a = predict_params(a, img)
        c_b, k_b = predict_params(b, img)
        np.testing.assert_allclose(c_m, (c_a + c_b) / 2.0, rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(k_m, (k_a + k_b) / 2.0, rtol=1e-9, atol=1e-12)

    def test_basis_mismatch_rejected(self, two_styles, identity_profile):
        a, _ = two_styles
        with pytest.raises(ValueError, match="different bases"):
            interpolate_styles(a, identity_profile, 0.5)

    def test_t_range_checked(self, two_styles):
        a, b = two_styles
        with pytest.raises(ValueError, match="t must"):
            interpolate_styles(a, b, 1.5)

    def test_chain_order_matters(self, two_styles, rng):
        a, b = two_styles
        img = random_input_image(rng, 32, 32)
        ab = chain_styles(img, [a, b])
        ba = chain_styles(img, [b, a])
        assert not np.array_equal(ab, ba)


class TestChain:
    def test_single_profile_matches_enhance(self, identity_profile, rng):
        img = random_image(rng)
        assert np.array_equal(
            chain_styles(img, [identity_profile]),
            enhance_with_style(img, identity_profile),
        )

    def test_two_identities_stay_close(self, identity_profile, rng):
        img = random_input_image(rng, 32, 32)
        out = chain_styles(img, [identity_profile, identity_profile])
        assert psnr(out, img) >= 35.0

    def test_empty_chain_rejected(self, rng):
        with pytest.raises(ValueError, match="at least one"):
            chain_styles(random_image(rng), [])


class TestStyleSet:
    def test_roundtrip_preserves_predictions(self, tmp_path, identity_profile, rng):
        styles = StyleSet(identity_profile.basis)
        styles.add(identity_profile)
        path = tmp_path / "styles.json"
        save_style_set(styles, path)
        again = load_style_set(path)
        img = random_image(rng)
        c1, k1 = predict(identity_profile, img)
        c2, k2 = predict(again.get("identity"), img)
        assert np.array_equal(c1, c2)
        assert np.array_equal(k1, k2)

    def test_json_schema(self, identity_profile):
        styles = StyleSet(identity_profile.basis)
        styles.add(identity_profile)
        obj = style_set_to_json(styles)
        assert set(obj) == {"basis", "profiles"}
        assert "identity" in obj["profiles"]
        prof = obj["profiles"]["identity"]
        assert set(prof) == {"name", "basis_id", "w_coeff", "w_ccm", "pairs", "ridge", "fit_rmse"}
        rebuilt = style_set_from_json(obj)
        assert rebuilt.names() == ["identity"]

    def test_foreign_basis_rejected(self, identity_profile, consistent_pairs):
        pairs, _, _ = consistent_pairs
        other = fit_from_pairs(pairs, name="other")
        styles = StyleSet(identity_profile.basis)
        with pytest.raises(ValueError, match="different basis"):
            styles.add(other)

    def test_unknown_style(self, identity_profile):
        styles = StyleSet(identity_profile.basis)
        with pytest.raises(KeyError, match="unknown style"):
            styles.get("nope")


class TestHeldOutRecoverability:
    def test_within_one_db_of_upper_bound(self):
        # small-scale preview of the acceptance criterion
        from pointops.oracle import upper_bound

        pairs, _, _ = in_memory_pairs(25, 48, 48, seed=31, noise_sigma=4.0)
        train, test = pairs[:20], pairs[20:]
        profile = fit_from_pairs(train, name="gen")
        style_psnrs = [psnr(enhance_with_style(inp, profile), gt) for inp, gt in test]
        upper_psnrs = [upper_bound(inp, gt).psnr_out for inp, gt in test]
        assert float(np.mean(style_psnrs)) >= float(np.mean(upper_psnrs)) - 1.0
