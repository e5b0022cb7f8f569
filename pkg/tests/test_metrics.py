import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from illumkit.core import (
    DEFAULT_THRESHOLDS,
    NO_MASKING,
    EmptySampleError,
    IlluminationMap,
    apply_cast,
    quantize,
)
from illumkit.metrics import (
    ErrorStats,
    EvalReport,
    PerImageResult,
    angular_error,
    angular_error_from_images,
    angular_error_map,
    delta_e76,
    pixel_angular_error,
    psnr,
    ssim,
)
from illumkit.rng import CounterStream
from illumkit.synth import value_noise_texture

from _oracles import angular_degrees, delta_e76_loops, mse_loops

positive_component = st.floats(min_value=1e-3, max_value=1e3)
vectors = st.tuples(positive_component, positive_component, positive_component)


class TestAngularError:
    def test_pinned_examples(self):
        assert angular_error((1, 1, 1), (1, 1, 1)) == pytest.approx(0.0, abs=1e-9)
        assert angular_error((1, 0, 0), (0, 1, 0)) == pytest.approx(90.0, abs=1e-9)
        assert angular_error((1, 1, 0), (1, 0, 0)) == pytest.approx(45.0, abs=1e-9)
        v = np.array([0.6, 0.4, 0.9])
        assert angular_error(v, 3.7 * v) == pytest.approx(0.0, abs=1e-9)

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            angular_error((0, 0, 0), (1, 1, 1))

    @given(vectors, vectors)
    @settings(max_examples=200)
    def test_symmetry(self, a, b):
        assert abs(angular_error(a, b) - angular_error(b, a)) < 1e-12

    @given(vectors, vectors, positive_component, positive_component)
    @settings(max_examples=200)
    def test_scale_invariance(self, a, b, k, m):
        base = angular_error(a, b)
        scaled = angular_error(np.multiply(k, a), np.multiply(m, b))
        assert abs(base - scaled) < 1e-9

    @given(vectors, vectors, vectors)
    @settings(max_examples=200)
    def test_triangle_inequality(self, a, b, c):
        assert angular_error(a, c) <= angular_error(a, b) + angular_error(b, c) + 1e-9

    def test_matches_arccos_oracle(self):
        rng = CounterStream(50)
        for _ in range(200):
            a = rng.uniform(0.01, 1.0, 3)
            b = rng.uniform(0.01, 1.0, 3)
            assert angular_error(a, b) == pytest.approx(angular_degrees(a, b), abs=1e-9)


class TestAngularErrorMap:
    def test_identical_maps(self):
        imap = IlluminationMap(CounterStream(1).uniform(0.1, 1.0, 8, 8, 3))
        grid, stats = angular_error_map(imap, imap)
        assert stats.mean == pytest.approx(0.0, abs=1e-6)
        assert stats.std == pytest.approx(0.0, abs=1e-6)

    def test_uniform_maps_pinned_angle(self):
        gt = IlluminationMap.uniform((1, 1, 1), 6, 6)
        est = IlluminationMap.uniform((1, 1, 0), 6, 6)
        grid, stats = angular_error_map(gt, est)
        expected = angular_degrees((1, 1, 1), (1, 1, 0))  # 35.264..deg
        assert expected == pytest.approx(35.264, abs=1e-3)
        assert np.allclose(grid, expected)
        assert stats.mean == pytest.approx(expected, abs=1e-9)

    def test_half_and_half_statistics(self):
        gt = IlluminationMap.uniform((1, 1, 1), 4, 8)
        data = np.empty((4, 8, 3))
        data[:, :4] = (1, 1, 1)
        rot = math.radians(10.0)
        # vector at exactly 10 degrees from (1,1,1) in the (1,1,1)/(1,0,0) plane
        u = np.array([1, 1, 1]) / np.sqrt(3)
        w = np.array([2, -1, -1]) / np.sqrt(6)
        data[:, 4:] = math.cos(rot) * u + math.sin(rot) * w
        _, stats = angular_error_map(gt, IlluminationMap(data))
        assert stats.mean == pytest.approx(5.0, abs=1e-9)
        assert stats.median == pytest.approx(5.0, abs=1e-9)

    def test_valid_intersection_and_empty(self):
        data = np.ones((4, 4, 3))
        left = np.zeros((4, 4), dtype=bool)
        left[:, :2] = True
        right = ~left
        a = IlluminationMap(data, left)
        b = IlluminationMap(data.copy(), left.copy())
        _, stats = angular_error_map(a, b)
        assert stats.count == 8
        with pytest.raises(EmptySampleError):
            angular_error_map(a, IlluminationMap(data.copy(), right))


class TestAngularFromImages:
    def test_equal_images_zero_error(self):
        img = CounterStream(2).uniform(0.1, 0.9, 8, 8, 3)
        inp = apply_cast(img, (1.5, 1.0, 0.8))
        stats = angular_error_from_images(inp, img, img.copy())
        assert stats.mean == pytest.approx(0.0, abs=1e-9)

    def test_cast_prediction_pinned_angle(self):
        gt = np.full((6, 6, 3), 0.4)
        pred = apply_cast(gt, (1, 1, 2))  # stays below saturation at gray 0.4
        stats = angular_error_from_images(gt, gt, pred)
        expected = angular_degrees((1, 1, 1), (1, 1, 0.5))
        assert stats.mean == pytest.approx(expected, abs=1e-9)
        assert stats.std == pytest.approx(0.0, abs=1e-9)

    def test_saturated_regions_excluded(self):
        gt = CounterStream(3).uniform(0.2, 0.8, 8, 8, 3)
        gt[:2, :2] = 0.999  # beyond tau_sat
        inp = gt.copy()
        stats = angular_error_from_images(inp, gt, gt.copy())
        assert stats.count == 8 * 8 - 4

    def test_quantization_error_masking_effect(self):
        # Quantizing the prediction hurts most near the rails; masking
        # strictly reduces the measured error.
        gt = value_noise_texture(48, 48, CounterStream(4))
        inp = quantize(apply_cast(gt, (1.0, 0.7, 0.4)))
        pred = quantize(gt)
        unmasked = angular_error_from_images(inp, gt, pred, NO_MASKING)
        masked = angular_error_from_images(inp, gt, pred, DEFAULT_THRESHOLDS)
        assert unmasked.mean > 0
        assert masked.mean < unmasked.mean

    def test_pixel_angular_error_direct(self):
        a = np.full((4, 4, 3), 0.5)
        b = apply_cast(a, (1.0, 1.0, 0.5))
        _, stats = pixel_angular_error(a, b)
        assert stats.mean == pytest.approx(angular_degrees((1, 1, 1), (1, 1, 0.5)), abs=1e-9)


class TestPsnr:
    def test_identical_capped_at_100(self):
        img = CounterStream(5).random(8, 8, 3)
        assert psnr(img, img) == pytest.approx(100.0)

    def test_uniform_difference(self):
        a = np.full((8, 8, 3), 0.4)
        assert psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-9)

    def test_matches_loop_oracle(self):
        rng = CounterStream(6)
        a = rng.random(10, 9, 3)
        b = rng.random(10, 9, 3)
        want = 10 * math.log10(1.0 / mse_loops(a, b))
        assert psnr(a, b) == pytest.approx(want, abs=1e-9)

    def test_monotone_in_noise(self):
        base = CounterStream(7).uniform(0.3, 0.7, 12, 12, 3)
        noise = CounterStream(8).uniform(-1, 1, 12, 12, 3)
        values = [psnr(base, base + amp * noise) for amp in (0.01, 0.03, 0.1, 0.2)]
        assert all(x > y for x, y in zip(values, values[1:]))


class TestSsim:
    def test_identical_is_one(self):
        img = CounterStream(9).random(16, 16, 3)
        assert ssim(img, img) == 1.0

    def test_constant_images_closed_form(self):
        a = np.full((16, 16, 3), 0.5)
        b = np.full((16, 16, 3), 0.7)
        closed = (2 * 0.5 * 0.7 + 0.01**2) / (0.5**2 + 0.7**2 + 0.01**2)
        assert ssim(a, b) == pytest.approx(closed, abs=1e-12)

    def test_matches_skimage_reference(self):
        structural_similarity = pytest.importorskip("skimage.metrics").structural_similarity
        luma = np.array([0.299, 0.587, 0.114])
        for seed in range(5):
            rng = CounterStream(20 + seed)
            a = rng.random(24, 31, 3)
            b = np.clip(a + rng.uniform(-0.15, 0.15, 24, 31, 3), 0, 1)
            ref = structural_similarity(
                a @ luma,
                b @ luma,
                gaussian_weights=True,
                sigma=1.5,
                use_sample_covariance=False,
                data_range=1.0,
            )
            assert ssim(a, b) == pytest.approx(ref, abs=1e-4)

    def test_symmetry(self):
        rng = CounterStream(11)
        a = rng.random(16, 16, 3)
        b = rng.random(16, 16, 3)
        assert abs(ssim(a, b) - ssim(b, a)) < 1e-12

    def test_too_small_rejected(self):
        img = np.full((8, 8, 3), 0.5)
        with pytest.raises(ValueError):
            ssim(img, img)


class TestDeltaE:
    def test_identical_zero(self):
        img = CounterStream(12).random(8, 8, 3)
        assert delta_e76(img, img).mean == pytest.approx(0.0, abs=1e-12)

    def test_white_vs_black_is_100(self):
        white = np.ones((4, 4, 3))
        black = np.zeros((4, 4, 3))
        stats = delta_e76(white, black)
        assert stats.mean == pytest.approx(100.0, abs=1e-3)
        assert stats.std == pytest.approx(0.0, abs=1e-9)

    def test_matches_loop_oracle(self):
        rng = CounterStream(13)
        a = rng.random(6, 5, 3)
        b = rng.random(6, 5, 3)
        want = delta_e76_loops(a, b)
        got = delta_e76(a, b)
        assert got.mean == pytest.approx(want.mean(), abs=1e-6)
        assert got.max == pytest.approx(want.max(), abs=1e-6)


class TestStatsAndReport:
    def test_error_stats_fields(self):
        stats = ErrorStats.from_values([0.0, 1.0, 2.0, 3.0, 10.0])
        assert stats.mean == pytest.approx(3.2)
        assert stats.median == 2.0
        assert stats.trimean == pytest.approx((1.0 + 2 * 2.0 + 3.0) / 4.0)
        assert stats.max == 10.0
        assert stats.count == 5
        assert stats.std == pytest.approx(float(np.std([0, 1, 2, 3, 10])))
        with pytest.raises(EmptySampleError):
            ErrorStats.from_values([])

    def test_report_aggregates_recomputable(self, tmp_path):
        rng = CounterStream(14)
        rows = [
            PerImageResult(
                id=f"{i:05d}",
                angular_mean=float(rng.uniform(0, 20)),
                psnr=float(rng.uniform(10, 40)),
                ssim=float(rng.uniform(0.3, 1.0)),
            )
            for i in range(12)
        ]
        report = EvalReport.from_rows(rows)
        again = ErrorStats.from_values([r.angular_mean for r in report.per_image])
        assert report.angular.mean == pytest.approx(again.mean, abs=1e-9)
        assert report.angular.trimean == pytest.approx(again.trimean, abs=1e-9)

        path = tmp_path / "report.json"
        report.write_json(path)
        doc = json.loads(path.read_text())
        assert doc["schema_version"] == 1
        assert doc["count"] == 12
        per_image_means = [row["angular_mean"] for row in doc["per_image"]]
        assert np.mean(per_image_means) == pytest.approx(doc["angular"]["mean"], rel=1e-4)
        # six significant digits, stable key order
        assert list(doc.keys()) == ["schema_version", "count", "angular", "psnr", "ssim", "delta_e", "per_image"]

    def test_csv_round_trip(self, tmp_path):
        rows = [
            PerImageResult("00000", 1.234567, 30.0, 0.9, 2.5),
            PerImageResult("00001", 2.0, 31.0, 0.95, 3.5),
        ]
        report = EvalReport.from_rows(rows)
        path = tmp_path / "rows.csv"
        report.write_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "id,angular_mean,psnr,ssim,delta_e"
        assert lines[1].startswith("00000,1.23457,")
        assert report.delta_e.mean == pytest.approx(3.0)
