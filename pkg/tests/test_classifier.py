"""Classifier tests against an independent scalar oracle.

The oracle below re-derives the per-pixel decision from scratch
(circular hue distance, strict thresholds, Q0.8 weighted test) so the
vectorized path is checked against a second implementation, not itself.
"""

import math

import numpy as np
import pytest

from camtrack.classifier import (
    BinaryMask,
    ClassifierParams,
    HsvMean,
    classify_frame,
    classify_pixel,
    compute_hsv_mean,
    hue_distance,
)
from camtrack.errors import EmptyRegionError
from camtrack.imaging import HsvFrame, Rect


def oracle_bit(h, s, v, mean, params):
    """Scalar re-derivation of the four-test conjunction."""
    dh = abs(h - mean.h)
    dh = min(dh, 256 - dh)
    ds = abs(s - mean.s)
    dv = abs(v - mean.v)
    aq = math.floor(params.alpha * 256 + 0.5)
    bq = math.floor(params.beta * 256 + 0.5)
    gq = math.floor(params.gamma * 256 + 0.5)
    return int(
        dh < params.h_t
        and ds < params.s_t
        and dv < params.v_t
        and aq * dh + bq * ds + gq * dv < params.a_t * 256
    )


def oracle_mask(hsv_data, mean, params):
    h, w = hsv_data.shape[:2]
    out = np.zeros((h, w), dtype=bool)
    for yy in range(h):
        for xx in range(w):
            px = hsv_data[yy, xx]
            out[yy, xx] = oracle_bit(int(px[0]), int(px[1]), int(px[2]), mean, params)
    return out


def random_hsv_frame(rng, width, height):
    data = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
    data[:, :, 0][data[:, :, 1] == 0] = 0  # canonical achromatic form
    return HsvFrame(width, height, data)


def random_params(rng):
    aq = int(rng.integers(0, 257))
    bq = int(rng.integers(0, 257 - aq))
    gq = 256 - aq - bq
    return ClassifierParams(
        h_t=int(rng.integers(1, 129)),
        s_t=int(rng.integers(1, 256)),
        v_t=int(rng.integers(1, 256)),
        a_t=int(rng.integers(1, 129)),
        alpha=aq / 256,
        beta=bq / 256,
        gamma=gq / 256,
    )


class TestHueDistance:
    def test_wraparound(self):
        assert hue_distance(10, 250) == 16

    def test_identity(self):
        assert hue_distance(5, 5) == 0

    def test_antipodal_maximum(self):
        assert hue_distance(0, 128) == 128

    def test_metric_properties(self):
        rng = np.random.default_rng(2)
        triples = rng.integers(0, 256, size=(300, 3))
        for a, b, c in triples.tolist():
            assert hue_distance(a, b) == hue_distance(b, a)
            assert (hue_distance(a, b) == 0) == (a == b)
            assert hue_distance(a, c) <= hue_distance(a, b) + hue_distance(b, c)
            assert 0 <= hue_distance(a, b) <= 128


class TestClassifyPixel:
    def test_exact_match_passes(self):
        mean = HsvMean(100, 150, 200)
        params = ClassifierParams()
        assert classify_pixel((100, 150, 200), mean, params) == 1

    def test_boundary_is_strict(self):
        params = ClassifierParams(h_t=16)
        mean = HsvMean(100, 150, 200)
        assert classify_pixel((116, 150, 200), mean, params) == 0
        assert classify_pixel((115, 150, 200), mean, params) == 1

    def test_equal_thirds_weighting(self):
        # Thirds quantize to 85/85/85 (one ulp short of 256, accepted).
        # Distances (3,3,3), thresholds 4, a_t=4: weighted sum is
        # 3*(85+85+85) = 765 < 1024, so the pixel is accepted.
        params = ClassifierParams(
            h_t=4, s_t=4, v_t=4, a_t=4, alpha=1 / 3, beta=1 / 3, gamma=1 / 3
        )
        mean = HsvMean(100, 100, 100)
        assert classify_pixel((103, 103, 103), mean, params) == 1
        assert oracle_bit(103, 103, 103, mean, params) == 1

    def test_matches_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            params = random_params(rng)
            mean = HsvMean(*rng.integers(0, 256, size=3).tolist())
            pixel = tuple(rng.integers(0, 256, size=3).tolist())
            assert classify_pixel(pixel, mean, params) == oracle_bit(
                *pixel, mean, params
            )


class TestClassifierParams:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ClassifierParams(alpha=0.5, beta=0.5, gamma=0.5)

    def test_thresholds_positive(self):
        with pytest.raises(ValueError):
            ClassifierParams(h_t=0)


class TestClassifyFrame:
    def test_uniform_equal_to_mean_all_ones(self):
        data = np.full((8, 8, 3), 77, np.uint8)
        frame = HsvFrame(8, 8, data)
        mask = classify_frame(frame, HsvMean(77, 77, 77), ClassifierParams())
        assert mask.popcount() == 64

    def test_value_offset_all_zeros(self):
        params = ClassifierParams(v_t=48)
        data = np.full((8, 8, 3), 100, np.uint8)
        data[:, :, 2] = 200  # dv = 100 >= 48 everywhere
        frame = HsvFrame(8, 8, data)
        mask = classify_frame(frame, HsvMean(100, 100, 100), params)
        assert mask.popcount() == 0

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            frame = random_hsv_frame(rng, 32, 32)
            params = random_params(rng)
            mean = HsvMean(*rng.integers(0, 256, size=3).tolist())
            got = classify_frame(frame, mean, params)
            assert np.array_equal(got.bits, oracle_mask(frame.data, mean, params))

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(8)
        frame = random_hsv_frame(rng, 24, 24)
        mean = HsvMean(120, 120, 120)
        base = ClassifierParams(h_t=10, s_t=30, v_t=30, a_t=20)
        count = classify_frame(frame, mean, base).popcount()
        for key in ("h_t", "s_t", "v_t", "a_t"):
            for delta in (1, 10, 50):
                grown = ClassifierParams(
                    **{**base.__dict__, key: getattr(base, key) + delta}
                )
                assert classify_frame(frame, mean, grown).popcount() >= count

    def test_conjunction_implies_component_tests(self):
        rng = np.random.default_rng(10)
        frame = random_hsv_frame(rng, 24, 24)
        params = random_params(rng)
        mean = HsvMean(*rng.integers(0, 256, size=3).tolist())
        bits = classify_frame(frame, mean, params).bits
        for yy, xx in zip(*np.nonzero(bits)):
            h, s, v = frame.data[yy, xx].tolist()
            dh = hue_distance(h, mean.h)
            assert dh < params.h_t
            assert abs(s - mean.s) < params.s_t
            assert abs(v - mean.v) < params.v_t
            weighted = (
                params.alpha_q * dh
                + params.beta_q * abs(s - mean.s)
                + params.gamma_q * abs(v - mean.v)
            )
            assert weighted < params.a_t * 256


class TestBinaryMask:
    def test_shape_validated(self):
        with pytest.raises(ValueError):
            BinaryMask(4, 4, np.zeros((4, 3), bool))

    def test_pbm_export(self, tmp_path):
        mask = BinaryMask(9, 2, np.ones((2, 9), bool))
        path = tmp_path / "mask.pbm"
        mask.to_pbm(path)
        assert path.read_bytes().startswith(b"P4\n9 2\n")


class TestComputeHsvMean:
    def test_uniform_patch(self):
        data = np.zeros((6, 6, 3), np.uint8)
        data[:, :] = (10, 20, 30)
        frame = HsvFrame(6, 6, data)
        assert compute_hsv_mean(frame, Rect(1, 1, 3, 3)) == HsvMean(10, 20, 30)

    def test_arithmetic_mean_rounds_half_up(self):
        data = np.zeros((1, 2, 3), np.uint8)
        data[0, 0] = (0, 10, 20)
        data[0, 1] = (2, 10, 20)
        mean = compute_hsv_mean(HsvFrame(2, 1, data), Rect(0, 0, 2, 1))
        assert mean == HsvMean(1, 10, 20)  # (0+2)/2 = 1 exactly
        data[0, 1] = (1, 10, 20)
        mean = compute_hsv_mean(HsvFrame(2, 1, data), Rect(0, 0, 2, 1))
        assert mean.h == 1  # 0.5 rounds up

    def test_zero_intersection_errors(self):
        frame = HsvFrame(4, 4, np.zeros((4, 4, 3), np.uint8))
        with pytest.raises(EmptyRegionError):
            compute_hsv_mean(frame, Rect(10, 10, 2, 2))

    def test_partial_box_clipped(self):
        data = np.zeros((4, 4, 3), np.uint8)
        data[0, 0] = (8, 8, 8)
        frame = HsvFrame(4, 4, data)
        mean = compute_hsv_mean(frame, Rect(-3, -3, 4, 4))  # only (0,0) inside
        assert mean == HsvMean(8, 8, 8)

    def test_masked_mean_restricts_to_classified(self):
        data = np.zeros((2, 2, 3), np.uint8)
        data[0, 0] = (100, 100, 100)
        data[0, 1] = (200, 200, 200)
        frame = HsvFrame(2, 2, data)
        bits = np.zeros((2, 2), bool)
        bits[0, 0] = True
        mask = BinaryMask(2, 2, bits)
        assert compute_hsv_mean(frame, Rect(0, 0, 2, 1), mask) == HsvMean(100, 100, 100)
        # Empty mask inside the box falls back to all pixels.
        empty = BinaryMask(2, 2, np.zeros((2, 2), bool))
        assert compute_hsv_mean(frame, Rect(0, 0, 2, 1), empty) == HsvMean(150, 150, 150)
