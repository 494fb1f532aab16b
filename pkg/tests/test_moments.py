"""Moment accumulation tests against a pure-Python loop oracle."""

import math

import numpy as np
import pytest

from camtrack.classifier import BinaryMask
from camtrack.errors import EmptyRegionError
from camtrack.imaging import Rect
from camtrack.moments import (
    Moments,
    WeightKernel,
    centroid_and_size,
    kernel_weight,
    parallel_moments,
    weighted_moments,
)

UNIFORM = WeightKernel(0.0, 0.0, math.inf)  # weight 256 everywhere


def oracle_weight(x, y, kernel):
    dx = x - kernel.cx
    dy = y - kernel.cy
    u = math.sqrt(dx * dx + dy * dy) / kernel.radius
    f = 1.0 - u if kernel.kind == "linear" else 1.0 - u * u
    return math.floor(256 * f + 0.5) if f > 0 else 0


def oracle_moments(mask, window, kernel):
    """Literal triple-sum over the clamped window."""
    x0, y0 = max(0, window.x), max(0, window.y)
    x1 = min(mask.width, window.right)
    y1 = min(mask.height, window.bottom)
    m00 = m10 = m01 = 0
    for y in range(y0, y1):
        for x in range(x0, x1):
            if mask.bits[y, x]:
                w = oracle_weight(x, y, kernel)
                m00 += w
                m10 += x * w
                m01 += y * w
    return Moments(m00, m10, m01)


def random_case(rng, size=48):
    bits = rng.random((size, size)) < 0.4
    mask = BinaryMask(size, size, bits)
    # Window may overhang the mask but always intersects it.
    x = int(rng.integers(-4, size - 8))
    y = int(rng.integers(-4, size - 8))
    w = int(rng.integers(5, size))
    h = int(rng.integers(5, size))
    window = Rect(x, y, w, h)
    kernel = WeightKernel(
        cx=float(rng.uniform(-4, size + 4)),
        cy=float(rng.uniform(-4, size + 4)),
        radius=float(rng.uniform(size / 4, size * 1.5)),
        kind="linear" if rng.random() < 0.7 else "epanechnikov",
    )
    return mask, window, kernel


class TestKernelWeight:
    def test_center_gets_unit_weight(self):
        k = WeightKernel(5.0, 5.0, 10.0)
        assert kernel_weight((5, 5), k) == 256

    def test_outside_support_is_zero(self):
        k = WeightKernel(0.0, 0.0, 10.0)
        assert kernel_weight((10, 0), k) == 0
        assert kernel_weight((50, 50), k) == 0

    def test_linear_midpoint(self):
        k = WeightKernel(0.0, 0.0, 10.0)
        assert kernel_weight((5, 0), k) == 128

    def test_epanechnikov_midpoint(self):
        k = WeightKernel(0.0, 0.0, 10.0, kind="epanechnikov")
        assert kernel_weight((5, 0), k) == 192  # 256 * (1 - 0.25)

    def test_infinite_radius_uniform(self):
        assert kernel_weight((123, -40), UNIFORM) == 256

    def test_invalid_radius(self):
        with pytest.raises(ValueError):
            WeightKernel(0.0, 0.0, 0.0)


class TestWeightedMoments:
    def test_all_zero_mask(self):
        mask = BinaryMask(8, 8, np.zeros((8, 8), bool))
        m = weighted_moments(mask, Rect(0, 0, 8, 8), UNIFORM)
        assert (m.m00, m.m10, m.m01) == (0, 0, 0)

    def test_single_pixel_full_weight(self):
        bits = np.zeros((8, 10), bool)
        bits[3, 7] = True
        mask = BinaryMask(10, 8, bits)
        m = weighted_moments(mask, Rect(0, 0, 10, 8), UNIFORM)
        assert (m.m00, m.m10, m.m01) == (256, 1792, 768)

    def test_two_by_two_block_centroid(self):
        bits = np.zeros((4, 4), bool)
        bits[0:2, 0:2] = True
        mask = BinaryMask(4, 4, bits)
        m = weighted_moments(mask, Rect(0, 0, 4, 4), UNIFORM)
        assert (m.m10 / m.m00, m.m01 / m.m00) == (0.5, 0.5)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(14)
        for _ in range(40):
            mask, window, kernel = random_case(rng, size=24)
            got = weighted_moments(mask, window, kernel)
            assert got == oracle_moments(mask, window, kernel)

    def test_empty_window_errors(self):
        mask = BinaryMask(8, 8, np.ones((8, 8), bool))
        with pytest.raises(EmptyRegionError):
            weighted_moments(mask, Rect(20, 20, 4, 4), UNIFORM)


class TestParallelMoments:
    def test_single_worker_equals_serial(self):
        rng = np.random.default_rng(16)
        mask, window, kernel = random_case(rng)
        assert parallel_moments(mask, window, kernel, 1) == weighted_moments(
            mask, window, kernel
        )

    @pytest.mark.parametrize("workers", [2, 4, 8, 16])
    def test_bit_exact_across_worker_counts(self, workers):
        rng = np.random.default_rng(18 + workers)
        for _ in range(25):
            mask, window, kernel = random_case(rng)
            assert parallel_moments(mask, window, kernel, workers) == (
                weighted_moments(mask, window, kernel)
            )

    def test_closed_form_all_ones_uniform(self):
        mask = BinaryMask(128, 128, np.ones((128, 128), bool))
        m = parallel_moments(mask, Rect(0, 0, 128, 128), UNIFORM, 8)
        assert m.m00 == 128 * 128 * 256

    def test_more_workers_than_rows(self):
        mask = BinaryMask(16, 3, np.ones((3, 16), bool))
        window = Rect(0, 0, 16, 3)
        assert parallel_moments(mask, window, UNIFORM, 16) == weighted_moments(
            mask, window, UNIFORM
        )

    def test_workers_validated(self):
        mask = BinaryMask(4, 4, np.ones((4, 4), bool))
        with pytest.raises(ValueError):
            parallel_moments(mask, Rect(0, 0, 4, 4), UNIFORM, 0)


class TestMomentProperties:
    def test_translation_equivariance_exact(self):
        rng = np.random.default_rng(20)
        for _ in range(20):
            size, dx, dy = 24, 5, 9
            bits = rng.random((size, size)) < 0.5
            big = np.zeros((size + dy, size + dx), bool)
            big[:size, :size] = bits
            shifted = np.zeros_like(big)
            shifted[dy:, dx:] = bits
            kernel = WeightKernel(10.25, 12.5, 20.0)
            kernel2 = WeightKernel(10.25 + dx, 12.5 + dy, 20.0)
            window = Rect(2, 3, 15, 14)
            m = weighted_moments(
                BinaryMask(size + dx, size + dy, big), window, kernel
            )
            ms = weighted_moments(
                BinaryMask(size + dx, size + dy, shifted),
                window.shifted(dx, dy),
                kernel2,
            )
            # Integer-exact: shifting adds dx*m00 to m10 and dy*m00 to m01.
            assert ms.m00 == m.m00
            assert ms.m10 == m.m10 + dx * m.m00
            assert ms.m01 == m.m01 + dy * m.m00

    def test_centroid_inside_window(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            mask, window, kernel = random_case(rng)
            m = parallel_moments(mask, window, kernel, 4)
            if m.m00 == 0:
                continue
            clamped = window.clamp_to(mask.width, mask.height)
            cx, cy = m.m10 / m.m00, m.m01 / m.m00
            assert clamped.x <= cx <= clamped.right - 1
            assert clamped.y <= cy <= clamped.bottom - 1

    def test_uniform_kernel_degenerates_to_popcount_centroid(self):
        rng = np.random.default_rng(24)
        for _ in range(50):
            bits = rng.random((32, 32)) < 0.3
            if not bits.any():
                continue
            mask = BinaryMask(32, 32, bits)
            m = weighted_moments(mask, Rect(0, 0, 32, 32), UNIFORM)
            ys, xs = np.nonzero(bits)
            assert abs(m.m10 / m.m00 - xs.mean()) < 1e-9
            assert abs(m.m01 / m.m00 - ys.mean()) < 1e-9

    def test_fixed_point_close_to_float_kernel(self):
        rng = np.random.default_rng(26)
        for _ in range(100):
            mask, window, kernel = random_case(rng)
            m = weighted_moments(mask, window, kernel)
            if m.m00 == 0:
                continue
            # Double-precision kernel reference, no Q8.8 quantization.
            x0, y0 = max(0, window.x), max(0, window.y)
            x1, y1 = min(mask.width, window.right), min(mask.height, window.bottom)
            f00 = f10 = f01 = 0.0
            for y in range(y0, y1):
                for x in range(x0, x1):
                    if mask.bits[y, x]:
                        u = math.hypot(x - kernel.cx, y - kernel.cy) / kernel.radius
                        f = 1.0 - u if kernel.kind == "linear" else 1.0 - u * u
                        w = max(0.0, f)
                        f00 += w
                        f10 += x * w
                        f01 += y * w
            if f00 == 0.0:
                continue
            assert abs(m.m10 / m.m00 - f10 / f00) <= 0.5
            assert abs(m.m01 / m.m00 - f01 / f00) <= 0.5


class TestCentroidAndSize:
    def test_lost_target_on_zero_mass(self):
        assert centroid_and_size(Moments(0, 0, 0), Rect(0, 0, 10, 10)) is None

    def test_symmetric_blob_centroid(self):
        bits = np.zeros((9, 9), bool)
        bits[2:7, 2:7] = True
        mask = BinaryMask(9, 9, bits)
        kernel = WeightKernel(4.0, 4.0, 8.0)
        m = weighted_moments(mask, Rect(0, 0, 9, 9), kernel)
        (cx, cy), _ = centroid_and_size(m, Rect(0, 0, 5, 5))
        assert (cx, cy) == (4.0, 4.0)

    def test_direct_formula(self):
        # A = m00/256 = 400, aspect 1, cal 1.2 -> 1.2 * sqrt(400) = 24.
        m = Moments(400 * 256, 0, 0)
        _, (w, h) = centroid_and_size(m, Rect(0, 0, 10, 10), cal=1.2)
        assert (w, h) == (24, 24)

    def test_aspect_preserved(self):
        m = Moments(400 * 256, 0, 0)
        _, (w, h) = centroid_and_size(m, Rect(0, 0, 40, 10), cal=1.0)
        # r = 4: w = sqrt(400*4) = 40, h = sqrt(400/4) = 10.
        assert (w, h) == (40, 10)

    def test_minimum_size_clamp(self):
        m = Moments(4 * 256, 0, 0)
        _, (w, h) = centroid_and_size(m, Rect(0, 0, 10, 10), cal=1.0)
        assert (w, h) == (4, 4)
