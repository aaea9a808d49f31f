import math

import numpy as np
import pytest

from otrack.geometry import (
    BBox,
    Point2,
    area,
    gaussian_score,
    intersect,
    iou,
    occlusion_valid,
    recover_box,
    recover_coordinate,
)


class TestIntersect:
    def test_overlap(self):
        assert intersect(BBox(0, 0, 10, 10), BBox(5, 5, 15, 15)).as_tuple() == (5, 5, 10, 10)

    def test_disjoint(self):
        assert intersect(BBox(0, 0, 10, 10), BBox(20, 20, 30, 30)) is None

    def test_containment(self):
        assert intersect(BBox(0, 0, 10, 10), BBox(2, 2, 8, 8)).as_tuple() == (2, 2, 8, 8)

    def test_touching_edges_are_disjoint(self):
        assert intersect(BBox(0, 0, 10, 10), BBox(10, 0, 20, 10)) is None

    def test_commutative(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a = _random_box(rng)
            b = _random_box(rng)
            ab, ba = intersect(a, b), intersect(b, a)
            assert (ab is None) == (ba is None)
            if ab is not None:
                assert ab == ba

    def test_idempotent_under_containment(self):
        outer = BBox(0, 0, 100, 100)
        inner = BBox(10, 20, 30, 40)
        assert intersect(outer, inner) == inner
        assert intersect(inner, intersect(outer, inner)) == inner


class TestArea:
    def test_square(self):
        assert area(BBox(0, 0, 10, 10)) == 100

    def test_degenerate_zero_width(self):
        assert area(BBox(5, 5, 5, 9)) == 0

    def test_rect(self):
        assert area(BBox(0, 0, 3, 4)) == 12


class TestOcclusionValid:
    def test_full_overlap_of_smaller(self):
        ev = occlusion_valid(BBox(0, 0, 10, 10), BBox(2, 2, 10, 10), tau=0.7)
        assert ev is not None
        assert ev.region.as_tuple() == (2, 2, 10, 10)
        assert (ev.center.x, ev.center.y) == (6, 6)

    def test_half_overlap_rejected(self):
        assert occlusion_valid(BBox(0, 0, 10, 10), BBox(5, 0, 15, 10), tau=0.7) is None

    def test_boundary_is_strict(self):
        # ratio exactly 1.0 at tau=1.0 must be rejected (strict >)
        assert occlusion_valid(BBox(0, 0, 10, 10), BBox(2, 2, 10, 10), tau=1.0) is None

    def test_degenerate_boxes_never_valid(self):
        assert occlusion_valid(BBox(0, 0, 0, 10), BBox(0, 0, 10, 10), tau=0.5) is None

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            a = _random_box(rng)
            b = _random_box(rng)
            ea = occlusion_valid(a, b, 0.7)
            eb = occlusion_valid(b, a, 0.7)
            assert (ea is None) == (eb is None)
            if ea is not None:
                assert ea.region == eb.region

    def test_center_is_region_midpoint(self):
        ev = occlusion_valid(BBox(0, 0, 10, 10), BBox(1, 3, 9, 11), tau=0.5)
        assert ev.center == ev.region.center

    def test_bad_tau(self):
        with pytest.raises(ValueError):
            occlusion_valid(BBox(0, 0, 1, 1), BBox(0, 0, 1, 1), tau=0.0)


class TestGaussianScore:
    def test_peak_at_quantized_center(self):
        region = BBox(3, 5, 43, 45)  # center (23, 25)
        q = Point2(math.floor(23 / 4), math.floor(25 / 4))
        assert gaussian_score(region, q, stride=4) == 1.0

    def test_two_cells_out_matches_scalar_kernel(self):
        region = BBox(0, 0, 40, 40)  # quantized center (20, 20) at stride 1
        s = gaussian_score(region, Point2(22, 20), stride=1, sigma=2.0)
        assert s == pytest.approx(math.exp(-4.0 / 8.0), abs=1e-12)
        assert s == pytest.approx(0.60653, abs=1e-5)

    def test_decays_toward_zero(self):
        region = BBox(0, 0, 40, 40)
        far = gaussian_score(region, Point2(1e6, 1e6), stride=1)
        assert far == 0.0

    def test_in_unit_interval_and_monotone(self):
        region = BBox(0, 0, 30, 50)
        prev = 1.1
        for d in range(0, 30):
            s = gaussian_score(region, Point2(7 + d, 6), stride=4)
            assert 0.0 <= s <= 1.0
            assert s <= prev
            prev = s

    def test_unquantized_center_scores_one(self):
        region = BBox(0, 0, 11, 11)  # continuous center (5.5, 5.5)
        s = gaussian_score(region, Point2(5.5, 5.5), stride=1, quantize=False)
        assert s == 1.0

    def test_bad_stride(self):
        with pytest.raises(ValueError):
            gaussian_score(BBox(0, 0, 1, 1), Point2(0, 0), stride=0.5)


class TestRecoverCoordinate:
    def test_branch1(self):
        assert recover_coordinate(0, 10, 6, 16, z=8) == 0

    def test_branch2(self):
        assert recover_coordinate(4, 10, 0, 16, z=7) == 4

    def test_branch3(self):
        assert recover_coordinate(4, 14, 0, 10, z=7) == 4

    def test_branch4_returns_a1(self):
        assert recover_coordinate(0, 14, 4, 10, z=7) == 0

    def test_malformed_interval(self):
        with pytest.raises(ValueError):
            recover_coordinate(5, 1, 0, 10, 3)

    def test_identity_all_branches_random(self):
        # with z the exact overlap midpoint, every branch returns a1
        rng = np.random.default_rng(7)
        branches = set()
        for _ in range(2000):
            a1 = rng.uniform(-50, 50)
            a2 = a1 + rng.uniform(1, 40)
            b1 = rng.uniform(a1 - 30, a2 + 30)
            b2 = b1 + rng.uniform(1, 40)
            lo, hi = max(a1, b1), min(a2, b2)
            if hi <= lo:
                continue
            z = (lo + hi) / 2
            branches.add((a1 <= b1, a2 <= b2))
            assert recover_coordinate(a1, a2, b1, b2, z) == pytest.approx(a1, abs=1e-9)
        assert len(branches) == 4


class TestRecoverBox:
    def test_exact_recovery_branch1(self):
        assert recover_box(BBox(0, 0, 10, 10), BBox(6, 0, 16, 10), Point2(8, 5)).as_tuple() == (
            0, 0, 10, 10,
        )

    def test_exact_recovery_branch2(self):
        assert recover_box(BBox(4, 0, 10, 10), BBox(0, 0, 16, 10), Point2(7, 5)).as_tuple() == (
            4, 0, 10, 10,
        )

    def test_preserves_predicted_size(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            pred = _random_box(rng)
            nb = _random_box(rng)
            center = intersect(pred, nb)
            if center is None:
                continue
            rec = recover_box(pred, nb, center.center)
            assert rec.width == pytest.approx(pred.width, abs=1e-12)
            assert rec.height == pytest.approx(pred.height, abs=1e-12)

    def test_noiseless_batch_recovers_truth(self):
        # simulator-style oracle: true box, overlapping neighbor, exact center
        rng = np.random.default_rng(13)
        count = 0
        for _ in range(2000):
            true = _random_box(rng)
            # neighbor displaced by less than a box size, guaranteeing overlap
            nx = true.x_l + rng.uniform(-0.9, 0.9) * true.width
            ny = true.y_t + rng.uniform(-0.9, 0.9) * true.height
            nb = BBox(nx, ny, nx + rng.uniform(1, 40), ny + rng.uniform(1, 40))
            region = intersect(true, nb)
            if region is None:
                continue
            rec = recover_box(true, nb, region.center)
            for got, want in zip(rec.as_tuple(), true.as_tuple()):
                assert abs(got - want) < 1e-9
            count += 1
        assert count > 1500


def _random_box(rng) -> BBox:
    x = rng.uniform(-20, 60)
    y = rng.uniform(-20, 60)
    w = rng.uniform(1, 40)
    h = rng.uniform(1, 40)
    return BBox(x, y, x + w, y + h)
