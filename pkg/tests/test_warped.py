import numpy as np
import pytest

from curvcert.catalog import round_sphere
from curvcert.dsl import Num, parse
from curvcert.errors import HypothesisViolated, NotFound
from curvcert.geometry import sample_points
from curvcert.submersion import CanonicalVariation
from curvcert.warped import (
    WarpedProduct, find_shift, mixed_block_residual, warped_metric,
    warped_ricci, warped_ricci_closed_form,
)


@pytest.fixture()
def sphere_pair():
    return round_sphere(2, 1.0), round_sphere(2, 1.0)


def warp_points(w, rng, count=4):
    lo = w.manifold().domain[:, 0]
    hi = w.manifold().domain[:, 1]
    return [rng.uniform(0.3 * lo, 0.3 * hi) for _ in range(count)]


class TestWarpedRicci:
    @pytest.mark.parametrize("a", [0.0, -1.0, 2.0])
    def test_engine_matches_closed_form(self, sphere_pair, a, rng):
        base, fiber = sphere_pair
        f = parse("0.4*cos(x1)", ["x0", "x1"])
        w = WarpedProduct(base=base, fiber=fiber, f=f, a=a)
        for p in warp_points(w, rng):
            num = warped_ricci(w, p)
            ref = warped_ricci_closed_form(w, p)
            assert np.max(np.abs(num - ref)) <= 1e-9

    def test_mixed_block_vanishes(self, sphere_pair, rng):
        base, fiber = sphere_pair
        f = parse("0.4*cos(x1)", ["x0", "x1"])
        w = WarpedProduct(base=base, fiber=fiber, f=f, a=1.0)
        for p in warp_points(w, rng):
            assert mixed_block_residual(w, p) <= 1e-9

    def test_constant_warp_is_product_scaling(self, sphere_pair, rng):
        base, fiber = sphere_pair
        w = WarpedProduct(base=base, fiber=fiber, f=Num(0.0), a=-0.6)
        p = warp_points(w, rng, count=1)[0]
        g = warped_metric(w, p)
        gb = base.metric(p[:2])
        gf = fiber.metric(p[2:])
        assert np.allclose(g[:2, :2], gb)
        assert np.allclose(g[2:, 2:], np.exp(0.6) * gf)
        assert np.allclose(g[:2, 2:], 0.0)


class TestCanonicalVariationCorrespondence:
    def test_f_zero_warp_equals_canonical_variation(self, rng):
        """With f = 0 the warped metric at shift a equals the canonical
        variation of the product submersion at t = -a/2 (both scale the
        fiber quadratic form by e^{-a})."""
        from curvcert.catalog import product
        base = round_sphere(2, 1.0)
        fiber = round_sphere(2, 1.0)
        _, sub = product(base, fiber)
        a = 0.8
        w = WarpedProduct(base=base, fiber=fiber, f=Num(0.0), a=a)
        var = CanonicalVariation(source=sub, t=-a / 2.0)
        for _ in range(3):
            p = rng.uniform(-0.2, 0.2, 4)
            assert np.max(np.abs(warped_metric(w, p)
                                 - var.canonical_metric(p))) <= 1e-10


class TestFindShift:
    def test_constant_warp_positive_immediately(self, sphere_pair):
        base, fiber = sphere_pair
        a, rep = find_shift(base, fiber, Num(0.0), a_start=0.0, grid=2)
        assert a == 0.0
        assert rep.verdict == "Positive"

    def test_moderate_warp_certified(self, sphere_pair):
        base, fiber = sphere_pair
        f = parse("0.4*cos(x1)", ["x0", "x1"])
        a, rep = find_shift(base, fiber, f, a_start=0.0, step=0.5, grid=2)
        assert rep.verdict == "Positive"
        # re-verify at the returned shift plus one
        from curvcert.certifier import certify_positivity
        w = WarpedProduct(base=base, fiber=fiber, f=f, a=a + 1.0)
        assert certify_positivity(w.manifold(), grid=2).verdict == "Positive"

    def test_nonpositive_base_rejected(self):
        from curvcert.catalog import flat_torus
        with pytest.raises(HypothesisViolated):
            find_shift(flat_torus(2), round_sphere(2, 1.0), Num(0.0), grid=2)

    def test_strong_warp_not_found(self, sphere_pair):
        base, fiber = sphere_pair
        f = parse("3*cos(x1)", ["x0", "x1"])
        with pytest.raises(NotFound):
            find_shift(base, fiber, f, a_start=0.0, step=2.0, max_steps=3,
                       grid=2)
