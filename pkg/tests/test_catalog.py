import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvcert.catalog import (
    Sp2Element, Sp2mElement, antipodal, berger_sphere, builtin, bullet_action,
    h_map, h_tilde_map, hopf_s3_s2, project_to_sp2, random_sp2, random_sp2m,
    random_unit_quat, round_sphere, s7_action, sp2m_constraint, star_action,
    wilhelm_action,
)
from curvcert.errors import BadParams, NotUnit, ProjectionFailed, UnknownBuiltin
from curvcert.numerics import Quaternion
from curvcert.submersion import CanonicalVariation

ONE = Quaternion(1.0, 0.0, 0.0, 0.0)


def qdiff(p, q):
    return max(abs(p.w - q.w), abs(p.x - q.x), abs(p.y - q.y),
               abs(p.z - q.z))


def ediff(e1, e2):
    return max(qdiff(getattr(e1, n), getattr(e2, n)) for n in "abcd")


def pairsdiff(e1, e2):
    return max(max(qdiff(a1, a2), qdiff(b1, b2))
               for (a1, b1), (a2, b2) in zip(e1.us, e2.us))


class TestBuiltins:
    def test_unknown_name(self):
        with pytest.raises(UnknownBuiltin):
            builtin("klein_bottle")

    def test_bad_params(self):
        with pytest.raises(BadParams):
            builtin("round_sphere")  # missing required dimension

    def test_dispatch(self):
        m = builtin("round_sphere", 3, 2.0)
        assert m.dim == 3


class TestHopfMaps:
    def test_h_lands_on_sphere(self, rng):
        for _ in range(50):
            e = random_sp2(rng)
            for pt in (h_map(e.a, e.b), h_tilde_map(e.a, e.b)):
                assert abs(float(pt @ pt) - 1.0) <= 1e-13

    def test_h_rejects_non_unit(self):
        q = Quaternion(1.0, 1.0, 0.0, 0.0)
        with pytest.raises(NotUnit):
            h_map(q, q)

    def test_antipodal_is_involution(self, rng):
        v = rng.standard_normal(5)
        v /= np.linalg.norm(v)
        assert np.allclose(antipodal(antipodal(v)), v)

    def test_conjugate_pair_swaps_h_and_h_tilde(self, rng):
        """h(a-bar, b-bar) = h-tilde(a, b): the involution k relates the
        two bundle projections."""
        for _ in range(20):
            e = random_sp2(rng)
            lhs = h_map(e.a.conj(), e.b.conj())
            rhs = h_tilde_map(e.a, e.b)
            assert np.max(np.abs(lhs - rhs)) <= 1e-13


class TestSp2:
    def test_random_elements_valid(self, rng):
        for _ in range(200):
            assert random_sp2(rng).constraint_residual() <= 1e-12

    def test_identity_element(self):
        e = Sp2Element(a=ONE, b=Quaternion(0, 0, 0, 0),
                       c=Quaternion(0, 0, 0, 0), d=ONE)
        assert e.constraint_residual() <= 1e-15
        assert ediff(project_to_sp2(e), e) <= 1e-12

    def test_unit_quaternion_acts_trivially(self, rng):
        e = random_sp2(rng)
        assert ediff(bullet_action(ONE, e), e) == 0.0
        assert ediff(star_action(ONE, e), e) == 0.0

    def test_actions_preserve_constraints(self, rng):
        for _ in range(200):
            e = random_sp2(rng)
            q = random_unit_quat(rng)
            assert bullet_action(q, e).constraint_residual() <= 1e-12
            assert star_action(q, e).constraint_residual() <= 1e-12

    def test_actions_commute(self, rng):
        for _ in range(200):
            e = random_sp2(rng)
            q1, q2 = random_unit_quat(rng), random_unit_quat(rng)
            lhs = star_action(q1, bullet_action(q2, e))
            rhs = bullet_action(q2, star_action(q1, e))
            assert ediff(lhs, rhs) <= 1e-13

    def test_bullet_composition_order(self, rng):
        """bullet(q1 q2, e) = bullet(q1, bullet(q2, e)): with the
        conjugated quaternion on the second pair, composition reads in
        left-to-right order."""
        for _ in range(100):
            e = random_sp2(rng)
            q1, q2 = random_unit_quat(rng), random_unit_quat(rng)
            lhs = bullet_action(q1 * q2, e)
            rhs = bullet_action(q1, bullet_action(q2, e))
            assert ediff(lhs, rhs) <= 1e-13

    def test_s7_action_preserves_unit_pair(self, rng):
        for _ in range(100):
            e = random_sp2(rng)
            q = random_unit_quat(rng)
            x, y = s7_action(q, e.a, e.b)
            assert abs(x.norm2() + y.norm2() - 1.0) <= 1e-12

    def test_projection_stability(self, rng):
        e = random_sp2(rng)
        perturbed = Sp2Element(
            a=Quaternion(e.a.w + 1e-8, e.a.x, e.a.y, e.a.z),
            b=e.b, c=e.c, d=e.d)
        fixed = project_to_sp2(perturbed)
        assert fixed.constraint_residual() <= 1e-12
        assert ediff(fixed, perturbed) <= 1e-7

    def test_projection_rejects_degenerate(self):
        zero = Quaternion(0, 0, 0, 0)
        with pytest.raises(ProjectionFailed):
            project_to_sp2(Sp2Element(a=zero, b=zero, c=zero, d=zero))


class TestSp2m:
    @pytest.mark.parametrize("m", [2, 3, 5])
    def test_random_elements_valid(self, m, rng):
        for _ in range(50):
            assert sp2m_constraint(random_sp2m(m, rng)) <= 1e-12

    @pytest.mark.parametrize("m", [2, 3, 5])
    def test_wilhelm_action_preserves_constraints(self, m, rng):
        for _ in range(50):
            e = random_sp2m(m, rng)
            qs = [random_unit_quat(rng) for _ in range(m)]
            out = wilhelm_action(qs, e)
            assert sp2m_constraint(out) <= 1e-12

    def test_identity_action(self, rng):
        e = random_sp2m(3, rng)
        out = wilhelm_action([ONE, ONE, ONE], e)
        assert pairsdiff(out, e) == 0.0

    def test_action_rejects_non_unit(self, rng):
        e = random_sp2m(2, rng)
        with pytest.raises(NotUnit):
            wilhelm_action([ONE, Quaternion(2, 0, 0, 0)], e)

    def test_freeness_sampled(self, rng):
        """No fixed points among random samples with q far from +-1
        (statistical evidence, not a proof)."""
        for _ in range(300):
            e = random_sp2m(2, rng)
            qs = [random_unit_quat(rng) for _ in range(2)]
            if all(min(qdiff(q, ONE), qdiff(q, Quaternion(-1, 0, 0, 0)))
                   > 1e-3 for q in qs):
                out = wilhelm_action(qs, e)
                assert pairsdiff(out, e) > 1e-6


class TestBergerCorrespondence:
    @pytest.mark.parametrize("eps", [0.25, 1.0, 1.7])
    def test_berger_equals_canonical_variation_block(self, eps, hopf_s3):
        """berger_sphere(eps) frame metric matches the canonical variation
        of the Hopf fibration at t = half log eps, exactly, block by block
        (vertical direction first)."""
        sub, _ = hopf_s3
        t = 0.5 * math.log(eps)
        var = CanonicalVariation(source=sub, t=t)
        split = var.split_frame_metric()
        frame_metric = berger_sphere(eps).metric()
        assert np.array_equal(split, frame_metric)
