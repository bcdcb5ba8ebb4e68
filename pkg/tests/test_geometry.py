import numpy as np
import pytest

from curvcert.catalog import berger_sphere, flat_torus, round_sphere
from curvcert.errors import DegeneratePlane, OutOfDomain
from curvcert.geometry import (
    ChartManifold, min_ricci_eig, ricci, sample_points, scalar, sectional,
)


@pytest.mark.parametrize("n,r", [(2, 1.0), (3, 2.0), (4, 0.5)])
def test_round_sphere_einstein(n, r, rng):
    m = round_sphere(n, r)
    for p in sample_points(m, grid=2, seed=1):
        g = m.metric(p)
        ric = ricci(m, p)
        assert np.max(np.abs(ric - (n - 1) / r ** 2 * g)) <= 1e-9
        assert scalar(m, p) == pytest.approx(n * (n - 1) / r ** 2, abs=1e-9)


def test_round_sphere_constant_sectional(rng):
    m = round_sphere(3, 2.0)
    p = np.array([0.1, -0.2, 0.3])
    for _ in range(5):
        x = rng.standard_normal(3)
        y = rng.standard_normal(3)
        assert sectional(m, p, x, y) == pytest.approx(0.25, abs=1e-9)


def test_flat_torus_is_flat():
    m = flat_torus(3)
    for p in sample_points(m, grid=2, seed=0):
        assert np.max(np.abs(ricci(m, p))) <= 1e-12


def test_degenerate_plane_rejected():
    m = round_sphere(2, 1.0)
    p = np.array([0.1, 0.2])
    x = np.array([1.0, 2.0])
    with pytest.raises(DegeneratePlane):
        sectional(m, p, x, 2.0 * x)


def test_out_of_domain():
    m = round_sphere(2, 1.0)
    assert not m.contains([5.0, 0.0])
    with pytest.raises(OutOfDomain):
        m.curvature([5.0, 0.0])


def test_closure_metric_matches_expr_metric():
    """Finite-difference derivatives of a closure chart reproduce the
    dual-number derivatives of the same metric given as expressions."""
    expr_m = round_sphere(2, 1.0)
    closure_m = ChartManifold(
        dim=2, domain=expr_m.domain,
        closure=lambda p: expr_m.metric(p), name="closure-sphere",
    )
    p = np.array([0.3, -0.4])
    a = expr_m.curvature(p)
    b = closure_m.curvature(p)
    assert np.max(np.abs(a.ricci - b.ricci)) <= 1e-5


def test_min_ricci_eig_sign():
    assert min_ricci_eig(round_sphere(3, 1.0), np.zeros(3)) == pytest.approx(
        2.0, abs=1e-8)
    assert abs(min_ricci_eig(flat_torus(2), np.array([1.0, 1.0]))) <= 1e-12


class TestBergerFrame:
    @pytest.mark.parametrize("eps", [0.25, 1.0, 1.5])
    def test_ricci_eigenvalues(self, eps):
        m = berger_sphere(eps)
        curv = m.curvature()
        w = np.sort(np.linalg.eigvals(
            np.linalg.solve(m.metric(), curv.ricci)).real)
        expected = np.sort([2 * eps, 4 - 2 * eps, 4 - 2 * eps])
        assert np.max(np.abs(w - expected)) <= 1e-9

    def test_round_case_sectional(self):
        m = berger_sphere(1.0)
        e2 = np.array([0.0, 1.0, 0.0])
        e3 = np.array([0.0, 0.0, 1.0])
        assert sectional(m, None, e2, e3) == pytest.approx(1.0, abs=1e-12)

    def test_vertizontal_sectional(self):
        eps = 0.3
        m = berger_sphere(eps)
        e1 = np.array([1.0, 0.0, 0.0])
        e2 = np.array([0.0, 1.0, 0.0])
        assert sectional(m, None, e1, e2) == pytest.approx(eps, abs=1e-12)


class TestSamplePoints:
    def test_deterministic(self):
        m = round_sphere(3, 1.0)
        a = sample_points(m, grid=3, seed=9)
        b = sample_points(m, grid=3, seed=9)
        assert np.allclose(np.asarray(a), np.asarray(b))

    def test_inside_domain(self):
        m = round_sphere(4, 1.0)
        for p in sample_points(m, grid=3, seed=2):
            assert m.contains(p)

    def test_count(self):
        m = round_sphere(2, 1.0)
        assert len(sample_points(m, grid=4, seed=0)) == 16
