"""Riemannian metrics in a single chart or in an invariant frame, with
Christoffel symbols, Riemann/Ricci/scalar curvature and sectional curvature.

Sign conventions (fixed here, enforced by the round-sphere tests):
    R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]} Z
    R_{ijkl} = g(R(e_i,e_j)e_k, e_l)
    Ric(X,Y) = trace of Z -> R(Z,X)Y
With these choices the round n-sphere has sectional curvature +1/r^2 and
Ric = (n-1)/r^2 * g.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .dsl import Expr, eval_expr, eval_jet2
from .errors import (
    DegeneratePlane,
    NotPositiveDefinite,
    OutOfDomain,
)
from .numerics import sym_generalized_eigen_min, symmetrize

__all__ = [
    "ChartManifold",
    "FrameManifold",
    "CurvatureAtPoint",
    "christoffel",
    "riemann",
    "ricci",
    "scalar",
    "sectional",
    "nonreduced_K",
    "min_ricci_eig",
    "sample_points",
]


@dataclass
class CurvatureAtPoint:
    """All curvature data of a metric at one point.

    ``rup[l, i, j, k]`` is R^l_{ijk}; ``riemann[i, j, k, l]`` is the fully
    lowered R_{ijkl} = g_{lm} R^m_{ijk}.
    """

    point: np.ndarray
    g: np.ndarray
    gamma: np.ndarray
    rup: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float


class _ManifoldBase:
    def curvature(self, p) -> CurvatureAtPoint:
        raise NotImplementedError

    def metric(self, p) -> np.ndarray:
        raise NotImplementedError


@dataclass
class ChartManifold(_ManifoldBase):
    """Metric given on a single coordinate box.

    The metric comes either from a grid of expressions (exact second
    derivatives via forward jets) or from an opaque closure (central finite
    differences with step 1e-4 times the domain span).
    """

    dim: int
    domain: np.ndarray  # shape (n, 2): rows [lo, hi]
    exprs: Optional[Sequence[Sequence[Expr]]] = None
    closure: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "chart"
    _fd_h: np.ndarray = field(init=False, repr=False, default=None)

    def __post_init__(self):
        self.domain = np.asarray(self.domain, dtype=float).reshape(self.dim, 2)
        if (self.exprs is None) == (self.closure is None):
            raise ValueError("exactly one of exprs, closure must be given")
        span = self.domain[:, 1] - self.domain[:, 0]
        self._fd_h = 1e-4 * np.where(span > 0, span, 1.0)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(
            np.all(p >= self.domain[:, 0] - 1e-12)
            and np.all(p <= self.domain[:, 1] + 1e-12)
        )

    def _require_in_domain(self, p):
        if not self.contains(p):
            raise OutOfDomain(f"point {p!r} outside domain of {self.name}")

    def metric(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        self._require_in_domain(p)
        if self.closure is not None:
            return symmetrize(np.asarray(self.closure(p), dtype=float))
        n = self.dim
        g = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                g[i, j] = g[j, i] = eval_expr(self.exprs[i][j], p)
        return g

    def metric_derivs(self, p):
        """Return (g, dg, d2g) with dg[m,i,j] = d_m g_ij."""
        p = np.asarray(p, dtype=float)
        self._require_in_domain(p)
        n = self.dim
        if self.exprs is not None:
            g = np.empty((n, n))
            dg = np.empty((n, n, n))
            d2g = np.empty((n, n, n, n))
            for i in range(n):
                for j in range(i, n):
                    jet = eval_jet2(self.exprs[i][j], p)
                    g[i, j] = g[j, i] = jet.value
                    dg[:, i, j] = dg[:, j, i] = jet.grad
                    hess = symmetrize(jet.hess)
                    d2g[:, :, i, j] = d2g[:, :, j, i] = hess
            return g, dg, d2g
        # opaque closure: central differences, no domain clamping so that
        # stencil points may fall slightly outside the declared box
        f = lambda q: symmetrize(np.asarray(self.closure(q), dtype=float))
        g = f(p)
        dg = np.empty((n, n, n))
        d2g = np.empty((n, n, n, n))
        h = self._fd_h
        for m in range(n):
            em = np.zeros(n)
            em[m] = h[m]
            gp, gm = f(p + em), f(p - em)
            dg[m] = (gp - gm) / (2.0 * h[m])
            d2g[m, m] = (gp - 2.0 * g + gm) / h[m] ** 2
        for m in range(n):
            em = np.zeros(n)
            em[m] = h[m]
            for l in range(m + 1, n):
                el = np.zeros(n)
                el[l] = h[l]
                gpp, gpm = f(p + em + el), f(p + em - el)
                gmp, gmm = f(p - em + el), f(p - em - el)
                mixed = (gpp - gpm - gmp + gmm) / (4.0 * h[m] * h[l])
                d2g[m, l] = d2g[l, m] = mixed
        return g, dg, d2g

    def curvature(self, p) -> CurvatureAtPoint:
        g, dg, d2g = self.metric_derivs(p)
        gamma, rup, ric = kernels.curvature_from_derivs(g, dg, d2g)
        return _assemble(np.asarray(p, dtype=float), g, gamma, rup, ric)


@dataclass
class FrameManifold(_ManifoldBase):
    """Invariant metric on a Lie group given by constant structure
    coefficients c[k,i,j] ([e_i, e_j] = c^k_ij e_k) and a constant frame
    metric Q.
    """

    dim: int
    c: np.ndarray
    Q: np.ndarray
    name: str = "frame"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.Q = np.asarray(self.Q, dtype=float)
        n = self.dim
        if self.c.shape != (n, n, n) or self.Q.shape != (n, n):
            raise ValueError("structure coefficient / metric shape mismatch")
        if np.max(np.abs(self.c + self.c.transpose(0, 2, 1))) > 1e-12:
            raise ValueError("structure coefficients must be antisymmetric in i,j")
        jac = (
            np.einsum("mij,lmk->lijk", self.c, self.c)
            + np.einsum("mjk,lmi->lijk", self.c, self.c)
            + np.einsum("mki,lmj->lijk", self.c, self.c)
        )
        if np.max(np.abs(jac)) > 1e-10:
            raise ValueError("structure coefficients violate the Jacobi identity")
        try:
            np.linalg.cholesky(self.Q)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite("frame metric is not positive definite") from exc

    def contains(self, p) -> bool:
        return True

    def metric(self, p=None) -> np.ndarray:
        return self.Q.copy()

    def curvature(self, p=None) -> CurvatureAtPoint:
        gamma, rup, ric = kernels.frame_curvature(self.c, self.Q)
        point = np.zeros(self.dim) if p is None else np.asarray(p, dtype=float)
        return _assemble(point, self.Q.copy(), gamma, rup, ric)


def _assemble(p, g, gamma, rup, ric) -> CurvatureAtPoint:
    rlow = np.einsum("lm,mijk->ijkl", g, rup)
    ginv = np.linalg.inv(g)
    scal = float(np.einsum("jk,jk->", ginv, ric))
    return CurvatureAtPoint(
        point=p, g=g, gamma=gamma, rup=rup, riemann=rlow, ricci=symmetrize(ric),
        scalar=scal,
    )


# ---------------------------------------------------------------------------
# Point-wise operations
# ---------------------------------------------------------------------------


def christoffel(m: _ManifoldBase, p) -> np.ndarray:
    return m.curvature(p).gamma


def riemann(m: _ManifoldBase, p) -> np.ndarray:
    return m.curvature(p).riemann


def ricci(m: _ManifoldBase, p) -> np.ndarray:
    return m.curvature(p).ricci


def scalar(m: _ManifoldBase, p) -> float:
    return m.curvature(p).scalar


def nonreduced_K(m, p, X, Y, curv: CurvatureAtPoint | None = None) -> float:
    """R(X,Y,Y,X): sectional numerator without the area normalization."""
    if curv is None:
        curv = m.curvature(p)
    return float(np.einsum("ijkl,i,j,k,l->", curv.riemann, X, Y, Y, X))


def sectional(m, p, X, Y, curv: CurvatureAtPoint | None = None) -> float:
    if curv is None:
        curv = m.curvature(p)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    g = curv.g
    area = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    if area < 1e-12:
        raise DegeneratePlane("X and Y do not span a nondegenerate plane")
    return nonreduced_K(m, p, X, Y, curv) / area


def min_ricci_eig(m, p) -> float:
    """Smallest eigenvalue of Ric relative to g at p."""
    curv = m.curvature(p)
    return sym_generalized_eigen_min(curv.ricci, curv.g)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_points(m: _ManifoldBase, grid: int = 3, margin: float = 0.02,
                  seed: int = 0, jitter: float = 0.25) -> np.ndarray:
    """Uniform grid over the chart box, shrunk by `margin`, with seeded
    jitter. Frame manifolds are homogeneous and return the single origin.
    """
    if isinstance(m, FrameManifold):
        return np.zeros((1, m.dim))
    lo = m.domain[:, 0]
    hi = m.domain[:, 1]
    span = hi - lo
    lo = lo + margin * span
    hi = hi - margin * span
    axes = [np.linspace(lo[i], hi[i], grid) for i in range(m.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([ax.ravel() for ax in mesh], axis=1)
    if jitter > 0 and grid > 1:
        rng = np.random.default_rng(seed)
        step = (hi - lo) / max(grid - 1, 1)
        pts = pts + rng.uniform(-jitter, jitter, pts.shape) * step
        pts = np.clip(pts, lo, hi)
    return pts
