"""Riemannian submersions: vertical/horizontal splitting, the O'Neill
A- and T-tensors, the canonical variation g-tilde (vertical quadratic form
scaled by e^{2t}), and its closed-form curvature identities:

    (1)  Ktilde(X,Y) = K_B(pi_*X, pi_*Y) (1 - e^{2t}) + e^{2t} K(X,Y)
    (2)  Ktilde(X,V) = e^{4t} |A*_X V|^2
    (3)  Ktilde(V,W) = e^{2t} K(V,W)
    (4)  Rtilde(X,Y,Z,W) = e^{2t} g((nabla_X A)_Y Z, W)

for horizontal X,Y,Z and vertical V,W (non-reduced values, g-orthonormal
inputs, totally geodesic fibers).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .dsl import Expr, eval_dual, eval_expr
from .errors import (
    NotTotallyGeodesic,
    RankDeficient,
    ToleranceExceeded,
)
from .geometry import ChartManifold, nonreduced_K, sample_points

__all__ = [
    "NumericSubmersion",
    "ClosedFormSubmersionData",
    "CanonicalVariation",
    "gram_schmidt",
    "variation_curvature",
    "cross_check_variation",
]


def gram_schmidt(vectors: np.ndarray, g: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Modified Gram-Schmidt with a re-orthogonalization pass, with respect
    to the inner product g. Rows of `vectors` are candidates; returns the
    g-orthonormal rows that survive (near-dependent candidates dropped).
    """
    out: list[np.ndarray] = []
    for v in np.asarray(vectors, dtype=float):
        w = v.copy()
        for _ in range(2):  # second pass restores orthogonality losses
            for u in out:
                w = w - (u @ g @ w) * u
        norm = math.sqrt(max(w @ g @ w, 0.0))
        if norm > tol:
            out.append(w / norm)
    if not out:
        return np.zeros((0, len(g)))
    return np.array(out)


@dataclass
class NumericSubmersion:
    """Submersion given by charts for total space and base plus the
    projection map (expression components, differentiated exactly).
    """

    total: ChartManifold
    base: ChartManifold
    proj_exprs: Sequence[Expr]
    name: str = "submersion"
    _dp_step: float = 1e-5

    @property
    def n(self) -> int:
        return self.total.dim

    @property
    def k(self) -> int:
        return self.base.dim

    @property
    def vdim(self) -> int:
        return self.n - self.k

    def proj(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.array([eval_expr(e, p) for e in self.proj_exprs])

    def dproj(self, p) -> np.ndarray:
        """Exact Jacobian dpi, shape (k, n)."""
        p = np.asarray(p, dtype=float)
        return np.array([eval_dual(e, p).partials for e in self.proj_exprs])

    def horizontal_projector(self, p) -> np.ndarray:
        """Matrix of the g-orthogonal projection onto the horizontal space
        (complement of ker dpi), acting on tangent components at p.
        """
        g = self.total.metric(p)
        jac = self.dproj(p)
        svals = np.linalg.svd(jac, compute_uv=False)
        if svals.size < self.k or svals[self.k - 1] < 1e-8:
            raise RankDeficient(
                f"dpi rank < {self.k} at {np.asarray(p).tolist()}"
            )
        ginv = np.linalg.inv(g)
        m = jac @ ginv @ jac.T
        return ginv @ jac.T @ np.linalg.solve(m, jac)

    def vertical_projector(self, p) -> np.ndarray:
        return np.eye(self.n) - self.horizontal_projector(p)

    def vertical_basis(self, p) -> np.ndarray:
        g = self.total.metric(p)
        pv = self.vertical_projector(p)
        basis = gram_schmidt(pv.T, g)
        if len(basis) != self.vdim:
            raise RankDeficient("vertical space has wrong dimension")
        return basis

    def horizontal_basis(self, p) -> np.ndarray:
        g = self.total.metric(p)
        ph = self.horizontal_projector(p)
        basis = gram_schmidt(ph.T, g)
        if len(basis) != self.k:
            raise RankDeficient("horizontal space has wrong dimension")
        return basis

    # -- O'Neill tensors ------------------------------------------------

    def _covariant_of_projected(self, p, direction, vec, projector) -> np.ndarray:
        """nabla_direction of the field x -> projector(x) @ vec, at p."""
        p = np.asarray(p, dtype=float)
        direction = np.asarray(direction, dtype=float)
        h = self._dp_step
        dfield = np.zeros(self.n)
        # directional derivative of the projected field by central differences
        pp = projector(p + h * direction) @ vec
        pm = projector(p - h * direction) @ vec
        dfield = (pp - pm) / (2.0 * h)
        gamma = self.total.curvature(p).gamma
        w = projector(p) @ vec
        correction = np.einsum("kmj,m,j->k", gamma, direction, w)
        return dfield + correction

    def a_tensor(self, p, X, Y) -> np.ndarray:
        """A_X Y = vertical part of nabla_X (horizontal extension of Y)."""
        nab = self._covariant_of_projected(p, X, np.asarray(Y, float),
                                           self.horizontal_projector)
        return self.vertical_projector(p) @ nab

    def a_star(self, p, X, V) -> np.ndarray:
        """Adjoint: horizontal vector with g(A*_X V, Y) = g(A_X Y, V)."""
        g = self.total.metric(p)
        basis = self.horizontal_basis(p)
        gv = g @ np.asarray(V, float)
        coeffs = [self.a_tensor(p, X, y) @ gv for y in basis]
        return np.einsum("i,ij->j", coeffs, basis)

    def t_tensor(self, p, V, W) -> np.ndarray:
        """Second fundamental form of the fiber: horizontal part of
        nabla_V (vertical extension of W)."""
        nab = self._covariant_of_projected(p, V, np.asarray(W, float),
                                           self.vertical_projector)
        return self.horizontal_projector(p) @ nab

    def check_totally_geodesic(self, points) -> float:
        """Max g-norm of T over orthonormal vertical pairs at the samples."""
        worst = 0.0
        for p in points:
            g = self.total.metric(p)
            vert = self.vertical_basis(p)
            for v in vert:
                for w in vert:
                    tvw = self.t_tensor(p, v, w)
                    worst = max(worst, math.sqrt(max(tvw @ g @ tvw, 0.0)))
        return worst


@dataclass
class ClosedFormSubmersionData:
    """Hand-supplied homogeneous submersion data in a model orthonormal
    frame: horizontal vectors are R^k, vertical vectors R^vdim, and the
    metric is the identity on each block.

    `nabla_a_sum(X, V)` is the summed mixed term
    sum_i g((nabla_{e_i} A)_X e_i, V) over a horizontal orthonormal basis;
    `nabla_a4(X, Y, Z)` the vertical vector (nabla_X A)_Y Z.
    The iso_* constants are the non-reduced values on g-orthonormal inputs
    (the catalog spaces are isotropic, so these are well defined).
    """

    k: int
    vdim: int
    name: str
    ric_b: Callable[[np.ndarray], float]
    ric_f: Callable[[np.ndarray], float]
    k_b: Callable[[np.ndarray, np.ndarray], float]
    k_h: Callable[[np.ndarray, np.ndarray], float]
    k_v: Callable[[np.ndarray, np.ndarray], float]
    a: Callable[[np.ndarray, np.ndarray], np.ndarray]
    a_star: Callable[[np.ndarray, np.ndarray], np.ndarray]
    nabla_a_sum: Callable[[np.ndarray, np.ndarray], float]
    nabla_a4: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    iso_k_b: Optional[float] = None
    iso_k_h: Optional[float] = None
    iso_k_v: Optional[float] = None
    iso_a_star2: Optional[float] = None

    def sum_a_star_over_vertical(self, X) -> float:
        """sum_j |A*_X f_j|^2 over a vertical orthonormal basis."""
        total = 0.0
        for j in range(self.vdim):
            fj = np.zeros(self.vdim)
            fj[j] = 1.0
            av = self.a_star(X, fj)
            total += float(av @ av)
        return total

    def sum_a_star_over_horizontal(self, V) -> float:
        """sum_i |A*_{e_i} V|^2 over a horizontal orthonormal basis."""
        total = 0.0
        for i in range(self.k):
            ei = np.zeros(self.k)
            ei[i] = 1.0
            av = self.a_star(ei, V)
            total += float(av @ av)
        return total

    def ric_h(self, X) -> float:
        """Horizontal partial Ricci: sum_i K(X, e_i), orthonormal basis."""
        total = 0.0
        for i in range(self.k):
            ei = np.zeros(self.k)
            ei[i] = 1.0
            total += self.k_h(X, ei)
        return total


@dataclass
class CanonicalVariation:
    """The metric family scaling the vertical quadratic form by e^{2t}."""

    source: NumericSubmersion | ClosedFormSubmersionData
    t: float

    @property
    def e2t(self) -> float:
        return math.exp(2.0 * self.t)

    def canonical_metric(self, p) -> np.ndarray:
        """Chart-component matrix of g-tilde at p (numeric source only)."""
        sub = self.source
        if not isinstance(sub, NumericSubmersion):
            raise TypeError("chart metric requires a numeric submersion")
        g = sub.total.metric(p)
        pv = sub.vertical_projector(p)
        return g + (self.e2t - 1.0) * pv.T @ g @ pv

    def split_frame_metric(self) -> np.ndarray:
        """g-tilde in a g-orthonormal split frame, vertical block first."""
        sub = self.source
        vdim = sub.vdim
        k = sub.k
        out = np.eye(vdim + k)
        out[:vdim, :vdim] *= self.e2t
        return out

    def as_chart_manifold(self, name: str | None = None) -> ChartManifold:
        sub = self.source
        if not isinstance(sub, NumericSubmersion):
            raise TypeError("chart metric requires a numeric submersion")
        return ChartManifold(
            dim=sub.n,
            domain=sub.total.domain,
            closure=self.canonical_metric,
            name=name or f"{sub.name}_t={self.t:g}",
        )


# ---------------------------------------------------------------------------
# Closed-form curvature of the canonical variation
# ---------------------------------------------------------------------------


def variation_curvature(data: ClosedFormSubmersionData, t: float, kind: str,
                        *args) -> float:
    """Evaluate one of the four closed-form curvature identities of the
    canonical variation, for g-orthonormal model-frame inputs.

    kind: "hh" (X,Y) | "hv" (X,V) | "vv" (V,W) | "hhhv" (X,Y,Z,W).
    """
    e2t = math.exp(2.0 * t)
    if kind == "hh":
        X, Y = args
        return data.k_b(X, Y) * (1.0 - e2t) + e2t * data.k_h(X, Y)
    if kind == "hv":
        X, V = args
        av = data.a_star(X, V)
        return e2t * e2t * float(av @ av)
    if kind == "vv":
        V, W = args
        return e2t * data.k_v(V, W)
    if kind == "hhhv":
        X, Y, Z, W = args
        return e2t * float(data.nabla_a4(X, Y, Z) @ W)
    raise ValueError(f"unknown curvature kind {kind!r}")


def cross_check_variation(sub: NumericSubmersion, data: ClosedFormSubmersionData,
                          t: float, points, tuples_per_point: int = 10,
                          seed: int = 0, tol: float | None = None) -> float:
    """Max discrepancy between the closed-form identities (evaluated via the
    isotropy constants of `data`) and the generic curvature engine applied to
    the canonical-variation chart metric, over random g-orthonormal tuples.

    Raises ToleranceExceeded (with a witness) when `tol` is given and beaten.
    """
    if data.iso_k_b is None or data.iso_k_h is None or data.iso_a_star2 is None:
        raise ValueError("cross check needs the isotropy constants")
    cv = CanonicalVariation(sub, t)
    tilde = cv.as_chart_manifold()
    e2t = math.exp(2.0 * t)
    rng = np.random.default_rng(seed)
    worst = 0.0
    witness = None

    for p in points:
        g = sub.total.metric(p)
        ph = sub.horizontal_projector(p)
        pv = np.eye(sub.n) - ph
        curv = tilde.curvature(p)

        for _ in range(tuples_per_point):
            hor = gram_schmidt((ph @ rng.standard_normal((sub.n, 2))).T, g)
            if len(hor) < 2:
                continue
            X, Y = hor[0], hor[1]
            vcount = min(sub.vdim, 2)
            ver = gram_schmidt((pv @ rng.standard_normal((sub.n, vcount))).T, g)
            V = ver[0]

            checks = []
            # (1): engine Ktilde(X,Y) vs interpolation formula
            engine = float(np.einsum("ijkl,i,j,k,l->", curv.riemann, X, Y, Y, X))
            closed = data.iso_k_b * (1.0 - e2t) + e2t * data.iso_k_h
            checks.append(("hh", engine - closed))
            # (2): engine Ktilde(X,V) vs e^{4t}|A*_X V|^2
            engine = float(np.einsum("ijkl,i,j,k,l->", curv.riemann, X, V, V, X))
            closed = e2t * e2t * data.iso_a_star2
            checks.append(("hv", engine - closed))
            # (3): engine Ktilde(V,W) vs e^{2t} K(V,W)
            if len(ver) >= 2:
                W = ver[1]
                engine = float(
                    np.einsum("ijkl,i,j,k,l->", curv.riemann, V, W, W, V)
                )
                closed = e2t * (data.iso_k_v or 0.0)
                checks.append(("vv", engine - closed))
            # (4): engine Rtilde(X,Y,X,V) vs e^{2t} mixed nabla-A term
            # (identically zero for the catalog spaces, where nabla A = 0;
            #  Z = X keeps the check nontrivial since (nabla_X A)_{Y} X
            #  need not vanish by alternation)
            engine = float(np.einsum("ijkl,i,j,k,l->", curv.riemann, X, Y, X, V))
            checks.append(("hhhv", engine - 0.0))

            for kind, diff in checks:
                if abs(diff) > worst:
                    worst = abs(diff)
                    witness = (np.asarray(p).tolist(), kind)

    if tol is not None and worst > tol:
        raise ToleranceExceeded(
            f"variation cross-check discrepancy {worst:.3e} > {tol:g}",
            witness=witness,
        )
    return worst


def require_totally_geodesic(sub: NumericSubmersion, points,
                             tol: float = 1e-6) -> None:
    worst = sub.check_totally_geodesic(points)
    if worst > tol:
        raise NotTotallyGeodesic(
            f"second fundamental form norm {worst:.3e} exceeds {tol:g}"
        )
