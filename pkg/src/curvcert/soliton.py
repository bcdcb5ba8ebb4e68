"""Ricci-soliton residuals (Ric + (1/2) L_X g = rho g, gradient form
Ric + Hess f = rho g), soliton classification, and the one-dimensional
integral condition I(kappa_1) whose vanishing characterizes existence of
the compact gradient shrinking Kaehler-Ricci soliton in the Dancer-Wang
construction, with root finding in kappa_1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .dsl import Expr, eval_dual, eval_jet2
from .errors import InvalidSpec, NoSignChange
from .geometry import ChartManifold
from .numerics import adaptive_quadrature, gauss_legendre, symmetrize

__all__ = [
    "SolitonData",
    "lie_derivative_metric",
    "hessian",
    "gradient_field",
    "soliton_residual",
    "classify",
    "DWIntegralSpec",
    "dw_integrand",
    "dw_integral",
    "dw_integral_exact_poly",
    "dw_find_roots",
    "DWRoot",
]

VectorField = Union[Sequence[Expr], Callable[[np.ndarray], np.ndarray]]


def _field_value_and_jacobian(X: VectorField, p: np.ndarray):
    """Value and Jacobian dX[i, k] = d_i X^k of a vector field."""
    n = len(p)
    if callable(X):
        h = 1e-6
        val = np.asarray(X(p), dtype=float)
        jac = np.empty((n, n))
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            jac[i] = (np.asarray(X(p + e), float) - np.asarray(X(p - e), float)) / (2 * h)
        return val, jac
    duals = [eval_dual(e, p) for e in X]
    val = np.array([d.value for d in duals])
    jac = np.array([d.partials for d in duals]).T  # jac[i, k] = d_i X^k
    return val, jac


def lie_derivative_metric(m: ChartManifold, X: VectorField, p) -> np.ndarray:
    """(L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k."""
    p = np.asarray(p, dtype=float)
    g, dg, _ = m.metric_derivs(p)
    xval, dx = _field_value_and_jacobian(X, p)
    lie = (
        np.einsum("k,kij->ij", xval, dg)
        + np.einsum("ik,kj->ij", dx, g)
        + np.einsum("jk,ik->ij", dx, g)
    )
    return symmetrize(lie)


def hessian(m: ChartManifold, f: Expr, p) -> np.ndarray:
    """(Hess f)_ij = d_i d_j f - Gamma^k_ij d_k f."""
    p = np.asarray(p, dtype=float)
    jet = eval_jet2(f, p)
    gamma = m.curvature(p).gamma
    return symmetrize(jet.hess) - np.einsum("kij,k->ij", gamma, jet.grad)


def gradient_field(m: ChartManifold, f: Expr) -> Callable[[np.ndarray], np.ndarray]:
    """The vector field grad f = g^{-1} df as a point closure."""

    def grad(p: np.ndarray) -> np.ndarray:
        g = m.metric(p)
        return np.linalg.solve(g, eval_dual(f, np.asarray(p, float)).partials)

    return grad


@dataclass
class SolitonData:
    """Exactly one of X (vector field) or f (potential) is present."""

    manifold: ChartManifold
    rho: float
    X: Optional[VectorField] = None
    f: Optional[Expr] = None

    def __post_init__(self):
        if (self.X is None) == (self.f is None):
            raise ValueError("exactly one of X, f must be given")


def soliton_residual(s: SolitonData, points) -> float:
    """Max over points of the Frobenius norm, in a g-orthonormal frame, of
    Ric + (1/2) L_X g - rho g (or Ric + Hess f - rho g)."""
    worst = 0.0
    for p in points:
        curv = s.manifold.curvature(p)
        if s.f is not None:
            extra = hessian(s.manifold, s.f, p)
        else:
            extra = 0.5 * lie_derivative_metric(s.manifold, s.X, p)
        mat = curv.ricci + extra - s.rho * curv.g
        # orthonormal-frame Frobenius norm: ||g^{-1/2} M g^{-1/2}||_F
        vals, vecs = np.linalg.eigh(curv.g)
        ginv_half = vecs @ np.diag(vals ** -0.5) @ vecs.T
        worst = max(worst, float(np.linalg.norm(ginv_half @ mat @ ginv_half)))
    return worst


def classify(rho: float) -> str:
    if rho > 0:
        return "Shrinking"
    if rho < 0:
        return "Expanding"
    return "Steady"


# ---------------------------------------------------------------------------
# The Dancer-Wang integral condition
# ---------------------------------------------------------------------------


@dataclass
class DWIntegralSpec:
    """I = integral over [n_r - 1, n_r + 1] of
    e^{-2 kappa_1 (x + n_1 + 1)} prod_i (x - p_i/q_i)^{n_i} dx.

    The end coefficients are normalized to q_1 = q_r = 1; the admissibility
    inequalities -(n_1 + 1) q_i < p_i and (n_r + 1) q_i < p_i for the
    interior indices are reported via `admissible` as a warning flag (the
    integral itself is defined without them).
    """

    r: int
    n: Sequence[int]
    p: Sequence[float]
    q: Sequence[float]
    kappa1: float = 0.0

    def __post_init__(self):
        if not (len(self.n) == len(self.p) == len(self.q) == self.r):
            raise InvalidSpec("n, p, q must all have length r")
        if any(qi == 0 for qi in self.q):
            raise InvalidSpec("q_i must be nonzero")
        if any(ni < 0 for ni in self.n):
            raise InvalidSpec("n_i must be nonnegative integers")

    @property
    def admissible(self) -> bool:
        n1 = self.n[0]
        nr = self.n[-1]
        for i in range(1, self.r - 1):
            if not (-(n1 + 1) * self.q[i] < self.p[i]
                    and (nr + 1) * self.q[i] < self.p[i]):
                return False
        return True

    @property
    def limits(self) -> tuple[float, float]:
        return (self.n[-1] - 1.0, self.n[-1] + 1.0)

    def with_kappa(self, kappa1: float) -> "DWIntegralSpec":
        return DWIntegralSpec(r=self.r, n=self.n, p=self.p, q=self.q,
                              kappa1=kappa1)


def dw_integrand(spec: DWIntegralSpec) -> Callable[[float], float]:
    roots = [pi / qi for pi, qi in zip(spec.p, spec.q)]
    shift = spec.n[0] + 1.0
    k2 = 2.0 * spec.kappa1

    def f(x: float) -> float:
        out = math.exp(-k2 * (x + shift))
        for root, ni in zip(roots, spec.n):
            if ni:
                out *= (x - root) ** ni
        return out

    return f


def dw_integral(spec: DWIntegralSpec, tol: float = 1e-12,
                oracle_panels: int = 0) -> float:
    """Adaptive-Simpson value of I; with oracle_panels > 0, a composite
    Gauss-Legendre evaluation instead (used for refinement stability)."""
    lo, hi = spec.limits
    f = dw_integrand(spec)
    if oracle_panels:
        return gauss_legendre(f, lo, hi, panels=oracle_panels)
    return adaptive_quadrature(f, lo, hi, tol=tol)


def dw_integral_exact_poly(spec: DWIntegralSpec) -> float:
    """Exact value at kappa_1 = 0 via the polynomial antiderivative."""
    if spec.kappa1 != 0.0:
        raise InvalidSpec("exact polynomial route requires kappa_1 = 0")
    poly = np.polynomial.Polynomial([1.0])
    for pi, qi, ni in zip(spec.p, spec.q, spec.n):
        poly *= np.polynomial.Polynomial([-pi / qi, 1.0]) ** ni
    anti = poly.integ()
    lo, hi = spec.limits
    return float(anti(hi) - anti(lo))


@dataclass
class DWRoot:
    kappa1: float
    value: float
    non_einstein: bool


def dw_find_roots(spec: DWIntegralSpec, kappa_lo: float, kappa_hi: float,
                  tol: float = 1e-10, sweep: int = 200,
                  flag_tol: float = 1e-8, quad_tol: float = 1e-12
                  ) -> list[DWRoot]:
    """All roots of kappa_1 -> I(kappa_1) in [kappa_lo, kappa_hi]: coarse
    sign sweep, then bisection per bracket.  The non_einstein flag is set
    exactly when |kappa_1*| > flag_tol.
    """

    def val(k: float) -> float:
        return dw_integral(spec.with_kappa(k), tol=quad_tol)

    ks = np.linspace(kappa_lo, kappa_hi, sweep)
    vals = [val(k) for k in ks]
    roots = []
    for i in range(sweep - 1):
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            roots.append(float(ks[i]))
            continue
        if va * vb < 0.0:
            lo, hi = float(ks[i]), float(ks[i + 1])
            flo = va
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                fmid = val(mid)
                if fmid == 0.0:
                    lo = hi = mid
                    break
                if flo * fmid < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fmid
            roots.append(0.5 * (lo + hi))
    if vals[-1] == 0.0:
        roots.append(float(ks[-1]))
    if not roots:
        raise NoSignChange(
            f"I(kappa_1) has no sign change on [{kappa_lo}, {kappa_hi}]"
        )
    return [
        DWRoot(kappa1=k, value=val(k), non_einstein=abs(k) > flag_tol)
        for k in roots
    ]
