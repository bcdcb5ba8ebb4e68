"""Positivity certification for the canonical variation.

The central object is the Ricci polynomial of a mixed direction
X + lambda V (X unit horizontal, V unit vertical, both unit for the
deformed metric):

    p(lambda) = Ric_tilde(X + lambda V) = c0 + 2 lambda c1 + lambda^2 c2

Positivity of p for every lambda is equivalent to c0 > 0, c2 > 0 and a
negative discriminant Delta = 4 (c1^2 - c0 c2).  `find_certifying_t`
searches a decreasing schedule of t for a configuration where this holds
with margin on every sample; `certify_positivity` is the independent
eigenvalue route used to corroborate it.

Normalization bookkeeping (the error-prone spot, kept in one place):
inputs are supplied g-unit; with e2t = e^{2t} and V g-unit, the
g-tilde-unit vertical direction is e^{-t} V, and

    c0 = (1 - e2t) Ric_B(X) + e2t Ric^H(X) + e2t sum_j |A*_X f_j|^2
    c1 = e^t  * sum_i g((nabla_{e_i} A)_X e_i, V)
    c2 = e2t * sum_i |A*_{e_i} V|^2 + e^{-2t} Ric_F(V)

with e_i a g-orthonormal horizontal basis, f_j a g-orthonormal vertical
basis, and Ric^H(X) = sum_i K(X, e_i) the horizontal partial Ricci.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import HypothesisViolated, NotFound, SameSign
from .geometry import min_ricci_eig, sample_points
from .submersion import ClosedFormSubmersionData

__all__ = [
    "RicciPolynomial",
    "DiscriminantReport",
    "CertificationReport",
    "gt_unit_coefficients",
    "ricci_polynomial",
    "discriminant",
    "ricci_tilde_direct",
    "sample_directions",
    "find_certifying_t",
    "certify_positivity",
    "positivity_threshold",
]


@dataclass
class RicciPolynomial:
    """p(lambda) = c0 + 2 lambda c1 + lambda^2 c2 for g-tilde-unit X, V."""

    c0: float
    c1: float
    c2: float
    t: float
    X: np.ndarray
    V: np.ndarray
    ric_b: float = 0.0
    ric_f: float = 0.0

    def __call__(self, lam: float) -> float:
        return self.c0 + 2.0 * lam * self.c1 + lam * lam * self.c2

    @property
    def delta(self) -> float:
        """Discriminant 4 (c1^2 - c0 c2); negative means no real root."""
        return 4.0 * (self.c1 * self.c1 - self.c0 * self.c2)

    @property
    def delta_quarter(self) -> float:
        return self.c1 * self.c1 - self.c0 * self.c2

    @property
    def limit_residual(self) -> float:
        """The t -> -infinity contradiction quantity:
        (Delta/4 in the g-unit lambda convention) + Ric_F(V) Ric_B(X),
        which decays like e^{2t}.  Rescaling lambda by e^{t} multiplies
        the g-tilde-unit delta_quarter by e^{2t} and leaves its sign alone.
        """
        return math.exp(2.0 * self.t) * self.delta_quarter + self.ric_f * self.ric_b


@dataclass
class DiscriminantReport:
    t: float
    samples: list
    max_delta: float
    witness: Optional[tuple]
    verdict: str  # "AllNegative" | "Violated"


@dataclass
class CertificationReport:
    parameter_name: str
    parameter: float
    grid: str
    min_eig: float
    witness: Optional[list]
    verdict: str  # "Positive" | "Violated"
    margin: float = 1e-6
    wall_time: float = 0.0


def gt_unit_coefficients(ric_b: float, ric_h: float, sum_a_vert: float,
                         nabla_a_mixed: float, sum_a_hor: float,
                         ric_f: float, t: float) -> tuple[float, float, float]:
    """Convert g-unit closed-form sums into the g-tilde-unit coefficients
    of p(lambda).  All inputs are evaluated on g-unit X and V:

    ric_b = Ric_B(X), ric_h = Ric^H(X), sum_a_vert = sum_j |A*_X f_j|^2,
    nabla_a_mixed = sum_i g((nabla_{e_i} A)_X e_i, V),
    sum_a_hor = sum_i |A*_{e_i} V|^2, ric_f = Ric_F(V).
    """
    e2t = math.exp(2.0 * t)
    c0 = (1.0 - e2t) * ric_b + e2t * (ric_h + sum_a_vert)
    c1 = math.exp(t) * nabla_a_mixed
    c2 = e2t * sum_a_hor + ric_f / e2t
    return c0, c1, c2


def ricci_polynomial(data: ClosedFormSubmersionData, t: float,
                     X: np.ndarray, V: np.ndarray) -> RicciPolynomial:
    """Assemble p(lambda) from closed-form data; X, V g-unit model vectors."""
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    ric_b = data.ric_b(X)
    ric_f = data.ric_f(V)
    c0, c1, c2 = gt_unit_coefficients(
        ric_b=ric_b,
        ric_h=data.ric_h(X),
        sum_a_vert=data.sum_a_star_over_vertical(X),
        nabla_a_mixed=data.nabla_a_sum(X, V),
        sum_a_hor=data.sum_a_star_over_horizontal(V),
        ric_f=ric_f,
        t=t,
    )
    return RicciPolynomial(c0=c0, c1=c1, c2=c2, t=t, X=X, V=V,
                           ric_b=ric_b, ric_f=ric_f)


def discriminant(data: ClosedFormSubmersionData, t: float,
                 X: np.ndarray, V: np.ndarray) -> float:
    return ricci_polynomial(data, t, X, V).delta


def ricci_tilde_direct(data: ClosedFormSubmersionData, t: float,
                       Zh: np.ndarray, Zv: np.ndarray) -> float:
    """Ric_tilde(Z, Z) for Z = Zh + Zv (model-frame components, measured in
    g), evaluated by brute-force multilinear expansion of the four curvature
    identities over a g-tilde-orthonormal basis.  Independent of the
    polynomial assembly above: no lambda bookkeeping, no unit assumptions.
    """
    Zh = np.asarray(Zh, dtype=float)
    Zv = np.asarray(Zv, dtype=float)
    e2t = math.exp(2.0 * t)
    emt = math.exp(-t)
    total = 0.0

    # horizontal basis elements e_i (g- and g-tilde-orthonormal)
    for i in range(data.k):
        ei = np.zeros(data.k)
        ei[i] = 1.0
        # R(Zh, ei, ei, Zh): identity (1) as a quadratic form in each slot
        total += data.k_b(Zh, ei) * (1.0 - e2t) + e2t * data.k_h(Zh, ei)
        # cross terms 2 R(Zh, ei, ei, Zv): identity (4) with the mixed
        # nabla-A sum only available in summed form; expand via nabla_a4
        nv = data.nabla_a4(ei, Zh, ei)
        total += 2.0 * e2t * float(nv @ Zv)
        # R(Zv, ei, ei, Zv): identity (2), quadratic in the vertical slot
        av = data.a_star(ei, Zv)
        total += e2t * e2t * float(av @ av)

    # vertical basis elements e^{-t} f_j (g-tilde-orthonormal)
    for j in range(data.vdim):
        fj = np.zeros(data.vdim)
        fj[j] = 1.0
        bj = emt * fj
        # R(Zh, bj, bj, Zh): identity (2) with the roles of the slots swapped
        av = data.a_star(Zh, bj)
        total += e2t * e2t * float(av @ av)
        # cross terms vanish for totally geodesic fibers (the mixed Ricci
        # of the deformed metric has no vertical-basis contribution)
        # R(Zv, bj, bj, Zv): identity (3)
        total += e2t * data.k_v(Zv, bj)

    return total


def sample_directions(k: int, vdim: int, count_h: int = 64, count_v: int = 32,
                      seed: int = 0):
    """Low-discrepancy unit directions on S^{k-1} x S^{vdim-1}.

    Sobol points are mapped through the inverse Gaussian CDF and normalized,
    giving deterministic, roughly uniform sphere samples.
    """

    def sphere(dim: int, count: int, s: int) -> np.ndarray:
        if dim == 1:
            return np.ones((1, 1))
        sob = qmc.Sobol(d=dim, scramble=True, seed=s)
        u = sob.random(count)
        z = _norm_ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        keep = norms[:, 0] > 1e-12
        return (z / np.where(norms > 1e-12, norms, 1.0))[keep]

    return sphere(k, count_h, seed), sphere(vdim, count_v, seed + 1)


def _norm_ppf(u: np.ndarray) -> np.ndarray:
    from scipy.special import ndtri

    return ndtri(u)


def find_certifying_t(data: ClosedFormSubmersionData, t_start: float = 0.0,
                      step: float = 0.5, max_iters: int = 60,
                      margin: float = 1e-6, count_h: int = 64,
                      count_v: int = 32, seed: int = 0
                      ) -> tuple[float, DiscriminantReport]:
    """First t in the schedule t_start - k*step with Delta < -margin and
    c0, c2 > margin on every sampled direction pair.

    Hypotheses checked first: Ric_B > 0 on horizontal samples and
    Ric_F >= 0 on vertical samples (the circle fiber of the Hopf fibration
    has Ric_F = 0 and is certifiable, so only negative fiber Ricci is a
    violation).
    """
    xs, vs = sample_directions(data.k, data.vdim, count_h, count_v, seed)
    for x in xs:
        if data.ric_b(x) <= margin:
            raise HypothesisViolated(f"base Ricci not positive at {x.tolist()}")
    for v in vs:
        if data.ric_f(v) < -margin:
            raise HypothesisViolated(f"fiber Ricci negative at {v.tolist()}")

    for it in range(max_iters + 1):
        t = t_start - it * step
        samples = []
        max_delta = -math.inf
        witness = None
        ok = True
        for x in xs:
            for v in vs:
                poly = ricci_polynomial(data, t, x, v)
                samples.append((x, v, poly.delta))
                if poly.delta > max_delta:
                    max_delta = poly.delta
                    witness = (x, v, poly.delta)
                if not (poly.delta < -margin and poly.c0 > margin
                        and poly.c2 > margin):
                    ok = False
        if ok:
            report = DiscriminantReport(
                t=t, samples=samples, max_delta=max_delta, witness=witness,
                verdict="AllNegative",
            )
            return t, report
    raise NotFound(
        f"no certifying t found in {max_iters} steps from {t_start}"
    )


def certify_positivity(m, grid: int = 3, margin: float = 1e-6,
                       seed: int = 0, sampler_margin: float = 0.02,
                       points=None) -> CertificationReport:
    """Min Ricci eigenvalue (relative to the metric) over sampled points."""
    start = time.perf_counter()
    if points is None:
        points = sample_points(m, grid=grid, margin=sampler_margin, seed=seed)
    best = math.inf
    witness = None
    for p in points:
        eig = min_ricci_eig(m, p)
        if eig < best:
            best = eig
            witness = np.asarray(p).tolist()
    verdict = "Positive" if best > margin else "Violated"
    return CertificationReport(
        parameter_name="", parameter=float("nan"),
        grid=f"grid={grid},margin={sampler_margin},seed={seed}",
        min_eig=best, witness=witness, verdict=verdict, margin=margin,
        wall_time=time.perf_counter() - start,
    )


def positivity_threshold(family: Callable[[float], object], lo: float,
                         hi: float, tol: float = 1e-3, grid: int = 3,
                         margin: float = 1e-6, seed: int = 0) -> float:
    """Bisect the verdict of certify_positivity over a parameter family."""

    def positive(param: float) -> bool:
        return certify_positivity(family(param), grid=grid, margin=margin,
                                  seed=seed).verdict == "Positive"

    plo, phi = positive(lo), positive(hi)
    if plo == phi:
        raise SameSign(f"verdict is the same at {lo} and {hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if positive(mid) == plo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
