"""Built-in manifolds, model submersions, and the quaternionic
constructions: Sp(2) with its two commuting S^3-actions, the generalized
Sp(2,m) family with its (S^3)^m action, and the Hopf maps h, h-tilde.

Conventions fixed here:
  * Stereographic chart of the round n-sphere of radius r: the chart point
    x in R^n maps to r * (1 - |x|^2, 2x) / (1 + |x|^2) with the FIRST
    ambient component playing the pole axis; the pullback metric is the
    conformal one 4 r^2 delta_ij / (1 + |x|^2)^2.
  * Sp(2) is the set of quaternionic 2x2 matrices [[a, c], [b, d]] whose
    rows (a, c) and (b, d) are unit vectors in H^2 satisfying
    conj(a) b + conj(c) d = 0. This is the orientation of the orthogonality
    constraint preserved by the two displayed group actions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dsl import Expr, Num, Var, shift_vars
from .errors import (
    BadParams,
    NotUnit,
    ProjectionFailed,
    UnknownBuiltin,
)
from .geometry import ChartManifold, FrameManifold
from .numerics import Quaternion
from .submersion import ClosedFormSubmersionData, NumericSubmersion

__all__ = [
    "builtin",
    "round_sphere",
    "flat_torus",
    "berger_sphere",
    "hopf_s3_s2",
    "hopf_s7_s4",
    "product",
    "product_closed_form",
    "h_map",
    "h_tilde_map",
    "antipodal",
    "Sp2Element",
    "bullet_action",
    "star_action",
    "s7_action",
    "random_sp2",
    "project_to_sp2",
    "Sp2mElement",
    "sp2m_constraint",
    "wilhelm_action",
    "random_sp2m",
    "quat_mul_batch",
    "quat_conj_batch",
    "random_unit_quats",
]


# ---------------------------------------------------------------------------
# Chart builtins
# ---------------------------------------------------------------------------


def _conformal_sphere_exprs(n: int, r: float) -> list[list[Expr]]:
    xs = [Var(i, f"x{i + 1}") for i in range(n)]
    s = xs[0] * xs[0]
    for x in xs[1:]:
        s = s + x * x
    denom = (Num(1.0) + s) * (Num(1.0) + s)
    conf = Num(4.0 * r * r) / denom
    zero = Num(0.0)
    return [[conf if i == j else zero for j in range(n)] for i in range(n)]


def round_sphere(n: int, r: float = 1.0, half_width: float = 0.8) -> ChartManifold:
    """Round n-sphere of radius r in the stereographic chart."""
    if n < 1 or r <= 0:
        raise BadParams("round_sphere needs n >= 1 and r > 0")
    domain = np.array([[-half_width, half_width]] * n)
    return ChartManifold(
        dim=n, domain=domain, exprs=_conformal_sphere_exprs(n, r),
        name=f"round_sphere({n},{r:g})",
    )


def flat_torus(n: int) -> ChartManifold:
    if n < 1:
        raise BadParams("flat_torus needs n >= 1")
    one = Num(1.0)
    zero = Num(0.0)
    exprs = [[one if i == j else zero for j in range(n)] for i in range(n)]
    domain = np.array([[0.0, 2.0 * math.pi]] * n)
    return ChartManifold(dim=n, domain=domain, exprs=exprs, name=f"flat_torus({n})")


def _s3_structure_coefficients() -> np.ndarray:
    """[e_i, e_j] = 2 eps_ijk e_k: the bi-invariant round S^3 of radius 1."""
    c = np.zeros((3, 3, 3))
    for (k, i, j) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[k, i, j] = 2.0
        c[k, j, i] = -2.0
    return c


def berger_sphere(eps: float) -> FrameManifold:
    """S^3 with the Hopf direction e1 rescaled: frame metric diag(eps,1,1).

    Ricci eigenvalues are {2 eps, 4 - 2 eps, 4 - 2 eps}; this is the
    canonical variation of the Hopf fibration at eps = e^{2t}.
    """
    if eps <= 0:
        raise BadParams("berger_sphere needs eps > 0")
    return FrameManifold(
        dim=3, c=_s3_structure_coefficients(), Q=np.diag([eps, 1.0, 1.0]),
        name=f"berger_sphere({eps:g})",
    )


# ---------------------------------------------------------------------------
# Expression-level quaternion algebra (for exact projection Jacobians)
# ---------------------------------------------------------------------------

_EQuat = tuple[Expr, Expr, Expr, Expr]


def _eq_mul(p: _EQuat, q: _EQuat) -> _EQuat:
    w1, x1, y1, z1 = p
    w2, x2, y2, z2 = q
    return (
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    )


def _eq_conj(q: _EQuat) -> _EQuat:
    w, x, y, z = q
    return (w, -x, -y, -z)


def _eq_norm2(q: _EQuat) -> Expr:
    w, x, y, z = q
    return w * w + x * x + y * y + z * z


def hopf_s3_s2(half_width: float = 0.35):
    """The Hopf fibration S^1 -> S^3 -> S^2(1/2) as a numeric submersion
    plus its closed-form curvature data.

    The total chart point x in R^3 maps stereographically to the unit
    quaternion q; the base point is (1/2) q i conj(q) on S^2(1/2), read in
    the base's stereographic chart.
    """
    total = round_sphere(3, 1.0, half_width=half_width)
    base = round_sphere(2, 0.5, half_width=1.5)
    xs = [Var(i, f"x{i + 1}") for i in range(3)]
    s = xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]
    denom = Num(1.0) + s
    q: _EQuat = (
        (Num(1.0) - s) / denom,
        (Num(2.0) * xs[0]) / denom,
        (Num(2.0) * xs[1]) / denom,
        (Num(2.0) * xs[2]) / denom,
    )
    iq: _EQuat = (Num(0.0), Num(1.0), Num(0.0), Num(0.0))
    qiq = _eq_mul(_eq_mul(q, iq), _eq_conj(q))  # purely imaginary, unit
    # base point P = (1/2) * Im(q i conj(q)) on S^2(1/2); chart y = P_tail/(1/2+P_1)
    p1 = Num(0.5) * qiq[1]
    p2 = Num(0.5) * qiq[2]
    p3 = Num(0.5) * qiq[3]
    chart_denom = Num(0.5) + p1
    proj = (p2 / chart_denom, p3 / chart_denom)
    sub = NumericSubmersion(total=total, base=base, proj_exprs=proj,
                            name="hopf_s3_s2")
    return sub, _hopf_s3_data()


def _gram(x, y) -> float:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    return float((x @ x) * (y @ y) - (x @ y) ** 2)


def _hopf_s3_data() -> ClosedFormSubmersionData:
    # model frame: horizontal R^2 (= span{j, k} at the identity quaternion),
    # vertical R^1 (= span{i}); A_X Y = (x1 y2 - x2 y1) i, A*_X V = v (-x2, x1)
    def a(x, y):
        return np.array([x[0] * y[1] - x[1] * y[0]])

    def a_star(x, v):
        return float(v[0]) * np.array([-x[1], x[0]])

    return ClosedFormSubmersionData(
        k=2, vdim=1, name="hopf_s3_s2",
        ric_b=lambda x: 4.0 * float(np.dot(x, x)),
        ric_f=lambda v: 0.0,
        k_b=lambda x, y: 4.0 * _gram(x, y),
        k_h=_gram,
        k_v=lambda v, w: 0.0,
        a=a,
        a_star=a_star,
        nabla_a_sum=lambda x, v: 0.0,
        nabla_a4=lambda x, y, z: np.zeros(1),
        iso_k_b=4.0, iso_k_h=1.0, iso_k_v=0.0, iso_a_star2=1.0,
    )


def hopf_s7_s4(half_width: float = 0.30):
    """The quaternionic Hopf fibration S^3 -> S^7 -> S^4(1/2)."""
    total = round_sphere(7, 1.0, half_width=half_width)
    base = round_sphere(4, 0.5, half_width=1.5)
    xs = [Var(i, f"x{i + 1}") for i in range(7)]
    s = xs[0] * xs[0]
    for x in xs[1:]:
        s = s + x * x
    denom = Num(1.0) + s
    a: _EQuat = (
        (Num(1.0) - s) / denom,
        (Num(2.0) * xs[0]) / denom,
        (Num(2.0) * xs[1]) / denom,
        (Num(2.0) * xs[2]) / denom,
    )
    b: _EQuat = tuple((Num(2.0) * xs[i]) / denom for i in range(3, 7))
    # P = (1/2) (|a|^2 - |b|^2, 2 a conj(b)) on S^4(1/2); chart from first axis
    abbar = _eq_mul(a, _eq_conj(b))
    p0 = Num(0.5) * (_eq_norm2(a) - _eq_norm2(b))
    chart_denom = Num(0.5) + p0
    proj = tuple(abbar[i] / chart_denom for i in range(4))
    sub = NumericSubmersion(total=total, base=base, proj_exprs=proj,
                            name="hopf_s7_s4")
    return sub, _hopf_s7_data()


def _np_quat_mul(p, q):
    w1, x1, y1, z1 = p
    w2, x2, y2, z2 = q
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def _np_quat_conj(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def _hopf_s7_data() -> ClosedFormSubmersionData:
    # model frame: horizontal R^4 = H, vertical R^3 = Im H;
    # A_X Y = Im(conj(Y) X), A*_X V = -X V (quaternion products)
    def a(x, y):
        prod = _np_quat_mul(_np_quat_conj(y), x)
        return prod[1:]

    def a_star(x, v):
        vq = np.array([0.0, v[0], v[1], v[2]])
        return -_np_quat_mul(x, vq)

    return ClosedFormSubmersionData(
        k=4, vdim=3, name="hopf_s7_s4",
        ric_b=lambda x: 12.0 * float(np.dot(x, x)),
        ric_f=lambda v: 2.0 * float(np.dot(v, v)),
        k_b=lambda x, y: 4.0 * _gram(x, y),
        k_h=_gram,
        k_v=_gram,
        a=a,
        a_star=a_star,
        nabla_a_sum=lambda x, v: 0.0,
        nabla_a4=lambda x, y, z: np.zeros(3),
        iso_k_b=4.0, iso_k_h=1.0, iso_k_v=1.0, iso_a_star2=1.0,
    )


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------


def product(m1: ChartManifold, m2: ChartManifold):
    """Product manifold with the block metric, plus the projection onto the
    first factor as a numeric submersion.
    """
    if m1.exprs is None or m2.exprs is None:
        raise BadParams("product requires expression-backed charts")
    n1, n2 = m1.dim, m2.dim
    n = n1 + n2
    zero = Num(0.0)
    exprs = [[zero for _ in range(n)] for _ in range(n)]
    for i in range(n1):
        for j in range(n1):
            exprs[i][j] = m1.exprs[i][j]
    for i in range(n2):
        for j in range(n2):
            exprs[n1 + i][n1 + j] = shift_vars(m2.exprs[i][j], n1)
    domain = np.vstack([m1.domain, m2.domain])
    total = ChartManifold(dim=n, domain=domain, exprs=exprs,
                          name=f"product({m1.name},{m2.name})")
    proj = tuple(Var(i, f"x{i + 1}") for i in range(n1))
    sub = NumericSubmersion(total=total, base=m1, proj_exprs=proj,
                            name=f"product({m1.name},{m2.name})")
    return total, sub


def product_closed_form(k: int, vdim: int, k_b_const: float,
                        k_f_const: float, name: str = "product"
                        ) -> ClosedFormSubmersionData:
    """Closed-form data for a metric product of two constant-curvature
    Einstein factors: A and nabla A vanish identically.
    """
    return ClosedFormSubmersionData(
        k=k, vdim=vdim, name=name,
        ric_b=lambda x: k_b_const * (k - 1) * float(np.dot(x, x)),
        ric_f=lambda v: k_f_const * (vdim - 1) * float(np.dot(v, v)),
        k_b=lambda x, y: k_b_const * _gram(x, y),
        k_h=lambda x, y: k_b_const * _gram(x, y),
        k_v=lambda v, w: k_f_const * _gram(v, w),
        a=lambda x, y: np.zeros(vdim),
        a_star=lambda x, v: np.zeros(k),
        nabla_a_sum=lambda x, v: 0.0,
        nabla_a4=lambda x, y, z: np.zeros(vdim),
        iso_k_b=k_b_const, iso_k_h=k_b_const, iso_k_v=k_f_const, iso_a_star2=0.0,
    )


# ---------------------------------------------------------------------------
# Builtin dispatcher
# ---------------------------------------------------------------------------

_BUILTINS = {
    "round_sphere": round_sphere,
    "flat_torus": flat_torus,
    "berger_sphere": berger_sphere,
    "hopf_s3_s2": hopf_s3_s2,
    "hopf_s7_s4": hopf_s7_s4,
    "product": product,
}


def builtin(name: str, *args, **kwargs):
    """Construct a catalog object by name; see _BUILTINS for the names."""
    try:
        ctor = _BUILTINS[name]
    except KeyError:
        raise UnknownBuiltin(f"no builtin named {name!r}") from None
    try:
        return ctor(*args, **kwargs)
    except TypeError as exc:
        raise BadParams(f"bad parameters for {name}: {exc}") from exc


# ---------------------------------------------------------------------------
# Quaternionic catalog: Hopf maps and Sp(2)
# ---------------------------------------------------------------------------


def _require_unit_pair(a: Quaternion, b: Quaternion, tol: float = 1e-9):
    if abs(a.norm2() + b.norm2() - 1.0) > tol:
        raise NotUnit("quaternion pair is not a unit vector in H^2")


def h_map(a: Quaternion, b: Quaternion) -> np.ndarray:
    """h(a,b) = (|a|^2 - |b|^2, 2 a conj(b)) in R^5, landing on S^4."""
    _require_unit_pair(a, b)
    v = a * b.conj()
    return np.array([a.norm2() - b.norm2(), 2 * v.w, 2 * v.x, 2 * v.y, 2 * v.z])


def h_tilde_map(a: Quaternion, b: Quaternion) -> np.ndarray:
    """h-tilde(a,b) = (|a|^2 - |b|^2, 2 conj(a) b) in R^5."""
    _require_unit_pair(a, b)
    v = a.conj() * b
    return np.array([a.norm2() - b.norm2(), 2 * v.w, 2 * v.x, 2 * v.y, 2 * v.z])


def antipodal(v: np.ndarray) -> np.ndarray:
    return -np.asarray(v, dtype=float)


@dataclass(frozen=True)
class Sp2Element:
    """Quaternionic 2x2 matrix [[a, c], [b, d]] with unit rows and
    conj(a) b + conj(c) d = 0."""

    a: Quaternion
    b: Quaternion
    c: Quaternion
    d: Quaternion

    def constraint_residual(self) -> float:
        row1 = abs(self.a.norm2() + self.c.norm2() - 1.0)
        row2 = abs(self.b.norm2() + self.d.norm2() - 1.0)
        orth = (self.a.conj() * self.b + self.c.conj() * self.d).norm()
        return max(row1, row2, orth)


def _require_unit_quat(q: Quaternion, tol: float = 1e-9):
    if abs(q.norm2() - 1.0) > tol:
        raise NotUnit("group element must be a unit quaternion")


def bullet_action(q: Quaternion, e: Sp2Element) -> Sp2Element:
    """Principal action: right multiplication of the second row by conj(q)."""
    _require_unit_quat(q)
    qc = q.conj()
    return Sp2Element(a=e.a, c=e.c, b=e.b * qc, d=e.d * qc)


def star_action(q: Quaternion, e: Sp2Element) -> Sp2Element:
    """Star action: (a, c) -> (q a conj(q), q c conj(q)); (b, d) -> (q b, q d)."""
    _require_unit_quat(q)
    qc = q.conj()
    return Sp2Element(a=q * e.a * qc, c=q * e.c * qc, b=q * e.b, d=q * e.d)


def s7_action(q: Quaternion, x: Quaternion, y: Quaternion):
    """Action induced on S^7 read from the first row: (q x conj(q), q y conj(q))."""
    _require_unit_quat(q)
    qc = q.conj()
    return q * x * qc, q * y * qc


def _random_quat(rng) -> Quaternion:
    return Quaternion.from_array(rng.standard_normal(4))


def random_unit_quat(rng) -> Quaternion:
    q = _random_quat(rng)
    return q * (1.0 / q.norm())


def random_sp2(seed_or_rng=0) -> Sp2Element:
    """Seeded random element via quaternionic Gram-Schmidt on the rows."""
    rng = (seed_or_rng if isinstance(seed_or_rng, np.random.Generator)
           else np.random.default_rng(seed_or_rng))
    a, c = _random_quat(rng), _random_quat(rng)
    b, d = _random_quat(rng), _random_quat(rng)
    return project_to_sp2(Sp2Element(a=a, b=b, c=c, d=d))


def project_to_sp2(e: Sp2Element) -> Sp2Element:
    """Normalize row one, remove its component from row two, renormalize."""
    n1 = math.sqrt(e.a.norm2() + e.c.norm2())
    if n1 < 1e-6:
        raise ProjectionFailed("first row is numerically zero")
    a = e.a * (1.0 / n1)
    c = e.c * (1.0 / n1)
    z = a.conj() * e.b + c.conj() * e.d
    b = e.b - a * z
    d = e.d - c * z
    n2 = math.sqrt(b.norm2() + d.norm2())
    if n2 < 1e-6:
        raise ProjectionFailed("second row degenerate after orthogonalization")
    return Sp2Element(a=a, b=b * (1.0 / n2), c=c, d=d * (1.0 / n2))


# ---------------------------------------------------------------------------
# Sp(2, m) and the Wilhelm action
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sp2mElement:
    """Points u_1 ... u_m of S^7 (pairs of quaternions) chained by
    h(u_1) = alpha h(u_2) and h-tilde(u_j) = alpha h(u_{j+1}), j = 2..m-1."""

    us: tuple[tuple[Quaternion, Quaternion], ...]

    @property
    def m(self) -> int:
        return len(self.us)


def sp2m_constraint(e: Sp2mElement) -> float:
    """Max residual over unit-norm and chaining constraints."""
    worst = 0.0
    for (a, b) in e.us:
        worst = max(worst, abs(a.norm2() + b.norm2() - 1.0))
    first = h_map(*e.us[0]) - antipodal(h_map(*e.us[1]))
    worst = max(worst, float(np.max(np.abs(first))))
    for j in range(1, e.m - 1):
        res = h_tilde_map(*e.us[j]) - antipodal(h_map(*e.us[j + 1]))
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def wilhelm_action(qs: Sequence[Quaternion], e: Sp2mElement) -> Sp2mElement:
    """(u_1 conj(q_1), u_2 conj(q_2), q_2 u_3 conj(q_3), ...,
    q_{m-1} u_m conj(q_m))."""
    if len(qs) != e.m:
        raise BadParams("need one unit quaternion per factor")
    for q in qs:
        _require_unit_quat(q)
    out = []
    for j, (a, b) in enumerate(e.us):
        qc = qs[j].conj()
        if j <= 1:
            out.append((a * qc, b * qc))
        else:
            ql = qs[j - 1]
            out.append((ql * a * qc, ql * b * qc))
    return Sp2mElement(us=tuple(out))


def _k_involution(u: tuple[Quaternion, Quaternion]):
    """k(a, b) = (conj(a), conj(b)); satisfies h(k u) = h-tilde(u)."""
    return (u[0].conj(), u[1].conj())


def _complete(u: tuple[Quaternion, Quaternion]):
    """Given u = (a, b) with b != 0, return v on S^7 with h(v) = -h(u)."""
    a, b = u
    nb2 = b.norm2()
    if nb2 < 1e-12:
        raise ProjectionFailed("cannot complete a pair with vanishing b")
    return (b.conj(), -(b * a.conj() * b.conj()) * (1.0 / nb2))


def random_sp2m(m: int, seed_or_rng=0) -> Sp2mElement:
    """Seeded random element of Sp(2, m), built by chaining completions."""
    if m < 2:
        raise BadParams("Sp(2,m) needs m >= 2")
    rng = (seed_or_rng if isinstance(seed_or_rng, np.random.Generator)
           else np.random.default_rng(seed_or_rng))
    raw = rng.standard_normal(8)
    raw /= np.linalg.norm(raw)
    u1 = (Quaternion.from_array(raw[:4]), Quaternion.from_array(raw[4:]))
    us = [u1, _complete(u1)]
    for _ in range(m - 2):
        us.append(_complete(_k_involution(us[-1])))
    return Sp2mElement(us=tuple(us))


# ---------------------------------------------------------------------------
# Batch quaternion helpers (freeness sampling at scale)
# ---------------------------------------------------------------------------


def quat_mul_batch(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product on trailing axis 4, broadcasting leading axes."""
    w1, x1, y1, z1 = np.moveaxis(p, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(q, -1, 0)
    return np.stack([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ], axis=-1)


def quat_conj_batch(q: np.ndarray) -> np.ndarray:
    out = np.array(q, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def random_unit_quats(rng, count: int) -> np.ndarray:
    q = rng.standard_normal((count, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)
