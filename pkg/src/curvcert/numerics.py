"""Small dense linear algebra, forward-mode differentiation, quadrature and
quaternion algebra.

Everything here is a pure function of its inputs; matrices are plain numpy
arrays (row-major, dimensions well below 32).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MaxSubdivisions, NotPositiveDefinite

__all__ = [
    "symmetrize",
    "is_symmetric",
    "sym_generalized_eigen_min",
    "DualNumber",
    "Jet2",
    "adaptive_quadrature",
    "gauss_legendre",
    "Quaternion",
]


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return the exactly-symmetric part of a square matrix."""
    return 0.5 * (a + a.T)


def is_symmetric(a: np.ndarray, tol: float = 0.0) -> bool:
    return bool(np.all(np.abs(a - a.T) <= tol))


def sym_generalized_eigen_min(a: np.ndarray, g: np.ndarray) -> float:
    """Smallest lambda with ``a v = lambda g v`` for symmetric a, SPD g.

    Solved by Cholesky reduction to a standard symmetric eigenproblem,
    which keeps the result deterministic for fixed inputs.
    """
    a = np.asarray(a, dtype=float)
    g = np.asarray(g, dtype=float)
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("metric matrix is not positive definite") from exc
    linv = np.linalg.inv(chol)
    b = symmetrize(linv @ a @ linv.T)
    return float(np.linalg.eigvalsh(b)[0])


# ---------------------------------------------------------------------------
# Forward-mode differentiation
# ---------------------------------------------------------------------------


def _as_dual(x, nvars: int) -> "DualNumber":
    if isinstance(x, DualNumber):
        return x
    return DualNumber(float(x), np.zeros(nvars))


@dataclass
class DualNumber:
    """Value plus first partials with respect to the active variables."""

    value: float
    partials: np.ndarray

    @staticmethod
    def variable(value: float, index: int, nvars: int) -> "DualNumber":
        partials = np.zeros(nvars)
        partials[index] = 1.0
        return DualNumber(float(value), partials)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        o = _as_dual(other, len(self.partials))
        return DualNumber(self.value + o.value, self.partials + o.partials)

    __radd__ = __add__

    def __neg__(self):
        return DualNumber(-self.value, -self.partials)

    def __sub__(self, other):
        return self + (-_as_dual(other, len(self.partials)))

    def __rsub__(self, other):
        return _as_dual(other, len(self.partials)) - self

    def __mul__(self, other):
        o = _as_dual(other, len(self.partials))
        return DualNumber(
            self.value * o.value,
            self.value * o.partials + o.value * self.partials,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_dual(other, len(self.partials))
        if o.value == 0.0:
            raise DomainError("division by zero")
        inv = 1.0 / o.value
        return DualNumber(
            self.value * inv,
            (self.partials - self.value * inv * o.partials) * inv,
        )

    def __rtruediv__(self, other):
        return _as_dual(other, len(self.partials)) / self

    def __pow__(self, p):
        if isinstance(p, DualNumber):
            if np.any(p.partials != 0.0):
                return (p * self.log()).exp()
            p = p.value
        if float(p).is_integer():
            return self._int_pow(int(p))
        if self.value <= 0.0:
            raise DomainError("non-integer power of a non-positive base")
        return (float(p) * self.log()).exp()

    def _int_pow(self, k: int):
        if k == 0:
            return DualNumber(1.0, np.zeros_like(self.partials))
        if k < 0:
            return 1.0 / self._int_pow(-k)
        out = self
        for _ in range(k - 1):
            out = out * self
        return out

    # -- elementary functions -----------------------------------------------

    def _lift(self, value: float, deriv: float) -> "DualNumber":
        return DualNumber(value, deriv * self.partials)

    def sin(self):
        return self._lift(math.sin(self.value), math.cos(self.value))

    def cos(self):
        return self._lift(math.cos(self.value), -math.sin(self.value))

    def tan(self):
        c = math.cos(self.value)
        if c == 0.0:
            raise DomainError("tan at a pole")
        return self._lift(math.tan(self.value), 1.0 / (c * c))

    def exp(self):
        e = math.exp(self.value)
        return self._lift(e, e)

    def log(self):
        if self.value <= 0.0:
            raise DomainError("log of a non-positive value")
        return self._lift(math.log(self.value), 1.0 / self.value)

    def sqrt(self):
        if self.value < 0.0:
            raise DomainError("sqrt of a negative value")
        if self.value == 0.0:
            raise DomainError("sqrt derivative at zero")
        s = math.sqrt(self.value)
        return self._lift(s, 0.5 / s)

    def cosh(self):
        return self._lift(math.cosh(self.value), math.sinh(self.value))

    def sinh(self):
        return self._lift(math.sinh(self.value), math.cosh(self.value))

    def __abs__(self):
        if self.value == 0.0:
            raise DomainError("abs derivative at zero")
        return self._lift(abs(self.value), math.copysign(1.0, self.value))


def _as_jet(x, nvars: int) -> "Jet2":
    if isinstance(x, Jet2):
        return x
    return Jet2(float(x), np.zeros(nvars), np.zeros((nvars, nvars)))


@dataclass
class Jet2:
    """Second-order forward jet: value, gradient and Hessian."""

    value: float
    grad: np.ndarray
    hess: np.ndarray

    @staticmethod
    def variable(value: float, index: int, nvars: int) -> "Jet2":
        grad = np.zeros(nvars)
        grad[index] = 1.0
        return Jet2(float(value), grad, np.zeros((nvars, nvars)))

    def __add__(self, other):
        o = _as_jet(other, len(self.grad))
        return Jet2(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-_as_jet(other, len(self.grad)))

    def __rsub__(self, other):
        return _as_jet(other, len(self.grad)) - self

    def __mul__(self, other):
        o = _as_jet(other, len(self.grad))
        cross = np.outer(self.grad, o.grad)
        return Jet2(
            self.value * o.value,
            self.value * o.grad + o.value * self.grad,
            self.value * o.hess + o.value * self.hess + cross + cross.T,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_jet(other, len(self.grad))
        if o.value == 0.0:
            raise DomainError("division by zero")
        return self * o._compose(1.0 / o.value, -1.0 / o.value**2, 2.0 / o.value**3)

    def __rtruediv__(self, other):
        return _as_jet(other, len(self.grad)) / self

    def __pow__(self, p):
        if isinstance(p, Jet2):
            if np.any(p.grad != 0.0) or np.any(p.hess != 0.0):
                return (p * self.log()).exp()
            p = p.value
        if float(p).is_integer():
            return self._int_pow(int(p))
        if self.value <= 0.0:
            raise DomainError("non-integer power of a non-positive base")
        p = float(p)
        return self._compose(
            self.value**p,
            p * self.value ** (p - 1.0),
            p * (p - 1.0) * self.value ** (p - 2.0),
        )

    def _int_pow(self, k: int):
        if k == 0:
            return Jet2(1.0, np.zeros_like(self.grad), np.zeros_like(self.hess))
        if k < 0:
            return 1.0 / self._int_pow(-k)
        out = self
        for _ in range(k - 1):
            out = out * self
        return out

    def _compose(self, f: float, fp: float, fpp: float) -> "Jet2":
        """Chain rule for a scalar function with given f, f', f'' at self.value."""
        outer = np.outer(self.grad, self.grad)
        return Jet2(f, fp * self.grad, fp * self.hess + fpp * outer)

    def sin(self):
        return self._compose(
            math.sin(self.value), math.cos(self.value), -math.sin(self.value)
        )

    def cos(self):
        return self._compose(
            math.cos(self.value), -math.sin(self.value), -math.cos(self.value)
        )

    def tan(self):
        c = math.cos(self.value)
        if c == 0.0:
            raise DomainError("tan at a pole")
        t = math.tan(self.value)
        sec2 = 1.0 / (c * c)
        return self._compose(t, sec2, 2.0 * t * sec2)

    def exp(self):
        e = math.exp(self.value)
        return self._compose(e, e, e)

    def log(self):
        if self.value <= 0.0:
            raise DomainError("log of a non-positive value")
        return self._compose(
            math.log(self.value), 1.0 / self.value, -1.0 / self.value**2
        )

    def sqrt(self):
        if self.value < 0.0:
            raise DomainError("sqrt of a negative value")
        if self.value == 0.0:
            raise DomainError("sqrt derivative at zero")
        s = math.sqrt(self.value)
        return self._compose(s, 0.5 / s, -0.25 / (s * self.value))

    def cosh(self):
        return self._compose(
            math.cosh(self.value), math.sinh(self.value), math.cosh(self.value)
        )

    def sinh(self):
        return self._compose(
            math.sinh(self.value), math.cosh(self.value), math.sinh(self.value)
        )

    def __abs__(self):
        if self.value == 0.0:
            raise DomainError("abs derivative at zero")
        s = math.copysign(1.0, self.value)
        return self._compose(abs(self.value), s, 0.0)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _simpson(f, a, fa, b, fb, m, fm):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_quadrature(f, lo: float, hi: float, tol: float = 1e-10,
                        max_depth: int = 60) -> float:
    """Adaptive Simpson integration of f over [lo, hi].

    Raises MaxSubdivisions if the recursion cap is reached before the local
    error estimate drops below tolerance.
    """
    if not lo < hi:
        raise ValueError("adaptive_quadrature requires lo < hi")
    flo, fhi = f(lo), f(hi)
    mid = 0.5 * (lo + hi)
    fmid = f(mid)
    whole = _simpson(f, lo, flo, hi, fhi, mid, fmid)

    def recurse(a, fa, b, fb, m, fm, s, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = _simpson(f, a, fa, m, fm, lm, flm)
        right = _simpson(f, m, fm, b, fb, rm, frm)
        err = abs(left + right - s)
        # tol acts as an absolute target and, for large-magnitude
        # integrals, a relative one; the rounding floor of the local
        # values bounds what refinement can achieve at all
        floor = 50.0 * 2.220446049250313e-16 * (abs(left) + abs(right) + abs(s))
        if err <= max(15.0 * max(tol, tol * abs(left + right)), floor):
            return left + right + (left + right - s) / 15.0
        if depth >= max_depth:
            raise MaxSubdivisions(
                f"quadrature did not reach tol={tol} within {max_depth} levels"
            )
        half = 0.5 * tol
        return recurse(a, fa, m, fm, lm, flm, left, half, depth + 1) + recurse(
            m, fm, b, fb, rm, frm, right, half, depth + 1
        )

    return recurse(lo, flo, hi, fhi, mid, fmid, whole, tol, 0)


def gauss_legendre(f, lo: float, hi: float, panels: int = 8,
                   order: int = 16) -> float:
    """Composite Gauss-Legendre quadrature, used as a cross-check oracle."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        center = 0.5 * (a + b)
        total += half * sum(w * f(center + half * x) for x, w in zip(nodes, weights))
    return total


# ---------------------------------------------------------------------------
# Quaternions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Quaternion:
    """Hamilton quaternion with float components."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @staticmethod
    def from_array(a) -> "Quaternion":
        return Quaternion(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __add__(self, q: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + q.w, self.x + q.x, self.y + q.y, self.z + q.z)

    def __sub__(self, q: "Quaternion") -> "Quaternion":
        return Quaternion(self.w - q.w, self.x - q.x, self.y - q.y, self.z - q.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, q):
        if isinstance(q, (int, float)):
            return Quaternion(self.w * q, self.x * q, self.y * q, self.z * q)
        return Quaternion(
            self.w * q.w - self.x * q.x - self.y * q.y - self.z * q.z,
            self.w * q.x + self.x * q.w + self.y * q.z - self.z * q.y,
            self.w * q.y - self.x * q.z + self.y * q.w + self.z * q.x,
            self.w * q.z + self.x * q.y - self.y * q.x + self.z * q.w,
        )

    def __rmul__(self, s):
        if isinstance(s, (int, float)):
            return self * s
        return NotImplemented

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w**2 + self.x**2 + self.y**2 + self.z**2

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def dot(self, q: "Quaternion") -> float:
        return self.w * q.w + self.x * q.x + self.y * q.y + self.z * q.z

    def imag(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def is_unit(self, tol: float = 1e-12) -> bool:
        return abs(self.norm() - 1.0) <= tol


def quat_mul(p: Quaternion, q: Quaternion) -> Quaternion:
    return p * q


def quat_conj(q: Quaternion) -> Quaternion:
    return q.conj()
