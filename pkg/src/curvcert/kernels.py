"""Curvature assembly kernels.

Two implementations of each kernel: an explicit-loop version compiled with
numba, and a pure-numpy einsum version. The environment variable
``CURVCERT_DISABLE_NUMBA=1`` (read at import time) selects the numpy path;
otherwise numba is used when importable.

Index conventions
-----------------
``g[i, j]``          metric components
``dg[m, i, j]``      d_m g_ij
``d2g[m, n, i, j]``  d_m d_n g_ij
``gamma[k, i, j]``   Christoffel symbols of the second kind
``rup[l, i, j, k]``  R^l_{ijk} = d_i Gamma^l_jk - d_j Gamma^l_ik + ...
``ric[j, k]``        Ricci tensor, ric_jk = R^i_{ijk}
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "NUMBA_ENABLED",
    "curvature_from_derivs",
    "frame_curvature",
]

_DISABLED = os.environ.get("CURVCERT_DISABLE_NUMBA", "") == "1"

if not _DISABLED:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba = None
else:
    numba = None

NUMBA_ENABLED = numba is not None


# ---------------------------------------------------------------------------
# Pure-numpy implementations
# ---------------------------------------------------------------------------


def _curvature_numpy(g, dg, d2g):
    ginv = np.linalg.inv(g)
    # bracket[i,j,l] = d_i g_jl + d_j g_il - d_l g_ij
    bracket = (
        dg
        + np.einsum("jil->ijl", dg)
        - np.einsum("lij->ijl", dg)
    )
    gamma = 0.5 * np.einsum("kl,ijl->kij", ginv, bracket)

    # d_m gamma^k_ij needs d_m g^{kl} = -g^{ka} (d_m g_ab) g^{bl}
    dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
    dbracket = (
        d2g
        + np.einsum("mjil->mijl", d2g)
        - np.einsum("mlij->mijl", d2g)
    )
    dgamma = 0.5 * (
        np.einsum("mkl,ijl->mkij", dginv, bracket)
        + np.einsum("kl,mijl->mkij", ginv, dbracket)
    )

    # R^l_{ijk} = d_i gamma^l_jk - d_j gamma^l_ik
    #           + gamma^l_{im} gamma^m_{jk} - gamma^l_{jm} gamma^m_{ik}
    rup = (
        np.einsum("iljk->lijk", dgamma)
        - np.einsum("jlik->lijk", dgamma)
        + np.einsum("lim,mjk->lijk", gamma, gamma)
        - np.einsum("ljm,mik->lijk", gamma, gamma)
    )
    ric = np.einsum("iijk->jk", rup)
    return gamma, rup, ric


def _frame_curvature_numpy(c, q):
    """Curvature of a left-invariant metric from constant structure
    coefficients ``c[k, i, j]`` ([e_i, e_j] = c^k_ij e_k) and frame metric q.
    """
    qinv = np.linalg.inv(q)
    # lowered coefficients c_ijk = q_kl c^l_ij
    clow = np.einsum("kl,lij->ijk", q, c)
    # Koszul: omega_ijk = g(nabla_{e_i} e_j, e_k) = (c_ijk - c_jki + c_kij)/2
    omega = 0.5 * (
        clow - np.einsum("jki->ijk", clow) + np.einsum("kij->ijk", clow)
    )
    gamma = np.einsum("kl,ijl->kij", qinv, omega)
    # R^l_{ijk} = gamma^m_jk gamma^l_im - gamma^m_ik gamma^l_jm - c^m_ij gamma^l_mk
    rup = (
        np.einsum("mjk,lim->lijk", gamma, gamma)
        - np.einsum("mik,ljm->lijk", gamma, gamma)
        - np.einsum("mij,lmk->lijk", c, gamma)
    )
    ric = np.einsum("iijk->jk", rup)
    return gamma, rup, ric


# ---------------------------------------------------------------------------
# Numba implementations (explicit loops)
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @numba.njit(cache=True)
    def _curvature_numba(g, dg, d2g):  # pragma: no cover - exercised via wrapper
        n = g.shape[0]
        ginv = np.linalg.inv(g)
        gamma = np.zeros((n, n, n))
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    acc = 0.0
                    for l in range(n):
                        acc += ginv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j])
                    gamma[k, i, j] = 0.5 * acc

        dginv = np.zeros((n, n, n))
        for m in range(n):
            for k in range(n):
                for l in range(n):
                    acc = 0.0
                    for a in range(n):
                        for b in range(n):
                            acc -= ginv[k, a] * dg[m, a, b] * ginv[b, l]
                    dginv[m, k, l] = acc

        dgamma = np.zeros((n, n, n, n))  # dgamma[m, k, i, j] = d_m gamma^k_ij
        for m in range(n):
            for k in range(n):
                for i in range(n):
                    for j in range(n):
                        acc = 0.0
                        for l in range(n):
                            br = dg[i, j, l] + dg[j, i, l] - dg[l, i, j]
                            dbr = (
                                d2g[m, i, j, l]
                                + d2g[m, j, i, l]
                                - d2g[m, l, i, j]
                            )
                            acc += dginv[m, k, l] * br + ginv[k, l] * dbr
                        dgamma[m, k, i, j] = 0.5 * acc

        rup = np.zeros((n, n, n, n))
        for l in range(n):
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        acc = dgamma[i, l, j, k] - dgamma[j, l, i, k]
                        for m in range(n):
                            acc += (
                                gamma[l, i, m] * gamma[m, j, k]
                                - gamma[l, j, m] * gamma[m, i, k]
                            )
                        rup[l, i, j, k] = acc

        ric = np.zeros((n, n))
        for j in range(n):
            for k in range(n):
                acc = 0.0
                for i in range(n):
                    acc += rup[i, i, j, k]
                ric[j, k] = acc
        return gamma, rup, ric

    @numba.njit(cache=True)
    def _frame_curvature_numba(c, q):  # pragma: no cover - exercised via wrapper
        n = q.shape[0]
        qinv = np.linalg.inv(q)
        clow = np.zeros((n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    acc = 0.0
                    for l in range(n):
                        acc += q[k, l] * c[l, i, j]
                    clow[i, j, k] = acc

        gamma = np.zeros((n, n, n))
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    acc = 0.0
                    for l in range(n):
                        omega = 0.5 * (clow[i, j, l] - clow[j, l, i] + clow[l, i, j])
                        acc += qinv[k, l] * omega
                    gamma[k, i, j] = acc

        rup = np.zeros((n, n, n, n))
        for l in range(n):
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        acc = 0.0
                        for m in range(n):
                            acc += (
                                gamma[m, j, k] * gamma[l, i, m]
                                - gamma[m, i, k] * gamma[l, j, m]
                                - c[m, i, j] * gamma[l, m, k]
                            )
                        rup[l, i, j, k] = acc

        ric = np.zeros((n, n))
        for j in range(n):
            for k in range(n):
                acc = 0.0
                for i in range(n):
                    acc += rup[i, i, j, k]
                ric[j, k] = acc
        return gamma, rup, ric


# ---------------------------------------------------------------------------
# Dispatchers
# ---------------------------------------------------------------------------


def curvature_from_derivs(g, dg, d2g, *, use_numba: bool | None = None):
    """Christoffel symbols, curvature R^l_{ijk} and Ricci tensor from the
    metric and its first two coordinate derivatives at a point.
    """
    g = np.ascontiguousarray(g, dtype=np.float64)
    dg = np.ascontiguousarray(dg, dtype=np.float64)
    d2g = np.ascontiguousarray(d2g, dtype=np.float64)
    if use_numba is None:
        use_numba = NUMBA_ENABLED
    if use_numba and NUMBA_ENABLED:
        return _curvature_numba(g, dg, d2g)
    return _curvature_numpy(g, dg, d2g)


def frame_curvature(c, q, *, use_numba: bool | None = None):
    """Connection and curvature for a metric that is constant in a frame
    with constant structure coefficients (Lie group with invariant metric).
    """
    c = np.ascontiguousarray(c, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    if use_numba is None:
        use_numba = NUMBA_ENABLED
    if use_numba and NUMBA_ENABLED:
        return _frame_curvature_numba(c, q)
    return _frame_curvature_numpy(c, q)
