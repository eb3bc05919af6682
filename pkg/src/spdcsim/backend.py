"""Hot quadrature kernels: numba-compiled loops with a numpy fallback.

The backend is picked once at import from the SPDCSIM_BACKEND
environment variable: "numba" (require it), "numpy" (pure-numpy path),
or "auto" (default: numba when importable). Both implementations
compute the identical sum

    sum_{m,a,b} pa[m] wz[a] wzp[b] *
        exp(const + 1/4 lin^T quad^-1 lin - 1/2 logdet(quad))

over the outer-quadrature nodes of one density-matrix entry; they are
cross-checked against each other and against kernel.gaussian_integral in
the test suite, and benchmarks/bench_backend.py compares their speed.

Failure protocol: a pivot with non-positive real part marks the entry
integrand non-integrable; kernels return the offending (m, a, b) node
instead of raising so the numba path stays object-mode free.
"""
from __future__ import annotations

import os
import warnings

import numpy as np

_choice = os.environ.get("SPDCSIM_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    warnings.warn(f"unknown SPDCSIM_BACKEND={_choice!r}, falling back to 'auto'")
    _choice = "auto"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    njit = None
    HAVE_NUMBA = False

if _choice == "numba" and not HAVE_NUMBA:
    raise ImportError("SPDCSIM_BACKEND=numba but numba is not importable")

USE_NUMBA = HAVE_NUMBA and _choice != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"

_PRIMED = np.array([0, 1, 4, 5], dtype=np.int64)


def entry_quadrature_numpy(pa, f0u, f0p, g1u, g1p, hu, hp, d0u, d0p,
                           zn, zw, zpn, zpw, gmat, wp2):
    """Vectorized twin of the numba kernel; batches over (m, a, b)."""
    keep = np.nonzero(pa != 0)[0]
    if keep.size == 0:
        return 0.0 + 0.0j, 0, -1, -1, -1
    m_count, na, nb = keep.size, zn.size, zpn.size

    hu6 = np.zeros((m_count, 6, 6))
    hu6[:, 0:4, 0:4] = hu[keep]
    hp6 = np.zeros((m_count, 6, 6))
    hp6[np.ix_(np.arange(m_count), _PRIMED, _PRIMED)] = hp[keep]

    z = zn[None, :, None, None, None]
    zp = zpn[None, None, :, None, None]
    quad = (gmat[None, None, None]
            + 0.5j * z * hu6[:, None, None]
            - 0.5j * zp * hp6[:, None, None])          # (m, a, b, 6, 6)

    lin = np.zeros((m_count, na, nb, 6), dtype=complex)
    lin[..., 0:2] = (-(d0u[keep] + d0p[keep]) * wp2)[:, None, None, :] \
        - 1j * zn[None, :, None, None] * g1u[keep][:, None, None, 0:2] \
        + 1j * zpn[None, None, :, None] * g1p[keep][:, None, None, 0:2]
    lin[..., 2:4] = (-d0u[keep] * wp2)[:, None, None, :] \
        - 1j * zn[None, :, None, None] * g1u[keep][:, None, None, 2:4]
    lin[..., 4:6] = (-d0p[keep] * wp2)[:, None, None, :] \
        + 1j * zpn[None, None, :, None] * g1p[keep][:, None, None, 2:4]

    d0sq = -0.5 * wp2 * ((d0u[keep] ** 2).sum(axis=1) + (d0p[keep] ** 2).sum(axis=1))
    const = (d0sq[:, None, None]
             - 1j * zn[None, :, None] * f0u[keep][:, None, None]
             + 1j * zpn[None, None, :] * f0p[keep][:, None, None])

    B = m_count * na * nb
    a6 = quad.reshape(B, 6, 6).copy()
    rhs = lin.reshape(B, 6).copy()
    lin_flat = lin.reshape(B, 6)
    logdet = np.zeros(B, dtype=complex)
    for k in range(6):
        piv = a6[:, k, k]
        bad = np.nonzero(piv.real <= 0.0)[0]
        if bad.size:
            i = int(bad[0])
            mi, ai, bi = np.unravel_index(i, (m_count, na, nb))
            return np.nan + 0.0j, 1, int(keep[mi]), int(ai), int(bi)
        logdet += np.log(piv)
        if k < 5:
            f = a6[:, k + 1 :, k] / piv[:, None]
            a6[:, k + 1 :, k + 1 :] -= f[:, :, None] * a6[:, None, k, k + 1 :].reshape(B, 1, 5 - k)
            rhs[:, k + 1 :] -= f * rhs[:, k, None]
    for k in range(5, -1, -1):
        if k < 5:
            rhs[:, k] -= (a6[:, k, k + 1 :] * rhs[:, k + 1 :]).sum(axis=1)
        rhs[:, k] /= a6[:, k, k]
    q = (lin_flat * rhs).sum(axis=1)

    weights = (pa[keep][:, None, None] * zw[None, :, None] * zpw[None, None, :]).reshape(B)
    total = (weights * np.exp(const.reshape(B) + 0.25 * q - 0.5 * logdet)).sum()
    return complex(total), 0, -1, -1, -1


def _entry_quadrature_loops(pa, f0u, f0p, g1u, g1p, hu, hp, d0u, d0p,
                            zn, zw, zpn, zpw, gmat, wp2):
    total = 0.0 + 0.0j
    a6 = np.empty((6, 6), np.complex128)
    lin = np.empty(6, np.complex128)
    y = np.empty(6, np.complex128)
    for m in range(pa.shape[0]):
        if pa[m].real == 0.0 and pa[m].imag == 0.0:
            continue
        d0sq = -0.5 * wp2 * (d0u[m, 0] ** 2 + d0u[m, 1] ** 2
                             + d0p[m, 0] ** 2 + d0p[m, 1] ** 2)
        l0x = -(d0u[m, 0] + d0p[m, 0]) * wp2
        l0y = -(d0u[m, 1] + d0p[m, 1]) * wp2
        for a in range(zn.shape[0]):
            z = zn[a]
            for b in range(zpn.shape[0]):
                zp = zpn[b]
                for r in range(6):
                    for c in range(6):
                        a6[r, c] = gmat[r, c]
                for r in range(4):
                    for c in range(4):
                        a6[r, c] += 0.5j * z * hu[m, r, c]
                for r in range(4):
                    rr = r if r < 2 else r + 2
                    for c in range(4):
                        cc = c if c < 2 else c + 2
                        a6[rr, cc] += -0.5j * zp * hp[m, r, c]
                lin[0] = l0x - 1j * z * g1u[m, 0] + 1j * zp * g1p[m, 0]
                lin[1] = l0y - 1j * z * g1u[m, 1] + 1j * zp * g1p[m, 1]
                lin[2] = -d0u[m, 0] * wp2 - 1j * z * g1u[m, 2]
                lin[3] = -d0u[m, 1] * wp2 - 1j * z * g1u[m, 3]
                lin[4] = -d0p[m, 0] * wp2 + 1j * zp * g1p[m, 2]
                lin[5] = -d0p[m, 1] * wp2 + 1j * zp * g1p[m, 3]
                const = d0sq - 1j * z * f0u[m] + 1j * zp * f0p[m]

                logdet = 0.0 + 0.0j
                for i in range(6):
                    y[i] = lin[i]
                ok = True
                for k in range(6):
                    piv = a6[k, k]
                    if piv.real <= 0.0:
                        ok = False
                        break
                    logdet += np.log(piv)
                    for r in range(k + 1, 6):
                        f = a6[r, k] / piv
                        for c in range(k + 1, 6):
                            a6[r, c] -= f * a6[k, c]
                        y[r] -= f * y[k]
                if not ok:
                    return np.nan + 0.0j, 1, m, a, b
                for k in range(5, -1, -1):
                    acc = y[k]
                    for c in range(k + 1, 6):
                        acc -= a6[k, c] * y[c]
                    y[k] = acc / a6[k, k]
                q = 0.0 + 0.0j
                for i in range(6):
                    q += lin[i] * y[i]
                total += pa[m] * zw[a] * zpw[b] * np.exp(const + 0.25 * q - 0.5 * logdet)
    return total, 0, -1, -1, -1


if HAVE_NUMBA:
    entry_quadrature_numba = njit(cache=True, nogil=True)(_entry_quadrature_loops)
else:
    entry_quadrature_numba = None

entry_quadrature = entry_quadrature_numba if USE_NUMBA else entry_quadrature_numpy
