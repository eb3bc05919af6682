"""Second-order expansion of the phase mismatch in transverse deviations.

For each frequency pair the exact mismatch is expanded around the
phase-matched directions in the four-component deviation
kappa = (k_perp_s - k_s0, k_perp_i - k_i0):

    delta_kz ~ value + gradient . kappa + 1/2 kappa^T hessian kappa

Dispersion stays exact in frequency; only the transverse dependence is
expanded. Derivatives are central finite differences with one Richardson
refinement, so the dispersion model remains swappable.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .dispersion import CrystalConfig, GeometryConfig, central_transverse_k, delta_kz, kz_extraordinary, kz_ordinary
from .errors import DomainError
from .units import C_UM_FS

# Base finite-difference step in rad/um. With f ~ 13 rad/um and second
# derivatives ~ 0.03 um, the roundoff noise of a second difference is
# ~ 4 eps |f| / (H h^2); h = 2e-3 balances it against the h^2 truncation
# term at ~ 1e-8 relative. (A much smaller step drowns the Hessian in
# cancellation noise.)
FD_STEP = 2e-3

_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _stencil_offsets(h: float) -> np.ndarray:
    """All kappa offsets needed for gradient and Hessian at steps h, h/2."""
    rows = [np.zeros(4)]
    for step in (h, 0.5 * h):
        for i in range(4):
            for s in (+1.0, -1.0):
                e = np.zeros(4)
                e[i] = s * step
                rows.append(e)
        for i, j in _PAIRS:
            for si in (+1.0, -1.0):
                for sj in (+1.0, -1.0):
                    e = np.zeros(4)
                    e[i], e[j] = si * step, sj * step
                    rows.append(e)
    return np.array(rows)


def _combine(values: np.ndarray, h: float):
    """Gradient and raw Hessian from values on the _stencil_offsets grid.

    values has shape (..., 65) matching the offset table layout:
    index 0 is the center, then per step {h, h/2}: 8 single-axis points
    (axis-major, +/- minor), then 24 pair points.
    """
    f0 = values[..., 0]
    grad = np.empty(values.shape[:-1] + (4,))
    hess = np.empty(values.shape[:-1] + (4, 4))

    def block(base):
        single = {}
        for i in range(4):
            single[i] = (values[..., base + 2 * i], values[..., base + 2 * i + 1])
        pair = {}
        off = base + 8
        for idx, (i, j) in enumerate(_PAIRS):
            pair[(i, j)] = (
                values[..., off + 4 * idx],      # (+,+)
                values[..., off + 4 * idx + 1],  # (+,-)
                values[..., off + 4 * idx + 2],  # (-,+)
                values[..., off + 4 * idx + 3],  # (-,-)
            )
        return single, pair

    s_h, p_h = block(1)
    s_h2, p_h2 = block(1 + 32)

    for i in range(4):
        d_h = (s_h[i][0] - s_h[i][1]) / (2.0 * h)
        d_h2 = (s_h2[i][0] - s_h2[i][1]) / h
        grad[..., i] = (4.0 * d_h2 - d_h) / 3.0
        c_h = (s_h[i][0] - 2.0 * f0 + s_h[i][1]) / h**2
        c_h2 = (s_h2[i][0] - 2.0 * f0 + s_h2[i][1]) / (0.5 * h) ** 2
        hess[..., i, i] = (4.0 * c_h2 - c_h) / 3.0
    for i, j in _PAIRS:
        pp, pm, mp, mm = p_h[(i, j)]
        m_h = (pp - pm - mp + mm) / (4.0 * h**2)
        pp, pm, mp, mm = p_h2[(i, j)]
        m_h2 = (pp - pm - mp + mm) / (4.0 * (0.5 * h) ** 2)
        v = (4.0 * m_h2 - m_h) / 3.0
        hess[..., i, j] = v
        hess[..., j, i] = v
    return f0, grad, hess


def _check_margin(omega_s, omega_i, k_s0, k_i0, crystal: CrystalConfig, h: float):
    """Require the stencil to sit at least 3h inside the kz domains."""
    m = 3.0 * h
    for omega, k0 in ((omega_s, k_s0), (omega_i, k_i0)):
        r = np.hypot(k0[..., 0], k0[..., 1]) + m
        kz_ordinary(r, 0.0, omega, crystal)
    kp0 = k_s0 + k_i0
    rp = np.hypot(kp0[..., 0], kp0[..., 1]) + 2.0 * m
    kz_extraordinary(rp, 0.0, np.asarray(omega_s) + np.asarray(omega_i), crystal)


@dataclass(frozen=True)
class ParaxialExpansion:
    """Quadratic model of delta_kz around the central directions.

    value is the mismatch at the expansion point, gradient the
    4-vector of first derivatives and hessian the raw (unhalved)
    symmetric 4x4 of second derivatives, axes ordered
    (s_x, s_y, i_x, i_y). The conventional second-order coefficient
    matrix (half the Hessian) is exposed as `half_hessian`.
    """

    omega_s: float
    omega_i: float
    k_s0: np.ndarray
    k_i0: np.ndarray
    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    @property
    def half_hessian(self) -> np.ndarray:
        return 0.5 * self.hessian

    def model(self, kappa) -> np.ndarray:
        """Evaluate the quadratic model at deviations kappa (..., 4)."""
        kappa = np.asarray(kappa, dtype=float)
        lin = kappa @ self.gradient
        quad = 0.5 * np.einsum("...i,ij,...j->...", kappa, self.hessian, kappa)
        return self.value + lin + quad


def expansion_blocks(omega_s, omega_i: float, crystal: CrystalConfig, geometry: GeometryConfig, h: float = FD_STEP):
    """Vectorized expansion over an array of signal frequencies.

    Returns (k_s0, k_i0, value, gradient, hessian) with leading axis
    matching omega_s. This is the hot path feeding the kernel backend.
    """
    omega_s = np.atleast_1d(np.asarray(omega_s, dtype=float))
    k_s0 = central_transverse_k(omega_s, geometry, "signal")
    k_i0 = central_transverse_k(np.full_like(omega_s, omega_i), geometry, "idler")
    _check_margin(omega_s, omega_i, k_s0, k_i0, crystal, h)

    off = _stencil_offsets(h)                       # (65, 4)
    ks = k_s0[:, None, :] + off[None, :, :2]        # (M, 65, 2)
    ki = k_i0[:, None, :] + off[None, :, 2:]
    vals = delta_kz(ks, omega_s[:, None], ki, omega_i, crystal)
    value, grad, hess = _combine(vals, h)
    return k_s0, k_i0, value, grad, hess


def expand_delta_kz(omega_s: float, omega_i: float, crystal: CrystalConfig, geometry: GeometryConfig, h: float = FD_STEP) -> ParaxialExpansion:
    """Quadratic expansion of the mismatch at one frequency pair."""
    k_s0, k_i0, value, grad, hess = expansion_blocks(
        np.array([omega_s]), omega_i, crystal, geometry, h
    )
    return ParaxialExpansion(
        omega_s=float(omega_s),
        omega_i=float(omega_i),
        k_s0=k_s0[0],
        k_i0=k_i0[0],
        value=float(value[0]),
        gradient=grad[0],
        hessian=hess[0],
    )


def differentiate_delta_kz(omega_s: float, omega_i: float, crystal: CrystalConfig, geometry: GeometryConfig, order: int, h: float = FD_STEP):
    """First- or second-derivative blocks of the mismatch.

    order=1 returns (d_s, d_i), the 2-vectors of x/y derivatives for the
    signal and idler deviations. order=2 returns (d_ss, d_si, d_ii), the
    raw 2x2 Hessian blocks.
    """
    exp = expand_delta_kz(omega_s, omega_i, crystal, geometry, h)
    if order == 1:
        return exp.gradient[:2], exp.gradient[2:]
    if order == 2:
        H = exp.hessian
        return H[0:2, 0:2], H[0:2, 2:4], H[2:4, 2:4]
    raise DomainError(f"order must be 1 or 2, got {order!r}")


def expansion_residual(exp: ParaxialExpansion, crystal: CrystalConfig, radius: float, n: int = 9):
    """Worst model error over a kappa cube of the given radius.

    Returns (max_abs_error, exact_variation) sampled on an n^4 grid;
    callers compare the ratio against their tolerance.
    """
    axis = np.linspace(-radius, radius, n)
    kap = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 4)
    ks = exp.k_s0[None, :] + kap[:, :2]
    ki = exp.k_i0[None, :] + kap[:, 2:]
    exact = delta_kz(ks, exp.omega_s, ki, exp.omega_i, crystal)
    model = exp.model(kap)
    return float(np.abs(model - exact).max()), float(exact.max() - exact.min())


@dataclass
class ExpansionCache:
    """Thread-safe memo of expansions keyed by the frequency pair."""

    crystal: CrystalConfig
    geometry: GeometryConfig
    h: float = FD_STEP
    _data: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def get(self, omega_s: float, omega_i: float) -> ParaxialExpansion:
        key = (float(omega_s), float(omega_i))
        with self._lock:
            hit = self._data.get(key)
        if hit is not None:
            return hit
        exp = expand_delta_kz(omega_s, omega_i, self.crystal, self.geometry, self.h)
        with self._lock:
            return self._data.setdefault(key, exp)
