"""Spectral density matrix pipeline: outer quadratures, pump spectra,
filtering, normalization and diagnostics.

The matrix entry at (omega_i, omega_i') is

    rho[i, i'] = int dws  A*(ws + omega_i) A(ws + omega_i')
                 int dz dz'  <closed-form transverse integral>

integrated with Gauss-Legendre rules: z and z' over the crystal length
and ws over a window of +-W/tau_p around the energy-conservation center
2 omega_0 - (omega_i + omega_i')/2 of that entry (the pump amplitudes
bound the support). Entries are independent, so the upper triangle is
evaluated in parallel and mirrored by conjugation.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import backend
from .dispersion import CrystalConfig, GeometryConfig, central_transverse_k
from .errors import ConfigError, DomainError, IntegrabilityError, StateError
from .kernel import BeamGeometry, geometric_matrix
from .paraxial import expansion_blocks
from .quadrature import gauss_legendre
from .units import lambda_nm_from_omega, omega_from_lambda_nm

_QUARTER_PI = np.pi ** 0.25


@dataclass(frozen=True)
class PumpSpectrum:
    """Spectral amplitude of the pump pulse.

    Gaussian kind: A(w) = sqrt(tau_p)/pi^(1/4) exp(-tau_p^2 (w - w_c)^2 / 2),
    normalized to unit integral of |A|^2. Tabulated kind: complex samples
    interpolated linearly in omega; queries outside the tabulated support
    are a domain error.
    """

    kind: str
    omega_center: float
    duration_fs: float = 0.0
    table_omega: np.ndarray | None = None
    table_amp: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "tabulated"):
            raise ConfigError(f"pump kind must be gaussian or tabulated, got {self.kind!r}")
        if self.kind == "gaussian" and not self.duration_fs > 0:
            raise ConfigError("pump duration_fs must be positive")
        if self.kind == "tabulated":
            if self.table_omega is None or self.table_amp is None:
                raise ConfigError("tabulated pump needs omega and amplitude tables")
            if len(self.table_omega) < 2:
                raise ConfigError("tabulated pump needs at least two samples")

    @classmethod
    def gaussian(cls, duration_fs: float, omega_center: float) -> "PumpSpectrum":
        return cls(kind="gaussian", omega_center=omega_center, duration_fs=duration_fs)

    @classmethod
    def tabulated(cls, omega: np.ndarray, amplitude: np.ndarray,
                  omega_center: float | None = None) -> "PumpSpectrum":
        order = np.argsort(omega)
        omega = np.asarray(omega, dtype=float)[order]
        amplitude = np.asarray(amplitude, dtype=complex)[order]
        if omega_center is None:
            power = np.abs(amplitude) ** 2
            omega_center = float(np.trapezoid(omega * power, omega)
                                 / np.trapezoid(power, omega))
        return cls(kind="tabulated", omega_center=omega_center,
                   table_omega=omega, table_amp=amplitude)

    def amplitude(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.kind == "gaussian":
            tp = self.duration_fs
            return (np.sqrt(tp) / _QUARTER_PI
                    * np.exp(-0.5 * tp**2 * (omega - self.omega_center) ** 2)
                    ).astype(complex)
        lo, hi = self.table_omega[0], self.table_omega[-1]
        if np.any(omega < lo) or np.any(omega > hi):
            raise DomainError(
                f"pump spectrum queried at omega outside tabulated support [{lo}, {hi}]"
            )
        re = np.interp(omega, self.table_omega, self.table_amp.real)
        im = np.interp(omega, self.table_omega, self.table_amp.imag)
        return re + 1j * im

    def signal_window(self, omega_row: float, omega_col: float, width: float):
        """Support of A*(ws+omega_row) A(ws+omega_col) in ws, or None if empty.

        For the Gaussian pump the window is +-width/tau_p around the
        energy-conservation center; for tabulated pumps it is the
        intersection of the two shifted supports.
        """
        if self.kind == "gaussian":
            center = self.omega_center - 0.5 * (omega_row + omega_col)
            half = width / self.duration_fs
            return center - half, center + half
        lo = self.table_omega[0] - min(omega_row, omega_col)
        hi = self.table_omega[-1] - max(omega_row, omega_col)
        if hi <= lo:
            return None
        return lo, hi


def pump_amplitude(spectrum: PumpSpectrum, omega):
    """Complex pump spectral amplitude at omega (rad/fs)."""
    return spectrum.amplitude(omega)


@dataclass(frozen=True)
class SpectralFilter:
    """Gaussian amplitude filter exp(-2 ln2 (w - w_c)^2 / sigma^2).

    sigma is the intensity FWHM in rad/fs: |transmission|^2 drops to 1/2
    at w_c +- sigma/2.
    """

    sigma: float
    omega_center: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError("filter sigma must be positive")

    @classmethod
    def from_nm(cls, fwhm_nm: float, center_nm: float) -> "SpectralFilter":
        from .units import filter_fwhm_to_omega

        return cls(
            sigma=filter_fwhm_to_omega(fwhm_nm, center_nm),
            omega_center=float(omega_from_lambda_nm(center_nm)),
        )

    def amplitude(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.exp(-2.0 * math.log(2.0) * (omega - self.omega_center) ** 2 / self.sigma**2)


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts for the z, z' and omega_s integrals plus the window width.

    window_width W sets the omega_s integration range to +-W/tau_p around
    each entry's energy-conservation center; W >= 2.76 keeps at least
    99.99% of the pump spectral power inside the window.
    """

    nz: int = 16
    nzp: int = 16
    nws: int = 24
    window_width: float = 5.0

    def __post_init__(self):
        for name in ("nz", "nzp", "nws"):
            if getattr(self, name) < 4:
                raise ConfigError(f"quadrature.{name} must be >= 4")
        if self.window_width < 2.76:
            raise ConfigError("quadrature window_width must be >= 2.76")


def build_omega_grid(lambda_min_nm: float, lambda_max_nm: float, points: int) -> np.ndarray:
    """Output grid: uniform in wavelength, returned as omega (rad/fs)."""
    if not 0 < lambda_min_nm < lambda_max_nm:
        raise ConfigError("grid wavelength bounds must satisfy 0 < min < max")
    if points < 2:
        raise ConfigError("grid needs at least 2 points")
    lam = np.linspace(lambda_min_nm, lambda_max_nm, points)
    return omega_from_lambda_nm(lam)


@dataclass
class DensityMatrix:
    """Hermitian matrix sampled on an idler-frequency grid.

    omega is the grid (rad/fs) in the storage order of the value axes;
    the grid is uniform in wavelength, so omega is non-uniform. The
    trace and all derived quantities use trapezoidal quadrature weights.
    """

    omega: np.ndarray
    values: np.ndarray
    normalized: bool = False

    @property
    def lambda_nm(self) -> np.ndarray:
        return lambda_nm_from_omega(self.omega)

    @property
    def weights(self) -> np.ndarray:
        d = np.abs(np.diff(self.omega))
        w = np.zeros_like(self.omega)
        w[:-1] += 0.5 * d
        w[1:] += 0.5 * d
        return w

    def trace(self) -> float:
        return float(np.real(self.weights @ np.diag(self.values)))

    def hermiticity_residual(self) -> float:
        scale = np.abs(self.values).max()
        if scale == 0:
            return 0.0
        return float(np.abs(self.values - self.values.conj().T).max() / scale)


def compute_density_matrix(
    crystal: CrystalConfig,
    geometry: GeometryConfig,
    beams: BeamGeometry,
    pump: PumpSpectrum,
    grid_omega: np.ndarray,
    quad: QuadratureSpec = QuadratureSpec(),
    threads: int = 1,
) -> DensityMatrix:
    """Unnormalized density matrix on the output grid.

    Deterministic for a fixed configuration regardless of thread count:
    each entry is an independent fixed-order quadrature sum.
    """
    grid_omega = np.asarray(grid_omega, dtype=float)
    n = grid_omega.size
    gmat = geometric_matrix(beams)
    wp2 = beams.pump_waist_um**2
    half_l = crystal.half_length
    zn, zw = gauss_legendre(-half_l, half_l, quad.nz)
    zpn, zpw = gauss_legendre(-half_l, half_l, quad.nzp)

    def entry(j: int, k: int) -> complex:
        w_row, w_col = grid_omega[j], grid_omega[k]
        window = pump.signal_window(w_row, w_col, quad.window_width)
        if window is None:
            return 0.0 + 0.0j
        ws, wsw = gauss_legendre(window[0], window[1], quad.nws)
        pa = np.conj(pump.amplitude(ws + w_row)) * pump.amplitude(ws + w_col) * wsw
        if not np.any(pa != 0):
            return 0.0 + 0.0j
        ks0, ki0_u, f0u, g1u, hu = expansion_blocks(ws, w_row, crystal, geometry)
        if k == j:
            ki0_p, f0p, g1p, hp = ki0_u, f0u, g1u, hu
        else:
            _, ki0_p, f0p, g1p, hp = expansion_blocks(ws, w_col, crystal, geometry)
        d0u = ks0 + ki0_u
        d0p = ks0 + ki0_p
        val, status, mi, ai, bi = backend.entry_quadrature(
            pa, f0u, f0p, g1u, g1p, hu, hp, d0u, d0p, zn, zw, zpn, zpw, gmat, wp2
        )
        if status != 0:
            raise IntegrabilityError(
                "quadratic form lost positive-definiteness at node "
                f"omega_s={ws[mi]:.6f}, z={zn[ai]:.2f}, z'={zpn[bi]:.2f} "
                f"for entry (omega_i={w_row:.6f}, omega_i'={w_col:.6f})"
            )
        return val

    pairs = [(j, k) for j in range(n) for k in range(j, n)]
    values = np.zeros((n, n), dtype=complex)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: entry(*p), pairs))
    else:
        results = [entry(*p) for p in pairs]
    for (j, k), v in zip(pairs, results):
        values[j, k] = v
        if k != j:
            values[k, j] = np.conj(v)
    return DensityMatrix(omega=grid_omega.copy(), values=values, normalized=False)


def apply_filter(rho: DensityMatrix, filt: SpectralFilter) -> DensityMatrix:
    """Elementwise amplitude filtering; output is marked unnormalized."""
    lam = filt.amplitude(rho.omega)
    return DensityMatrix(
        omega=rho.omega.copy(),
        values=rho.values * lam[:, None] * lam[None, :],
        normalized=False,
    )


def normalize(rho: DensityMatrix) -> DensityMatrix:
    """Scale so the quadrature-weighted trace equals one."""
    tr = rho.trace()
    if not tr > 0:
        raise StateError(f"cannot normalize: trace = {tr}")
    return DensityMatrix(omega=rho.omega.copy(), values=rho.values / tr, normalized=True)


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2) under the grid quadrature weights; needs a normalized input."""
    if not rho.normalized:
        raise StateError("purity requires a normalized density matrix")
    w = rho.weights
    return float(np.real(np.einsum("j,k,jk->", w, w, np.abs(rho.values) ** 2)))


def eigenmodes(rho: DensityMatrix):
    """Spectral decomposition of the integral operator.

    Returns (eigenvalues descending, mode matrix V) with rho = V diag(vals) V^H
    exactly; the columns of V are orthonormal under the quadrature weights,
    so the eigenvalues sum to the weighted trace.
    """
    if rho.hermiticity_residual() > 1e-8:
        raise StateError("eigenmodes requires a Hermitian matrix")
    sw = np.sqrt(rho.weights)
    b = sw[:, None] * rho.values * sw[None, :]
    b = 0.5 * (b + b.conj().T)
    vals, vecs = np.linalg.eigh(b)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    v = vecs / sw[:, None]
    return vals, v


def marginal_spectrum(rho: DensityMatrix) -> np.ndarray:
    """Diagonal of the matrix (the heralded photon's spectrum), real part."""
    return np.real(np.diag(rho.values))


def spectral_fwhm_nm(rho: DensityMatrix) -> float:
    """Intensity FWHM of the marginal spectrum along the wavelength axis.

    Linear interpolation of the half-maximum crossings on the
    uniform-in-wavelength grid; returns the full grid span if the
    spectrum does not fall below half maximum inside the grid.
    """
    lam = rho.lambda_nm
    s = marginal_spectrum(rho)
    peak = s.max()
    if peak <= 0:
        return 0.0
    half = 0.5 * peak
    above = s >= half
    idx = np.nonzero(above)[0]
    left, right = idx[0], idx[-1]
    if left == 0:
        lo = lam[0]
    else:
        f = (half - s[left - 1]) / (s[left] - s[left - 1])
        lo = lam[left - 1] + f * (lam[left] - lam[left - 1])
    if right == len(s) - 1:
        hi = lam[-1]
    else:
        f = (half - s[right + 1]) / (s[right] - s[right + 1])
        hi = lam[right + 1] - f * (lam[right + 1] - lam[right])
    return float(hi - lo)
