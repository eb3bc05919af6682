"""Crystal dispersion and phase matching for uniaxial crystals.

Refractive indices come from a pinned Sellmeier model (see SELLMEIER
below and DATA_PROVENANCE.md). The crystal optic axis lies in the xz
plane, tilted by the cut angle theta_c from the propagation axis z.
The pump of the type-I process is extraordinary polarized, the two
daughter photons are ordinary polarized (negative uniaxial crystal).

Transverse wave vectors are parametrized throughout by the observation
angle alpha via |k_perp| = (omega / c) sin(alpha), i.e. the value that
is conserved through a z-normal crystal face.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .units import C_UM_FS, lambda_um_from_omega

# Sellmeier sets: n^2 = A + B / (lambda^2 - C) - D * lambda^2, lambda in um.
# BBO coefficients from K. Kato, IEEE J. Quantum Electron. QE-22, 1013 (1986),
# valid 0.22-1.06 um. See DATA_PROVENANCE.md for the verbatim record.
SELLMEIER = {
    "BBO": {
        "ordinary": (2.7359, 0.01878, 0.01822, 0.01354),
        "extraordinary": (2.3753, 0.01224, 0.01667, 0.01516),
        "window_um": (0.22, 1.06),
    },
}


@dataclass(frozen=True)
class CrystalConfig:
    """Uniaxial crystal: material, length (um) and cut angle (rad).

    The cut angle is the angle between the optic axis and the z axis;
    the optic axis direction is (sin theta_c, 0, cos theta_c).
    """

    material: str = "BBO"
    length_um: float = 1000.0
    cut_angle_rad: float = math.radians(30.0)

    def __post_init__(self):
        if self.material not in SELLMEIER:
            raise DomainError(
                f"unknown material {self.material!r}; known: {sorted(SELLMEIER)}"
            )
        if not self.length_um > 0:
            raise DomainError("crystal length must be positive")
        if not 0.0 <= self.cut_angle_rad <= math.pi / 2:
            raise DomainError("cut angle must lie in [0, pi/2]")

    @property
    def half_length(self) -> float:
        return 0.5 * self.length_um


@dataclass(frozen=True)
class GeometryConfig:
    """Collection geometry: observation angle alpha (rad) and the
    degenerate reference frequency omega0 (rad/fs).

    Sign convention: the signal propagates towards +x, the idler towards
    -x, so k_perp_signal = +omega sin(alpha)/c x_hat and
    k_perp_idler = -omega sin(alpha)/c x_hat.
    """

    alpha_rad: float
    omega0: float

    def __post_init__(self):
        if not abs(self.alpha_rad) < math.pi / 2:
            raise DomainError("|alpha| must be below pi/2")
        if not self.omega0 > 0:
            raise DomainError("omega0 must be positive")


def refractive_index(material: str, polarization: str, wavelength_um):
    """Sellmeier refractive index at a vacuum wavelength in um.

    polarization is "ordinary" or "extraordinary" (the principal
    extraordinary index). Raises DomainError outside the transparency
    window of the pinned coefficient set.
    """
    try:
        entry = SELLMEIER[material]
    except KeyError:
        raise DomainError(
            f"unknown material {material!r}; known: {sorted(SELLMEIER)}"
        ) from None
    if polarization not in ("ordinary", "extraordinary"):
        raise DomainError(
            f"polarization must be 'ordinary' or 'extraordinary', got {polarization!r}"
        )
    lam = np.asarray(wavelength_um, dtype=float)
    lo, hi = entry["window_um"]
    if np.any(lam < lo) or np.any(lam > hi):
        raise DomainError(
            f"wavelength {np.min(lam):.4f}-{np.max(lam):.4f} um outside the "
            f"{material} Sellmeier validity window [{lo}, {hi}] um"
        )
    a, b, c, d = entry[polarization]
    n2 = a + b / (lam**2 - c) - d * lam**2
    return np.sqrt(n2)


def _indices_at(omega, crystal: CrystalConfig):
    lam = lambda_um_from_omega(omega)
    n_o = refractive_index(crystal.material, "ordinary", lam)
    n_e = refractive_index(crystal.material, "extraordinary", lam)
    return n_o, n_e


def kz_ordinary(kx, ky, omega, crystal: CrystalConfig):
    """Longitudinal wave-vector component of an ordinary wave (rad/um).

    Returns the +z propagating root sqrt((n_o omega/c)^2 - |k_perp|^2).
    """
    lam = lambda_um_from_omega(omega)
    n_o = refractive_index(crystal.material, "ordinary", lam)
    radicand = (n_o * np.asarray(omega) / C_UM_FS) ** 2 - np.asarray(kx) ** 2 - np.asarray(ky) ** 2
    if np.any(radicand < 0):
        raise DomainError(
            "evanescent ordinary wave: |k_perp| exceeds n_o * omega / c"
        )
    return np.sqrt(radicand)


def kz_extraordinary(kx, ky, omega, crystal: CrystalConfig):
    """Longitudinal wave-vector component of an extraordinary wave (rad/um).

    Solves (k.c_hat)^2 / n_o^2 + |k - (k.c_hat) c_hat|^2 / n_e^2 = (omega/c)^2
    for k_z with the optic axis c_hat = (sin theta_c, 0, cos theta_c),
    taking the +z root. Reduces to n(theta_c) * omega / c on axis.
    """
    n_o, n_e = _indices_at(omega, crystal)
    sin_t = math.sin(crystal.cut_angle_rad)
    cos_t = math.cos(crystal.cut_angle_rad)
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    omega = np.asarray(omega, dtype=float)
    beta = 1.0 / n_o**2 - 1.0 / n_e**2
    a = cos_t**2 / n_o**2 + sin_t**2 / n_e**2
    b = 2.0 * beta * sin_t * cos_t * kx
    c0 = beta * sin_t**2 * kx**2 + (kx**2 + ky**2) / n_e**2 - (omega / C_UM_FS) ** 2
    disc = b * b - 4.0 * a * c0
    if np.any(disc < 0):
        raise DomainError(
            "no real +z root for the extraordinary wave (evanescent input)"
        )
    return (-b + np.sqrt(disc)) / (2.0 * a)


def central_transverse_k(omega, geometry: GeometryConfig, leg: str):
    """Transverse wave vector of the phase-matched direction for one leg.

    Returns an array with shape omega.shape + (2,); the y component is
    always zero since the collection optics sit in the xz plane.
    """
    if leg == "signal":
        sign = 1.0
    elif leg == "idler":
        sign = -1.0
    else:
        raise DomainError(f"leg must be 'signal' or 'idler', got {leg!r}")
    omega = np.asarray(omega, dtype=float)
    kx = sign * omega * math.sin(geometry.alpha_rad) / C_UM_FS
    out = np.zeros(omega.shape + (2,))
    out[..., 0] = kx
    return out


def delta_kz(k_perp_s, omega_s, k_perp_i, omega_i, crystal: CrystalConfig):
    """Exact longitudinal phase mismatch k_pz - k_sz - k_iz (rad/um).

    k_perp_s and k_perp_i are arrays with a trailing axis of length 2
    (x and y components). The pump is extraordinary at omega_s + omega_i
    with transverse wave vector k_perp_s + k_perp_i; signal and idler
    are ordinary.
    """
    k_perp_s = np.asarray(k_perp_s, dtype=float)
    k_perp_i = np.asarray(k_perp_i, dtype=float)
    ksx, ksy = k_perp_s[..., 0], k_perp_s[..., 1]
    kix, kiy = k_perp_i[..., 0], k_perp_i[..., 1]
    k_pz = kz_extraordinary(ksx + kix, ksy + kiy, np.asarray(omega_s) + np.asarray(omega_i), crystal)
    k_sz = kz_ordinary(ksx, ksy, omega_s, crystal)
    k_iz = kz_ordinary(kix, kiy, omega_i, crystal)
    return k_pz - k_sz - k_iz


def delta_kz_at_centers(omega_s, omega_i, crystal: CrystalConfig, geometry: GeometryConfig):
    """Phase mismatch evaluated at the central directions for (omega_s, omega_i)."""
    ks0 = central_transverse_k(omega_s, geometry, "signal")
    ki0 = central_transverse_k(omega_i, geometry, "idler")
    return delta_kz(ks0, omega_s, ki0, omega_i, crystal)


def solve_phase_matching_angle(
    crystal: CrystalConfig,
    omega0: float,
    scan_max_rad: float = math.radians(10.0),
    scan_step_rad: float = math.radians(0.01),
    tol: float = 1e-9,
) -> float:
    """Observation angle alpha at which degenerate emission phase-matches.

    Finds the root of the on-center mismatch at (omega0, omega0) by a
    0.01 degree pre-scan over (0, 10] degrees followed by bisection.
    The returned angle satisfies |delta_kz| < tol (rad/um).
    """

    def residual(alpha):
        k = (omega0 / C_UM_FS) * math.sin(alpha)
        k_pz = kz_extraordinary(0.0, 0.0, 2.0 * omega0, crystal)
        # signal at +k and idler at -k have equal ordinary k_z
        return float(k_pz - 2.0 * kz_ordinary(k, 0.0, omega0, crystal))

    alphas = np.arange(scan_step_rad, scan_max_rad + 0.5 * scan_step_rad, scan_step_rad)
    values = np.array([residual(a) for a in alphas])
    signs = np.sign(values)
    crossings = np.where(signs[:-1] * signs[1:] <= 0)[0]
    if len(crossings) == 0:
        raise DomainError(
            "no phase-matching bracket found for alpha in "
            f"({math.degrees(scan_step_rad):.2f}, {math.degrees(scan_max_rad):.2f}] deg; "
            f"mismatch spans [{values.min():.4g}, {values.max():.4g}] rad/um"
        )
    lo, hi = float(alphas[crossings[0]]), float(alphas[crossings[0] + 1])
    f_lo = residual(lo)
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = residual(mid)
        if abs(f_mid) < tol:
            return mid
        if f_lo * f_mid <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return mid
