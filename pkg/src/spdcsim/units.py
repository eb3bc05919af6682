"""Internal unit system and conversions.

Everything inside the package uses lengths in micrometers, time in
femtoseconds, angular frequencies in rad/fs and wave numbers in rad/um.
In this system all quantities of interest sit near unity for typical
femtosecond SPDC sources. User-facing configuration is in lab units
(nm, mm, fs, degrees) and is converted on load.
"""
import numpy as np

C_UM_FS = 0.299792458   # speed of light, um/fs
C_NM_FS = 299.792458    # speed of light, nm/fs
TWO_PI_C_NM = 2.0 * np.pi * C_NM_FS


def omega_from_lambda_nm(lambda_nm):
    """Vacuum wavelength in nm -> angular frequency in rad/fs."""
    return TWO_PI_C_NM / np.asarray(lambda_nm, dtype=float)


def lambda_nm_from_omega(omega):
    """Angular frequency in rad/fs -> vacuum wavelength in nm."""
    return TWO_PI_C_NM / np.asarray(omega, dtype=float)


def lambda_um_from_omega(omega):
    """Angular frequency in rad/fs -> vacuum wavelength in um."""
    return 2.0 * np.pi * C_UM_FS / np.asarray(omega, dtype=float)


def filter_fwhm_to_omega(fwhm_nm: float, center_nm: float) -> float:
    """Intensity FWHM of a filter given in nm -> rad/fs at its center."""
    return TWO_PI_C_NM * fwhm_nm / center_nm**2
