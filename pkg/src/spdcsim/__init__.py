"""Spectral density matrix of a fiber-coupled photon from pulsed
type-I non-collinear parametric down-conversion.

The analytic pipeline expands the longitudinal phase mismatch to second
order in the transverse wave-vector deviations, integrates the resulting
six-dimensional Gaussian in closed form, and quadratures the remaining
crystal-position and signal-frequency integrals. Brute-force oracles in
spdcsim.oracle validate both the Gaussian algebra and the paraxial
approximation itself.
"""

__version__ = "0.1.0"

from .backend import BACKEND, HAVE_NUMBA
from .config import SourceConfig, config_from_dict, config_hash, load_config, resolved_dict
from .density import (
    DensityMatrix,
    PumpSpectrum,
    QuadratureSpec,
    SpectralFilter,
    apply_filter,
    build_omega_grid,
    compute_density_matrix,
    eigenmodes,
    marginal_spectrum,
    normalize,
    pump_amplitude,
    purity,
    spectral_fwhm_nm,
)
from .dispersion import (
    CrystalConfig,
    GeometryConfig,
    central_transverse_k,
    delta_kz,
    delta_kz_at_centers,
    kz_extraordinary,
    kz_ordinary,
    refractive_index,
    solve_phase_matching_angle,
)
from .errors import ConfigError, DomainError, IntegrabilityError, SpdcsimError, StateError
from .kernel import (
    BeamGeometry,
    GaussianExponent,
    assemble_exponent,
    gaussian_integral,
    integrand,
)
from .oracle import (
    OracleReport,
    compare,
    density_matrix_direct,
    density_matrix_quadratic_direct,
    psi_i_direct,
    run_oracle,
    z_line_amplitude,
)
from .paraxial import (
    ExpansionCache,
    ParaxialExpansion,
    differentiate_delta_kz,
    expand_delta_kz,
    expansion_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
