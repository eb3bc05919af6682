"""Gaussian reduction of the six-dimensional transverse integral.

At fixed (omega_s, omega_i, omega_i', z, z') the product of the pump
profile pair, the two collection-mode profiles and the quadratic-phase
factors is a single Gaussian in the stacked deviation vector
kappa6 = (kappa_s, kappa_i, kappa_i'):

    exp(-kappa6^T quad kappa6 + lin^T kappa6 + const)

and its integral over R^6 has the closed form

    exp(const + 1/4 lin^T quad^-1 lin) / sqrt(det quad)

up to a constant pi^3 that is dropped together with the mode
normalization constants; the final trace normalization absorbs them.

The square root branch: with Re(quad) positive definite every pivot of
the unpivoted elimination stays in the right half plane, so summing
principal logs of the pivots yields a log-determinant that is continuous
along any parameter sweep. That keeps the coherent (z, z') sum free of
sign jumps without explicit unwrapping.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IntegrabilityError
from .paraxial import ExpansionCache, ParaxialExpansion
from .dispersion import CrystalConfig, GeometryConfig

_PRIMED_IDX = (0, 1, 4, 5)   # rows/cols of the (s, i') block inside the 6x6


@dataclass(frozen=True)
class BeamGeometry:
    """Pump waist and back-propagated collection-mode waist at the crystal, um.

    Waists below 1 um are rejected: the paraxial treatment assumes beams
    much wider than a wavelength.
    """

    pump_waist_um: float
    collection_waist_um: float

    def __post_init__(self):
        if self.pump_waist_um < 1.0 or self.collection_waist_um < 1.0:
            raise DomainError("beam waists below 1 um are outside the paraxial regime")


@dataclass(frozen=True)
class GaussianExponent:
    """Quadratic form of one integrand instance: const, lin (6,), quad (6,6)."""

    const: complex
    lin: np.ndarray
    quad: np.ndarray
    context: tuple = ()


def geometric_matrix(beams: BeamGeometry) -> np.ndarray:
    """Real part of the quadratic form at z = z' = 0 (pure beam geometry)."""
    wp2 = beams.pump_waist_um**2
    wf2 = beams.collection_waist_um**2
    g = np.zeros((6, 6))
    i2 = np.eye(2)
    g[0:2, 0:2] = wp2 * i2
    g[0:2, 2:4] = g[2:4, 0:2] = 0.5 * wp2 * i2
    g[0:2, 4:6] = g[4:6, 0:2] = 0.5 * wp2 * i2
    g[2:4, 2:4] = 0.5 * (wp2 + wf2) * i2
    g[4:6, 4:6] = 0.5 * (wp2 + wf2) * i2
    return g


def assemble_exponent(
    exp_u: ParaxialExpansion,
    exp_p: ParaxialExpansion,
    z: float,
    zp: float,
    beams: BeamGeometry,
) -> GaussianExponent:
    """Build the Gaussian exponent from the two expansions.

    exp_u is taken at (omega_s, omega_i) and enters the conjugated factor
    with phase -i z delta_kz; exp_p at (omega_s, omega_i') enters with
    +i z' delta_kz'. Both must share the same omega_s.
    """
    if exp_u.omega_s != exp_p.omega_s:
        raise DomainError(
            f"expansions disagree on omega_s: {exp_u.omega_s} vs {exp_p.omega_s}"
        )
    wp2 = beams.pump_waist_um**2
    d0u = exp_u.k_s0 + exp_u.k_i0
    d0p = exp_p.k_s0 + exp_p.k_i0

    quad = geometric_matrix(beams).astype(complex)
    quad[0:4, 0:4] += 0.5j * z * exp_u.hessian
    quad[np.ix_(_PRIMED_IDX, _PRIMED_IDX)] += -0.5j * zp * exp_p.hessian

    lin = np.empty(6, dtype=complex)
    lin[0:2] = -(d0u + d0p) * wp2 - 1j * z * exp_u.gradient[:2] + 1j * zp * exp_p.gradient[:2]
    lin[2:4] = -d0u * wp2 - 1j * z * exp_u.gradient[2:]
    lin[4:6] = -d0p * wp2 + 1j * zp * exp_p.gradient[2:]

    const = (
        -0.5 * wp2 * (d0u @ d0u + d0p @ d0p)
        - 1j * z * exp_u.value
        + 1j * zp * exp_p.value
    )
    return GaussianExponent(
        const=complex(const),
        lin=lin,
        quad=quad,
        context=(exp_u.omega_s, exp_u.omega_i, exp_p.omega_i, z, zp),
    )


def logdet_rhp_and_solve(quad: np.ndarray, lin: np.ndarray):
    """Pivot-accumulated log det and quad^-1 lin for a complex symmetric matrix.

    Unpivoted elimination; every pivot must have a positive real part
    (guaranteed while Re(quad) is positive definite). Raises
    IntegrabilityError otherwise.
    """
    a = np.array(quad, dtype=complex)
    y = np.array(lin, dtype=complex)
    n = a.shape[0]
    logdet = 0.0 + 0.0j
    for k in range(n):
        piv = a[k, k]
        if piv.real <= 0.0:
            raise IntegrabilityError(
                f"elimination pivot {k} left the right half plane: {piv}"
            )
        logdet += np.log(piv)
        for r in range(k + 1, n):
            f = a[r, k] / piv
            a[r, k] = f
            a[r, k + 1 :] -= f * a[k, k + 1 :]
            y[r] -= f * y[k]
    for k in range(n - 1, -1, -1):
        y[k] = (y[k] - a[k, k + 1 :] @ y[k + 1 :]) / a[k, k]
    return logdet, y


def gaussian_integral(m: GaussianExponent) -> complex:
    """Closed-form value of the 6-D Gaussian integral, pi^3 prefactor dropped."""
    try:
        logdet, y = logdet_rhp_and_solve(m.quad, m.lin)
    except IntegrabilityError as err:
        raise IntegrabilityError(f"{err} at context {m.context}") from None
    q = m.lin @ y
    return complex(np.exp(m.const + 0.25 * q - 0.5 * logdet))


def integrand(
    omega_s: float,
    omega_i: float,
    omega_i_prime: float,
    z: float,
    zp: float,
    crystal: CrystalConfig,
    geometry: GeometryConfig,
    beams: BeamGeometry,
    cache: ExpansionCache | None = None,
) -> complex:
    """Inner (z, z') integrand at one node: expansion, assembly, reduction."""
    if cache is None:
        cache = ExpansionCache(crystal, geometry)
    exp_u = cache.get(omega_s, omega_i)
    exp_p = cache.get(omega_s, omega_i_prime)
    return gaussian_integral(assemble_exponent(exp_u, exp_p, z, zp, beams))
