"""Brute-force integrators validating the analytic pipeline.

Two independent references:

* density_matrix_quadratic_direct evaluates the same paraxially expanded
  integrand as the pipeline, but performs the six-dimensional transverse
  integral by tensor-product Gauss-Hermite quadrature instead of the
  closed form. Agreement isolates the Gaussian-reduction algebra.

* density_matrix_direct never expands: it builds the fiber-projected
  amplitude with the exact dispersion relation (the crystal-length
  integral in closed sinc form) and traces out the signal numerically.
  Agreement bounds the error of the paraxial expansion itself.

Both are desk-scale by construction and meant for small grids.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import SourceConfig
from .density import DensityMatrix, QuadratureSpec, build_omega_grid, normalize
from .dispersion import GeometryConfig, central_transverse_k, delta_kz
from .errors import ConfigError, DomainError
from .kernel import geometric_matrix
from .paraxial import expansion_blocks
from .quadrature import gauss_hermite, gauss_legendre
from .units import C_UM_FS

_PRIMED = np.array([0, 1, 4, 5])


@dataclass
class OracleReport:
    """Outcome of one oracle comparison."""

    rel_frobenius_error: float
    max_abs_entry_error: float
    node_counts: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "rel_frobenius_error": self.rel_frobenius_error,
            "max_abs_entry_error": self.max_abs_entry_error,
            "node_counts": self.node_counts,
            "runtime_s": self.runtime_s,
        }


def z_line_amplitude(dkz, length_um: float):
    """Closed-form crystal-length integral of exp(i dkz z): L sinc(dkz L / 2)."""
    x = np.asarray(dkz) * (0.5 * length_um)
    return length_um * np.sinc(x / np.pi)


def psi_i_direct(
    k_perp_s,
    omega_s: float,
    omega_i: float,
    config: SourceConfig,
    alpha_rad: float | None = None,
    n_nodes: int = 32,
    delta_kz_override: float | None = None,
    include_pump_amplitude: bool = True,
):
    """Fiber-projected pair amplitude with exact dispersion.

    Integrates the collection-mode profile against the pump profile and
    the sinc phase factor over the idler transverse plane, by
    Gauss-Hermite quadrature matched to the collection-mode envelope.
    k_perp_s has a trailing axis of length 2 and may carry leading axes.

    delta_kz_override is a test hook replacing the exact mismatch with a
    constant.
    """
    geometry = config.geometry(alpha_rad)
    wp, wf = config.beams.pump_waist_um, config.beams.collection_waist_um
    ki0 = central_transverse_k(omega_i, geometry, "idler")
    t, w = gauss_hermite(n_nodes)
    scale = np.sqrt(2.0) / wf
    kx = ki0[0] + scale * t
    ky = scale * t
    w2 = (np.outer(w, w) * np.exp(t * t)[:, None] * np.exp(t * t)[None, :]) * scale**2
    kix, kiy = np.meshgrid(kx, ky, indexing="ij")
    ki = np.stack([kix, kiy], axis=-1)                      # (n, n, 2)

    k_perp_s = np.asarray(k_perp_s, dtype=float)
    lead = k_perp_s.shape[:-1]
    ks = k_perp_s.reshape((-1, 1, 1, 2))
    if delta_kz_override is None:
        dkz = delta_kz(ks, omega_s, ki[None], omega_i, config.crystal)
    else:
        dkz = np.full(ks.shape[:-1][:1] + kix.shape, float(delta_kz_override))
    zfac = z_line_amplitude(dkz, config.crystal.length_um)
    u_i = (wf / np.sqrt(np.pi)) * np.exp(
        -0.5 * wf**2 * ((kix - ki0[0]) ** 2 + (kiy - ki0[1]) ** 2)
    )
    ksum = ks + ki[None]
    u_p = (wp / np.sqrt(np.pi)) * np.exp(-0.5 * wp**2 * (ksum**2).sum(axis=-1))
    amp = config.pump.amplitude(omega_s + omega_i) if include_pump_amplitude else 1.0
    out = amp * np.einsum("cd,ncd->n", w2 * u_i, u_p * zfac)
    return out.reshape(lead) if lead else complex(out[0])


def _signal_nodes(config: SourceConfig, omega_row, omega_col, alpha_rad, n_transverse):
    """Per-entry signal-plane Gauss-Hermite grid.

    Centered between the two signal-side envelope centers of the entry
    (at -k_i0 of each idler frequency) and scaled to the combined
    pump/collection width plus half their separation, so the narrowest
    integrands stay resolved at large waists.
    """
    sin_a = np.sin(alpha_rad)
    c_row = omega_row * sin_a / C_UM_FS
    c_col = omega_col * sin_a / C_UM_FS
    mid = 0.5 * (c_row + c_col)
    sep = abs(c_row - c_col)
    wp, wf = config.beams.pump_waist_um, config.beams.collection_waist_um
    sigma = np.sqrt(1.0 / wp**2 + 1.0 / wf**2)
    scale = np.sqrt(2.0) * sigma + 0.5 * sep
    t, w = gauss_hermite(n_transverse)
    kx = mid + scale * t
    ky = scale * t
    w2 = (np.outer(w, w) * np.exp(t * t)[:, None] * np.exp(t * t)[None, :]) * scale**2
    return kx, ky, w2


def density_matrix_direct(
    config: SourceConfig,
    grid_points: int = 5,
    n_transverse: int = 32,
    threads: int = 1,
) -> DensityMatrix:
    """Exact-dispersion reference matrix on a small grid (no expansion).

    Traces the two-photon amplitude over the signal frequency (the same
    per-entry Gauss-Legendre window as the pipeline) and the signal
    transverse plane (Gauss-Hermite).
    """
    if grid_points > 8:
        raise ConfigError("exact-direct oracle is limited to grids of at most 8x8")
    alpha = config.resolve_alpha()
    grid = build_omega_grid(config.lambda_min_nm, config.lambda_max_nm, grid_points)
    nws = config.quadrature.nws
    width = config.quadrature.window_width

    def psi_block(omega_s_nodes, omega_i, kgrid):
        # (n_ws, n_ks) matrix of amplitudes, pump factor excluded
        out = np.empty((len(omega_s_nodes), kgrid.shape[0]), dtype=complex)
        for m, ws in enumerate(omega_s_nodes):
            out[m] = psi_i_direct(
                kgrid, ws, omega_i, config, alpha_rad=alpha,
                n_nodes=n_transverse, include_pump_amplitude=False,
            )
        return out

    def entry(j, k):
        w_row, w_col = grid[j], grid[k]
        window = config.pump.signal_window(w_row, w_col, width)
        if window is None:
            return 0.0 + 0.0j
        ksx, ksy, ws2 = _signal_nodes(config, w_row, w_col, alpha, n_transverse)
        kx2, ky2 = np.meshgrid(ksx, ksy, indexing="ij")
        kgrid = np.stack([kx2, ky2], axis=-1).reshape(-1, 2)
        wflat = ws2.reshape(-1)
        nodes, wts = gauss_legendre(window[0], window[1], nws)
        pa = np.conj(config.pump.amplitude(nodes + w_row)) * config.pump.amplitude(nodes + w_col)
        pu = psi_block(nodes, w_row, kgrid)
        pp = pu if k == j else psi_block(nodes, w_col, kgrid)
        inner = np.einsum("mk,k,mk->m", np.conj(pu), wflat, pp)
        return complex(np.sum(wts * pa * inner))

    n = grid.size
    values = np.zeros((n, n), dtype=complex)
    pairs = [(j, k) for j in range(n) for k in range(j, n)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: entry(*p), pairs))
    else:
        results = [entry(*p) for p in pairs]
    for (j, k), v in zip(pairs, results):
        values[j, k] = v
        if k != j:
            values[k, j] = np.conj(v)
    return DensityMatrix(omega=grid, values=values, normalized=False)


def density_matrix_quadratic_direct(
    config: SourceConfig,
    grid_points: int = 5,
    gh_nodes: int = 6,
    quad: QuadratureSpec | None = None,
    threads: int = 1,
    chunk: int = 128,
) -> DensityMatrix:
    """Tensor Gauss-Hermite evaluation of the paraxially expanded integrand.

    Uses exactly the outer quadrature nodes of the pipeline, so any
    disagreement with compute_density_matrix is the transverse step
    alone. The six-dimensional rule is preconditioned by the Cholesky
    factor of the beam-geometry matrix, which maps the integrand onto a
    near-unit Gaussian and makes a handful of nodes per axis sufficient.
    """
    if grid_points > 5:
        raise ConfigError("quadratic-direct oracle is limited to grids of at most 5x5")
    quad = quad or config.quadrature
    alpha = config.resolve_alpha()
    geometry = GeometryConfig(alpha_rad=alpha, omega0=config.omega0)
    crystal = config.crystal
    grid = build_omega_grid(config.lambda_min_nm, config.lambda_max_nm, grid_points)
    wp2 = config.beams.pump_waist_um**2

    gmat = geometric_matrix(config.beams)
    chol = np.linalg.cholesky(gmat)
    linv = np.linalg.inv(chol)
    jac = 1.0 / np.prod(np.diag(chol))

    t, w = gauss_hermite(gh_nodes)
    T = np.stack(np.meshgrid(*([t] * 6), indexing="ij"), axis=-1).reshape(-1, 6)
    W = np.stack(np.meshgrid(*([w] * 6), indexing="ij"), axis=-1).reshape(-1, 6).prod(axis=1)
    # the e^{+t^2} compensation cancels against the unit Gaussian left after
    # preconditioning, so only cross and imaginary-quadratic terms remain
    pair_i, pair_j = np.triu_indices(6)
    pair_w = np.where(pair_i == pair_j, 1.0, 2.0)
    P = T[:, pair_i] * T[:, pair_j] * pair_w[None, :]      # (N, 21)

    half_l = crystal.half_length
    zn, zw = gauss_legendre(-half_l, half_l, quad.nz)
    zpn, zpw = gauss_legendre(-half_l, half_l, quad.nzp)

    def entry(j, k):
        w_row, w_col = grid[j], grid[k]
        window = config.pump.signal_window(w_row, w_col, quad.window_width)
        if window is None:
            return 0.0 + 0.0j
        ws, wsw = gauss_legendre(window[0], window[1], quad.nws)
        pa = np.conj(config.pump.amplitude(ws + w_row)) * config.pump.amplitude(ws + w_col) * wsw
        ks0, ki0u, f0u, g1u, hu = expansion_blocks(ws, w_row, crystal, geometry)
        if k == j:
            ki0p, f0p, g1p, hp = ki0u, f0u, g1u, hu
        else:
            _, ki0p, f0p, g1p, hp = expansion_blocks(ws, w_col, crystal, geometry)
        d0u, d0p = ks0 + ki0u, ks0 + ki0p

        m_count = len(ws)
        hu6 = np.zeros((m_count, 6, 6))
        hu6[:, 0:4, 0:4] = hu
        hp6 = np.zeros((m_count, 6, 6))
        hp6[np.ix_(np.arange(m_count), _PRIMED, _PRIMED)] = hp
        # preconditioned imaginary quadratic parts, linear in z and z'
        su = np.einsum("ij,mjk,lk->mil", linv, 0.5 * hu6, linv)
        sp = np.einsum("ij,mjk,lk->mil", linv, 0.5 * hp6, linv)

        lin = np.zeros((m_count, quad.nz, quad.nzp, 6), dtype=complex)
        lin[..., 0:2] = (-(d0u + d0p) * wp2)[:, None, None, :] \
            - 1j * zn[None, :, None, None] * g1u[:, None, None, 0:2] \
            + 1j * zpn[None, None, :, None] * g1p[:, None, None, 0:2]
        lin[..., 2:4] = (-d0u * wp2)[:, None, None, :] \
            - 1j * zn[None, :, None, None] * g1u[:, None, None, 2:4]
        lin[..., 4:6] = (-d0p * wp2)[:, None, None, :] \
            + 1j * zpn[None, None, :, None] * g1p[:, None, None, 2:4]
        d0sq = -0.5 * wp2 * ((d0u**2).sum(axis=1) + (d0p**2).sum(axis=1))
        const = (d0sq[:, None, None]
                 - 1j * zn[None, :, None] * f0u[:, None, None]
                 + 1j * zpn[None, None, :] * f0p[:, None, None])

        b_t = lin @ linv.T                                  # (m, a, b, 6)
        u0 = b_t.real / 2.0
        za = zn[None, :, None, None]
        zb = zpn[None, None, :, None]
        s_u0 = (za * np.einsum("mij,mabj->mabi", su, u0)
                - zb * np.einsum("mij,mabj->mabi", sp, u0))
        svec = (za * su[:, pair_i, pair_j][:, None, None, :]
                - zb * sp[:, pair_i, pair_j][:, None, None, :])
        c0 = (-(u0 * u0).sum(axis=-1)
              - 1j * (u0 * s_u0).sum(axis=-1)
              + (u0 * b_t).sum(axis=-1))
        cvec = -2.0 * u0 - 2j * s_u0 + b_t

        B = m_count * quad.nz * quad.nzp
        svec = svec.reshape(B, len(pair_i))
        c0 = c0.reshape(B)
        cvec = cvec.reshape(B, 6)
        const = const.reshape(B)
        wout = (pa[:, None, None] * zw[None, :, None] * zpw[None, None, :]).reshape(B)

        total = 0.0 + 0.0j
        for lo in range(0, B, chunk):
            sel = slice(lo, min(lo + chunk, B))
            live = np.nonzero(wout[sel] != 0)[0]
            if live.size == 0:
                continue
            expo = (c0[sel][live][None, :]
                    + T @ cvec[sel][live].T
                    - 1j * (P @ svec[sel][live].T))
            vals = W @ np.exp(expo)
            total += (wout[sel][live] * np.exp(const[sel][live]) * vals).sum() * jac
        return total / np.pi**3

    n = grid.size
    values = np.zeros((n, n), dtype=complex)
    pairs = [(j, k) for j in range(n) for k in range(j, n)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: entry(*p), pairs))
    else:
        results = [entry(*p) for p in pairs]
    for (j, k), v in zip(pairs, results):
        values[j, k] = v
        if k != j:
            values[k, j] = np.conj(v)
    return DensityMatrix(omega=grid, values=values, normalized=False)


def compare(a: DensityMatrix, b: DensityMatrix, node_counts: dict | None = None,
            runtime_s: float = 0.0) -> OracleReport:
    """Scale-free comparison: normalize both, then Frobenius and max-entry error."""
    if a.omega.shape != b.omega.shape or not np.allclose(a.omega, b.omega, rtol=0, atol=1e-12):
        raise ConfigError("cannot compare density matrices on different grids")
    na, nb = normalize(a), normalize(b)
    diff = na.values - nb.values
    denom = np.linalg.norm(nb.values)
    return OracleReport(
        rel_frobenius_error=float(np.linalg.norm(diff) / denom),
        max_abs_entry_error=float(np.abs(diff).max()),
        node_counts=node_counts or {},
        runtime_s=runtime_s,
    )


def run_oracle(config: SourceConfig, mode: str, grid_points: int = 5,
               threads: int = 1, **kwargs) -> tuple[OracleReport, DensityMatrix, DensityMatrix]:
    """Pipeline-vs-oracle comparison; returns (report, pipeline, oracle)."""
    from .density import compute_density_matrix

    t0 = time.perf_counter()
    alpha = config.resolve_alpha()
    geometry = GeometryConfig(alpha_rad=alpha, omega0=config.omega0)
    grid = build_omega_grid(config.lambda_min_nm, config.lambda_max_nm, grid_points)
    pipe = compute_density_matrix(
        config.crystal, geometry, config.beams, config.pump, grid,
        config.quadrature, threads=threads,
    )
    if mode == "quadratic":
        ref = density_matrix_quadratic_direct(config, grid_points, threads=threads, **kwargs)
        counts = {"grid": grid_points, "gh_nodes": kwargs.get("gh_nodes", 6),
                  "nz": config.quadrature.nz, "nzp": config.quadrature.nzp,
                  "nws": config.quadrature.nws}
    elif mode == "exact":
        ref = density_matrix_direct(config, grid_points, threads=threads, **kwargs)
        counts = {"grid": grid_points,
                  "n_transverse": kwargs.get("n_transverse", 32),
                  "nws": config.quadrature.nws}
    else:
        raise ConfigError(f"oracle mode must be quadratic or exact, got {mode!r}")
    report = compare(pipe, ref, node_counts=counts,
                     runtime_s=time.perf_counter() - t0)
    return report, pipe, ref
