import math

import numpy as np
import pytest

from spdcsim.errors import DomainError, IntegrabilityError
from spdcsim.kernel import (
    BeamGeometry,
    GaussianExponent,
    assemble_exponent,
    gaussian_integral,
    geometric_matrix,
    integrand,
    logdet_rhp_and_solve,
)
from spdcsim.paraxial import ExpansionCache, expand_delta_kz

from conftest import OMEGA_DEG

WS = OMEGA_DEG + 0.02
WI = OMEGA_DEG - 0.03
WIP = OMEGA_DEG + 0.01


def gauss_hermite_nd(exponent: GaussianExponent, n=8):
    """Independent oracle: preconditioned tensor Gauss-Hermite quadrature
    of exp(-k M2 k + M1 k + M0) over R^6, including the pi^3 prefactor."""
    g = exponent.quad.real
    chol = np.linalg.cholesky(g)
    linv = np.linalg.inv(chol)
    s = linv @ exponent.quad.imag @ linv.T
    b = linv @ exponent.lin
    u0 = b.real / 2.0
    t, w = np.polynomial.hermite.hermgauss(n)
    T = np.stack(np.meshgrid(*([t] * 6), indexing="ij"), axis=-1).reshape(-1, 6)
    W = np.stack(np.meshgrid(*([w] * 6), indexing="ij"), axis=-1).reshape(-1, 6).prod(axis=1)
    U = u0[None, :] + T
    quad = np.einsum("ni,ij,nj->n", U, np.eye(6) + 1j * s, U)
    expo = -quad + U @ b + (T * T).sum(axis=1)
    val = (W * np.exp(expo)).sum() / np.prod(np.diag(chol))
    return val * np.exp(exponent.const)


@pytest.fixture(scope="module")
def cache(crystal, geometry):
    return ExpansionCache(crystal, geometry)


@pytest.fixture(scope="module")
def sample_exponent(crystal, geometry, beams, cache):
    return assemble_exponent(cache.get(WS, WI), cache.get(WS, WIP), 280.0, -150.0, beams)


class TestAssembly:
    def test_geometric_block_structure(self, beams):
        # at z = z' = 0 the quadratic form is the pure beam-geometry matrix
        wp2, wf2 = 100.0**2, 100.0**2
        g = geometric_matrix(beams)
        expected = (wp2 / 2) * np.block([
            [2 * np.eye(2), np.eye(2), np.eye(2)],
            [np.eye(2), (1 + wf2 / wp2) * np.eye(2), np.zeros((2, 2))],
            [np.eye(2), np.zeros((2, 2)), (1 + wf2 / wp2) * np.eye(2)],
        ])
        assert np.allclose(g, expected, rtol=0, atol=0)

    def test_degenerate_origin_real(self, crystal, beams, cache):
        # degenerate frequencies at z = z' = 0: no phase terms survive
        m = assemble_exponent(cache.get(WS, WS), cache.get(WS, WS), 0.0, 0.0, beams)
        assert np.allclose(m.quad.imag, 0.0)
        assert np.allclose(m.quad.real, geometric_matrix(beams))
        assert np.allclose(m.lin.imag, 0.0)
        assert m.const.imag == 0.0

    def test_center_offsets_cancel_at_degeneracy(self, cache):
        # opposite transverse directions cancel when omega_s = omega_i
        exp = cache.get(WS, WS)
        assert np.allclose(exp.k_s0 + exp.k_i0, 0.0, atol=1e-18)

    def test_quad_symmetric(self, sample_exponent):
        assert np.allclose(sample_exponent.quad, sample_exponent.quad.T, rtol=1e-12, atol=0)

    def test_real_part_positive_definite(self, sample_exponent):
        eigs = np.linalg.eigvalsh(sample_exponent.quad.real)
        assert eigs.min() > 0

    def test_mismatched_omega_s_rejected(self, crystal, geometry, beams, cache):
        with pytest.raises(DomainError, match="omega_s"):
            assemble_exponent(cache.get(WS, WI), cache.get(WS + 0.01, WIP), 0.0, 0.0, beams)

    def test_swap_conjugates(self, beams, cache):
        # swapping (omega_i, z) with (omega_i', z') conjugates the value
        # and exchanges the primed and unprimed blocks
        m_fwd = assemble_exponent(cache.get(WS, WI), cache.get(WS, WIP), 280.0, -150.0, beams)
        m_rev = assemble_exponent(cache.get(WS, WIP), cache.get(WS, WI), -150.0, 280.0, beams)
        assert np.conj(m_rev.const) == pytest.approx(m_fwd.const, rel=1e-14)
        perm = [0, 1, 4, 5, 2, 3]
        assert np.allclose(np.conj(m_rev.lin[perm]), m_fwd.lin, rtol=1e-14)
        assert np.allclose(np.conj(m_rev.quad[np.ix_(perm, perm)]), m_fwd.quad, rtol=1e-14)

    def test_waist_validation(self):
        with pytest.raises(DomainError):
            BeamGeometry(pump_waist_um=0.5, collection_waist_um=100.0)


class TestGaussianIntegral:
    def test_identity_case(self):
        m = GaussianExponent(const=0.0, lin=np.zeros(6, complex), quad=np.eye(6, dtype=complex))
        assert gaussian_integral(m) == pytest.approx(1.0)

    def test_diagonal_determinant(self):
        rng = np.random.default_rng(3)
        diag = rng.uniform(0.5, 4.0, 6)
        m = GaussianExponent(const=0.0, lin=np.zeros(6, complex), quad=np.diag(diag).astype(complex))
        assert gaussian_integral(m) == pytest.approx(1.0 / math.sqrt(np.prod(diag)), rel=1e-14)

    def test_random_instances_match_hermite_oracle(self):
        # random real SPD forms with random linear terms against the
        # independent 6-D quadrature, dropped pi^3 restored
        rng = np.random.default_rng(42)
        for _ in range(20):
            a = rng.normal(size=(6, 6))
            quad = (a @ a.T + 6.0 * np.eye(6)).astype(complex)
            lin = rng.normal(size=6).astype(complex) * 2.0
            m = GaussianExponent(const=0.3, lin=lin, quad=quad)
            oracle = gauss_hermite_nd(m, n=10) / np.pi**3
            assert gaussian_integral(m) == pytest.approx(oracle, rel=1e-6)

    def test_complex_instance_matches_hermite_oracle(self, sample_exponent):
        oracle = gauss_hermite_nd(sample_exponent, n=10) / np.pi**3
        assert gaussian_integral(sample_exponent) == pytest.approx(oracle, rel=1e-9)

    def test_real_set_gives_real_result(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(6, 6))
        quad = (a @ a.T + 6.0 * np.eye(6)).astype(complex)
        lin = rng.normal(size=6).astype(complex)
        val = gaussian_integral(GaussianExponent(const=-0.2, lin=lin, quad=quad))
        assert abs(val.imag) <= 1e-12 * abs(val.real)

    def test_non_positive_definite_rejected(self):
        quad = np.diag([1.0, 1.0, -0.5, 1.0, 1.0, 1.0]).astype(complex)
        m = GaussianExponent(const=0.0, lin=np.zeros(6, complex), quad=quad, context=("x",))
        with pytest.raises(IntegrabilityError, match="pivot"):
            gaussian_integral(m)

    def test_logdet_matches_eigenvalue_product(self):
        # LU-pivot determinant against the eigenvalue product
        rng = np.random.default_rng(11)
        for _ in range(20):
            a = rng.normal(size=(6, 6))
            s = a @ a.T + 6.0 * np.eye(6) + 0.3j * (a + a.T)
            logdet, _ = logdet_rhp_and_solve(s, np.zeros(6, complex))
            det_eig = np.prod(np.linalg.eigvals(s))
            assert np.exp(logdet) == pytest.approx(det_eig, rel=1e-8)

    def test_solve_correct(self):
        rng = np.random.default_rng(13)
        a = rng.normal(size=(6, 6))
        s = a @ a.T + 6.0 * np.eye(6) + 0.2j * (a + a.T)
        b = rng.normal(size=6) + 1j * rng.normal(size=6)
        _, y = logdet_rhp_and_solve(s, b)
        assert np.allclose(s @ y, b, rtol=1e-11, atol=1e-12)


class TestIntegrand:
    def test_degenerate_origin_real_positive(self, crystal, geometry, beams, cache):
        val = integrand(WS, WS, WS, 0.0, 0.0, crystal, geometry, beams, cache)
        assert val.real > 0
        assert abs(val.imag) <= 1e-14 * val.real

    def test_hermitian_swap_symmetry(self, crystal, geometry, beams, cache):
        fwd = integrand(WS, WI, WIP, 280.0, -150.0, crystal, geometry, beams, cache)
        rev = integrand(WS, WIP, WI, -150.0, 280.0, crystal, geometry, beams, cache)
        assert np.conj(rev) == pytest.approx(fwd, rel=1e-12)

    def test_envelope_decays_off_phase_matching(self, crystal, beams, cache):
        # fixed detuned frequencies: |integrand| falls as |z - z'| grows
        # along one configured slice
        vals = [abs(integrand(WS, WI, WI, 0.5 * dz, -0.5 * dz, crystal,
                              cache.geometry, beams, cache))
                for dz in (0.0, 250.0, 500.0, 750.0)]
        assert vals == sorted(vals, reverse=True)

    def test_branch_continuity_along_z(self, crystal, geometry, beams, cache):
        # adjacent-node phase steps of the integrand stay below pi/2
        # along a z sweep at fixed frequencies
        z = np.linspace(-500.0, 500.0, 81)
        vals = np.array([integrand(WS, WI, WIP, zz, 137.0, crystal, geometry, beams, cache)
                         for zz in z])
        dphi = np.diff(np.angle(vals))
        dphi = (dphi + np.pi) % (2 * np.pi) - np.pi
        assert np.abs(dphi).max() < np.pi / 2
