import math

import numpy as np
import pytest

from spdcsim.config import config_from_dict
from spdcsim.density import build_omega_grid, compute_density_matrix, normalize
from spdcsim.errors import ConfigError
from spdcsim.oracle import (
    compare,
    density_matrix_direct,
    density_matrix_quadratic_direct,
    psi_i_direct,
    z_line_amplitude,
)

from conftest import OMEGA_DEG, compute_for, small_doc


@pytest.fixture(scope="module")
def tiny_config():
    # 3x3 grid, light quadrature: oracle behavior tests only
    return config_from_dict(small_doc(
        grid={"lambda_min_nm": 774.2, "lambda_max_nm": 794.2, "points": 3},
        quadrature={"nz": 6, "nzp": 6, "nws": 10},
    ))


class TestZLineAmplitude:
    def test_zero_mismatch_gives_length(self):
        assert z_line_amplitude(0.0, 1000.0) == 1000.0

    def test_sinc_form(self):
        dkz, L = 0.004, 1000.0
        expected = L * math.sin(dkz * L / 2) / (dkz * L / 2)
        assert z_line_amplitude(dkz, L) == pytest.approx(expected, rel=1e-14)


class TestPsiDirect:
    def test_override_hook_returns_length_factor(self, tiny_config):
        ks = np.array([0.0, 0.0])
        base = psi_i_direct(ks, OMEGA_DEG, OMEGA_DEG, tiny_config, delta_kz_override=0.0)
        # doubling the crystal doubles the closed-form z factor exactly
        doubled = config_from_dict(small_doc(crystal={"length_mm": 2.0}))
        big = psi_i_direct(ks, OMEGA_DEG, OMEGA_DEG, doubled, delta_kz_override=0.0)
        assert big == pytest.approx(2.0 * base, rel=1e-12)

    def test_detuned_collection_suppressed(self, tiny_config):
        # pointing the collection mode far off the pump-allowed region
        # kills the amplitude by orders of magnitude
        alpha0 = tiny_config.resolve_alpha()
        ks_match = np.array([OMEGA_DEG * math.sin(alpha0) / 0.299792458, 0.0])
        matched = abs(psi_i_direct(ks_match, OMEGA_DEG, OMEGA_DEG, tiny_config))
        detuned = abs(psi_i_direct(ks_match, OMEGA_DEG, OMEGA_DEG, tiny_config,
                                   alpha_rad=alpha0 + math.radians(3.0)))
        assert matched > 1e3 * detuned

    def test_even_in_signal_ky(self, tiny_config):
        up = psi_i_direct(np.array([0.02, 0.007]), OMEGA_DEG + 0.01, OMEGA_DEG, tiny_config)
        dn = psi_i_direct(np.array([0.02, -0.007]), OMEGA_DEG + 0.01, OMEGA_DEG, tiny_config)
        assert up == pytest.approx(dn, rel=1e-12)

    def test_vector_input_shapes(self, tiny_config):
        ks = np.zeros((4, 2))
        out = psi_i_direct(ks, OMEGA_DEG, OMEGA_DEG, tiny_config)
        assert out.shape == (4,)


class TestQuadraticDirect:
    def test_matches_pipeline(self, tiny_config):
        pipe = compute_for(tiny_config)
        ref = density_matrix_quadratic_direct(tiny_config, grid_points=3, gh_nodes=6)
        rep = compare(pipe, ref)
        assert rep.rel_frobenius_error < 1e-6

    def test_hermitian(self, tiny_config):
        ref = density_matrix_quadratic_direct(tiny_config, grid_points=3, gh_nodes=5)
        assert ref.hermiticity_residual() < 1e-10

    def test_node_growth_converges_to_kernel(self, tiny_config):
        # transverse node count up -> error against the analytic kernel down
        pipe = compute_for(tiny_config)
        errs = [compare(pipe, density_matrix_quadratic_direct(tiny_config, 3, gh_nodes=n)
                        ).rel_frobenius_error
                for n in (2, 3, 4)]
        assert errs[2] < errs[1] < errs[0]

    def test_grid_size_guard(self, tiny_config):
        with pytest.raises(ConfigError):
            density_matrix_quadratic_direct(tiny_config, grid_points=6)


class TestExactDirect:
    def test_matches_pipeline_at_moderate_waists(self, tiny_config):
        pipe = compute_for(tiny_config)
        ref = density_matrix_direct(tiny_config, grid_points=3, n_transverse=24)
        rep = compare(pipe, ref)
        assert rep.rel_frobenius_error < 0.02

    def test_trace_positive(self, tiny_config):
        ref = density_matrix_direct(tiny_config, grid_points=3, n_transverse=16)
        assert ref.trace() > 0

    def test_hermitian(self, tiny_config):
        ref = density_matrix_direct(tiny_config, grid_points=3, n_transverse=16)
        assert ref.hermiticity_residual() < 1e-10

    def test_quadrature_resolution_dominates_disagreement(self, tiny_config):
        # halving transverse nodes moves the oracle by more than its
        # converged disagreement with the pipeline
        pipe = compute_for(tiny_config)
        full = density_matrix_direct(tiny_config, grid_points=3, n_transverse=24)
        half = density_matrix_direct(tiny_config, grid_points=3, n_transverse=12)
        move = compare(full, half).rel_frobenius_error
        disagreement = compare(pipe, full).rel_frobenius_error
        assert move > disagreement

    def test_grid_size_guard(self, tiny_config):
        with pytest.raises(ConfigError):
            density_matrix_direct(tiny_config, grid_points=9)


class TestCompare:
    def test_identity(self, rho_small):
        rep = compare(rho_small, rho_small)
        assert rep.rel_frobenius_error == 0.0
        assert rep.max_abs_entry_error == 0.0

    def test_scale_invariance(self, rho_small):
        from spdcsim.density import DensityMatrix

        doubled = DensityMatrix(omega=rho_small.omega, values=2.0 * rho_small.values)
        rep = compare(rho_small, doubled)
        assert rep.rel_frobenius_error < 1e-14

    def test_grid_mismatch_rejected(self, rho_small, tiny_config):
        other = compute_for(tiny_config)
        with pytest.raises(ConfigError):
            compare(rho_small, other)
