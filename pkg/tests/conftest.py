import json
import math
from pathlib import Path

import numpy as np
import pytest

from spdcsim.config import config_from_dict
from spdcsim.density import PumpSpectrum, QuadratureSpec, compute_density_matrix
from spdcsim.dispersion import CrystalConfig, GeometryConfig
from spdcsim.kernel import BeamGeometry
from spdcsim.units import omega_from_lambda_nm

CONFIG_DIR = Path(__file__).parent.parent / "configs"

# Degenerate wavelength of the bundled demo configs: the 30-degree cut
# phase-matches at alpha = 2.20 deg for 784.2 nm photons (pump 392.1 nm).
LAMBDA_DEG_NM = 784.2
OMEGA_DEG = float(omega_from_lambda_nm(LAMBDA_DEG_NM))


def small_doc(**overrides):
    doc = {
        "crystal": {"material": "BBO", "length_mm": 1.0, "cut_angle_deg": 30.0},
        "pump": {"waist_um": 100.0, "duration_fs": 100.0, "center_nm": 392.1},
        "collection": {"waist_um": 100.0, "alpha_deg": 2.2},
        "filter": {"fwhm_nm": 20.0, "center_nm": 784.2},
        "grid": {"lambda_min_nm": 769.2, "lambda_max_nm": 799.2, "points": 5},
        "quadrature": {"nz": 8, "nzp": 8, "nws": 16},
    }
    for key, val in overrides.items():
        if isinstance(val, dict) and isinstance(doc.get(key), dict):
            doc[key].update(val)
        else:
            doc[key] = val
    return doc


@pytest.fixture(scope="session")
def crystal():
    return CrystalConfig()


@pytest.fixture(scope="session")
def geometry():
    return GeometryConfig(alpha_rad=math.radians(2.2), omega0=OMEGA_DEG)


@pytest.fixture(scope="session")
def beams():
    return BeamGeometry(pump_waist_um=100.0, collection_waist_um=100.0)


@pytest.fixture(scope="session")
def pump():
    return PumpSpectrum.gaussian(100.0, 2.0 * OMEGA_DEG)


@pytest.fixture(scope="session")
def small_config():
    return config_from_dict(small_doc())


@pytest.fixture(scope="session")
def fig2a_config():
    return config_from_dict(json.loads((CONFIG_DIR / "fig2a.json").read_text()))


@pytest.fixture(scope="session")
def fig2b_config():
    return config_from_dict(json.loads((CONFIG_DIR / "fig2b.json").read_text()))


def compute_for(config, grid_points=None, threads=1, quad=None):
    """Pipeline run helper mirroring the CLI wiring."""
    alpha = config.resolve_alpha()
    geometry = config.geometry(alpha)
    if grid_points is None:
        grid = config.grid_omega()
    else:
        from spdcsim.density import build_omega_grid

        grid = build_omega_grid(config.lambda_min_nm, config.lambda_max_nm, grid_points)
    return compute_density_matrix(
        config.crystal, geometry, config.beams, config.pump, grid,
        quad or config.quadrature, threads=threads,
    )


@pytest.fixture(scope="session")
def rho_small(small_config):
    """Unfiltered 5x5 matrix on the small config, shared across tests."""
    return compute_for(small_config)


@pytest.fixture(scope="session")
def rho_fig2a_midgrid(fig2a_config):
    """Unfiltered 32x32 run of the fig2a configuration."""
    return compute_for(fig2a_config, grid_points=32, threads=4)


@pytest.fixture(scope="session")
def rho_fig2b_midgrid(fig2b_config):
    return compute_for(fig2b_config, grid_points=32, threads=4)
