import numpy as np
import pytest

import spdcsim.backend as backend
from spdcsim.kernel import GaussianExponent, gaussian_integral, geometric_matrix
from spdcsim.paraxial import expansion_blocks
from spdcsim.quadrature import gauss_legendre

from conftest import OMEGA_DEG


@pytest.fixture(scope="module")
def workload(small_config):
    config = small_config
    geometry = config.geometry()
    grid = config.grid_omega()
    w_row, w_col = grid[1], grid[2]
    window = config.pump.signal_window(w_row, w_col, config.quadrature.window_width)
    ws, wsw = gauss_legendre(window[0], window[1], 8)
    pa = np.conj(config.pump.amplitude(ws + w_row)) * config.pump.amplitude(ws + w_col) * wsw
    ks0, ki0u, f0u, g1u, hu = expansion_blocks(ws, w_row, config.crystal, geometry)
    _, ki0p, f0p, g1p, hp = expansion_blocks(ws, w_col, config.crystal, geometry)
    half_l = config.crystal.half_length
    zn, zw = gauss_legendre(-half_l, half_l, 6)
    zpn, zpw = gauss_legendre(-half_l, half_l, 6)
    return (pa, f0u, f0p, g1u, g1p, hu, hp, ks0 + ki0u, ks0 + ki0p,
            zn, zw, zpn, zpw, geometric_matrix(config.beams),
            config.beams.pump_waist_um ** 2)


def reference_sum(args):
    """Slow reference: scalar gaussian_integral per node."""
    (pa, f0u, f0p, g1u, g1p, hu, hp, d0u, d0p, zn, zw, zpn, zpw, gmat, wp2) = args
    total = 0.0 + 0.0j
    for m in range(len(pa)):
        for a, z in enumerate(zn):
            for b, zp in enumerate(zpn):
                quad = gmat.astype(complex)
                quad[0:4, 0:4] += 0.5j * z * hu[m]
                idx = np.ix_([0, 1, 4, 5], [0, 1, 4, 5])
                quad[idx] += -0.5j * zp * hp[m]
                lin = np.zeros(6, dtype=complex)
                lin[0:2] = -(d0u[m] + d0p[m]) * wp2 - 1j * z * g1u[m, :2] + 1j * zp * g1p[m, :2]
                lin[2:4] = -d0u[m] * wp2 - 1j * z * g1u[m, 2:]
                lin[4:6] = -d0p[m] * wp2 + 1j * zp * g1p[m, 2:]
                const = (-0.5 * wp2 * (d0u[m] @ d0u[m] + d0p[m] @ d0p[m])
                         - 1j * z * f0u[m] + 1j * zp * f0p[m])
                total += pa[m] * zw[a] * zpw[b] * gaussian_integral(
                    GaussianExponent(const=const, lin=lin, quad=quad)
                )
    return total


def test_numpy_matches_scalar_reference(workload):
    ref = reference_sum(workload)
    val, status, *_ = backend.entry_quadrature_numpy(*workload)
    assert status == 0
    assert val == pytest.approx(ref, rel=1e-12)


@pytest.mark.skipif(not backend.HAVE_NUMBA, reason="numba unavailable")
def test_numba_matches_numpy(workload):
    v_np, s1, *_ = backend.entry_quadrature_numpy(*workload)
    v_nb, s2, *_ = backend.entry_quadrature_numba(*workload)
    assert s1 == s2 == 0
    assert v_nb == pytest.approx(v_np, rel=1e-12)


def test_zero_pump_short_circuits(workload):
    args = list(workload)
    args[0] = np.zeros_like(args[0])
    val, status, *_ = backend.entry_quadrature_numpy(*args)
    assert status == 0 and val == 0.0
    if backend.HAVE_NUMBA:
        val, status, *_ = backend.entry_quadrature_numba(*args)
        assert status == 0 and val == 0.0


def test_non_integrable_node_reported(workload):
    # flipping the sign of the geometric matrix makes every pivot fail
    args = list(workload)
    args[13] = -args[13]
    val, status, m, a, b = backend.entry_quadrature_numpy(*args)
    assert status == 1 and (m, a, b) == (0, 0, 0) and np.isnan(val.real)
    if backend.HAVE_NUMBA:
        val, status, m, a, b = backend.entry_quadrature_numba(*args)
        assert status == 1 and (m, a, b) == (0, 0, 0) and np.isnan(val.real)


def test_backend_flag_consistency():
    assert backend.BACKEND in ("numba", "numpy")
    if backend.BACKEND == "numba":
        assert backend.HAVE_NUMBA
        assert backend.entry_quadrature is backend.entry_quadrature_numba
    else:
        assert backend.entry_quadrature is backend.entry_quadrature_numpy


def test_env_flag_selects_numpy(tmp_path):
    # a fresh interpreter honours SPDCSIM_BACKEND=numpy
    import subprocess
    import sys

    code = ("import spdcsim.backend as b; "
            "assert b.BACKEND == 'numpy'; "
            "assert b.entry_quadrature is b.entry_quadrature_numpy; "
            "print('ok')")
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True, text=True,
        env={"PATH": "/usr/bin:/bin", "SPDCSIM_BACKEND": "numpy"},
    )
    assert out.returncode == 0 and out.stdout.strip() == "ok"
