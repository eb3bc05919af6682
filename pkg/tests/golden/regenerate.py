"""Regenerate the golden heatmap images for the regression test.

Run from the repository root after an intentional change to the pipeline
or the rendering:

    python tests/golden/regenerate.py

The goldens are colormapped renderings of the filtered, normalized
32-point runs of the bundled fig2a/fig2b configurations.
"""
from pathlib import Path

import matplotlib.image

from spdcsim.config import load_config
from spdcsim.density import apply_filter, build_omega_grid, compute_density_matrix, normalize
from spdcsim.fileio import heatmap_rgba

HERE = Path(__file__).parent
ROOT = HERE.parent.parent


def golden_matrix(config_name: str, points: int = 32):
    config, _ = load_config(ROOT / "configs" / config_name)
    grid = build_omega_grid(config.lambda_min_nm, config.lambda_max_nm, points)
    rho = compute_density_matrix(
        config.crystal, config.geometry(), config.beams, config.pump,
        grid, config.quadrature, threads=4,
    )
    return normalize(apply_filter(rho, config.filter))


def main():
    for name, out in (("fig2a.json", "fig2a_32.png"), ("fig2b.json", "fig2b_32.png")):
        rho = golden_matrix(name)
        matplotlib.image.imsave(HERE / out, heatmap_rgba(rho.values.real))
        print(f"wrote {HERE / out}")


if __name__ == "__main__":
    main()
