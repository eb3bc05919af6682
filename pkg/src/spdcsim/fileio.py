"""Output formats: matrix CSV/JSON, run manifest, heatmap rendering.

Float formatting uses repr (shortest round-trip), so identical inputs
produce byte-identical CSV and JSON files.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .density import DensityMatrix
from .errors import ConfigError


def write_matrix_csv(path: str | Path, rho: DensityMatrix) -> None:
    """Matrix as CSV: wavelength headers in nm, entries as re/im column pairs."""
    lam = rho.lambda_nm
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["lambda_nm"]
        for v in lam:
            header += [f"re_{v!r}", f"im_{v!r}"]
        writer.writerow(header)
        for j, lj in enumerate(lam):
            row = [repr(float(lj))]
            for k in range(len(lam)):
                z = rho.values[j, k]
                row += [repr(float(z.real)), repr(float(z.imag))]
            writer.writerow(row)


def read_matrix_csv(path: str | Path) -> DensityMatrix:
    from .units import omega_from_lambda_nm

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty matrix CSV")
    lam = np.array([float(r[0]) for r in rows[1:]])
    n = len(lam)
    values = np.empty((n, n), dtype=complex)
    for j, r in enumerate(rows[1:]):
        data = np.array([float(x) for x in r[1:]])
        values[j] = data[0::2] + 1j * data[1::2]
    return DensityMatrix(omega=omega_from_lambda_nm(lam), values=values)


def write_matrix_json(path: str | Path, rho: DensityMatrix, metadata: dict) -> None:
    doc = {
        "lambda_nm": [float(x) for x in rho.lambda_nm],
        "omega_rad_fs": [float(x) for x in rho.omega],
        "matrix_re": [float(x) for x in rho.values.real.ravel()],
        "matrix_im": [float(x) for x in rho.values.imag.ravel()],
        "normalized": rho.normalized,
        "metadata": metadata,
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def read_matrix_json(path: str | Path) -> tuple[DensityMatrix, dict]:
    doc = json.loads(Path(path).read_text())
    n = len(doc["lambda_nm"])
    values = (np.array(doc["matrix_re"]) + 1j * np.array(doc["matrix_im"])).reshape(n, n)
    rho = DensityMatrix(
        omega=np.array(doc["omega_rad_fs"]),
        values=values,
        normalized=bool(doc.get("normalized", False)),
    )
    return rho, doc.get("metadata", {})


def write_manifest(path: str | Path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def heatmap_rgba(values_real: np.ndarray) -> np.ndarray:
    """Colormapped RGBA image of a real matrix on a symmetric scale.

    The scale is fixed symmetric around zero so the sign structure of
    off-phase-matching configurations stays visible.
    """
    from matplotlib import colormaps

    vmax = float(np.abs(values_real).max())
    if vmax == 0.0:
        vmax = 1.0
    norm = 0.5 * (values_real / vmax + 1.0)
    rgba = colormaps["RdBu_r"](norm)
    return (rgba * 255).astype(np.uint8)


def save_heatmap(path: str | Path, rho: DensityMatrix, title: str = "") -> None:
    """Labeled heatmap of Re(rho) with wavelength axes in nm."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    lam = rho.lambda_nm
    re = rho.values.real
    vmax = float(np.abs(re).max()) or 1.0
    fig, ax = plt.subplots(figsize=(5.4, 4.6))
    img = ax.imshow(
        re,
        origin="lower",
        extent=[lam[0], lam[-1], lam[0], lam[-1]],
        cmap="RdBu_r",
        vmin=-vmax,
        vmax=vmax,
        aspect="equal",
    )
    ax.set_xlabel("idler wavelength $\\lambda'$ (nm)")
    ax.set_ylabel("idler wavelength $\\lambda$ (nm)")
    if title:
        ax.set_title(title)
    fig.colorbar(img, ax=ax, label="Re $\\rho$")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
