"""User-facing configuration: JSON schema, validation, resolution, hashing.

Schema (all sections required unless noted):

    {
      "crystal":    {"material": "BBO", "length_mm": 1.0, "cut_angle_deg": 30.0},
      "pump":       {"waist_um": 100.0, "duration_fs": 100.0, "center_nm": 392.1},
                    # or {"waist_um": ..., "spectrum_file": "pump.csv"[, "center_nm": ...]}
      "collection": {"waist_um": 100.0, "alpha_deg": 2.2},      # or "alpha_deg": "auto"
      "filter":     {"fwhm_nm": 20.0, "center_nm": 784.2},      # or null
      "grid":       {"lambda_min_nm": 754.2, "lambda_max_nm": 814.2, "points": 64},
      "quadrature": {"nz": 16, "nzp": 16, "nws": 24}            # optional "window_width"
    }

A tabulated pump spectrum file is CSV with a header row and columns
wavelength_nm, re_amplitude, im_amplitude.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .density import PumpSpectrum, QuadratureSpec, SpectralFilter, build_omega_grid
from .dispersion import CrystalConfig, GeometryConfig, solve_phase_matching_angle
from .errors import ConfigError, DomainError
from .kernel import BeamGeometry
from .units import TWO_PI_C_NM, lambda_nm_from_omega, omega_from_lambda_nm


@dataclass(frozen=True)
class SourceConfig:
    """Complete physical description of one source configuration."""

    crystal: CrystalConfig
    beams: BeamGeometry
    pump: PumpSpectrum
    alpha_rad: float | None          # None = solve at the degenerate frequency
    filter: SpectralFilter | None
    lambda_min_nm: float
    lambda_max_nm: float
    grid_points: int
    quadrature: QuadratureSpec

    @property
    def omega0(self) -> float:
        """Degenerate daughter frequency (half the pump center)."""
        return 0.5 * self.pump.omega_center

    def grid_omega(self) -> np.ndarray:
        return build_omega_grid(self.lambda_min_nm, self.lambda_max_nm, self.grid_points)

    def resolve_alpha(self) -> float:
        if self.alpha_rad is not None:
            return self.alpha_rad
        return solve_phase_matching_angle(self.crystal, self.omega0)

    def geometry(self, alpha_rad: float | None = None) -> GeometryConfig:
        if alpha_rad is None:
            alpha_rad = self.resolve_alpha()
        return GeometryConfig(alpha_rad=alpha_rad, omega0=self.omega0)


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"{where}.{key}: missing required field")
    return section[key]


def _positive(value, where: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if not v > 0 or not math.isfinite(v):
        raise ConfigError(f"{where}: must be a positive finite number, got {value!r}")
    return v


def read_pump_spectrum_csv(path: str | Path, center_nm: float | None = None) -> PumpSpectrum:
    """Tabulated pump amplitude from CSV (wavelength_nm, re_amplitude, im_amplitude)."""
    rows = []
    with open(path, newline="") as fh:
        import csv as _csv

        reader = _csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"pump spectrum file {path}: empty")
        for ln, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 3:
                raise ConfigError(f"pump spectrum file {path}: line {ln}: need 3 columns")
            try:
                rows.append((float(row[0]), float(row[1]), float(row[2])))
            except ValueError:
                raise ConfigError(
                    f"pump spectrum file {path}: line {ln}: non-numeric value"
                ) from None
    if len(rows) < 2:
        raise ConfigError(f"pump spectrum file {path}: need at least 2 samples")
    arr = np.array(rows)
    omega = omega_from_lambda_nm(arr[:, 0])
    amp = arr[:, 1] + 1j * arr[:, 2]
    center = None if center_nm is None else float(omega_from_lambda_nm(center_nm))
    return PumpSpectrum.tabulated(omega, amp, omega_center=center)


def config_from_dict(doc: dict, base_dir: Path | None = None) -> SourceConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    base_dir = Path(base_dir) if base_dir is not None else Path(".")

    cs = _require(doc, "crystal", "config")
    crystal_kwargs = dict(
        material=str(cs.get("material", "BBO")),
        length_um=1000.0 * _positive(_require(cs, "length_mm", "crystal"), "crystal.length_mm"),
        cut_angle_rad=math.radians(float(_require(cs, "cut_angle_deg", "crystal"))),
    )
    try:
        crystal = CrystalConfig(**crystal_kwargs)
    except DomainError as err:
        raise ConfigError(f"crystal: {err}") from None

    ps = _require(doc, "pump", "config")
    pump_waist = _positive(_require(ps, "waist_um", "pump"), "pump.waist_um")
    if "spectrum_file" in ps:
        path = Path(ps["spectrum_file"])
        if not path.is_absolute():
            path = base_dir / path
        pump = read_pump_spectrum_csv(path, ps.get("center_nm"))
    else:
        duration = _positive(_require(ps, "duration_fs", "pump"), "pump.duration_fs")
        center_nm = _positive(_require(ps, "center_nm", "pump"), "pump.center_nm")
        pump = PumpSpectrum.gaussian(duration, float(omega_from_lambda_nm(center_nm)))

    col = _require(doc, "collection", "config")
    coll_waist = _positive(_require(col, "waist_um", "collection"), "collection.waist_um")
    alpha_field = _require(col, "alpha_deg", "collection")
    if isinstance(alpha_field, str):
        if alpha_field.lower() != "auto":
            raise ConfigError(f'collection.alpha_deg: must be a number or "auto", got {alpha_field!r}')
        alpha_rad = None
    else:
        alpha_rad = math.radians(float(alpha_field))
        if not abs(alpha_rad) < math.pi / 2:
            raise ConfigError("collection.alpha_deg: |alpha| must be below 90 degrees")
    try:
        beams = BeamGeometry(pump_waist_um=pump_waist, collection_waist_um=coll_waist)
    except DomainError as err:
        raise ConfigError(f"beam waists: {err}") from None

    flt = doc.get("filter")
    if flt is None:
        filt = None
    else:
        filt = SpectralFilter.from_nm(
            _positive(_require(flt, "fwhm_nm", "filter"), "filter.fwhm_nm"),
            _positive(_require(flt, "center_nm", "filter"), "filter.center_nm"),
        )

    gd = _require(doc, "grid", "config")
    lam_min = _positive(_require(gd, "lambda_min_nm", "grid"), "grid.lambda_min_nm")
    lam_max = _positive(_require(gd, "lambda_max_nm", "grid"), "grid.lambda_max_nm")
    if lam_max <= lam_min:
        raise ConfigError("grid.lambda_max_nm must exceed grid.lambda_min_nm")
    points = int(_require(gd, "points", "grid"))
    if points < 2:
        raise ConfigError("grid.points: must be >= 2")

    qd = doc.get("quadrature", {})
    try:
        quad = QuadratureSpec(
            nz=int(qd.get("nz", 16)),
            nzp=int(qd.get("nzp", 16)),
            nws=int(qd.get("nws", 24)),
            window_width=float(qd.get("window_width", 5.0)),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(f"quadrature: {err}") from None

    return SourceConfig(
        crystal=crystal,
        beams=beams,
        pump=pump,
        alpha_rad=alpha_rad,
        filter=filt,
        lambda_min_nm=lam_min,
        lambda_max_nm=lam_max,
        grid_points=points,
        quadrature=quad,
    )


def load_config(path: str | Path) -> tuple[SourceConfig, dict]:
    """Parse a config file or a run manifest; returns (config, raw dict).

    A manifest (a previous run's record) is recognized by its
    resolved_config key and re-runs with the recorded resolved values.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON: {err}") from None
    if isinstance(doc, dict) and "resolved_config" in doc:
        doc = doc["resolved_config"]
    return config_from_dict(doc, base_dir=path.parent), doc


def resolved_dict(config: SourceConfig, alpha_rad: float) -> dict:
    """Canonical fully-resolved config document (defaults materialized)."""
    pump: dict = {"waist_um": config.beams.pump_waist_um}
    if config.pump.kind == "gaussian":
        pump["duration_fs"] = config.pump.duration_fs
        pump["center_nm"] = float(lambda_nm_from_omega(config.pump.omega_center))
    else:
        pump["center_nm"] = float(lambda_nm_from_omega(config.pump.omega_center))
        pump["tabulated"] = {
            "wavelength_nm": [float(x) for x in lambda_nm_from_omega(config.pump.table_omega)],
            "re_amplitude": [float(x) for x in config.pump.table_amp.real],
            "im_amplitude": [float(x) for x in config.pump.table_amp.imag],
        }
    doc = {
        "crystal": {
            "material": config.crystal.material,
            "length_mm": config.crystal.length_um / 1000.0,
            "cut_angle_deg": math.degrees(config.crystal.cut_angle_rad),
        },
        "pump": pump,
        "collection": {
            "waist_um": config.beams.collection_waist_um,
            "alpha_deg": math.degrees(alpha_rad),
        },
        "filter": None,
        "grid": {
            "lambda_min_nm": config.lambda_min_nm,
            "lambda_max_nm": config.lambda_max_nm,
            "points": config.grid_points,
        },
        "quadrature": {
            "nz": config.quadrature.nz,
            "nzp": config.quadrature.nzp,
            "nws": config.quadrature.nws,
            "window_width": config.quadrature.window_width,
        },
    }
    if config.filter is not None:
        center_nm = float(lambda_nm_from_omega(config.filter.omega_center))
        fwhm_nm = config.filter.sigma * center_nm**2 / TWO_PI_C_NM
        doc["filter"] = {"fwhm_nm": fwhm_nm, "center_nm": center_nm}
    return doc


def config_hash(doc: dict) -> str:
    """sha256 of the canonical JSON encoding."""
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
