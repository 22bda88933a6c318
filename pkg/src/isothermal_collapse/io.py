"""File I/O for profiles, solution manifests and error reports.

CSV files start with `#`-prefixed metadata lines (parameters and tolerances),
followed by one header row and the data rows.
"""

import csv
import json
import logging
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import numerics_config
from .exceptions import InvalidInput, SimilarityError
from .flow_field import PathTrace, SimilaritySolution

logger = logging.getLogger(__name__)


def _metadata(sol: SimilaritySolution) -> dict:
    return {**sol.params.to_dict(), **asdict(sol.tolerances)}


def write_csv(path: str | Path, columns: dict[str, list | np.ndarray], metadata: dict | None = None) -> Path:
    """Write equal-length columns to a CSV file with a `# key: value` preamble."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    lengths = {len(columns[name]) for name in names}
    if len(lengths) > 1:
        raise ValueError(f"{path.name}: columns of unequal length {sorted(lengths)}")
    with open(path, "w", encoding="utf-8", newline="") as f:
        for key, value in (metadata or {}).items():
            f.write(f"# {key}: {value}\n")
        writer = csv.writer(f)
        writer.writerow(names)
        for row in zip(*(columns[name] for name in names)):
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    logger.debug(f"CSV written to {path}")
    return path


def read_csv(path: str | Path) -> tuple[dict[str, str], dict[str, list[str]]]:
    """Read a file written by write_csv.

    Returns:
        (metadata, columns); values are left as strings.
    """
    metadata: dict[str, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        lines = f.readlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            metadata[key.strip()] = value.strip()
        else:
            body.append(line)
    rows = list(csv.reader(body))
    if not rows:
        return metadata, {}
    header, data = rows[0], rows[1:]
    return metadata, {name: [row[i] for row in data] for i, name in enumerate(header)}


def write_json(path: str | Path, data: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
    return path


def load_json(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_manifest(path: str | Path, sol: SimilaritySolution) -> Path:
    """Store everything needed to re-evaluate the solution."""
    path = write_json(path, sol.to_manifest())
    logger.info(f"Solution manifest written to {path}")
    return path


def load_manifest(path: str | Path) -> SimilaritySolution:
    """Rebuild a solution from its manifest without re-running the construction."""
    data = load_json(path)
    if not isinstance(data, dict):
        raise InvalidInput(f"{path}: expected a JSON object")
    sol = SimilaritySolution.from_manifest(data)
    logger.info(f"Solution loaded from {path} (m={sol.params.m}, beta={sol.params.beta})")
    return sol


def write_error(out_dir: str | Path, error: SimilarityError, command: str) -> Path:
    """Machine-readable error report, `error.json` in the output directory."""
    payload = {"schema": numerics_config.ERROR_SCHEMA, "command": command, **error.to_dict()}
    return write_json(Path(out_dir) / "error.json", payload)


def export_velocity(sol: SimilaritySolution, out_dir: str | Path) -> Path:
    """velocity.csv: branch, xi, U, dU for the stored samples of every branch."""
    profile = sol.velocity
    columns: dict[str, list] = {"branch": [], "xi": [], "U": [], "dU": []}
    for branch in (profile.kink, profile.hat, profile.tilde):
        columns["branch"].extend([branch.name] * branch.xi.size)
        columns["xi"].extend(branch.xi.tolist())
        columns["U"].extend(branch.U.tolist())
        columns["dU"].extend(branch.dU.tolist())
    metadata = {**_metadata(sol), "u_star": profile.u_star, "xi_star": profile.xi_star, "xi_s": profile.xi_s}
    return write_csv(Path(out_dir) / "velocity.csv", columns, metadata)


def export_density(sol: SimilaritySolution, out_dir: str | Path) -> Path:
    """density.csv: branch, sgn_t, xi, Omega, dOmega for the stored samples of every branch."""
    density = sol.density
    columns: dict[str, list] = {"branch": [], "sgn_t": [], "xi": [], "Omega": [], "dOmega": []}
    for branch, sign in ((density.kink, -1), (density.hat_neg, -1), (density.hat_pos, 1), (density.tilde, 1)):
        xi, omega, slope = branch.samples()
        columns["branch"].extend([branch.name] * xi.size)
        columns["sgn_t"].extend([sign] * xi.size)
        columns["xi"].extend(xi.tolist())
        columns["Omega"].extend(omega.tolist())
        columns["dOmega"].extend(slope.tolist())
    metadata = {
        **_metadata(sol),
        "Omega0": density.Omega0,
        "C_minus": density.C_minus,
        "C_plus": density.C_plus,
        "Omega0_prime": density.Omega0_prime,
    }
    return write_csv(Path(out_dir) / "density.csv", columns, metadata)


def export_trace(path: str | Path, sol: SimilaritySolution, path_trace: PathTrace) -> Path:
    """One trace as t, r columns; crossings and collapse data go in the preamble."""
    metadata = {**_metadata(sol), **{k: v for k, v in path_trace.to_dict().items() if k != "crossings"}}
    for i, (event, t, r) in enumerate(path_trace.crossings):
        metadata[f"crossing_{i}"] = f"{event} t={t!r} r={r!r}"
    return write_csv(path, {"t": path_trace.t, "r": path_trace.r}, metadata)
