"""Serialization: CSV tables, JSON summaries, state files and the output manifest."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .field import Field, TorusGrid

BRANCH_COLUMNS = ("param", "l2norm", "re_lambda0", "im_lambda0", "stable", "sigma_est")
VEFF_COLUMNS = ("sigma", "value")
ZEROS_COLUMNS = ("sigma0", "slope", "prediction")
SPECTRUM_COLUMNS = ("re", "im")
TRAJECTORY_COLUMNS = ("t", "dev_h1", "dev_l2")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path: Path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"{path.name}: row has {len(row)} cells, expected {len(columns)}")
            w.writerow([_cell(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[list, list]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path: Path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def state_to_dict(u: Field) -> dict:
    """Interleaved ``[Re c0, Im c0, Re c1, ...]`` Fourier coefficients (FFT order)."""
    c = u.coeffs
    inter = np.empty(2 * len(c))
    inter[0::2], inter[1::2] = c.real, c.imag
    return {
        "grid": {"n": u.grid.n, "length": u.grid.length, "x0": u.grid.x0},
        "ordering": "fft",
        "coefficients": [float(v) for v in inter],
    }


def state_from_dict(data: dict) -> Field:
    g = data["grid"]
    grid = TorusGrid(int(g["n"]), float(g["length"]))
    inter = np.asarray(data["coefficients"], dtype=float)
    if len(inter) != 2 * grid.n:
        raise ValueError("coefficient array does not match the grid size")
    return Field(grid, coeffs=inter[0::2] + 1j * inter[1::2])


def write_state(path: Path, u: Field) -> Path:
    return write_json(path, state_to_dict(u))


def read_state(path: Path) -> Field:
    return state_from_dict(json.loads(Path(path).read_text()))


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class OutputDir:
    """Collects written files and emits ``MANIFEST.json`` with their hashes."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.root / name
        self.files.append(p)
        return p

    def csv(self, name: str, columns, rows) -> Path:
        return write_csv(self.path(name), columns, rows)

    def json(self, name: str, data) -> Path:
        return write_json(self.path(name), data)

    def state(self, name: str, u: Field) -> Path:
        return write_state(self.path(name), u)

    def text(self, name: str, text: str) -> Path:
        p = self.path(name)
        p.write_text(text)
        return p

    def manifest(self, complete: bool, status: str) -> Path:
        entries = [{"file": p.name, "sha256": sha256(p)} for p in sorted(set(self.files)) if p.exists()]
        data = {"complete": complete, "status": status, "files": entries}
        return write_json(self.root / "MANIFEST.json", data)
