"""Raster and point-cloud file output.

CSV carries one ``x,y,z`` row per sample at 17 significant digits, which
round-trips doubles bit-exactly.  PGM output is binary 16-bit grayscale
(P5, big-endian) with min-max normalization and row 0 at maximal y; the
normalization bounds go to a ``.txt`` sidecar so heights can be recovered.
All writes are atomic (temp file in the target directory, then rename).
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .fields import SampledField
from .fif import PointCloud

__all__ = [
    "export",
    "export_cloud_csv",
    "export_field_csv",
    "export_pgm16",
    "read_field_csv",
]


def _atomic_write(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_bytes(rows) -> bytes:
    lines = ["x,y,z"]
    lines.extend(f"{x:.17g},{y:.17g},{z:.17g}" for x, y, z in rows)
    return ("\n".join(lines) + "\n").encode("ascii")


def export_field_csv(field: SampledField, path) -> None:
    xs, ys, v = field.xs, field.ys, field.values
    rows = (
        (xs[i], ys[j], v[i, j])
        for i in range(field.nx)
        for j in range(field.ny)
    )
    _atomic_write(path, _csv_bytes(rows))


def export_cloud_csv(cloud: PointCloud, path) -> None:
    _atomic_write(path, _csv_bytes(cloud.points))


def export_pgm16(field: SampledField, path) -> None:
    """16-bit P5 heightmap with image row order (row 0 = maximal y)."""
    v = field.values
    lo, hi = float(v.min()), float(v.max())
    degenerate = hi == lo
    if degenerate:
        pixels = np.zeros_like(v, dtype=">u2")
    else:
        pixels = np.round((v - lo) / (hi - lo) * 65535.0).astype(">u2")
    # values[ix, iy] -> image[row, col] with row = ny-1-iy, col = ix
    image = pixels.T[::-1, :]
    header = f"P5\n{field.nx} {field.ny}\n65535\n".encode("ascii")
    _atomic_write(path, header + image.tobytes())
    sidecar = [
        f"zmin = {lo:.17g}",
        f"zmax = {hi:.17g}",
        f"degenerate = {'true' if degenerate else 'false'}",
    ]
    _atomic_write(str(path) + ".txt", ("\n".join(sidecar) + "\n").encode("ascii"))


def export(obj, fmt: str, path) -> None:
    """Write a field or cloud as ``csv`` or ``pgm16`` (fields only)."""
    if fmt == "csv":
        if isinstance(obj, SampledField):
            export_field_csv(obj, path)
        elif isinstance(obj, PointCloud):
            export_cloud_csv(obj, path)
        else:
            raise TypeError(f"cannot export {type(obj).__name__} as csv")
    elif fmt == "pgm16":
        if not isinstance(obj, SampledField):
            raise TypeError("pgm16 export needs a SampledField")
        export_pgm16(obj, path)
    else:
        raise ValueError(f"format must be 'csv' or 'pgm16', got {fmt!r}")


def read_field_csv(path) -> np.ndarray:
    """Rows (x, y, z) of an exported CSV, in file order."""
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
