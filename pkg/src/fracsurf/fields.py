"""Uniform rasters of scalar functions over a rectangle.

A :class:`SampledField` is the currency of every quadrature oracle in the
package: ``values[i, j]`` is the sample at ``(xs[i], ys[j])`` where the axes
are uniform and include both endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatchError, InvalidRectError

__all__ = ["SampledField", "field_from_function"]


@dataclass(frozen=True)
class SampledField:
    """Scalar raster over rect = (a, b, c, d), x-major storage."""

    rect: tuple[float, float, float, float]
    values: np.ndarray

    def __post_init__(self):
        a, b, c, d = self.rect
        if not (a < b and c < d):
            raise InvalidRectError(f"degenerate rect {self.rect!r}")
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
            raise DimensionMismatchError(
                f"values must be at least 2x2, got shape {v.shape}"
            )
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "rect", (float(a), float(b), float(c), float(d)))

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @cached_property
    def xs(self) -> np.ndarray:
        a, b, _, _ = self.rect
        return np.linspace(a, b, self.nx)

    @cached_property
    def ys(self) -> np.ndarray:
        _, _, c, d = self.rect
        return np.linspace(c, d, self.ny)

    @property
    def hx(self) -> float:
        a, b, _, _ = self.rect
        return (b - a) / (self.nx - 1)

    @property
    def hy(self) -> float:
        _, _, c, d = self.rect
        return (d - c) / (self.ny - 1)

    def at(self, x, y):
        """Bilinear interpolation at (x, y); accepts scalars or arrays.

        Points are clamped to the rectangle, so callers evaluating at the
        boundary are safe against last-ulp excursions.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        a, b, c, d = self.rect
        ix = np.clip(((x - a) / self.hx).astype(int), 0, self.nx - 2)
        iy = np.clip(((y - c) / self.hy).astype(int), 0, self.ny - 2)
        tx = np.clip((x - self.xs[ix]) / self.hx, 0.0, 1.0)
        ty = np.clip((y - self.ys[iy]) / self.hy, 0.0, 1.0)
        v = self.values
        out = (
            (1 - tx) * (1 - ty) * v[ix, iy]
            + tx * (1 - ty) * v[ix + 1, iy]
            + (1 - tx) * ty * v[ix, iy + 1]
            + tx * ty * v[ix + 1, iy + 1]
        )
        return out if out.ndim else float(out)

    def transpose(self) -> "SampledField":
        """Swap the roles of x and y."""
        a, b, c, d = self.rect
        return SampledField(rect=(c, d, a, b), values=self.values.T.copy())


def field_from_function(f, rect, nx: int, ny: int) -> SampledField:
    """Raster of a vectorized callable ``f(x, y)`` over ``rect``."""
    a, b, c, d = rect
    xs = np.linspace(a, b, nx)
    ys = np.linspace(c, d, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return SampledField(rect=tuple(rect), values=np.asarray(f(gx, gy), dtype=float))
