"""Partial integrals/derivatives of the surface and the transformed system.

Integrating the surface along x maps one self-affine system to another: the
new system keeps the horizontal maps, scales vertically by ``s_ij * a_i``
(signed slope, so orientation-reversing patches need no special casing) and
replaces each q_ij by

    qhat_ij(x, y) = a_i * Ix[q_ij](x, y) + integral_a^{u_i(a)} f(s, v_j(y)) ds.

``check_thm_partial_integral`` verifies the resulting functional equation
against a trapezoid cumulative-integral oracle and additionally regenerates
the transformed fixed point from scratch for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import GeometryMismatchError, MismatchedDomainError
from .fields import SampledField
from .fif import FifSystem, fixed_point_raster, sample
from .grid import NodeGrid

__all__ = [
    "PartialIntegralCheck",
    "TransformedSystem",
    "check_remark_derivative",
    "check_thm_partial_integral",
    "cumulative_integral",
    "partial_derivative",
    "transformed_system_Ix",
]


def cumulative_integral(field: SampledField, axis: str) -> SampledField:
    """Composite-trapezoid running integral from the lower domain edge.

    The first row (axis='x') or column (axis='y') is exactly zero.
    """
    v = field.values
    if axis == "x":
        inc = 0.5 * field.hx * (v[:-1, :] + v[1:, :])
        out = np.vstack([np.zeros((1, field.ny)), np.cumsum(inc, axis=0)])
    elif axis == "y":
        inc = 0.5 * field.hy * (v[:, :-1] + v[:, 1:])
        out = np.hstack([np.zeros((field.nx, 1)), np.cumsum(inc, axis=1)])
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return SampledField(rect=field.rect, values=out)


def partial_derivative(field: SampledField, axis: str) -> SampledField:
    """Second-order finite-difference derivative along one axis.

    Central differences inside, one-sided second-order stencils at the
    edges (numpy.gradient with edge_order=2).
    """
    if axis == "x":
        if field.nx < 3:
            raise ValueError("need nx >= 3 for second-order differences")
        out = np.gradient(field.values, field.hx, axis=0, edge_order=2)
    elif axis == "y":
        if field.ny < 3:
            raise ValueError("need ny >= 3 for second-order differences")
        out = np.gradient(field.values, field.hy, axis=1, edge_order=2)
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return SampledField(rect=field.rect, values=out)


def _ix_q_corners(rect, qc, x, y):
    """Closed-form running x-integral of the bilinear with corners ``qc``.

    qc has shape (..., 4) broadcast against x, y; returns
    integral_a^x q(s, y) ds, a quadratic in x.
    """
    a, b, c, d = rect
    delta = (b - a) * (d - c)
    span = b - a
    left = 0.5 * (span * span - (b - x) ** 2)  # integral of (b - s)
    right = 0.5 * (x - a) ** 2  # integral of (s - a)
    return (
        left * ((d - y) * qc[..., 0] + (y - c) * qc[..., 2])
        + right * ((d - y) * qc[..., 1] + (y - c) * qc[..., 3])
    ) / delta


@dataclass(frozen=True)
class TransformedSystem:
    """System generating the x-integral of a surface.

    ``boundary`` row i-1 holds the trace t -> integral_a^{u_i(a)} f(s, t) ds
    sampled on ``boundary_ys``; the per-patch qhat adds the closed-form
    polynomial part.  Scalings may be used as a generator because
    |s_ij * a_i| < 1 whenever the source system contracts.
    """

    grid: NodeGrid
    scalings: np.ndarray
    base_qcorners: np.ndarray
    boundary: np.ndarray
    boundary_ys: np.ndarray

    def qhat(self, i, j, x, y):
        """qhat_ij(x, y); accepts aligned arrays of 1-based indices."""
        i = np.asarray(i)
        j = np.asarray(j)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ax, _ = self.grid.x_affine
        ay, by = self.grid.y_affine
        poly = ax[i - 1] * _ix_q_corners(
            self.grid.rect, self.base_qcorners[i - 1, j - 1], x, y
        )
        t = ay[j - 1] * y + by[j - 1]
        out = poly + _interp_rows(self.boundary, self.boundary_ys, i - 1, t)
        return out if out.ndim else float(out)


def _interp_rows(table: np.ndarray, ts: np.ndarray, row, t):
    """Linear interpolation of ``table[row]`` at ``t``, vectorized over rows."""
    h = ts[1] - ts[0]
    k = np.clip(((t - ts[0]) / h).astype(int), 0, len(ts) - 2)
    w = np.clip((t - ts[k]) / h, 0.0, 1.0)
    return (1 - w) * table[row, k] + w * table[row, k + 1]


def transformed_system_Ix(sys: FifSystem, f_field: SampledField) -> TransformedSystem:
    """Build the x-integral system from the surface system and its raster.

    ``f_field`` must raster the fixed point of ``sys`` on the same
    rectangle; the boundary terms are read from its trapezoid cumulative
    integral, interpolating in x at u_i(a).
    """
    if not np.allclose(f_field.rect, sys.grid.rect):
        raise MismatchedDomainError(
            f"field rect {f_field.rect} != grid rect {sys.grid.rect}"
        )
    g = cumulative_integral(f_field, "x")
    ax, bx = sys.grid.x_affine
    a = sys.grid.rect[0]
    u_at_a = ax * a + bx  # u_i(a), i = 1..N
    n = sys.grid.n
    boundary = np.empty((n, f_field.ny))
    xs = g.xs
    h = g.hx
    for idx in range(n):
        k = int(np.clip((u_at_a[idx] - xs[0]) / h, 0, g.nx - 2))
        w = np.clip((u_at_a[idx] - xs[k]) / h, 0.0, 1.0)
        boundary[idx] = (1 - w) * g.values[k] + w * g.values[k + 1]
    scalings = sys.scalings * ax[:, None]
    return TransformedSystem(
        grid=sys.grid,
        scalings=scalings,
        base_qcorners=sys.qcorners,
        boundary=boundary,
        boundary_ys=g.ys,
    )


class PartialIntegralCheck(NamedTuple):
    equation_residual: float
    generator_gap: float


def check_thm_partial_integral(
    sys: FifSystem, resolution: int = 257, tol: float = 1e-9
) -> PartialIntegralCheck:
    """Residuals of the x-integral functional equation.

    ``equation_residual`` is the max over all patches and a fixed 21 x 21
    point lattice of

        |Ixf(u_i(x), v_j(y)) - s_ij a_i Ixf(x, y) - qhat_ij(x, y)|

    with Ixf from the trapezoid oracle; ``generator_gap`` is the sup
    difference between that oracle and the fixed point regenerated from the
    transformed system.
    """
    if resolution < 33:
        raise ValueError("resolution must be >= 33")
    f_field = sample(sys, resolution, resolution, tol)
    g = cumulative_integral(f_field, "x")
    ts = transformed_system_Ix(sys, f_field)
    a, b, c, d = sys.grid.rect
    px, py = np.meshgrid(
        np.linspace(a, b, 21), np.linspace(c, d, 21), indexing="ij"
    )
    ax, bx = sys.grid.x_affine
    ay, by = sys.grid.y_affine
    base = g.at(px, py)
    residual = 0.0
    for i in range(1, sys.grid.n + 1):
        for j in range(1, sys.grid.m + 1):
            lhs = g.at(ax[i - 1] * px + bx[i - 1], ay[j - 1] * py + by[j - 1])
            ii = np.full(px.shape, i, dtype=int)
            jj = np.full(px.shape, j, dtype=int)
            rhs = ts.scalings[i - 1, j - 1] * base + ts.qhat(ii, jj, px, py)
            residual = max(residual, float(np.max(np.abs(lhs - rhs))))
    regen = fixed_point_raster(
        sys.grid, ts.scalings, ts.qhat, resolution, resolution, tol=1e-13
    )
    gap = float(np.max(np.abs(regen.values - g.values)))
    return PartialIntegralCheck(residual, gap)


def check_remark_derivative(
    sys_hat: FifSystem, sys: FifSystem, tol: float = 1e-10
) -> bool:
    """Do the two systems stand in the derivative relation?

    Verifies patch-wise that ``s_hat_ij = s_ij * a_i`` and that the
    x-derivative of the bilinear qhat_ij equals ``a_i * q_ij`` (both sides
    at most bilinear, so corner agreement decides equality).
    """
    if not sys_hat.grid.same_geometry(sys.grid):
        raise GeometryMismatchError("systems do not share node geometry")
    a, b, c, d = sys.grid.rect
    ax, _ = sys.grid.x_affine
    span = b - a
    ratio_ok = np.max(
        np.abs(sys_hat.scalings - sys.scalings * ax[:, None])
    ) <= tol
    qh = sys_hat.qcorners
    q = sys.qcorners
    # d/dx of the bilinear is constant in x: one value along y=c, one along y=d.
    ddx_low = (qh[..., 1] - qh[..., 0]) / span
    ddx_high = (qh[..., 3] - qh[..., 2]) / span
    ai = ax[:, None]
    deriv_ok = (
        np.max(np.abs(ddx_low - ai * q[..., 0])) <= tol
        and np.max(np.abs(ddx_low - ai * q[..., 1])) <= tol
        and np.max(np.abs(ddx_high - ai * q[..., 2])) <= tol
        and np.max(np.abs(ddx_high - ai * q[..., 3])) <= tol
    )
    return bool(ratio_ok and deriv_ok)
