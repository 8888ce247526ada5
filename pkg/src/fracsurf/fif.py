"""Iterated function system on the rectangle and its fixed-point surface.

The system attaches to every patch (i, j) a map

    W_ij(x, y, z) = (u_i(x), v_j(y), s_ij * z + q_ij(x, y)),

where ``q_ij`` is the bilinear function on the full rectangle through the
four corner constraints ``q_ij(corner_kl) = z[rho(i,k), rho(j,l)] - s_ij *
z[kl]``.  With max |s_ij| < 1 there is a unique continuous surface ``f``
through all nodes satisfying the self-referential equation

    f(x, y) = s_ij * f(ui_inv(x), vj_inv(y)) + q_ij(ui_inv(x), vj_inv(y))

on each patch.  ``evaluate`` sums that equation along the pullback address
chain to a guaranteed absolute tolerance; ``chaos_game`` renders the graph
as the attractor of the W_ij.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DimensionMismatchError,
    MismatchedDomainError,
    NonContractiveError,
    OutOfDomainError,
    PatchIndexError,
    ScalingOutOfRangeError,
)
from .fields import SampledField
from .grid import NodeGrid, locate_many

__all__ = [
    "FifSystem",
    "PointCloud",
    "attractor_distance",
    "bilinear_corner_eval",
    "build_system",
    "chaos_game",
    "check_matching",
    "check_selfref",
    "evaluate",
    "evaluate_many",
    "fixed_point_raster",
    "q_eval",
    "rb_apply",
    "sample",
]

# Kronecker (R2) low-discrepancy sequence constants.
_R2_A1 = 0.7548776662466927
_R2_A2 = 0.5698402909980532


def bilinear_corner_eval(rect, q00, qn0, q0m, qnm, x, y):
    """Bilinear function on ``rect`` through four given corner values.

    Corner order: (a, c), (b, c), (a, d), (b, d).  Vectorized in every
    argument (corner values may be arrays broadcast against x, y).
    """
    a, b, c, d = rect
    delta = (b - a) * (d - c)
    return (
        (b - x) * (d - y) * q00
        + (x - a) * (d - y) * qn0
        + (b - x) * (y - c) * q0m
        + (x - a) * (y - c) * qnm
    ) / delta


@dataclass(frozen=True)
class FifSystem:
    """IFS data: grid geometry, per-patch vertical scalings and q corners.

    ``scalings`` has shape (N, M); ``qcorners`` has shape (N, M, 4) holding
    the values of q_ij at the four outer corners in the order of
    :func:`bilinear_corner_eval`.  Systems produced by :func:`build_system`
    satisfy the corner constraints exactly; the constructor itself only
    checks shapes and the contraction bound, so transformed or deliberately
    perturbed systems can be represented too.
    """

    grid: NodeGrid
    scalings: np.ndarray
    qcorners: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scalings, dtype=float)
        q = np.asarray(self.qcorners, dtype=float)
        n, m = self.grid.n, self.grid.m
        if s.shape != (n, m):
            raise DimensionMismatchError(
                f"scalings shape {s.shape}, expected {(n, m)}"
            )
        if q.shape != (n, m, 4):
            raise DimensionMismatchError(
                f"qcorners shape {q.shape}, expected {(n, m, 4)}"
            )
        if np.max(np.abs(s)) >= 1.0:
            raise ScalingOutOfRangeError(
                f"max |scaling| = {np.max(np.abs(s))}, must be < 1"
            )
        object.__setattr__(self, "scalings", s)
        object.__setattr__(self, "qcorners", q)

    @property
    def sigma(self) -> float:
        """Contraction factor max |s_ij|."""
        return float(np.max(np.abs(self.scalings)))

    @property
    def q_sup(self) -> float:
        """Sup of |q_ij| over all patches (bilinear extrema sit at corners)."""
        return float(np.max(np.abs(self.qcorners)))

    def outer_corners(self) -> tuple[float, float, float, float]:
        z = self.grid.zs
        return (float(z[0, 0]), float(z[-1, 0]), float(z[0, -1]), float(z[-1, -1]))


@dataclass(frozen=True)
class PointCloud:
    """Points (x, y, z) with (x, y) inside the system rectangle."""

    points: np.ndarray
    rect: tuple[float, float, float, float]

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3:
            raise DimensionMismatchError(f"points shape {p.shape}, expected (n, 3)")
        a, b, c, d = self.rect
        eps = 1e-12 * max(b - a, d - c)
        if len(p) and (
            p[:, 0].min() < a - eps
            or p[:, 0].max() > b + eps
            or p[:, 1].min() < c - eps
            or p[:, 1].max() > d + eps
        ):
            raise OutOfDomainError("cloud contains points outside the rectangle")
        object.__setattr__(self, "points", p)

    def __len__(self) -> int:
        return len(self.points)


def build_system(grid: NodeGrid, alpha: float) -> FifSystem:
    """Affine system with uniform vertical scaling ``alpha``, |alpha| < 1.

    The per-patch q corners are fixed by the data through the parity index
    map, so the matching conditions across seams hold by construction.
    """
    if abs(alpha) >= 1.0:
        raise ScalingOutOfRangeError(f"|alpha| must be < 1, got {alpha}")
    n, m = grid.n, grid.m
    z = grid.zs
    i = np.arange(1, n + 1)
    j = np.arange(1, m + 1)
    x_lo = np.where(i % 2 == 1, i - 1, i)  # rho(i, 0)
    x_hi = np.where(i % 2 == 1, i, i - 1)  # rho(i, N)
    y_lo = np.where(j % 2 == 1, j - 1, j)
    y_hi = np.where(j % 2 == 1, j, j - 1)
    q = np.empty((n, m, 4))
    q[:, :, 0] = z[np.ix_(x_lo, y_lo)] - alpha * z[0, 0]
    q[:, :, 1] = z[np.ix_(x_hi, y_lo)] - alpha * z[-1, 0]
    q[:, :, 2] = z[np.ix_(x_lo, y_hi)] - alpha * z[0, -1]
    q[:, :, 3] = z[np.ix_(x_hi, y_hi)] - alpha * z[-1, -1]
    scalings = np.full((n, m), float(alpha))
    return FifSystem(grid=grid, scalings=scalings, qcorners=q)


def _q_indexed(sys: FifSystem, i: np.ndarray, j: np.ndarray, x, y):
    """q_ij(x, y) for 1-based index arrays i, j aligned with x, y."""
    q = sys.qcorners[i - 1, j - 1]
    return bilinear_corner_eval(
        sys.grid.rect, q[..., 0], q[..., 1], q[..., 2], q[..., 3], x, y
    )


def q_eval(sys: FifSystem, i: int, j: int, x, y):
    """Evaluate the bilinear q_ij; exact at the four outer corners."""
    if not (1 <= i <= sys.grid.n and 1 <= j <= sys.grid.m):
        raise PatchIndexError(
            f"patch ({i}, {j}) outside 1..{sys.grid.n} x 1..{sys.grid.m}"
        )
    out = _q_indexed(sys, np.asarray(i), np.asarray(j), np.asarray(x), np.asarray(y))
    return out if np.ndim(out) else float(out)


def _q_base(sys: FifSystem, x, y):
    """Global bilinear interpolant of the four outer data corners."""
    q00, qn0, q0m, qnm = sys.outer_corners()
    return bilinear_corner_eval(sys.grid.rect, q00, qn0, q0m, qnm, x, y)


def _depth(sys: FifSystem, tol: float) -> int:
    """Address-chain length guaranteeing absolute error <= tol.

    The remainder after K steps is sigma^K * |f - q_base| at the final
    pullback, bounded by sigma^K * (q_sup / (1 - sigma) + max |corner z|).
    """
    sigma = sys.sigma
    if sigma >= 1.0:
        raise NonContractiveError(f"max |scaling| = {sigma} >= 1")
    if sigma == 0.0:
        return 1
    bound = sys.q_sup / (1.0 - sigma) + max(abs(v) for v in sys.outer_corners())
    if bound <= tol:
        return 1
    return max(1, math.ceil(math.log(tol / bound) / math.log(sigma)))


def evaluate_many(sys: FifSystem, x, y, tol: float = 1e-9) -> np.ndarray:
    """Vectorized :func:`evaluate` over arrays of points."""
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    x = np.array(x, dtype=float)
    y = np.array(y, dtype=float)
    a, b, c, d = sys.grid.rect
    if np.any(x < a) or np.any(x > b) or np.any(y < c) or np.any(y > d):
        raise OutOfDomainError("point outside the interpolation rectangle")
    depth = _depth(sys, tol)
    ax, bx = sys.grid.x_affine
    ay, by = sys.grid.y_affine
    acc = np.zeros_like(x)
    scale = np.ones_like(x)
    for _ in range(depth):
        i = locate_many(sys.grid.xs, x)
        j = locate_many(sys.grid.ys, y)
        x = np.clip((x - bx[i - 1]) / ax[i - 1], a, b)
        y = np.clip((y - by[j - 1]) / ay[j - 1], c, d)
        acc += scale * _q_indexed(sys, i, j, x, y)
        scale = scale * sys.scalings[i - 1, j - 1]
    acc += scale * _q_base(sys, x, y)
    return acc


def evaluate(sys: FifSystem, x: float, y: float, tol: float = 1e-9) -> float:
    """Surface value at (x, y) with absolute error at most ``tol``.

    Unrolls the self-referential equation along the pullback address chain;
    the truncated tail is replaced by the global bilinear baseline, whose
    contribution is damped below ``tol`` by the scaling product.
    """
    return float(evaluate_many(sys, np.asarray([x]), np.asarray([y]), tol)[0])


def sample(sys: FifSystem, nx: int, ny: int, tol: float = 1e-9) -> SampledField:
    """Raster of the surface on a uniform nx x ny lattice (endpoints included).

    Rows are independent; FRACSURF_THREADS >= 2 splits them across a thread
    pool (0 or unset picks the single vectorized pass).  The result is
    identical either way.
    """
    a, b, c, d = sys.grid.rect
    xs = np.linspace(a, b, nx)
    ys = np.linspace(c, d, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    threads = int(os.environ.get("FRACSURF_THREADS", "0") or 0)
    if threads >= 2 and nx >= threads:
        blocks = np.array_split(np.arange(nx), threads)
        values = np.empty((nx, ny))

        def run(rows):
            values[rows] = evaluate_many(sys, gx[rows], gy[rows], tol)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, blocks))
    else:
        values = evaluate_many(sys, gx, gy, tol)
    return SampledField(rect=(a, b, c, d), values=values)


def check_matching(sys: FifSystem, n_samples: int = 64) -> float:
    """Max seam residual |F_ij - F_(i+1)j| at shared pre-images (and y analogue).

    The z term cancels, so the residual reduces to q differences along the
    seam pre-image line.  Vanishes (to rounding) for systems built by
    :func:`build_system`; positive for corrupted q corners.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    a, b, c, d = sys.grid.rect
    n, m = sys.grid.n, sys.grid.m
    worst = 0.0
    ysamp = np.linspace(c, d, n_samples)
    for i in range(1, n):
        xstar = b if i % 2 == 1 else a  # shared pre-image of x_i
        for j in range(1, m + 1):
            jj = np.full_like(ysamp, j, dtype=int)
            lhs = _q_indexed(sys, np.full_like(jj, i), jj, xstar, ysamp)
            rhs = _q_indexed(sys, np.full_like(jj, i + 1), jj, xstar, ysamp)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    xsamp = np.linspace(a, b, n_samples)
    for j in range(1, m):
        ystar = d if j % 2 == 1 else c
        for i in range(1, n + 1):
            ii = np.full_like(xsamp, i, dtype=int)
            lhs = _q_indexed(sys, ii, np.full_like(ii, j), xsamp, ystar)
            rhs = _q_indexed(sys, ii, np.full_like(ii, j + 1), xsamp, ystar)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def quasi_random_points(n_points: int, rect) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic low-discrepancy points in the rectangle (R2 sequence)."""
    k = np.arange(n_points)
    a, b, c, d = rect
    x = a + (b - a) * np.mod(0.5 + _R2_A1 * k, 1.0)
    y = c + (d - c) * np.mod(0.5 + _R2_A2 * k, 1.0)
    return x, y


def check_selfref(sys: FifSystem, n_points: int = 1000, tol: float = 1e-6) -> float:
    """Max residual of the self-referential equation over quasi-random points.

    Points cycle through every patch (i, j), so orientation-reversing
    patches are exercised; each term carries evaluate's tolerance, so the
    residual is at most 2 * tol for a correct system.
    """
    n, m = sys.grid.n, sys.grid.m
    x, y = quasi_random_points(n_points, sys.grid.rect)
    k = np.arange(n_points)
    i = (k % (n * m)) // m + 1
    j = (k % (n * m)) % m + 1
    ax, bx = sys.grid.x_affine
    ay, by = sys.grid.y_affine
    ux = ax[i - 1] * x + bx[i - 1]
    vy = ay[j - 1] * y + by[j - 1]
    lhs = evaluate_many(sys, ux, vy, tol)
    rhs = sys.scalings[i - 1, j - 1] * evaluate_many(sys, x, y, tol) + _q_indexed(
        sys, i, j, x, y
    )
    return float(np.max(np.abs(lhs - rhs)))


def chaos_game(
    sys: FifSystem, n_points: int, seed: int, burn_in: int = 50
) -> PointCloud:
    """Random-iteration rendering of the attractor (the graph of the surface).

    Applies a uniformly chosen W_ij per step from the domain center,
    discarding the first ``burn_in`` points.  Requires every horizontal map
    to contract, i.e. at least two intervals per axis.
    """
    if not n_points > burn_in >= 0:
        raise ValueError(f"need n_points > burn_in >= 0, got {n_points}, {burn_in}")
    ax, bx = sys.grid.x_affine
    ay, by = sys.grid.y_affine
    if max(np.max(np.abs(ax)), np.max(np.abs(ay))) >= 1.0 or sys.sigma >= 1.0:
        raise NonContractiveError(
            "chaos game needs |a_i|, |c_j| and |s_ij| all < 1"
        )
    rng = np.random.default_rng(seed)
    n, m = sys.grid.n, sys.grid.m
    ii = rng.integers(0, n, size=n_points)
    jj = rng.integers(0, m, size=n_points)
    a, b, c, d = sys.grid.rect
    x, y = 0.5 * (a + b), 0.5 * (c + d)
    z = float(np.mean(sys.grid.zs))
    s = sys.scalings
    q = sys.qcorners
    rect = sys.grid.rect
    pts = np.empty((n_points - burn_in, 3))
    for k in range(n_points):
        i, j = ii[k], jj[k]
        qv = bilinear_corner_eval(
            rect, q[i, j, 0], q[i, j, 1], q[i, j, 2], q[i, j, 3], x, y
        )
        z = s[i, j] * z + qv
        x = ax[i] * x + bx[i]
        y = ay[j] * y + by[j]
        if k >= burn_in:
            pts[k - burn_in] = (x, y, z)
    return PointCloud(points=pts, rect=rect)


def attractor_distance(cloud: PointCloud, sys: FifSystem, tol: float = 1e-6) -> float:
    """Max |z - f(x, y)| over the cloud against the address-chain evaluator."""
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    p = cloud.points
    f = evaluate_many(sys, np.clip(p[:, 0], *sys.grid.rect[:2]),
                      np.clip(p[:, 1], *sys.grid.rect[2:]), tol)
    return float(np.max(np.abs(p[:, 2] - f)))


def rb_apply(sys: FifSystem, field: SampledField) -> SampledField:
    """One application of the contraction operator T to a raster.

    (Tg)(X, Y) = s_ij * g(pullback) + q_ij(pullback) on patch (i, j), with g
    read from the raster by bilinear interpolation.  Iterating from any
    bounded start converges to the surface raster; used as an independent
    route to the fixed point.
    """
    if not np.allclose(field.rect, sys.grid.rect):
        raise MismatchedDomainError(
            f"field rect {field.rect} != grid rect {sys.grid.rect}"
        )
    qfun = lambda i, j, x, y: _q_indexed(sys, i, j, x, y)  # noqa: E731
    new = _rb_step(sys.grid, sys.scalings, qfun, field)
    return SampledField(rect=field.rect, values=new)


def _pullback_mesh(grid: NodeGrid, nx: int, ny: int):
    """Patch indices and pulled-back coordinates for a uniform raster."""
    a, b, c, d = grid.rect
    gx, gy = np.meshgrid(np.linspace(a, b, nx), np.linspace(c, d, ny), indexing="ij")
    i = locate_many(grid.xs, gx)
    j = locate_many(grid.ys, gy)
    ax, bx = grid.x_affine
    ay, by = grid.y_affine
    px = np.clip((gx - bx[i - 1]) / ax[i - 1], a, b)
    py = np.clip((gy - by[j - 1]) / ay[j - 1], c, d)
    return i, j, px, py


def _rb_step(grid, scalings, qfun, field: SampledField) -> np.ndarray:
    i, j, px, py = _pullback_mesh(grid, field.nx, field.ny)
    return scalings[i - 1, j - 1] * field.at(px, py) + qfun(i, j, px, py)


def fixed_point_raster(
    grid: NodeGrid,
    scalings: np.ndarray,
    qfun: Callable,
    nx: int,
    ny: int,
    tol: float = 1e-12,
    max_iter: int = 400,
) -> SampledField:
    """Fixed point of the raster contraction for an arbitrary q family.

    ``qfun(i, j, x, y)`` must accept 1-based index arrays and coordinate
    arrays.  Iteration stops when the sup-change drops below ``tol``;
    raises if the scalings do not contract.
    """
    scalings = np.asarray(scalings, dtype=float)
    sigma = float(np.max(np.abs(scalings)))
    if sigma >= 1.0:
        raise NonContractiveError(f"max |scaling| = {sigma} >= 1")
    i, j, px, py = _pullback_mesh(grid, nx, ny)
    qvals = qfun(i, j, px, py)
    svals = scalings[i - 1, j - 1]
    rect = grid.rect
    field = SampledField(rect=rect, values=np.zeros((nx, ny)))
    for _ in range(max_iter):
        new = svals * field.at(px, py) + qvals
        change = float(np.max(np.abs(new - field.values)))
        field = SampledField(rect=rect, values=new)
        if change <= tol:
            break
    return field
