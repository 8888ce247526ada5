"""Interpolation data model and the one-dimensional affine contractions.

A :class:`NodeGrid` holds the rectangular interpolation data: strictly
increasing abscissae ``xs`` (N+1 values), ``ys`` (M+1 values) and the height
matrix ``zs`` of shape (N+1, M+1).  The horizontal maps ``u_i`` (x axis) and
``v_j`` (y axis) are affine bijections from the full interval onto the i-th
subinterval, with orientation alternating by index parity: odd indices map
start->left node, even indices reverse.  That fold-out parity makes adjacent
maps share pre-images of the interior nodes, which is what lets the surface
pieces meet continuously without extra conditions on the data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BadEndpointIndexError,
    DimensionMismatchError,
    InvalidRectError,
    NonMonotoneNodesError,
    OutOfDomainError,
    PatchIndexError,
)

__all__ = [
    "AffineMap1D",
    "NodeGrid",
    "affine_coeffs",
    "grid_from_function",
    "locate_interval",
    "make_grid",
    "rho",
]


@dataclass(frozen=True)
class AffineMap1D:
    """One contraction ``x -> a*x + b`` of the horizontal family."""

    a: float
    b: float

    def __call__(self, x):
        return self.a * x + self.b

    def inverse(self, x):
        return (x - self.b) / self.a


@dataclass(frozen=True)
class NodeGrid:
    """Validated rectangular interpolation data.

    Attributes
    ----------
    xs, ys : ndarray
        Strictly increasing node abscissae, lengths N+1 and M+1 with
        N, M >= 1.
    zs : ndarray
        Heights, shape (N+1, M+1); ``zs[i, j]`` sits above ``(xs[i], ys[j])``.
    """

    xs: np.ndarray
    ys: np.ndarray
    zs: np.ndarray

    @property
    def n(self) -> int:
        return len(self.xs) - 1

    @property
    def m(self) -> int:
        return len(self.ys) - 1

    @property
    def rect(self) -> tuple[float, float, float, float]:
        return (
            float(self.xs[0]),
            float(self.xs[-1]),
            float(self.ys[0]),
            float(self.ys[-1]),
        )

    @cached_property
    def x_affine(self) -> tuple[np.ndarray, np.ndarray]:
        """Slopes and offsets of u_1..u_N as arrays indexed by i-1."""
        return _affine_arrays(self.xs)

    @cached_property
    def y_affine(self) -> tuple[np.ndarray, np.ndarray]:
        """Slopes and offsets of v_1..v_M as arrays indexed by j-1."""
        return _affine_arrays(self.ys)

    def same_geometry(self, other: "NodeGrid", tol: float = 0.0) -> bool:
        if self.n != other.n or self.m != other.m:
            return False
        return bool(
            np.all(np.abs(self.xs - other.xs) <= tol)
            and np.all(np.abs(self.ys - other.ys) <= tol)
        )


def _affine_arrays(nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient arrays of the fold-out affine family on ``nodes``.

    Odd i maps [start, end] -> [node_{i-1}, node_i] preserving orientation,
    even i reverses it.  Index i-1 in the returned arrays corresponds to
    map i.
    """
    lo, hi = nodes[0], nodes[-1]
    span = hi - lo
    left, right = nodes[:-1], nodes[1:]
    i = np.arange(1, len(nodes))
    odd = i % 2 == 1
    a = np.where(odd, (right - left) / span, (left - right) / span)
    b = np.where(odd, (left * hi - right * lo) / span, (right * hi - left * lo) / span)
    return a, b


def make_grid(
    xs: Sequence[float], ys: Sequence[float], zs: Sequence[Sequence[float]]
) -> NodeGrid:
    """Validate raw interpolation data and return a :class:`NodeGrid`.

    Raises
    ------
    NonMonotoneNodesError
        If either node list is not strictly increasing.
    DimensionMismatchError
        If fewer than two nodes per axis, or ``zs`` is not (N+1, M+1).
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    zs = np.asarray(zs, dtype=float)
    if xs.ndim != 1 or ys.ndim != 1 or len(xs) < 2 or len(ys) < 2:
        raise DimensionMismatchError(
            f"need at least 2 nodes per axis, got {len(xs)} x-nodes, {len(ys)} y-nodes"
        )
    if np.any(np.diff(xs) <= 0):
        raise NonMonotoneNodesError("x nodes must be strictly increasing")
    if np.any(np.diff(ys) <= 0):
        raise NonMonotoneNodesError("y nodes must be strictly increasing")
    if zs.shape != (len(xs), len(ys)):
        raise DimensionMismatchError(
            f"zs has shape {zs.shape}, expected {(len(xs), len(ys))}"
        )
    if len(xs) == 2 or len(ys) == 2:
        # |slope| = 1 on that axis: admissible data, but the horizontal maps
        # do not contract and the attractor machinery will reject it.
        warnings.warn(
            "single-interval axis: horizontal maps are not contractions",
            stacklevel=2,
        )
    xs.setflags(write=False)
    ys.setflags(write=False)
    zs.setflags(write=False)
    return NodeGrid(xs=xs, ys=ys, zs=zs)


def grid_from_function(
    f: Callable[[float, float], float],
    n: int,
    m: int,
    rect: Sequence[float],
) -> NodeGrid:
    """Sample ``f`` on a uniform (n+1) x (m+1) node lattice over ``rect``.

    ``rect`` is (a, b, c, d) with a < b and c < d.
    """
    a, b, c, d = (float(v) for v in rect)
    if not (a < b and c < d):
        raise InvalidRectError(f"rect must satisfy a < b and c < d, got {rect!r}")
    if n < 1 or m < 1:
        raise InvalidRectError(f"need n, m >= 1, got n={n}, m={m}")
    xs = np.linspace(a, b, n + 1)
    ys = np.linspace(c, d, m + 1)
    zs = np.array([[float(f(x, y)) for y in ys] for x in xs])
    return make_grid(xs, ys, zs)


def rho(i: int, k: int, end: int) -> int:
    """Corner index map: which node a patch corner inherits its height from.

    ``k`` must be 0 or ``end`` (the last node index on that axis).  Odd i
    sends 0 -> i-1 and end -> i; even i reverses.
    """
    if i < 1:
        raise PatchIndexError(f"map index must be >= 1, got {i}")
    if k not in (0, end):
        raise BadEndpointIndexError(f"k must be 0 or {end}, got {k}")
    if i % 2 == 1:
        return i - 1 if k == 0 else i
    return i if k == 0 else i - 1


def affine_coeffs(grid: NodeGrid, axis: str, i: int) -> AffineMap1D:
    """The i-th horizontal map on ``axis`` ('x' or 'y'), 1-based."""
    if axis == "x":
        a_arr, b_arr = grid.x_affine
        count = grid.n
    elif axis == "y":
        a_arr, b_arr = grid.y_affine
        count = grid.m
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    if not 1 <= i <= count:
        raise PatchIndexError(f"index {i} outside 1..{count} on axis {axis!r}")
    return AffineMap1D(a=float(a_arr[i - 1]), b=float(b_arr[i - 1]))


def locate_interval(nodes: Sequence[float], x: float) -> int:
    """1-based index i with ``x`` in [nodes[i-1], nodes[i]].

    Ties at interior nodes resolve to the left interval; x == nodes[0]
    returns 1.
    """
    nodes = np.asarray(nodes, dtype=float)
    if x < nodes[0] or x > nodes[-1]:
        raise OutOfDomainError(f"{x} outside [{nodes[0]}, {nodes[-1]}]")
    return int(np.clip(np.searchsorted(nodes, x, side="left"), 1, len(nodes) - 1))


def locate_many(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`locate_interval`; assumes points already in domain."""
    return np.clip(np.searchsorted(nodes, x, side="left"), 1, len(nodes) - 1)
