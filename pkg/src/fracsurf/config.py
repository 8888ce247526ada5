"""Flat key/value experiment configs and their validated RunSpec.

The config document is UTF-8 text, one ``key = value`` pair per line, with
``#`` comments and blank lines allowed.  Unknown or duplicate keys are
errors (strict mode), so an experiment file says exactly what it does.
Numeric constraints of the downstream modules are re-validated at parse
time and reported with the violated invariant's name.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import ConfigParseError, ConfigValidationError
from .fif import FifSystem, build_system
from .grid import NodeGrid, grid_from_function, make_grid
from .transforms import KERNEL_KINDS, TransformPoint

__all__ = [
    "PRESETS",
    "RunSpec",
    "grid_from_spec",
    "parse_config",
    "system_from_spec",
    "validate_spec",
]


# name -> factory(rect) -> f(x, y); the bilinear preset vanishes on the
# lower edges, which keeps its fractional derivative bounded.
PRESETS: dict[str, Callable] = {
    "sin_x2_plus_y2": lambda rect: lambda x, y: math.sin(x * x + y * y),
    "bilinear": lambda rect: lambda x, y: (x - rect[0]) * (y - rect[2]),
    "constant": lambda rect: lambda x, y: 1.0,
}


@dataclass(frozen=True)
class RunSpec:
    """Validated run description: grid source, scaling, command parameters."""

    grid_preset: str | None = "sin_x2_plus_y2"
    grid_n: int = 4
    grid_m: int = 4
    grid_rect: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    grid_xs: tuple[float, ...] | None = None
    grid_ys: tuple[float, ...] | None = None
    grid_zs: tuple[tuple[float, ...], ...] | None = None
    alpha: float = 0.2
    resolution: int = 257
    nx: int = 129
    ny: int = 129
    tol: float = 1e-9
    threshold: float | None = None
    n_samples: int = 64
    n_points: int = 1000
    seed: int = 7
    burn_in: int = 50
    gamma_p: float = 0.5
    gamma_q: float = 0.5
    kernel: str = "laplace"
    lam: float = 1.0
    points: tuple[float, ...] = (0.5, 1.0, 2.0)
    axis: str = "x"
    out_dir: str = "out"
    figures: bool = True

    def transform_points(self) -> list[TransformPoint]:
        return [TransformPoint(s, t) for s in self.points for t in self.points]


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (RunSpec field, converter)
_KEYS: dict[str, tuple[str, Callable]] = {
    "grid.preset": ("grid_preset", str),
    "grid.n": ("grid_n", int),
    "grid.m": ("grid_m", int),
    "grid.rect": ("grid_rect", _parse_floats),
    "grid.xs": ("grid_xs", _parse_floats),
    "grid.ys": ("grid_ys", _parse_floats),
    "grid.zs": (
        "grid_zs",
        lambda text: tuple(_parse_floats(row) for row in text.split(";")),
    ),
    "alpha": ("alpha", float),
    "run.resolution": ("resolution", int),
    "run.nx": ("nx", int),
    "run.ny": ("ny", int),
    "run.tol": ("tol", float),
    "run.threshold": ("threshold", float),
    "run.n_samples": ("n_samples", int),
    "run.n_points": ("n_points", int),
    "run.seed": ("seed", int),
    "run.burn_in": ("burn_in", int),
    "run.gamma_p": ("gamma_p", float),
    "run.gamma_q": ("gamma_q", float),
    "run.kernel": ("kernel", str),
    "run.lambda": ("lam", float),
    "run.points": ("points", _parse_floats),
    "run.axis": ("axis", str),
    "output.dir": ("out_dir", str),
    "output.figures": ("figures", _parse_bool),
}


def parse_config(text: str) -> RunSpec:
    """Parse and validate a config document into a :class:`RunSpec`."""
    fields: dict[str, object] = {}
    seen: set[str] = set()
    any_content = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        any_content = True
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected 'key = value': {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            raise ConfigParseError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigParseError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        attr, conv = _KEYS[key]
        try:
            fields[attr] = conv(value)
        except (ValueError, TypeError) as exc:
            raise ConfigParseError(
                f"line {lineno}: bad value for {key!r}: {value!r} ({exc})"
            ) from exc
    if not any_content:
        raise ConfigParseError("empty config document")
    if "grid_xs" in fields or "grid_zs" in fields:
        fields.setdefault("grid_preset", None)
        if fields.get("grid_preset") is not None:
            raise ConfigParseError("give either grid.preset or inline grid.xs/ys/zs")
        fields["grid_preset"] = None
    spec = replace(RunSpec(), **fields)
    validate_spec(spec)
    return spec


def validate_spec(spec: RunSpec) -> None:
    """Re-check every downstream invariant; raises naming the violated one."""
    def fail(invariant: str, detail: str):
        raise ConfigValidationError(f"{invariant}: {detail}")

    if abs(spec.alpha) >= 1.0:
        fail("ScalingOutOfRange", f"|alpha| must be < 1, got {spec.alpha}")
    if spec.grid_preset is not None:
        if spec.grid_preset not in PRESETS:
            fail("UnknownPreset", f"{spec.grid_preset!r} not in {sorted(PRESETS)}")
        if spec.grid_n < 1 or spec.grid_m < 1:
            fail("InvalidRect", f"need n, m >= 1, got {spec.grid_n}, {spec.grid_m}")
        if len(spec.grid_rect) != 4:
            fail("InvalidRect", f"rect needs 4 numbers, got {spec.grid_rect}")
        a, b, c, d = spec.grid_rect
        if not (a < b and c < d):
            fail("InvalidRect", f"need a < b and c < d, got {spec.grid_rect}")
    else:
        if spec.grid_xs is None or spec.grid_ys is None or spec.grid_zs is None:
            fail("DimensionMismatch", "inline grids need grid.xs, grid.ys and grid.zs")
        if any(np.diff(spec.grid_xs) <= 0) or any(np.diff(spec.grid_ys) <= 0):
            fail("NonMonotoneNodes", "inline nodes must be strictly increasing")
        rows = {len(r) for r in spec.grid_zs}
        if len(spec.grid_zs) != len(spec.grid_xs) or rows != {len(spec.grid_ys)}:
            fail("DimensionMismatch", "grid.zs must be (len xs) rows of (len ys)")
    if spec.tol <= 0:
        fail("InvalidTolerance", f"run.tol must be > 0, got {spec.tol}")
    if spec.threshold is not None and spec.threshold <= 0:
        fail("InvalidTolerance", f"run.threshold must be > 0, got {spec.threshold}")
    if spec.resolution < 2 or spec.nx < 2 or spec.ny < 2:
        fail("DimensionMismatch", "resolutions must be >= 2")
    if spec.n_points <= spec.burn_in or spec.burn_in < 0:
        fail("InvalidChaosRun", "need n_points > burn_in >= 0")
    if spec.gamma_p <= 0 or spec.gamma_q <= 0:
        fail("InvalidOrder", "gamma orders must be positive")
    if not 0.0 < spec.lam <= 1.0:
        fail("InvalidOrder", f"lambda must lie in (0, 1], got {spec.lam}")
    if spec.kernel not in KERNEL_KINDS:
        fail("UnknownKernel", f"{spec.kernel!r} not in {KERNEL_KINDS}")
    if not spec.points:
        fail("NoTransformPoints", "run.points must not be empty")
    if spec.axis not in ("x", "y"):
        fail("InvalidAxis", f"run.axis must be x or y, got {spec.axis!r}")


def grid_from_spec(spec: RunSpec) -> NodeGrid:
    """Materialize the grid described by the spec."""
    if spec.grid_preset is None:
        return make_grid(spec.grid_xs, spec.grid_ys, spec.grid_zs)
    f = PRESETS[spec.grid_preset](spec.grid_rect)
    return grid_from_function(f, spec.grid_n, spec.grid_m, spec.grid_rect)


def system_from_spec(spec: RunSpec) -> FifSystem:
    return build_system(grid_from_spec(spec), spec.alpha)
