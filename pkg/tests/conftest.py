import math

import numpy as np
import pytest

from fracsurf import build_system, grid_from_function

# Worked-example data: sin(x^2 + y^2) on the unit square, 5 x 5 nodes,
# printed to 4 decimals.
EXAMPLE_Z = np.array(
    [
        [0.0000, 0.0625, 0.2474, 0.5333, 0.8415],
        [0.0625, 0.1247, 0.3074, 0.5851, 0.8736],
        [0.2474, 0.3074, 0.4794, 0.7260, 0.9490],
        [0.5333, 0.5851, 0.7260, 0.9023, 1.0000],
        [0.8415, 0.8736, 0.9490, 1.0000, 0.9093],
    ]
)

EXAMPLE_ALPHA = 0.2


def example_grid(rect=(0.0, 1.0, 0.0, 1.0)):
    return grid_from_function(lambda x, y: math.sin(x * x + y * y), 4, 4, rect)


def bilinear_grid(rect=(0.0, 1.0, 0.0, 1.0), scale=2.0):
    a, _, c, _ = rect
    return grid_from_function(lambda x, y: scale * (x - a) * (y - c), 4, 4, rect)


@pytest.fixture(scope="session")
def paper_grid():
    return example_grid()


@pytest.fixture(scope="session")
def paper_system(paper_grid):
    return build_system(paper_grid, EXAMPLE_ALPHA)


@pytest.fixture(scope="session")
def shifted_system():
    """Same data function on [1, 2]^2 so the laplace family applies."""
    return build_system(example_grid((1.0, 2.0, 1.0, 2.0)), EXAMPLE_ALPHA)


@pytest.fixture(scope="session")
def bilinear_system():
    """Smooth surrogate: the fixed point is the bilinear data function."""
    return build_system(bilinear_grid(), EXAMPLE_ALPHA)
