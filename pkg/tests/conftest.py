"""Shared fixtures: small hand-checked maps and trees."""

import os
import sys

import pytest

# Add project root to path
ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from src.blossom.blossoming import PlantedNode, StemKind, materialize
from src.blossom.planar_map import Color, build_map

PRESETS_FILE = os.path.join(ROOT, "configs", "run_configs.json")


@pytest.fixture
def single_edge():
    """One white vertex (dart 0) joined to one black vertex (dart 1)."""
    return build_map((0, 1), (1, 0))


@pytest.fixture
def path_map():
    """White leaf, black middle vertex, white leaf; rooted at the first leaf."""
    return build_map((0, 2, 1, 3), (1, 0, 3, 2))


@pytest.fixture
def square_map():
    """The 4-cycle w1 b1 w2 b2; face 0 = (0 2 4 6) is the outer face."""
    return build_map((7, 2, 1, 4, 3, 6, 5, 0), (1, 0, 3, 2, 5, 4, 7, 6))


@pytest.fixture
def loop_map():
    """One vertex carrying a loop: not bipartite, two faces."""
    return build_map((1, 0), (1, 0))


@pytest.fixture
def double_edge_tree():
    """White root with a closing stem, then a black child with an opening stem.

    Its closure is the double edge between one white and one black vertex.
    """
    return materialize((StemKind.CLOSING, PlantedNode(Color.BLACK, (StemKind.OPENING,))),
                       Color.WHITE)


@pytest.fixture
def presets_file():
    return PRESETS_FILE
