import copy
import os

import pytest

from cell_config import CellConfig, load_cell_config, parse_cell_config
from cell_state import CellState, initial_state
from config_utils import read_config_file
from mesh import Mesh, build_mesh

CONFIG_DIR = os.path.join(os.path.dirname(os.path.realpath(__file__)), "configs")
REFERENCE_FILE = os.path.join(CONFIG_DIR, "reference_cell.yaml")


@pytest.fixture(scope="session")
def reference_file() -> str:
    return REFERENCE_FILE


@pytest.fixture(scope="session")
def _reference_raw() -> dict:
    return read_config_file(REFERENCE_FILE)


@pytest.fixture
def reference_raw(_reference_raw: dict) -> dict:
    """Fresh copy of the reference tree, safe to modify."""
    return copy.deepcopy(_reference_raw)


@pytest.fixture(scope="session")
def reference_config() -> CellConfig:
    return load_cell_config(REFERENCE_FILE)


@pytest.fixture(scope="session")
def reference_mesh(reference_config: CellConfig) -> Mesh:
    return build_mesh(reference_config.geometry, reference_config.mesh)


@pytest.fixture(scope="session")
def reference_state(reference_config: CellConfig, reference_mesh: Mesh) -> CellState:
    return initial_state(reference_config, reference_mesh)


def make_config(raw: dict, **sections) -> CellConfig:
    """Parse ``raw`` after updating its sections key by key."""
    tree = copy.deepcopy(raw)
    for name, values in sections.items():
        tree.setdefault(name, {}).update(values)
    return parse_cell_config(tree, CONFIG_DIR)
