import numpy as np
import pytest
from numpy.testing import assert_allclose

from cell_config import CellConfig
from conftest import make_config
from electrolyte import diffusivity_cells, electrolyte_faces, electrolyte_mass, step_electrolyte
from mesh import Mesh, Region, build_mesh


def test_uniform_field_is_steady(reference_config: CellConfig, reference_mesh: Mesh):
    faces = electrolyte_faces(reference_config.transport, reference_mesh)
    ce = np.ones(reference_mesh.size)
    j = np.zeros(reference_mesh.size)
    assert_allclose(step_electrolyte(ce, j, faces, reference_mesh, 0.1, 1.0), ce, rtol=1e-14)


def test_balanced_reaction_conserves_mass(reference_config: CellConfig, reference_mesh: Mesh):
    faces = electrolyte_faces(reference_config.transport, reference_mesh)
    rng = np.random.default_rng(3)
    ce = rng.uniform(0.5, 1.5, reference_mesh.size)
    j = np.zeros(reference_mesh.size)
    anode = reference_mesh.cells(Region.ANODE)
    cathode = reference_mesh.cells(Region.CATHODE)
    j[anode] = rng.uniform(0.0, 2.0, 15)
    j[cathode] = -reference_mesh.integrate(j) / reference_mesh.widths[cathode].sum()
    mass = electrolyte_mass(ce, reference_mesh)
    for _ in range(100):
        ce = step_electrolyte(ce, j, faces, reference_mesh, 0.1, 0.1)
    assert abs(electrolyte_mass(ce, reference_mesh) - mass) <= 1e-12 * mass
    # lithium moves from the anode side towards the cathode side
    assert ce[anode].mean() > ce[cathode].mean()


def test_net_source_changes_mass(reference_config: CellConfig, reference_mesh: Mesh):
    faces = electrolyte_faces(reference_config.transport, reference_mesh)
    ce = np.ones(reference_mesh.size)
    j = np.zeros(reference_mesh.size)
    j[reference_mesh.cells(Region.ANODE)] = 1.0
    stepped = step_electrolyte(ce, j, faces, reference_mesh, 0.1, 0.5)
    gained = electrolyte_mass(stepped, reference_mesh) - electrolyte_mass(ce, reference_mesh)
    assert gained == pytest.approx(0.5 * 0.1 * 1.0, rel=1e-12)


def test_interface_faces_are_harmonic(reference_raw: dict):
    config = make_config(
        reference_raw, transport={"De": {"anode": 1.0, "separator": 3.0, "cathode": 1.0}}
    )
    mesh = build_mesh(config.geometry, config.mesh)
    De = diffusivity_cells(config.transport, mesh)
    assert De[14] == 1.0 and De[15] == 3.0
    faces = electrolyte_faces(config.transport, mesh)
    h = mesh.widths
    assert faces[14] == pytest.approx(1.0 / (0.5 * h[14] / 1.0 + 0.5 * h[15] / 3.0))
    assert faces[3] == pytest.approx(1.0 / h[3])


def test_maximum_principle_without_reaction(reference_config: CellConfig, reference_mesh: Mesh):
    faces = electrolyte_faces(reference_config.transport, reference_mesh)
    rng = np.random.default_rng(8)
    ce = rng.uniform(0.2, 1.8, reference_mesh.size)
    j = np.zeros(reference_mesh.size)
    for dt in (1e-3, 0.1, 10.0):
        stepped = step_electrolyte(ce, j, faces, reference_mesh, 0.1, dt)
        assert stepped.min() >= ce.min() - 1e-14
        assert stepped.max() <= ce.max() + 1e-14
