import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from cell_config import CellConfig
from cell_state import CellState
from mesh import ELECTRODES, Mesh, Region, build_particle_grid
from solid_diffusion import (
    ParticleSolveError,
    boundary_trace,
    particle_mass,
    particle_operator,
    step_all_particles,
    step_particle,
)

GRID = build_particle_grid(0.1, 25)


def test_uniform_column_without_flux_is_steady():
    column = np.full(GRID.size, 0.45)
    assert_allclose(step_particle(column, 0.0, 0.01, 1.0, GRID), column, rtol=1e-14)


@pytest.mark.parametrize("g", [1.0, -0.5])
def test_mass_balance(g: float):
    rng = np.random.default_rng(1)
    column = rng.uniform(0.2, 0.7, GRID.size)
    dt = 0.01
    stepped = step_particle(column, g, 0.01, dt, GRID)
    change = particle_mass(GRID, stepped) - particle_mass(GRID, column)
    expected = -dt * GRID.radius**2 * g
    assert change == pytest.approx(expected, rel=1e-12)


def test_outflow_depletes_the_surface():
    column = np.full(GRID.size, 0.45)
    stepped = step_particle(column, 1.0, 0.01, 0.01, GRID)
    assert stepped[-1] < stepped[0] < 0.45 + 1e-15
    assert np.all(np.diff(stepped) < 0)


@pytest.mark.parametrize("dt", [1e-3, 0.1, 10.0])
def test_maximum_principle_without_flux(dt: float):
    rng = np.random.default_rng(9)
    column = rng.uniform(0.2, 0.7, GRID.size)
    stepped = step_particle(column, 0.0, 0.01, dt, GRID)
    assert stepped.min() >= column.min() - 1e-14
    assert stepped.max() <= column.max() + 1e-14


def test_operator_is_nonnegative():
    diagonal, off = particle_operator(GRID, 0.01)
    matrix = np.diag(diagonal) + np.diag(off, 1) + np.diag(off, -1)
    eigenvalues = np.linalg.eigvalsh(matrix)
    # the constant profile is the zero mode
    assert abs(eigenvalues[0]) < 1e-10 * eigenvalues[-1]
    assert np.all(eigenvalues[1:] > 0)


def test_boundary_trace(reference_mesh: Mesh, reference_state: CellState):
    assert_allclose(boundary_trace(reference_state.cs, reference_mesh)[:15], 0.45)
    cs = {}
    for region in ELECTRODES:
        grid = reference_mesh.particles[region]
        rows = reference_mesh.electrode_slice(region)
        cs[region] = np.tile(0.2 + grid.centers, (rows.stop - rows.start, 1))
    # linear profiles are extrapolated exactly
    assert_allclose(boundary_trace(cs, reference_mesh), 0.2 + 0.1, rtol=1e-12)


@pytest.mark.parametrize("threads", [2, 8])
def test_threads_do_not_change_results(
    threads: int, reference_config: CellConfig, reference_mesh: Mesh, reference_state: CellState
):
    rng = np.random.default_rng(2)
    j = rng.uniform(-1.0, 1.0, reference_mesh.n_electrode)
    serial = step_all_particles(reference_state.cs, j, reference_config.transport, reference_mesh, 0.1)
    parallel = step_all_particles(
        reference_state.cs, j, reference_config.transport, reference_mesh, 0.1, threads=threads
    )
    for region in ELECTRODES:
        assert_array_equal(serial[region], parallel[region])


def test_columns_follow_their_flux(reference_config: CellConfig, reference_mesh: Mesh, reference_state: CellState):
    j = np.zeros(reference_mesh.n_electrode)
    j[3] = 1.0
    stepped = step_all_particles(reference_state.cs, j, reference_config.transport, reference_mesh, 0.1)
    drift = np.max(np.abs(stepped[Region.ANODE] - reference_state.cs[Region.ANODE]), axis=1)
    changed = list(np.flatnonzero(drift > 1e-12))
    assert changed == [3]
    assert_allclose(stepped[Region.CATHODE], reference_state.cs[Region.CATHODE], rtol=1e-14)


def test_bad_column_names_its_node(reference_config: CellConfig, reference_mesh: Mesh, reference_state: CellState):
    cs = {region: values.copy() for region, values in reference_state.cs.items()}
    cs[Region.CATHODE][2, 4] = np.nan
    j = np.zeros(reference_mesh.n_electrode)
    with pytest.raises(ParticleSolveError) as err:
        step_all_particles(cs, j, reference_config.transport, reference_mesh, 0.1)
    assert err.value.node == 17
    assert "electrode node 17" in str(err.value)
