import numpy as np
import pytest
from numpy.testing import assert_allclose

from cell_config import CellConfig
from cell_state import CellState, InadmissibleStateError, admissibility_violation, initial_state
from mesh import Mesh, Region


def test_reference_initial_state(reference_mesh: Mesh, reference_state: CellState):
    assert reference_state.t == 0.0
    assert reference_state.cs[Region.ANODE].shape == (15, 25)
    assert_allclose(reference_state.csB[:15], 0.45)
    assert_allclose(reference_state.csB[15:], 0.27)
    assert abs(reference_mesh.integrate(reference_state.phie_li)) <= 1e-12
    # at rest the solid sits at the open-circuit potential
    assert reference_state.phis[15] - reference_state.phis[0] == pytest.approx(0.1218, abs=1e-3)


def test_uniform_half_full_state(reference_config: CellConfig, reference_mesh: Mesh):
    state = initial_state(reference_config, reference_mesh, ce0=0.5, cs0=0.45, T0=298.15)
    assert_allclose(state.ce, 0.5)
    assert_allclose(state.csB, 0.45)
    assert state.T == 298.15


def test_per_node_particle_data(reference_config: CellConfig, reference_mesh: Mesh):
    cs0 = {
        Region.ANODE: np.linspace(0.3, 0.6, 15),
        Region.CATHODE: np.full((15, 25), 0.2),
    }
    state = initial_state(reference_config, reference_mesh, cs0=cs0)
    assert_allclose(state.cs[Region.ANODE][:, 0], np.linspace(0.3, 0.6, 15))
    assert_allclose(state.csB[15:], 0.2)


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"ce0": -1.0}, "ce must be positive: -1.0 at cell 0"),
        ({"cs0": 0.9}, r"cs must lie in \(0, cs_max=0.9\): 0.9 in anode node 0 shell 0"),
        ({"cs0": 0.0}, r"cs must lie in \(0, cs_max=0.9\)"),
        ({"T0": 0.0}, "T must be positive: 0.0"),
        ({"ce0": np.ones(3)}, r"ce0 has \(3,\) values for 45 cells"),
        ({"cs0": np.ones((2, 2))}, "Particle field shape"),
    ],
)
def test_inadmissible_initial_data(reference_config, reference_mesh, kwargs, message):
    with pytest.raises(InadmissibleStateError, match=message):
        initial_state(reference_config, reference_mesh, **kwargs)


def test_violation_in_cathode(reference_mesh: Mesh, reference_state: CellState):
    cs = {region: values.copy() for region, values in reference_state.cs.items()}
    cs[Region.CATHODE][4, 7] = 1.0
    problem = admissibility_violation(
        reference_state.ce, cs, reference_state.csB, reference_state.T, 0.9, reference_mesh
    )
    assert problem == "cs must lie in (0, cs_max=0.9): 1.0 in cathode node 4 shell 7"
    assert (
        admissibility_violation(
            reference_state.ce, reference_state.cs, reference_state.csB, 300.0, 0.9, reference_mesh
        )
        is None
    )
