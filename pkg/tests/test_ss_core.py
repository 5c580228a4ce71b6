import numpy as np
import pytest

from encperf.ss_core import (
    ClosedLoop, Controller, DimensionError, PerformanceIndex, Plant,
    attach_bootstrap_channel, interconnect, l2_gain_index,
)
from encperf.simulator import SimScenario, simulate, simulate_closed_loop


def test_missing_performance_blocks_are_empty():
    p = Plant(np.eye(2), np.ones((2, 1)), np.ones((1, 2)))
    assert p.m_w == 0 and p.p_z == 0
    assert p.B1.shape == (2, 0) and p.C1.shape == (0, 2) and p.E.shape == (0, 1)


def test_plant_dimension_errors_name_the_field():
    with pytest.raises(DimensionError, match="B"):
        Plant(np.eye(2), np.ones((3, 1)), np.ones((1, 2)))
    with pytest.raises(DimensionError, match="C1"):
        Plant(np.eye(2), np.ones((2, 1)), np.ones((1, 2)), B1=np.eye(2), C1=np.ones((1, 3)))


def test_nan_rejected():
    with pytest.raises(ValueError):
        Plant([[np.nan]], [[1.0]], [[1.0]])


def test_matrices_are_read_only(plant):
    with pytest.raises(ValueError):
        plant.A[0, 0] = 1.0


def test_static_controller():
    c = Controller.static([[2.0]])
    assert c.nc == 0 and c.Ac.shape == (0, 0) and c.Bc.shape == (0, 1)


def test_interconnect_mismatch_message():
    p = Plant(np.eye(2), np.ones((2, 1)), np.ones((1, 2)))
    c = Controller.static(np.ones((2, 1)))
    with pytest.raises(DimensionError, match="inputs"):
        interconnect(p, c)


def test_block_entries(plant, controller):
    cl = interconnect(plant, controller)
    A, B, C, Dc = plant.A, plant.B, plant.C, controller.Dc
    spot = A[1, 1] + sum(B[1, i] * Dc[i, j] * C[j, 1] for i in range(2) for j in range(2))
    assert cl.A[1, 1] == pytest.approx(spot, rel=1e-14)
    assert np.allclose(cl.A[:4, 4:], B @ controller.Cc)
    assert np.allclose(cl.A[4:, :4], controller.Bc @ C)
    assert np.array_equal(cl.A[4:, 4:], controller.Ac)
    assert cl.m_w == 4 and cl.p_z == 2 and cl.N == 8


def test_benchmark_loop_is_stable(plant, controller):
    cl = interconnect(plant, controller)
    assert max(abs(np.linalg.eigvals(cl.A))) < 1


def test_interconnect_matches_separate_simulation(plant, controller):
    w = np.random.default_rng(3).uniform(-1, 1, (100, 4))
    sep = simulate(plant, controller, SimScenario(steps=100, store=True), w=w)
    xi, z = simulate_closed_loop(interconnect(plant, controller), w)
    assert np.allclose(sep.trajectories["z"], z, rtol=1e-10, atol=1e-12)
    assert np.allclose(sep.trajectories["xi"], xi, rtol=1e-10, atol=1e-12)


def test_interconnect_with_performance_input_on_controller(rng):
    p = Plant(0.5 * np.eye(2), rng.standard_normal((2, 1)), rng.standard_normal((1, 2)),
              B1=np.eye(2), F1=np.zeros((1, 2)), C1=np.eye(2), E=np.ones((2, 1)),
              D1=np.zeros((2, 2)))
    c = Controller([[0.2]], [[1.0]], [[0.3]], [[0.1]], B2=[[1.0]], F2=[[0.5]])
    cl = interconnect(p, c)
    assert cl.m_w == 3
    w = rng.uniform(-1, 1, (50, 3))
    sep = simulate(p, c, SimScenario(steps=50, store=True), w=w)
    _, z = simulate_closed_loop(cl, w)
    assert np.allclose(sep.trajectories["z"], z, atol=1e-12)


def test_bootstrap_channel(plant, controller):
    cl = attach_bootstrap_channel(interconnect(plant, controller), controller)
    assert np.all(cl.Bu[:4] == 0) and np.array_equal(cl.Bu[4:], controller.Ac)
    assert np.array_equal(cl.Cu, np.hstack([np.zeros((4, 4)), np.eye(4)]))
    assert cl.has_uncertainty


def test_bootstrap_channel_needs_dynamic_controller():
    p = Plant(np.eye(1), [[1.0]], [[1.0]])
    c = Controller.static([[0.1]])
    with pytest.raises(ValueError):
        attach_bootstrap_channel(interconnect(p, c), c)


def test_performance_index_checks():
    idx = l2_gain_index(2.0, 3, 2)
    assert np.array_equal(idx.Qp, -4.0 * np.eye(3))
    assert idx.matrix.shape == (5, 5)
    with pytest.raises(ValueError):
        PerformanceIndex([[1.0, 2.0], [0.0, 1.0]], np.zeros((2, 1)), [[1.0]])
    with pytest.raises(ValueError):
        PerformanceIndex(-np.eye(1), np.zeros((1, 1)), [[-1.0]])


def test_closed_loop_equality():
    a = ClosedLoop([[0.5]], [[1.0]], [[1.0]], [[0.0]])
    b = ClosedLoop([[0.5]], [[1.0]], [[1.0]], [[0.0]])
    assert a == b
    assert a != ClosedLoop([[0.4]], [[1.0]], [[1.0]], [[0.0]])
