import numpy as np
import pytest

from encperf.fir import fir_truncate, impulse_response
from encperf.simulator import SimScenario, simulate
from encperf.ss_core import Controller
from oracles import impulse_by_simulation, random_stable


def _random_controller(rng):
    nc, py, mu = rng.integers(1, 5), rng.integers(1, 3), rng.integers(1, 3)
    return Controller(random_stable(rng, nc, 0.95), rng.standard_normal((nc, py)),
                      rng.standard_normal((mu, nc)), rng.standard_normal((mu, py)))


def _check_truncation(c, T, extra=15):
    f = fir_truncate(c, T).realization
    ref = impulse_by_simulation(np.array(c.Ac), np.array(c.Bc), np.array(c.Cc), np.array(c.Dc), T)
    got = impulse_by_simulation(np.array(f.Ac), np.array(f.Bc), np.array(f.Cc), np.array(f.Dc), T + extra)
    assert np.allclose(got[:T + 1], ref, rtol=0, atol=1e-12)
    assert np.abs(got[T + 1:]).max() <= 1e-12


@pytest.mark.parametrize("T", [1, 5, 10])
def test_benchmark_controller_truncation(controller, T):
    _check_truncation(controller, T)


@pytest.mark.parametrize("T", [1, 5, 10])
def test_random_controller_truncation(T):
    rng = np.random.default_rng(100 + T)
    for _ in range(10):
        _check_truncation(_random_controller(rng), T)


def test_impulse_response_markov_parameters(controller):
    h = impulse_response(controller, 6)
    ref = impulse_by_simulation(np.array(controller.Ac), np.array(controller.Bc),
                                np.array(controller.Cc), np.array(controller.Dc), 6)
    assert np.allclose(np.array(h), ref, atol=1e-14)


def test_realization_shape(controller):
    f = fir_truncate(controller, 3)
    assert f.horizon == 3
    assert f.realization.nc == 3 * 2 + 4
    assert f.realization.m_u == controller.m_u and f.realization.p_y == controller.p_y


def test_long_horizon_matches_nominal_trajectories(plant, controller):
    sc = dict(steps=600, seed=4, store=True)
    nom = simulate(plant, controller, SimScenario(**sc))
    fir = simulate(plant, controller, SimScenario(variant="fir", horizon=200, **sc))
    assert np.allclose(fir.trajectories["u"], nom.trajectories["u"], atol=1e-6)
    assert np.allclose(fir.trajectories["z"], nom.trajectories["z"], atol=1e-6)


@pytest.mark.parametrize("T", [0, -1, 1.5])
def test_bad_horizon(controller, T):
    with pytest.raises(ValueError):
        fir_truncate(controller, T)


def test_static_controller_rejected():
    with pytest.raises(ValueError):
        fir_truncate(Controller.static([[1.0]]), 3)
