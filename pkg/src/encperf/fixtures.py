"""Batch-reactor benchmark: plant, H-infinity controller and shipped data files.

The plant is the continuous-time batch reactor model sampled with a
zero-order hold at ``h = 0.1``; its input matrix is sign-flipped so that it
matches the controller's input convention. Rounded to two decimals it
reproduces the commonly printed discrete matrices exactly; those rounded
values ship as ``batch_reactor_plant_printed`` for comparison.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.signal import cont2discrete

from .bootstrap_model import build_modulo_approx
from .io import load_system, save_system
from .ss_core import Controller, Plant

__all__ = [
    "DATA",
    "SAMPLING_PERIOD",
    "REACTOR_A",
    "REACTOR_B",
    "PRINTED_A",
    "PRINTED_B",
    "batch_reactor_plant",
    "hinf_controller",
    "load_fixture",
    "write_fixtures",
]

DATA = Path(__file__).parent / "data"
SAMPLING_PERIOD = 0.1

REACTOR_A = np.array([
    [1.38, -0.2077, 6.715, -5.676],
    [-0.5814, -4.29, 0.0, 0.675],
    [1.067, 4.273, -6.654, 5.893],
    [0.048, 4.273, 1.343, -2.104],
])
REACTOR_B = np.array([
    [0.0, 0.0],
    [5.679, 0.0],
    [1.136, -3.146],
    [1.136, 0.0],
])
REACTOR_C = np.array([[1.0, 0.0, 1.0, -1.0], [0.0, 1.0, 0.0, 0.0]])

PRINTED_A = np.array([
    [1.18, 0.0, 0.51, -0.4],
    [-0.05, 0.66, -0.01, 0.06],
    [0.08, 0.34, 0.56, 0.38],
    [0.0, 0.34, 0.09, 0.85],
])
PRINTED_B = np.array([[0.0, 0.088], [-0.47, -0.001], [-0.21, 0.24], [-0.21, 0.016]])

HINF_AC = np.array([
    [0.33, -0.034, -0.26, 0.33],
    [0.0, 0.0, 0.0, 0.0],
    [-0.37, -0.17, 0.31, 0.52],
    [-0.035, -0.2, 0.051, 0.86],
])
HINF_BC = np.array([[0.49, 0.03], [0.0, 0.0], [-0.5, 0.21], [-0.011, 0.24]])
HINF_CC = np.array([[-0.045, -0.022, 0.039, 0.07], [-0.5, 0.11, 0.39, -0.75]])
HINF_DC = np.array([[-0.054, 1.4], [-3.6, -0.09]])


def _with_performance_channel(A: np.ndarray, B: np.ndarray) -> Plant:
    n, (py, mu) = A.shape[0], (REACTOR_C.shape[0], B.shape[1])
    return Plant(A, B, REACTOR_C, B1=np.eye(n), F1=np.zeros((py, n)), C1=REACTOR_C,
                 E=np.zeros((py, mu)), D1=np.zeros((py, n)))


def batch_reactor_plant(printed: bool = False) -> Plant:
    """Discrete batch reactor with ``B1 = I``, ``C1 = C``, ``F1 = E = D1 = 0``."""
    if printed:
        return _with_performance_channel(PRINTED_A, PRINTED_B)
    Ad, Bd, *_ = cont2discrete(
        (REACTOR_A, REACTOR_B, REACTOR_C, np.zeros((2, 2))), SAMPLING_PERIOD, method="zoh")
    return _with_performance_channel(Ad, -Bd)


def hinf_controller() -> Controller:
    """H-infinity controller for the batch reactor; no performance input."""
    return Controller(HINF_AC, HINF_BC, HINF_CC, HINF_DC)


def load_fixture(name: str):
    return load_system(DATA / f"{name}.json")


def write_fixtures(directory=DATA) -> list:
    """(Re)generate every shipped data file; returns the written paths."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    items = [
        ("batch_reactor_plant", batch_reactor_plant(),
         "Batch reactor, zero-order hold at h=0.1, input sign flipped; B1=I, C1=C."),
        ("batch_reactor_plant_printed", batch_reactor_plant(printed=True),
         "Batch reactor discrete matrices rounded to two decimals; B1=I, C1=C."),
        ("hinf_controller", hinf_controller(),
         "H-infinity output-feedback controller for the batch reactor; no B2/F2."),
    ]
    for name, system, desc in items:
        path = d / f"{name}.json"
        save_system(system, path, name=name, description=desc)
        written.append(path)
    path = d / "modulo_default.json"
    build_modulo_approx(degree=111).save(path)
    written.append(path)
    return written
