"""Window truncation of an IIR controller into an FIR controller."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ss_core import Controller

__all__ = ["FirController", "fir_truncate", "impulse_response"]


@dataclass(frozen=True)
class FirController:
    horizon: int
    realization: Controller


def fir_truncate(controller: Controller, T: int) -> FirController:
    """Truncate the impulse response of ``controller`` after lag ``T``.

    The realization keeps the past ``T`` measurements in a shift register
    ahead of the original state, ``xyc = (y(t-T), ..., y(t-1), xc(t))``, and
    subtracts ``Ac^T Bc y(t-T)`` from the state update. It is not minimal.
    """
    if int(T) != T or T < 1:
        raise ValueError(f"horizon T must be an integer >= 1, got {T!r}")
    T = int(T)
    c = controller
    if c.nc < 1:
        raise ValueError("controller has no dynamic state to truncate")
    py, nc = c.p_y, c.nc
    ny = T * py
    A = np.zeros((ny + nc, ny + nc))
    A[:ny, :ny] = np.eye(ny, k=py)
    A[ny:, :py] = -np.linalg.matrix_power(c.Ac, T) @ c.Bc
    A[ny:, ny:] = c.Ac
    B = np.zeros((ny + nc, py))
    B[ny - py:ny] = np.eye(py)
    B[ny:] = c.Bc
    B2 = np.vstack([np.zeros((ny, c.m_w)), c.B2])
    C = np.hstack([np.zeros((c.m_u, ny)), c.Cc])
    return FirController(T, Controller(A, B, C, c.Dc, B2, c.F2))


def impulse_response(controller: Controller, lags: int) -> list:
    """Markov parameters ``h(0) = Dc``, ``h(k) = Cc Ac^(k-1) Bc`` for ``k = 0..lags``."""
    if lags < 0:
        raise ValueError("lags must be non-negative")
    c = controller
    h = [np.array(c.Dc)]
    x = np.array(c.Bc)
    for _ in range(lags):
        h.append(c.Cc @ x)
        x = c.Ac @ x
    return h
