"""Period-T lifting of a closed loop, including the periodic-reset variant."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ss_core import ClosedLoop, Controller, DimensionError, PerformanceIndex, Plant, interconnect

__all__ = ["LiftedSystem", "matrix_powers", "lift", "lift_reset", "lift_performance", "reset_matrix"]


@dataclass(frozen=True, eq=False)
class LiftedSystem:
    """Single-step description over one period of ``T`` base steps.

    Attribute names mirror :class:`ClosedLoop` so the analysis routines
    accept either. Stacked signals are time-ascending within a period.
    """

    T: int
    A: np.ndarray
    Bp: np.ndarray
    Cp: np.ndarray
    Dpp: np.ndarray
    Bu: Optional[np.ndarray] = None
    Cu: Optional[np.ndarray] = None
    Dpu: Optional[np.ndarray] = None

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def m_w(self) -> int:
        return self.Bp.shape[1]

    @property
    def p_z(self) -> int:
        return self.Cp.shape[0]

    @property
    def has_uncertainty(self) -> bool:
        return self.Bu is not None

    def as_closed_loop(self) -> ClosedLoop:
        return ClosedLoop(self.A, self.Bp, self.Cp, self.Dpp, self.Bu, self.Cu, self.Dpu)


def matrix_powers(A: np.ndarray, k: int) -> list:
    """``[I, A, A^2, ..., A^k]`` by repeated multiplication."""
    out = [np.eye(A.shape[0])]
    for _ in range(k):
        out.append(A @ out[-1])
    return out


def _check_period(T) -> int:
    if int(T) != T or T < 1:
        raise ValueError(f"period T must be an integer >= 1, got {T!r}")
    return int(T)


def _toeplitz(cl: ClosedLoop, powers: list, T: int) -> np.ndarray:
    pz, mw = cl.p_z, cl.m_w
    D = np.zeros((T * pz, T * mw))
    markov = [cl.Cp @ powers[k] @ cl.Bp for k in range(T - 1)]
    for i in range(T):
        D[i * pz:(i + 1) * pz, i * mw:(i + 1) * mw] = cl.Dpp
        for j in range(i):
            D[i * pz:(i + 1) * pz, j * mw:(j + 1) * mw] = markov[i - j - 1]
    return D


def lift(cl: ClosedLoop, T: int) -> LiftedSystem:
    """Lift ``cl`` over ``T`` steps.

    If ``cl`` carries an uncertainty channel, the uncertainty enters once per
    period, at the first step: ``Bu_tilde = A^(T-1) Bu`` and
    ``Dpu_tilde = [Dpu; Cp Bu; Cp A Bu; ...; Cp A^(T-2) Bu]``.
    """
    T = _check_period(T)
    P = matrix_powers(cl.A, T)
    Bp = np.hstack([P[T - 1 - j] @ cl.Bp for j in range(T)])
    Cp = np.vstack([cl.Cp @ P[i] for i in range(T)])
    Dpp = _toeplitz(cl, P, T)
    Bu = Cu = Dpu = None
    if cl.has_uncertainty:
        Bu = P[T - 1] @ cl.Bu
        Cu = cl.Cu
        Dpu = np.vstack([cl.Dpu] + [cl.Cp @ P[i - 1] @ cl.Bu for i in range(1, T)])
    return LiftedSystem(T, P[T], Bp, Cp, Dpp, Bu, Cu, Dpu)


def reset_matrix(plant: Plant, controller: Controller) -> np.ndarray:
    """Closed-loop state matrix of the step at which the controller state is reset."""
    cl = interconnect(plant, controller)
    Ar = np.array(cl.A)
    n = plant.n
    Ar[n:, n:] = 0.0
    return Ar


def lift_reset(cl: ClosedLoop, plant: Plant, controller: Controller, T: int,
               exact_outputs: bool = False) -> LiftedSystem:
    """Lifted loop with the controller state reset at the start of every period.

    By default only the state transition changes, ``A_tilde = A^(T-1) Ar``,
    while ``Bp_tilde``, ``Cp_tilde`` and ``Dpp_tilde`` are those of
    :func:`lift`. With ``exact_outputs=True`` the output rows also see the
    reset, ``Cp_tilde[i] = Cp A^(i-1) Ar`` for ``i >= 1``, which reproduces
    simulated performance outputs exactly.
    """
    T = _check_period(T)
    Ar = reset_matrix(plant, controller)
    if cl.A.shape != Ar.shape or not np.array_equal(cl.A[:, :plant.n], Ar[:, :plant.n]):
        raise DimensionError("closed loop was not built from this plant and controller")
    base = lift(ClosedLoop(cl.A, cl.Bp, cl.Cp, cl.Dpp), T)
    P = matrix_powers(cl.A, T - 1)
    Cp = base.Cp
    if exact_outputs:
        Cp = np.vstack([cl.Cp] + [cl.Cp @ P[i - 1] @ Ar for i in range(1, T)])
    return LiftedSystem(T, P[T - 1] @ Ar, base.Bp, Cp, base.Dpp)


def lift_performance(index: PerformanceIndex, T: int) -> PerformanceIndex:
    """Block-diagonal repetition of ``index`` matching the stacked signal order."""
    T = _check_period(T)
    I = np.eye(T)
    return PerformanceIndex(np.kron(I, index.Qp), np.kron(I, index.Sp), np.kron(I, index.Rp))
