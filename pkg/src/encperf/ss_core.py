"""Discrete-time state-space containers and the plant/controller interconnection.

All matrices are dense float64 arrays, validated once on construction and
treated as read-only afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

__all__ = [
    "DimensionError",
    "Plant",
    "Controller",
    "ClosedLoop",
    "PerformanceIndex",
    "as_matrix",
    "psd_tolerance",
    "l2_gain_index",
    "interconnect",
    "attach_bootstrap_channel",
]


class DimensionError(ValueError):
    """Raised when matrix shapes of a system do not fit together."""


def psd_tolerance(M: np.ndarray) -> float:
    return 1e-9 * (1.0 + np.linalg.norm(M, "fro"))


def as_matrix(value, name: str, shape: Optional[tuple] = None) -> np.ndarray:
    """Convert ``value`` to a finite, read-only 2-D float array.

    Scalars become 1x1 matrices. If ``shape`` is given and the input is an
    empty sequence, a zero-sized matrix of that shape is returned.
    """
    M = np.array(value, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    elif M.size == 0 and shape is not None:
        M = np.zeros(shape)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D matrix, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    M.setflags(write=False)
    return M


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise DimensionError(msg)


class _Frozen:
    """Shared conversion of matrix fields in frozen dataclasses."""

    def _freeze(self, defaults: dict) -> None:
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name in defaults and (val is None or np.size(val) == 0):
                val = np.zeros(defaults[f.name])
            object.__setattr__(self, f.name, as_matrix(val, f.name))

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f.name), getattr(other, f.name))
            for f in fields(self)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Plant(_Frozen):
    """Plant ``x+ = A x + B u + B1 w1``, ``y = C x + F1 w1``,
    ``z = C1 x + E u + D1 w1``.

    Omitted performance blocks default to zero-sized matrices: no
    performance input when ``B1`` and ``F1`` are missing, no performance
    output when ``C1`` is missing.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    B1: np.ndarray = None
    F1: np.ndarray = None
    C1: np.ndarray = None
    E: np.ndarray = None
    D1: np.ndarray = None

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        n = A.shape[0]
        object.__setattr__(self, "B", as_matrix(self.B, "B", (n, 0)))
        object.__setattr__(self, "C", as_matrix(self.C, "C", (0, n)))
        mu, py = self.B.shape[1], self.C.shape[0]
        mw = 0
        if self.B1 is not None and np.size(self.B1):
            mw = np.atleast_2d(self.B1).shape[1]
        elif self.F1 is not None and np.size(self.F1):
            mw = np.atleast_2d(self.F1).shape[1]
        pz = 0
        if self.C1 is not None and np.size(self.C1):
            pz = np.atleast_2d(self.C1).shape[0]
        self._freeze({
            "B1": (n, mw), "F1": (py, mw), "C1": (pz, n),
            "E": (pz, mu), "D1": (pz, mw),
        })
        _check(self.A.shape == (n, n), f"A must be square, got {self.A.shape}")
        _check(self.B.shape[0] == n, f"A {self.A.shape} and B {self.B.shape} disagree on n")
        _check(self.C.shape[1] == n, f"A {self.A.shape} and C {self.C.shape} disagree on n")
        _check(self.B1.shape[0] == n, f"A {self.A.shape} and B1 {self.B1.shape} disagree on n")
        _check(self.C1.shape[1] == n, f"A {self.A.shape} and C1 {self.C1.shape} disagree on n")
        _check(self.F1.shape == (py, mw), f"F1 {self.F1.shape} must be ({py}, {mw}) to match C and B1")
        _check(self.E.shape == (self.C1.shape[0], mu),
               f"E {self.E.shape} must be ({self.C1.shape[0]}, {mu}) to match C1 and B")
        _check(self.D1.shape == (self.C1.shape[0], mw),
               f"D1 {self.D1.shape} must be ({self.C1.shape[0]}, {mw}) to match C1 and B1")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m_u(self) -> int:
        return self.B.shape[1]

    @property
    def p_y(self) -> int:
        return self.C.shape[0]

    @property
    def m_w(self) -> int:
        return self.B1.shape[1]

    @property
    def p_z(self) -> int:
        return self.C1.shape[0]


@dataclass(frozen=True, eq=False)
class Controller(_Frozen):
    """Controller ``xc+ = Ac xc + Bc y + B2 w2``, ``u = Cc xc + Dc y + F2 w2``.

    ``nc = 0`` (a static gain) is allowed; pass empty ``Ac/Bc/Cc`` or use
    :meth:`static`.
    """

    Ac: np.ndarray
    Bc: np.ndarray
    Cc: np.ndarray
    Dc: np.ndarray
    B2: np.ndarray = None
    F2: np.ndarray = None

    def __post_init__(self):
        Dc = as_matrix(self.Dc, "Dc")
        mu, py = Dc.shape
        Ac = as_matrix(self.Ac, "Ac", (0, 0))
        nc = Ac.shape[0]
        object.__setattr__(self, "Bc", as_matrix(self.Bc, "Bc", (nc, py)))
        object.__setattr__(self, "Cc", as_matrix(self.Cc, "Cc", (mu, nc)))
        mw = 0
        if self.B2 is not None and np.size(self.B2):
            mw = np.atleast_2d(self.B2).shape[1]
        elif self.F2 is not None and np.size(self.F2):
            mw = np.atleast_2d(self.F2).shape[1]
        self._freeze({"B2": (nc, mw), "F2": (mu, mw), "Ac": (0, 0)})
        _check(self.Ac.shape == (nc, nc), f"Ac must be square, got {self.Ac.shape}")
        _check(self.Bc.shape == (nc, py), f"Bc {self.Bc.shape} must be ({nc}, {py}) to match Ac and Dc")
        _check(self.Cc.shape == (mu, nc), f"Cc {self.Cc.shape} must be ({mu}, {nc}) to match Dc and Ac")
        _check(self.B2.shape[0] == nc, f"B2 {self.B2.shape} must have {nc} rows to match Ac")
        _check(self.F2.shape == (mu, self.B2.shape[1]),
               f"F2 {self.F2.shape} must be ({mu}, {self.B2.shape[1]}) to match Dc and B2")

    @classmethod
    def static(cls, Dc) -> "Controller":
        Dc = np.atleast_2d(np.asarray(Dc, dtype=float))
        mu, py = Dc.shape
        return cls(np.zeros((0, 0)), np.zeros((0, py)), np.zeros((mu, 0)), Dc)

    @property
    def nc(self) -> int:
        return self.Ac.shape[0]

    @property
    def m_u(self) -> int:
        return self.Dc.shape[0]

    @property
    def p_y(self) -> int:
        return self.Dc.shape[1]

    @property
    def m_w(self) -> int:
        return self.B2.shape[1]


@dataclass(frozen=True, eq=False)
class ClosedLoop(_Frozen):
    """Closed loop ``xi+ = A xi + Bp wp (+ Bu wu)``, ``zp = Cp xi + Dpp wp (+ Dpu wu)``
    with optional uncertainty output ``zu = Cu xi``."""

    A: np.ndarray
    Bp: np.ndarray
    Cp: np.ndarray
    Dpp: np.ndarray
    Bu: Optional[np.ndarray] = None
    Cu: Optional[np.ndarray] = None
    Dpu: Optional[np.ndarray] = None
    n_plant: int = field(default=0, compare=False)

    def __post_init__(self):
        for name in ("A", "Bp", "Cp", "Dpp"):
            object.__setattr__(self, name, as_matrix(getattr(self, name), name))
        N = self.A.shape[0]
        _check(self.A.shape == (N, N), f"A must be square, got {self.A.shape}")
        _check(self.Bp.shape[0] == N and self.Cp.shape[1] == N,
               f"Bp {self.Bp.shape} / Cp {self.Cp.shape} do not match A {self.A.shape}")
        _check(self.Dpp.shape == (self.Cp.shape[0], self.Bp.shape[1]),
               f"Dpp {self.Dpp.shape} does not match Cp {self.Cp.shape} and Bp {self.Bp.shape}")
        if self.Bu is not None:
            for name in ("Bu", "Cu", "Dpu"):
                object.__setattr__(self, name, as_matrix(getattr(self, name), name))
            nu = self.Bu.shape[1]
            _check(self.Bu.shape[0] == N, f"Bu {self.Bu.shape} must have {N} rows")
            _check(self.Cu.shape == (nu, N), f"Cu {self.Cu.shape} must be ({nu}, {N})")
            _check(self.Dpu.shape == (self.Cp.shape[0], nu),
                   f"Dpu {self.Dpu.shape} must be ({self.Cp.shape[0]}, {nu})")

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        for name in ("A", "Bp", "Cp", "Dpp", "Bu", "Cu", "Dpu"):
            a, b = getattr(self, name), getattr(other, name)
            if (a is None) != (b is None) or (a is not None and not np.array_equal(a, b)):
                return False
        return True

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


@dataclass(frozen=True, eq=False)
class PerformanceIndex(_Frozen):
    """Quadratic performance index ``[[Qp, Sp], [Sp^T, Rp]]`` with ``Rp >= 0``."""

    Qp: np.ndarray
    Sp: np.ndarray
    Rp: np.ndarray

    def __post_init__(self):
        self._freeze({})
        mw, pz = self.Qp.shape[0], self.Rp.shape[0]
        _check(self.Qp.shape == (mw, mw), f"Qp must be square, got {self.Qp.shape}")
        _check(self.Rp.shape == (pz, pz), f"Rp must be square, got {self.Rp.shape}")
        _check(self.Sp.shape == (mw, pz), f"Sp {self.Sp.shape} must be ({mw}, {pz})")
        for name in ("Qp", "Rp"):
            M = getattr(self, name)
            if np.abs(M - M.T).max(initial=0.0) > psd_tolerance(M):
                raise ValueError(f"{name} is not symmetric")
        if self.Rp.size and np.linalg.eigvalsh(self.Rp).min() < -psd_tolerance(self.Rp):
            raise ValueError("Rp must be positive semidefinite")

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.Qp, self.Sp], [self.Sp.T, self.Rp]])

    @property
    def m_w(self) -> int:
        return self.Qp.shape[0]

    @property
    def p_z(self) -> int:
        return self.Rp.shape[0]


def l2_gain_index(gamma: float, m_w: int, p_z: int) -> PerformanceIndex:
    """Index certifying an l2-gain of at most ``gamma``."""
    return PerformanceIndex(-gamma**2 * np.eye(m_w), np.zeros((m_w, p_z)), np.eye(p_z))


def interconnect(plant: Plant, controller: Controller) -> ClosedLoop:
    """Feedback interconnection with state ``xi = (x, xc)`` and ``wp = (w1, w2)``."""
    if plant.p_y != controller.p_y:
        raise DimensionError(
            f"plant C has {plant.p_y} outputs but controller Bc/Dc take {controller.p_y} inputs")
    if plant.m_u != controller.m_u:
        raise DimensionError(
            f"plant B takes {plant.m_u} inputs but controller Cc/Dc produce {controller.m_u}")
    P, K = plant, controller
    A = np.block([
        [P.A + P.B @ K.Dc @ P.C, P.B @ K.Cc],
        [K.Bc @ P.C, K.Ac],
    ])
    Bp = np.block([
        [P.B1 + P.B @ K.Dc @ P.F1, P.B @ K.F2],
        [K.Bc @ P.F1, K.B2],
    ])
    Cp = np.hstack([P.C1 + P.E @ K.Dc @ P.C, P.E @ K.Cc])
    Dpp = np.hstack([P.D1 + P.E @ K.Dc @ P.F1, P.E @ K.F2])
    return ClosedLoop(A, Bp, Cp, Dpp, n_plant=P.n)


def attach_bootstrap_channel(cl: ClosedLoop, controller: Controller) -> ClosedLoop:
    """Add the channel ``zu = xc``, ``wu`` entering as ``Ac wu`` in the controller update."""
    nc = controller.nc
    if nc == 0:
        raise ValueError("controller has no dynamic state; nothing to perturb")
    n = cl.N - nc
    if n < 0 or not np.array_equal(cl.A[n:, n:], controller.Ac):
        raise DimensionError("closed loop was not built from this controller")
    Bu = np.vstack([np.zeros((n, nc)), controller.Ac])
    Cu = np.hstack([np.zeros((nc, n)), np.eye(nc)])
    Dpu = np.zeros((cl.p_z, nc))
    return ClosedLoop(cl.A, cl.Bp, cl.Cp, cl.Dpp, Bu, Cu, Dpu, n_plant=n)
