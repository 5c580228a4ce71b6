"""Integer state matrices for dynamic controllers via artificial plant feedback.

Controller type: the controller also sends ``v = K xc``; the plant returns
``y + v``, and the state matrix becomes ``Ac - Bc K``.

Observer type: the plant returns ``v = L u``; the state matrix becomes
``Ac - L Cc``.

In both cases the gain places the spectrum on the roots of a monic integer
polynomial, after which a similarity transform yields its companion matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .ss_core import ClosedLoop, Controller, DimensionError, Plant, interconnect

__all__ = [
    "ReformulationError",
    "IntegerReformulation",
    "companion",
    "char_poly",
    "controllability_matrix",
    "reform_controller_type",
    "reform_observer_type",
    "equivalent_loop",
    "reformed_controller",
]

RANK_RTOL = 1e-10
INTEGER_TOL = 1e-9


class ReformulationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class IntegerReformulation:
    """Reformulated controller in companion coordinates ``xc = T_sim @ xh``.

    Controller type::

        xh+ = A_Z xh + Bc_t (y + v) + B2_t w2
        u   = Cc_t xh + Dc (y + v) + F2 w2,      v = K_t xh   (sent to plant)

    Observer type::

        xh+ = A_Z xh + Bc_t y + v + B2_t w2,    v = L_t u    (computed by plant)
        u   = Cc_t xh + Dc y + F2 w2
    """

    kind: str
    A_Z: np.ndarray
    gain: np.ndarray
    T_sim: np.ndarray
    Bc_t: np.ndarray
    Cc_t: np.ndarray
    Dc: np.ndarray
    B2_t: np.ndarray
    F2: np.ndarray
    feedback: np.ndarray
    target: tuple

    @property
    def artificial_signal(self) -> str:
        if self.kind == "controller_type":
            return "controller sends v = K_t xh; plant returns y + v"
        return "plant computes v = L_t u and returns it alongside y"


def char_poly(A: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first."""
    if A.shape[0] == 0:
        return np.ones(1)
    return np.real(np.poly(A))


def companion(coeffs: Sequence[int]) -> np.ndarray:
    """Integer companion matrix with ones on the superdiagonal and the negated
    coefficients ``-(a0, a1, ..., a_{n-1})`` in the last row."""
    c = np.asarray(coeffs, dtype=np.int64)
    n = len(c) - 1
    M = np.eye(n, k=1, dtype=np.int64)
    M[-1, :] = -c[::-1][:n]
    return M


def controllability_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def _validate_target(target, n: int) -> tuple:
    if target is None:
        target = (1,) + (0,) * n
    t = tuple(int(c) for c in target)
    if any(c != tc for c, tc in zip(t, target)):
        raise ValueError("target polynomial coefficients must be integers")
    if len(t) != n + 1 or t[0] != 1:
        raise ValueError(f"target must be a monic integer polynomial of degree {n}")
    return t


def _ackermann(A: np.ndarray, b: np.ndarray, poly: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    Co = controllability_matrix(A, b)
    pA = np.zeros_like(A)
    for c in poly:
        pA = pA @ A + c * np.eye(n)
    e = np.zeros(n)
    e[-1] = 1.0
    return np.linalg.solve(Co.T, e) @ pA


def _input_directions(m: int) -> list:
    dirs = [np.eye(m)[j] for j in range(m)]
    if m > 1:
        dirs.append(np.ones(m) / np.sqrt(m))
        rng = np.random.default_rng(0)
        dirs.extend(rng.standard_normal((8, m)))
    return dirs


def _cyclic_transform(M: np.ndarray, extra_rows: Optional[np.ndarray] = None):
    """Search a row vector ``w`` whose Krylov rows ``[w; wM; ...]`` are
    nonsingular. Returns that matrix ``O`` (so ``O M O^-1`` is companion) or
    ``None`` when ``M`` is derogatory to working precision."""
    n = M.shape[0]
    cands = list(np.eye(n))
    if extra_rows is not None:
        cands.extend(r for r in np.atleast_2d(extra_rows) if np.any(r))
    cands.append(np.ones(n))
    best, best_cond = None, np.inf
    for w in cands:
        rows = [w]
        for _ in range(n - 1):
            rows.append(rows[-1] @ M)
        O = np.vstack(rows)
        cond = np.linalg.cond(O)
        if cond < best_cond:
            best, best_cond = O, cond
    if best is None or best_cond > 1e10:
        return None
    return best


def _place(A: np.ndarray, B: np.ndarray, target: tuple, what: str) -> tuple:
    """Gain ``K`` with ``char(A - B K) = target`` and a companion transform.

    Modes that ``B`` cannot reach are allowed only if they are roots of the
    target polynomial. Multi-input pairs are reduced to a single input
    ``B g`` before Ackermann's formula, which keeps the closed loop cyclic.
    """
    n, m = B.shape
    Co = controllability_matrix(A, B)
    U, s, _ = np.linalg.svd(Co)
    r = int(np.sum(s > RANK_RTOL * max(s[0], 1.0))) if s.size else 0
    Q = U  # Q[:, :r] spans the reachable subspace
    Ah = Q.T @ A @ Q
    Bh = Q.T @ B
    A11, A12, A22 = Ah[:r, :r], Ah[:r, r:], Ah[r:, r:]
    poly = np.asarray(target, dtype=float)
    if r < n:
        unreach = char_poly(A22)
        quot, rem = np.polydiv(poly, unreach)
        if np.abs(rem).max(initial=0.0) > 1e-8 * (1 + np.abs(poly).max()):
            eig = np.round(np.linalg.eigvals(A22), 6)
            raise ReformulationError(
                f"pair is not {what} (rank defect {n - r}); modes {eig.tolist()} "
                "are not roots of the target polynomial")
        poly_r = quot
    else:
        poly_r = poly
    if r == 0:
        K_r = np.zeros((m, 0))
        dirs = [np.eye(m)[0]] if m else []
    else:
        best = None
        for g in _input_directions(m):
            b = Bh[:r] @ g
            cond = np.linalg.cond(controllability_matrix(A11, b[:, None]))
            if best is None or cond < best[0]:
                best = (cond, g)
        if best[0] > 1e12:
            raise ReformulationError(f"no single input direction makes the {what} part reachable")
        g = best[1]
        k = _ackermann(A11, (Bh[:r] @ g)[:, None], poly_r)
        K_r = np.outer(g, k)
        dirs = [g]
    couplings = [np.zeros(n - r)] + list(np.eye(n - r))
    for v in couplings:
        for g in dirs or [np.zeros(m)]:
            Kh = np.hstack([K_r, np.outer(g, v)]) if r < n else K_r
            K = Kh @ Q.T
            AZ = A - B @ K
            O = _cyclic_transform(AZ, K)
            if O is not None:
                return K, AZ, O
    raise ReformulationError(
        "placed state matrix is derogatory (no companion form); choose a different target polynomial")


def _to_integer(AZ: np.ndarray, O: np.ndarray, target: tuple) -> tuple:
    T_sim = np.linalg.inv(O)
    Ahat = O @ AZ @ T_sim
    comp = companion(target)
    err = np.abs(Ahat - comp).max(initial=0.0)
    if err > INTEGER_TOL * (1 + np.abs(comp).max(initial=0)):
        raise ReformulationError(f"transformed state matrix deviates from integers by {err:.3g}")
    return comp, T_sim


def reform_controller_type(controller: Controller, target=None) -> IntegerReformulation:
    """Place ``Ac - Bc K`` on the roots of ``target`` (default ``lambda^nc``)."""
    c = controller
    if c.nc == 0:
        raise ValueError("controller has no dynamic state")
    target = _validate_target(target, c.nc)
    K, AZ, O = _place(c.Ac, c.Bc, target, "controllable")
    A_Z, T_sim = _to_integer(AZ, O, target)
    Ti = O
    return IntegerReformulation(
        kind="controller_type", A_Z=A_Z, gain=K, T_sim=T_sim,
        Bc_t=Ti @ c.Bc, Cc_t=(c.Cc - c.Dc @ K) @ T_sim, Dc=np.array(c.Dc),
        B2_t=Ti @ c.B2, F2=np.array(c.F2), feedback=K @ T_sim, target=target,
    )


def reform_observer_type(controller: Controller, target=None) -> IntegerReformulation:
    """Place ``Ac - L Cc`` on the roots of ``target`` (default ``lambda^nc``)."""
    c = controller
    if c.nc == 0:
        raise ValueError("controller has no dynamic state")
    target = _validate_target(target, c.nc)
    Kd, AZd, _ = _place(c.Ac.T, c.Cc.T, target, "observable")
    L = Kd.T
    AZ = c.Ac - L @ c.Cc
    O = _cyclic_transform(AZ, c.Cc)
    if O is None:
        raise ReformulationError(
            "placed state matrix is derogatory (no companion form); choose a different target polynomial")
    A_Z, T_sim = _to_integer(AZ, O, target)
    Ti = O
    return IntegerReformulation(
        kind="observer_type", A_Z=A_Z, gain=L, T_sim=T_sim,
        Bc_t=Ti @ (c.Bc - L @ c.Dc), Cc_t=c.Cc @ T_sim, Dc=np.array(c.Dc),
        B2_t=Ti @ (c.B2 - L @ c.F2), F2=np.array(c.F2), feedback=Ti @ L, target=target,
    )


def reformed_controller(reform: IntegerReformulation) -> Controller:
    """The map ``y -> u`` realized by the reformulated controller together with
    its artificial feedback, in companion coordinates."""
    R = reform
    A_Z = R.A_Z.astype(float)
    if R.kind == "controller_type":
        return Controller(A_Z + R.Bc_t @ R.feedback, R.Bc_t, R.Cc_t + R.Dc @ R.feedback,
                          R.Dc, R.B2_t, R.F2)
    if R.kind == "observer_type":
        return Controller(A_Z + R.feedback @ R.Cc_t, R.Bc_t + R.feedback @ R.Dc, R.Cc_t,
                          R.Dc, R.B2_t + R.feedback @ R.F2, R.F2)
    raise ValueError(f"unknown reformulation kind {R.kind!r}")


def equivalent_loop(plant: Plant, controller: Controller, reform: IntegerReformulation) -> ClosedLoop:
    """Closed loop of ``plant`` with the reformulated controller and its artificial feedback."""
    if reform.T_sim.shape[0] != controller.nc or reform.Dc.shape != controller.Dc.shape:
        raise DimensionError("reformulation does not match the controller dimensions")
    eff = reformed_controller(reform)
    T, Ti = reform.T_sim, np.linalg.inv(reform.T_sim)
    scale = 1 + np.abs(controller.Ac).max(initial=0.0)
    if (np.abs(T @ eff.Ac @ Ti - controller.Ac).max(initial=0.0) > 1e-7 * scale
            or np.abs(T @ eff.Bc - controller.Bc).max(initial=0.0) > 1e-7 * scale
            or not np.allclose(eff.Dc, controller.Dc)):
        raise ValueError("reformulation was not produced from this controller")
    return interconnect(plant, eff)
