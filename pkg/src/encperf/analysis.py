"""LMI-based quadratic performance tests and l2-gain minimization.

Every feasible answer is re-checked from the returned certificate with plain
eigenvalue computations; solver status alone is never trusted. For gain
problems the reported gain is the smallest value the certificate itself
supports (a Schur complement on the performance-input block), so it is an
upper bound on the true l2-gain regardless of solver accuracy.
"""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import cvxpy as cp
import numpy as np

from .bootstrap_model import Multiplier, reset_multiplier, sector_multiplier
from .fir import fir_truncate
from .lifting import lift, lift_reset
from .ss_core import (
    Controller, DimensionError, PerformanceIndex, Plant, attach_bootstrap_channel,
    interconnect, psd_tolerance,
)

__all__ = [
    "METHODS",
    "AnalysisError",
    "LmiConstraint",
    "LmiProblem",
    "AnalysisResult",
    "assemble_nominal",
    "assemble_robust",
    "feasibility_oracle",
    "minimize_gain",
    "min_l2_gain",
    "build_problem",
    "verify_certificate",
    "lifted_l2_problem",
]

log = logging.getLogger(__name__)

METHODS = ("nominal", "bootstrap", "reset_robust", "reset_nominal", "fir_nominal")
MARGIN = 1e-7
TAU_FLOOR = 1e-9
VERIFY_FRACTION = 0.1
DEFAULT_SOLVER = "CLARABEL"


class AnalysisError(RuntimeError):
    """Numerical trouble in the conic backend; carries the solver status."""

    def __init__(self, message: str, status: Optional[str] = None):
        super().__init__(message if status is None else f"{message} (status: {status})")
        self.status = status


@dataclass(frozen=True, eq=False)
class LmiConstraint:
    """``fn(X, tau, g) < 0`` (``sense='neg'``) or ``> 0`` (``sense='pos'``).

    ``fn`` is affine and must accept both numpy arrays and cvxpy expressions.
    ``gain_idx`` lists the rows/cols where ``-g I`` enters.
    """

    name: str
    size: int
    fn: Callable
    sense: str = "neg"
    gain_idx: Optional[np.ndarray] = None

    def value(self, X, tau=None, g=None) -> np.ndarray:
        F = np.asarray(self.fn(X, tau, g), dtype=float)
        return (F + F.T) / 2

    def margin(self, N: int) -> float:
        F0 = self.value(np.zeros((N, N)), 0.0, 0.0)
        return MARGIN * (1.0 + np.linalg.norm(F0, "fro"))


@dataclass(frozen=True, eq=False)
class LmiProblem:
    N: int
    constraints: tuple
    has_tau: bool = False
    gain_variable: bool = False
    tag: str = ""


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    feasible: bool
    certified_gain: Optional[float]
    X: Optional[np.ndarray]
    tau: Optional[float]
    method: str
    solver_stats: dict = field(default_factory=dict)


def _pos_X(N: int) -> LmiConstraint:
    return LmiConstraint("X", N, lambda X, tau, g: X, sense="pos")


def _perf_matrix(index: Optional[PerformanceIndex], mw: int, pz: int) -> np.ndarray:
    if index is None:
        return np.block([[np.zeros((mw, mw)), np.zeros((mw, pz))], [np.zeros((pz, mw)), np.eye(pz)]])
    if index.m_w != mw or index.p_z != pz:
        raise DimensionError(
            f"performance index is for ({index.m_w} inputs, {index.p_z} outputs), "
            f"system has ({mw}, {pz})")
    if index.Rp.size and np.linalg.eigvalsh(index.Rp).min() < -psd_tolerance(index.Rp):
        raise ValueError("Rp must be positive semidefinite")
    return index.matrix


def assemble_nominal(system, index: Optional[PerformanceIndex] = None, tag: str = "nominal") -> LmiProblem:
    """Storage-function LMI for ``system`` (a closed loop or a lifted loop).

    With ``index=None`` the l2-gain index ``Qp = -g I, Sp = 0, Rp = I`` is used
    and ``g`` becomes a decision variable.
    """
    A, Bp, Cp, Dpp = system.A, system.Bp, system.Cp, system.Dpp
    N, mw, pz = A.shape[0], Bp.shape[1], Cp.shape[0]
    P = _perf_matrix(index, mw, pz)
    E1 = np.hstack([np.eye(N), np.zeros((N, mw))])
    G1 = np.hstack([A, Bp])
    M2 = np.block([[np.zeros((mw, N)), np.eye(mw)], [Cp, Dpp]])
    perf = M2.T @ P @ M2
    gain_idx = np.arange(N, N + mw) if index is None else None
    sel = np.zeros((N + mw, N + mw))
    sel[N:, N:] = np.eye(mw)

    def fn(X, tau, g):
        F = -(E1.T @ X @ E1) + G1.T @ X @ G1 + perf
        if gain_idx is not None:
            F = F - g * sel
        return F

    lmi = LmiConstraint("performance", N + mw, fn, gain_idx=gain_idx)
    return LmiProblem(N, (_pos_X(N), lmi), has_tau=False, gain_variable=index is None, tag=tag)


def assemble_robust(lifted, index: Optional[PerformanceIndex], multiplier: Multiplier,
                    tag: str = "robust") -> LmiProblem:
    """Three-term LMI with the uncertainty channel weighted by ``tau * P_u``."""
    if not getattr(lifted, "has_uncertainty", False):
        raise ValueError("system carries no uncertainty channel")
    A, Bp, Bu = lifted.A, lifted.Bp, lifted.Bu
    Cp, Dpp, Dpu, Cu = lifted.Cp, lifted.Dpp, lifted.Dpu, lifted.Cu
    N, mw, pz, nu = A.shape[0], Bp.shape[1], Cp.shape[0], Bu.shape[1]
    if multiplier.nc != nu:
        raise DimensionError(f"multiplier acts on {multiplier.nc} channels, system has {nu}")
    P = _perf_matrix(index, mw, pz)
    K = N + mw + nu
    E1 = np.hstack([np.eye(N), np.zeros((N, mw + nu))])
    G1 = np.hstack([A, Bp, Bu])
    M2 = np.block([[np.zeros((mw, N)), np.eye(mw), np.zeros((mw, nu))], [Cp, Dpp, Dpu]])
    M3 = np.block([[np.zeros((nu, N + mw)), np.eye(nu)], [Cu, np.zeros((nu, mw + nu))]])
    perf = M2.T @ P @ M2
    unc = M3.T @ multiplier.P @ M3
    gain_idx = np.arange(N, N + mw) if index is None else None
    sel = np.zeros((K, K))
    sel[N:N + mw, N:N + mw] = np.eye(mw)

    def fn(X, tau, g):
        F = -(E1.T @ X @ E1) + G1.T @ X @ G1 + perf + tau * unc
        if gain_idx is not None:
            F = F - g * sel
        return F

    lmi = LmiConstraint("performance", K, fn, gain_idx=gain_idx)
    return LmiProblem(N, (_pos_X(N), lmi), has_tau=True, gain_variable=index is None, tag=tag)


def _certified_g(con: LmiConstraint, X, tau, eps: float) -> Optional[float]:
    """Smallest ``g`` with ``con(X, tau, g) <= -eps I``, or None if no ``g`` works."""
    F = con.value(X, tau, 0.0) + eps * np.eye(con.size)
    w = con.gain_idx
    o = np.setdiff1d(np.arange(con.size), w)
    Foo = F[np.ix_(o, o)]
    if o.size and np.linalg.eigvalsh(Foo).max() >= 0:
        return None
    Fow = F[np.ix_(o, w)]
    S = F[np.ix_(w, w)] - (Fow.T @ np.linalg.solve(Foo, Fow) if o.size else 0.0)
    return float(np.linalg.eigvalsh((S + S.T) / 2).max())


def verify_certificate(problem: LmiProblem, X, tau=None, g=None) -> dict:
    """Independent eigenvalue check of every constraint at the certificate.

    A constraint passes when its eigenvalues clear ``VERIFY_FRACTION`` of the
    margin imposed during the solve.
    """
    out = {"ok": True, "constraints": {}}
    for con in problem.constraints:
        eps = VERIFY_FRACTION * con.margin(problem.N)
        eig = np.linalg.eigvalsh(con.value(X, tau, g))
        worst = float(eig.max() if con.sense == "neg" else -eig.min())
        passed = worst <= -eps
        out["constraints"][con.name] = {"worst": worst, "required": -eps, "ok": passed}
        out["ok"] &= passed
    return out


def _check_solver(solver: str) -> None:
    if solver not in cp.installed_solvers():
        raise AnalysisError(f"solver {solver!r} is not installed; available: "
                            f"{', '.join(cp.installed_solvers())}", "solver_error")


def _solve(problem: LmiProblem, g_fixed: Optional[float], solver: str):
    N = problem.N
    X = cp.Variable((N, N), symmetric=True)
    tau = cp.Variable() if problem.has_tau else None
    g = g_fixed
    if problem.gain_variable and g_fixed is None:
        g = cp.Variable()
    cons = []
    for con in problem.constraints:
        expr = con.fn(X, tau, g)
        expr = (expr + expr.T) / 2
        eps = con.margin(N) * np.eye(con.size)
        cons.append(expr << -eps if con.sense == "neg" else expr >> eps)
    if tau is not None:
        cons.append(tau >= TAU_FLOOR)
    objective = cp.Minimize(g) if isinstance(g, cp.Variable) else cp.Minimize(0)
    prob = cp.Problem(objective, cons)
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            # inaccurate solutions are reported through the status and re-verified
            warnings.filterwarnings("ignore", message="Solution may be inaccurate")
            prob.solve(solver=solver)
    except cp.error.SolverError as exc:
        raise AnalysisError(f"solver {solver} failed: {exc}", "solver_error") from exc
    stats = {
        "status": prob.status,
        "solver": solver,
        "solve_time": time.perf_counter() - t0,
        "iterations": getattr(prob.solver_stats, "num_iters", None),
    }
    def val(v):
        if isinstance(v, cp.Variable):
            return None if v.value is None else float(v.value)
        return v

    Xv = None if X.value is None else (X.value + X.value.T) / 2
    return prob.status, Xv, val(tau), val(g), stats


def feasibility_oracle(problem: LmiProblem, g: Optional[float] = None,
                       solver: str = DEFAULT_SOLVER) -> AnalysisResult:
    """Decide strict feasibility; ``g`` fixes the gain variable if there is one."""
    if problem.gain_variable and g is None:
        raise ValueError("gain problem needs a fixed g for a feasibility query")
    _check_solver(solver)
    status, X, tau, _, stats = _solve(problem, g, solver)
    if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return AnalysisResult(False, None, None, None, problem.tag, stats)
    if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or X is None:
        raise AnalysisError("feasibility query did not converge", status)
    check = verify_certificate(problem, X, tau, g)
    stats["verification"] = check
    if not check["ok"]:
        raise AnalysisError("solver certificate fails independent verification", status)
    gain = None if g is None else float(np.sqrt(max(g, 0.0)))
    return AnalysisResult(True, gain, X, tau, problem.tag, stats)


def _gain_from_certificate(problem: LmiProblem, X, tau):
    """Verified gain supported by ``(X, tau)``, or None."""
    lmi = next(c for c in problem.constraints if c.gain_idx is not None)
    eps = VERIFY_FRACTION * lmi.margin(problem.N)
    g = _certified_g(lmi, X, tau, eps)
    if g is None:
        return None, None
    g = g + 1e-12 * (1.0 + abs(g))
    check = verify_certificate(problem, X, tau, g)
    return (g, check) if check["ok"] else (None, check)


def _bisect(problem: LmiProblem, solver: str, hint: Optional[float], rtol: float = 1e-5):
    hi = max(hint or 1.0, 1e-6)
    best, last_error, answered = None, None, False
    for _ in range(40):
        try:
            r = feasibility_oracle(problem, hi, solver)
        except AnalysisError as exc:
            r, last_error = None, exc
        answered |= r is not None
        if r is not None and r.feasible:
            best = r
            break
        hi *= 4.0
        if hi > 1e12:
            if not answered and last_error is not None:
                raise last_error
            return None
    lo = 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        try:
            r = feasibility_oracle(problem, mid, solver)
        except AnalysisError:
            r = None
        if r is not None and r.feasible:
            hi, best = mid, r
        else:
            lo = mid
    return best


def minimize_gain(problem: LmiProblem, solver: str = DEFAULT_SOLVER,
                  bisection: str = "fallback") -> AnalysisResult:
    """Minimize ``g = gamma^2`` in one SDP; bisection on ``g`` is the fallback.

    ``bisection`` is ``"fallback"`` (default), ``"always"`` or ``"never"``.
    """
    if not problem.gain_variable:
        raise ValueError("problem has no gain variable")
    _check_solver(solver)
    stats = {}
    g_hint = None
    if bisection != "always":
        try:
            status, X, tau, g_opt, stats = _solve(problem, None, solver)
        except AnalysisError as exc:
            if bisection == "never":
                raise
            log.warning("single-shot gain SDP failed (%s); bisecting", exc)
            status, X = None, None
        if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
            return AnalysisResult(False, float("inf"), None, None, problem.tag, stats)
        if X is not None and status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            g_hint = g_opt
            g, check = _gain_from_certificate(problem, X, tau)
            if g is not None:
                stats.update(strategy="sdp", solver_gain=float(np.sqrt(max(g_opt, 0.0))),
                             verification=check)
                return AnalysisResult(True, float(np.sqrt(max(g, 0.0))), X, tau, problem.tag, stats)
        if bisection == "never":
            raise AnalysisError("gain SDP returned no verifiable certificate", status)
    t0 = time.perf_counter()
    r = _bisect(problem, solver, g_hint)
    if r is None:
        return AnalysisResult(False, float("inf"), None, None, problem.tag,
                              {"strategy": "bisection", "status": "no finite certificate"})
    g, check = _gain_from_certificate(problem, r.X, r.tau)
    gb = r.certified_gain ** 2
    g = gb if g is None else min(g, gb)
    r.solver_stats.update(strategy="bisection", bisection_time=time.perf_counter() - t0)
    return AnalysisResult(True, float(np.sqrt(g)), r.X, r.tau, problem.tag, r.solver_stats)


def build_problem(method: str, plant: Plant, controller: Controller, period: int = 10,
                  sector_gamma: float = 0.223, horizon: Optional[int] = None) -> LmiProblem:
    """l2-gain problem for one of :data:`METHODS`."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    cl = interconnect(plant, controller)
    if method == "nominal":
        return assemble_nominal(cl, tag=method)
    if method == "fir_nominal":
        fir = fir_truncate(controller, horizon or period)
        return assemble_nominal(interconnect(plant, fir.realization), tag=method)
    if method == "reset_nominal":
        return assemble_nominal(lift_reset(cl, plant, controller, period), tag=method)
    lifted = lift(attach_bootstrap_channel(cl, controller), period)
    mult = (sector_multiplier(sector_gamma, controller.nc) if method == "bootstrap"
            else reset_multiplier(controller.nc))
    return assemble_robust(lifted, None, mult, tag=method)


def min_l2_gain(method: str, plant: Plant, controller: Controller, period: int = 10,
                sector_gamma: float = 0.223, horizon: Optional[int] = None,
                solver: str = DEFAULT_SOLVER, bisection: str = "fallback") -> AnalysisResult:
    """Smallest certified l2-gain of the loop under ``method``."""
    problem = build_problem(method, plant, controller, period, sector_gamma, horizon)
    res = minimize_gain(problem, solver=solver, bisection=bisection)
    res.solver_stats.update(period=period, sector_gamma=sector_gamma,
                            horizon=horizon or period)
    return res


def lifted_l2_problem(cl, T: int) -> LmiProblem:
    """Nominal gain problem on the ``T``-lifted loop; used for lifting checks."""
    lifted = lift(cl, T)
    return assemble_nominal(lifted, tag=f"lifted_T{T}")
