"""Time-domain simulation of the loop variants and empirical l2-gain estimates.

Plant and controller are stepped separately (not through the closed-loop
matrices), so these runs double as an independent check of the
interconnection and lifting code.

Events happen at ``t = k T``: the controller state consumed by the update at
that step is replaced (reset) or perturbed (bootstrapping), so the change
first shows in ``xc(kT + 1)``. The control input at ``t = kT`` still uses the
unmodified state.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bootstrap_model import DomainError, ModuloApprox, bootstrap_error, default_modulo_approx
from .fir import fir_truncate
from .integer_reform import reform_controller_type, reform_observer_type
from .ss_core import ClosedLoop, Controller, Plant

__all__ = [
    "VARIANTS",
    "NoInputError",
    "SimScenario",
    "SimResult",
    "disturbance",
    "empirical_gain",
    "simulate",
    "simulate_closed_loop",
    "export_trajectories",
]

VARIANTS = ("nominal", "reset", "fir", "bootstrap", "integer_reform")


class NoInputError(ValueError):
    """The disturbance has zero energy, so no gain estimate exists."""


@dataclass(frozen=True)
class SimScenario:
    """One simulation run.

    The disturbance is drawn from ``numpy.random.default_rng(seed)`` (PCG64),
    uniform on ``[-amplitude, amplitude]`` or normal with standard deviation
    ``amplitude``, one column per performance input.

    Bootstrap errors follow ``error_policy``: ``"model"`` evaluates the
    polynomial residual at ``xc / state_scale`` with a random overflow count
    ``r`` in ``[-max_overflow, max_overflow]`` and scales it back;
    ``"adversarial"`` injects ``+-gamma * xc`` with random signs; ``"none"``
    injects nothing.
    """

    variant: str = "nominal"
    steps: int = 10_000
    period: int = 10
    seed: int = 0
    amplitude: float = 1.0
    distribution: str = "uniform"
    error_policy: str = "model"
    modulo: Optional[ModuloApprox] = None
    state_scale: float = 16.0
    max_overflow: int = 2
    horizon: Optional[int] = None
    reform_kind: str = "controller_type"
    target: Optional[tuple] = None
    store: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.period < 1:
            raise ValueError("period must be >= 1")
        if self.distribution not in ("uniform", "normal"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.error_policy not in ("model", "adversarial", "none"):
            raise ValueError(f"unknown error policy {self.error_policy!r}")


@dataclass
class SimResult:
    variant: str
    status: str
    empirical_gain: Optional[float]
    steps: int
    w_energy: float
    z_energy: float
    events: list = field(default_factory=list)
    trajectories: Optional[dict] = None


def disturbance(scenario: SimScenario, m_w: int) -> np.ndarray:
    rng = np.random.default_rng(scenario.seed)
    a = scenario.amplitude
    if scenario.distribution == "uniform":
        return rng.uniform(-a, a, size=(scenario.steps, m_w))
    return a * rng.standard_normal((scenario.steps, m_w))


def empirical_gain(zs, ws) -> float:
    """``sqrt(sum |z|^2 / sum |w|^2)``."""
    ew = float(np.sum(np.square(ws)))
    if ew == 0.0:
        raise NoInputError("disturbance has zero energy")
    return float(np.sqrt(np.sum(np.square(zs)) / ew))


class _Runner:
    """Steps one controller realization; subclasses add artificial feedback."""

    def __init__(self, plant: Plant, controller: Controller):
        self.P, self.K = plant, controller
        self.xc = np.zeros(controller.nc)

    def output(self, y, w2):
        K = self.K
        return K.Cc @ self.xc + K.Dc @ y + K.F2 @ w2

    def update(self, xc_used, y, u, w2):
        K = self.K
        self.xc = K.Ac @ xc_used + K.Bc @ y + K.B2 @ w2


class _ControllerTypeRunner(_Runner):
    def __init__(self, plant, reform):
        R = reform
        self.R = R
        self.P = plant
        self.A_Z = R.A_Z.astype(float)
        self.xc = np.zeros(R.A_Z.shape[0])

    def output(self, y, w2):
        R = self.R
        self._y_tilde = y + R.feedback @ self.xc  # plant returns y + v
        return R.Cc_t @ self.xc + R.Dc @ self._y_tilde + R.F2 @ w2

    def update(self, xc_used, y, u, w2):
        R = self.R
        self.xc = self.A_Z @ xc_used + R.Bc_t @ self._y_tilde + R.B2_t @ w2


class _ObserverTypeRunner(_ControllerTypeRunner):
    def output(self, y, w2):
        R = self.R
        return R.Cc_t @ self.xc + R.Dc @ y + R.F2 @ w2

    def update(self, xc_used, y, u, w2):
        R = self.R
        v = R.feedback @ u  # computed on the plant side
        self.xc = self.A_Z @ xc_used + R.Bc_t @ y + v + R.B2_t @ w2


def _runner(plant: Plant, controller: Controller, sc: SimScenario) -> _Runner:
    if sc.variant == "fir":
        return _Runner(plant, fir_truncate(controller, sc.horizon or sc.period).realization)
    if sc.variant == "integer_reform":
        if sc.reform_kind == "controller_type":
            return _ControllerTypeRunner(plant, reform_controller_type(controller, sc.target))
        if sc.reform_kind == "observer_type":
            return _ObserverTypeRunner(plant, reform_observer_type(controller, sc.target))
        raise ValueError(f"unknown reform kind {sc.reform_kind!r}")
    return _Runner(plant, controller)


def simulate(plant: Plant, controller: Controller, scenario: SimScenario,
             w: Optional[np.ndarray] = None) -> SimResult:
    """Run ``scenario`` from zero initial states; ``w`` overrides the generated disturbance."""
    sc = scenario
    P = plant
    runner = _runner(plant, controller, sc)
    mw1 = P.m_w
    mw = mw1 + controller.m_w
    if w is None:
        w = disturbance(sc, mw)
    w = np.asarray(w, dtype=float).reshape(-1, mw)
    steps = w.shape[0]
    w1, w2 = w[:, :mw1], w[:, mw1:]
    modulo = sc.modulo
    if sc.variant == "bootstrap" and sc.error_policy == "model" and modulo is None:
        modulo = default_modulo_approx()
    err_rng = np.random.default_rng([sc.seed, 1])
    gamma = modulo.gamma if modulo is not None else 0.223

    x = np.zeros(P.n)
    zs = np.zeros((steps, P.p_z))
    us = np.zeros((steps, P.m_u)) if sc.store else None
    xis = np.zeros((steps + 1, P.n + runner.xc.size)) if sc.store else None
    flags = np.zeros(steps, dtype=int) if sc.store else None
    events = []
    status = "ok"
    done = steps
    for t in range(steps):
        if sc.store:
            xis[t] = np.concatenate([x, runner.xc])
        y = P.C @ x + P.F1 @ w1[t]
        u = runner.output(y, w2[t])
        zs[t] = P.C1 @ x + P.E @ u + P.D1 @ w1[t]
        xc_used = runner.xc
        if t % sc.period == 0 and sc.variant in ("reset", "bootstrap"):
            if sc.variant == "reset":
                xc_used = np.zeros_like(runner.xc)
                events.append((t, "reset", float(np.linalg.norm(runner.xc))))
            elif sc.error_policy != "none":
                try:
                    delta = _bootstrap_delta(runner.xc, sc, modulo, gamma, err_rng)
                except DomainError as exc:
                    events.append((t, "domain_error", str(exc)))
                    status, done = "aborted", t
                    break
                xc_used = runner.xc + delta
                events.append((t, "bootstrap", float(np.linalg.norm(delta))))
            if sc.store:
                flags[t] = 1
        if sc.store:
            us[t] = u
        x = P.A @ x + P.B @ u + P.B1 @ w1[t]
        runner.update(xc_used, y, u, w2[t])
    if sc.store:
        xis[done] = np.concatenate([x, runner.xc])
    zs, wd = zs[:done], w[:done]
    ew, ez = float(np.sum(wd**2)), float(np.sum(zs**2))
    gain = None
    if status == "ok":
        try:
            gain = empirical_gain(zs, wd)
        except NoInputError:
            status = "no_input"
    traj = None
    if sc.store:
        traj = {"w": wd, "u": us[:done], "z": zs, "xi": xis[:done + 1], "event": flags[:done]}
    return SimResult(sc.variant, status, gain, done, ew, ez, events, traj)


def _bootstrap_delta(xc, sc: SimScenario, modulo, gamma, rng) -> np.ndarray:
    if sc.error_policy == "adversarial":
        return rng.choice([-1.0, 1.0], size=xc.size) * gamma * xc
    r = rng.integers(-sc.max_overflow, sc.max_overflow + 1, size=xc.size)
    return sc.state_scale * bootstrap_error(modulo, xc / sc.state_scale, r)


def simulate_closed_loop(cl: ClosedLoop, w: np.ndarray, xi0=None) -> tuple:
    """Direct simulation of ``xi+ = A xi + Bp w``; returns ``(xi, z)`` with ``xi`` one longer."""
    w = np.asarray(w, dtype=float).reshape(-1, cl.m_w)
    xi = np.zeros((w.shape[0] + 1, cl.N))
    if xi0 is not None:
        xi[0] = xi0
    z = np.zeros((w.shape[0], cl.p_z))
    for t in range(w.shape[0]):
        z[t] = cl.Cp @ xi[t] + cl.Dpp @ w[t]
        xi[t + 1] = cl.A @ xi[t] + cl.Bp @ w[t]
    return xi, z


def export_trajectories(result: SimResult, path) -> None:
    """Write ``t, w_p..., u..., z_p..., event`` rows as CSV."""
    if result.trajectories is None:
        raise ValueError("run the scenario with store=True to export trajectories")
    tr = result.trajectories
    w, u, z, ev = tr["w"], tr["u"], tr["z"], tr["event"]
    header = (["t"] + [f"w{i}" for i in range(w.shape[1])] + [f"u{i}" for i in range(u.shape[1])]
              + [f"z{i}" for i in range(z.shape[1])] + ["event"])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for t in range(w.shape[0]):
            out.writerow([t] + [repr(float(v)) for v in (*w[t], *u[t], *z[t])] + [int(ev[t])])
