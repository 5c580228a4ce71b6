"""Approximate modular reduction and the quadratic multipliers describing its error.

The bootstrapping residual ``p(z + r q) - (z mod q)`` is modelled as a
sector-bounded uncertainty. Two multiplier shapes are supported: ``sector``
(relative bound ``gamma``) and ``reset`` (the error is exactly ``-z``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C

__all__ = [
    "DomainError",
    "ModuloApprox",
    "Multiplier",
    "centered_mod",
    "build_modulo_approx",
    "max_relative_error",
    "load_modulo_approx",
    "default_modulo_approx",
    "bootstrap_error",
    "sector_multiplier",
    "reset_multiplier",
    "sector_check",
    "form_value",
]

DATA = Path(__file__).parent / "data"
FORMAT = "encperf.modulo_approx/1"


class DomainError(ValueError):
    """Input outside every window where the polynomial tracks the modulo function."""


def centered_mod(z, q: float):
    """Representative of ``z mod q`` in ``[-q/2, q/2)``."""
    z = np.asarray(z, dtype=float)
    return z - q * np.floor(z / q + 0.5)


@dataclass(frozen=True, eq=False)
class ModuloApprox:
    """Polynomial stand-in for ``z mod q`` on windows ``[c - h, c + h]``.

    ``coeffs`` are Chebyshev-series coefficients on ``domain``.
    """

    q: float
    gamma: float
    coeffs: tuple
    domain: tuple
    intervals: tuple

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("modulus q must be positive")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "domain", tuple(float(d) for d in self.domain))
        object.__setattr__(self, "intervals", tuple((float(c), float(h)) for c, h in self.intervals))

    def __eq__(self, other):
        if not isinstance(other, ModuloApprox):
            return NotImplemented
        return (self.q, self.gamma, self.coeffs, self.domain, self.intervals) == (
            other.q, other.gamma, other.coeffs, other.domain, other.intervals)

    __hash__ = None

    def __call__(self, z):
        lo, hi = self.domain
        t = (2 * np.asarray(z, dtype=float) - (lo + hi)) / (hi - lo)
        return C.chebval(t, self.coeffs)

    def in_window(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        ok = np.zeros(z.shape, dtype=bool)
        for c, h in self.intervals:
            ok |= np.abs(z - c) <= h
        return ok

    def grid(self, points: int = 10_000) -> list:
        return [np.linspace(c - h, c + h, points) for c, h in self.intervals]

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "q": self.q,
            "gamma": self.gamma,
            "basis": "chebyshev",
            "domain": list(self.domain),
            "coeffs": list(self.coeffs),
            "intervals": [{"center": c, "half_width": h} for c, h in self.intervals],
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "ModuloApprox":
        if d.get("format") != FORMAT:
            raise ValueError(f"unsupported modulo approximation format {d.get('format')!r}")
        if d.get("basis") != "chebyshev":
            raise ValueError("only the 'chebyshev' basis is supported")
        return cls(
            q=float(d["q"]), gamma=float(d["gamma"]), coeffs=d["coeffs"], domain=d["domain"],
            intervals=[(w["center"], w["half_width"]) for w in d["intervals"]],
        )


def _arcsine_series(s: np.ndarray) -> np.ndarray:
    return s + s**3 / 6 + 3 * s**5 / 40


def build_modulo_approx(q: float = 1.0, offsets: Iterable[int] = range(-2, 3),
                        half_width: float | None = None, degree: int = 127,
                        gamma: float = 0.223) -> ModuloApprox:
    """Odd Chebyshev fit of ``q/(2 pi) * S(sin(2 pi z / q))`` where ``S`` is the
    arcsine series truncated after the fifth order.

    Raises if the relative error on the windows exceeds ``gamma``.
    """
    offsets = sorted(offsets)
    hw = q / 4 if half_width is None else half_width
    lo, hi = offsets[0] * q - hw, offsets[-1] * q + hw
    x = np.cos(np.pi * (np.arange(4 * degree) + 0.5) / (4 * degree))
    z = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    target = q / (2 * np.pi) * _arcsine_series(np.sin(2 * np.pi * z / q))
    coeffs = C.chebfit(x, target, degree)
    if abs(lo + hi) < 1e-12 * q:
        coeffs[0::2] = 0.0
    m = ModuloApprox(q, gamma, coeffs, (lo, hi), [(r * q, hw) for r in offsets])
    worst = max_relative_error(m)
    if worst > gamma:
        raise ValueError(f"fit reaches relative error {worst:.4f} > gamma={gamma}")
    return m


def max_relative_error(m: ModuloApprox, points: int = 10_000) -> float:
    worst = 0.0
    for z in m.grid(points):
        ref = centered_mod(z, m.q)
        nz = np.abs(ref) > 1e-6 * m.q
        worst = max(worst, float(np.max(np.abs(m(z[nz]) - ref[nz]) / np.abs(ref[nz]))))
    return worst


def load_modulo_approx(path) -> ModuloApprox:
    return ModuloApprox.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_modulo_approx() -> ModuloApprox:
    return load_modulo_approx(DATA / "modulo_default.json")


def bootstrap_error(m: ModuloApprox, z, r) -> np.ndarray:
    """Componentwise residual ``p(z + r q) - (z mod q)``."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    r = np.broadcast_to(np.asarray(r), z.shape)
    arg = z + r * m.q
    bad = ~m.in_window(arg)
    if bad.any():
        raise DomainError(
            f"argument(s) {arg[bad].tolist()} outside every valid window of the approximation")
    return m(arg) - centered_mod(z, m.q)


@dataclass(frozen=True, eq=False)
class Multiplier:
    """Quadratic multiplier ``P_u`` acting on ``(w_u, z_u)``; scaled by ``tau > 0``."""

    kind: str
    P: np.ndarray
    gamma: float | None = None
    tau_positive: bool = True

    @property
    def nc(self) -> int:
        return self.P.shape[0] // 2


def sector_multiplier(gamma: float, nc: int) -> Multiplier:
    """``[[-2I, 0], [0, 2 gamma^2 I]]``. ``gamma = 0`` encodes zero uncertainty."""
    if not gamma >= 0:
        raise ValueError(f"sector bound must be non-negative, got {gamma!r}")
    I = np.eye(nc)
    Z = np.zeros((nc, nc))
    return Multiplier("sector", np.block([[-2 * I, Z], [Z, 2 * gamma**2 * I]]), gamma=float(gamma))


def reset_multiplier(nc: int) -> Multiplier:
    I = np.eye(nc)
    return Multiplier("reset", np.block([[-2 * I, -2 * I], [-2 * I, -2 * I]]))


def form_value(multiplier: Multiplier, z, w) -> float:
    v = np.concatenate([np.ravel(w), np.ravel(z)])
    return float(v @ multiplier.P @ v)


def sector_check(samples: Sequence, multiplier: Multiplier) -> bool:
    """True iff every ``(z, w)`` pair keeps the multiplier form non-negative."""
    for z, w in samples:
        z = np.ravel(np.asarray(z, dtype=float))
        if form_value(multiplier, z, w) < -1e-9 * (1 + z @ z):
            return False
    return True
