"""Constellation builders: PSK, two-ring APK, the 4-state unidimensional family
and the OAPK rings derived from it.  Every builder returns unit mean photon
number.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ensemble import Constellation
from .errors import ConstellationError

RING_COLLISION_TOL = 1e-9


@dataclass(frozen=True)
class FourStateUDParams:
    """Parameters of ``{alpha1, -alpha1, alpha2, -alpha2}`` with probabilities
    ``{p1, p1, p2, p2}``.  ``alpha2`` and ``p2`` follow from unit energy."""

    alpha1: float
    p1: float

    def __post_init__(self):
        if not self.alpha1 > 0:
            raise ConstellationError(f"alpha1 must be positive, got {self.alpha1}")
        if not 0.25 < self.p1 < 0.5:
            raise ConstellationError(
                f"p1 must lie in the open interval (0.25, 0.5) so that p1 > p2 = 1/2 - p1; got {self.p1}"
            )
        if 1.0 - 2.0 * self.p1 * self.alpha1**2 <= 0:
            raise ConstellationError(
                f"alpha2 is not real: 2*p1*alpha1^2 = {2 * self.p1 * self.alpha1**2:.6g} >= 1"
            )
        if not self.alpha2 > self.alpha1:
            raise ConstellationError(
                f"alpha2 = {self.alpha2:.6g} must exceed alpha1 = {self.alpha1:.6g}"
            )

    @property
    def p2(self) -> float:
        return 0.5 - self.p1

    @property
    def alpha2(self) -> float:
        return math.sqrt(max(1.0 - 2.0 * self.p1 * self.alpha1**2, 0.0) / (2.0 * self.p2))

    @staticmethod
    def feasible(alpha1: float, p1: float) -> str | None:
        """Return None if ``(alpha1, p1)`` is feasible, else the reason it is not."""
        try:
            FourStateUDParams(alpha1, p1)
        except ConstellationError as exc:
            return str(exc)
        return None


@dataclass(frozen=True)
class OAPKParams:
    n1: int
    n2: int
    ud: FourStateUDParams
    phase_offset_inner: float = 0.0
    # None means pi / n2: outer ring staggered against the inner one
    phase_offset_outer: float | None = None

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ConstellationError(f"ring sizes must be >= 1, got {self.n1}/{self.n2}")

    @property
    def outer_offset(self) -> float:
        if self.phase_offset_outer is None:
            return math.pi / self.n2
        return self.phase_offset_outer

    @property
    def q1(self) -> float:
        return 2.0 * self.ud.p1 / self.n1

    @property
    def q2(self) -> float:
        return 2.0 * self.ud.p2 / self.n2


def _ring(n: int, radius: float, offset: float) -> np.ndarray:
    z = np.exp(1j * (2.0 * np.pi * np.arange(n) / n + offset))
    # snap round-off so axis-aligned points are exactly real or imaginary
    re = np.where(np.abs(z.real) < 1e-15, 0.0, z.real)
    im = np.where(np.abs(z.imag) < 1e-15, 0.0, z.imag)
    return radius * (re + 1j * im)


def build_four_state_ud(p: FourStateUDParams) -> Constellation:
    a1, a2 = p.alpha1, p.alpha2
    return Constellation(
        [a1, -a1, a2, -a2], [p.p1, p.p1, p.p2, p.p2], label="4UD"
    )


def build_oapk(p: OAPKParams) -> Constellation:
    a1, a2 = p.ud.alpha1, p.ud.alpha2
    if abs(a2 - a1) <= RING_COLLISION_TOL:
        raise ConstellationError(f"inner and outer ring radii coincide ({a1:.12g})")
    amps = np.concatenate(
        [_ring(p.n1, a1, p.phase_offset_inner), _ring(p.n2, a2, p.outer_offset)]
    )
    probs = np.concatenate([np.full(p.n1, p.q1), np.full(p.n2, p.q2)])
    return Constellation(amps, probs, label=f"{p.n1}/{p.n2}OAPK")


def build_psk(n: int) -> Constellation:
    if n < 2:
        raise ConstellationError(f"PSK needs at least 2 states, got {n}")
    return Constellation(_ring(n, 1.0, 0.0), np.full(n, 1.0 / n), label=f"{n}PSK")


def build_apk(n1: int, n2: int, ring_ratio: float = 2.0) -> Constellation:
    """Equiprobable two-ring APK with radii r and ``ring_ratio * r``, unit energy."""
    if n1 < 1 or n2 < 1:
        raise ConstellationError(f"ring sizes must be >= 1, got {n1}/{n2}")
    if not ring_ratio > 1:
        raise ConstellationError(f"ring_ratio must exceed 1, got {ring_ratio}")
    n = n1 + n2
    r = math.sqrt(n / (n1 + n2 * ring_ratio**2))
    amps = np.concatenate([_ring(n1, r, 0.0), _ring(n2, ring_ratio * r, math.pi / n2)])
    return Constellation(amps, np.full(n, 1.0 / n), label=f"{n1}/{n2}APK")


def dumps(c: Constellation) -> str:
    return json.dumps(c.to_dict(), indent=2)


def loads(text: str) -> Constellation:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConstellationError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConstellationError("constellation JSON must be an object")
    return Constellation.from_dict(data)


def load(path: str | Path) -> Constellation:
    return loads(Path(path).read_text())


def dump(c: Constellation, path: str | Path) -> None:
    Path(path).write_text(dumps(c) + "\n")
