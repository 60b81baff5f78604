"""Conic divisors on the Riemann sphere and the sharp pinching constant."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"

# relative tolerance used when deciding equality in the Troyanov comparison
_CLASSIFY_TOL = 1e-12


class DivisorError(ValueError):
    """Invalid divisor data."""


@dataclass(frozen=True)
class ConePoint:
    position: complex | None  # None is the point at infinity
    beta: float

    @property
    def infinite(self) -> bool:
        return self.position is None


@dataclass(frozen=True)
class ConicDivisor:
    """D = sum beta_i p_i with orders in (-1, 0), stored sorted ascending by order.

    ``points`` holds :class:`ConePoint` entries; at most one may sit at infinity.
    """

    points: tuple[ConePoint, ...] = field(default_factory=tuple)

    def __post_init__(self):
        pts = tuple(self.points)
        for p in pts:
            if not (-1.0 < p.beta < 0.0):
                raise DivisorError(f"cone order {p.beta} outside (-1, 0)")
        n_inf = sum(p.infinite for p in pts)
        if n_inf > 1:
            raise DivisorError("at most one cone point may sit at infinity")
        finite = [complex(p.position) for p in pts if not p.infinite]
        for i in range(len(finite)):
            for j in range(i + 1, len(finite)):
                if abs(finite[i] - finite[j]) == 0.0:
                    raise DivisorError(f"repeated cone position {finite[i]}")
        # stable sort keeps caller order among equal betas
        pts = tuple(sorted(pts, key=lambda p: p.beta))
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_orders(cls, betas: Sequence[float], positions: Sequence[complex | None] | None = None):
        """Build from a list of orders.

        Without explicit positions the smallest order goes to infinity and the
        rest are spread on the unit circle, except that a lone second point is
        put at the origin (football layout).
        """
        betas = [float(b) for b in betas]
        if positions is None:
            order = sorted(range(len(betas)), key=lambda i: betas[i])
            positions = [None] * len(betas)
            rest = order[1:]
            if len(rest) == 1:
                positions[rest[0]] = 0j
            else:
                for k, i in enumerate(rest):
                    positions[i] = complex(math.cos(2 * math.pi * k / len(rest)),
                                           math.sin(2 * math.pi * k / len(rest)))
        if len(positions) != len(betas):
            raise DivisorError("positions and orders differ in length")
        return cls(tuple(ConePoint(None if p is None else complex(p), b)
                         for p, b in zip(positions, betas)))

    @property
    def betas(self) -> list[float]:
        return [p.beta for p in self.points]

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def degree(self) -> float:
        return float(sum(self.betas))

    @property
    def beta1(self) -> float:
        # empty divisor: beta_1 = 0 so that alpha = 0 and rho0 = 1
        return self.points[0].beta if self.points else 0.0

    @property
    def alpha(self) -> float:
        return self.degree - self.beta1

    @property
    def euler(self) -> float:
        return 2.0 + self.degree

    @property
    def finite_points(self) -> list[ConePoint]:
        return [p for p in self.points if not p.infinite]

    @property
    def infinite_point(self) -> ConePoint | None:
        for p in self.points:
            if p.infinite:
                return p
        return None

    @property
    def beta_infinity(self) -> float:
        p = self.infinite_point
        return 0.0 if p is None else p.beta

    def mapped(self, fn) -> "ConicDivisor":
        """Apply ``fn`` to every finite position (infinity stays put)."""
        return ConicDivisor(tuple(p if p.infinite else ConePoint(complex(fn(p.position)), p.beta)
                                  for p in self.points))

    def to_dict(self) -> dict:
        pts = []
        for p in self.points:
            z = 0j if p.infinite else p.position
            pts.append({"re": z.real, "im": z.imag, "infinite": p.infinite, "beta": p.beta})
        return {"points": pts}

    @classmethod
    def from_dict(cls, data: dict) -> "ConicDivisor":
        try:
            pts = data["points"]
            return cls(tuple(
                ConePoint(None if p.get("infinite", False) else complex(p["re"], p.get("im", 0.0)),
                          float(p["beta"]))
                for p in pts))
        except (KeyError, TypeError) as exc:
            raise DivisorError(f"malformed divisor document: {exc}") from exc

    @classmethod
    def parse(cls, text: str) -> "ConicDivisor":
        """Parse inline JSON: a bare list of orders or a full divisor document."""
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DivisorError(f"cannot parse divisor {text!r}: {exc}") from exc
        if isinstance(data, list):
            return cls.from_orders(data)
        if isinstance(data, dict):
            return cls.from_dict(data)
        raise DivisorError(f"cannot parse divisor {text!r}")


@dataclass(frozen=True)
class Classification:
    label: str
    euler: float
    threshold: float
    note: str | None = None

    def __str__(self):
        return self.label


def _compare(chi: float, threshold: float) -> str:
    tol = _CLASSIFY_TOL * max(1.0, abs(threshold))
    if abs(chi - threshold) <= tol:
        return CRITICAL
    return SUBCRITICAL if chi < threshold else SUPERCRITICAL


def classify(d: ConicDivisor) -> Classification:
    """Troyanov trichotomy: compare chi(S,D) = 2+|D| with min{2, 2+2 beta_1}.

    The alternative reading min{2, 2+beta_1} is evaluated as well and a note is
    attached when it would give a different answer.
    """
    chi = d.euler
    b1 = d.beta1 if d.points else 0.0
    thr = min(2.0, 2.0 + 2.0 * b1)
    label = _compare(chi, thr)
    alt = _compare(chi, min(2.0, 2.0 + b1))
    note = None
    if alt != label:
        note = (f"reading the threshold as min(2, 2+beta_1) would give {alt}; "
                f"using min(2, 2+2*beta_1)")
    return Classification(label, chi, thr, note)


def rho0(d: ConicDivisor) -> float:
    """Sharp pinching constant (1+beta_1)^2 / (1+alpha)^2."""
    if d.euler <= 0:
        raise DivisorError("rho0 requires chi(S,D) > 0")
    if 1.0 + d.alpha <= 0.0:
        raise DivisorError(f"degenerate divisor: 1 + alpha = {1.0 + d.alpha} <= 0")
    return (1.0 + d.beta1) ** 2 / (1.0 + d.alpha) ** 2


def divisor_from_any(spec: ConicDivisor | Iterable[float] | str) -> ConicDivisor:
    if isinstance(spec, ConicDivisor):
        return spec
    if isinstance(spec, str):
        return ConicDivisor.parse(spec)
    return ConicDivisor.from_orders(list(spec))
