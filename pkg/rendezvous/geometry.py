"""Exact planar kinematics for piecewise cardinal-linear motion.

Positions, times and squared distances are rationals. The only irrational
quantity is the instant of a first touch, which is described exactly by its
quadratic and located by an exact sign bisection.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .scalar import ONE, ZERO, exact_sqrt, format_rational


class IntervalError(ValueError):
    pass


@dataclass(frozen=True)
class Point:
    x: Fraction  # East
    y: Fraction  # North

    def translated(self, dx: Fraction, dy: Fraction) -> Point:
        return Point(self.x + dx, self.y + dy)


class CardinalDirection(enum.Enum):
    N = (0, 1)
    E = (1, 0)
    S = (0, -1)
    W = (-1, 0)

    @property
    def velocity(self) -> tuple[Fraction, Fraction]:
        dx, dy = self.value
        return Fraction(dx), Fraction(dy)

    @property
    def opposite(self) -> CardinalDirection:
        return _OPPOSITE[self]


_OPPOSITE = {
    CardinalDirection.N: CardinalDirection.S,
    CardinalDirection.S: CardinalDirection.N,
    CardinalDirection.E: CardinalDirection.W,
    CardinalDirection.W: CardinalDirection.E,
}

STILL = (ZERO, ZERO)


@dataclass(frozen=True)
class MotionSegment:
    start_time: Fraction
    end_time: Fraction
    start_point: Point
    velocity: tuple[Fraction, Fraction] = STILL

    def __post_init__(self) -> None:
        if self.end_time < self.start_time:
            raise IntervalError("segmento termina antes de comecar")
        if self.velocity != STILL and self.velocity not in {d.velocity for d in CardinalDirection}:
            raise IntervalError(f"velocidade nao cardinal: {self.velocity}")

    @classmethod
    def inert(cls, point: Point, start_time: Fraction, end_time: Fraction) -> MotionSegment:
        return cls(start_time, end_time, point, STILL)

    @classmethod
    def moving(cls, point: Point, direction: CardinalDirection, start_time: Fraction, duration: Fraction) -> MotionSegment:
        return cls(start_time, start_time + duration, point, direction.velocity)

    def covers(self, t0: Fraction, t1: Fraction) -> bool:
        return self.start_time <= t0 <= t1 <= self.end_time

    def position_at(self, t: Fraction) -> Point:
        if not self.start_time <= t <= self.end_time:
            raise IntervalError(f"instante {t} fora do segmento [{self.start_time}, {self.end_time}]")
        elapsed = t - self.start_time
        return self.start_point.translated(self.velocity[0] * elapsed, self.velocity[1] * elapsed)

    @property
    def end_point(self) -> Point:
        return self.position_at(self.end_time)

    def restricted(self, t0: Fraction, t1: Fraction) -> MotionSegment:
        return MotionSegment(t0, t1, self.position_at(t0), self.velocity)


def squared_distance(p: Point, q: Point) -> Fraction:
    dx = p.x - q.x
    dy = p.y - q.y
    return dx * dx + dy * dy


def squared_distance_polynomial(
    a: MotionSegment, b: MotionSegment, t0: Fraction, t1: Fraction
) -> tuple[Fraction, Fraction, Fraction]:
    """Coefficients (A, B, C) with dist²(t) = A·t² + B·t + C on [t0, t1]."""
    if t1 < t0 or not a.covers(t0, t1) or not b.covers(t0, t1):
        raise IntervalError(f"intervalo [{t0}, {t1}] nao coberto pelos dois segmentos")
    vx = a.velocity[0] - b.velocity[0]
    vy = a.velocity[1] - b.velocity[1]
    # relative position at t = 0, extrapolated along the current velocities
    px = (a.start_point.x - a.velocity[0] * a.start_time) - (b.start_point.x - b.velocity[0] * b.start_time)
    py = (a.start_point.y - a.velocity[1] * a.start_time) - (b.start_point.y - b.velocity[1] * b.start_time)
    return vx * vx + vy * vy, 2 * (px * vx + py * vy), px * px + py * py


def evaluate(coefficients: tuple[Fraction, Fraction, Fraction], t: Fraction) -> Fraction:
    a, b, c = coefficients
    return (a * t + b) * t + c


@dataclass(frozen=True)
class TouchTime:
    """Earliest instant where dist² reaches the threshold.

    ``coefficients`` describe q(t) = dist²(t) − threshold; the instant is the
    smaller root of q (or ``t0`` when q(t0) = 0). ``exact`` is set when that
    root is rational; otherwise only the bracket [lo, hi] is rational.
    """

    coefficients: tuple[Fraction, Fraction, Fraction]
    lo: Fraction
    hi: Fraction
    exact: Fraction | None = None
    tangential: bool = False

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def as_dict(self) -> dict[str, object]:
        return {
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "exact": format_rational(self.exact) if self.exact is not None else None,
            "tangential": self.tangential,
            "coefficients": [format_rational(c) for c in self.coefficients],
        }


def first_touch_time(
    a: MotionSegment,
    b: MotionSegment,
    t0: Fraction,
    t1: Fraction,
    threshold_sq: Fraction = ONE,
    *,
    bracket_bits: int = 40,
) -> TouchTime | None:
    dist_a, dist_b, dist_c = squared_distance_polynomial(a, b, t0, t1)
    q = (dist_a, dist_b, dist_c - threshold_sq)
    start_value = evaluate(q, t0)
    if start_value < 0:
        raise IntervalError("agentes ja se tocam no inicio do intervalo")
    if start_value == 0:
        return TouchTime(q, t0, t0, exact=t0)
    if dist_a == 0:
        # no relative motion: the distance is constant
        return None

    vertex = -dist_b / (2 * dist_a)
    lowest = min(max(vertex, t0), t1)
    if evaluate(q, lowest) > 0:
        return None

    discriminant = dist_b * dist_b - 4 * dist_a * q[2]
    tangential = discriminant == 0
    root = exact_sqrt(discriminant)
    if root is not None:
        exact = (-dist_b - root) / (2 * dist_a)
        return TouchTime(q, exact, exact, exact=exact, tangential=tangential)

    lo, hi = t0, lowest
    width = Fraction(1, 2**bracket_bits)
    while hi - lo > width:
        middle = (lo + hi) / 2
        if evaluate(q, middle) > 0:
            lo = middle
        else:
            hi = middle
    return TouchTime(q, lo, hi, tangential=tangential)
