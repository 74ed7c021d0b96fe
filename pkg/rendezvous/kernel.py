"""Contract between agent programs and the executor.

A program is a pair of pure functions over a value state: ``init`` builds the
state for a label, ``step`` consumes one sensor reading and returns the new
state plus the next action. Readings are delivered at appearance and at the
end of every non-terminal action, nowhere else.
"""
from __future__ import annotations

import enum
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Protocol, TypeVar, Union

from .geometry import CardinalDirection
from .labels import LabelSpace
from .scalar import format_rational


class ProtocolViolation(Exception):
    def __init__(self, message: str, *, agent: str | None = None, trace: list[Any] | None = None) -> None:
        super().__init__(message)
        self.agent = agent
        self.trace = trace or []


@dataclass(frozen=True)
class Move:
    direction: CardinalDirection
    duration: Fraction

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ProtocolViolation(f"movimento com duracao nao positiva: {self.duration}")


@dataclass(frozen=True)
class Wait:
    duration: Fraction

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ProtocolViolation(f"espera com duracao nao positiva: {self.duration}")


@dataclass(frozen=True)
class HaltForever:
    pass


Action = Union[Move, Wait, HaltForever]


def describe_action(action: Action) -> dict[str, str]:
    if isinstance(action, Move):
        return {"type": "move", "direction": action.direction.name, "duration": format_rational(action.duration)}
    if isinstance(action, Wait):
        return {"type": "wait", "duration": format_rational(action.duration)}
    return {"type": "halt"}


class Compare(enum.Enum):
    SMALLER = "smaller"
    EQUAL = "equal"
    LARGER = "larger"


class OpaqueLevel:
    """Sensor level: grows with distance and only supports comparison."""

    __slots__ = ("_hidden",)

    def __init__(self, hidden: Fraction) -> None:
        self._hidden = hidden

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OpaqueLevel):
            return NotImplemented
        return self._hidden == other._hidden

    def __lt__(self, other: OpaqueLevel) -> bool:
        return self._hidden < other._hidden

    def __gt__(self, other: OpaqueLevel) -> bool:
        return self._hidden > other._hidden

    def __hash__(self) -> int:
        return hash(self._hidden)

    def __repr__(self) -> str:
        return "OpaqueLevel(...)"


def compare_levels(previous: OpaqueLevel, current: OpaqueLevel) -> Compare:
    """How the current distance relates to the previous one (Procedure Test)."""
    if previous < current:
        return Compare.LARGER
    if previous == current:
        return Compare.EQUAL
    return Compare.SMALLER


# strictly increasing maps on non-negative rationals
DISTORTIONS: dict[str, Callable[[Fraction], Fraction]] = {
    "identity": lambda value: value,
    "affine": lambda value: value + 7,
    "cubic": lambda value: value**3,
}


@dataclass(frozen=True)
class Absent:
    pass


@dataclass(frozen=True)
class Present:
    level: OpaqueLevel


MonotoneReading = Union[Absent, Present]


class BinaryReading(enum.Enum):
    NEAR = "near"
    FAR = "far"


Reading = Union[Absent, Present, BinaryReading]


def monotone_reading(present: bool, dist_sq: Fraction, distortion: str = "identity") -> MonotoneReading:
    if not present:
        return Absent()
    return Present(OpaqueLevel(DISTORTIONS[distortion](dist_sq)))


def binary_reading(present: bool, dist_sq: Fraction, rho_sq: Fraction) -> BinaryReading:
    # only the verdict crosses this boundary; absence and distance >= ρ collapse to FAR
    return BinaryReading.NEAR if present and dist_sq < rho_sq else BinaryReading.FAR


def describe_reading(reading: Reading) -> str:
    if isinstance(reading, Absent):
        return "absent"
    if isinstance(reading, Present):
        return "present"
    return reading.value


StateT = TypeVar("StateT")


class AgentProgram(Protocol[StateT]):
    model: str

    def init(self, label: int, space: LabelSpace) -> StateT: ...

    def step(self, state: StateT, reading: Any) -> tuple[StateT, Action]: ...

    def phase(self, state: StateT) -> str: ...

    def describe(self, state: StateT) -> Mapping[str, Any]: ...
