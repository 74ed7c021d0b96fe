"""Meeting with a binary (near/far) sensor: LoseContact then TriangleSearch."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any

from .geometry import CardinalDirection
from .kernel import Action, BinaryReading, HaltForever, Move, ProtocolViolation, Wait
from .labels import LabelSpace, transform
from .scalar import HALF, ONE, format_rational

N, E, S, W = CardinalDirection.N, CardinalDirection.E, CardinalDirection.S, CardinalDirection.W

NEAR, FAR = BinaryReading.NEAR, BinaryReading.FAR


class Phase(enum.Enum):
    INITIAL_CHECK = "initial_check"
    LOSE_CONTACT = "lose_contact"
    RETURN_SOUTH = "return_south"
    TRIANGLE_DESCENT = "triangle_descent"
    MIDPOINT_RETURN = "midpoint_return"
    HORIZONTAL_LEAPS = "horizontal_leaps"
    INERT_FOREVER = "inert_forever"


# leap pattern of one round: E d, W 2d, E d
_LEAPS = ((E, 1), (W, 2), (E, 1))


@dataclass(frozen=True)
class BinaryState:
    bits: tuple[int, ...]
    strict_loop_guard: bool = False
    phase: Phase = Phase.INITIAL_CHECK
    leading: bool = False
    lose_contact_done: bool = False
    d: Fraction = ONE
    i: int = 0
    j: int = 0
    t: int = 0
    leap: int = 0

    @property
    def last_bit(self) -> int:
        """Highest bit index processed in one LoseContact pass.

        The strict guard ``i < λ`` stops before c_λ; the default processes
        c_1..c_λ and then a closing probe counted as bit λ+1 with value 1.
        """
        lam = len(self.bits)
        return lam - 1 if self.strict_loop_guard else lam + 1

    def bit(self, index: int) -> int:
        if index > len(self.bits):
            return 1
        return self.bits[index - 1]


class BinaryProgram:
    model = "binary"

    def __init__(self, *, strict_loop_guard: bool = False) -> None:
        self.strict_loop_guard = strict_loop_guard

    def init(self, label: int, space: LabelSpace) -> BinaryState:
        if self.strict_loop_guard and space.lam < 2:
            raise ProtocolViolation("guarda estrita com lambda = 1 gera passadas sem nenhuma acao")
        return BinaryState(bits=transform(label, space).bits, strict_loop_guard=self.strict_loop_guard)

    def step(self, state: BinaryState, reading: BinaryReading) -> tuple[BinaryState, Action]:
        if state.phase is Phase.INERT_FOREVER:
            raise ProtocolViolation("leitura entregue a agente parado para sempre")
        return self._HANDLERS[state.phase](self, state, reading)

    def phase(self, state: BinaryState) -> str:
        if state.phase is Phase.INITIAL_CHECK:
            return "initial"
        if state.phase is Phase.INERT_FOREVER:
            return "inert"
        if state.phase in (Phase.LOSE_CONTACT, Phase.RETURN_SOUTH):
            return "lose_contact"
        if state.phase is Phase.HORIZONTAL_LEAPS:
            return "horizontal_leaps"
        return "triangle"

    def describe(self, state: BinaryState) -> dict[str, Any]:
        return {
            "phase": state.phase.value,
            "leading": state.leading,
            "lose_contact_done": state.lose_contact_done,
            "j": state.j or None,
            "d": format_rational(state.d),
            "t": state.t,
        }

    def _initial_check(self, state: BinaryState, reading: BinaryReading) -> tuple[BinaryState, Action]:
        if reading is FAR:
            return replace(state, phase=Phase.INERT_FOREVER), HaltForever()
        return self._bit_action(replace(state, phase=Phase.LOSE_CONTACT, d=ONE, i=1, leading=False))

    # LoseContact

    def _bit_action(self, state: BinaryState) -> tuple[BinaryState, Action]:
        if state.bit(state.i) == 1:
            return state, Move(N, state.d)
        return state, Wait(state.d)

    def _lose_contact(self, state: BinaryState, reading: BinaryReading) -> tuple[BinaryState, Action]:
        processed = state.i
        if reading is NEAR:
            if processed < state.last_bit:
                return self._bit_action(replace(state, i=processed + 1))
            return self._bit_action(replace(state, i=1, d=2 * state.d))

        state = replace(state, j=processed)
        if state.bit(processed) == 0:
            # the other agent moved away: it searches, this one waits where it is
            return replace(state, phase=Phase.INERT_FOREVER, lose_contact_done=True), HaltForever()
        return replace(state, phase=Phase.RETURN_SOUTH, leading=True), Move(S, HALF)

    def _return_south(self, state: BinaryState, reading: BinaryReading) -> tuple[BinaryState, Action]:
        if reading is FAR:
            return state, Move(S, HALF)
        return replace(state, phase=Phase.TRIANGLE_DESCENT, lose_contact_done=True, t=0), Move(S, HALF)

    # TriangleSearch

    def _triangle_descent(self, state: BinaryState, reading: BinaryReading) -> tuple[BinaryState, Action]:
        state = replace(state, t=state.t + 1)
        if reading is NEAR:
            return state, Move(S, HALF)
        back = math.ceil(Fraction(state.t, 2)) * HALF
        return replace(state, phase=Phase.MIDPOINT_RETURN), Move(N, back)

    def _midpoint_return(self, state: BinaryState, reading: BinaryReading) -> tuple[BinaryState, Action]:
        return self._leap(replace(state, phase=Phase.HORIZONTAL_LEAPS, d=ONE, leap=0))

    def _horizontal_leaps(self, state: BinaryState, reading: BinaryReading) -> tuple[BinaryState, Action]:
        leap = state.leap + 1
        if leap == len(_LEAPS):
            return self._leap(replace(state, leap=0, d=2 * state.d))
        return self._leap(replace(state, leap=leap))

    def _leap(self, state: BinaryState) -> tuple[BinaryState, Action]:
        direction, factor = _LEAPS[state.leap]
        return state, Move(direction, factor * state.d)

    _HANDLERS = {
        Phase.INITIAL_CHECK: _initial_check,
        Phase.LOSE_CONTACT: _lose_contact,
        Phase.RETURN_SOUTH: _return_south,
        Phase.TRIANGLE_DESCENT: _triangle_descent,
        Phase.MIDPOINT_RETURN: _midpoint_return,
        Phase.HORIZONTAL_LEAPS: _horizontal_leaps,
    }
