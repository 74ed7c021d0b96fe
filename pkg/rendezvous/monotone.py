"""Meeting with a precise (monotone) sensor.

The procedures Test, GetCloser, Dance, VerticalApproach and
HorizontalApproach are flattened into one resumable machine: every action
ends with a reading, and ``phase`` says how that reading is interpreted.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any

from .geometry import CardinalDirection
from .kernel import (
    Absent,
    Action,
    Compare,
    HaltForever,
    MonotoneReading,
    Move,
    OpaqueLevel,
    Present,
    ProtocolViolation,
    compare_levels,
)
from .labels import LabelSpace, transform
from .scalar import HALF, ONE, QUARTER

N, E, S, W = CardinalDirection.N, CardinalDirection.E, CardinalDirection.S, CardinalDirection.W


class Phase(enum.Enum):
    AWAIT_APPEARANCE = "await_appearance"
    VERTICAL_FIRST = "vertical_first"
    VERTICAL_SECOND = "vertical_second"
    VERTICAL_RETURN = "vertical_return"
    DANCE = "dance"
    DANCE_BACKTRACK = "dance_backtrack"
    GET_CLOSER = "get_closer"
    HORIZONTAL_PROBE = "horizontal_probe"
    HORIZONTAL_RETURN = "horizontal_return"
    INERT_FOREVER = "inert_forever"
    FINISHED = "finished"


class Stage(enum.Enum):
    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"


@dataclass(frozen=True)
class MonotoneState:
    bits: tuple[int, ...]
    phase: Phase = Phase.AWAIT_APPEARANCE
    compare: Compare | None = None
    sim: bool = False
    j: int = 0
    i: int = 0
    attempt: int = 0
    previous: OpaqueLevel | None = None
    current: OpaqueLevel | None = None
    heading: CardinalDirection | None = None
    step_length: Fraction = ONE
    stage: Stage = Stage.VERTICAL

    @property
    def lam(self) -> int:
        return len(self.bits)

    def bit(self, index: int) -> int:
        return self.bits[index - 1]


def _test(state: MonotoneState, level: OpaqueLevel) -> MonotoneState:
    return replace(state, previous=state.current, current=level, compare=compare_levels(state.current, level))


def _refresh(state: MonotoneState, level: OpaqueLevel) -> MonotoneState:
    return replace(state, previous=state.current, current=level)


class MonotoneProgram:
    model = "monotone"

    def init(self, label: int, space: LabelSpace) -> MonotoneState:
        return MonotoneState(bits=transform(label, space).bits)

    def step(self, state: MonotoneState, reading: MonotoneReading) -> tuple[MonotoneState, Action]:
        if state.phase in (Phase.INERT_FOREVER, Phase.FINISHED):
            raise ProtocolViolation(f"leitura entregue a agente parado ({state.phase.value})")
        if state.phase is Phase.AWAIT_APPEARANCE:
            if isinstance(reading, Absent):
                return replace(state, phase=Phase.INERT_FOREVER), HaltForever()
            return replace(state, phase=Phase.VERTICAL_FIRST, current=reading.level), Move(N, ONE)
        if not isinstance(reading, Present):
            raise ProtocolViolation("o outro agente nao pode desaparecer do plano")
        return self._HANDLERS[state.phase](self, state, reading.level)

    def phase(self, state: MonotoneState) -> str:
        if state.phase is Phase.AWAIT_APPEARANCE:
            return "initial"
        if state.phase is Phase.INERT_FOREVER:
            return "inert"
        if state.phase is Phase.DANCE:
            return "dance"
        if state.phase in (Phase.HORIZONTAL_PROBE, Phase.HORIZONTAL_RETURN, Phase.FINISHED):
            return "horizontal"
        if state.phase is Phase.GET_CLOSER:
            return state.stage.value
        return "vertical"

    def describe(self, state: MonotoneState) -> dict[str, Any]:
        return {
            "phase": state.phase.value,
            "sim": state.sim,
            "j": state.j or None,
            "compare": state.compare.value if state.compare else None,
        }

    # VerticalApproach

    def _vertical_first(self, state: MonotoneState, level: OpaqueLevel) -> tuple[MonotoneState, Action]:
        state = _test(state, level)
        if state.compare is Compare.SMALLER:
            return self._enter_get_closer(state, N, HALF, Stage.VERTICAL)
        if state.compare is Compare.LARGER:
            return replace(state, phase=Phase.VERTICAL_RETURN), Move(S, ONE)
        return replace(state, phase=Phase.VERTICAL_SECOND), Move(N, ONE)

    def _vertical_second(self, state: MonotoneState, level: OpaqueLevel) -> tuple[MonotoneState, Action]:
        state = _test(state, level)
        if state.compare is Compare.LARGER:
            return replace(state, phase=Phase.VERTICAL_RETURN), Move(S, ONE)
        return self._dance_move(replace(state, sim=True, i=1, attempt=1))

    def _vertical_return(self, state: MonotoneState, level: OpaqueLevel) -> tuple[MonotoneState, Action]:
        return self._enter_get_closer(_test(state, level), S, HALF, Stage.VERTICAL)

    # Dance

    def _dance_move(self, state: MonotoneState) -> tuple[MonotoneState, Action]:
        direction = N if state.bit(state.i) == 1 else S
        return replace(state, phase=Phase.DANCE), Move(direction, Fraction(1, 2**state.i))

    def _dance(self, state: MonotoneState, level: OpaqueLevel) -> tuple[MonotoneState, Action]:
        state = _test(state, level)
        if state.compare is Compare.EQUAL:
            if state.attempt == 1:
                return self._dance_move(replace(state, attempt=2))
            if state.i == state.lam:
                raise ProtocolViolation("Dance esgotou os bits sem quebrar a simetria: rotulos iguais?")
            return self._dance_move(replace(state, i=state.i + 1, attempt=1))

        j = state.i
        state = replace(state, j=j)
        backtrack = Fraction(1, 2**j)
        if state.compare is Compare.SMALLER:
            if state.bit(j) == 1:
                return replace(state, phase=Phase.DANCE_BACKTRACK, heading=N), Move(S, backtrack)
            return replace(state, phase=Phase.DANCE_BACKTRACK, heading=S), Move(N, backtrack)
        # larger: the approach direction is known, so the first step is taken unconditionally
        heading = S if state.bit(j) == 1 else N
        return self._get_closer_step(replace(state, heading=heading, step_length=QUARTER, stage=Stage.VERTICAL))

    def _dance_backtrack(self, state: MonotoneState, level: OpaqueLevel) -> tuple[MonotoneState, Action]:
        # no Test after the backtrack: compare keeps the value that ended Dance
        return self._enter_get_closer(_refresh(state, level), state.heading, QUARTER, Stage.VERTICAL)

    # GetCloser

    def _enter_get_closer(
        self, state: MonotoneState, heading: CardinalDirection, step_length: Fraction, stage: Stage
    ) -> tuple[MonotoneState, Action]:
        state = replace(state, heading=heading, step_length=step_length, stage=stage)
        if state.compare is Compare.SMALLER:
            return self._get_closer_step(state)
        return self._finish_get_closer(state)

    def _get_closer_step(self, state: MonotoneState) -> tuple[MonotoneState, Action]:
        return replace(state, phase=Phase.GET_CLOSER), Move(state.heading, state.step_length)

    def _get_closer(self, state: MonotoneState, level: OpaqueLevel) -> tuple[MonotoneState, Action]:
        state = _test(state, level)
        if state.compare is Compare.SMALLER:
            return self._get_closer_step(state)
        return self._finish_get_closer(state)

    def _finish_get_closer(self, state: MonotoneState) -> tuple[MonotoneState, Action]:
        if state.stage is Stage.VERTICAL:
            return self._start_horizontal(state)
        return replace(state, phase=Phase.FINISHED), HaltForever()

    # HorizontalApproach

    def _start_horizontal(self, state: MonotoneState) -> tuple[MonotoneState, Action]:
        heading = E if not state.sim or state.bit(state.j) == 1 else W
        return replace(state, phase=Phase.HORIZONTAL_PROBE, heading=heading, stage=Stage.HORIZONTAL), Move(heading, ONE)

    def _horizontal_probe(self, state: MonotoneState, level: OpaqueLevel) -> tuple[MonotoneState, Action]:
        state = _test(state, level)
        if state.compare is Compare.SMALLER:
            return self._enter_get_closer(state, state.heading, ONE, Stage.HORIZONTAL)
        back = state.heading.opposite
        return replace(state, phase=Phase.HORIZONTAL_RETURN, heading=back), Move(back, ONE)

    def _horizontal_return(self, state: MonotoneState, level: OpaqueLevel) -> tuple[MonotoneState, Action]:
        return self._enter_get_closer(_test(state, level), state.heading, ONE, Stage.HORIZONTAL)

    _HANDLERS = {
        Phase.VERTICAL_FIRST: _vertical_first,
        Phase.VERTICAL_SECOND: _vertical_second,
        Phase.VERTICAL_RETURN: _vertical_return,
        Phase.DANCE: _dance,
        Phase.DANCE_BACKTRACK: _dance_backtrack,
        Phase.GET_CLOSER: _get_closer,
        Phase.HORIZONTAL_PROBE: _horizontal_probe,
        Phase.HORIZONTAL_RETURN: _horizontal_return,
    }
