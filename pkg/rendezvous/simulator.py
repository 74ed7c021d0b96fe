"""Event-driven executor for two agents on an exact global timeline."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .binary import BinaryProgram
from .geometry import MotionSegment, Point, TouchTime, first_touch_time, squared_distance
from .kernel import (
    DISTORTIONS,
    Action,
    HaltForever,
    Move,
    ProtocolViolation,
    Wait,
    binary_reading,
    describe_action,
    describe_reading,
    monotone_reading,
)
from .labels import LabelError, LabelSpace
from .monotone import MonotoneProgram
from .scalar import ONE, ZERO, format_rational, sqrt_decimal, to_decimal_string

logger = logging.getLogger(__name__)

AGENT_IDS = ("a", "b")
MODELS = ("monotone", "binary")
TRACE_SCHEMA_VERSION = 1

# tie order inside one instant
KIND_RANK = {
    "action_end": 0,
    "appear": 1,
    "reading": 2,
    "action_begin": 3,
    "halt": 3,
    "meeting": 4,
    "budget_exhausted": 5,
}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    model: str
    space: LabelSpace
    label_a: int
    label_b: int
    pos_a: Point
    pos_b: Point
    start_a: Fraction = ZERO
    start_b: Fraction = ZERO
    rho: Fraction | None = None
    distortion: str = "identity"
    time_budget: Fraction | None = None
    strict_loop_guard: bool = False

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ScenarioError(f"modelo desconhecido: {self.model!r}")
        for label in (self.label_a, self.label_b):
            if not self.space.contains(label):
                raise LabelError(f"rotulo {label} fora de [0, {self.space.L - 1}]")
        if self.label_a == self.label_b:
            raise LabelError("os agentes precisam de rotulos diferentes")
        if self.start_a < 0 or self.start_b < 0:
            raise ScenarioError("instantes de inicio precisam ser >= 0")
        if self.model == "binary" and (self.rho is None or self.rho <= 1):
            raise ScenarioError("o modelo binario exige rho > 1")
        if self.distortion not in DISTORTIONS:
            raise ScenarioError(f"distorcao desconhecida: {self.distortion!r}")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ScenarioError("orcamento de tempo precisa ser positivo")
        if self.model == "binary" and self.strict_loop_guard and self.space.lam < 2:
            raise ScenarioError("a guarda estrita (i < lambda) exige lambda >= 2")

    @property
    def labels(self) -> dict[str, int]:
        return {"a": self.label_a, "b": self.label_b}

    @property
    def positions(self) -> dict[str, Point]:
        return {"a": self.pos_a, "b": self.pos_b}

    @property
    def starts(self) -> dict[str, Fraction]:
        return {"a": self.start_a, "b": self.start_b}

    @property
    def later_start(self) -> Fraction:
        return max(self.start_a, self.start_b)

    @property
    def simultaneous(self) -> bool:
        return self.start_a == self.start_b

    @property
    def initial_distance_sq(self) -> Fraction:
        return squared_distance(self.pos_a, self.pos_b)

    @property
    def x(self) -> Fraction:
        """Initial vertical separation."""
        return abs(self.pos_a.y - self.pos_b.y)

    @property
    def y(self) -> Fraction:
        """Initial horizontal separation."""
        return abs(self.pos_a.x - self.pos_b.x)

    @property
    def out_of_contract(self) -> bool:
        return self.model == "binary" and self.initial_distance_sq >= self.rho * self.rho

    @property
    def loop_guard(self) -> str | None:
        """LoseContact mode of binary runs: ``closing_probe`` (bits 1..λ, then bit λ+1 = 1) or ``strict``."""
        if self.model != "binary":
            return None
        return "strict" if self.strict_loop_guard else "closing_probe"

    @property
    def budget(self) -> Fraction:
        if self.time_budget is not None:
            return self.time_budget
        if self.model == "monotone":
            return 4 * (self.x + self.y) + 64
        return 512 * self.rho * self.space.lam

    @property
    def deadline(self) -> Fraction:
        return self.later_start + self.budget

    def program(self) -> MonotoneProgram | BinaryProgram:
        if self.model == "monotone":
            return MonotoneProgram()
        return BinaryProgram(strict_loop_guard=self.strict_loop_guard)


@dataclass(frozen=True)
class TraceEvent:
    time: Fraction
    agent: str | None
    kind: str
    data: dict[str, Any] = field(default_factory=dict)

    @property
    def sort_key(self) -> tuple[Fraction, int, str]:
        return self.time, KIND_RANK[self.kind], self.agent or ""

    def as_dict(self, digits: int = 12) -> dict[str, Any]:
        return {
            "v": TRACE_SCHEMA_VERSION,
            "time": format_rational(self.time),
            "time_decimal": to_decimal_string(self.time, digits),
            "agent": self.agent,
            "kind": self.kind,
            **self.data,
        }


def _point_data(point: Point) -> list[str]:
    return [format_rational(point.x), format_rational(point.y)]


class AgentSlot:
    """One agent as seen by the executor: program state plus kinematics."""

    def __init__(self, agent: str, scenario: Scenario) -> None:
        self.agent = agent
        self.program = scenario.program()
        self.state = self.program.init(scenario.labels[agent], scenario.space)
        self.label = scenario.labels[agent]
        self.start = scenario.starts[agent]
        self.point = scenario.positions[agent]
        self.appeared = False
        self.halted = False
        self.action: Action | None = None
        self.segment: MotionSegment | None = None
        self.history: list[MotionSegment] = []
        self.phase = self.program.phase(self.state)
        self.phase_durations: dict[str, Fraction] = {}

    def next_instant(self) -> Fraction | None:
        if not self.appeared:
            return self.start
        if self.segment is not None:
            return self.segment.end_time
        return None

    def position_at(self, t: Fraction) -> Point:
        if self.segment is not None:
            return self.segment.position_at(t)
        return self.point

    def motion_over(self, t0: Fraction, t1: Fraction) -> MotionSegment:
        if self.segment is not None:
            return self.segment
        return MotionSegment.inert(self.point, t0, t1)

    def begin(self, action: Action, t: Fraction) -> None:
        self.action = action
        self.phase = self.program.phase(self.state)
        if isinstance(action, Move):
            self.segment = MotionSegment.moving(self.point, action.direction, t, action.duration)
        elif isinstance(action, Wait):
            self.segment = MotionSegment.inert(self.point, t, t + action.duration)
        else:
            self.segment = None
            self.halted = True
            self.history.append(MotionSegment.inert(self.point, t, t))

    def finish_action(self, t: Fraction) -> None:
        self._account(self.segment.start_time, t)
        self.point = self.segment.position_at(t)
        self.history.append(self.segment.restricted(self.segment.start_time, t))
        self.segment = None
        self.action = None

    def interrupt(self, t: Fraction) -> None:
        if self.segment is not None and self.segment.start_time < t:
            self.finish_action(t)

    def _account(self, t0: Fraction, t1: Fraction) -> None:
        self.phase_durations[self.phase] = self.phase_durations.get(self.phase, ZERO) + (t1 - t0)


@dataclass
class MeetingReport:
    scenario: Scenario
    met: bool
    outcome: str
    end_time: Fraction
    touch: TouchTime | None = None
    agents: dict[str, dict[str, Any]] = field(default_factory=dict)
    phase_marks: list[dict[str, Any]] = field(default_factory=list)

    @property
    def time_from_later_start(self) -> tuple[Fraction, Fraction] | None:
        if self.touch is None:
            return None
        later = self.scenario.later_start
        return self.touch.lo - later, self.touch.hi - later

    @property
    def elapsed(self) -> Fraction | None:
        """Upper end of the meeting time bracket, measured from the later start."""
        bracket = self.time_from_later_start
        return bracket[1] if bracket else None

    @property
    def tangential(self) -> bool:
        return bool(self.touch and self.touch.tangential)

    def as_dict(self, digits: int = 12) -> dict[str, Any]:
        scenario = self.scenario
        bracket = self.time_from_later_start
        touch = None
        if self.touch is not None:
            touch = {
                **self.touch.as_dict(),
                "decimal": to_decimal_string(self.touch.midpoint, digits),
                "width": format_rational(self.touch.width),
            }
        return {
            "met": self.met,
            "outcome": self.outcome,
            "touch": touch,
            "time_from_later_start": (
                {
                    "lo": format_rational(bracket[0]),
                    "hi": format_rational(bracket[1]),
                    "decimal": to_decimal_string((bracket[0] + bracket[1]) / 2, digits),
                }
                if bracket
                else None
            ),
            "end_time": format_rational(self.end_time),
            "initial_distance": sqrt_decimal(scenario.initial_distance_sq, digits),
            "x": format_rational(scenario.x),
            "y": format_rational(scenario.y),
            "simultaneous": scenario.simultaneous,
            "out_of_contract": scenario.out_of_contract,
            "tangential": self.tangential,
            "loop_guard": scenario.loop_guard,
            "agents": self.agents,
            "phase_marks": self.phase_marks,
        }


class TrajectoryCursor:
    """Walks one agent's motion history at non-decreasing instants."""

    def __init__(self, history: list[MotionSegment], resting: Point) -> None:
        self.history = history
        self.resting = resting
        self.index = 0

    def position_at(self, t: Fraction) -> Point:
        while self.index < len(self.history) and self.history[self.index].end_time < t:
            self.index += 1
        if self.index == len(self.history):
            return self.resting
        segment = self.history[self.index]
        if t < segment.start_time:
            return segment.start_point
        return segment.position_at(t)


@dataclass
class SimulationResult:
    report: MeetingReport
    trace: list[TraceEvent]
    histories: dict[str, list[MotionSegment]]

    def cursors(self) -> dict[str, TrajectoryCursor]:
        positions = self.report.scenario.positions
        cursors = {}
        for agent, history in self.histories.items():
            resting = history[-1].end_point if history else positions[agent]
            cursors[agent] = TrajectoryCursor(history, resting)
        return cursors


class Simulation:
    def __init__(self, scenario: Scenario, *, bracket_bits: int = 40, detect_touch: bool = True) -> None:
        self.scenario = scenario
        self.bracket_bits = bracket_bits
        self.detect_touch = detect_touch
        self.slots = {agent: AgentSlot(agent, scenario) for agent in AGENT_IDS}
        self.clock = min(scenario.start_a, scenario.start_b)
        self.trace: list[TraceEvent] = []
        self.touch: TouchTime | None = None
        self.outcome: str | None = None
        self.phase_marks: list[dict[str, Any]] = []
        self.rho_sq = scenario.rho * scenario.rho if scenario.rho is not None else None

    @property
    def both_present(self) -> bool:
        return all(slot.appeared for slot in self.slots.values())

    def run(self) -> SimulationResult:
        logger.debug("Iniciando cenario %s em t=%s", self.scenario.model, self.clock)
        self._process_instant(self.clock)
        while self.outcome is None:
            self.advance_to_next_event()
        for slot in self.slots.values():
            slot.interrupt(self.clock)
        logger.debug("Cenario encerrado: %s em t=%s", self.outcome, self.clock)
        return SimulationResult(self._report(), self.trace, {a: s.history for a, s in self.slots.items()})

    def advance_to_next_event(self) -> None:
        pending = [t for t in (slot.next_instant() for slot in self.slots.values()) if t is not None]
        if not pending:
            self.outcome = "halted"
            return
        next_time = min(pending)
        deadline = self.scenario.deadline
        horizon = min(next_time, deadline)

        if self.detect_touch and self.both_present and horizon > self.clock:
            a, b = (slot.motion_over(self.clock, horizon) for slot in self.slots.values())
            touch = first_touch_time(a, b, self.clock, horizon, ONE, bracket_bits=self.bracket_bits)
            if touch is not None:
                self._meet(touch)
                return

        if next_time > deadline:
            self.clock = deadline
            self._emit(deadline, None, "budget_exhausted")
            self.outcome = "budget_exhausted"
            return
        self._process_instant(next_time)

    def _process_instant(self, t: Fraction) -> None:
        self.clock = t
        ending = [s for s in self.slots.values() if s.appeared and s.segment is not None and s.segment.end_time == t]
        appearing = [s for s in self.slots.values() if not s.appeared and s.start == t]

        for slot in ending:
            slot.finish_action(t)
            self._emit(t, slot.agent, "action_end", {"position": _point_data(slot.point)})
        for slot in appearing:
            slot.appeared = True
            self._emit(t, slot.agent, "appear", {"position": _point_data(slot.point)})

        if self.detect_touch and appearing and self.both_present:
            a, b = (slot.position_at(t) for slot in self.slots.values())
            if squared_distance(a, b) <= 1:
                self._meet(TouchTime((ZERO, ZERO, squared_distance(a, b) - 1), t, t, exact=t))
                return

        readers = sorted(ending + appearing, key=lambda slot: slot.agent)
        readings = {slot.agent: self._sense(slot, t) for slot in readers}
        for slot in readers:
            self._emit(t, slot.agent, "reading", {"reading": describe_reading(readings[slot.agent])})
        for slot in readers:
            self._step(slot, readings[slot.agent], t)

    def _sense(self, slot: AgentSlot, t: Fraction) -> Any:
        other = self.slots["b" if slot.agent == "a" else "a"]
        present = other.appeared
        dist_sq = squared_distance(slot.position_at(t), other.position_at(t))
        if self.scenario.model == "monotone":
            return monotone_reading(present, dist_sq, self.scenario.distortion)
        return binary_reading(present, dist_sq, self.rho_sq)

    def _step(self, slot: AgentSlot, reading: Any, t: Fraction) -> None:
        try:
            slot.state, action = slot.program.step(slot.state, reading)
        except ProtocolViolation as exc:
            exc.agent = slot.agent
            exc.trace = list(self.trace)
            raise
        previous_phase = slot.phase
        slot.begin(action, t)
        if slot.phase != previous_phase:
            self._mark_phase(slot, t)
        kind = "halt" if isinstance(action, HaltForever) else "action_begin"
        self._emit(t, slot.agent, kind, {"action": describe_action(action), "phase": slot.phase, "position": _point_data(slot.point)})

    def _mark_phase(self, slot: AgentSlot, t: Fraction) -> None:
        a, b = (s.position_at(t) for s in self.slots.values())
        self.phase_marks.append(
            {
                "agent": slot.agent,
                "phase": slot.phase,
                "time": format_rational(t),
                "vertical_separation": format_rational(abs(a.y - b.y)),
                "horizontal_separation": format_rational(abs(a.x - b.x)),
            }
        )

    def _meet(self, touch: TouchTime) -> None:
        self.touch = touch
        self.clock = touch.hi
        if touch.tangential:
            logger.info("Toque tangencial detectado em %s", to_decimal_string(touch.midpoint))
        self._emit(touch.lo, None, "meeting", {"touch": touch.as_dict()})
        self.outcome = "met"

    def _emit(self, t: Fraction, agent: str | None, kind: str, data: dict[str, Any] | None = None) -> None:
        self.trace.append(TraceEvent(t, agent, kind, data or {}))

    def _report(self) -> MeetingReport:
        agents = {}
        for agent, slot in self.slots.items():
            agents[agent] = {
                "label": slot.label,
                "phase": slot.phase,
                "variables": slot.program.describe(slot.state),
                "phase_durations": {name: format_rational(value) for name, value in sorted(slot.phase_durations.items())},
            }
        return MeetingReport(
            scenario=self.scenario,
            met=self.outcome == "met",
            outcome=self.outcome,
            end_time=self.clock,
            touch=self.touch,
            agents=agents,
            phase_marks=self.phase_marks,
        )


def simulate(scenario: Scenario, *, bracket_bits: int = 40, detect_touch: bool = True) -> SimulationResult:
    return Simulation(scenario, bracket_bits=bracket_bits, detect_touch=detect_touch).run()


def run_scenario(scenario: Scenario, *, bracket_bits: int = 40) -> tuple[MeetingReport, list[TraceEvent]]:
    result = simulate(scenario, bracket_bits=bracket_bits)
    return result.report, result.trace
