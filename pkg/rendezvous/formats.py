from __future__ import annotations

import csv
import json
from dataclasses import fields
from fractions import Fraction
from pathlib import Path
from typing import IO, Any, Iterable

from .geometry import Point, squared_distance
from .scalar import format_rational, sqrt_decimal, to_decimal_string
from .simulator import Scenario, SimulationResult, TraceEvent
from .sweeps import SweepSpec

CSV_COLUMNS = ("time", "x_a", "y_a", "x_b", "y_b", "dist")


class DocumentError(ValueError):
    """Input document that is not valid JSON; carries the position."""

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        location = f"linha {line}, coluna {column}: " if line is not None else ""
        super().__init__(f"{location}{message}")


def load_document(text: str) -> dict[str, Any]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(payload, dict):
        raise DocumentError("o documento precisa ser um objeto JSON")
    return payload


def read_document(path: str | Path) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"nao foi possivel ler {path}: {exc.strerror}") from exc
    return load_document(text)


def dump_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _point(point: Point) -> list[str]:
    return [format_rational(point.x), format_rational(point.y)]


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    """Scenario document accepted back by ``ScenarioForm``."""
    return {
        "model": scenario.model,
        "L": scenario.space.L,
        "label_a": scenario.label_a,
        "label_b": scenario.label_b,
        "pos_a": _point(scenario.pos_a),
        "pos_b": _point(scenario.pos_b),
        "start_a": format_rational(scenario.start_a),
        "start_b": format_rational(scenario.start_b),
        "rho": format_rational(scenario.rho) if scenario.rho is not None else None,
        "time_budget": format_rational(scenario.time_budget) if scenario.time_budget is not None else None,
        "distortion": scenario.distortion,
        "strict_loop_guard": scenario.strict_loop_guard,
    }


def trace_lines(trace: Iterable[TraceEvent], digits: int = 12) -> Iterable[str]:
    for event in trace:
        yield json.dumps(event.as_dict(digits), sort_keys=True, separators=(",", ":")) + "\n"


def write_trace(trace: Iterable[TraceEvent], stream: IO[str], digits: int = 12) -> None:
    stream.writelines(trace_lines(trace, digits))


def default_csv_step(scenario: Scenario) -> Fraction:
    span = scenario.x + scenario.y
    return span / 1024 if span > 0 else Fraction(1, 1024)


def sample_positions(result: SimulationResult, step: Fraction) -> Iterable[tuple[Fraction, Point, Point]]:
    """Positions of both agents every ``step`` from the later start to the end of the run."""
    if step <= 0:
        raise ValueError("passo de amostragem precisa ser positivo")
    scenario = result.report.scenario
    tracks = result.cursors()
    end = result.report.end_time
    t = scenario.later_start
    while t <= end:
        yield t, tracks["a"].position_at(t), tracks["b"].position_at(t)
        t += step


def write_positions_csv(result: SimulationResult, stream: IO[str], step: Fraction, digits: int = 12) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    rows = 0
    for t, a, b in sample_positions(result, step):
        writer.writerow(
            [
                to_decimal_string(t, digits),
                to_decimal_string(a.x, digits),
                to_decimal_string(a.y, digits),
                to_decimal_string(b.x, digits),
                to_decimal_string(b.y, digits),
                sqrt_decimal(squared_distance(a, b), digits),
            ]
        )
        rows += 1
    return rows


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return value


def spec_to_dict(spec: SweepSpec) -> dict[str, Any]:
    payload = {item.name: _jsonable(getattr(spec, item.name)) for item in fields(spec)}
    payload["L_grid"] = list(spec.labels_grid)
    return payload
