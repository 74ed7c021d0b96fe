"""Per-run summaries and their aggregation into a bound report."""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .scalar import ZERO, format_rational, sqrt_decimal, to_decimal_string
from .simulator import MeetingReport, Scenario

logger = logging.getLogger(__name__)

# ceiling on max(time / (ρ·λ)) of the largest cell relative to the smallest
DRIFT_FACTOR = 4
# below this x+y a Dance of almost 2 units can push a simultaneous run past x+y+5
SMALL_SEPARATION = Fraction(4)


def monotone_bound(scenario: Scenario) -> Fraction:
    offset = 5 if scenario.simultaneous else 8
    return scenario.x + scenario.y + offset


def dance_adjusted_bound(scenario: Scenario, dance_time: Fraction) -> Fraction:
    """Simultaneous bound with the unit Dance allowance replaced by the measured Dance duration."""
    return monotone_bound(scenario) - 1 + max(dance_time, Fraction(1))


def _decimal(value: Fraction | None, digits: int) -> str | None:
    return to_decimal_string(value, digits) if value is not None else None


def summarize_run(scenario: Scenario, report: MeetingReport, digits: int = 12) -> dict[str, Any]:
    """Summary of one run; running the same scenario again reproduces it exactly."""
    elapsed = report.elapsed
    span = scenario.x + scenario.y
    summary: dict[str, Any] = {
        "model": scenario.model,
        "L": scenario.space.L,
        "lambda": scenario.space.lam,
        "labels": [scenario.label_a, scenario.label_b],
        "simultaneous": scenario.simultaneous,
        "x": format_rational(scenario.x),
        "y": format_rational(scenario.y),
        "D": sqrt_decimal(scenario.initial_distance_sq, digits),
        "met": report.met,
        "outcome": report.outcome,
        "time": format_rational(elapsed) if elapsed is not None else None,
        "time_decimal": _decimal(elapsed, digits),
        "tangential": report.tangential,
        "out_of_contract": scenario.out_of_contract,
        "phases": {agent: details["phase"] for agent, details in report.agents.items()},
        "violation": None,
    }
    if scenario.model == "monotone":
        bound = monotone_bound(scenario)
        summary["bound"] = format_rational(bound)
        summary["ratio_xy"] = _decimal(elapsed / span, digits) if elapsed is not None and span else None
        dance = max(Fraction(details["phase_durations"].get("dance", "0")) for details in report.agents.values())
        summary["dance_time"] = format_rational(dance)
        summary["small_separation"] = scenario.simultaneous and span < SMALL_SEPARATION
        summary["dance_overshoot"] = False
        if not report.met:
            summary["violation"] = f"sem encontro ({report.outcome})"
        elif elapsed > bound:
            if scenario.simultaneous and elapsed <= dance_adjusted_bound(scenario, dance):
                summary["dance_overshoot"] = True
            else:
                summary["violation"] = f"tempo {format_rational(elapsed)} acima de x+y+{bound - span}"
    else:
        reference = scenario.rho * scenario.space.lam
        variables = {agent: details["variables"] for agent, details in report.agents.items()}
        summary["rho"] = format_rational(scenario.rho)
        summary["ratio_rho_lambda"] = _decimal(elapsed / reference, digits) if elapsed is not None else None
        summary["loop_guard"] = scenario.loop_guard
        summary["leading"] = [variables[agent]["leading"] for agent in sorted(variables)]
        summary["leader_decided"] = any(v["lose_contact_done"] for v in variables.values())
        summary["violation"] = _binary_violation(scenario, report, variables)
    return summary


def _binary_violation(scenario: Scenario, report: MeetingReport, variables: dict[str, dict[str, Any]]) -> str | None:
    if scenario.out_of_contract:
        if report.outcome == "budget_exhausted":
            return "fora de contrato sem parada dos agentes"
        return None
    if not report.met:
        return f"sem encontro ({report.outcome})"
    # a meeting during LoseContact leaves no leader; BoundReport lists those runs
    if not any(v["lose_contact_done"] for v in variables.values()):
        return None
    leaders = sum(1 for v in variables.values() if v["leading"])
    if leaders != 1:
        return f"quebra de simetria com {leaders} agentes lideres"
    return None


@dataclass
class BoundReport:
    runs: list[dict[str, Any]] = field(default_factory=list)
    probe: list[dict[str, Any]] = field(default_factory=list)
    drift: dict[str, Any] | None = None

    def add(self, summary: dict[str, Any]) -> None:
        self.runs.append(summary)
        if summary["violation"]:
            logger.warning("Violacao no cenario %s: %s", summary.get("index"), summary["violation"])
        elif summary.get("dance_overshoot"):
            logger.info("Cenario %s acima de x+y+5 com Dance de %s", summary.get("index"), summary["dance_time"])

    @property
    def ordered_runs(self) -> list[dict[str, Any]]:
        return sorted(self.runs, key=lambda run: run.get("index", 0))

    @property
    def violations(self) -> list[dict[str, Any]]:
        found = [run for run in self.ordered_runs if run["violation"]]
        found.extend(entry for entry in self.probe if entry.get("violation"))
        if self.drift and self.drift.get("violation"):
            found.append(self.drift)
        return found

    @property
    def out_of_contract(self) -> list[int]:
        return [run.get("index") for run in self.ordered_runs if run["out_of_contract"]]

    @property
    def dance_overshoot(self) -> list[dict[str, Any]]:
        """Simultaneous runs past x+y+5 but within the bound rebuilt from their measured Dance."""
        return [
            {key: run.get(key) for key in ("index", "x", "y", "time", "bound", "dance_time")}
            for run in self.ordered_runs
            if run.get("dance_overshoot")
        ]

    @property
    def small_separation(self) -> list[int]:
        return [run.get("index") for run in self.ordered_runs if run.get("small_separation")]

    @property
    def leader_undecided(self) -> list[int]:
        """Met binary runs whose agents touched before either finished LoseContact."""
        return [
            run.get("index")
            for run in self.ordered_runs
            if run["model"] == "binary" and run["met"] and run.get("leader_decided") is False
        ]

    def ratio_stats(self, key: str) -> dict[str, str | None]:
        values = [Fraction(run[key]) for run in self.ordered_runs if run.get(key) is not None]
        if not values:
            return {"max": None, "mean": None, "count": 0}
        return {
            "max": to_decimal_string(max(values)),
            "mean": to_decimal_string(sum(values) / len(values)),
            "count": len(values),
        }

    def check_drift(self) -> dict[str, Any] | None:
        """Largest (ρ, L) cell may not exceed the smallest cell's max ratio by more than DRIFT_FACTOR."""
        cells: dict[tuple[Fraction, int], Fraction] = defaultdict(lambda: ZERO)
        for run in self.ordered_runs:
            if run["model"] != "binary" or run.get("ratio_rho_lambda") is None:
                continue
            cell = (Fraction(run["rho"]), run["L"])
            cells[cell] = max(cells[cell], Fraction(run["ratio_rho_lambda"]))
        if len(cells) < 2:
            self.drift = None
            return None
        smallest, largest = min(cells), max(cells)
        violation = None
        if cells[largest] > DRIFT_FACTOR * cells[smallest]:
            violation = "deriva da razao tempo/(rho*lambda) entre as celulas extremas"
        self.drift = {
            "smallest_cell": {"rho": format_rational(smallest[0]), "L": smallest[1], "max_ratio": to_decimal_string(cells[smallest])},
            "largest_cell": {"rho": format_rational(largest[0]), "L": largest[1], "max_ratio": to_decimal_string(cells[largest])},
            "cells": [
                {"rho": format_rational(rho), "L": size, "max_ratio": to_decimal_string(ratio)}
                for (rho, size), ratio in sorted(cells.items())
            ],
            "violation": violation,
        }
        return self.drift

    def as_dict(self) -> dict[str, Any]:
        return {
            "runs": len(self.runs),
            "met": sum(1 for run in self.runs if run["met"]),
            "ratio_xy": self.ratio_stats("ratio_xy"),
            "ratio_rho_lambda": self.ratio_stats("ratio_rho_lambda"),
            "violations": self.violations,
            "out_of_contract": self.out_of_contract,
            "small_separation": self.small_separation,
            "dance_overshoot": self.dance_overshoot,
            "leader_undecided": self.leader_undecided,
            "loop_guard": sorted({run["loop_guard"] for run in self.runs if run.get("loop_guard")}),
            "dance_time_max": max((run["dance_time"] for run in self.runs if "dance_time" in run), key=Fraction, default=None),
            "drift": self.drift,
            "probe": self.probe,
        }
