"""Independent meeting check by dense sampling of the executed trajectories.

The oracle replays a scenario with touch detection switched off and walks a
fixed time grid, so it never calls ``first_touch_time``. Far apart agents
are skipped ahead: relative speed is at most 2, so the distance cannot drop
to 1 sooner than ``(lower_bound - 1) / 2`` time units later.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from .geometry import squared_distance
from .scalar import ONE, format_rational
from .simulator import MeetingReport, Scenario, simulate

logger = logging.getLogger(__name__)

# precision of the distance lower bound used to skip samples
_SKIP_BITS = 16


@dataclass(frozen=True)
class OracleConfig:
    dt: Fraction = Fraction(1, 1024)

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt do oraculo precisa ser positivo")


@dataclass(frozen=True)
class OracleVerdict:
    met: bool
    time: Fraction | None
    samples: int


def _distance_lower_bound(dist_sq: Fraction) -> Fraction:
    scale = 4**_SKIP_BITS
    return Fraction(math.isqrt(dist_sq.numerator * scale // dist_sq.denominator), 2**_SKIP_BITS)


def oracle_run(scenario: Scenario, config: OracleConfig | None = None) -> OracleVerdict:
    config = config or OracleConfig()
    result = simulate(scenario, detect_touch=False)
    tracks = result.cursors()

    start = scenario.later_start
    deadline = scenario.deadline
    settled = result.report.outcome == "halted"
    end_time = result.report.end_time
    k = 0
    samples = 0
    while True:
        t = start + k * config.dt
        if t > deadline:
            return OracleVerdict(False, None, samples)
        samples += 1
        dist_sq = squared_distance(tracks["a"].position_at(t), tracks["b"].position_at(t))
        if dist_sq <= 1:
            return OracleVerdict(True, t, samples)
        if settled and t >= end_time:
            # both agents rest from here on
            return OracleVerdict(False, None, samples)
        bound = _distance_lower_bound(dist_sq)
        k += max(1, math.floor((bound - ONE) / (2 * config.dt)))


@dataclass(frozen=True)
class Agreement:
    agrees: bool
    excluded: bool
    reason: str


def compare_with_oracle(
    report: MeetingReport, verdict: OracleVerdict, config: OracleConfig | None = None
) -> Agreement:
    """Check an executor report against the oracle within one grid step."""
    config = config or OracleConfig()
    touch = report.touch
    if report.tangential:
        logger.info("Toque tangencial excluido da comparacao com o oraculo")
        return Agreement(True, True, "tangential")
    if touch is None:
        if verdict.met:
            return Agreement(False, False, f"oraculo encontrou encontro em {format_rational(verdict.time)}")
        return Agreement(True, False, "no meeting")
    if not verdict.met:
        if touch.hi + config.dt > report.scenario.deadline:
            return Agreement(True, True, "near budget")
        return Agreement(False, False, "oraculo nao encontrou o encontro")
    if touch.lo <= verdict.time <= touch.hi + config.dt:
        return Agreement(True, False, "met")
    return Agreement(
        False,
        False,
        f"oraculo em {format_rational(verdict.time)} fora de [{format_rational(touch.lo)}, {format_rational(touch.hi)}] + dt",
    )
