"""Seeded scenario generation, sweeps and dual-engine verification."""
from __future__ import annotations

import hashlib
import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .bounds import BoundReport, summarize_run
from .geometry import Point
from .labels import LabelSpace, worst_case_pair
from .oracle import OracleConfig, compare_with_oracle, oracle_run
from .scalar import ONE, ZERO, format_rational, to_decimal_string
from .simulator import Scenario, run_scenario

logger = logging.getLogger(__name__)

GENERATOR_VERSION = "rendezvous-gen/1"
START_OFFSETS = ("simultaneous", "fixed", "random")
DEFAULT_L_GRID = {
    "monotone": (2, 16, 1024, 2**20),
    "binary": (4, 2**8, 2**16),
}
DEFAULT_RHO_GRID = (Fraction(4), Fraction(16), Fraction(64), Fraction(256))
# every tenth simultaneous monotone scenario places a one-bit Dance trap
TRAP_EVERY = 10
# every `small_every`-th monotone draw stays within this distance, where Dance dominates x+y
SMALL_BAND = Fraction(3)
_MAX_DRAWS = 1000


@dataclass(frozen=True)
class SweepSpec:
    seed: int
    count: int
    model: str = "monotone"
    L_grid: tuple[int, ...] = ()
    D_min: Fraction = Fraction(17, 16)
    D_max: Fraction = Fraction(1000)
    rho_grid: tuple[Fraction, ...] = DEFAULT_RHO_GRID
    start_offset: str = "random"
    offset: Fraction = Fraction(16)
    max_denominator: int = 2**16
    probe_lambdas: tuple[int, ...] = (4, 8, 16)
    probe_rho: Fraction = Fraction(16)
    out_of_contract: bool = False
    distortion: str = "identity"
    strict_loop_guard: bool = False
    small_every: int = 4

    @property
    def labels_grid(self) -> tuple[int, ...]:
        return self.L_grid or DEFAULT_L_GRID[self.model]


def scenario_rng(seed: int, index: int) -> random.Random:
    digest = hashlib.sha256(f"{GENERATOR_VERSION}|{seed}|{index}".encode()).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))


def _rational(rng: random.Random, low: Fraction, high: Fraction, max_denominator: int) -> Fraction:
    denominator = rng.randint(1, max_denominator)
    lo = math.ceil(low * denominator)
    hi = math.floor(high * denominator)
    if hi < lo:
        return low
    return Fraction(rng.randint(lo, hi), denominator)


def _offset_vector(
    rng: random.Random, d_min: Fraction, d_max: Fraction, max_denominator: int, *, exclusive_max: bool = False
) -> tuple[Fraction, Fraction]:
    for _ in range(_MAX_DRAWS):
        dx = _rational(rng, -d_max, d_max, max_denominator)
        dy = _rational(rng, -d_max, d_max, max_denominator)
        dist_sq = dx * dx + dy * dy
        inside = dist_sq < d_max * d_max if exclusive_max else dist_sq <= d_max * d_max
        if d_min * d_min <= dist_sq and inside:
            return dx, dy
    # vertical fallback keeps the generator total
    return ZERO, (d_min + d_max) / 2


def _starts(rng: random.Random, spec: SweepSpec) -> tuple[Fraction, Fraction]:
    if spec.start_offset == "simultaneous" or spec.out_of_contract:
        return ZERO, ZERO
    delay = spec.offset if spec.start_offset == "fixed" else _rational(rng, ZERO, spec.offset, spec.max_denominator)
    return (ZERO, delay) if rng.random() < 0.5 else (delay, ZERO)


def _trap_scenario(rng: random.Random, spec: SweepSpec, space: LabelSpace) -> Scenario:
    """Labels differing only at bit j, vertical gap 2^-j, the one-bit agent to the South."""
    j = rng.randint(1, space.lam)
    mask = 1 << (space.lam - j)
    base = rng.randrange(space.L) & ~mask
    low, high = base, base | mask
    if high >= space.L:
        low, high = worst_case_pair(space)
        j = space.lam
    gap = Fraction(1, 2**j)
    reach = max(spec.D_min, Fraction(2))
    horizontal = _rational(rng, reach, max(reach, min(spec.D_max, reach * 4)), spec.max_denominator)
    south = Point(ZERO, ZERO)
    north = Point(horizontal, gap)
    # the agent holding bit 1 starts South
    return Scenario(
        model="monotone",
        space=space,
        label_a=high,
        label_b=low,
        pos_a=south,
        pos_b=north,
        distortion=spec.distortion,
    )


def _monotone_reach(spec: SweepSpec, index: int) -> Fraction:
    if spec.small_every and index % spec.small_every == 0 and spec.D_min < SMALL_BAND:
        return min(spec.D_max, SMALL_BAND)
    return spec.D_max


def generate_scenario(spec: SweepSpec, index: int) -> Scenario:
    rng = scenario_rng(spec.seed, index)
    space = LabelSpace.from_size(rng.choice(spec.labels_grid))
    if spec.model == "monotone" and spec.start_offset == "simultaneous" and index % TRAP_EVERY == TRAP_EVERY - 1:
        return _trap_scenario(rng, spec, space)

    label_a, label_b = rng.sample(range(space.L), 2)
    radius = spec.D_max
    pos_a = Point(
        _rational(rng, -radius, radius, spec.max_denominator),
        _rational(rng, -radius, radius, spec.max_denominator),
    )
    rho = None
    if spec.model == "binary":
        rho = rng.choice(spec.rho_grid)
        if spec.out_of_contract:
            dx, dy = _offset_vector(rng, rho, 2 * rho, spec.max_denominator)
        else:
            dx, dy = _offset_vector(rng, ONE + Fraction(1, spec.max_denominator), rho, spec.max_denominator, exclusive_max=True)
    else:
        dx, dy = _offset_vector(rng, spec.D_min, _monotone_reach(spec, index), spec.max_denominator)
    start_a, start_b = _starts(rng, spec)
    return Scenario(
        model=spec.model,
        space=space,
        label_a=label_a,
        label_b=label_b,
        pos_a=pos_a,
        pos_b=pos_a.translated(dx, dy),
        start_a=start_a,
        start_b=start_b,
        rho=rho,
        distortion=spec.distortion if spec.model == "monotone" else "identity",
        strict_loop_guard=spec.strict_loop_guard,
    )


def _run_one(spec: SweepSpec, index: int, bracket_bits: int) -> tuple[dict[str, Any], Scenario]:
    scenario = generate_scenario(spec, index)
    report, _ = run_scenario(scenario, bracket_bits=bracket_bits)
    summary = summarize_run(scenario, report)
    summary["index"] = index
    return summary, scenario


def _map_runs(function, spec: SweepSpec, workers: int, *args: Any) -> list[Any]:
    indices = range(spec.count)
    if workers <= 1:
        return [function(spec, index, *args) for index in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(function, spec, index, *args) for index in indices]
        return [future.result() for future in futures]


def lower_bound_probe(lambdas: tuple[int, ...], rho: Fraction, *, bracket_bits: int = 40) -> list[dict[str, Any]]:
    """Worst meeting time over a fixed placement family for labels differing only at bit λ."""
    placements = [
        (ZERO, rho / 2),
        (rho / 2, ZERO),
        (rho / 4, rho / 2),
        (ZERO, rho * 3 / 4),
    ]
    entries = []
    previous = None
    for lam in sorted(lambdas):
        space = LabelSpace.from_size(2**lam)
        low, high = worst_case_pair(space)
        worst = ZERO
        for dx, dy in placements:
            for label_a, label_b in ((low, high), (high, low)):
                scenario = Scenario(
                    model="binary",
                    space=space,
                    label_a=label_a,
                    label_b=label_b,
                    pos_a=Point(ZERO, ZERO),
                    pos_b=Point(dx, dy),
                    rho=rho,
                )
                report, _ = run_scenario(scenario, bracket_bits=bracket_bits)
                if not report.met:
                    entries.append({"lambda": lam, "violation": f"sem encontro na sonda ({report.outcome})"})
                    continue
                worst = max(worst, report.elapsed)
        violation = None
        if previous is not None and worst < previous:
            violation = f"tempo de pior caso decresceu em lambda={lam}"
        entries.append(
            {
                "lambda": lam,
                "L": space.L,
                "rho": format_rational(rho),
                "worst_time": to_decimal_string(worst),
                "reference": format_rational(rho * lam),
                "ratio": to_decimal_string(worst / (rho * lam)),
                "violation": violation,
            }
        )
        previous = worst
    return entries


@dataclass
class SweepOutcome:
    spec: SweepSpec
    report: BoundReport
    scenarios: dict[int, Scenario] = field(default_factory=dict)

    @property
    def failing(self) -> dict[int, Scenario]:
        return {run["index"]: self.scenarios[run["index"]] for run in self.report.ordered_runs if run["violation"]}


def run_sweep(spec: SweepSpec, *, workers: int = 1, bracket_bits: int = 40, probe: bool = True) -> SweepOutcome:
    logger.info("Iniciando varredura %s: seed=%s, %s cenarios", spec.model, spec.seed, spec.count)
    if spec.model == "binary":
        logger.info("LoseContact em modo %s", "strict" if spec.strict_loop_guard else "closing_probe")
    outcome = SweepOutcome(spec, BoundReport())
    for summary, scenario in _map_runs(_run_one, spec, workers, bracket_bits):
        outcome.report.add(summary)
        outcome.scenarios[summary["index"]] = scenario
    if spec.model == "binary":
        outcome.report.check_drift()
        if probe and spec.probe_lambdas and not spec.out_of_contract:
            outcome.report.probe = lower_bound_probe(spec.probe_lambdas, spec.probe_rho, bracket_bits=bracket_bits)
    logger.info("Varredura concluida: %s violacoes", len(outcome.report.violations))
    return outcome


def _verify_one(spec: SweepSpec, index: int, dt: Fraction, bracket_bits: int) -> dict[str, Any]:
    scenario = generate_scenario(spec, index)
    config = OracleConfig(dt=dt)
    report, _ = run_scenario(scenario, bracket_bits=bracket_bits)
    verdict = oracle_run(scenario, config)
    agreement = compare_with_oracle(report, verdict, config)
    gap = None
    if report.touch is not None and verdict.met:
        gap = verdict.time - report.touch.lo
    return {
        "index": index,
        "met": report.met,
        "oracle_met": verdict.met,
        "agrees": agreement.agrees,
        "excluded": agreement.excluded,
        "reason": agreement.reason,
        "gap": format_rational(gap) if gap is not None else None,
        "samples": verdict.samples,
    }


@dataclass
class VerifyOutcome:
    spec: SweepSpec
    dt: Fraction
    runs: list[dict[str, Any]]

    @property
    def disagreements(self) -> list[dict[str, Any]]:
        return [run for run in self.runs if not run["agrees"]]

    @property
    def excluded(self) -> list[dict[str, Any]]:
        return [run for run in self.runs if run["excluded"]]

    @property
    def max_gap(self) -> Fraction | None:
        gaps = [Fraction(run["gap"]) for run in self.runs if run["gap"] is not None and not run["excluded"]]
        return max(gaps) if gaps else None

    def as_dict(self) -> dict[str, Any]:
        considered = len(self.runs) - len(self.excluded)
        agreeing = considered - len(self.disagreements)
        return {
            "runs": len(self.runs),
            "dt": format_rational(self.dt),
            "agreement": to_decimal_string(Fraction(agreeing, considered), 6) if considered else None,
            "max_gap": format_rational(self.max_gap) if self.max_gap is not None else None,
            "excluded": [{"index": run["index"], "reason": run["reason"]} for run in self.excluded],
            "disagreements": self.disagreements,
        }


def verify_batch(spec: SweepSpec, dt: Fraction, *, workers: int = 1, bracket_bits: int = 40) -> VerifyOutcome:
    logger.info("Verificando %s cenarios contra o oraculo (dt=%s)", spec.count, format_rational(dt))
    runs = _map_runs(_verify_one, spec, workers, dt, bracket_bits)
    outcome = VerifyOutcome(spec, dt, sorted(runs, key=lambda run: run["index"]))
    for run in outcome.disagreements:
        logger.warning("Executor e oraculo discordam no cenario %s: %s", run["index"], run["reason"])
    return outcome

