from __future__ import annotations

import json
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from rendezvous.formats import dump_json, scenario_to_dict, spec_to_dict
from rendezvous.forms import InputError, load_sweep_spec
from rendezvous.kernel import ProtocolViolation
from rendezvous.models import RunRecord, SweepRecord
from rendezvous.sweeps import SweepOutcome, run_sweep

logger = logging.getLogger(__name__)

EXIT_VIOLATION = 1
EXIT_INPUT = 3


class Command(BaseCommand):
    help = "Gera cenarios a partir de uma semente, executa todos e agrega o relatorio de limites."

    def add_arguments(self, parser):
        parser.add_argument("--spec", required=True, help="Arquivo JSON da varredura.")
        parser.add_argument("--out", required=True, help="Diretorio de saida.")
        parser.add_argument("--workers", type=int, default=None, help="Processos paralelos.")
        parser.add_argument("--record", action="store_true", help="Grava a varredura no banco de dados.")
        parser.add_argument("--strict-loop-guard", action="store_true", help="Usa a guarda estrita (i < lambda) do LoseContact.")

    def handle(self, *args, **options):
        try:
            spec = load_sweep_spec(
                options["spec"],
                default_max_denominator=settings.RENDEZVOUS_MAX_DENOMINATOR,
                overrides={"strict_loop_guard": True} if options["strict_loop_guard"] else None,
            )
        except InputError as exc:
            raise CommandError("\n".join(exc.lines), returncode=EXIT_INPUT) from exc
        workers = options["workers"] or settings.RENDEZVOUS_SWEEP_WORKERS

        try:
            outcome = run_sweep(spec, workers=workers, bracket_bits=settings.RENDEZVOUS_TOUCH_BRACKET_BITS)
        except ProtocolViolation as exc:
            logger.exception("Erro de protocolo durante a varredura seed=%s", spec.seed)
            raise CommandError(f"violacao de protocolo: {exc}", returncode=EXIT_VIOLATION) from exc

        out = Path(options["out"])
        self._write_outputs(out, outcome)
        if options["record"]:
            sweep = self._record(outcome)
            self.stdout.write(f"Varredura registrada com id {sweep.pk}.")

        violations = outcome.report.violations
        if violations:
            raise CommandError(f"{len(violations)} violacoes; detalhes em {out / 'bound_report.json'}", returncode=EXIT_VIOLATION)
        self.stdout.write(self.style.SUCCESS(f"{spec.count} cenarios sem violacoes."))

    def _write_outputs(self, out: Path, outcome: SweepOutcome) -> None:
        out.mkdir(parents=True, exist_ok=True)
        payload = {"spec": spec_to_dict(outcome.spec), **outcome.report.as_dict()}
        (out / "bound_report.json").write_text(dump_json(payload), encoding="utf-8")
        with open(out / "runs.jsonl", "w", encoding="utf-8", newline="\n") as stream:
            for run in outcome.report.ordered_runs:
                stream.write(json.dumps(run, sort_keys=True, separators=(",", ":")) + "\n")
        failing = outcome.failing
        if failing:
            scenarios_dir = out / "scenarios"
            scenarios_dir.mkdir(exist_ok=True)
            for index, scenario in failing.items():
                (scenarios_dir / f"{index}.json").write_text(dump_json(scenario_to_dict(scenario)), encoding="utf-8")

    def _record(self, outcome: SweepOutcome) -> SweepRecord:
        spec = outcome.spec
        report = outcome.report
        sweep = SweepRecord.objects.create(
            seed=str(spec.seed),
            model=spec.model,
            count=spec.count,
            spec=spec_to_dict(spec),
            bound_report=report.as_dict(),
            violation_count=len(report.violations),
        )
        for run in report.ordered_runs:
            RunRecord.objects.create(
                sweep=sweep,
                index=run["index"],
                scenario=scenario_to_dict(outcome.scenarios[run["index"]]),
                met=run["met"],
                time_from_later_start=run["time_decimal"] or "",
                summary=run,
            )
        return sweep
