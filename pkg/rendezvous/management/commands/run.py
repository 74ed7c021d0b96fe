from __future__ import annotations

import logging
from dataclasses import replace
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from rendezvous.bounds import summarize_run
from rendezvous.formats import default_csv_step, dump_json, scenario_to_dict, write_positions_csv, write_trace
from rendezvous.forms import InputError, load_scenario
from rendezvous.kernel import ProtocolViolation
from rendezvous.labels import LabelError
from rendezvous.scalar import RationalFormatError, parse_rational
from rendezvous.simulator import ScenarioError, simulate

logger = logging.getLogger(__name__)

EXIT_VIOLATION = 1
EXIT_INPUT = 3


class Command(BaseCommand):
    help = "Executa um cenario e grava relatorio, trace e (opcionalmente) CSV de posicoes."

    def add_arguments(self, parser):
        parser.add_argument("--scenario", required=True, help="Arquivo JSON do cenario.")
        parser.add_argument("--trace", help="Destino do trace JSONL.")
        parser.add_argument("--csv", help="Destino do CSV de posicoes amostradas.")
        parser.add_argument("--csv-step", help="Passo de amostragem do CSV (racional). Padrao: (x+y)/1024.")
        parser.add_argument("--report", help="Destino do relatorio JSON. Padrao: saida padrao.")
        parser.add_argument("--strict-loop-guard", action="store_true", help="Usa a guarda estrita (i < lambda) do LoseContact.")

    def handle(self, *args, **options):
        digits = settings.RENDEZVOUS_DECIMAL_DIGITS
        try:
            scenario = load_scenario(options["scenario"])
            if options["strict_loop_guard"]:
                scenario = replace(scenario, strict_loop_guard=True)
            csv_step = parse_rational(options["csv_step"]) if options["csv_step"] else default_csv_step(scenario)
            if csv_step <= 0:
                raise RationalFormatError("--csv-step precisa ser positivo")
        except InputError as exc:
            raise CommandError("\n".join(exc.lines), returncode=EXIT_INPUT) from exc
        except (ScenarioError, LabelError, RationalFormatError) as exc:
            raise CommandError(str(exc), returncode=EXIT_INPUT) from exc

        if scenario.loop_guard:
            logger.info("LoseContact em modo %s (L=%s, lambda=%s)", scenario.loop_guard, scenario.space.L, scenario.space.lam)

        try:
            result = simulate(scenario, bracket_bits=settings.RENDEZVOUS_TOUCH_BRACKET_BITS)
        except ProtocolViolation as exc:
            logger.exception("Erro de protocolo do agente %s apos %s eventos", exc.agent, len(exc.trace))
            raise CommandError(f"violacao de protocolo (agente {exc.agent}): {exc}", returncode=EXIT_VIOLATION) from exc

        summary = summarize_run(scenario, result.report, digits)
        payload = {
            "scenario": scenario_to_dict(scenario),
            "report": result.report.as_dict(digits),
            "summary": summary,
        }
        if options["report"]:
            Path(options["report"]).write_text(dump_json(payload), encoding="utf-8")
        else:
            self.stdout.write(dump_json(payload), ending="")

        if options["trace"]:
            with open(options["trace"], "w", encoding="utf-8", newline="\n") as stream:
                write_trace(result.trace, stream, digits)
        if options["csv"]:
            with open(options["csv"], "w", encoding="utf-8", newline="") as stream:
                rows = write_positions_csv(result, stream, csv_step, digits)
            logger.debug("CSV com %s linhas gravado em %s", rows, options["csv"])

        if summary["violation"]:
            logger.warning("Cenario %s violou o limite: %s", options["scenario"], summary["violation"])
            raise CommandError(summary["violation"], returncode=EXIT_VIOLATION)
        if options["report"]:
            self.stdout.write(self.style.SUCCESS(f"Cenario executado: {result.report.outcome}."))
