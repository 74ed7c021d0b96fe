from __future__ import annotations

import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from rendezvous.formats import dump_json, scenario_to_dict
from rendezvous.forms import InputError, load_sweep_spec
from rendezvous.kernel import ProtocolViolation
from rendezvous.scalar import RationalFormatError, parse_rational
from rendezvous.sweeps import generate_scenario, verify_batch

logger = logging.getLogger(__name__)

EXIT_VIOLATION = 1
EXIT_DISAGREEMENT = 2
EXIT_INPUT = 3


class Command(BaseCommand):
    help = "Compara o executor exato com o oraculo de amostragem densa."

    def add_arguments(self, parser):
        parser.add_argument("--spec", required=True, help="Arquivo JSON da varredura.")
        parser.add_argument("--dt", default=None, help="Passo do oraculo (racional). Padrao: 1/1024.")
        parser.add_argument("--out", default="verify-failures", help="Diretorio para cenarios divergentes.")
        parser.add_argument("--workers", type=int, default=None, help="Processos paralelos.")
        parser.add_argument("--strict-loop-guard", action="store_true", help="Usa a guarda estrita (i < lambda) do LoseContact.")

    def handle(self, *args, **options):
        try:
            spec = load_sweep_spec(
                options["spec"],
                default_max_denominator=settings.RENDEZVOUS_MAX_DENOMINATOR,
                overrides={"strict_loop_guard": True} if options["strict_loop_guard"] else None,
            )
            dt = parse_rational(options["dt"] or settings.RENDEZVOUS_ORACLE_DT)
            if dt <= 0:
                raise RationalFormatError("--dt precisa ser positivo")
        except InputError as exc:
            raise CommandError("\n".join(exc.lines), returncode=EXIT_INPUT) from exc
        except RationalFormatError as exc:
            raise CommandError(str(exc), returncode=EXIT_INPUT) from exc
        workers = options["workers"] or settings.RENDEZVOUS_SWEEP_WORKERS

        try:
            outcome = verify_batch(spec, dt, workers=workers, bracket_bits=settings.RENDEZVOUS_TOUCH_BRACKET_BITS)
        except ProtocolViolation as exc:
            logger.exception("Erro de protocolo durante a verificacao seed=%s", spec.seed)
            raise CommandError(f"violacao de protocolo: {exc}", returncode=EXIT_VIOLATION) from exc

        self.stdout.write(dump_json(outcome.as_dict()), ending="")
        disagreements = outcome.disagreements
        if disagreements:
            out = Path(options["out"])
            out.mkdir(parents=True, exist_ok=True)
            for run in disagreements:
                scenario = generate_scenario(spec, run["index"])
                (out / f"{run['index']}.json").write_text(dump_json(scenario_to_dict(scenario)), encoding="utf-8")
            raise CommandError(
                f"{len(disagreements)} divergencias com o oraculo; cenarios em {out}", returncode=EXIT_DISAGREEMENT
            )
