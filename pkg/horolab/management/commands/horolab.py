import logging

from django.core.management.base import BaseCommand, CommandError

from horolab import status
from horolab import utils
from horolab.config import KINDS, load_config
from horolab.exceptions import ConfigError, assertion_failed, config_error
from horolab.reports import emit_plotdata, write_report
from horolab.runner import ExperimentRunner

logger = logging.getLogger("django-horolab.horolab.command")


class Command(BaseCommand):
    help = "Run one horolab experiment from a JSON config and write report.json plus CSVs."

    def add_arguments(self, parser):
        parser.add_argument("kind", choices=KINDS)
        parser.add_argument("--config", required=True, help="Path to the JSON config.")
        parser.add_argument("--out", default=None, help="Output directory.")
        parser.add_argument(
            "--threads",
            type=int,
            default=None,
            help="Worker threads; falls back to HOROLAB_THREADS.",
        )

    def handle(self, *args, **options):
        kind = options["kind"]
        try:
            raw = load_config(options["config"])
            with utils.override_threads(options["threads"]):
                report = ExperimentRunner().run(raw, kind)
        except ConfigError as e:
            raise CommandError(config_error(e)["error"], returncode=status.EXIT_CONFIG_ERROR)
        except Exception as e:
            logger.exception("%s experiment raised", kind, extra={"kind": kind})
            raise CommandError(
                "{}: {}".format(type(e).__name__, e), returncode=status.EXIT_CONFIG_ERROR
            )

        out_dir = options["out"] or report.config.get("output") or utils.get_output_dir()
        path = write_report(report, out_dir)
        for csv_path in emit_plotdata(report, out_dir):
            self.stdout.write(csv_path)
        self.stdout.write(path)
        for warning in report.warnings:
            self.stderr.write("warning: {}".format(warning))

        if report.exit_code != status.EXIT_OK:
            raise CommandError(
                assertion_failed(report.failed_assertions)["error"],
                returncode=report.exit_code,
            )
        self.stdout.write(
            "{} {} ({:.2f}s{})".format(
                kind, report.status, report.wall_clock, ", cached" if report.cached else ""
            )
        )
