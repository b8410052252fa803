"""Shared plumbing for the denoising management commands."""
import logging
import sys

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from denoising.exceptions import (
    DenoisingError,
    InvalidArgumentError,
    InvalidInputError,
    NumericalFailureError,
)
from denoising.utils.config import merge_options, read_config

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_ASSERTION = 3


def store_true_or_none(parser, *flags, **kwargs):
    """Boolean flag that stays ``None`` when absent so config files can set it."""
    parser.add_argument(*flags, action='store_const', const=True, default=None, **kwargs)


class DenoisingCommand(BaseCommand):
    requires_system_checks = []
    serializer_class = None
    # Option names forwarded to the serializer.
    fields = ()

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # Usage errors exit with status 1 instead of argparse's 2.
        parser.called_from_command_line = False
        return parser

    def run_from_argv(self, argv):
        try:
            super().run_from_argv(argv)
        except CommandError as exc:
            self.stderr.write(f"CommandError: {exc}")
            sys.exit(exc.returncode)

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, help='Master seed.')
        parser.add_argument('--threads', type=int, help='Worker threads.')
        parser.add_argument('--out', help='Output file.')
        parser.add_argument('--config', help='key = value file; explicit flags take precedence.')

    def defaults(self):
        return {'seed': settings.DENOISING['MASTER_SEED'], 'threads': settings.DENOISING['THREADS']}

    def gather(self, options, defaults=None):
        """Merge defaults, the ``--config`` file and flags into serializer input."""
        file_values = read_config(options['config']) if options.get('config') else {}
        if options.get('no_standardize'):
            options = {**options, 'standardize': False}
        known = set(self.fields) | {'seed', 'threads', 'out'}
        for key in sorted(set(file_values) - known):
            logger.warning("ignoring unknown config key %r", key)
        file_values = {key: value for key, value in file_values.items() if key in known}
        explicit = {key: options.get(key) for key in known}
        return merge_options(explicit, file_values, defaults if defaults is not None else self.defaults())

    def validated(self, data):
        serializer = self.serializer_class(data=data)
        if not serializer.is_valid():
            raise CommandError(self.format_errors(serializer.errors), returncode=EXIT_USAGE)
        return serializer.save(), serializer.validated_data

    @staticmethod
    def format_errors(errors):
        parts = []
        for field, messages in errors.items():
            text = '; '.join(str(message) for message in messages)
            parts.append(text if field == 'non_field_errors' else f"{field}: {text}")
        return 'invalid arguments: ' + ' | '.join(parts)

    @staticmethod
    def thread_count(value):
        try:
            threads = int(value)
        except (TypeError, ValueError):
            raise CommandError(f"threads must be an integer, got {value!r}", returncode=EXIT_USAGE)
        if threads < 1:
            raise CommandError("threads must be at least 1", returncode=EXIT_USAGE)
        return threads

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except (InvalidArgumentError, InvalidInputError) as exc:
            raise CommandError(str(exc), returncode=EXIT_USAGE)
        except NumericalFailureError as exc:
            raise CommandError(f"numerical failure: {exc}", returncode=EXIT_NUMERICAL)
        except DenoisingError as exc:
            raise CommandError(str(exc), returncode=EXIT_USAGE)
        except OSError as exc:
            raise CommandError(f"I/O error: {exc}", returncode=EXIT_USAGE)

    def run(self, **options):
        raise NotImplementedError
