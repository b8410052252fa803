from pathlib import Path

from django.conf import settings

from denoising.experiments import PRESETS, default_table_name, run_experiment
from denoising.serializers import ExperimentSerializer
from denoising.utils.textio import write_table

from ._base import DenoisingCommand, store_true_or_none


class Command(DenoisingCommand):
    help = 'Runs a Monte Carlo MSE scan over t, x or n and writes the plot table.'
    serializer_class = ExperimentSerializer
    fields = (
        'scan_variable', 'scan_values', 'm', 'n', 'r', 't', 'x', 'sigma', 'noise', 'df', 'standardize',
        'support', 'random_support', 'replicates', 'estimators', 'label',
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--preset', choices=sorted(PRESETS), help='Start from a published scan.')
        parser.add_argument('--scan-variable', choices=['t', 'x', 'n'])
        parser.add_argument('--scan-values', help='Comma-separated, strictly increasing.')
        for name in ('m', 'n', 'r', 't', 'replicates'):
            parser.add_argument(f'--{name}', type=int)
        for name in ('x', 'sigma', 'df'):
            parser.add_argument(f'--{name}', type=float)
        parser.add_argument('--noise', help='gaussian, student_t or uniform.')
        parser.add_argument('--support', help='gaussian_orthonormalized or flat.')
        store_true_or_none(parser, '--random-support', help='Draw the active set at random.')
        store_true_or_none(parser, '--no-standardize', help='Keep Student-t and uniform draws at their natural variance.')
        parser.add_argument('--estimators', help='Comma-separated estimator variants.')
        parser.add_argument('--label', help='Leading tag of the default table name.')

    def run(self, **options):
        defaults = self.defaults()
        defaults['replicates'] = settings.DENOISING['REPLICATES']
        if options.get('preset'):
            preset = ExperimentSerializer.initial_from_spec(PRESETS[options['preset']])
            defaults.update({key: value for key, value in preset.items() if key not in ('seed', 'replicates')})
        data = self.gather(options, defaults)
        threads = self.thread_count(data.pop('threads'))
        out = data.pop('out', None)

        spec, _ = self.validated(data)
        path = Path(out) if out else Path(default_table_name(spec))
        if path.is_dir():
            path = path / default_table_name(spec)

        result = run_experiment(spec, threads=threads)
        write_table(path, result.header, result.table_rows(), digits=settings.DENOISING['TABLE_DIGITS'])
        self.stdout.write(self.style.SUCCESS(
            f"{len(result.cells)} scan points x {spec.replicates} replicates written to {path}"
        ))
