from pathlib import Path

from django.conf import settings

from denoising.assoc import compare_methods, make_scenario, qq_rows
from denoising.serializers import AssocSerializer
from denoising.utils.textio import write_table

from ._base import DenoisingCommand, store_true_or_none

QQ_HEADER = ['exp', 'refactor', 'tsvd', 'jl']


class Command(DenoisingCommand):
    help = 'Runs the confounder-deflation association pipeline on a synthetic scenario.'
    serializer_class = AssocSerializer
    fields = ('m', 'n', 't', 'x', 'background', 'overlap', 'effect', 'sigma', 'null')

    def add_arguments(self, parser):
        super().add_arguments(parser)
        for name in ('m', 'n', 't'):
            parser.add_argument(f'--{name}', type=int)
        for name in ('x', 'background', 'overlap', 'effect', 'sigma'):
            parser.add_argument(f'--{name}', type=float)
        store_true_or_none(parser, '--null', help='Phenotype independent of every column.')

    def run(self, **options):
        data = self.gather(options)
        threads = self.thread_count(data.pop('threads'))
        out = Path(data.pop('out', None) or 'assoc_qq.dat')
        scenario, validated = self.validated(data)

        results = compare_methods(make_scenario(scenario, seed=validated['seed']), scenario, workers=threads)
        write_table(out, QQ_HEADER, qq_rows(results), digits=settings.DENOISING['TABLE_DIGITS'])
        for method in ('refactor', 'tsvd', 'jl', 'unadjusted'):
            self.stdout.write(f"{method}: inflation {results[method].inflation:.3f}")
        self.stdout.write(self.style.SUCCESS(f"QQ table written to {out}"))
