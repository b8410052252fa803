from pathlib import Path

from denoising.estimators import denoise
from denoising.serializers import DenoiseSerializer
from denoising.utils.textio import format_matrix, read_matrix, write_matrix

from ._base import DenoisingCommand


class Command(DenoisingCommand):
    help = 'Denoises one matrix file with the chosen estimator.'
    serializer_class = DenoiseSerializer
    fields = ('variant', 'r', 't', 'star_statistic')

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('input', help='Matrix file: one row per line, whitespace or comma separated.')
        parser.add_argument('--variant', help='tsvd, refactor, refactor_plus, refactor_star, jl or jl_star.')
        parser.add_argument('--r', type=int)
        parser.add_argument('--t', type=int)
        parser.add_argument('--star-statistic', help='refactor or correlation (ReFACTor* ranking).')

    def run(self, **options):
        data = self.gather(options)
        out = data.pop('out', None)
        data.pop('threads')
        config, _ = self.validated(data)

        Y = read_matrix(options['input'])
        result = denoise(Y, config)
        retained = None
        if result.selection is not None:
            retained = ' '.join(str(j + 1) for j in result.selection.retained)

        comment = f"{config.variant.value} r={config.r}"
        if config.variant.selects_columns:
            comment += f" t={config.t}"
        if out:
            write_matrix(Path(out), result.estimate, comment=comment)
            if retained is not None:
                self.stdout.write(f"retained columns: {retained}")
            self.stdout.write(self.style.SUCCESS(f"{Y.shape[0]}x{Y.shape[1]} estimate written to {out}"))
        else:
            if retained is not None:
                comment += f"\nretained columns: {retained}"
            self.stdout.write(format_matrix(result.estimate, comment=comment), ending='')
