from django.conf import settings
from django.core.management.base import CommandError

from denoising.serializers import VerifySerializer
from denoising.theoryverify import verify_theorem
from denoising.utils.textio import write_table

from ._base import EXIT_ASSERTION, DenoisingCommand, store_true_or_none


class Command(DenoisingCommand):
    help = 'Checks a theorem or lemma by Monte Carlo and reports its success frequency.'
    serializer_class = VerifySerializer
    fields = (
        'theorem', 'm', 'n', 'x', 't', 'sigma', 'noise', 'df', 'standardize', 'support', 'variant',
        'C', 'C0', 'alpha', 'epsilon', 'seeds', 'min_frequency', 'strict',
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('theorem', nargs='?', help='T1, T2, T3, L_inactive, L_active, L_cosine or L_sinval.')
        for name in ('m', 'n', 't', 'seeds'):
            parser.add_argument(f'--{name}', type=int)
        for name in ('x', 'sigma', 'df', 'alpha', 'epsilon'):
            parser.add_argument(f'--{name}', type=float)
        parser.add_argument('--c', dest='C', type=float, help='Constant in b_j^2 > C log n / n.')
        parser.add_argument('--c0', dest='C0', type=float, help='Constant in t <= C0 n / log n.')
        parser.add_argument('--noise')
        parser.add_argument('--support')
        store_true_or_none(parser, '--no-standardize', help='Keep Student-t and uniform draws at their natural variance.')
        parser.add_argument('--variant', help='refactor or refactor_plus.')
        parser.add_argument('--min-frequency', type=float)
        store_true_or_none(parser, '--strict', help='Also enforce the constant-dependent preconditions.')

    def defaults(self):
        defaults = super().defaults()
        defaults.update(
            min_frequency=settings.DENOISING['VERIFY_MIN_FREQUENCY'],
            C=settings.DENOISING['THEORY_C'],
            C0=settings.DENOISING['THEORY_C0'],
            alpha=settings.DENOISING['THEORY_ALPHA'],
            epsilon=settings.DENOISING['THEORY_EPSILON'],
        )
        return defaults

    def run(self, **options):
        data = self.gather(options)
        threads = self.thread_count(data.pop('threads'))
        out = data.pop('out', None)
        params, validated = self.validated(data)

        report = verify_theorem(
            validated['theorem'],
            params,
            n_seeds=validated['seeds'],
            master_seed=validated['seed'],
            threads=threads,
            min_frequency=validated['min_frequency'],
            strict=validated['strict'],
        )
        thresholds = report.threshold_report
        self.stdout.write(
            f"{report.theorem_id}: m={params.m} n={params.n} x={params.x:g} t={params.t} "
            f"sigma={params.noise.sigma:g} beta={thresholds.beta:.4g}"
        )
        self.stdout.write(
            f"  sqrt(1 + 2 sqrt(beta)) = {thresholds.weak_signal_threshold:.4f}, "
            f"beta^(-1/4) = {thresholds.bbp_threshold:.4f}"
        )
        for name, met in thresholds.condition_met.items():
            self.stdout.write(f"  {name}: {'n/a' if met is None else met}")
        self.stdout.write(
            f"frequency {report.frequency:.3f} ({report.successes}/{len(report.rows)}), "
            f"mean margin {report.mean_margin:.6g}"
        )
        if out:
            header = report.header
            write_table(out, header, [[row[key] for key in header] for row in report.rows],
                        digits=settings.DENOISING['TABLE_DIGITS'])

        if not report.asserted:
            self.stdout.write(f"{report.theorem_id} is reported, not asserted.")
        elif report.succeeded:
            self.stdout.write(self.style.SUCCESS(
                f"{report.theorem_id} holds in at least {report.min_frequency:.0%} of replicates."
            ))
        else:
            raise CommandError(
                f"{report.theorem_id}: frequency {report.frequency:.3f} below {report.min_frequency:.3f}",
                returncode=EXIT_ASSERTION,
            )
