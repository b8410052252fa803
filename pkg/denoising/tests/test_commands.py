import shutil
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from denoising.serializers import DenoiseSerializer, ExperimentSerializer
from denoising.utils.textio import read_matrix, write_matrix


class CommandTestCase(SimpleTestCase):

    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp)

    def call(self, *args, **kwargs):
        out = StringIO()
        call_command(*args, stdout=out, stderr=StringIO(), **kwargs)
        return out.getvalue()


class DenoiseCommandTests(CommandTestCase):

    def test_identity_tsvd_full_rank(self):
        source = self.tmp / 'eye.txt'
        source.write_text('# identity\n1, 0, 0\n0 1 0\n0 0 1\n')
        target = self.tmp / 'out.txt'
        self.call('denoise', str(source), variant='tsvd', r=3, out=str(target))
        assert_allclose(read_matrix(target), np.eye(3), atol=1e-14)

    def test_retained_columns_are_one_based(self):
        Y = np.outer([1.0, 2.0, 3.0, 4.0], [0.0, 3.0, 0.0, 2.0])
        Y += 0.01 * np.random.default_rng(0).standard_normal((4, 4))
        source = self.tmp / 'y.txt'
        write_matrix(source, Y)
        target = self.tmp / 'x.txt'
        output = self.call('denoise', str(source), variant='refactor', r=1, t=2, out=str(target))
        self.assertIn('retained columns: 2 4', output)
        self.assertEqual(read_matrix(target).shape, (4, 4))

    def test_estimate_to_stdout(self):
        source = self.tmp / 'y.txt'
        write_matrix(source, np.random.default_rng(1).standard_normal((5, 6)))
        output = self.call('denoise', str(source), variant='jl_star', r=1, t=3)
        self.assertIn('# retained columns:', output)
        self.assertEqual(len([line for line in output.splitlines() if not line.startswith('#')]), 5)

    def test_write_read_round_trip_is_exact(self):
        Y = np.random.default_rng(2).standard_normal((4, 3)) * 1e-7
        path = self.tmp / 'y.txt'
        write_matrix(path, Y)
        np.testing.assert_array_equal(read_matrix(path), Y)

    def test_missing_file(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('denoise', str(self.tmp / 'missing.txt'), variant='tsvd', r=1)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_ragged_file(self):
        source = self.tmp / 'bad.txt'
        source.write_text('1 2 3\n4 5\n')
        with self.assertRaises(CommandError) as ctx:
            self.call('denoise', str(source), variant='tsvd', r=1)
        self.assertIn('bad.txt:2', str(ctx.exception))

    def test_invalid_variant(self):
        source = self.tmp / 'eye.txt'
        source.write_text('1 0\n0 1\n')
        with self.assertRaises(CommandError) as ctx:
            self.call('denoise', str(source), variant='pca', r=1)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('variant', str(ctx.exception))

    def test_rank_too_large(self):
        source = self.tmp / 'eye.txt'
        source.write_text('1 0\n0 1\n')
        with self.assertRaises(CommandError) as ctx:
            self.call('denoise', str(source), variant='tsvd', r=3)
        self.assertEqual(ctx.exception.returncode, 1)


class VerifyCommandTests(CommandTestCase):

    def test_theorem_one(self):
        target = self.tmp / 'rows.dat'
        output = self.call('verify', 'T1', out=str(target))
        self.assertIn('holds in at least 95%', output)
        lines = target.read_text().splitlines()
        self.assertEqual(lines[0].split()[:3], ['seed', 'mse_tsvd', 'mse_rf'])
        self.assertEqual(len(lines), 101)

    def test_weak_signal_is_a_precondition_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('verify', 'T1', x=1.0, seeds=5)
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertIn('sqrt(1 + 2 sqrt(beta)) = 1.7321', str(ctx.exception))

    def test_failed_assertion_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('verify', 'L_active', x=0.5, support='gaussian_orthonormalized', seeds=10)
        self.assertEqual(ctx.exception.returncode, 3)

    def test_theorem_two_never_fails(self):
        output = self.call('verify', 'T2', seeds=10)
        self.assertIn('reported, not asserted', output)

    def test_cosine_lemma(self):
        output = self.call('verify', 'L_cosine', seeds=100, x=4.0)
        self.assertIn('holds in at least', output)


class SimulateCommandTests(CommandTestCase):

    def simulate(self, threads, name):
        target = self.tmp / name
        self.call(
            'simulate', scan_variable='t', scan_values='10,30', m=30, n=40, r=2,
            replicates=4, estimators='tsvd,refactor,refactor_star,jl_star', threads=threads, out=str(target),
        )
        return target.read_bytes()

    def test_byte_identical_across_thread_counts(self):
        self.assertEqual(self.simulate(1, 'one.dat'), self.simulate(8, 'eight.dat'))

    def test_table_layout(self):
        lines = self.simulate(1, 'table.dat').decode().splitlines()
        self.assertEqual(lines[0], 't tsvd_mse tsvd_mse_std refactor_mse refactor_mse_std '
                                   'refactor_mse_full refactor_mse_full_std JL_mse_full JL_mse_full_std')
        self.assertEqual([line.split()[0] for line in lines[1:]], ['10', '30'])

    def test_default_name_and_config_precedence(self):
        config = self.tmp / 'run.cfg'
        config.write_text('# small scan\nscan-variable = t\nscan_values = 10, 20\nm = 20\nn = 30\n'
                          'r = 1\nreplicates = 2\nlabel = fromfile\n')
        self.call('simulate', config=str(config), label='fromflag', out=str(self.tmp))
        self.assertTrue((self.tmp / 'fromflag_m=20_r=1_sigma=1_00_x=4_00_n=30_noise=gaussian.dat').exists())

    def test_preset_with_override(self):
        self.call('simulate', preset='fig3', scan_values='20,40', replicates=1, out=str(self.tmp))
        table = self.tmp / 'low-r_m=200_r=1_sigma=1_00_x=4_00_n=200_noise=gaussian.dat'
        self.assertIn('refactor_mse_corr', table.read_text().splitlines()[0])

    def test_unstandardized_heavy_tails(self):
        def tsvd_means(name, **options):
            target = self.tmp / name
            self.call(
                'simulate', scan_variable='x', scan_values='3,6', m=30, n=40, r=2, t=20, replicates=4,
                noise='student_t', df=6, estimators='tsvd', out=str(target), **options,
            )
            return [float(line.split()[1]) for line in target.read_text().splitlines()[1:]]

        standardized = tsvd_means('standardized.dat')
        raw = tsvd_means('raw.dat', no_standardize=True)
        for low, high in zip(standardized, raw):
            self.assertGreater(high, 1.2 * low)

    def test_rejects_decreasing_scan(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('simulate', scan_variable='t', scan_values='30,10', out=str(self.tmp))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_parse_error_is_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('simulate', '--m', 'many')
        self.assertEqual(ctx.exception.returncode, 1)

    def test_threads_must_be_positive(self):
        with self.assertRaises(CommandError):
            self.call('simulate', scan_variable='t', scan_values='10', threads=0, out=str(self.tmp))


class AssocCommandTests(CommandTestCase):

    def run_assoc(self, name, **options):
        target = self.tmp / name
        output = self.call('assoc', out=str(target), **options)
        return target, output

    def test_null_scenario_tracks_diagonal(self):
        target, output = self.run_assoc('null.dat', m=400, n=2000, t=100, background=0.0, null=True, seed=5)
        self.assertIn('unadjusted: inflation', output)
        lines = target.read_text().splitlines()
        self.assertEqual(lines[0], 'exp refactor tsvd jl')
        table = np.array([[float(value) for value in line.split()] for line in lines[1:]])
        bulk = table[: int(0.99 * len(table))]
        for column in range(1, 4):
            self.assertLess(np.max(np.abs(bulk[:, column] - bulk[:, 0])), 0.5)

    def test_fixed_seed_gives_identical_file(self):
        options = dict(m=80, n=200, t=20, seed=3)
        first, _ = self.run_assoc('a.dat', **options)
        second, _ = self.run_assoc('b.dat', **options)
        self.assertEqual(first.read_bytes(), second.read_bytes())


class SerializerTests(SimpleTestCase):

    def test_denoise_takes_no_noise_options(self):
        fields = DenoiseSerializer().fields
        for name in ('sigma', 'noise', 'df', 'standardize'):
            self.assertNotIn(name, fields)

    def test_standardize_reaches_the_noise_spec(self):
        serializer = ExperimentSerializer(data={
            'scan_variable': 'x', 'scan_values': '2, 4', 'noise': 'student_t', 'standardize': 'false',
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)
        spec = serializer.save()
        self.assertFalse(spec.noise.standardize)
        self.assertFalse(ExperimentSerializer.initial_from_spec(spec)['standardize'])
