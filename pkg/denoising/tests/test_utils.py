import shutil
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from denoising.exceptions import InvalidInputError
from denoising.utils.config import merge_options, read_config
from denoising.utils.textio import format_matrix, format_table, parse_matrix, write_table


class ParseMatrixTests(SimpleTestCase):

    def test_mixed_delimiters_and_comments(self):
        matrix = parse_matrix('# header\n1,2, 3\n\n4\t5 6\n# trailing\n')
        np.testing.assert_array_equal(matrix, [[1, 2, 3], [4, 5, 6]])

    def test_single_row_and_column_stay_two_dimensional(self):
        self.assertEqual(parse_matrix('1 2 3\n').shape, (1, 3))
        self.assertEqual(parse_matrix('1\n2\n').shape, (2, 1))

    def test_rejects_bad_tokens(self):
        with self.assertRaises(InvalidInputError):
            parse_matrix('1 2\n3 x\n')
        with self.assertRaises(InvalidInputError):
            parse_matrix('1 nan\n')
        with self.assertRaises(InvalidInputError):
            parse_matrix('# nothing here\n')

    def test_rejects_ragged_rows(self):
        with self.assertRaises(InvalidInputError):
            parse_matrix('1 2 3\n4 5\n')

    def test_formatted_matrix_reads_back_exactly(self):
        matrix = np.random.default_rng(3).standard_normal((4, 3)) * [1e-200, 1.0, 1e200]
        text = format_matrix(matrix, comment='estimator: tsvd\nretained columns: 1 2')
        self.assertTrue(text.startswith('# estimator: tsvd\n# retained columns: 1 2\n'))
        np.testing.assert_array_equal(parse_matrix(text), matrix)


class TableTests(SimpleTestCase):

    def test_format(self):
        text = format_table(['t', 'tsvd_mse'], [[20, 0.125], [40, True]], digits=4)
        self.assertEqual(text, 't tsvd_mse\n20 0.125\n40 1\n')

    def test_row_width(self):
        with self.assertRaises(ValueError):
            format_table(['a', 'b'], [[1]])

    def test_written_table_matches_formatted(self):
        tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, tmp)
        rows = [[2.0, 1.0 / 3.0, np.int64(7)]]
        write_table(tmp / 'table.dat', ['x', 'refactor_mse', 'seed'], rows)
        self.assertEqual((tmp / 'table.dat').read_text(), format_table(['x', 'refactor_mse', 'seed'], rows))
        self.assertEqual(format_table(['x'], []), 'x\n')


class ConfigTests(SimpleTestCase):

    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp)

    def test_read_and_merge(self):
        path = self.tmp / 'run.cfg'
        path.write_text('scan-values = 1, 2  # inline\nreplicates=5\n\n# note\nlabel = file\n')
        values = read_config(path)
        self.assertEqual(values, {'scan_values': '1, 2', 'replicates': '5', 'label': 'file'})
        merged = merge_options({'label': 'flag', 'm': None}, values, {'m': 200, 'replicates': 50})
        self.assertEqual(merged['label'], 'flag')
        self.assertEqual(merged['replicates'], '5')
        self.assertEqual(merged['m'], 200)

    def test_malformed_line(self):
        path = self.tmp / 'bad.cfg'
        path.write_text('replicates 5\n')
        with self.assertRaises(InvalidInputError):
            read_config(path)

    def test_key_without_value(self):
        path = self.tmp / 'bare.cfg'
        path.write_text('label = x\nstrict\n')
        with self.assertRaises(InvalidInputError):
            read_config(path)

    def test_quoted_values(self):
        path = self.tmp / 'quoted.cfg'
        path.write_text('label = "two words"\nnoise = \'student_t\'\n')
        self.assertEqual(read_config(path), {'label': 'two words', 'noise': 'student_t'})

    def test_missing_file(self):
        with self.assertRaises(InvalidInputError):
            read_config(self.tmp / 'absent.cfg')
