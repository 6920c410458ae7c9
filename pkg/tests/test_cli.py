"""Tests for the qgm command line"""

import json
import logging
import math

import numpy as np
import pytest

from src.cli import EXIT_COMPUTATION, EXIT_OK, EXIT_USAGE, build_parser, dispatch
from src.varieties import hypercube_matrix


def run(capsys, *argv):
    code = dispatch([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def matrix_file(path, rows):
    path.write_text(json.dumps({'n': len(rows), 'scalar': 'rational', 'rows': rows}), encoding='utf-8')
    return path


def diagonal(entries):
    n = len(entries)
    return [[entries[i] if i == j else '0' for j in range(n)] for i in range(n)]


class TestUsage:
    def test_version(self, capsys):
        code, out = run(capsys, '--version')
        assert code == EXIT_OK
        assert out.startswith('qgm ')

    def test_unknown_command(self, capsys):
        code, doc = run_json(capsys, 'frobnicate')
        assert code == EXIT_USAGE
        assert doc['error'] == 'usage'

    def test_zero_count(self, capsys):
        code, doc = run_json(capsys, 'sample', 'qcmi', '--count', '0')
        assert code == EXIT_USAGE
        assert doc['error'] == 'usage'

    def test_xlsx_needs_out(self, capsys):
        code, doc = run_json(capsys, 'toric', 'ideal', '--N', '2', '--format', 'xlsx')
        assert code == EXIT_USAGE
        assert 'xlsx' in doc['detail']

    def test_bad_split(self, capsys, tmp_path):
        rho = matrix_file(tmp_path / 'rho.json', diagonal(['1/8'] * 8))
        code, _ = run(capsys, 'qcmi', '--rho', rho, '--split', 'A=1', 'Q=2')
        assert code == EXIT_USAGE

    def test_model_source_is_exclusive(self, capsys, data_dir):
        code, _ = run(capsys, 'toric', 'gv', '--graph', 'chain3', '--gens', data_dir / 'fig1.paulis')
        assert code == EXIT_USAGE

    def test_help_describes_output_streams(self):
        text = ' '.join(build_parser().format_help().split())
        assert 'Error documents always go to stdout, never to --out' in text
        assert 'logs go to stderr' in text


class TestErrors:
    def test_qcmi_sampler_needs_chain(self, capsys):
        code, doc = run_json(capsys, 'sample', 'qcmi', '--graph', 'fig1')
        assert code == EXIT_COMPUTATION
        assert doc['error'] == 'graph'

    def test_missing_input(self, capsys, tmp_path):
        code, doc = run_json(capsys, 'entropy', '--rho', tmp_path / 'absent.json')
        assert code == EXIT_COMPUTATION
        assert doc['error'] == 'parse'

    def test_error_goes_to_stdout_not_out_file(self, capsys, tmp_path):
        out = tmp_path / 'entropy.json'
        code, doc = run_json(capsys, 'entropy', '--rho', tmp_path / 'absent.json', '--out', out)
        assert code == EXIT_COMPUTATION
        assert doc['error'] == 'parse'
        assert not out.exists()

    def test_degree_bound(self, capsys):
        code, doc = run_json(capsys, 'toric', 'ideal', '--N', '1', '--degree', '1')
        assert code == EXIT_COMPUTATION
        assert doc['error'] == 'degree_bound'
        assert 'witness' in doc['context']


class TestQuantities:
    def test_entropy(self, capsys, tmp_path):
        rho = matrix_file(tmp_path / 'rho.json', diagonal(['1/2', '1/2']))
        code, doc = run_json(capsys, 'entropy', '--rho', rho)
        assert code == EXIT_OK
        assert doc['value'] == pytest.approx(1.0)
        assert doc['unit'] == 'bits'

    def test_qcmi_of_maximally_mixed_state(self, capsys, tmp_path):
        rho = matrix_file(tmp_path / 'rho.json', diagonal(['1/8'] * 8))
        code, doc = run_json(capsys, 'qcmi', '--rho', rho, '--split', 'A=1', 'B=2', 'C=3')
        assert code == EXIT_OK
        assert doc['quantity'] == 'qcmi'
        assert abs(doc['value']) < 1e-12
        assert doc['details']['A'] == [1]

    def test_dkl(self, capsys, tmp_path):
        rho = matrix_file(tmp_path / 'rho.json', diagonal(['1/2', '1/2']))
        sigma = matrix_file(tmp_path / 'sigma.json', diagonal(['1/4', '3/4']))
        code, doc = run_json(capsys, 'dkl', '--rho', rho, '--sigma', sigma)
        assert code == EXIT_OK
        assert doc['value'] == pytest.approx(-1 - 0.5 * math.log2(3 / 16))

    def test_stab_dim(self, capsys, data_dir):
        code, doc = run_json(capsys, 'stab', 'dim', '--gens', data_dir / 'fig1.paulis')
        assert code == EXIT_OK
        assert doc['value'] == 1
        assert doc['details']['k'] == 0

    def test_stab_diag(self, capsys):
        code, doc = run_json(capsys, 'stab', 'diag', '--graph', 'chain3')
        assert code == EXIT_OK
        np.testing.assert_array_equal(doc['A'], hypercube_matrix(3))
        assert doc['norms'] == [8] * 8

    def test_dim_exp_sym(self, capsys):
        code, doc = run_json(capsys, 'dim', 'exp-sym', '--d', '2')
        assert code == EXIT_OK
        assert doc['value'] == 3


class TestVarieties:
    def test_toric_ideal(self, capsys):
        code, doc = run_json(capsys, 'toric', 'ideal', '--N', '3')
        assert code == EXIT_OK
        assert len(doc['generators']) == 10
        assert doc['provenance'] == 'toric'

    def test_toric_ideal_csv(self, capsys):
        code, out = run(capsys, 'toric', 'ideal', '--N', '2', '--format', 'csv')
        assert code == EXIT_OK
        assert out.splitlines()[0] == 'index,degree,terms,polynomial'
        assert len(out.splitlines()) == 3

    def test_gv(self, capsys):
        code, doc = run_json(capsys, 'toric', 'gv', '--graph', 'chain3')
        assert code == EXIT_OK
        assert doc['provenance'] == 'conjugated'
        assert doc['metadata']['n_linear'] == 28

    def test_sample_implicitize_membership(self, capsys, tmp_path):
        samples = tmp_path / 'samples.json'
        code, _ = run(capsys, 'sample', 'qcmi', '--structure', 'block', '--count', '60',
                      '--seed', '3', '--out', samples)
        assert code == EXIT_OK

        kernel = tmp_path / 'kernel.json'
        code, _ = run(capsys, 'implicitize', '--samples', samples, '--degree', '1', '--out', kernel)
        assert code == EXIT_OK
        assert json.loads(kernel.read_text())['kernel_dim'] == 2

        code, doc = run_json(capsys, 'membership', '--samples', samples, '--polys', kernel)
        assert code == EXIT_OK
        assert [row['passed'] for row in doc['rows']] == [True, True]

    def test_sample_csv_header(self, capsys):
        code, out = run(capsys, 'sample', 'gibbs-lssm', '--count', '2', '--format', 'csv')
        assert code == EXIT_OK
        header = out.splitlines()[0].split(',')
        assert header[0] == 'z1' and header[-1] == 'z36'


class TestProjection:
    def test_worked_example(self, capsys, data_dir, worked_rho_star):
        code, doc = run_json(capsys, 'project', '--rho', data_dir / 'worked_example.json', '--graph', 'chain3')
        assert code == EXIT_OK
        assert doc['converged'] is True
        np.testing.assert_allclose(np.array(doc['rho_star']['rows']), worked_rho_star, atol=5e-4)

    def test_model_dimension_mismatch(self, capsys, data_dir):
        code, doc = run_json(capsys, 'project', '--rho', data_dir / 'worked_example.json',
                             '--gens', data_dir / 'fig1.paulis')
        assert code == EXIT_COMPUTATION
        assert doc['error'] == 'shape'

    def test_with_certificates(self, capsys, data_dir):
        code, doc = run_json(capsys, 'project', '--rho', data_dir / 'worked_example.json', '--graph', 'chain3',
                             '--certify', '--n-probe', '4')
        assert code == EXIT_OK
        assert doc['certificates']['passed'] is True

    def test_petz_of_maximally_mixed_state(self, capsys, tmp_path):
        rho = matrix_file(tmp_path / 'rho.json', diagonal(['1/8'] * 8))
        code, doc = run_json(capsys, 'petz', '--rho', rho, '--primed')
        assert code == EXIT_OK
        assert doc['distance'] < 1e-12

    def test_primed_petz_on_chain4(self, capsys, tmp_path):
        rho = matrix_file(tmp_path / 'rho.json', diagonal(['1/16'] * 16))
        code, doc = run_json(capsys, 'petz', '--rho', rho, '--graph', 'chain4', '--primed')
        assert code == EXIT_OK
        assert doc['distance'] < 1e-12


class TestRunRecords:
    def test_record_and_replay(self, capsys, tmp_path):
        out = tmp_path / 'ideal.json'
        code, _ = run(capsys, 'toric', 'ideal', '--N', '3', '--out', out)
        assert code == EXIT_OK
        record = json.loads((tmp_path / 'ideal.json.run.json').read_text())
        assert record['argv'][:2] == ['toric', 'ideal']
        assert isinstance(record['seed'], int)
        assert record['outputs'] == [str(out)]
        assert 'numpy' in record['versions']

        first = out.read_bytes()
        out.unlink()
        code, _ = run(capsys, 'replay', tmp_path / 'ideal.json.run.json')
        assert code == EXIT_OK
        assert out.read_bytes() == first

    def test_replay_reproduces_samples(self, capsys, tmp_path):
        out = tmp_path / 'samples.json'
        assert run(capsys, 'sample', 'qcmi', '--count', '3', '--seed', '11', '--out', out)[0] == EXIT_OK
        first = out.read_bytes()
        assert run(capsys, 'replay', f"{out}.run.json")[0] == EXIT_OK
        assert out.read_bytes() == first

    def test_replay_warns_on_changed_input(self, capsys, tmp_path, caplog):
        rho = matrix_file(tmp_path / 'rho.json', diagonal(['1/2', '1/2']))
        out = tmp_path / 'entropy.json'
        assert run(capsys, 'entropy', '--rho', rho, '--out', out)[0] == EXIT_OK
        record = json.loads((tmp_path / 'entropy.json.run.json').read_text())
        assert str(rho) in record['input_digests']

        matrix_file(rho, diagonal(['1/4', '3/4']))
        with caplog.at_level(logging.WARNING, logger='src.cli'):
            assert run(capsys, 'replay', f"{out}.run.json")[0] == EXIT_OK
        assert any('changed' in r.message for r in caplog.records)

    def test_replay_of_missing_record(self, capsys, tmp_path):
        code, doc = run_json(capsys, 'replay', tmp_path / 'absent.run.json')
        assert code == EXIT_COMPUTATION
        assert doc['error'] == 'parse'
