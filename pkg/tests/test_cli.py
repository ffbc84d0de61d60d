import json
import math

import pandas as pd
import pytest
from click.testing import CliRunner

from cli import EXIT_FAILURE, EXIT_INVALID, EXIT_OK, cli


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, ['--env', 'testing', *args])


def read_json(path):
    with open(path, encoding='utf-8') as handle:
        return json.load(handle)


def test_examples_lists_the_registry(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'examples')
    assert result.exit_code == EXIT_OK
    assert 's2-height' in result.output and 't2-cos' in result.output


def test_involutions_report(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'involutions', '--kmax', '3', '--grid', '64', '-o', 'inv.json')
        assert result.exit_code == EXIT_OK, result.output
        report = read_json('inv.json')
    spectra = report["lemma"]["spectra"]
    assert spectra["1"]["observed"] == pytest.approx([2.0])
    assert spectra["2"]["observed"] == pytest.approx([4 - 2 * math.sqrt(2), 4 + 2 * math.sqrt(2)])
    assert report["run"]["command"] == "involutions"
    assert "PASS" in result.output


def test_involutions_rejects_coarse_grid(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'involutions', '--kmax', '5', '--grid', '32')
    assert result.exit_code == EXIT_INVALID


def test_degenerate_example_is_invalid_input(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'homology', 'r1-x4')
    assert result.exit_code == EXIT_INVALID
    assert 'not Morse-Bott' in result.output


def test_unknown_example(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'homology', 'no-such-example')
    assert result.exit_code == EXIT_INVALID


def test_homology_reports_are_reproducible(runner):
    with runner.isolated_filesystem():
        first = invoke(runner, 'homology', 's2-height', '-o', 'a.json')
        second = invoke(runner, 'homology', 's2-height', '-o', 'b.json')
        assert first.exit_code == second.exit_code == EXIT_OK
        with open('a.json', 'rb') as a, open('b.json', 'rb') as b:
            assert a.read() == b.read()
        report = read_json('a.json')
    assert report["betti"] == [1, 0, 1]
    assert report["schema"] == "1"


def test_homology_csv(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'homology', 's2-height', '--format', 'csv', '-o', 'h.csv')
        assert result.exit_code == EXIT_OK
        table = pd.read_csv('h.csv')
    assert list(table["label"]) == ["S", "N"]


def test_default_report_path(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'morse-bott', 's2-z2')
        assert result.exit_code == EXIT_OK
        assert read_json('reports/morse-bott-s2-z2.json')["passed"]


def test_novikov_selftest(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'novikov', 'selftest', '--samples', '20', '--seed', '1', '-o', 'nv.json')
        assert result.exit_code == EXIT_OK, result.output
        assert read_json('nv.json')["inversions_failed"] == 0


def test_moment_regular_level(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'moment', 's1-c2', '--points', '5', '-o', 'm.json')
        assert result.exit_code == EXIT_OK, result.output
        assert read_json('m.json')["h2"]["quotient_dim"] == 2


def test_moment_at_the_origin_fails(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'moment', 's1-c2', '--tau', '0', '--points', '5', '-o', 'm.json')
        assert result.exit_code == EXIT_FAILURE
        assert read_json('m.json')["run"]["overrides"] == {"tau": [0.0]}


def test_bad_tau(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'moment', 'toric-rank2', '--tau', '1,2,3')
    assert result.exit_code == EXIT_INVALID


def test_run_file_seed_and_search(runner):
    with runner.isolated_filesystem():
        with open('run.toml', 'w', encoding='utf-8') as handle:
            handle.write('[run]\nseed = 11\n\n[search]\nscan_points = 16\n')
        result = runner.invoke(cli, ['--env', 'testing', '--config', 'run.toml',
                                     'homology', 's2-height', '-o', 'h.json'])
        assert result.exit_code == EXIT_OK, result.output
        run = read_json('h.json')["run"]
    assert run["seed"] == 11
    assert run["overrides"] == {"scan_points": 16.0}


def test_cascade_pair_needs_both_labels(runner):
    with runner.isolated_filesystem():
        result = invoke(runner, 'cascades', 's2-z2', '--source', 'N')
    assert result.exit_code == EXIT_INVALID
