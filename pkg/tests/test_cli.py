"""
Tests for the command-line front end.
"""
import pytest
import sys
import os
import json
import time

from click.testing import CliRunner

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.cli import EXIT_CONFIG_ERROR, EXIT_MAX_ITERS, EXIT_OK, cli
from app.core.problems import dump_problem, make_box_feasibility, make_rotation_counterexample
from app.utils.file_utils import TRACE_HEADER


@pytest.fixture
def runner(monkeypatch):
    """Click runner with the seed override cleared."""
    monkeypatch.delenv('RINGSPLIT_SEED', raising=False)
    return CliRunner()


class TestSolveCommand:
    """ringsplit solve."""

    def test_quadratic_consensus_converges(self, runner, tmp_path):
        """Seeded n=4, d=5 instance converges and writes a trace."""
        trace = tmp_path / 'trace.csv'
        result = runner.invoke(cli, ['solve', '--builtin', 'quadratic_consensus', '--n', '4', '--d', '5',
                                     '--seed', '7', '--trace', str(trace)])
        assert result.exit_code == EXIT_OK, result.output
        assert 'Converged' in result.output
        assert 'oracle:' in result.output
        lines = trace.read_text(encoding='utf-8').splitlines()
        assert lines[0] == ','.join(TRACE_HEADER)
        last = lines[-1].split(',')
        assert float(last[1]) <= 1e-18
        assert last[3] != ''

    def test_lambda_out_of_range(self, runner):
        """A lambda above 2/L exits 1 and names the bound."""
        result = runner.invoke(cli, ['solve', '--builtin', 'quadratic_consensus', '--lambda', '100'])
        assert result.exit_code == EXIT_CONFIG_ERROR
        assert '2/L' in result.output

    def test_max_iters_exit_code(self, runner):
        """Hitting the iteration limit exits 2."""
        result = runner.invoke(cli, ['solve', '--builtin', 'quadratic_consensus', '--max-iters', '3'])
        assert result.exit_code == EXIT_MAX_ITERS
        assert 'MaxIters' in result.output

    def test_ring_and_sequential_traces_identical(self, runner, tmp_path):
        """Ring and sequential executions write byte-identical trace files."""
        paths = {}
        for mode in ('sequential', 'ring'):
            paths[mode] = tmp_path / f"{mode}.csv"
            result = runner.invoke(cli, ['solve', '--builtin', 'quadratic_consensus', '--n', '3', '--d', '3',
                                         '--exec', mode, '--check-period', '5', '--max-iters', '400',
                                         '--trace', str(paths[mode])])
            assert result.exit_code in (EXIT_OK, EXIT_MAX_ITERS), result.output
        assert paths['sequential'].read_bytes() == paths['ring'].read_bytes()

    def test_ring_message_log_and_state(self, runner, tmp_path):
        """Ring execution writes a JSON-lines message log and a final state file."""
        log, out = tmp_path / 'messages.jsonl', tmp_path / 'state.json'
        result = runner.invoke(cli, ['solve', '--builtin', 'box_feasibility', '--exec', 'ring',
                                     '--max-iters', '20', '--log-messages', str(log), '--out', str(out)])
        assert result.exit_code in (EXIT_OK, EXIT_MAX_ITERS), result.output
        records = [json.loads(line) for line in log.read_text(encoding='utf-8').splitlines()]
        assert records[0]['round'] == 0 and records[0]['payload_tag'] == 'ZValue'
        state = json.loads(out.read_text(encoding='utf-8'))
        assert len(state['x']) == 3 and len(state['z']) == 2

    def test_problem_file_with_algo(self, runner, tmp_path):
        """A JSON problem file is solved in the requested mode."""
        path = dump_problem(make_rotation_counterexample(), str(tmp_path / 'rotation.json'))
        result = runner.invoke(cli, ['solve', '--problem', path, '--algo', 'frb', '--lambda', '0.4'])
        assert result.exit_code == EXIT_OK, result.output

    def test_algo_mismatch_rejected(self, runner):
        """Cocoercive mode cannot take the rotation's monotone forward."""
        result = runner.invoke(cli, ['solve', '--builtin', 'rotation', '--algo', 'fb'])
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_two_sources_rejected(self, runner, tmp_path):
        """A builtin and a problem file together are a configuration error."""
        result = runner.invoke(cli, ['solve', '--builtin', 'rotation', '--problem', str(tmp_path / 'x.json')])
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_two_dimensional_box_solve_is_quick(self, runner, tmp_path):
        """A 2-D box problem with a grid oracle solves and cross-checks in seconds."""
        path = dump_problem(make_box_feasibility([([0.0, -1.0], [1.0, 0.0])] * 3), str(tmp_path / 'boxes.json'))
        out = tmp_path / 'state.json'
        started = time.perf_counter()
        result = runner.invoke(cli, ['solve', '--problem', path, '--max-iters', '2000', '--out', str(out)])
        assert time.perf_counter() - started < 30.0
        assert result.exit_code in (EXIT_OK, EXIT_MAX_ITERS), result.output
        assert json.loads(out.read_text(encoding='utf-8'))['oracle'] == 'GridSearch'

    def test_oversized_grid_skips_cross_check(self, runner, tmp_path):
        """A grid finer than the point limit allows is skipped and the solve still succeeds."""
        spec = make_box_feasibility([([0.0, -1.0], [1.0, 0.0])] * 3, step=1e-4)
        path = dump_problem(spec, str(tmp_path / 'fine.json'))
        out = tmp_path / 'state.json'
        result = runner.invoke(cli, ['solve', '--problem', path, '--max-iters', '2000', '--out', str(out)])
        assert result.exit_code in (EXIT_OK, EXIT_MAX_ITERS), result.output
        assert json.loads(out.read_text(encoding='utf-8'))['oracle'] is None

    def test_seed_environment_overrides_flag(self, runner, monkeypatch, tmp_path):
        """RINGSPLIT_SEED=3 with --seed 7 reproduces --seed 3, not --seed 7."""
        args = ['solve', '--builtin', 'quadratic_consensus', '--n', '3', '--d', '3', '--max-iters', '300']
        traces = {name: tmp_path / f"{name}.csv" for name in ('seed3', 'seed7', 'override')}
        for name, seed in (('seed3', '3'), ('seed7', '7')):
            result = runner.invoke(cli, args + ['--seed', seed, '--trace', str(traces[name])])
            assert result.exit_code in (EXIT_OK, EXIT_MAX_ITERS), result.output
        monkeypatch.setenv('RINGSPLIT_SEED', '3')
        result = runner.invoke(cli, args + ['--seed', '7', '--trace', str(traces['override'])])
        assert result.exit_code in (EXIT_OK, EXIT_MAX_ITERS), result.output
        assert traces['override'].read_bytes() == traces['seed3'].read_bytes()
        assert traces['override'].read_bytes() != traces['seed7'].read_bytes()

    def test_rerun_trace_byte_identical(self, runner, tmp_path):
        """Running the same configuration twice writes the same trace bytes."""
        first, second = tmp_path / 'first.csv', tmp_path / 'second.csv'
        for path in (first, second):
            result = runner.invoke(cli, ['solve', '--builtin', 'mixed_quadratic', '--seed', '11',
                                         '--max-iters', '500', '--trace', str(path)])
            assert result.exit_code in (EXIT_OK, EXIT_MAX_ITERS), result.output
        assert first.read_bytes() == second.read_bytes()


class TestValidateCommand:
    """ringsplit validate."""

    def test_extended_range_accepted(self, runner):
        """n=2 cocoercive, L=1, lambda=3, gamma=0.4 is accepted."""
        result = runner.invoke(cli, ['validate', '--n', '2', '--algo', 'fb', '--L', '1',
                                     '--lambda', '3', '--gamma', '0.4'])
        assert result.exit_code == EXIT_OK
        assert 'accept' in result.output

    def test_lipschitz_bound_reported(self, runner):
        """n=3 frb, L=2, lambda=0.3 is rejected with the bound 1/(2L) = 0.25."""
        result = runner.invoke(cli, ['validate', '--n', '3', '--algo', 'frb', '--L', '2', '--lambda', '0.3'])
        assert result.exit_code == EXIT_CONFIG_ERROR
        assert 'reject' in result.output
        assert '0.25' in result.output

    def test_zero_lipschitz(self, runner):
        """L = 0 accepts any positive lambda with gamma in (0, 1)."""
        result = runner.invoke(cli, ['validate', '--n', '4', '--L', '0', '--lambda', '1000', '--gamma', '0.99'])
        assert result.exit_code == EXIT_OK

    def test_builtin_defaults(self, runner):
        """Without lambda and gamma the defaults for the builtin are validated."""
        result = runner.invoke(cli, ['validate', '--builtin', 'mixed_quadratic'])
        assert result.exit_code == EXIT_OK
        assert 'mode=mixed' in result.output

    def test_missing_inputs(self, runner):
        """Without a problem source both --n and --L are needed."""
        result = runner.invoke(cli, ['validate', '--n', '3'])
        assert result.exit_code == EXIT_CONFIG_ERROR
