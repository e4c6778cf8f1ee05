"""
Test suite for the command-line interface.

Runs each subcommand through click's test runner and checks the output and
the exit codes: 0 success, 1 failed verification, 2 bad input, 3 numeric
failure.
"""

import csv
import io
import json

import pytest
from click.testing import CliRunner

from cli import cli

PASSING_SCENARIO = {
    "name": "uniform L_n",
    "law": "beta(1,1)",
    "statistics": ["L"],
    "n": [20],
    "replicates": 2000,
    "seed": 42,
    "tests": [
        {"statistic": "L", "kind": "ChiSquare", "target": "geometric:0.5"},
        {"statistic": "L", "kind": "MomentZ", "target_mean": 1.0},
    ],
}


class TestSimulate:
    """Test the simulate command"""

    def setup_method(self):
        """Set up test fixtures"""
        self.runner = CliRunner()

    def test_version(self):
        """Test --version"""
        result = self.runner.invoke(cli, ['--version'])
        assert result.exit_code == 0
        assert "1.0.0" in result.output

    def test_csv_to_stdout(self):
        """Test one CSV row per replicate"""
        result = self.runner.invoke(cli, ['simulate', '--law', 'beta(1,1)', '--n', '20', '--replicates', '7',
                                          '--stat', 'L', '--stat', 'K', '--r-max', '2', '--seed', '1'])
        assert result.exit_code == 0, result.output
        rows = list(csv.reader(io.StringIO(result.output)))
        assert rows[0] == ['n', 'K', 'L', 'K_1', 'K_2']
        assert len([r for r in rows[1:] if r]) == 7

    def test_reproducible(self):
        """Test that the same seed gives the same output"""
        args = ['simulate', '--law', 'beta(2,1)', '--n', '15', '--replicates', '5', '--seed', '9']
        assert self.runner.invoke(cli, args).output == self.runner.invoke(cli, args).output

    def test_json_to_file(self, tmp_path):
        """Test the JSON summary written to a file"""
        target = tmp_path / "out" / "batch.json"
        result = self.runner.invoke(cli, ['simulate', '--law', 'beta(1,1)', '--n', '10', '--replicates', '20',
                                          '--stat', 'M', '-f', 'json', '-o', str(target)])
        assert result.exit_code == 0, result.output
        assert "->" in result.output
        document = json.loads(target.read_text(encoding='utf-8'))
        assert document['kind'] == "batch"
        assert document['statistics']['M']['count'] == 20

    def test_shortcut(self):
        """Test --log-n with the shortcut samplers"""
        result = self.runner.invoke(cli, ['simulate', '--law', 'logpareto(0.5)', '--log-n', '50',
                                          '--replicates', '5', '--stat', 'Z', '-f', 'json'])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)['mode'] == "shortcut"

    def test_size_options(self):
        """Test the n / log-n rules"""
        assert self.runner.invoke(cli, ['simulate', '--law', 'beta(1,1)']).exit_code == 2
        both = ['simulate', '--law', 'beta(1,1)', '--n', '5', '--log-n', '5']
        assert self.runner.invoke(cli, both).exit_code == 2
        fractional = ['simulate', '--law', 'beta(1,1)', '--n', '5.5']
        assert self.runner.invoke(cli, fractional).exit_code == 2

    def test_bad_law(self):
        """Test that a malformed law is a usage error"""
        result = self.runner.invoke(cli, ['simulate', '--law', 'beta(1)', '--n', '5'])
        assert result.exit_code == 2
        assert "Error" in result.output

    def test_lattice_law_needs_override(self):
        """Test dirac(p) with and without --allow-lattice"""
        args = ['simulate', '--law', 'dirac(0.5)', '--n', '5', '--replicates', '3', '--stat', 'L']
        assert self.runner.invoke(cli, args).exit_code == 2
        assert self.runner.invoke(cli, args + ['--allow-lattice']).exit_code == 0


class TestExactAndLimits:
    """Test the exact and limits commands"""

    def setup_method(self):
        """Set up test fixtures"""
        self.runner = CliRunner()

    def test_exact_L_table(self):
        """Test the geometric law of L_n for the uniform law"""
        result = self.runner.invoke(cli, ['exact', '--law', 'beta(1,1)', '--n-max', '5', '--stat', 'L',
                                          '-f', 'json'])
        assert result.exit_code == 0, result.output
        document = json.loads(result.output[result.output.index('{'):])
        assert document['statistic'] == "L"

    def test_exact_to_file(self, tmp_path):
        """Test the table file and the mean line"""
        target = tmp_path / "k.csv"
        result = self.runner.invoke(cli, ['exact', '--law', 'beta(1,1)', '--n-max', '4', '--stat', 'K',
                                          '-o', str(target)])
        assert result.exit_code == 0, result.output
        assert "mean at n=4" in result.output
        assert target.read_text(encoding='utf-8').startswith("n,k,probability")

    def test_limits_geometric_grid(self):
        """Test a discrete tabulation on an explicit grid"""
        result = self.runner.invoke(cli, ['limits', '--dist', 'mixedpoisson:1', '--grid', '0:3:4'])
        assert result.exit_code == 0, result.output
        rows = list(csv.reader(io.StringIO(result.output)))
        assert rows[0][:2] == ['k', 'pmf']
        assert float(rows[1][1]) == pytest.approx(0.5, abs=1e-8)
        assert float(rows[2][1]) == pytest.approx(0.25, abs=1e-8)

    def test_limits_bad_input(self):
        """Test malformed handles and grids"""
        assert self.runner.invoke(cli, ['limits', '--dist', 'cauchy']).exit_code == 2
        assert self.runner.invoke(cli, ['limits', '--dist', 'normal', '--grid', 'a:b']).exit_code == 2

    def test_numeric_failure_exit_code(self):
        """Test that a capability failure exits with 3"""
        result = self.runner.invoke(cli, ['limits', '--dist', 'zlimit:logpareto(0.5)'])
        assert result.exit_code == 3
        assert "Numeric failure" in result.output


class TestVerify:
    """Test the verify command"""

    def setup_method(self):
        """Set up test fixtures"""
        self.runner = CliRunner()

    def write_scenario(self, tmp_path, data):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)

    def test_passing_scenario(self, tmp_path):
        """Test exit 0 and the JSON-lines report"""
        report = tmp_path / "reports.jsonl"
        result = self.runner.invoke(cli, ['verify', '--scenario', self.write_scenario(tmp_path, PASSING_SCENARIO),
                                          '--report', str(report)])
        assert result.exit_code == 0, result.output
        assert "2/2 passed" in result.output
        lines = report.read_text(encoding='utf-8').splitlines()
        assert len(lines) == 2
        assert all(json.loads(line)['passed'] for line in lines)

    def test_failing_scenario(self, tmp_path):
        """Test exit 1 when a check fails"""
        data = dict(PASSING_SCENARIO, tests=[{"statistic": "L", "kind": "MomentZ", "target_mean": 5.0}])
        result = self.runner.invoke(cli, ['verify', '--scenario', self.write_scenario(tmp_path, data)])
        assert result.exit_code == 1
        assert "FAIL" in result.output

    def test_invalid_scenario(self, tmp_path):
        """Test that a malformed scenario is a usage error"""
        data = dict(PASSING_SCENARIO, colour="red")
        result = self.runner.invoke(cli, ['verify', '--scenario', self.write_scenario(tmp_path, data)])
        assert result.exit_code == 2

    def test_missing_scenario(self, tmp_path):
        """Test a path that does not exist"""
        result = self.runner.invoke(cli, ['verify', '--scenario', str(tmp_path / "missing.json")])
        assert result.exit_code == 2

    def test_exactly_one_source(self):
        """Test that scenario and suite are exclusive"""
        assert self.runner.invoke(cli, ['verify']).exit_code == 2

    def test_acceptance_criterion(self):
        """Test a single deterministic criterion of the suite"""
        result = self.runner.invoke(cli, ['verify', '--suite', 'acceptance', '--criterion', '12'])
        assert result.exit_code == 0, result.output
        assert "1/1 passed" in result.output


if __name__ == "__main__":
    pytest.main([__file__])
