"""
CLI tests for projflow.

Reports are JSON on stdout; exit codes are 0 ok, 1 failed, 2 error.
"""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from projflow.cli import main, run

PHI_3 = "x*(y+1)^2, y/(y+1)"
PHI_3_FIELD = "2*x*y, -y^2"


@pytest.fixture
def runner():
    """Create a Click test runner."""
    return CliRunner()


def invoke(runner, args):
    result = runner.invoke(main, args)
    return result, json.loads(result.stdout) if result.stdout.strip() else None


class TestMainGroup:
    """Tests for the main CLI group."""

    def test_help(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for command in ("verify", "vf", "conj", "ode", "orbit", "construct", "catalog"):
            assert command in result.output

    def test_version(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "0.1.0" in result.output

    def test_missing_option_is_a_usage_error(self, runner):
        result, payload = invoke(runner, ["verify"])
        assert result.exit_code == 2
        assert "error" in payload


class TestVerifyCommand:
    """Tests for the verify command."""

    def test_flow_passes(self, runner):
        result, payload = invoke(runner, ["verify", "-f", PHI_3])
        assert result.exit_code == 0
        assert payload["pass"] is True
        assert payload["mode"] == "exact"

    def test_non_flow_fails(self, runner):
        result, payload = invoke(runner, ["verify", "-f", "x + x^2, y + y^2"])
        assert result.exit_code == 1
        assert payload["pass"] is False
        assert payload["first_discrepancy"]["location"] == "component 1"

    def test_parse_error(self, runner):
        result, payload = invoke(runner, ["verify", "-f", "x*(y+1, y"])
        assert result.exit_code == 2
        assert "error" in payload

    def test_numeric_mode(self, runner):
        args = ["verify", "-f", PHI_3, "--mode", "numeric", "--samples", "8", "--seed", "3"]
        result, payload = invoke(runner, args)
        assert result.exit_code == 0
        assert payload["mode"] == "numeric"
        assert payload["order_or_samples"] == 8

    def test_named_flow_from_config(self, runner, tmp_path):
        path = tmp_path / ".projflow.toml"
        path.write_text(f'[flows]\nmine = {json.dumps(PHI_3.split(", "))}\n')
        result, payload = invoke(runner, ["--config", str(path), "verify", "-f", "@mine"])
        assert result.exit_code == 0
        assert payload["pass"] is True

    def test_unknown_name(self, runner, tmp_path):
        path = tmp_path / ".projflow.toml"
        path.write_text("[defaults]\nseed = 1\n")
        result, payload = invoke(runner, ["--config", str(path), "verify", "-f", "@nope"])
        assert result.exit_code == 2
        assert payload["known"] == []


class TestFieldCommands:
    """Tests for vf, conj and ode."""

    def test_vf(self, runner):
        result, payload = invoke(runner, ["vf", "-f", PHI_3])
        assert result.exit_code == 0
        assert len(payload["vf"]) == 2

    def test_conj_flow_linear(self, runner):
        result, payload = invoke(runner, ["conj", "-f", PHI_3, "--linear", "0,1;1,0"])
        assert result.exit_code == 0
        assert len(payload["flow"]) == 2
        assert payload["map"]["linear"] == [["0", "1"], ["1", "0"]]

    def test_conj_field_bir(self, runner):
        result, payload = invoke(runner, ["conj", "--vf", PHI_3_FIELD, "--bir", "y,x+y"])
        assert result.exit_code == 0
        assert payload["map"] == {"P": "y", "Q": "x + y"}

    def test_conj_needs_one_map(self, runner):
        args = ["conj", "-f", PHI_3, "--bir", "y,x+y", "--linear", "1,0;0,1"]
        result, payload = invoke(runner, args)
        assert result.exit_code == 2
        assert "error" in payload

    def test_ode(self, runner):
        result, payload = invoke(runner, ["ode", "--vf", PHI_3_FIELD])
        assert result.exit_code == 0
        assert payload["N"] == 3
        assert payload["W"] == "x*y^2"

    def test_ode_bad_rhs(self, runner):
        result, _ = invoke(runner, ["ode", "--vf", PHI_3_FIELD, "--rhs", "2"])
        assert result.exit_code == 2


class TestOrbitCommands:
    """Tests for orbit, construct and extrude."""

    def test_orbit_from_q(self, runner):
        result, payload = invoke(runner, ["orbit", "--q", "1/x", "--N", "3"])
        assert result.exit_code == 0
        assert payload == {"W": "x*y^2", "N": 3}

    def test_orbit_samples_to_csv(self, runner, tmp_path):
        out = tmp_path / "orbit.csv"
        args = [
            "orbit", "--vf", PHI_3_FIELD, "--level-value", "1",
            "--window", "0.1,5,0.5,2", "--count", "10", "--out", str(out),
        ]
        result, payload = invoke(runner, args)
        assert result.exit_code == 0
        assert payload["verified"] is True
        assert payload["samples"] == 10
        assert out.read_text().splitlines()[0] == "x,y"

    def test_construct(self, runner):
        result, payload = invoke(runner, ["construct", "--integral", "x + 2*y"])
        assert result.exit_code == 0
        assert payload["N"] == 1
        assert len(payload["flow"]) == 2

    def test_construct_univariate_flag(self, runner):
        _, plain = invoke(runner, ["construct", "--integral", "x + 2*y"])
        result, flagged = invoke(runner, ["construct", "--integral", "x + 2*y", "--univariate"])
        assert result.exit_code == 0
        assert flagged == plain

    def test_construct_rejects_space_integral(self, runner):
        result, _ = invoke(runner, ["construct", "--integral", "z*x"])
        assert result.exit_code == 2

    def test_extrude(self, runner):
        args = ["extrude", "-f", "x/(x+1), y*(x+1)^2", "--integral", "z*(x^2 + x*y)"]
        result, payload = invoke(runner, args)
        assert result.exit_code == 0
        assert len(payload["flow"]) == 3
        assert len(payload["vf"]) == 3


class TestClassifyCommand:
    """Tests for classify."""

    def test_field(self, runner):
        result, payload = invoke(runner, ["classify", "--vf", PHI_3_FIELD])
        assert result.exit_code == 0
        assert payload["level"] == 3
        assert payload["solenoidal"] is True

    def test_search(self, runner):
        result, payload = invoke(runner, ["classify", "--search", "4"])
        assert result.exit_code == 0
        assert payload["levels"] == [1, 3]

    def test_exactly_one_input(self, runner):
        result, _ = invoke(runner, ["classify"])
        assert result.exit_code == 2


class TestNumcheckCommands:
    """Tests for the numcheck group."""

    def test_area_conserved(self, runner):
        result, payload = invoke(runner, ["numcheck", "area", "-f", PHI_3])
        assert result.exit_code == 0
        assert payload["conserved"] is True

    def test_area_not_conserved(self, runner):
        args = ["numcheck", "area", "-f", "x*(y+1), y/(y+1)", "--center", "0,0.5"]
        result, payload = invoke(runner, args)
        assert result.exit_code == 1
        assert payload["conserved"] is False

    def test_volume(self, runner):
        args = ["numcheck", "volume", "-f", "x*(w+1), y*(w+1), w/(w+1)", "--grid", "128"]
        result, payload = invoke(runner, args)
        assert result.exit_code == 0
        assert payload["conserved"] is True

    def test_rk_against_closed_form(self, runner):
        args = ["numcheck", "rk", "-f", PHI_3, "--start", "0.3,0.2"]
        result, payload = invoke(runner, args)
        assert result.exit_code == 0
        assert payload["deviation"] < 1e-8

    def test_rk_bad_start(self, runner):
        result, _ = invoke(runner, ["numcheck", "rk", "--vf", PHI_3_FIELD, "--start", "0.3"])
        assert result.exit_code == 2


class TestCatalogCommand:
    """Tests for catalog."""

    def test_list(self, runner):
        result, payload = invoke(runner, ["catalog", "--list"])
        assert result.exit_code == 0
        assert "phi_N" in payload
        assert "N" in payload["phi_N"]["params"]

    def test_table(self, runner):
        result = runner.invoke(main, ["catalog", "--list", "--table"])
        assert result.exit_code == 0

    def test_member(self, runner):
        result, payload = invoke(runner, ["catalog", "phi_N", "-p", "N=3"])
        assert result.exit_code == 0
        assert payload["name"] == "phi_N(N=3)"
        assert payload["vf"] == ["2*x*y", "-y^2"]

    def test_params_spelling(self, runner):
        result, payload = invoke(runner, ["catalog", "phi_N", "--params", "N=3"])
        assert result.exit_code == 0
        assert payload["name"] == "phi_N(N=3)"

    def test_params_comma_separated(self, runner):
        args = ["catalog", "phi_cN", "--params", "c=2,N=3"]
        result, payload = invoke(runner, args)
        assert result.exit_code == 0
        _, repeated = invoke(runner, ["catalog", "phi_cN", "--params", "c=2", "--params", "N=3"])
        assert payload == repeated

    def test_bad_param(self, runner):
        result, _ = invoke(runner, ["catalog", "phi_N", "-p", "N"])
        assert result.exit_code == 2

    def test_unknown_family(self, runner):
        result, payload = invoke(runner, ["catalog", "phi_Q"])
        assert result.exit_code == 2
        assert "phi_N" in payload["known"]


class TestRun:
    """Tests for the run entry point."""

    def test_ok(self, capsys):
        assert run(["verify", "-f", PHI_3]) == 0
        assert json.loads(capsys.readouterr().out)["pass"] is True

    def test_failure(self):
        assert run(["verify", "-f", "x + x^2, y + y^2"]) == 1

    def test_error(self):
        assert run(["catalog", "phi_Q"]) == 2
