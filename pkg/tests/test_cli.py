"""End-to-end tests for the batch CLI.

Covers:
- two-cavity and dicke outputs against golden files
- schema validation of every result file and sibling CSV output
- byte-identical reruns and worker-count independence
- exit codes: 2 for bad configs and preconditions, 3 for failed checks
- degenerate inputs: N_a = 1, zero drive
- synthesize (with --verify) and verify reports
- Config.validate
"""

import json
import os

import click
import jsonschema
import pytest

from app.config import Config
from app.decorators import herald_command
from app.errors import NumericFailureError
from app.services import io_service, multi_atom_service

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")
GOLDEN = os.path.join(ROOT, "tests", "golden")


# ─── Helpers ───────────────────────────────────────────────

def _invoke(cli, runner, verb, config_path, out_path, *extra):
    return runner.invoke(cli, [verb, "--config", config_path, "--out", str(out_path), *extra])


def _load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _assert_matches(actual, expected, path="$"):
    """Every key in `expected` must be present in `actual` and agree to 1e-12."""
    if isinstance(expected, dict):
        assert isinstance(actual, dict), path
        for key, value in expected.items():
            assert key in actual, f"{path}.{key} missing"
            _assert_matches(actual[key], value, f"{path}.{key}")
    elif isinstance(expected, list):
        assert len(actual) == len(expected), path
        for i, (a, e) in enumerate(zip(actual, expected)):
            _assert_matches(a, e, f"{path}[{i}]")
    elif isinstance(expected, float):
        assert actual == pytest.approx(expected, rel=1e-12, abs=1e-15), path
    else:
        assert actual == expected, path


def _validate(data, schema_name):
    jsonschema.validate(data, io_service.load_schema(schema_name))


# ══════════════════════════════════════════════
#  TWO CAVITY
# ══════════════════════════════════════════════

class TestTwoCavityCommand:

    @pytest.mark.parametrize("name", ["two_cavity_ideal", "two_cavity_lossy"])
    def test_matches_golden(self, cli, runner, tmp_path, name):
        out = tmp_path / f"{name}.json"
        result = _invoke(cli, runner, "two-cavity", os.path.join(CONFIGS, f"{name}.json"), out)
        assert result.exit_code == 0, result.output
        data = _load(out)
        _assert_matches(data, _load(os.path.join(GOLDEN, f"{name}.json")))
        _validate(data, "two_cavity")
        assert abs(data["p_empirical"] - data["p_analytic"]) <= 4 * data["stderr"]

    def test_rerun_is_byte_identical(self, cli, runner, tmp_path):
        config_path = os.path.join(CONFIGS, "two_cavity_lossy.json")
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert _invoke(cli, runner, "two-cavity", config_path, first, "--trials", "20000").exit_code == 0
        assert _invoke(cli, runner, "two-cavity", config_path, second, "--trials", "20000").exit_code == 0
        assert first.read_bytes() == second.read_bytes()

    def test_jobs_do_not_change_output(self, cli, runner, tmp_path):
        config_path = os.path.join(CONFIGS, "two_cavity_lossy.json")
        serial, parallel = tmp_path / "serial.json", tmp_path / "parallel.json"
        _invoke(cli, runner, "two-cavity", config_path, serial, "--trials", "20000", "--jobs", "1")
        _invoke(cli, runner, "two-cavity", config_path, parallel, "--trials", "20000", "--jobs", "2")
        assert serial.read_bytes() == parallel.read_bytes()

    def test_seed_flag_overrides_config(self, cli, runner, tmp_path):
        out = tmp_path / "out.json"
        config_path = os.path.join(CONFIGS, "two_cavity_ideal.json")
        assert _invoke(cli, runner, "two-cavity", config_path, out, "--seed", "7", "--trials", "1000").exit_code == 0
        data = _load(out)
        assert data["seed"] == 7
        assert data["trials"] == 1000

    def test_partial_overlap(self, cli, runner, tmp_path, write_config):
        config_path = write_config({
            "left": {"g0": 1.0, "g1": 1.0, "kappa": 10.0},
            "overlap": {"re": 0.6, "im": 0.0},
            "trials": 1000,
        })
        out = tmp_path / "out.json"
        assert _invoke(cli, runner, "two-cavity", config_path, out).exit_code == 0
        assert _load(out)["bell_fidelity"] == pytest.approx(0.8, abs=1e-12)

    def test_no_coincidence_possible(self, cli, runner, tmp_path, write_config):
        config_path = write_config({
            "left": {"g0": 1.0, "g1": 0.0, "kappa": 10.0},
            "right": {"g0": 1.0, "g1": 0.0, "kappa": 10.0},
            "trials": 2000,
        })
        out = tmp_path / "out.json"
        result = _invoke(cli, runner, "two-cavity", config_path, out)
        assert result.exit_code == 0, result.output
        data = _load(out)
        _validate(data, "two_cavity")
        assert data["p_analytic"] == 0.0
        assert data["p_empirical"] == 0.0
        assert data["p_by_minus_outcome"] == {"correct": 0.0, "discard": 0.0}
        assert data["bell_fidelity"] is None
        assert data["density"] is None

    def test_unknown_scheme(self, cli, runner, tmp_path, write_config):
        config_path = write_config({
            "left": {"g0": 1.0, "g1": 1.0, "kappa": 10.0},
            "detection": {"scheme": "hom"},
        })
        result = _invoke(cli, runner, "two-cavity", config_path, tmp_path / "out.json")
        assert result.exit_code == 2
        assert "scheme" in result.output


# ══════════════════════════════════════════════
#  DICKE
# ══════════════════════════════════════════════

class TestDickeCommand:

    def test_matches_golden(self, cli, runner, tmp_path):
        out = tmp_path / "dicke.json"
        result = _invoke(
            cli, runner, "dicke", os.path.join(CONFIGS, "dicke_operating_point.json"), out,
            "--trials", "20000",
        )
        assert result.exit_code == 0, result.output
        data = _load(out)
        _assert_matches(data, _load(os.path.join(GOLDEN, "dicke_operating_point.json")))
        _validate(data, "dicke")
        assert data["trials"] == 20000

    def test_writes_histogram(self, cli, runner, tmp_path):
        out = tmp_path / "dicke.json"
        _invoke(cli, runner, "dicke", os.path.join(CONFIGS, "dicke_operating_point.json"), out, "--trials", "5000")
        lines = (tmp_path / "dicke_hist.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "n_h,count"
        assert len(lines) == 1 + 11
        assert sum(int(line.split(",")[1]) for line in lines[1:]) == round(
            _load(out)["empirical"]["p_succ"] * 5000
        )

    def test_single_atom(self, cli, runner, tmp_path, write_config):
        config_path = write_config({"n_atoms": 1, "n_pulses": 1, "eta": 1.0, "pulse_duration": 1e-6})
        out = tmp_path / "out.json"
        result = _invoke(cli, runner, "dicke", config_path, out, "--trials", "1000")
        assert result.exit_code == 0, result.output
        data = _load(out)
        assert data["p_en"] == 0.0
        assert data["empirical"]["p_en"] == 0.0
        assert data["repeat"] is None

    def test_biased_branching_reports_exact_tables(self, cli, runner, tmp_path, write_config):
        config_path = write_config({
            "n_atoms": 10, "n_pulses": 50, "eta": 0.7, "branching_h": 0.99, "pulse_duration": 3.5e-7,
        })
        out = tmp_path / "out.json"
        result = _invoke(cli, runner, "dicke", config_path, out, "--trials", "2000")
        assert result.exit_code == 0, result.output
        data = _load(out)
        _validate(data, "dicke")
        assert data["p_en"] is None
        assert data["p_nh"] is None
        p_en = multi_atom_service.exact_p_en(10, 50, 0.7, branching_h=0.99)
        assert data["exact_p_en"] == pytest.approx(p_en, rel=1e-12)
        assert data["repeat"]["repetitions"] == pytest.approx(1 / p_en, rel=1e-12)
        assert data["exact_p_succ"] < data["p_succ"]

    def test_too_few_pulses(self, cli, runner, tmp_path, write_config):
        config_path = write_config({"n_atoms": 5, "n_pulses": 2})
        result = _invoke(cli, runner, "dicke", config_path, tmp_path / "out.json")
        assert result.exit_code == 2
        assert not (tmp_path / "out.json").exists()

    def test_missing_key(self, cli, runner, tmp_path, write_config):
        config_path = write_config({"n_atoms": 5})
        result = _invoke(cli, runner, "dicke", config_path, tmp_path / "out.json")
        assert result.exit_code == 2
        assert "n_pulses" in result.output


# ══════════════════════════════════════════════
#  PULSE SHAPE
# ══════════════════════════════════════════════

class TestPulseShapeCommand:

    def test_writes_modes(self, cli, runner, tmp_path, write_config):
        config_path = write_config({
            "cavity": {"g0": 1.0, "g1": 1.0, "kappa": 10.0},
            "pulse": {"omega_max": 2.0, "duration": 20.0, "n_points": 8001},
        })
        out = tmp_path / "pulse.json"
        result = _invoke(cli, runner, "pulse-shape", config_path, out)
        assert result.exit_code == 0, result.output
        data = _load(out)
        _validate(data, "pulse_shape")
        assert 0.0 < data["p_c"] <= 1.0
        assert data["n_points"] == 8001
        assert data["mode_file"] == "pulse_numeric.csv"
        assert data["analytic_mode_file"] == "pulse_analytic.csv"
        for name in (data["mode_file"], data["analytic_mode_file"]):
            lines = (tmp_path / name).read_text(encoding="utf-8").splitlines()
            assert lines[0] == "t,re,im"
            assert len(lines) == 1 + 8001

    def test_zero_drive(self, cli, runner, tmp_path, write_config):
        n = 401
        config_path = write_config({
            "cavity": {"g0": 1.0, "g1": 1.0, "kappa": 10.0},
            "pulse": {"times": [i / (n - 1) for i in range(n)], "rabi": [0.0] * n},
        })
        out = tmp_path / "pulse.json"
        result = _invoke(cli, runner, "pulse-shape", config_path, out)
        assert result.exit_code == 0, result.output
        data = _load(out)
        assert data["p_c"] == 0.0
        assert data["l2_relative_error"] is None

    def test_coarse_grid(self, cli, runner, tmp_path, write_config):
        config_path = write_config({
            "cavity": {"g0": 1.0e6, "g1": 1.0e7, "kappa": 1.0e7},
            "pulse": {"omega_max": 1.0e6, "duration": 2.0e-4, "n_points": 1001},
        })
        result = _invoke(cli, runner, "pulse-shape", config_path, tmp_path / "out.json")
        assert result.exit_code == 2


# ══════════════════════════════════════════════
#  SYNTHESIZE
# ══════════════════════════════════════════════

class TestSynthesizeCommand:

    def test_ghz2_plan(self, cli, runner, tmp_path):
        out = tmp_path / "plan.json"
        result = _invoke(
            cli, runner, "synthesize", os.path.join(CONFIGS, "synthesize_ghz2.json"), out,
            "--verify", "--trials", "20000",
        )
        assert result.exit_code == 0, result.output
        data = _load(out)
        _validate(data, "synthesis_plan")
        roots = sorted(((r["re"], r["im"]) for r in data["roots"]), key=lambda z: z[1])
        assert roots[0] == pytest.approx((0.0, -1.0), abs=1e-12)
        assert roots[1] == pytest.approx((0.0, 1.0), abs=1e-12)
        assert [s["pulse"] for s in data["settings"]] == [1, 2]
        assert data["residual_pulses"] == 2
        assert data["predicted_fidelity"] >= 1 - 1e-8
        assert data["verification"]["heralded_fidelity"] >= 1 - 1e-8
        assert data["verification"]["accepted"] > 0

    def test_single_dicke_target_has_infinite_root(self, cli, runner, tmp_path, write_config):
        config_path = write_config({"coefficients": [0, 1, 0]})
        out = tmp_path / "plan.json"
        assert _invoke(cli, runner, "synthesize", config_path, out).exit_code == 0
        assert "inf" in _load(out)["roots"]

    def test_malformed_coefficients(self, cli, runner, tmp_path, write_config):
        config_path = write_config({"coefficients": [{"re": "a"}, 1]})
        result = _invoke(cli, runner, "synthesize", config_path, tmp_path / "plan.json")
        assert result.exit_code == 2

    def test_atom_count_mismatch(self, cli, runner, tmp_path, write_config):
        config_path = write_config({"n_atoms": 3, "coefficients": [1, 0, 1]})
        result = _invoke(cli, runner, "synthesize", config_path, tmp_path / "plan.json")
        assert result.exit_code == 2

    def test_all_zero_target(self, cli, runner, tmp_path, write_config):
        config_path = write_config({"coefficients": [0, 0, 0]})
        result = _invoke(cli, runner, "synthesize", config_path, tmp_path / "plan.json")
        assert result.exit_code == 2


# ══════════════════════════════════════════════
#  VERIFY
# ══════════════════════════════════════════════

class TestVerifyCommand:

    def test_small_report(self, cli, runner, tmp_path, write_config):
        config_path = write_config({"max_atoms": 3, "round_trip_count": 10})
        out = tmp_path / "verify.json"
        result = _invoke(cli, runner, "verify", config_path, out)
        assert result.exit_code == 0, result.output
        data = _load(out)
        _validate(data, "verify")
        assert data["passed"] is True
        assert {c["name"] for c in data["checks"]} >= {"dicke_norm_coeff", "synthesis_round_trip"}

    def test_max_atoms_out_of_range(self, cli, runner, tmp_path, write_config):
        config_path = write_config({"max_atoms": 9})
        assert _invoke(cli, runner, "verify", config_path, tmp_path / "verify.json").exit_code == 2


# ══════════════════════════════════════════════
#  COMMON
# ══════════════════════════════════════════════

class TestCommon:

    def test_missing_config_file(self, cli, runner, tmp_path):
        result = _invoke(cli, runner, "dicke", str(tmp_path / "nope.json"), tmp_path / "out.json")
        assert result.exit_code == 2
        assert "not found" in result.output

    def test_invalid_json(self, cli, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert _invoke(cli, runner, "dicke", str(path), tmp_path / "out.json").exit_code == 2

    def test_zero_trials_rejected(self, cli, runner, tmp_path):
        config_path = os.path.join(CONFIGS, "two_cavity_ideal.json")
        result = _invoke(cli, runner, "two-cavity", config_path, tmp_path / "out.json", "--trials", "0")
        assert result.exit_code == 2

    def test_config_validation(self):
        class Broken(Config):
            TRIALS = 0
            LOG_LEVEL = "LOUD"

        with pytest.raises(RuntimeError, match="HERALD_TRIALS"):
            Broken.validate()

    def test_numeric_failure_exit_code(self, runner):
        @click.command()
        @herald_command
        def diverging():
            raise NumericFailureError("step halving diverged", diagnostics={"p_c": [0.5, 0.6]})

        result = runner.invoke(diverging)
        assert result.exit_code == 3
        assert "step halving diverged" in result.output
        assert "p_c" in result.output

    def test_result_breaking_its_schema(self, tmp_path):
        out = tmp_path / "report.json"
        with pytest.raises(NumericFailureError, match="verify schema") as info:
            io_service.write_json(out, {"max_atoms": 12, "seed": 1, "checks": [], "passed": True}, "verify")
        assert info.value.diagnostics["path"] == "max_atoms"
        assert not out.exists()
