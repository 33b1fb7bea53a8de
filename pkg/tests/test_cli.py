import csv
import io
import json
import subprocess
import sys
from fractions import Fraction
from importlib import resources

import jsonschema
import pytest

from gamma4 import cli, floer
from gamma4.cli import build_parser, main, parse_table_spec, resolve_settings
from gamma4.errors import ValidationError
from gamma4.topobstruct import density_experiment

from test_floer import FIXTURE

SCHEMA = json.loads(resources.files("gamma4").joinpath("schema/output.schema.json").read_text())
VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@pytest.fixture
def env(tmp_path):
    return {"GAMMA4_CACHE_DIR": str(tmp_path / "cache"), "XDG_CONFIG_HOME": str(tmp_path / "config")}


def run(argv, env):
    out = io.StringIO()
    code = main(argv, env=env, stdout=out)
    return code, out.getvalue()


def run_json(argv, env):
    code, text = run(argv, env)
    rows = [json.loads(line) for line in text.splitlines()]
    for row in rows:
        VALIDATOR.validate(row)
    return code, rows


def test_schema_is_valid():
    jsonschema.Draft202012Validator.check_schema(SCHEMA)


def test_invariants_four_nine(env):
    code, [r] = run_json(["invariants", "4", "9"], env)
    inv = r["invariants"]
    assert code == 0
    assert (inv["signature"], inv["upsilon"], inv["pinch_number"], inv["stretch"]) == (-16, -8, 2, None)
    assert r["bounds"] is None


def test_invariants_alexander_map(env):
    _, [r] = run_json(["invariants", "3", "5"], env)
    assert r["invariants"]["alexander"] == {"-4": 1, "-3": -1, "-1": 1, "0": -1, "1": 1, "3": -1, "4": 1}


def test_not_coprime_is_a_validation_error(env):
    code, [r] = run_json(["invariants", "4", "6"], env)
    assert code == 2
    assert r["kind"] == "error" and "not coprime" in r["error"]["message"]


def test_negative_parameters_rejected(env):
    code, [r] = run_json(["bounds", "--", "-3", "5"], env)
    assert code == 2


def test_bounds_four_seven(env):
    code, [r] = run_json(["bounds", "4", "7"], env)
    assert code == 0
    assert r["bounds"]["smooth"] == {"lo": 2, "hi": 2, "exact": True}
    assert r["diagnostics"]["calibration_ok"] is True


def test_skip_flags_give_nulls(env):
    _, [r] = run_json(["invariants", "4", "7", "--skip-floer", "--skip-linkform"], env)
    inv = r["invariants"]
    assert inv["upsilon"] is None and inv["upsilon_bar"] is None and inv["linking_form"] is None
    _, [b] = run_json(["bounds", "4", "35", "--skip-floer", "--skip-linkform"], env)
    names = {c["name"] for c in b["bounds"]["certificates"]}
    assert "oss" not in names and "lf-residue" not in names
    assert len(b["bounds"]["unavailable"]) == 2


def test_floer_fixture(env):
    code, [r] = run_json(["floer", str(FIXTURE)], env)
    assert code == 0
    assert (r["upsilon_bar"], r["upsilon_underbar"]) == (1, -1)


def test_floer_missing_file(env, tmp_path):
    code, [r] = run_json(["floer", str(tmp_path / "absent.cfk")], env)
    assert code == 2 and r["kind"] == "error"


def test_floer_malformed_file(env, tmp_path):
    bad = tmp_path / "bad.cfk"
    bad.write_text("gen a 0\nd a 0 zz\n")
    code, [r] = run_json(["floer", str(bad)], env)
    assert code == 2 and r["error"]["type"] == "ComplexFormatError"


def test_floer_structurally_invalid_file_is_input_error(env, tmp_path):
    bad = tmp_path / "noncommuting.cfk"
    bad.write_text("gen a 0\ngen b 0\ngen c 0\nd a 1 b\niota b 0 c\n")
    code, [r] = run_json(["floer", str(bad)], env)
    assert code == 2 and r["error"]["type"] == "ComplexFormatError"


def test_density_csv_row_is_exact(env):
    code, text = run(["density", "4", "100000", "--format", "csv"], env)
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == list(cli.topobstruct.DensityReport.CSV_FIELDS)
    rep = density_experiment(4, 100000)
    row = dict(zip(rows[0], rows[1]))
    assert Fraction(int(row["ratio_num"]), int(row["ratio_den"])) == rep.ratio
    assert int(row["eligible"]) == rep.eligible and int(row["obstructed"]) == rep.obstructed


def test_density_monotone_flag(env):
    _, rows = run_json(["density", "4", "10000", "1000"], env)
    assert [r["N"] for r in rows] == [1000, 10000]
    assert rows[1]["monotone"] is True and 1000 in rows[1]["compared_with"]


def test_density_square_half_rejected(env):
    code, [r] = run_json(["density", "8", "1000"], env)
    assert code == 2 and r["error"]["type"] == "Inapplicable"


def test_pinch_and_linking_form_and_obstruction(env):
    _, [p] = run_json(["pinch", "4", "9"], env)
    assert p["pinch_number"] == 2
    _, [lf] = run_json(["linking-form", "4", "7"], env)
    assert lf["value"] == lf["closed_form"] == "5/7" and lf["verified"]
    _, [ob] = run_json(["obstruct-top", "4", "35"], env)
    assert ob["verdict"] == "obstructed" and ob["witness_prime"] == 5
    _, [ob] = run_json(["obstruct-top", "3", "5"], env)
    assert ob["verdict"] == "inapplicable" and ob["classes"] is None


def test_linking_form_needs_even_parameter(env):
    code, [r] = run_json(["linking-form", "3", "5"], env)
    assert code == 2 and r["error"]["type"] == "NeedsEvenP"


def test_ceiling_exit_codes(env):
    code, [r] = run_json(["obstruct-top", "4", "35", "--max-factor-digits", "1"], env)
    assert code == 3 and r["error"]["category"] == "ceiling"
    code, [r] = run_json(["linking-form", "4", "7", "--matrix-only", "--max-matrix", "3"], env)
    assert code == 3 and r["error"]["type"] == "MatrixTooLarge"


def test_table_annotates_bad_rows(env):
    code, rows = run_json(["table", "p=4", "q=5..12"], env)
    assert code == 0
    assert [r["knot"]["q"] for r in rows] == list(range(5, 13))
    bad = [r for r in rows if r["error"]]
    assert {r["knot"]["q"] for r in bad} == {6, 8, 10, 12}
    assert all(r["invariants"] is None for r in bad)


def test_table_spec_parsing():
    assert parse_table_spec(["p=4 q=5..11 odd"]) == [(4, 5), (4, 7), (4, 9), (4, 11)]
    assert parse_table_spec(["p=2..3", "q=5"]) == [(2, 5), (3, 5)]
    for bad in (["p=4"], ["p=4", "q=9..5"], ["p=4", "q=5", "prime"], ["p=4", "p=5", "q=3"]):
        with pytest.raises(ValidationError):
            parse_table_spec(bad)


def test_identical_invocations_are_bit_identical(env, tmp_path):
    argv = ["table", "p=4", "q=5..31", "odd"]
    _, first = run(argv, env)
    _, cached = run(argv, env)
    _, uncached = run(argv + ["--no-cache"], env)
    _, parallel = run(argv + ["--jobs", "2", "--no-cache"], env)
    assert first == cached == uncached == parallel
    for fmt in ("csv", "table"):
        assert run(argv + ["--format", fmt], env)[1] == run(argv + ["--format", fmt], env)[1]


def test_json_round_trip(env):
    _, text = run(["bounds", "10", "31"], env)
    assert json.dumps(json.loads(text)) + "\n" == text


def test_cache_is_used(env, monkeypatch):
    run(["bounds", "8", "9"], env)
    reference = run(["bounds", "8", "9", "--no-cache"], env)[1]

    def boom(*args, **kwargs):
        raise AssertionError("recomputed despite the cache")

    monkeypatch.setattr(floer, "involutive_upsilons", boom)
    assert run(["bounds", "8", "9"], env)[1] == reference


def test_timings_are_opt_in(env):
    _, [r] = run_json(["bounds", "4", "7"], env)
    assert r["diagnostics"]["timings"] is None
    _, [r] = run_json(["bounds", "4", "7", "--timings"], env)
    assert set(r["diagnostics"]["timings"]) == {"bounds_s"}


def test_human_format(env):
    code, text = run(["bounds", "4", "7", "--format", "table"], env)
    assert code == 0 and "smooth: [2, 2] exact" in text
    _, text = run(["invariants", "3", "5", "--format", "table"], env)
    assert "t^-4 - t^-3" in text


def test_selftest_exits_zero(env):
    code, rows = run_json(["selftest"], env)
    assert code == 0
    assert all(r["passed"] for r in rows) and len(rows) >= 5


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gamma4", "selftest", "--no-cache", "--format", "table"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.count("PASS") >= 5


# ---------------------------------------------------------------------------
# settings precedence


def _args(argv):
    return build_parser().parse_args(argv)


def test_settings_precedence(tmp_path):
    cfg = tmp_path / "g.ini"
    cfg.write_text("[gamma4]\nformat = csv\njobs = 3\nmax_matrix = 50\nno_cache = yes\n")
    env = {"GAMMA4_CONFIG": str(cfg)}
    s = resolve_settings(_args(["selftest"]), env)
    assert (s.format, s.jobs, s.max_matrix, s.use_cache) == ("csv", 3, 50, False)
    env["GAMMA4_JOBS"] = "5"
    env["GAMMA4_FORMAT"] = "table"
    s = resolve_settings(_args(["selftest"]), env)
    assert (s.format, s.jobs) == ("table", 5)
    s = resolve_settings(_args(["selftest", "--jobs", "7", "--format", "json"]), env)
    assert (s.format, s.jobs, s.max_matrix) == ("json", 7, 50)


def test_format_default_depends_on_terminal(tmp_path):
    env = {"XDG_CONFIG_HOME": str(tmp_path)}
    assert resolve_settings(_args(["selftest"]), env, stdout_isatty=True).format == "table"
    assert resolve_settings(_args(["selftest"]), env, stdout_isatty=False).format == "json"


def test_cache_dir_from_environment(tmp_path):
    env = {"XDG_CONFIG_HOME": str(tmp_path), "GAMMA4_CACHE_DIR": str(tmp_path / "c")}
    assert resolve_settings(_args(["selftest"]), env).cache_dir == str(tmp_path / "c")


@pytest.mark.parametrize(
    "text",
    ["[gamma4]\njobs = many\n", "[gamma4]\ncolour = blue\n", "[gamma4]\nno_cache = maybe\n", "not ini at all"],
)
def test_bad_config_rejected(tmp_path, text):
    cfg = tmp_path / "g.ini"
    cfg.write_text(text)
    with pytest.raises(ValidationError):
        resolve_settings(_args(["selftest"]), {"GAMMA4_CONFIG": str(cfg)})


def test_bad_config_exit_code(tmp_path):
    cfg = tmp_path / "g.ini"
    cfg.write_text("[gamma4]\njobs = 0\n")
    out = io.StringIO()
    assert main(["selftest"], env={"GAMMA4_CONFIG": str(cfg)}, stdout=out) == 2
