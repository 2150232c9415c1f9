import math
from importlib import resources
from io import StringIO

import pytest
from hypothesis import given, settings, strategies as st

from qeraser import cli
from qeraser.errors import ScenarioError
from qeraser.scenario import SCHEMAS, Scenario, lex_value, parse_scenario, serialize

CORPUS = sorted(p for p in resources.files("qeraser").joinpath("scenarios").iterdir() if p.name.endswith(".scn"))


def test_lexer_kinds():
    assert lex_value("true", 1, 1).kind == "bool"
    assert lex_value("-3", 1, 1).value == -3
    assert lex_value("1e-3", 1, 1).kind == "real"
    assert lex_value("90 deg", 1, 1).value == pytest.approx(math.pi / 2)
    assert lex_value("0.5rad", 1, 1).value == 0.5
    assert lex_value("polarizer:45deg", 1, 1).kind == "word"
    with pytest.raises(ScenarioError):
        lex_value("3 apples", 2, 7)


def test_parse_full_example():
    s = parse_scenario(
        "# header\n"
        "experiment = double_slit_eraser   # trailing comment\n"
        "name = demo\n"
        "marker = 90 deg\n"
        "eraser = polarizer:45deg\n"
        "\n[screen]\npoints = 201\n"
    )
    assert s.settings["marker"] == pytest.approx(math.pi / 2)
    assert s.settings["eraser"] == ("polarizer", pytest.approx(math.pi / 4))
    assert s.screen.points == 201
    assert s.seed == 0 and s.shots == 10_000


@pytest.mark.parametrize("text,line,col,fragment", [
    ("experiment = wheeler\nchoice = 3\n", 2, 10, "type mismatch"),
    ("experiment = wheeler\nfoo = 1\n", 2, 1, "unknown key"),
    ("experiment = wheeler\nchoice = interference\nchoice = which_path\n", 3, 1, "duplicate key"),
    ("experiment = double_slit_eraser\nmarker = 90\n", 2, 10, "type mismatch"),
    ("experiment = herzog\nphase_points = 1\n", 2, 16, "range"),
    ("experiment = wheeler\n[camera]\n", 2, 1, "unknown section"),
    ("experiment wheeler\n", 1, 12, "expected '='"),
    ("experiment = teleport\n", 1, 14, "unknown experiment"),
])
def test_errors_carry_position(text, line, col, fragment):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    err = info.value
    assert (err.line, err.column) == (line, col)
    assert fragment in str(err)
    assert str(err).startswith(f"line {line}, column {col}:")


def test_missing_experiment():
    with pytest.raises(ScenarioError, match="experiment"):
        parse_scenario("name = x\n")


@settings(max_examples=40, deadline=None)
@given(experiment=st.sampled_from(sorted(SCHEMAS)), seed=st.integers(0, 2**64 - 1),
       shots=st.integers(1, 10**6), points=st.integers(3, 2000))
def test_serialize_round_trip(experiment, seed, shots, points):
    base = parse_scenario(f"experiment = {experiment}\nseed = {seed}\nshots = {shots}\n[screen]\npoints = {points}\n")
    assert parse_scenario(serialize(base)) == base


@settings(max_examples=30, deadline=None)
@given(deg=st.floats(0, 180, allow_nan=False), eraser=st.sampled_from(["none", "hwp_upper", "polarizer:30deg"]))
def test_serialize_round_trip_angles(deg, eraser):
    s = parse_scenario(f"experiment = double_slit_eraser\nmarker = {deg!r} deg\neraser = {eraser}\n")
    assert parse_scenario(serialize(s)) == s


def test_seed_override_validated():
    s = parse_scenario("experiment = wheeler\n")
    assert s.with_seed(5).seed == 5
    with pytest.raises(ScenarioError):
        s.with_seed(-1)
    with pytest.raises(ScenarioError):
        Scenario("wheeler", "x", {"bogus": 1})


def test_format_scalar():
    assert cli.format_scalar(0.0) == "0.000000"
    assert cli.format_scalar(0.5) == "0.500000"
    assert cli.format_scalar(1e-12) == "1.000000e-12"
    assert cli.format_scalar(2e6) == "2.000000e+06"


def test_emit_summary_and_csv(tmp_path):
    s = parse_scenario("experiment = wheeler\nname = w\n")
    rep, code, _ = cli.run(s)
    assert code == 0
    buf = StringIO()
    written = cli.emit(rep, s, tmp_path, stream=buf)
    lines = buf.getvalue().splitlines()
    assert lines[:4] == ["experiment=wheeler", "name=w", "seed=0", "setting.choice=interference"]
    assert lines[-1] == "status=ok"
    assert "pattern.screen=w_screen.csv" in lines
    csv = written[0].read_bytes()
    assert csv.startswith(b"x,intensity\n") and b"\r" not in csv
    assert len(csv.splitlines()) == 402


def test_summary_output_skips_files(tmp_path):
    s = parse_scenario("experiment = wheeler\noutput = summary\n")
    rep, _, _ = cli.run(s)
    assert cli.emit(rep, s, tmp_path, stream=StringIO()) == []


def test_exit_codes(tmp_path, capsys):
    good = tmp_path / "g.scn"
    good.write_text("experiment = zeno\nmeasurements = 4\n")
    assert cli.main(["run", str(good)]) == 0
    assert "status=ok" in capsys.readouterr().out
    bad = tmp_path / "b.scn"
    bad.write_text("experiment = zeno\nmeasurements = four\n")
    assert cli.main(["run", str(bad)]) == 2
    assert "line 2, column 16" in capsys.readouterr().err
    domain = tmp_path / "d.scn"
    domain.write_text("experiment = temporal\nmodel = cat\nt = 0.2\nt0 = 0.5\n")
    assert cli.main(["run", str(domain)]) == 2
    strict = tmp_path / "s.scn"
    strict.write_text("experiment = nocomm\ncases = 3\ntol = 1e-30\n")
    assert cli.main(["run", str(strict)]) == 3
    assert cli.main(["run", str(tmp_path / "missing.scn")]) == 2
    assert cli.main([]) == 2


def test_seed_flag_overrides(tmp_path, capsys):
    f = tmp_path / "s.scn"
    f.write_text("experiment = entanglement_swapping\nvictor = separable\nseed = 1\nshots = 100\n")
    assert cli.main(["run", str(f), "--seed", "99"]) == 0
    assert "seed=99" in capsys.readouterr().out


def test_list_schemas(capsys):
    assert cli.main(["--list"]) == 0
    out = capsys.readouterr().out
    for name in SCHEMAS:
        assert f"experiment = {name}" in out


def test_ascii_plot_shape():
    s = parse_scenario("experiment = wheeler\n")
    rep, _, _ = cli.run(s)
    art = cli.ascii_plot(rep.patterns["screen"]).splitlines()
    assert len(art) == 13 and all(len(l) == 61 for l in art)


def test_corpus_covers_every_experiment():
    seen = {parse_scenario(p.read_text()).experiment for p in CORPUS}
    assert seen == set(SCHEMAS)


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_corpus_runs(path, tmp_path, capsys):
    assert cli.main(["run", str(path), "--out", str(tmp_path)]) == 0
    assert capsys.readouterr().out.endswith("status=ok\n")
