"""Command-line behavior: output shapes, config layering, exit codes."""

import csv
import io
import json
import os

import pytest

from zenocavity.cli import main


def invoke(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, list(reader)


# ---------------------------------------------------------------------------
# spectrum / darkstates
# ---------------------------------------------------------------------------

def test_spectrum_left(capsys):
    code, out, err = invoke(["spectrum"], capsys)
    assert code == 0 and err == ""
    header, rows = rows_of(out)
    assert header == ["index", "numeric", "predicted", "residual"]
    assert len(rows) == 7
    assert [r[0] for r in rows] == [str(i) for i in range(7)]
    numeric = [float(r[1]) for r in rows]
    assert numeric == sorted(numeric)
    assert max(float(r[3]) for r in rows) < 1e-9
    assert out.endswith("\n") and "\r" not in out


def test_spectrum_combined_doubles_levels(capsys):
    code, out, _ = invoke(["spectrum", "--branch", "combined"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    assert len(rows) == 14
    numeric = [float(r[1]) for r in rows]
    for i in range(0, 14, 2):
        assert abs(numeric[i] - numeric[i + 1]) < 1e-9


def test_darkstates_report(capsys):
    code, out, err = invoke(["darkstates"], capsys)
    assert code == 0 and err == ""
    header, rows = rows_of(out)
    assert header == ["quantity", "label", "value"]
    by_kind = {}
    for quantity, label, value in rows:
        by_kind.setdefault(quantity, []).append((label, float(value)))
    assert [l for l, _ in by_kind["dark_residual"]] == ["D0", "D1", "D2"]
    assert max(v for _, v in by_kind["dark_residual"]) < 1e-10
    assert [l for l, _ in by_kind["principal_angle"]] == ["angle0", "angle1", "angle2"]
    assert max(v for _, v in by_kind["principal_angle"]) < 1e-8
    brights = by_kind["bright_overlap"]
    assert len(brights) == 4
    for label, value in brights:
        assert label.startswith("left:E=")
        assert -1e-12 <= value <= 1.0 + 1e-12
        # the +-g pair of written-out bright states is exact at any coupling
        if abs(abs(float(label.split("=")[1])) - 1.0) < 1e-9:
            assert abs(value - 1.0) < 1e-9


def test_darkstates_combined_covers_both_sectors(capsys):
    code, out, _ = invoke(["darkstates", "--branch", "combined"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    labels = [r[1] for r in rows if r[0] == "bright_overlap"]
    assert len(labels) == 8
    assert sum(l.startswith("left:") for l in labels) == 4
    assert sum(l.startswith("right:") for l in labels) == 4


def test_ambiguous_clustering_is_a_numeric_failure(capsys):
    # the +-g doublet sits inside the merge band but outside merge distance
    code, out, err = invoke(["darkstates", "--g", "2e-6", "--lam", "1"], capsys)
    assert code == 1
    assert "numeric failure" in err


# ---------------------------------------------------------------------------
# protocol
# ---------------------------------------------------------------------------

def test_protocol_json_shape(capsys):
    code, out, err = invoke(
        ["protocol", "--name", "state_transfer", "--engine", "effective"], capsys)
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert list(doc) == ["name", "branch", "params", "k", "tau", "engine",
                         "interpretation", "convention", "fidelity",
                         "negativity", "success_probability", "flags"]
    assert doc["name"] == "state_transfer"
    assert abs(doc["fidelity"] - 1.0) < 1e-10
    assert doc["negativity"] is None
    code2, out2, _ = invoke(
        ["protocol", "--name", "state_transfer", "--engine", "effective"], capsys)
    assert out2 == out


def test_protocol_out_file_matches_stdout(tmp_path, capsys):
    args = ["protocol", "--name", "bell", "--engine", "effective"]
    _, stdout_text, _ = invoke(args, capsys)
    path = tmp_path / "bell.json"
    code, out, _ = invoke(args + ["--out", str(path)], capsys)
    assert code == 0 and out == ""
    assert path.read_text() == stdout_text
    leftovers = [n for n in os.listdir(tmp_path) if n.endswith(".part")]
    assert leftovers == []


def test_config_layering(tmp_path, capsys):
    cfg = tmp_path / "runs.ini"
    cfg.write_text(
        "[params]\ng = 0.5\n\n[bell]\nlam = 2.0\nbranch = right\nengine = effective\n"
    )
    code, out, _ = invoke(["protocol", "--name", "bell", "--config", str(cfg)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["branch"] == "right"
    assert doc["engine"] == "effective"
    assert doc["params"]["g"] == 0.5 and doc["params"]["lam"] == 2.0
    # closed form 2 lam^2 / (g^2 + 2 lam^2) with the config's numbers
    assert abs(doc["fidelity"] - 8.0 / 8.25) < 1e-10

    # explicit flags beat both config sections
    code, out, _ = invoke(
        ["protocol", "--name", "bell", "--config", str(cfg), "--g", "0.1"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["params"]["g"] == 0.1
    assert abs(doc["fidelity"] - 8.0 / 8.01) < 1e-10


@pytest.mark.parametrize("ini,needle", [
    ("[params]\nbogus = 1\n", "unknown key"),
    ("[state_transfer]\nbogus = 1\n", "unknown key"),
    ("[params]\ng = not-a-number\n", "must be a number"),
])
def test_bad_config_content(tmp_path, capsys, ini, needle):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(ini)
    code, _, err = invoke(
        ["protocol", "--name", "state_transfer", "--config", str(cfg)], capsys)
    assert code == 2
    assert needle in err


@pytest.mark.parametrize("argv,needle", [
    (["protocol", "--name", "teleport"], "unknown protocol"),
    (["protocol", "--name", "ghz", "--branch", "left"], "combined branch"),
    (["protocol", "--name", "state_transfer", "--config", "/no/such/file.ini"],
     "not found"),
    (["sweep", "--name", "state_transfer"], "at least one --axis"),
    (["sweep", "--name", "state_transfer", "--axis", "g:lin:0.1:1"], "axis must look"),
    (["sweep", "--name", "state_transfer", "--axis", "q:lin:0.1:1:3"], "unknown axis"),
    (["sweep", "--name", "state_transfer", "--axis", "g:log:0:1:3"], "positive"),
    (["sweep", "--name", "state_transfer", "--axis", "g:cubic:0.1:1:3"],
     "lin or log"),
    (["sweep", "--name", "state_transfer", "--axis", "g:lin:0.1:1:1"], "at least 2"),
    (["sweep", "--name", "state_transfer", "--axis", "g:lin:0.5:1:2",
      "--axis", "g:lin:1:2:2"], "distinct"),
    (["sweep", "--name", "state_transfer", "--axis", "g:lin:0.5:1:2",
      "--axis", "lam:lin:1:2:2", "--axis", "omega1:lin:0.01:0.02:2"],
     "at most two"),
    (["sweep", "--name", "state_transfer", "--axis", "g:lin:0.5:1:2",
      "--workers", "0"], "--workers"),
    (["compare", "--taus", "0:1"], "grid must look"),
    (["compare", "--taus", "0:1:1"], "at least 2"),
])
def test_usage_errors(capsys, argv, needle):
    code, _, err = invoke(argv, capsys)
    assert code == 2
    assert needle in err


def test_missing_subcommand_and_bad_flag(capsys):
    code, _, _ = invoke([], capsys)
    assert code == 2
    code, _, _ = invoke(["spectrum", "--frequency", "1"], capsys)
    assert code == 2


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

SWEEP_BASE = ["sweep", "--name", "state_transfer", "--engine", "effective"]


def test_sweep_single_axis(capsys):
    code, out, err = invoke(
        SWEEP_BASE + ["--axis", "g:lin:0.8:1.2:3"], capsys)
    assert code == 0 and err == ""
    header, rows = rows_of(out)
    assert header == ["g", "fidelity", "negativity", "success_probability",
                      "tau", "engine_gap"]
    assert [r[0] for r in rows] == ["0.8", "1", "1.2"]
    for r in rows:
        assert abs(float(r[1]) - 1.0) < 1e-10  # effective transfer is exact
        assert r[2] == "" and r[3] == ""  # no negativity/probability here
        assert 0.0 <= float(r[5]) < 1e-3


def test_sweep_two_axes_row_major(capsys):
    code, out, _ = invoke(
        SWEEP_BASE + ["--axis", "g:lin:1:2:2", "--axis", "lam:lin:1:3:2"], capsys)
    assert code == 0
    header, rows = rows_of(out)
    assert header[:2] == ["g", "lam"]
    assert [(r[0], r[1]) for r in rows] == [
        ("1", "1"), ("1", "3"), ("2", "1"), ("2", "3")]


def test_sweep_derived_axis(capsys):
    code, out, _ = invoke(
        ["sweep", "--name", "bell", "--engine", "effective",
         "--axis", "g_over_lam:log:0.01:0.1:2"], capsys)
    assert code == 0
    header, rows = rows_of(out)
    assert header[0] == "g_over_lam"
    for r in rows:
        ratio = float(r[0])
        want = 2.0 / (ratio * ratio + 2.0)
        assert abs(float(r[1]) - want) < 1e-9


def test_sweep_workers_do_not_change_bytes(capsys):
    argv = SWEEP_BASE + ["--axis", "g:lin:0.8:1.2:3"]
    _, serial, _ = invoke(argv + ["--workers", "1"], capsys)
    code, parallel, _ = invoke(argv + ["--workers", "2"], capsys)
    assert code == 0
    assert parallel == serial


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def test_compare_requested_grid(capsys):
    code, out, err = invoke(["compare", "--taus", "0:300:4"], capsys)
    assert code == 0 and err == ""
    header, rows = rows_of(out)
    assert header == ["tau", "fidelity"]
    assert [r[0] for r in rows] == ["0", "100", "200", "300"]
    assert abs(float(rows[0][1]) - 1.0) < 1e-12


def test_compare_default_grid_and_ratio_line(tmp_path, capsys):
    code, out, _ = invoke(["compare"], capsys)
    assert code == 0
    _, rows = rows_of(out)
    assert len(rows) == 21

    path = tmp_path / "compare.csv"
    code, out, _ = invoke(["compare", "--out", str(path)], capsys)
    assert code == 0
    assert out == "zeno_ratio=0.01\n"
    _, rows = rows_of(path.read_text())
    assert len(rows) == 21
