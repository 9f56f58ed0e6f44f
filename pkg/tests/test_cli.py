import subprocess
import sys

import pytest

from adamscharts.cli import main

from conftest import CORPUS_PATH


def run_cli(*args):
    import io
    from contextlib import redirect_stderr, redirect_stdout

    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(args))
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def chartir_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("chartir")
    code, stdout, _ = run_cli("extract", str(CORPUS_PATH), "--out", str(out))
    assert code == 0
    return out


def test_extract_writes_all_charts(chartir_dir):
    files = sorted(p.name for p in chartir_dir.glob("*.chartir"))
    assert len(files) == 11
    assert "motivic-E3.chartir" in files


def test_extract_summary_lines(chartir_dir):
    code, stdout, _ = run_cli(
        "extract", str(CORPUS_PATH), "--chart", "motivic-E3",
        "--out", str(chartir_dir),
    )
    assert code == 0
    assert stdout.startswith("motivic-E3 classes=")


def test_extract_missing_file_exits_2(tmp_path):
    code, _, err = run_cli("extract", str(tmp_path / "nope.txt"))
    assert code == 2
    assert "error" in err


def test_extract_truncated_source_exits_2(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text(
        "\\label{Adams-cl}\n\\begin{pspicture}(0,0)(1,1)\n\\pscircle*(0,0){0.06}\n"
    )
    code, _, err = run_cli("extract", str(bad))
    assert code == 2
    assert "line 2" in err


def test_validate_clean_corpus(chartir_dir):
    code, stdout, _ = run_cli(
        "validate", *(str(p) for p in sorted(chartir_dir.glob("*.chartir")))
    )
    assert code == 0


def test_validate_records_format(chartir_dir):
    code, stdout, _ = run_cli(
        "validate", str(chartir_dir / "cofiber_tau-E2.chartir"),
        "--format", "records",
    )
    assert code == 0
    assert all(l.startswith("finding ") for l in stdout.splitlines() if l != "no findings")


def test_turn_reports_summands(chartir_dir):
    code, stdout, _ = run_cli(
        "turn", str(chartir_dir / "motivic-E2.chartir"),
        "--page", "2", "--window", "41",
    )
    assert code == 0
    assert "(40,6)" in stdout


def test_diff_clean_chain_exits_0(chartir_dir):
    code, stdout, _ = run_cli(
        "diff", str(chartir_dir / "motivic-E2.chartir"),
        str(chartir_dir / "motivic-E3.chartir"), "--window", "65",
    )
    assert code == 0
    assert stdout == "no discrepancies\n"


def test_diff_mismatch_exits_1(chartir_dir, tmp_path):
    # comparing the turned page against the wrong chart must find entries
    code, stdout, _ = run_cli(
        "diff", str(chartir_dir / "motivic-E2.chartir"),
        str(chartir_dir / "motivic-Einf.chartir"), "--page", "2",
        "--window", "59",
    )
    assert code == 1
    assert stdout != "no discrepancies\n"


def test_render_writes_svg(chartir_dir, tmp_path):
    out = tmp_path / "chart.svg"
    code, _, _ = run_cli(
        "render", str(chartir_dir / "classical-E2.chartir"),
        "--window", "5", "--out", str(out),
    )
    assert code == 0
    assert out.read_text().startswith("<?xml")


def test_stats_match_independent_scan(chartir_dir, corpus):
    code, stdout, _ = run_cli("stats", str(chartir_dir / "classical-E2.chartir"))
    assert code == 0
    lines = stdout.splitlines()
    assert f"classes {len(corpus['classical-E2'].classes)}" in lines
    assert any(l.startswith("species diff:d2 ") for l in lines)


def test_ctau_command(chartir_dir):
    code, stdout, _ = run_cli(
        "ctau", str(chartir_dir / "motivic-cohomology.chartir"),
        str(chartir_dir / "cofiber_tau-E2.chartir"), "--window", "59",
    )
    assert code == 0
    assert stdout.splitlines()[0] == "top-cell shift (+1,-1)"


def test_outputs_are_byte_identical_across_runs(chartir_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code, _, _ = run_cli("extract", str(CORPUS_PATH), "--out", str(out))
        assert code == 0
    for pa in sorted(a.glob("*.chartir")):
        pb = b / pa.name
        assert pa.read_bytes() == pb.read_bytes()


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "adamscharts.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "extract" in proc.stdout
