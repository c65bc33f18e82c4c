import shutil
import subprocess
import sys

from conftest import honest_proposer_cells, rounds_jsonl_text, sweep_csv_text

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "plotkit.cli", *args],
        capture_output=True, text=True)


def write_sweep(tmp_path, text=None):
    path = tmp_path / "estimates.csv"
    path.write_text(text if text is not None else sweep_csv_text(),
                    encoding="utf-8")
    return str(path)


def write_rounds(tmp_path, text=None):
    path = tmp_path / "rounds.jsonl"
    path.write_text(text if text is not None else rounds_jsonl_text(),
                    encoding="utf-8")
    return str(path)


def test_returns_writes_png(tmp_path):
    out = tmp_path / "fig2.png"
    proc = run_cli("returns", write_sweep(tmp_path), "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    data = out.read_bytes()
    assert data.startswith(PNG_MAGIC)
    assert len(data) > 1000


def test_returns_rerender_is_byte_identical(tmp_path):
    csv = write_sweep(tmp_path)
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    assert run_cli("returns", csv, "--out", str(a)).returncode == 0
    assert run_cli("returns", csv, "--out", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_missing_column_exit_2_names_column(tmp_path):
    text = sweep_csv_text().replace(",ci95,", ",halfwidth,")
    out = tmp_path / "fig2.png"
    proc = run_cli("returns", write_sweep(tmp_path, text),
                   "--out", str(out))
    assert proc.returncode == 2
    assert "missing column: ci95" in proc.stderr
    assert not out.exists()


def test_no_data_rows_exit_2_without_file(tmp_path):
    header_only = "\n".join(sweep_csv_text().splitlines()[:2]) + "\n"
    out = tmp_path / "fig2.png"
    proc = run_cli("returns", write_sweep(tmp_path, header_only),
                   "--out", str(out))
    assert proc.returncode == 2
    assert "no data rows" in proc.stderr
    assert not out.exists()


def test_dump_repeats_csv_cells_exactly(tmp_path):
    proc = run_cli("returns", write_sweep(tmp_path), "--dump")
    assert proc.returncode == 0, proc.stderr
    lines = proc.stdout.splitlines()
    assert lines[0] == "columns: l_v,l_p,mean_return,ci95"
    expected = set()
    for (lv, lp), (mean, ci) in honest_proposer_cells().items():
        expected.add(f"l_v={lv} l_p={lp} mean_return={mean} ci95={ci}")
    assert set(lines[1:]) == expected
    assert not list(tmp_path.glob("*.png"))


def test_dump_with_alternate_y_column(tmp_path):
    proc = run_cli("returns", write_sweep(tmp_path), "--dump",
                   "--y", "std_err", "--err", "std_err")
    assert proc.returncode == 0, proc.stderr
    assert "std_err=0.0005" in proc.stdout


def test_eviction_writes_png(tmp_path):
    out = tmp_path / "eviction.png"
    proc = run_cli("eviction", write_rounds(tmp_path), "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    assert out.read_bytes().startswith(PNG_MAGIC)


def test_eviction_dump_lists_round_means(tmp_path):
    proc = run_cli("eviction", write_rounds(tmp_path), "--dump")
    assert proc.returncode == 0, proc.stderr
    lines = proc.stdout.splitlines()
    assert lines[0] == "min_stake=100"
    assert lines[1] == "round=0 honest=1001.5 malicious=900.5"
    assert len(lines) == 4


def test_eviction_malformed_line_exit_2(tmp_path):
    lines = rounds_jsonl_text().splitlines()
    lines[3] = lines[3][:-2]
    path = write_rounds(tmp_path, "\n".join(lines) + "\n")
    proc = run_cli("eviction", path, "--out", str(tmp_path / "e.png"))
    assert proc.returncode == 2
    assert "line 4" in proc.stderr
    assert not (tmp_path / "e.png").exists()


def test_eviction_zero_rounds_exit_2(tmp_path):
    meta_only = rounds_jsonl_text().splitlines()[0] + "\n"
    proc = run_cli("eviction", write_rounds(tmp_path, meta_only),
                   "--out", str(tmp_path / "e.png"))
    assert proc.returncode == 2
    assert "zero rounds" in proc.stderr


def test_missing_input_file_exit_3(tmp_path):
    proc = run_cli("returns", str(tmp_path / "absent.csv"), "--dump")
    assert proc.returncode == 3
    assert "io error" in proc.stderr


def test_requires_out_or_dump(tmp_path):
    proc = run_cli("returns", write_sweep(tmp_path))
    assert proc.returncode == 2
    assert "--out" in proc.stderr


def test_console_script_is_installed(tmp_path):
    exe = shutil.which("plot-kit")
    assert exe, "plot-kit entry point not on PATH"
    out = tmp_path / "fig2.png"
    proc = subprocess.run(
        [exe, "returns", write_sweep(tmp_path), "--x", "l_p",
         "--y", "mean_return", "--group", "l_v", "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.read_bytes().startswith(PNG_MAGIC)
