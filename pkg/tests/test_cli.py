"""Command-line behavior: subcommands, exit codes, piping, artifacts."""

import io
import json
import re
import subprocess
import sys

import numpy as np
import pytest

from shoviz.characterize import re_max
from shoviz.cli import GEN_KINDS, main
from shoviz.operators import (
    op_from_file,
    op_to_json,
    identity_op,
    scene_to_file,
    three_source_scene,
)

SUMMARY_RE = re.compile(
    r"eta min (?P<lo>[\d.]+) max (?P<hi>[\d.]+) \| "
    r"max \|rE\| (?P<re>[\d.]+) \| rE bound (?P<bound>[\d.]+)"
)


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTable:
    def test_default_prints_ten_rows(self, capsys):
        code, out, _ = run(["table1"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 11  # header + 10 rows
        first = lines[1].split()
        assert first == ["1", "0.500", "0.577"]
        ninth = lines[9].split()
        assert ninth == ["9", "0.900", "0.974"]

    def test_rows_match_library_values(self, capsys):
        code, out, _ = run(["table1", "--max-order", "20"], capsys)
        assert code == 0
        for line in out.strip().splitlines()[1:]:
            n_s, ratio_s, bound_s = line.split()
            n = int(n_s)
            assert ratio_s == f"{n / (n + 1):.3f}"
            assert bound_s == f"{re_max(n):.3f}"

    @pytest.mark.parametrize("bad", ["0", "21", "-3"])
    def test_out_of_range_is_compute_error(self, bad, capsys):
        code, _, err = run(["table1", "--max-order", bad], capsys)
        assert code == 1
        assert "error:" in err


class TestGen:
    def test_writes_operator_file(self, tmp_path, capsys):
        out = tmp_path / "rot.json"
        code, _, err = run(
            ["gen", "rot", "--order", "4", "--out", str(out)], capsys
        )
        assert code == 0
        assert "operator 25x25" in err
        op = op_from_file(out)
        assert np.abs(op.matrix.T @ op.matrix - np.eye(25)).max() < 1e-9

    def test_stdout_mode_emits_parseable_json(self, capsys):
        code, out, err = run(["gen", "identity", "--order", "2"], capsys)
        assert code == 0
        payload = json.loads(out)
        assert payload["n_in"] == 2
        assert "operator 9x9" in err

    def test_quadrature_diagnostics_reported(self, tmp_path, capsys):
        out = tmp_path / "warp.json"
        code, _, err = run(
            ["gen", "warp", "--alpha", "0.8", "--out", str(out)], capsys
        )
        assert code == 0
        assert "quadrature residual" in err

    def test_scene_file_input(self, tmp_path, capsys):
        scene_path = tmp_path / "scene.json"
        scene_to_file(three_source_scene(snr_db=3.0, mu=0.5), scene_path)
        out = tmp_path / "nr.json"
        code, _, _ = run(
            ["gen", "nr-pm", "--scene", str(scene_path), "--out", str(out)],
            capsys,
        )
        assert code == 0
        op = op_from_file(out)
        singulars = np.linalg.svd(op.matrix, compute_uv=False)
        assert int((singulars > 1e-8 * singulars[0]).sum()) == 3

    def test_invalid_alpha_is_compute_error(self, tmp_path, capsys):
        code, _, err = run(
            ["gen", "warp", "--alpha", "1.5", "--out", str(tmp_path / "x")],
            capsys,
        )
        assert code == 1 and "error:" in err

    def test_missing_output_directory_is_io_error(self, capsys):
        code, _, err = run(
            ["gen", "identity", "--out", "/no/such/dir/x.json"], capsys
        )
        assert code == 2 and "error:" in err

    def test_preset_and_scene_are_exclusive(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main([
                "gen", "nr-dp", "--preset", "table2",
                "--scene", str(tmp_path / "s.json"),
            ])
        assert exc.value.code == 2

    def test_unknown_kind_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["gen", "bogus"])
        assert exc.value.code == 2


class TestCharacterize:
    def test_writes_all_artifacts(self, tmp_path, capsys):
        op_path = tmp_path / "op.json"
        run(["gen", "identity", "--order", "4", "--out", str(op_path)], capsys)
        svg = tmp_path / "f.svg"
        ppm = tmp_path / "f.ppm"
        data = tmp_path / "f.json"
        raster = tmp_path / "f.csv"
        code, out, _ = run(
            [
                "characterize", str(op_path),
                "--cell-deg", "15", "--vec-grid", "6",
                "--out", str(svg), "--ppm-out", str(ppm),
                "--data-out", str(data), "--raster-out", str(raster),
            ],
            capsys,
        )
        assert code == 0
        assert svg.exists() and ppm.exists() and data.exists() and raster.exists()
        match = SUMMARY_RE.search(out)
        assert match is not None
        assert abs(float(match["lo"]) - 1.0) < 1e-9
        assert abs(float(match["hi"]) - 1.0) < 1e-9
        assert abs(float(match["re"]) - 0.8) < 1e-9
        assert abs(float(match["bound"]) - re_max(4)) < 1e-9

    def test_reads_stdin_when_no_path(self, capsys, monkeypatch):
        monkeypatch.setattr(
            sys, "stdin", io.StringIO(op_to_json(identity_op(2)))
        )
        code, out, _ = run(
            ["characterize", "--cell-deg", "30", "--vec-grid", "6"], capsys
        )
        assert code == 0
        assert SUMMARY_RE.search(out) is not None

    def test_missing_file_is_io_error(self, capsys):
        code, _, err = run(["characterize", "/nope/op.json"], capsys)
        assert code == 2 and "error:" in err

    def test_malformed_file_is_compute_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"version": 1}\n')
        code, _, err = run(["characterize", str(bad)], capsys)
        assert code == 1 and "error:" in err

    def test_thread_count_does_not_change_output(self, tmp_path, capsys):
        op_path = tmp_path / "op.json"
        run(["gen", "warp", "--order", "3", "--out", str(op_path)], capsys)
        svgs = []
        for threads, name in ((1, "a.svg"), (3, "b.svg")):
            path = tmp_path / name
            code, _, _ = run(
                [
                    "characterize", str(op_path),
                    "--cell-deg", "15", "--vec-grid", "6",
                    "--threads", str(threads), "--out", str(path),
                ],
                capsys,
            )
            assert code == 0
            svgs.append(path.read_bytes())
        assert svgs[0] == svgs[1]

    def test_seed_flag_is_accepted(self, capsys):
        code, out, _ = run(["--seed", "7", "table1", "--max-order", "1"], capsys)
        assert code == 0


class TestRoundTrip:
    @pytest.mark.parametrize("kind", GEN_KINDS)
    def test_every_generator_characterizes_at_all_orders(
        self, kind, tmp_path, capsys
    ):
        for order in range(1, 9):
            op_path = tmp_path / f"{kind}-{order}.json"
            code, _, err = run(
                ["gen", kind, "--order", str(order), "--out", str(op_path)],
                capsys,
            )
            assert code == 0, f"gen {kind} order {order}: {err}"
            code, out, err = run(
                [
                    "characterize", str(op_path),
                    "--cell-deg", "30", "--vec-grid", "6",
                ],
                capsys,
            )
            assert code == 0, f"characterize {kind} order {order}: {err}"
            assert SUMMARY_RE.search(out) is not None


class TestInstalledEntryPoints:
    def test_console_script_pipe(self, tmp_path):
        result = subprocess.run(
            "shoviz gen rot --order 2 | shoviz characterize - "
            "--cell-deg 30 --vec-grid 6",
            shell=True,
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert result.returncode == 0, result.stderr
        assert SUMMARY_RE.search(result.stdout) is not None

    def test_module_invocation(self):
        result = subprocess.run(
            [sys.executable, "-m", "shoviz", "table1", "--max-order", "2"],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert result.returncode == 0
        assert "0.667" in result.stdout
