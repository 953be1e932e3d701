import json

import numpy as np
import pytest

from pointops.cli import main
from pointops.fileio import read_image, write_image
from pointops.transform import load_color_matrix, load_tone_curve

from conftest import random_image


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Synthetic dataset + basis + a fitted style set, built via the CLI."""
    root = tmp_path_factory.mktemp("cliws")
    ds = root / "ds"
    code = main(["gen-synth", "--out", str(ds), "--count", "6",
                 "--width", "32", "--height", "32", "--seed", "3"])
    assert code == 0
    basis_path = root / "basis.json"
    code = main(["build-basis", "--input-dir", str(ds / "input"),
                 "--gt-dir", str(ds / "gt"), "--m", "5", "--out", str(basis_path)])
    assert code == 0
    set_path = root / "styles.json"
    code = main(["fit-style", "--set", str(set_path), "--style-name", "synth",
                 "--basis", str(basis_path), "--input-dir", str(ds / "input"),
                 "--gt-dir", str(ds / "gt")])
    assert code == 0
    code = main(["fit-style", "--set", str(set_path), "--style-name", "synth2",
                 "--input-dir", str(ds / "input"), "--gt-dir", str(ds / "gt"),
                 "--ridge", "0.01"])
    assert code == 0
    return root


class TestGenSynth:
    def test_creates_pairs_and_sidecar(self, tmp_path, capsys):
        code, out, _ = run(capsys, "gen-synth", "--out", str(tmp_path / "d"),
                           "--count", "2", "--width", "16", "--height", "16",
                           "--seed", "9", "--json")
        assert code == 0
        payload = json.loads(out)
        assert payload["pairs"] == 2
        assert (tmp_path / "d" / "input" / "pair_0000.ppm").exists()
        assert (tmp_path / "d" / "gt" / "pair_0001.ppm").exists()
        assert (tmp_path / "d" / "generator.json").exists()


class TestUpperBound:
    def test_json_schema(self, workspace, capsys):
        ds = workspace / "ds"
        code, out, _ = run(capsys, "upper-bound",
                           "--input", str(ds / "input" / "pair_0000.ppm"),
                           "--gt", str(ds / "gt" / "pair_0000.ppm"), "--json")
        assert code == 0
        payload = json.loads(out)
        assert set(payload) == {"psnr_in", "psnr_mid", "psnr_out", "tf", "ccm", "millis"}
        assert len(payload["tf"]) == 256
        assert len(payload["ccm"]) == 9
        assert payload["psnr_out"] >= 50.0

    def test_dump_files_load_back(self, workspace, tmp_path, capsys):
        ds = workspace / "ds"
        tf_path = tmp_path / "tf.txt"
        ccm_path = tmp_path / "ccm.txt"
        code, _, _ = run(capsys, "upper-bound",
                         "--input", str(ds / "input" / "pair_0000.ppm"),
                         "--gt", str(ds / "gt" / "pair_0000.ppm"),
                         "--dump-tf", str(tf_path), "--dump-ccm", str(ccm_path))
        assert code == 0
        assert load_tone_curve(tf_path).shape == (256,)
        assert load_color_matrix(ccm_path).shape == (3, 3)

    def test_identical_pair_reports_null(self, tmp_path, capsys):
        img = random_image(np.random.default_rng(0), 8, 8)
        write_image(img, tmp_path / "same.ppm")
        code, out, _ = run(capsys, "upper-bound", "--input", str(tmp_path / "same.ppm"),
                           "--gt", str(tmp_path / "same.ppm"), "--json", "--no-meta")
        assert code == 0
        payload = json.loads(out)
        assert payload["psnr_out"] is None
        assert "millis" not in payload


class TestEvalUpper:
    def test_byte_identical_reruns(self, workspace, capsys):
        ds = workspace / "ds"
        args = ("eval-upper", "--input-dir", str(ds / "input"),
                "--gt-dir", str(ds / "gt"), "--json", "--no-meta")
        code1, out1, _ = run(capsys, *args)
        code2, out2, _ = run(capsys, *args)
        assert code1 == 0 and code2 == 0
        assert out1 == out2

    def test_report_dir_artifacts(self, workspace, tmp_path, capsys):
        ds = workspace / "ds"
        report_dir = tmp_path / "report"
        code, out, _ = run(capsys, "eval-upper", "--input-dir", str(ds / "input"),
                           "--gt-dir", str(ds / "gt"), "--report-dir", str(report_dir))
        assert code == 0
        for name in ("report.json", "per_image.csv", "psnr.png", "tone_curves.png"):
            assert (report_dir / name).exists(), name

    def test_table_output(self, workspace, capsys):
        ds = workspace / "ds"
        code, out, _ = run(capsys, "eval-upper", "--input-dir", str(ds / "input"),
                           "--gt-dir", str(ds / "gt"))
        assert code == 0
        assert "psnr_out" in out


class TestBuildBasis:
    def test_default_m_is_ten(self, workspace, tmp_path, capsys):
        ds = workspace / "ds"
        out_path = tmp_path / "b.json"
        code, out, _ = run(capsys, "build-basis", "--input-dir", str(ds / "input"),
                           "--gt-dir", str(ds / "gt"), "--out", str(out_path), "--json")
        assert code == 0
        assert json.loads(out)["m"] == 6  # capped by corpus size below the default 10
        obj = json.loads(out_path.read_text())
        assert set(obj) == {"m", "sigma", "u"}

    def test_rank_error_report(self, workspace, tmp_path, capsys):
        ds = workspace / "ds"
        report_dir = tmp_path / "rank"
        code, _, _ = run(capsys, "build-basis", "--input-dir", str(ds / "input"),
                         "--gt-dir", str(ds / "gt"), "--m", "4",
                         "--out", str(tmp_path / "b.json"),
                         "--report-dir", str(report_dir), "--rank-max", "6")
        assert code == 0
        for name in ("rank_error.csv", "rank_error.png", "basis_curves.png"):
            assert (report_dir / name).exists(), name


class TestStyleCommands:
    def test_eval_style(self, workspace, capsys):
        ds = workspace / "ds"
        code, out, _ = run(capsys, "eval-style", "--set", str(workspace / "styles.json"),
                           "--style", "synth", "--input-dir", str(ds / "input"),
                           "--gt-dir", str(ds / "gt"), "--json", "--no-meta")
        assert code == 0
        payload = json.loads(out)
        assert payload["style"] == "synth"
        assert payload["aggregate"]["psnr_out"]["mean"] > 25.0

    def test_enhance_and_dumps(self, workspace, tmp_path, capsys):
        ds = workspace / "ds"
        out_img = tmp_path / "out.png"
        code, _, _ = run(capsys, "enhance", "--set", str(workspace / "styles.json"),
                         "--style", "synth", "--input", str(ds / "input" / "pair_0000.ppm"),
                         "--output", str(out_img),
                         "--dump-tf", str(tmp_path / "tf.txt"))
        assert code == 0
        assert read_image(out_img).shape == (32, 32, 3)
        assert load_tone_curve(tmp_path / "tf.txt").shape == (256,)

    def test_interp_endpoint_matches_enhance(self, workspace, tmp_path, capsys):
        ds = workspace / "ds"
        single = tmp_path / "single.png"
        mixed = tmp_path / "mixed.png"
        run(capsys, "enhance", "--set", str(workspace / "styles.json"), "--style", "synth",
            "--input", str(ds / "input" / "pair_0001.ppm"), "--output", str(single))
        code, _, _ = run(capsys, "interp", "--set", str(workspace / "styles.json"),
                         "--style-a", "synth", "--style-b", "synth2", "--t", "0",
                         "--input", str(ds / "input" / "pair_0001.ppm"),
                         "--output", str(mixed))
        assert code == 0
        assert single.read_bytes() == mixed.read_bytes()

    def test_chain_single_matches_enhance(self, workspace, tmp_path, capsys):
        ds = workspace / "ds"
        single = tmp_path / "s.png"
        chained = tmp_path / "c.png"
        run(capsys, "enhance", "--set", str(workspace / "styles.json"), "--style", "synth",
            "--input", str(ds / "input" / "pair_0002.ppm"), "--output", str(single))
        code, _, _ = run(capsys, "chain", "--set", str(workspace / "styles.json"),
                         "--styles", "synth", "--input", str(ds / "input" / "pair_0002.ppm"),
                         "--output", str(chained))
        assert code == 0
        assert single.read_bytes() == chained.read_bytes()

    def test_unknown_style_fails_cleanly(self, workspace, tmp_path, capsys):
        ds = workspace / "ds"
        code, _, err = run(capsys, "enhance", "--set", str(workspace / "styles.json"),
                           "--style", "nope", "--input", str(ds / "input" / "pair_0000.ppm"),
                           "--output", str(tmp_path / "x.png"))
        assert code == 2
        assert "unknown style" in err

    def test_fit_style_new_set_requires_basis(self, workspace, tmp_path, capsys):
        ds = workspace / "ds"
        with pytest.raises(SystemExit, match="need --basis"):
            main(["fit-style", "--set", str(tmp_path / "new.json"), "--style-name", "x",
                  "--input-dir", str(ds / "input"), "--gt-dir", str(ds / "gt")])
