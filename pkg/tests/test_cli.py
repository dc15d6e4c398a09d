import json
import os

import numpy as np
import pytest

from mlep.cli import main
from mlep.pipeline import tensor_from_bytes
from mlep.raster import save_png
from mlep.synthetic import build_corpus, synth_pair

from conftest import random_image


def _write_images(tmp_path, n=3, size=64):
    rng = np.random.default_rng(10)
    paths = []
    for i in range(n):
        p = tmp_path / f"img_{i}.png"
        save_png(random_image(rng, size, size), p)
        paths.append(p)
    return paths


def _read_all(directory):
    out = {}
    for name in sorted(os.listdir(directory)):
        with open(os.path.join(directory, name), "rb") as fp:
            out[name] = fp.read()
    return out


class TestParsing:
    def test_no_subcommand_is_usage_error(self, capsys):
        assert main([]) == 1
        capsys.readouterr()

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["extract", "--bogus"]) == 1
        capsys.readouterr()

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        capsys.readouterr()

    @pytest.mark.parametrize(
        "command", ["extract", "hist", "diff", "train", "eval", "bench"]
    )
    def test_subcommand_help_lists_defaults(self, command, capsys):
        assert main([command, "--help"]) == 0
        out = capsys.readouterr().out
        assert "default" in out

    def test_bad_scales_is_usage_error(self, tmp_path, capsys):
        paths = _write_images(tmp_path, n=1)
        code = main(
            ["extract", "--input", str(paths[0]), "--out", str(tmp_path / "o"),
             "--scales", "1,nope"]
        )
        assert code == 1
        capsys.readouterr()


class TestExtract:
    def test_single_image_defaults(self, tmp_path, capsys):
        paths = _write_images(tmp_path, n=1, size=224)
        out_dir = tmp_path / "out"
        assert main(["extract", "--input", str(paths[0]), "--out", str(out_dir)]) == 0
        out = capsys.readouterr().out
        assert "223x223x9" in out
        with open(out_dir / "img_0.mlep", "rb") as fp:
            tensor = tensor_from_bytes(fp.read())
        assert tensor.data.shape == (223, 223, 9)

    def test_viz_writes_channel_maps(self, tmp_path, capsys):
        paths = _write_images(tmp_path, n=1)
        out_dir = tmp_path / "out"
        code = main(
            ["extract", "--input", str(paths[0]), "--out", str(out_dir),
             "--input-size", "64", "--scales", "1,1/2", "--viz"]
        )
        assert code == 0
        capsys.readouterr()
        pngs = [n for n in os.listdir(out_dir) if n.endswith(".png")]
        assert len(pngs) == 6

    def test_rerun_is_byte_identical(self, tmp_path, capsys):
        _write_images(tmp_path, n=2)
        args = ["extract", "--input", str(tmp_path), "--out", None,
                "--input-size", "64", "--scales", "1,1/2"]
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        args_a = args.copy(); args_a[4] = str(out_a)
        args_b = args.copy(); args_b[4] = str(out_b)
        assert main(args_a) == 0
        assert main(args_b) == 0
        capsys.readouterr()
        assert _read_all(out_a) == _read_all(out_b)

    def test_jobs_do_not_change_outputs(self, tmp_path, capsys):
        _write_images(tmp_path, n=3)
        out_1 = tmp_path / "j1"
        out_8 = tmp_path / "j8"
        base = ["extract", "--input", str(tmp_path), "--input-size", "64",
                "--scales", "1,1/2"]
        assert main(base + ["--out", str(out_1), "--jobs", "1"]) == 0
        assert main(base + ["--out", str(out_8), "--jobs", "8"]) == 0
        capsys.readouterr()
        assert _read_all(out_1) == _read_all(out_8)

    def test_no_temp_files_left_behind(self, tmp_path, capsys):
        paths = _write_images(tmp_path, n=1)
        out_dir = tmp_path / "out"
        assert main(["extract", "--input", str(paths[0]), "--out", str(out_dir),
                     "--input-size", "64", "--scales", "1,1/2", "--viz"]) == 0
        capsys.readouterr()
        stray = [n for n in os.listdir(out_dir) if n.startswith(".tmp-")]
        assert stray == []

    def test_all_unreadable_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "broken.png"
        bad.write_bytes(b"definitely not a png")
        code = main(["extract", "--input", str(bad), "--out", str(tmp_path / "o")])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_partial_failure_exits_0_with_warnings(self, tmp_path, capsys):
        _write_images(tmp_path, n=1)
        (tmp_path / "zz_broken.png").write_bytes(b"nope")
        code = main(
            ["extract", "--input", str(tmp_path), "--out", str(tmp_path / "o"),
             "--input-size", "64", "--scales", "1,1/2"]
        )
        assert code == 0
        captured = capsys.readouterr()
        assert "zz_broken" in captured.err

    def test_env_seed_override(self, tmp_path, capsys, monkeypatch):
        paths = _write_images(tmp_path, n=1)
        base = ["extract", "--input", str(paths[0]), "--input-size", "64",
                "--scales", "1,1/2"]
        out_flag = tmp_path / "flag"
        out_env = tmp_path / "env"
        assert main(base + ["--out", str(out_flag), "--seed", "41"]) == 0
        monkeypatch.setenv("MLEP_SEED", "41")
        assert main(base + ["--out", str(out_env), "--seed", "7"]) == 0
        monkeypatch.delenv("MLEP_SEED")
        capsys.readouterr()
        assert _read_all(out_flag) == _read_all(out_env)


class TestDiff:
    def test_identical_pair_is_black(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        img = random_image(rng, 64, 64)
        p = tmp_path / "x.png"
        save_png(img, p)
        out = tmp_path / "diffs"
        code = main(["diff", "--real", str(p), "--fake", str(p), "--out", str(out),
                     "--input-size", "64", "--scales", "1,1/2"])
        assert code == 0
        capsys.readouterr()
        with open(out / "stats.json") as fp:
            stats = json.load(fp)
        assert stats == {"pixel_mad": 0.0, "entropy_mad": 0.0, "spectrum_mad": 0.0}
        for name in ("pixel_diff.png", "entropy_diff.png", "spectrum_diff.png"):
            assert (out / name).exists()

    def test_pair_stats_reported(self, tmp_path, capsys):
        real, fake = synth_pair(5, 64)
        pr, pf = tmp_path / "r.png", tmp_path / "f.png"
        save_png(real, pr)
        save_png(fake, pf)
        out = tmp_path / "d"
        code = main(["diff", "--real", str(pr), "--fake", str(pf), "--out", str(out),
                     "--input-size", "64", "--scales", "1,1/2"])
        assert code == 0
        assert "entropy_mad=" in capsys.readouterr().out


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    return build_corpus(root, 8, 3, seed=11, size=64)


class TestTrainEval:
    def test_train_then_eval(self, small_corpus, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        code = main(
            ["train", "--manifest", small_corpus, "--model", str(model_path),
             "--input-size", "64", "--scales", "1,1/2", "--epochs", "150",
             "--seed", "3", "--jobs", "1"]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "final loss" in out
        assert model_path.exists()

        code = main(
            ["eval", "--manifest", small_corpus, "--model", str(model_path),
             "--input-size", "64", "--scales", "1,1/2", "--jobs", "1",
             "--out", str(tmp_path / "report.json")]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "Acc: " in out and "AP: " in out
        with open(tmp_path / "report.json") as fp:
            report = json.load(fp)
        assert report["n_samples"] == 6
        assert report["accuracy"] >= 0.8

    def test_eval_missing_model_exits_2(self, small_corpus, tmp_path, capsys):
        code = main(
            ["eval", "--manifest", small_corpus, "--model", str(tmp_path / "none.json")]
        )
        assert code == 2
        capsys.readouterr()

    def test_train_missing_manifest_exits_2(self, tmp_path, capsys):
        code = main(
            ["train", "--manifest", str(tmp_path / "none.csv"),
             "--model", str(tmp_path / "m.json")]
        )
        assert code == 2
        capsys.readouterr()


class TestHist:
    def test_writes_csv(self, tmp_path, capsys):
        manifest = build_corpus(tmp_path / "c", 2, 1, seed=2, size=64)
        out_csv = tmp_path / "hist.csv"
        code = main(["hist", "--manifest", manifest, "--out", str(out_csv),
                     "--input-size", "64", "--scales", "1,1/2", "--jobs", "1"])
        assert code == 0
        capsys.readouterr()
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == "class,level_value,probability"
        assert len(lines) == 11


class TestBench:
    def test_zero_iters_is_usage_error(self, capsys):
        assert main(["bench", "--iters", "0"]) == 1
        capsys.readouterr()

    def test_small_bench_runs(self, capsys):
        code = main(["bench", "--size", "48", "--channels", "2", "--iters", "1"])
        assert code == 0
        out = capsys.readouterr().out
        assert "outputs verified equal: yes" in out
        assert "lep_naive" in out
        assert "ns/pixel" in out
