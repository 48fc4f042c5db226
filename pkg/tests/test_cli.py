"""CLI pipeline: mkdata -> train stages -> roam -> eval, plus bench."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from roamgen.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def data_dir(workdir) -> Path:
    out = workdir / "data"
    rc = main(["mkdata", "--seed", "100", "--frames", "4", "--difficulty", "mixed",
               "--out", str(out), "--count", "3", "--size", "16", "--chunk", "2"])
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def runs_dir(workdir, data_dir) -> Path:
    out = workdir / "runs"
    common = ["--data", str(data_dir), "--out", str(out), "--size", "16",
              "--chunk", "2", "--batch", "2"]
    assert main(["train", "--stage", "teacher", "--iterations", "6",
                 "--seed", "1", *common]) == 0
    assert main(["train", "--stage", "init", "--iterations", "2",
                 "--seed", "2", *common]) == 0
    assert main(["train", "--stage", "jdmd", "--iterations", "2",
                 "--seed", "3", *common]) == 0
    return out


class TestMkdata:
    def test_writes_paired_episodes(self, data_dir):
        scenes = sorted(p.name for p in data_dir.iterdir())
        assert scenes == ["scene_0100", "scene_0101", "scene_0102"]
        for s in scenes:
            for part in ("ref", "tgt"):
                assert (data_dir / s / part / "meta.json").exists()
                assert (data_dir / s / part / "frames.bin").exists()
                assert (data_dir / s / part / "depths.bin").exists()

    def test_mixed_difficulty_alternates(self, data_dir):
        from roamgen.microworld import load_episode
        static = load_episode(data_dir / "scene_0100" / "ref")
        dynamic = load_episode(data_dir / "scene_0101" / "ref")
        assert static.scene.mover.velocity == (0.0, 0.0, 0.0)
        assert dynamic.scene.mover.velocity != (0.0, 0.0, 0.0)

    def test_rejects_ragged_frames(self, workdir):
        rc = main(["mkdata", "--seed", "0", "--frames", "5", "--out",
                   str(workdir / "bad"), "--chunk", "2"])
        assert rc == 2


class TestTrainStages:
    def test_checkpoints_written_with_stages(self, runs_dir):
        from roamgen.model import load_checkpoint
        for name, stage in (("motion_teacher", "teacher"),
                            ("perceptual_teacher", "teacher"),
                            ("student_init", "init"),
                            ("student", "jdmd"),
                            ("fake_score", "jdmd")):
            model, manifest = load_checkpoint(runs_dir / name)
            assert manifest["stage"] == stage
            assert manifest["config"]["frame_height"] == 16

    def test_metrics_ndjson_records(self, runs_dir):
        lines = (runs_dir / "metrics_teacher.ndjson").read_text().splitlines()
        records = [json.loads(line) for line in lines]
        assert all("iteration" in r and "loss" in r and "wall_seconds" in r
                   for r in records)
        jd = [json.loads(line) for line in
              (runs_dir / "metrics_jdmd.ndjson").read_text().splitlines()]
        assert all({"vis", "ctrl", "total", "task"} <= set(r) for r in jd)


class TestRoamEval:
    def test_roam_then_eval(self, workdir, data_dir, runs_dir):
        script = workdir / "commands.json"
        script.write_text(json.dumps([
            {"kind": "move_forward", "magnitude": 0.2},
            {"kind": "yaw_left", "magnitude": 15.0},
            {"kind": "stop"},
        ]))
        run_dir = workdir / "run0"
        rc = main(["roam", "--ckpt", str(runs_dir / "student"),
                   "--episode", str(data_dir / "scene_0100" / "ref"),
                   "--script", str(script), "--out", str(run_dir), "--seed", "4"])
        assert rc == 0
        frames = np.fromfile(run_dir / "frames.bin", dtype="<f4")
        assert frames.size == 3 * 2 * 16 * 16 * 3

        report_path = workdir / "report.json"
        rc = main(["eval", "--run", str(run_dir), "--report", str(report_path)])
        assert rc == 0
        report = json.loads(report_path.read_text())
        assert {"masked_psnr", "coverage", "rot_error_deg", "trans_error",
                "chunks_per_sec", "high_freq_energy"} <= set(report)
        assert report["chunks_per_sec"] > 0
        # Poses are the command fold itself, so control error is zero.
        assert report["rot_error_deg"] == pytest.approx(0.0, abs=1e-9)
        assert report["trans_error"] == pytest.approx(0.0, abs=1e-12)

    def test_roam_refuses_untrained_checkpoint(self, workdir, data_dir):
        import torch
        from roamgen.model import Denoiser, DenoiserConfig, save_checkpoint
        torch.manual_seed(0)
        cfg = DenoiserConfig(layers=1, heads=2, width=32, patch=8,
                             frame_height=16, frame_width=16, frames_per_chunk=2)
        ckpt = workdir / "untrained"
        save_checkpoint(Denoiser(cfg), ckpt)
        script = workdir / "s.json"
        script.write_text(json.dumps([{"kind": "stop"}]))
        rc = main(["roam", "--ckpt", str(ckpt),
                   "--episode", str(data_dir / "scene_0100" / "ref"),
                   "--script", str(script), "--out", str(workdir / "runx")])
        assert rc == 2


class TestBench:
    def test_bench_runs(self, capsys):
        assert main(["bench", "--sizes", "16", "--repeats", "1"]) == 0
        out = capsys.readouterr().out
        assert "warp" in out and "render" in out
