"""Engine behavior: session stepping, reference retrieval, point-cloud
memory, run evaluation, and the factorization/determinism discipline."""

from __future__ import annotations

import numpy as np
import pytest
import torch

from roamgen.geometry import CommandKind, InteractionCommand, Intrinsics, Pose
from roamgen.microworld import (
    build_scene,
    generate_episode,
    sample_command_script,
    script_to_poses,
)
from roamgen.model import Denoiser, DenoiserConfig, NoiseSchedule
from roamgen.engine import PointCloudMemory, Session, select_reference
from roamgen.engine.evaluate import (
    baseline_copy_last,
    baseline_oracle_warp,
    evaluate_run,
    high_frequency_energy,
    masked_psnr,
    PSNR_CAP,
)
from roamgen.engine.conditions import chunk_warps
from roamgen.engine.runner import run_script

CFG = DenoiserConfig(layers=2, heads=4, width=64, patch=8, frame_height=32,
                     frame_width=32, frames_per_chunk=2, tag_vocab=8)
K32 = Intrinsics.default(32, 32)


def warp_copy_stub(config=CFG) -> Denoiser:
    """Denoiser stub: output is exactly the warped frame on covered pixels.

    All weights zero except the copy-initialized geometric output skip, so
    forward() returns the analytic warp copy regardless of noise input.
    """
    model = Denoiser(config)
    with torch.no_grad():
        geo_w = model.geo_out.weight.clone()
        for p in model.parameters():
            p.zero_()
        model.geo_out.weight.copy_(geo_w)
    return model


@pytest.fixture(scope="module")
def reference_episode():
    scene = build_scene(42, "static")
    rng = np.random.default_rng(4)
    poses = script_to_poses(sample_command_script(rng, 4), CFG.frames_per_chunk)
    return generate_episode(scene, poses, K32, CFG.frames_per_chunk)


def make_session(reference, seed=0, **kw) -> Session:
    return Session(model=warp_copy_stub(), schedule=NoiseSchedule(),
                   reference=reference, seed=seed, **kw)


class TestStep:
    def test_stop_with_stub_reproduces_reference_on_mask(self, reference_episode):
        session = make_session(reference_episode)
        frames, warps = session.step(InteractionCommand(CommandKind.STOP))
        ref_chunk = reference_episode.chunk_frames(0)
        for f in range(CFG.frames_per_chunk):
            # stop keeps the pose at the reference start, so the warp is the
            # identity warp: mask equals depth validity, stub copies content.
            rel_mask = warps[f].mask
            np.testing.assert_array_equal(rel_mask,
                                          reference_episode.depth(f).valid)
            np.testing.assert_allclose(frames[f][rel_mask],
                                       ref_chunk[f][rel_mask], atol=1e-5)

    def test_pose_fold_matches_audit(self, reference_episode):
        session = make_session(reference_episode)
        cmds = [InteractionCommand(CommandKind.MOVE_FORWARD, 0.2),
                InteractionCommand(CommandKind.YAW_LEFT, 20.0),
                InteractionCommand(CommandKind.PITCH_DOWN, 10.0)]
        for c in cmds:
            session.step(c)
        assert session.pose.allclose(session.audit_pose(), atol=1e-12)
        assert session.chunk_index == 3

    def test_square_loop_returns_to_identity(self, reference_episode):
        session = make_session(reference_episode)
        for _ in range(4):
            session.step(InteractionCommand(CommandKind.MOVE_FORWARD, 0.5))
            session.step(InteractionCommand(CommandKind.YAW_LEFT, 90.0))
        assert session.relative_pose().allclose(Pose.identity(), atol=1e-9)
        assert session.pose.allclose(session.start_pose, atol=1e-9)

    def test_cache_entries_constant_over_long_run(self, reference_episode):
        session = make_session(reference_episode)
        counts = set()
        for i in range(100):
            session.step(InteractionCommand(CommandKind.STOP))
            if i >= CFG.history_window:
                counts.add(session.cache.entry_count(0))
        assert counts == {CFG.history_window + 1}

    def test_world_time_freeze(self, reference_episode):
        frozen = make_session(reference_episode, freeze_time=True)
        frozen.step(InteractionCommand(CommandKind.STOP))
        assert frozen.world_time == 0
        live = make_session(reference_episode)
        live.step(InteractionCommand(CommandKind.STOP))
        assert live.world_time == CFG.frames_per_chunk


class TestSelectReference:
    def test_aligned_and_clamped(self, reference_episode):
        session = make_session(reference_episode)
        assert select_reference(session, 0).chunk_index == 0
        last = reference_episode.num_chunks - 1
        assert select_reference(session, 999).chunk_index == last

    def test_monotone_in_chunk_index(self, reference_episode):
        session = make_session(reference_episode)
        picks = [select_reference(session, i).chunk_index for i in range(10)]
        assert picks == sorted(picks)

    def test_strict_mode_raises_past_end(self, reference_episode):
        from roamgen.engine.session import ReferenceExhausted
        session = make_session(reference_episode, strict_reference=True)
        with pytest.raises(ReferenceExhausted):
            select_reference(session, reference_episode.num_chunks)


class TestPointCloudMemory:
    def test_disabled_stays_empty(self, reference_episode):
        session = make_session(reference_episode)
        session.step(InteractionCommand(CommandKind.MOVE_FORWARD, 0.2))
        assert session.memory is None

    def test_budget_enforced(self, reference_episode):
        mem = PointCloudMemory(budget=5000)
        session = make_session(reference_episode, memory=mem)
        for _ in range(6):
            session.step(InteractionCommand(CommandKind.YAW_RIGHT, 20.0))
        assert 0 < len(mem) <= 5000
        # oldest-source-first eviction
        assert mem.source_chunk.min() >= 0
        assert (np.diff(mem.source_chunk) >= 0).all()

    def test_memory_improves_return_coverage(self, reference_episode):
        # Roam away (yaw far off the reference view) and back; the warp at
        # the return pose must cover at least as much with memory as without.
        script = ([InteractionCommand(CommandKind.YAW_RIGHT, 45.0)] * 3
                  + [InteractionCommand(CommandKind.YAW_LEFT, 45.0)] * 3)

        def final_coverage(memory):
            session = make_session(reference_episode, memory=memory)
            cov = None
            for cmd in script:
                _, warps = session.step(cmd)
                cov = float(np.mean([w.mask.mean() for w in warps]))
            return cov

        without = final_coverage(None)
        with_mem = final_coverage(PointCloudMemory(budget=400_000))
        assert with_mem >= without

    def test_rejects_bad_budget(self):
        with pytest.raises(ValueError):
            PointCloudMemory(budget=0)


class TestEvaluateRun:
    def test_perfect_output_reports_cap(self, reference_episode):
        scene = build_scene(42, "static")
        pose = Pose.identity()
        oracle = []
        for t in range(CFG.frames_per_chunk):
            from roamgen.microworld import render
            frame, _ = render(scene, pose, K32, t)
            oracle.append(frame)
        outputs = np.stack(oracle)
        masks = np.ones(outputs.shape[:3], dtype=bool)
        report = evaluate_run(outputs, [pose], [pose], scene, K32, masks,
                              wall_seconds=1.0, chunk_len=CFG.frames_per_chunk)
        assert report["masked_psnr"] == PSNR_CAP
        assert report["coverage"] == 1.0
        assert report["chunks_per_sec"] > 0
        assert report["rot_error_deg"] == pytest.approx(0.0, abs=1e-9)

    def test_copy_last_scores_below_oracle_warp(self, reference_episode):
        # Translating trajectory: freezing the last frame must lose to the
        # geometry-aware warp on masked PSNR.
        scene = build_scene(42, "static")
        k = CFG.frames_per_chunk
        poses = [Pose(np.eye(3), np.array([0.12 * (i + 1), 0.0, 0.1 * (i + 1)]))
                 for i in range(3)]
        from roamgen.microworld import render
        oracle = np.stack([render(scene, poses[c], K32, c * k + f)[0]
                           for c in range(3) for f in range(k)])
        warps = []
        for c in range(3):
            warps.extend(chunk_warps(reference_episode, c, [poses[c]] * k))
        masks = np.stack([w.mask for w in warps])
        copy_frames = baseline_copy_last(reference_episode, 3)
        warp_frames = baseline_oracle_warp(warps)
        psnr_copy = np.mean([masked_psnr(copy_frames[i], oracle[i], masks[i])
                             for i in range(3 * k)])
        psnr_warp = np.mean([masked_psnr(warp_frames[i], oracle[i], masks[i])
                             for i in range(3 * k)])
        assert psnr_copy < psnr_warp

    def test_high_frequency_energy_orders_blur(self):
        rng = np.random.default_rng(0)
        sharp = rng.random((2, 16, 16, 3)).astype(np.float32)
        from roamgen.training import gaussian_blur
        blurred = gaussian_blur(sharp, sigma=1.2)
        assert high_frequency_energy(sharp) > high_frequency_energy(blurred)

    def test_rejects_mismatched_lengths(self, reference_episode):
        scene = build_scene(42, "static")
        outputs = np.zeros((4, 32, 32, 3), dtype=np.float32)
        masks = np.ones((4, 32, 32), dtype=bool)
        with pytest.raises(ValueError):
            evaluate_run(outputs, [Pose.identity()] * 3, [Pose.identity()] * 3,
                         scene, K32, masks, 1.0, chunk_len=2)


class TestDeterminismAndCausality:
    def test_fixed_seed_and_script_bit_identical(self, reference_episode):
        torch.manual_seed(8)
        model = Denoiser(CFG)
        script = [InteractionCommand(CommandKind.MOVE_FORWARD, 0.2),
                  InteractionCommand(CommandKind.YAW_LEFT, 15.0),
                  InteractionCommand(CommandKind.STOP)]

        def run():
            session = Session(model=model, schedule=NoiseSchedule(),
                              reference=reference_episode, seed=11)
            frames, poses, masks, _ = run_script(session, script)
            return frames, masks

        fa, ma = run()
        fb, mb = run()
        np.testing.assert_array_equal(fa, fb)
        np.testing.assert_array_equal(ma, mb)

    def test_future_commands_do_not_change_past_chunks(self, reference_episode):
        torch.manual_seed(8)
        model = Denoiser(CFG)
        base = [InteractionCommand(CommandKind.MOVE_FORWARD, 0.2),
                InteractionCommand(CommandKind.YAW_LEFT, 15.0),
                InteractionCommand(CommandKind.MOVE_BACK, 0.3)]
        altered = base[:2] + [InteractionCommand(CommandKind.PITCH_UP, 25.0)]

        def run(script):
            session = Session(model=model, schedule=NoiseSchedule(),
                              reference=reference_episode, seed=11)
            frames, _, _, _ = run_script(session, script)
            return frames

        k = CFG.frames_per_chunk
        fa = run(base)
        fb = run(altered)
        np.testing.assert_array_equal(fa[: 2 * k], fb[: 2 * k])
        assert not np.array_equal(fa[2 * k:], fb[2 * k:])
