"""Command-line entry points.

    roamgen mkdata --seed 0 --frames 12 --difficulty static --out data/
    roamgen train --stage teacher --data data/ --out runs/ --seed 0
    roamgen roam --ckpt runs/student --episode data/scene_000/ref \
                 --script commands.json --out run0/
    roamgen eval --run run0/ --scene-seed 1000 --report report.json
    roamgen serve --bind 127.0.0.1:8765 --ckpt runs/student --episodes data/
    roamgen bench
"""

from __future__ import annotations

import argparse
import asyncio
import copy
import json
import sys
from pathlib import Path

import numpy as np
import torch


def _model_config(args, overrides=None):
    from roamgen.model import DenoiserConfig

    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text()).get("model", {})
    base = dict(layers=3, heads=4, width=192, patch=8, frame_height=args.size,
                frame_width=args.size, frames_per_chunk=args.chunk)
    base.update(cfg)
    if overrides:
        base.update(overrides)
    return DenoiserConfig(**base)


def cmd_mkdata(args) -> int:
    from roamgen.geometry import Intrinsics
    from roamgen.microworld import (build_scene, generate_episode,
                                    sample_command_script, save_episode,
                                    script_to_poses)

    out = Path(args.out)
    k = Intrinsics.default(args.size, args.size)
    chunks = args.frames // args.chunk
    if chunks * args.chunk != args.frames:
        print(f"frames ({args.frames}) must be a multiple of the chunk length "
              f"({args.chunk})", file=sys.stderr)
        return 2
    for i in range(args.count):
        seed = args.seed + i
        difficulty = args.difficulty
        if difficulty == "mixed":
            difficulty = "static" if i % 2 == 0 else "dynamic"
        scene = build_scene(seed, difficulty)
        rng = np.random.default_rng(seed)
        for name, label in (("ref", 0), ("tgt", 1)):
            poses = script_to_poses(sample_command_script(rng, chunks), args.chunk)
            save_episode(generate_episode(scene, poses, k, args.chunk),
                         out / f"scene_{seed:04d}" / name)
        print(f"scene_{seed:04d}: tag {scene.scene_tag} ({difficulty})")
    return 0


def cmd_train(args) -> int:
    from roamgen.model import Denoiser, NoiseSchedule, load_checkpoint, save_checkpoint
    from roamgen.training import (JdmdState, PairedEpisodeDataset, Role,
                                  ScoreModel, Stage, TrainPlan, causal_init,
                                  run_jdmd, train_teacher, validate_transition)
    from roamgen.training.metrics import MetricsWriter

    torch.set_num_threads(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    raw_cfg = json.loads(Path(args.config).read_text()) if args.config else {}
    plan_kw = raw_cfg.get("plan", {})
    blur_sigma = raw_cfg.get("blur_sigma", 0.8)
    teacher_schedule = NoiseSchedule.geometric(count=raw_cfg.get("teacher_steps", 8))
    student_schedule = NoiseSchedule.geometric(count=raw_cfg.get("student_steps", 4))

    sharp = PairedEpisodeDataset(args.data)
    blurred = PairedEpisodeDataset(args.data, blur_sigma=blur_sigma)
    stage = Stage(args.stage)
    metrics = MetricsWriter(out / f"metrics_{stage.value}.ndjson")

    if stage is Stage.TEACHER:
        plan = TrainPlan(stage=Stage.TEACHER, **plan_kw)
        cfg = _model_config(args)
        torch.manual_seed(args.seed)
        motion = Denoiser(cfg)
        train_teacher(motion, blurred, plan, conditioned=True,
                      iterations=args.iterations, batch=args.batch,
                      seed=args.seed, schedule=teacher_schedule, metrics=metrics)
        save_checkpoint(motion, out / "motion_teacher", stage="teacher",
                        schedule=teacher_schedule, rng_state={"seed": args.seed})
        torch.manual_seed(args.seed + 1)
        perceptual = Denoiser(cfg)
        train_teacher(perceptual, sharp, plan, conditioned=False,
                      iterations=args.iterations, batch=args.batch,
                      seed=args.seed + 1, schedule=teacher_schedule, metrics=metrics)
        save_checkpoint(perceptual, out / "perceptual_teacher", stage="teacher",
                        schedule=teacher_schedule, rng_state={"seed": args.seed + 1})
    elif stage is Stage.INIT:
        plan = TrainPlan(stage=Stage.INIT, **plan_kw)
        student, manifest = load_checkpoint(out / "motion_teacher")
        validate_transition(manifest.get("stage"), Stage.INIT)
        causal_init(student, sharp, plan, schedule=teacher_schedule,
                    iterations=args.iterations, batch=args.batch,
                    seed=args.seed, metrics=metrics)
        save_checkpoint(student, out / "student_init", stage="init",
                        schedule=student_schedule, rng_state={"seed": args.seed})
    elif stage is Stage.JDMD:
        plan = TrainPlan(stage=Stage.JDMD, **plan_kw)
        student, manifest = load_checkpoint(out / "student_init")
        validate_transition(manifest.get("stage"), Stage.JDMD)
        motion, _ = load_checkpoint(out / "motion_teacher")
        perceptual, _ = load_checkpoint(out / "perceptual_teacher")
        synthetic = ScoreModel(Role.SYNTHETIC, motion, teacher_schedule)
        real = ScoreModel(Role.REAL, perceptual, teacher_schedule, conditioned=False)
        fake = ScoreModel(Role.FAKE, copy.deepcopy(student), teacher_schedule)
        state = JdmdState(student, fake, plan, student_schedule=student_schedule,
                          teacher_schedule=teacher_schedule, seed=args.seed)
        run_jdmd(state, real, synthetic, blurred, sharp,
                 iterations=args.iterations, batch=args.batch, metrics=metrics)
        save_checkpoint(student, out / "student", stage="jdmd",
                        schedule=student_schedule, rng_state={"seed": args.seed})
        save_checkpoint(fake.net, out / "fake_score", stage="jdmd",
                        schedule=teacher_schedule, rng_state={"seed": args.seed})
    metrics.close()
    print(f"stage {stage.value} complete -> {out}")
    return 0


def cmd_roam(args) -> int:
    from roamgen.microworld import load_episode
    from roamgen.model import NoiseSchedule, load_checkpoint
    from roamgen.engine.runner import parse_command_script, run_script, save_run
    from roamgen.engine.session import Session

    model, manifest = load_checkpoint(args.ckpt)
    if manifest.get("stage") in (None, "untrained") and not args.allow_untrained:
        print("checkpoint has no trained stage (use --allow-untrained to override)",
              file=sys.stderr)
        return 2
    schedule = NoiseSchedule(tuple(manifest["schedule"])) if "schedule" in manifest \
        else NoiseSchedule()
    episode = load_episode(args.episode)
    commands = parse_command_script(json.loads(Path(args.script).read_text()))
    session = Session(model=model, schedule=schedule, reference=episode,
                      seed=args.seed)
    frames, poses, masks, elapsed = run_script(session, commands)
    save_run(args.out, frames, poses, masks, elapsed, commands,
             episode_path=args.episode, seed=args.seed,
             chunk_len=episode.chunk_len)
    print(f"{len(commands)} chunks in {elapsed:.2f}s -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    from roamgen.microworld import build_scene, load_episode
    from roamgen.engine.evaluate import evaluate_run
    from roamgen.engine.runner import load_run
    from roamgen.geometry import StepConfig, accumulate, command_to_delta

    meta, frames, masks, poses, commands = load_run(args.run)
    episode = load_episode(meta["episode"])
    if args.scene_seed is not None:
        scene = build_scene(args.scene_seed, args.difficulty)
    elif episode.scene is not None:
        scene = episode.scene
    else:
        print("no scene available: pass --scene-seed", file=sys.stderr)
        return 2

    intended = []
    pose = episode.poses[0]
    for cmd in commands:
        pose = accumulate(pose, command_to_delta(cmd, StepConfig()))
        intended.append(pose)

    world_times = list(range(0, frames.shape[0], meta["chunk_len"]))
    report = evaluate_run(frames, poses, intended, scene, episode.intrinsics,
                          masks, meta["elapsed_seconds"], meta["chunk_len"],
                          world_times=world_times)
    Path(args.report).write_text(json.dumps(report, indent=1))
    print(json.dumps({k: report[k] for k in
                      ("masked_psnr", "coverage", "rot_error_deg",
                       "trans_error", "chunks_per_sec")}, indent=1))
    return 0


def cmd_serve(args) -> int:
    from roamgen.server import serve_sessions

    host, _, port = args.bind.rpartition(":")
    if args.ui:
        import functools
        import http.server
        import threading

        ui_port = int(port) + 1
        handler = functools.partial(http.server.SimpleHTTPRequestHandler,
                                    directory=args.ui)
        httpd = http.server.ThreadingHTTPServer((host or "127.0.0.1", ui_port), handler)
        threading.Thread(target=httpd.serve_forever, daemon=True).start()
        print(f"ui: http://{host or '127.0.0.1'}:{ui_port}/?server=ws://{args.bind}")
    print(f"listening on ws://{args.bind}")
    try:
        asyncio.run(serve_sessions(host or "127.0.0.1", int(port), args.ckpt,
                                   args.episodes, png=args.png,
                                   frame_size=args.size))
    except KeyboardInterrupt:
        pass
    return 0


def cmd_bench(args) -> int:
    from roamgen.kernels.bench import run_benchmarks
    run_benchmarks(sizes=tuple(args.sizes), repeats=args.repeats)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roamgen",
                                description="streaming interactive world generation")
    sub = p.add_subparsers(dest="command", required=True)

    mk = sub.add_parser("mkdata", help="generate paired micro-world episodes")
    mk.add_argument("--seed", type=int, default=0)
    mk.add_argument("--frames", type=int, default=12)
    mk.add_argument("--difficulty", choices=["static", "dynamic", "mixed"],
                    default="static")
    mk.add_argument("--out", required=True)
    mk.add_argument("--count", type=int, default=1)
    mk.add_argument("--size", type=int, default=64)
    mk.add_argument("--chunk", type=int, default=4)
    mk.set_defaults(func=cmd_mkdata)

    tr = sub.add_parser("train", help="run one training stage")
    tr.add_argument("--stage", choices=["teacher", "init", "jdmd"], required=True)
    tr.add_argument("--config", default=None)
    tr.add_argument("--data", required=True)
    tr.add_argument("--out", required=True)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--iterations", type=int, default=1000)
    tr.add_argument("--batch", type=int, default=8)
    tr.add_argument("--size", type=int, default=64)
    tr.add_argument("--chunk", type=int, default=4)
    tr.add_argument("--threads", type=int, default=1)
    tr.set_defaults(func=cmd_train)

    ro = sub.add_parser("roam", help="headless scripted roaming")
    ro.add_argument("--ckpt", required=True)
    ro.add_argument("--episode", required=True)
    ro.add_argument("--script", required=True)
    ro.add_argument("--out", required=True)
    ro.add_argument("--seed", type=int, default=0)
    ro.add_argument("--allow-untrained", action="store_true")
    ro.set_defaults(func=cmd_roam)

    ev = sub.add_parser("eval", help="score a roaming run against the oracle")
    ev.add_argument("--run", required=True)
    ev.add_argument("--scene-seed", type=int, default=None)
    ev.add_argument("--difficulty", choices=["static", "dynamic"], default="static")
    ev.add_argument("--report", required=True)
    ev.set_defaults(func=cmd_eval)

    sv = sub.add_parser("serve", help="websocket session service")
    sv.add_argument("--bind", default="127.0.0.1:8765")
    sv.add_argument("--ckpt", required=True)
    sv.add_argument("--episodes", default=None)
    sv.add_argument("--png", action="store_true")
    sv.add_argument("--size", type=int, default=64)
    sv.add_argument("--ui", default=None)
    sv.set_defaults(func=cmd_serve)

    be = sub.add_parser("bench", help="compare compiled and fallback kernels")
    be.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    be.add_argument("--repeats", type=int, default=5)
    be.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
