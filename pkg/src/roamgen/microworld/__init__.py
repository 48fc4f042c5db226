"""Procedural micro-world: deterministic scenes, an exact ray-cast renderer
supplying oracle depth, and episode generation/storage."""

from roamgen.microworld.scene import Box, Mover, SceneSpec, build_scene, NUM_TAGS
from roamgen.microworld.render import render
from roamgen.microworld.episode import Episode, generate_episode, load_episode, save_episode
from roamgen.microworld.trajectories import (sample_command_script,
                                             sample_translation_script,
                                             script_to_poses)

__all__ = [
    "SceneSpec", "Box", "Mover", "build_scene", "NUM_TAGS",
    "render", "Episode", "generate_episode", "save_episode", "load_episode",
    "sample_command_script", "sample_translation_script", "script_to_poses",
]
