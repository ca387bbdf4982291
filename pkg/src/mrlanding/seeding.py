"""Deterministic, independently replayable RNG streams.

Every stream is keyed by (master seed, purpose, a, b, stream name), so a
single training episode or evaluation trial can be regenerated in isolation
without replaying anything that came before it.
"""

from __future__ import annotations

import zlib

import numpy as np

PURPOSE_TRAIN = 0
PURPOSE_EVAL = 1


def _tag(name: str) -> int:
    # stable across processes, unlike hash()
    return zlib.crc32(name.encode("utf-8"))


def stream(seed: int, purpose: int, a: int, b: int, name: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(purpose, int(a), int(b), _tag(name)))
    return np.random.Generator(np.random.PCG64(ss))


def episode_streams(seed: int, step: int, episode: int,
                    names=("init", "explore", "coin")) -> dict[str, np.random.Generator]:
    return {n: stream(seed, PURPOSE_TRAIN, step, episode, n) for n in names}


def trial_streams(seed: int, scenario: int, trial: int,
                  names=("init", "noise", "tie")) -> dict[str, np.random.Generator]:
    return {n: stream(seed, PURPOSE_EVAL, scenario, trial, n) for n in names}
