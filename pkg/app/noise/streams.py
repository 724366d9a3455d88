"""
Seed derivation for every random draw in the package.

A stream is identified by a root seed plus a tuple of non-negative integer
keys and is built as ``SeedSequence(seed, spawn_key=keys)``. Any single draw
can therefore be replayed from its key alone, independent of how many other
draws happened before it.

Key layouts:
    perturb retry k:                 (seed, k)
    quasi response j, retry k:       (seed, QUASI, j, k)
    calibration subsample, redraw r: (master, SUBSAMPLE, b_index, q_index, trial, r)
    shared subsample, redraw r:      (master, SHARED_SUBSAMPLE, q_index, trial, r)
    calibration noise, retry k:      (master, NOISE, b_index, q_index, trial, k)
    synthetic column j:              (seed, SYNTH, j)
    synthetic errors:                (seed, SYNTH, p)
"""
import numpy as np

MAX_SEED = 2 ** 64 - 1

QUASI = 1
SUBSAMPLE = 2
SHARED_SUBSAMPLE = 3
NOISE = 4
SYNTH = 5


def stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(keys))))
