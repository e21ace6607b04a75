"""
Seed fan-out.

Every random draw in the engine comes from a generator derived from
(master seed, stage, counters). Streams never depend on how many numbers
another stream consumed, so trials and samples can run in any order or in
parallel and still give identical results.
"""
import zlib
import numpy as np

def stage_key(name: str) -> int:
    """stable integer for a named stage (dataset, forward, train, noise, ...)"""
    return zlib.crc32(name.encode("utf-8"))

def _entropy(seed) -> int:
    if isinstance(seed, np.random.SeedSequence):
        return seed.entropy
    if isinstance(seed, (int, np.integer)):
        if seed < 0:
            raise ValueError("seeds must be non-negative")
        return int(seed)
    raise TypeError(f"expected an integer seed or SeedSequence, got {type(seed).__name__}")

def _counter(value) -> int:
    if isinstance(value, str):
        return stage_key(value)
    return int(value)

def seed_sequence(seed, *counters) -> np.random.SeedSequence:
    base = ()
    if isinstance(seed, np.random.SeedSequence):
        base = tuple(seed.spawn_key)
    return np.random.SeedSequence(_entropy(seed), spawn_key=base + tuple(_counter(c) for c in counters))

def stream(seed, *counters) -> np.random.Generator:
    """generator for (seed, *counters). strings are hashed to stage keys."""
    return np.random.default_rng(seed_sequence(seed, *counters))

def child(seed, *counters) -> np.random.SeedSequence:
    """sub-seed that can be handed to another stage and fanned out further"""
    return seed_sequence(seed, *counters)

def as_generator(rng) -> np.random.Generator:
    """accept a Generator, an int seed or a SeedSequence"""
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(rng)

def root(rng) -> np.random.SeedSequence:
    """
    turn whatever the caller handed us into a SeedSequence that can be fanned out.
    a Generator is consumed once to seed the fan-out.
    """
    if isinstance(rng, np.random.Generator):
        return np.random.SeedSequence(int(rng.integers(0, 2**63 - 1)))
    return seed_sequence(rng)
