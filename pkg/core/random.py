import numpy as np

# Stage identifiers are part of the reproducibility contract; never renumber.
STAGES = {
    "target": 0,
    "kernel": 1,
}


def stage_rng(seed: int, stage: str) -> np.random.Generator:
    """
    Independent generator for one pipeline stage, derived from the run seed.
    The same (seed, stage) pair always yields the same stream.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(STAGES[stage],))))
