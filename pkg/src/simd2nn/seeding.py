"""Counter-derived random streams for reproducible parallel simulation.

Every stochastic draw in the package comes from a Philox counter-based
generator keyed by (master_seed, purpose, *indices). Streams for distinct
purpose/index tuples are statistically independent, and any evaluation
order (serial, batched, parallel) sees identical numbers.
"""

import numpy as np

# Purpose tags. Values are part of the reproducibility contract: changing
# them changes every derived stream.
CHANNEL = 0
PARAM_INIT = 1
SAMPLE = 2
SHUFFLE = 3
TRAIN_NOISE = 4
EVAL_NOISE = 5
SYNTH = 6


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Return the generator for one (purpose, index...) derivation path."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))
