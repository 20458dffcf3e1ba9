"""Seeded random streams.

Every random draw in the library comes from a PCG64 generator whose
``SeedSequence`` is built from an integer seed plus a *spawn key*, a tuple of
small integers naming where the stream is used.  Seeds chain as::

    rep_seed  = derive_seed(seed, rep)
    design, beta, noise, knockoffs: stream(rep_seed, PURPOSE)
    ensemble  = derive_seed(rep_seed, RUNS)
    run_seed  = derive_seed(ensemble, RUNS, r)
    init, minibatch order: stream(run_seed, INIT | SHUFFLE)

so a repetition or a training run can be regenerated in isolation without
replaying anything that came before it.
"""

import numpy as np

# purpose codes; part of the reproducibility contract, do not renumber
DESIGN = 0
BETA = 1
NOISE = 2
KNOCKOFF = 3
RUNS = 4
INIT = 5
SHUFFLE = 6


def stream(seed, *key):
    """Return an independent generator for ``seed`` and the spawn ``key``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed, *key):
    """Collapse ``(seed, key)`` into a single 63-bit integer seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
