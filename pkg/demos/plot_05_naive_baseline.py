"""
Dropping the pairwise layer
===========================

The naive baseline feeds the 2p augmented columns straight into a dense
network.  Importances come from the same weight path product, read off at
column j for the feature and column j + p for its knockoff.  Without the
paired filters the two members of a pair do not compete directly.  The
comparison below runs both on the same repetition.
"""

from dataclasses import replace

import numpy as np

from deeppink import filter as kf
from deeppink import net, simgen

cfg = simgen.SimConfig(n=500, p=30, s_sparsity=10, repetitions=1, seed=2,
                       train=net.TrainConfig(epochs=40, runs=2))
for method in ("deeppink", "naive-mlp"):
    rec = simgen.run_repetition(replace(cfg, method=method), 0)
    W = np.array(rec["W"])
    null = np.delete(W, rec["support"])
    print(f"{method:10s} FDP={rec['fdp']:.3f} power={rec['power']:.3f} "
          f"null W>0: {(null > 0).sum()}/{null.size}")

print("rule used:", cfg.rule, "among", kf.RULES)
