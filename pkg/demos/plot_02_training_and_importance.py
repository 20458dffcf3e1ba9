"""
Training a paired-input network
===============================

Each original feature and its knockoff enter the network through a pair of
filter weights.  After training, the product of the filter weights with the
weights of the dense layers gives one importance score per original feature
and one per knockoff.
"""

import numpy as np

from deeppink import knockoffs as ko
from deeppink import net, rng

n, p = 600, 8
gen = rng.stream(7)
X = gen.standard_normal((n, p))
y = 2.0 * X[:, 0] - 2.0 * X[:, 1] + gen.standard_normal(n)

sigma = np.eye(p)
model = ko.build_knockoff_model(sigma, ko.equicorrelated_s(sigma))
aug = ko.sample_knockoffs(ko.standardize(X, scale=False), model, rng.stream(7, rng.KNOCKOFF))

# A fresh network predicts the same value whichever member of each pair is fed first.
fresh = net.init_network(p, 0)
print("symmetric at init:", net.forward(fresh, aug.X[0], aug.knockoff[0])
      == net.forward(fresh, aug.knockoff[0], aug.X[0]))

cfg = net.TrainConfig(epochs=60, runs=1, seed=3)
trained = net.train(aug, y, cfg)
print("lambda used:", cfg.resolve_lambda(n, p))

imp = net.importance(trained)
for j in range(p):
    print(f"feature {j}: Z={imp.Z[j]:+.3f}  Z_ko={imp.Z_tilde[j]:+.3f}  W={imp.W[j]:+.4f}")

# Networks from several seeds are averaged to damp the optimizer's randomness.
W = net.run_ensemble(aug, y, net.TrainConfig(epochs=60, runs=3, seed=3))
print("ensemble W:", np.round(W, 4))
