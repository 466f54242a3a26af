"""Classify points near a union of subspaces, then try to break it.

Draws a two-class corpus on random 2-d subspaces of R^10, labels each
point by majority vote over the atoms its dual solution activates, and
runs two attacks: a projected-ascent search confined to each point's
certificate region (which provably cannot flip the vote), and an
unconstrained boundary search against a nearest-subspace classifier
(which can, once the budget clears the decision boundary).
"""

import numpy as np

from polycert.attacks import AttackConfig, boundary_attack, pgd_in_certificate
from polycert.classifier import predict_dual, score_nearest_subspace
from polycert.data import build_dictionary, generate_uos
from polycert.numerics import spawn_seeds
from polycert.smoothing import make_dual_base

LAM = 2.0

# One draw, split per class: evaluation points and dictionary atoms must
# come from the same subspaces or the dictionary explains nothing.
full, model = generate_uos(10, 2, 2, 32, 0.0, seed=11)
eval_idx = [i for k in (0, 1) for i in range(32 * k, 32 * k + 20)]
pool_idx = [i for k in (0, 1) for i in range(32 * k + 20, 32 * (k + 1))]
dataset, pool = full.subset(eval_idx), full.subset(pool_idx)
dictionary = build_dictionary(pool, 24, seed=12, balanced=True)

correct = 0
certs = []
for i in range(dataset.count):
    pred, cert = predict_dual(dictionary, dataset.point(i), LAM)
    correct += pred.label == int(dataset.labels[i])
    certs.append(cert)
print(f"clean accuracy {correct / dataset.count:.2f} on {dataset.count} points")

# Attack 1: strongest perturbation that keeps the certificate's active
# set. The vote is a function of the active set, so success stays 0.
base = make_dual_base(dictionary, LAM)
seeds = spawn_seeds(13, dataset.count)
flips = 0
for i in range(dataset.count):
    res = pgd_in_certificate(
        base, dataset.point(i), int(dataset.labels[i]), certs[i],
        AttackConfig(epsilon=0.2, steps=15, step_size=0.05, seed=seeds[i]),
    )
    flips += bool(res.success)
print(f"certificate-confined attack, eps 0.2: {flips} flips")

# Attack 2: boundary search against a nearest-subspace rule, free to
# leave the certificate. Distances to the boundary are finite, so large
# budgets succeed.
def nearest(x):
    return int(np.argmax(score_nearest_subspace(model, x))) + 1

succ = dists = 0
for i in range(dataset.count):
    res = boundary_attack(
        nearest, dataset.point(i), int(dataset.labels[i]),
        AttackConfig(epsilon=2.0, steps=12, step_size=0.1, seed=seeds[i]),
    )
    if res.success:
        succ += 1
        dists += res.final_l2
print(f"unconstrained boundary attack, eps 2.0: {succ} flips, "
      f"mean flip distance {dists / max(1, succ):.3f}")
