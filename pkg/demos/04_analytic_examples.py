"""Closed-form robustness examples with known exact answers.

Two constructions where robust risk can be written down by hand: a
two-class distribution on the unit sphere separated by an angular
margin, and a pair of classes supported on opposite faces of a scaled
hypercube. Both come with concentration parameters that are exact, not
asymptotic, so the code's output can be checked against arithmetic.
"""

import numpy as np

from polycert.analytic import (
    CubeExampleParams,
    SphereExampleParams,
    cube_concentration,
    cube_empirical_risk,
    cube_risk_bound,
    empirical_concentration_curve,
    sphere_risk_curve,
)
from polycert.data import generate_uos

# Sphere: risk is flat at the base error until the budget crosses the
# collar, then the second class's cap term kicks in near pi/2 - theta0.
params = SphereExampleParams(n=100, theta0=0.1)
print("sphere robust risk (n=100, theta0=0.1)")
for eps in (0.0, 0.05, 0.1, 0.5, np.pi / 2 - 0.1 + 0.01):
    (eps_out, risk), = sphere_risk_curve(params, [eps])
    print(f"  eps {eps_out:6.3f}  risk {risk:.4f}")

# Cube: the closed-form bound 0.5 (e^-alpha + 4 eps) dominates the
# empirical risk under the exact axis-aligned worst case.
print("\ncube robust risk vs bound (n=10)")
for alpha, eps in [(0.7, 0.0), (1.0, 0.02), (1.5, 0.05)]:
    p = CubeExampleParams(n=10, alpha=alpha, epsilon=eps)
    emp = cube_empirical_risk(p, per_class=4000, seed=31)
    print(f"  alpha {alpha:.1f} eps {eps:.2f}  empirical {emp:.4f}  "
          f"bound {cube_risk_bound(p):.4f}")

weak, strong = cube_concentration(CubeExampleParams(n=10, alpha=1.0, epsilon=0.02))
print("\ncube concentration tuples")
print("  weak  (C, eps, delta)   :", (weak.C, weak.epsilon, weak.delta))
print("  strong (eps, delta, gamma):", (strong.epsilon, strong.delta, strong.gamma))

# Empirical concentration on sampled data: keeping each class's m most
# isolated points, eps_m is their clearance from the other class and
# mass the fraction kept.
full, _ = generate_uos(10, 2, 2, 200, 0.05, seed=32)
print("\nempirical concentration (2-class union of subspaces)")
for m, eps, mass in empirical_concentration_curve(full, [1, 2, 5, 10]):
    print(f"  m {m:3d}  eps {eps:.3f}  mass {mass:.3f}")
