"""Walk through one reconstruction problem end to end.

Solves the l1 reconstruction for a hand-sized dictionary, checks the
optimality invariants the solver promises, builds the polyhedral
region on which the active set is constant, and measures its exact
inscribed l2 radius against geometry you can verify by hand.
"""

import numpy as np

from polycert.bpdn import DualProblemInstance, active_set, solve
from polycert.certificate import (
    build_certificate,
    contains,
    exact_l2_radius,
    membership,
)
from polycert.data import Dictionary

# Identity dictionary in the plane: atom 1 along e1 (class 1), atom 2
# along e2 (class 2). The query sits on the first axis, so only the
# first constraint of the polar polytope binds.
D = Dictionary(np.eye(2), np.array([1, 2]))
x = np.array([0.5, 0.0])
lam = 4.0

sol = solve(DualProblemInstance(D, x, lam), tol=1e-12)
print("primal coefficients c* :", sol.c_star)
print("residual e*            :", sol.e_star)
print("dual point d* = lam e* :", sol.d_star)
print("duality gap            :", sol.gap)
print("reconstruction error   :", np.linalg.norm(x - D.S @ sol.c_star - sol.e_star))

act = active_set(sol)
print("active (atom, sign)    :", act.entries)

# The certificate is the set of points whose solution keeps this
# active set. Around x = (0.5, 0) it is {x1 >= 0.25} cut down by
# |x2| <= 0.25, so the inscribed radius is exactly 0.25.
cert = build_certificate(sol)
res = exact_l2_radius(cert)
print("exact inscribed radius :", res.r0)
print("face vertices used     :", res.vertex_count)

probe = x + np.array([0.0, 0.2])
m = membership(cert, probe)
print("probe", probe, "member:", m.member, " distance:", m.distance)
print("just past the radius   :",
      contains(cert, x + np.array([-res.r0 * 1.01, 0.0])))
