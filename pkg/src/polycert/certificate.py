"""Polyhedral invariance regions built from a dual solution.

The dual optimum d* of the reconstruction problem sits on a face of the
feasible polytope {w : |<s_i, w>| <= 1}.  That face F (active rows held
at equality, the rest at most one) plus the cone V spanned by the
active signed atoms form the region C = F + V: every x' with lam*x'
inside C reproduces the same active set, so any quantity read off the
active set (in particular the predicted label) is constant there.

This module materializes C, decides membership, projects arbitrary
points onto its closure with an operator-splitting QP, enumerates the
extreme points of F at small scale, and computes the exact l2 radius of
the largest ball around the anchor contained in C by enumerating the
facets of C.

All geometry lives in the lam-scaled space: a query point y enters as
lam*y and projections are divided by lam on the way out.  Certificates
are immutable once built; membership and projection calls are pure and
may run concurrently.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .bpdn import ActiveSet, DualSolution
from .bpdn import active_set as _default_active_set
from .data import Dictionary
from .errors import (
    ArgumentError,
    CertificateUndefinedError,
    ConvergenceError,
    ModelError,
    ParseError,
    SizeError,
)

DEFAULT_MEMBERSHIP_TOL = 1e-7
DEFAULT_PROJECTION_TOL = 1e-6
MAX_QP_ITERATIONS = 100_000

# operator-splitting parameters
_SIGMA = 1e-6
_RHO_BOUND = 1.0
_RHO_EQ = 1e3  # equality rows need stiffer multipliers
_RHO_INEQ = 1.0
_RELAX = 1.6

_SUBSET_CAP = 2_000_000  # basis subsets examined before giving up
_SVD_CHUNK = 50_000
_MATRIX_ENTRY_LIMIT = 200_000  # serialize constraint matrices below this

JSON_FORMAT_NAME = "polycert-certificate"


@dataclass
class MembershipResult:
    """Outcome of a membership query.

    ``distance`` is measured in the lam-scaled space.  ``boundary``
    is a conservative flag: it is always set for points on the relative
    boundary of the face part of the region (where active-set equality
    of nearby re-solves is no longer guaranteed), and may also fire for
    interior points whose computed decomposition grazes a constraint.
    """

    member: bool
    boundary: bool
    distance: float


@dataclass
class ExactRadiusResult:
    """Largest certified l2 ball around the anchor.

    ``witness_u`` is the unit outward normal of a facet attaining the
    minimum distance: anchor_x + r0 * witness_u lies on the boundary of
    the region (in x-space) and any larger step along witness_u exits.
    ``vertex_count`` records how many extreme points of the face were
    enumerated on the way.
    """

    r0: float
    witness_u: np.ndarray | None
    vertex_count: int


@dataclass(eq=False)
class CertificatePolyhedron:
    """Invariance region C = F + V attached to one dual solution.

    F is the face of the dual feasible polytope selected by ``active``
    and V the cone generated by the active signed atoms.  ``anchor_x``
    is the query point the certificate was built at, with the exact
    decomposition lam*anchor_x = A1 @ alpha_anchor + d_anchor.
    """

    dictionary: Dictionary
    anchor_x: np.ndarray
    lam: float
    tau: float
    active: ActiveSet
    alpha_anchor: np.ndarray
    d_anchor: np.ndarray
    _qp: object = field(default=None, init=False, repr=False)

    @property
    def dim(self) -> int:
        return self.dictionary.dim

    @property
    def cone_generators(self) -> np.ndarray:
        """Active signed atoms, one per column; generators of V."""
        return self.active.signed_matrix(self.dictionary)

    @property
    def equality_normals(self) -> np.ndarray:
        """Row normals held at equality on F; same set as the cone generators."""
        return self.cone_generators

    @property
    def inequality_normals(self) -> np.ndarray:
        """Every remaining signed atom (materialized: large at scale)."""
        keep = np.ones(2 * self.dictionary.size, dtype=bool)
        keep[self.active_signed_indices()] = False
        return self.dictionary.signed_view()[:, keep]

    def active_signed_indices(self) -> np.ndarray:
        idx = self.active.signed_indices(self.dictionary.size)
        return np.sort(np.asarray(idx, dtype=np.int64))


def build_certificate(
    sol: DualSolution, active: ActiveSet | None = None
) -> CertificatePolyhedron:
    """Assemble the invariance region for one solved instance.

    ``active`` defaults to the tau-active set of ``sol``.  An empty
    active set means lam*x lies strictly inside the feasible polytope
    and selects no face, so no certificate exists there.
    """
    if active is None:
        active = _default_active_set(sol)
    if active.size == 0:
        raise CertificateUndefinedError(
            "empty active set: the scaled query point is interior to the dual "
            "feasible polytope and selects no face"
        )
    idx = active.indices()
    if len(set(idx)) != len(idx):
        raise ModelError(
            "active set lists both signs of one atom; no dual point satisfies "
            "both equalities"
        )
    D = sol.instance.dictionary
    if min(idx) < 0 or max(idx) >= D.size:
        raise ModelError("active set indexes outside the dictionary")
    lam = sol.instance.lam
    A1 = active.signed_matrix(D)
    signs = np.asarray(active.signs(), dtype=float)
    alpha = lam * np.maximum(signs * sol.c_star[idx], 0.0)
    d_anchor = lam * sol.instance.x - A1 @ alpha
    eq_err = float(np.abs(A1.T @ d_anchor - 1.0).max())
    if eq_err > 100.0 * active.tau + 1e-9:
        raise ModelError(
            f"active set inconsistent with the dual solution "
            f"(equality residual {eq_err:.3e})"
        )
    return CertificatePolyhedron(
        dictionary=D,
        anchor_x=sol.instance.x.copy(),
        lam=lam,
        tau=active.tau,
        active=active,
        alpha_anchor=alpha,
        d_anchor=d_anchor,
    )


class _ProjectionQP:
    """Cached splitting-method state for projections onto closure(C).

    Variables z = (alpha, d) with target B z = A1 alpha + d.  Rows of
    the constraint operator: alpha >= 0, A1^T d = 1, A2^T d <= 1.  The
    linear system matrix is factorized once per certificate; products
    with A2 are routed through the dictionary so the inactive block is
    never materialized.
    """

    def __init__(self, cert: CertificatePolyhedron):
        D = cert.dictionary
        self.S = D.S
        n, M = self.S.shape
        self.A1 = cert.cone_generators
        a = self.A1.shape[1]
        self.n, self.M, self.a = n, M, a
        act = cert.active_signed_indices()
        keep = np.ones(2 * M, dtype=bool)
        keep[act] = False
        self.inact = np.flatnonzero(keep)
        m2 = self.inact.size
        self.m2 = m2

        G11 = self.A1.T @ self.A1
        A1A1t = self.A1 @ self.A1.T
        SSt = self.S @ self.S.T
        K = np.empty((a + n, a + n))
        K[:a, :a] = G11 + (_SIGMA + _RHO_BOUND) * np.eye(a)
        K[:a, a:] = self.A1.T
        K[a:, :a] = self.A1
        K[a:, a:] = (
            (1.0 + _SIGMA) * np.eye(n)
            + _RHO_EQ * A1A1t
            + _RHO_INEQ * (2.0 * SSt - A1A1t)
        )
        self.factor = cho_factor(K)

        inf = np.inf
        self.lo = np.concatenate([np.zeros(a), np.ones(a), np.full(m2, -inf)])
        self.hi = np.concatenate([np.full(a, inf), np.ones(a), np.ones(m2)])
        self.rho = np.concatenate(
            [np.full(a, _RHO_BOUND), np.full(a, _RHO_EQ), np.full(m2, _RHO_INEQ)]
        )

    def signed_inactive(self, d: np.ndarray) -> np.ndarray:
        g = self.S.T @ d
        return np.concatenate([g, -g])[self.inact]

    def c_apply(self, z: np.ndarray) -> np.ndarray:
        alpha, d = z[: self.a], z[self.a :]
        return np.concatenate([alpha, self.A1.T @ d, self.signed_inactive(d)])

    def ct_apply(self, v: np.ndarray) -> np.ndarray:
        a, M = self.a, self.M
        out = np.empty(a + self.n)
        out[:a] = v[:a]
        vfull = np.zeros(2 * M)
        vfull[self.inact] = v[2 * a :]
        out[a:] = self.A1 @ v[a : 2 * a] + self.S @ (vfull[:M] - vfull[M:])
        return out

    def b_apply(self, z: np.ndarray) -> np.ndarray:
        return self.A1 @ z[: self.a] + z[self.a :]

    def bt_apply(self, w: np.ndarray) -> np.ndarray:
        return np.concatenate([self.A1.T @ w, w])

    def p_apply(self, z: np.ndarray) -> np.ndarray:
        return self.bt_apply(self.b_apply(z))


def _qp_state(cert: CertificatePolyhedron) -> _ProjectionQP:
    if cert._qp is None:
        object.__setattr__(cert, "_qp", _ProjectionQP(cert))
    return cert._qp


def _polish(qp: _ProjectionQP, u, z, mu):
    """Equality-KKT refinement on the guessed tight set.

    Returns a candidate z or None when the guess is infeasible.
    """
    a, n = qp.a, qp.n
    Cz = qp.c_apply(z)
    tight_alpha = np.flatnonzero((Cz[:a] <= 1e-6) | (mu[:a] < -1e-9))
    ineq_vals = Cz[2 * a :]
    tight_ineq = np.flatnonzero((ineq_vals >= 1.0 - 1e-6) | (mu[2 * a :] > 1e-9))

    rows = []
    rhs = []
    for j in tight_alpha:
        e = np.zeros(a + n)
        e[j] = 1.0
        rows.append(e)
        rhs.append(0.0)
    eq_block = np.hstack([np.zeros((a, a)), qp.A1.T])
    rows.extend(eq_block)
    rhs.extend([1.0] * a)
    if tight_ineq.size:
        T_signed = np.zeros((tight_ineq.size, a + n))
        for r, j in enumerate(tight_ineq):
            col = qp.inact[j]
            sign = 1.0 if col < qp.M else -1.0
            T_signed[r, a:] = sign * qp.S[:, col % qp.M]
        rows.extend(T_signed)
        rhs.extend([1.0] * tight_ineq.size)
    E = np.asarray(rows)
    b = np.asarray(rhs)
    m = E.shape[0]

    P = np.zeros((a + n, a + n))
    P[:a, :a] = qp.A1.T @ qp.A1
    P[:a, a:] = qp.A1.T
    P[a:, :a] = qp.A1
    P[a:, a:] = np.eye(n)
    delta = 1e-9
    K = np.zeros((a + n + m, a + n + m))
    K[: a + n, : a + n] = P + delta * np.eye(a + n)
    K[: a + n, a + n :] = E.T
    K[a + n :, : a + n] = E
    K[a + n :, a + n :] = -delta * np.eye(m)
    full_rhs = np.concatenate([qp.bt_apply(u), b])
    try:
        sol = np.linalg.solve(K, full_rhs)
        # one refinement pass against the unregularized system
        resid = full_rhs.copy()
        resid[: a + n] -= P @ sol[: a + n] + E.T @ sol[a + n :]
        resid[a + n :] -= E @ sol[: a + n]
        sol = sol + np.linalg.solve(K, resid)
    except np.linalg.LinAlgError:
        return None
    z_new = sol[: a + n]

    Cz_new = qp.c_apply(z_new)
    if Cz_new[:a].min(initial=0.0) < -1e-9:
        return None
    if np.abs(Cz_new[a : 2 * a] - 1.0).max(initial=0.0) > 1e-9:
        return None
    if Cz_new[2 * a :].max(initial=-np.inf) > 1.0 + 1e-9:
        return None
    return z_new


def _project_scaled(cert: CertificatePolyhedron, u: np.ndarray, tol: float,
                    max_iterations: int = MAX_QP_ITERATIONS):
    """Project the lam-scaled point u onto closure(C); returns (point, distance)."""
    if tol <= 0:
        raise ArgumentError(f"tol must be positive, got {tol}")
    qp = _qp_state(cert)
    a = qp.a
    q = -qp.bt_apply(u)

    z = np.concatenate([cert.alpha_anchor, cert.d_anchor])
    zeta = np.clip(qp.c_apply(z), qp.lo, qp.hi)
    mu = np.zeros_like(zeta)
    rho = qp.rho

    converged = False
    rp = rd = np.inf
    for it in range(1, max_iterations + 1):
        rhs = _SIGMA * z - q + qp.ct_apply(rho * zeta - mu)
        zt = cho_solve(qp.factor, rhs)
        Czt = qp.c_apply(zt)
        z = _RELAX * zt + (1.0 - _RELAX) * z
        w = _RELAX * Czt + (1.0 - _RELAX) * zeta
        zeta_new = np.clip(w + mu / rho, qp.lo, qp.hi)
        mu = mu + rho * (w - zeta_new)
        zeta = zeta_new
        if it % 25 == 0 or it == max_iterations:
            Cz = qp.c_apply(z)
            Pz = qp.p_apply(z)
            dual_vec = qp.ct_apply(mu)
            rp = float(np.abs(Cz - zeta).max(initial=0.0))
            rd = float(np.abs(Pz + q + dual_vec).max(initial=0.0))
            rp_ref = max(1.0, float(np.abs(Cz).max(initial=0.0)),
                         float(np.abs(zeta).max(initial=0.0)))
            rd_ref = max(1.0, float(np.abs(Pz).max(initial=0.0)),
                         float(np.abs(q).max()), float(np.abs(dual_vec).max(initial=0.0)))
            if rp <= tol * rp_ref and rd <= tol * rd_ref:
                converged = True
                break
    if not converged:
        raise ConvergenceError(
            f"projection did not reach tol={tol} within {max_iterations} "
            f"iterations (primal residual {rp:.3e}, dual residual {rd:.3e})",
            iterate=qp.b_apply(z) / cert.lam,
            residual=max(rp, rd),
        )

    polished = _polish(qp, u, z, mu)
    if polished is not None:
        if np.linalg.norm(u - qp.b_apply(polished)) <= np.linalg.norm(u - qp.b_apply(z)) + 1e-12:
            z = polished
    point = qp.b_apply(z)
    return z, point, float(np.linalg.norm(u - point))


def project_onto(
    cert: CertificatePolyhedron,
    y: np.ndarray,
    tol: float = DEFAULT_PROJECTION_TOL,
    max_iterations: int = MAX_QP_ITERATIONS,
) -> np.ndarray:
    """Nearest point of closure(C) to lam*y, returned in x-space.

    ``tol`` bounds the splitting-method primal/dual residuals; the
    final refinement step usually leaves the result near machine
    precision regardless.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (cert.dim,):
        raise ModelError(f"point has shape {y.shape}, expected ({cert.dim},)")
    _, point, _ = _project_scaled(cert, cert.lam * y, tol, max_iterations)
    return point / cert.lam


def membership(
    cert: CertificatePolyhedron,
    x_prime: np.ndarray,
    tol: float = DEFAULT_MEMBERSHIP_TOL,
) -> MembershipResult:
    """Decide dist(lam*x_prime, closure(C)) <= tol, with a boundary flag.

    The flag is conservative: set whenever the point needed nonzero
    projection, or its computed decomposition holds some inactive-atom
    constraint within 10*tol of equality (every decomposition of a true
    face-boundary point does).
    """
    x_prime = np.asarray(x_prime, dtype=float)
    if x_prime.shape != (cert.dim,):
        raise ModelError(f"point has shape {x_prime.shape}, expected ({cert.dim},)")
    if tol <= 0:
        raise ArgumentError(f"tol must be positive, got {tol}")
    inner = min(1e-8, tol / 10.0)
    z, _, dist = _project_scaled(cert, cert.lam * x_prime, inner)
    member = dist <= tol
    boundary = False
    if member:
        qp = _qp_state(cert)
        slack = qp.signed_inactive(z[qp.a :])
        grazing = bool(slack.max(initial=-np.inf) >= 1.0 - 10.0 * tol)
        boundary = grazing or dist > 0.1 * tol
    return MembershipResult(member=member, boundary=boundary, distance=dist)


def contains(
    cert: CertificatePolyhedron,
    x_prime: np.ndarray,
    tol: float = DEFAULT_MEMBERSHIP_TOL,
) -> bool:
    """True iff lam*x_prime lies in closure(C) up to tol."""
    return membership(cert, x_prime, tol).member


def enumerate_face_vertices(
    cert: CertificatePolyhedron, max_vertices: int = 1024
) -> list[np.ndarray]:
    """All extreme points of the face F, in the lam-scaled space.

    Exhaustive basis enumeration: with the active equalities fixing
    rank(A1) directions, every vertex is determined by a complementary
    set of inactive rows held at equality.  Small-scale by design; the
    subset count and the vertex count are both budgeted.
    """
    if max_vertices < 1:
        raise ArgumentError(f"max_vertices must be >= 1, got {max_vertices}")
    D = cert.dictionary
    S = D.S
    n = cert.dim
    if np.linalg.matrix_rank(S) < n:
        raise ModelError(
            "dictionary does not span the ambient space; the face has "
            "unbounded directions and no extreme points"
        )
    A1 = cert.cone_generators
    a = A1.shape[1]

    # affine hull {A1^T d = 1} parametrized as d = d0 + N y
    d0, *_ = np.linalg.lstsq(A1.T, np.ones(a), rcond=None)
    if np.abs(A1.T @ d0 - 1.0).max() > 1e-9:
        raise ModelError("active equalities are inconsistent")
    _, svals, vh = np.linalg.svd(A1.T)
    r1 = int(np.sum(svals > max(a, n) * np.finfo(float).eps * svals[0]))
    k = n - r1

    T = D.signed_view()
    keep = np.ones(2 * D.size, dtype=bool)
    keep[cert.active_signed_indices()] = False
    Ti = T[:, keep]

    def feasible(d):
        return Ti.T @ d <= 1.0 + 1e-9

    if k == 0:
        if not feasible(d0).all():
            return []
        return [d0]

    N = vh[r1:].T  # (n, k)
    W = Ti.T @ N
    r = 1.0 - Ti.T @ d0
    m2 = W.shape[0]
    total = math.comb(m2, k) if m2 >= k else 0
    if total > _SUBSET_CAP:
        raise SizeError(
            f"vertex enumeration needs {total} basis subsets, over the "
            f"{_SUBSET_CAP} cap"
        )
    if total == 0:
        return []

    combos = np.array(list(itertools.combinations(range(m2), k)), dtype=np.intp)
    Wb = W[combos]  # (B, k, k)
    rb = r[combos]
    row_norms = np.linalg.norm(Wb, axis=2)
    ok = row_norms.min(axis=1) > 1e-12
    Wn = Wb / np.maximum(row_norms, 1e-300)[:, :, None]
    with np.errstate(all="ignore"):
        ok &= np.abs(np.linalg.det(Wn)) > 1e-10
    if not ok.any():
        return []
    ys = np.linalg.solve(Wb[ok], rb[ok][..., None])[..., 0]
    feas = np.all(ys @ W.T <= r[None, :] + 1e-9, axis=1)
    ys = ys[feas]
    if ys.shape[0] == 0:
        return []
    _, first = np.unique(np.round(ys, 8), axis=0, return_index=True)
    ys = ys[np.sort(first)]
    if ys.shape[0] > max_vertices:
        raise SizeError(
            f"face has more than max_vertices={max_vertices} extreme points"
        )
    return [d0 + N @ y for y in ys]


def exact_l2_radius(
    cert: CertificatePolyhedron, max_vertices: int = 1024
) -> ExactRadiusResult:
    """Radius of the largest l2 ball around the anchor inside C (x-space).

    Works from the vertex description: the region is the convex hull of
    the face vertices plus the cone of active atoms, so its facets are
    found among hyperplanes spanned by n of those generators (in
    homogeneous coordinates).  Every supporting halfspace keeps the
    whole region on one side, so the minimum anchor-to-facet distance
    is exact.  Small-scale by design.
    """
    verts = enumerate_face_vertices(cert, max_vertices)
    nv = len(verts)
    if nv == 0:
        raise ModelError("face is empty; no certificate geometry to measure")
    n = cert.dim
    lam = cert.lam
    anchor = lam * cert.anchor_x
    R = cert.cone_generators
    V = np.array(verts).T
    gens = np.zeros((n + 1, nv + R.shape[1]))
    gens[:n, :nv] = V
    gens[n, :nv] = 1.0
    gens[:n, nv:] = R
    g = gens.shape[1]

    if np.linalg.matrix_rank(gens) < n + 1:
        # region spans a lower-dimensional slice: the ball degenerates
        _, _, vh = np.linalg.svd(gens.T)
        rank = np.linalg.matrix_rank(gens)
        nullity = vh[rank:]
        norms = np.linalg.norm(nullity[:, :n], axis=1)
        h = nullity[int(np.argmax(norms))]
        witness = h[:n] / np.linalg.norm(h[:n])
        return ExactRadiusResult(r0=0.0, witness_u=witness, vertex_count=nv)

    total = math.comb(g, n) if g >= n else 0
    if total == 0 or total > _SUBSET_CAP:
        raise SizeError(
            f"facet enumeration needs {total} generator subsets, over the "
            f"{_SUBSET_CAP} cap"
        )
    combos = np.array(list(itertools.combinations(range(g), n)), dtype=np.intp)

    best_dist = np.inf
    best_normal = None
    side_tol = 1e-9
    for lo_idx in range(0, combos.shape[0], _SVD_CHUNK):
        batch = combos[lo_idx : lo_idx + _SVD_CHUNK]
        mats = gens.T[batch]  # (B, n, n+1)
        _, _, vh = np.linalg.svd(mats)
        hs = vh[:, -1, :]  # (B, n+1) null directions
        E = hs @ gens  # (B, g) signed side of every generator
        pos_ok = np.all(E <= side_tol, axis=1)
        neg_ok = np.all(E >= -side_tol, axis=1)
        for i in np.flatnonzero(pos_ok | neg_ok):
            h = hs[i] if pos_ok[i] else -hs[i]
            a_vec = h[:n]
            nrm = np.linalg.norm(a_vec)
            if nrm <= 1e-12:
                continue  # hyperplane at infinity
            b = -h[n]
            dist = (b - a_vec @ anchor) / nrm
            if dist < best_dist:
                best_dist = dist
                best_normal = a_vec / nrm
    if best_normal is None:
        raise ModelError(
            "region has no supporting facets; it spans all directions"
        )
    return ExactRadiusResult(
        r0=max(best_dist, 0.0) / lam, witness_u=best_normal, vertex_count=nv
    )


def _dictionary_sha256(D: Dictionary) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(D.S).tobytes())
    h.update(np.ascontiguousarray(D.labels).tobytes())
    return h.hexdigest()


def to_json(cert: CertificatePolyhedron, include_matrices="auto") -> str:
    """Serialize a certificate to a JSON document.

    ``include_matrices`` controls whether the constraint matrices are
    embedded row-major ("auto" embeds them while the signed dictionary
    holds at most 200000 scalar entries; above that the document carries
    the active entries plus a dictionary checksum instead, and
    deserializing needs the dictionary object).
    """
    D = cert.dictionary
    n, M = D.dim, D.size
    if include_matrices == "auto":
        embed = 2 * M * n <= _MATRIX_ENTRY_LIMIT
    else:
        embed = bool(include_matrices)
    doc = {
        "format": JSON_FORMAT_NAME,
        "version": 1,
        "dim": n,
        "atom_count": M,
        "lambda": cert.lam,
        "tau": cert.tau,
        "anchor_x": cert.anchor_x.tolist(),
        "anchor_alpha": cert.alpha_anchor.tolist(),
        "active": [[int(i), int(s)] for i, s in cert.active.entries],
        "labels": [int(v) for v in D.labels],
        "dictionary_sha256": _dictionary_sha256(D),
        "equality_normals": cert.equality_normals.T.tolist() if embed else None,
        "inequality_normals": cert.inequality_normals.T.tolist() if embed else None,
    }
    return json.dumps(doc, sort_keys=True)


def from_json(text: str, dictionary: Dictionary | None = None) -> CertificatePolyhedron:
    """Rebuild a certificate from its JSON document.

    When the document embeds constraint matrices the dictionary is
    reconstructed from them; otherwise a ``dictionary`` matching the
    stored checksum must be supplied.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid certificate JSON: {exc.msg}", byte_offset=exc.pos)
    if not isinstance(doc, dict) or doc.get("format") != JSON_FORMAT_NAME:
        raise ParseError("not a certificate document")
    if doc.get("version") != 1:
        raise ParseError(f"unsupported certificate version {doc.get('version')!r}")
    n = int(doc["dim"])
    M = int(doc["atom_count"])
    entries = [(int(i), int(s)) for i, s in doc["active"]]
    tau = float(doc["tau"])
    lam = float(doc["lambda"])
    anchor_x = np.asarray(doc["anchor_x"], dtype=float)
    alpha = np.asarray(doc["anchor_alpha"], dtype=float)
    labels = np.asarray(doc["labels"], dtype=np.int64)

    if dictionary is None:
        eq = doc.get("equality_normals")
        ineq = doc.get("inequality_normals")
        if eq is None or ineq is None:
            raise ModelError(
                "document omits constraint matrices; pass the dictionary "
                "matching its checksum"
            )
        S = np.empty((n, M))
        by_index = {i: s for i, s in entries}
        eq_rows = {i: np.asarray(row, dtype=float) for (i, s), row in zip(entries, eq)}
        act_set = {i if s > 0 else i + M for i, s in entries}
        inact_signed = [j for j in range(2 * M) if j not in act_set]
        ineq_rows = {j: np.asarray(row, dtype=float) for j, row in zip(inact_signed, ineq)}
        for i in range(M):
            if i in by_index:
                S[:, i] = by_index[i] * eq_rows[i]
            else:
                S[:, i] = ineq_rows[i]
        dictionary = Dictionary(S, labels)
    if _dictionary_sha256(dictionary) != doc["dictionary_sha256"]:
        raise ModelError("dictionary checksum does not match the document")

    active = ActiveSet(entries=entries, tau=tau)
    d_anchor = lam * anchor_x - active.signed_matrix(dictionary) @ alpha
    return CertificatePolyhedron(
        dictionary=dictionary,
        anchor_x=anchor_x,
        lam=lam,
        tau=tau,
        active=active,
        alpha_anchor=alpha,
        d_anchor=d_anchor,
    )
