"""Empirical attacks and robust-risk estimation.

Two attacks are provided. The certificate-restricted projected ascent
attack searches for a misclassified point inside the intersection of
an l2 ball around the clean point and the polyhedral certificate
anchored there, so a success is a constructive counterexample to
robustness claims restricted to that region. The decision-based
boundary attack needs labels only: it hunts for any misclassified
point, pulls it toward the clean point by bisection, and polishes with
random tangential moves, returning the smallest perturbation found.

Robust risk is estimated by running an attack on every dataset point
and counting the fraction where a misclassification exists within the
l2 budget (abstentions count as misclassified).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .certificate import CertificatePolyhedron, contains, project_onto
from .data import LabeledDataset
from .errors import ArgumentError, ModelError
from .numerics import make_rng, spawn_seeds

DEFAULT_STEPS = 20
_ALTERNATION_CAP = 50
_BISECTION_TOL = 1e-4
_BUDGET_SLACK = 1e-9
_INTERIOR_PULL = 1e-2


@dataclass
class AttackConfig:
    epsilon: float  # l2 budget
    steps: int = DEFAULT_STEPS
    step_size: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ArgumentError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.steps < 1:
            raise ArgumentError(f"steps must be >= 1, got {self.steps}")
        # step_size 0 is allowed: the attack then only projects, which
        # is a useful no-movement baseline
        if self.step_size < 0:
            raise ArgumentError(f"step_size must be >= 0, got {self.step_size}")


@dataclass
class AttackResult:
    """Outcome of one attack run.

    ``steps`` is the per-iteration transcript as (index, l2, label)
    tuples, starting from the unperturbed point at index 0.
    ``in_certificate`` is None for attacks that are not restricted to a
    certificate region.
    """

    adversarial_x: np.ndarray
    success: bool
    final_l2: float
    in_certificate: bool | None
    steps: list = field(default_factory=list)


def _misclassified(label, y: int) -> bool:
    return label is None or label != y


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    while True:
        v = rng.normal(size=dim)
        nrm = np.linalg.norm(v)
        if nrm > 1e-12:
            return v / nrm


def score_gap_loss_grad(scores, y: int, delta: float = 1e-6):
    """Finite-difference gradient of the score-gap loss.

    The loss is max over wrong classes of score_k(x) minus score_y(x);
    driving it up pushes the point across the decision boundary. Central
    differences per coordinate, so the target only needs to expose
    per-class scores (class k at position k-1).
    """

    def gap(z):
        s = np.asarray(scores(z), dtype=float)
        others = np.delete(s, y - 1)
        return float(others.max() - s[y - 1])

    def grad(z):
        z = np.asarray(z, dtype=float)
        g = np.zeros_like(z)
        for i in range(z.shape[0]):
            step = np.zeros_like(z)
            step[i] = delta
            g[i] = (gap(z + step) - gap(z - step)) / (2.0 * delta)
        return g

    return grad


def _project_ball_and_certificate(z, anchor, epsilon, cert,
                                  tol=1e-8) -> np.ndarray:
    """Feasible point near z in B(anchor, epsilon) intersected with the
    certificate closure.

    Alternates the two exact projections to a fixed point. If the cap
    is hit first, falls back to shrinking the certificate projection
    toward the anchor, which stays inside both sets by convexity.

    The result is pulled a relative 1e-2 toward the anchor before
    returning: exact projections land on certificate facets, where the
    active set grows and the label-constancy guarantee does not apply;
    the pull keeps iterates strictly inside the region that shares the
    anchor's active set, at a negligible cost in attack radius.
    """
    cur = np.asarray(z, dtype=float)
    out = None
    for _ in range(_ALTERNATION_CAP):
        delta = cur - anchor
        nrm = np.linalg.norm(delta)
        if nrm > epsilon:
            cur = anchor + delta * (epsilon / nrm)
        cur = project_onto(cert, cur, tol=tol)
        if np.linalg.norm(cur - anchor) <= epsilon + _BUDGET_SLACK:
            out = cur
            break
    if out is None:
        delta = cur - anchor
        nrm = np.linalg.norm(delta)
        if nrm > epsilon:
            cur = anchor + delta * (epsilon / nrm)
        out = cur
    return anchor + (1.0 - _INTERIOR_PULL) * (out - anchor)


def pgd_in_certificate(target, x: np.ndarray, y: int,
                       cert: CertificatePolyhedron, cfg: AttackConfig,
                       scores=None, loss_grad=None) -> AttackResult:
    """Projected ascent restricted to the certificate around x.

    Each step moves along a surrogate ascent direction, then projects
    back into the intersection of the epsilon-ball and the certificate
    closure, so every reported iterate is feasible. The direction is
    loss_grad when given, a finite-difference score-gap gradient when
    only scores are given, and a fresh random unit vector otherwise
    (label-only targets). Stops early on the first misclassified
    iterate.
    """
    x = np.asarray(x, dtype=float)
    if not np.allclose(cert.anchor_x, x, rtol=0.0, atol=1e-9):
        raise ArgumentError("certificate is not anchored at the attacked point")
    if loss_grad is None and scores is not None:
        loss_grad = score_gap_loss_grad(scores, y)
    rng = make_rng(cfg.seed)

    cur = x.copy()
    label = target(cur)
    transcript = [(0, 0.0, label)]
    if _misclassified(label, y):
        return AttackResult(
            adversarial_x=cur, success=True, final_l2=0.0,
            in_certificate=contains(cert, cur), steps=transcript,
        )

    for t in range(1, cfg.steps + 1):
        if cfg.step_size > 0:
            if loss_grad is not None:
                g = np.asarray(loss_grad(cur), dtype=float)
                nrm = np.linalg.norm(g)
                direction = g / nrm if nrm > 1e-12 else _unit(rng, x.shape[0])
            else:
                direction = _unit(rng, x.shape[0])
            moved = cur + cfg.step_size * direction
        else:
            moved = cur
        cur = _project_ball_and_certificate(moved, x, cfg.epsilon, cert)
        label = target(cur)
        transcript.append((t, float(np.linalg.norm(cur - x)), label))
        if _misclassified(label, y):
            break

    return AttackResult(
        adversarial_x=cur,
        success=_misclassified(label, y),
        final_l2=float(np.linalg.norm(cur - x)),
        in_certificate=contains(cert, cur),
        steps=transcript,
    )


def _bisect_to_boundary(target, x, adversarial, y,
                        tol=_BISECTION_TOL) -> np.ndarray:
    """Misclassified point within tol of the decision boundary along
    the segment from x (correctly classified) to adversarial."""
    lo = np.asarray(x, dtype=float)
    hi = np.asarray(adversarial, dtype=float)
    while np.linalg.norm(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if _misclassified(target(mid), y):
            hi = mid
        else:
            lo = mid
    return hi


def boundary_attack(target, x: np.ndarray, y: int, cfg: AttackConfig,
                    init_draws: int = 200) -> AttackResult:
    """Label-only attack returning the smallest perturbation found.

    Random search finds some misclassified point (the search scale is
    set by the data, not by cfg.epsilon, so the result is a norm
    minimizer that callers compare against any budget). Bisection pulls
    it to the boundary, then cfg.steps rounds of random tangential
    moves with re-bisection shrink the norm further. Failure (no
    misclassified point found) returns success=False at the clean
    point.
    """
    x = np.asarray(x, dtype=float)
    rng = make_rng(cfg.seed)

    label = target(x)
    if _misclassified(label, y):
        return AttackResult(
            adversarial_x=x.copy(), success=True, final_l2=0.0,
            in_certificate=None, steps=[(0, 0.0, label)],
        )

    scale = max(1.0, float(np.linalg.norm(x)))
    found = None
    for _ in range(init_draws):
        radius = scale * float(rng.uniform(0.05, 2.0))
        z = x + radius * _unit(rng, x.shape[0])
        if _misclassified(target(z), y):
            found = z
            break
    if found is None:
        return AttackResult(
            adversarial_x=x.copy(), success=False,
            final_l2=0.0, in_certificate=None, steps=[(0, 0.0, label)],
        )

    best = _bisect_to_boundary(target, x, found, y)
    best_norm = float(np.linalg.norm(best - x))
    transcript = [(0, best_norm, target(best))]
    step = cfg.step_size if cfg.step_size > 0 else 0.1
    for t in range(1, cfg.steps + 1):
        radial = best - x
        improved = False
        for _ in range(8):
            p = rng.normal(size=x.shape[0])
            p -= (p @ radial) / (best_norm * best_norm) * radial
            nrm = np.linalg.norm(p)
            if nrm < 1e-12:
                continue
            candidate = best + (step * best_norm / nrm) * p
            if _misclassified(target(candidate), y):
                refined = _bisect_to_boundary(target, x, candidate, y)
                refined_norm = float(np.linalg.norm(refined - x))
                if refined_norm < best_norm:
                    best, best_norm = refined, refined_norm
                    improved = True
                    break
        if not improved:
            step *= 0.7
        transcript.append((t, best_norm, target(best)))

    return AttackResult(
        adversarial_x=best, success=True, final_l2=best_norm,
        in_certificate=None, steps=transcript,
    )


def estimate_robust_risk(classifier, dataset: LabeledDataset, attack,
                         cfg: AttackConfig) -> float:
    """Fraction of points with a misclassification within the budget.

    ``attack`` is a callable (classifier, x, y, cfg) -> AttackResult;
    both attacks in this module fit after partial application of their
    extra arguments. A point counts as at-risk when the clean
    prediction is already wrong or abstains, or when the attack finds a
    misclassified point with final_l2 within cfg.epsilon. Per-point
    seeds derive from cfg.seed, so estimates with nested budgets and a
    shared seed are comparable.
    """
    if dataset.count == 0:
        raise ModelError("dataset is empty")
    seeds = spawn_seeds(cfg.seed, dataset.count)
    at_risk = 0
    for i in range(dataset.count):
        point = dataset.point(i)
        truth = int(dataset.labels[i])
        if _misclassified(classifier(point), truth):
            at_risk += 1
            continue
        if cfg.epsilon == 0.0:
            continue
        point_cfg = AttackConfig(
            epsilon=cfg.epsilon, steps=cfg.steps,
            step_size=cfg.step_size, seed=seeds[i],
        )
        result = attack(classifier, point, truth, point_cfg)
        if result.success and result.final_l2 <= cfg.epsilon + _BUDGET_SLACK:
            at_risk += 1
    return at_risk / dataset.count
