"""Label readout from the dual active set, plus a subspace baseline.

The dual classifier solves the reconstruction problem at (x, lam),
collects the labels of the atoms active at the dual optimum, and
aggregates them into a prediction. Because the active set is constant
on the polyhedral certificate region, so is the prediction; the
certificate is returned alongside it whenever one exists.

The nearest-subspace classifier is the classical baseline on the same
data model: pick the class whose subspace reconstructs x best.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bpdn import DEFAULT_TAU, DEFAULT_TOL, DualProblemInstance, active_set, solve
from .certificate import CertificatePolyhedron, build_certificate
from .data import Dictionary, SubspaceModel
from .errors import ArgumentError


class AggregationRule(Enum):
    """Deterministic label aggregation over the active atoms.

    MAJORITY takes the most frequent label, ties broken by the lowest
    class id. UNANIMOUS_OR_ABSTAIN predicts only when every active atom
    agrees, and abstains otherwise.
    """

    MAJORITY = "majority"
    UNANIMOUS_OR_ABSTAIN = "unanimous_or_abstain"


@dataclass
class Prediction:
    """Aggregated label; ``label`` is None when the classifier abstains."""

    label: int | None
    votes: dict
    active_size: int


def aggregate(labels, rule: AggregationRule = AggregationRule.MAJORITY) -> Prediction:
    """Reduce the labels of the active atoms to one Prediction.

    The multiset of labels alone determines the outcome; input order
    never matters. An empty collection abstains under either rule.
    """
    labels = [int(v) for v in labels]
    votes = dict(sorted(Counter(labels).items()))
    if not votes:
        return Prediction(label=None, votes={}, active_size=0)
    if rule is AggregationRule.MAJORITY:
        top = max(votes.values())
        label = min(k for k, c in votes.items() if c == top)
    elif rule is AggregationRule.UNANIMOUS_OR_ABSTAIN:
        label = labels[0] if len(votes) == 1 else None
    else:
        raise ArgumentError(f"unknown aggregation rule {rule!r}")
    return Prediction(label=label, votes=votes, active_size=len(labels))


def predict_dual(
    dictionary: Dictionary,
    x: np.ndarray,
    lam: float,
    rule: AggregationRule = AggregationRule.MAJORITY,
    tol: float = DEFAULT_TOL,
    tau: float = DEFAULT_TAU,
    with_certificate: bool = True,
):
    """Classify x from the dual active set at parameter lam.

    Returns (Prediction, CertificatePolyhedron or None). The signs of
    active atoms are ignored for the vote: labels attach to the data
    points themselves, so +/- s_i both vote y_i. An empty active set
    abstains and carries no certificate.

    ``with_certificate=False`` skips certificate construction and
    returns (Prediction, None); the label is defined even at degenerate
    points where the certificate builder would refuse.
    """
    sol = solve(DualProblemInstance(dictionary, np.asarray(x, dtype=float), lam), tol=tol)
    act = active_set(sol, tau=tau)
    if act.size == 0:
        return Prediction(label=None, votes={}, active_size=0), None
    pred = aggregate(dictionary.labels[act.indices()], rule)
    if not with_certificate:
        return pred, None
    return pred, build_certificate(sol, act)


def predict_nearest_subspace(model: SubspaceModel, x: np.ndarray) -> int:
    """Class whose subspace reconstructs x best; ties go to the lowest id."""
    residuals = [model.residual_norm(x, k) for k in range(1, model.num_classes + 1)]
    return int(np.argmin(residuals)) + 1


def score_nearest_subspace(model: SubspaceModel, x: np.ndarray) -> np.ndarray:
    """Per-class scores (negated residual norms); argmax agrees with predict.

    Entry k-1 scores class k. Higher is better; an on-subspace point
    scores exactly 0 for its class.
    """
    return -np.array(
        [model.residual_norm(x, k) for k in range(1, model.num_classes + 1)]
    )
