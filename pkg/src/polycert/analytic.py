"""Closed-form robustness computations for two analytic examples.

One family of results lives on the unit sphere: a class concentrated
on a spherical cap versus a uniform complement, where the robust risk
under geodesic perturbations has an explicit expression built from
regularized incomplete beta functions (hyperspherical cap areas). The
other lives on the unit cube: two uniform slab distributions whose
cross-shaped classifier admits a hand-computable robust-risk upper
bound and exact concentration parameters.

Also here: the greedy empirical-concentration curve for a labeled
point cloud, and the volume-shrinkage bounds that quantify how fast
an eroded set loses mass with dimension.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset
from .errors import ArgumentError, ModelError
from .numerics import make_rng, reg_inc_beta

_PSI_CHOICES = ("constant", "exp")


@dataclass(frozen=True)
class ConcentrationParams:
    """(C, epsilon, delta): mass 1 - delta sits on a set of volume at
    most C exp(-n epsilon).

    A negative rate is allowed (it makes the volume bound vacuous);
    some exact parameter tuples in low dimension are of this form.
    """

    C: float
    epsilon: float
    delta: float

    def __post_init__(self):
        if self.C <= 0:
            raise ArgumentError(f"volume constant must be positive, got {self.C}")
        if not 0.0 <= self.delta <= 1.0:
            raise ArgumentError(f"mass deficit must lie in [0, 1], got {self.delta}")


@dataclass(frozen=True)
class StrongConcentrationParams:
    """(epsilon, delta, gamma): mass 1 - delta on a set whose
    epsilon-expansion still carries at most gamma mass of every other
    class."""

    epsilon: float
    delta: float
    gamma: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ArgumentError(f"epsilon must be >= 0, got {self.epsilon}")
        if not 0.0 <= self.delta <= 1.0:
            raise ArgumentError(f"mass deficit must lie in [0, 1], got {self.delta}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ArgumentError(f"overlap mass must lie in [0, 1], got {self.gamma}")


@dataclass
class SphereExampleParams:
    """Binary distribution on the unit sphere in R^n.

    Class 1 has density psi(theta)/sin(theta)^(n-2) (up to the
    normalizer C_psi) on the cap of angle theta0 around a pole; class 2
    is uniform on the complement. psi is either the constant 1 or
    exp(-theta); C_psi is the closed-form integral of psi over
    [0, theta0].
    """

    n: int
    theta0: float = 0.1
    psi: str = "constant"
    C_psi: float = field(init=False)

    def __post_init__(self):
        if self.n < 2:
            raise ArgumentError(f"dimension must be >= 2, got {self.n}")
        if not 0.0 < self.theta0 <= math.pi / 2:
            raise ArgumentError(
                f"cap angle must lie in (0, pi/2], got {self.theta0}"
            )
        if self.psi not in _PSI_CHOICES:
            raise ArgumentError(
                f"psi must be one of {_PSI_CHOICES}, got {self.psi!r}"
            )
        self.C_psi = _psi_integral(self.psi, 0.0, self.theta0)


@dataclass
class CubeExampleParams:
    """Two uniform slab distributions inside the unit-infinity-norm cube.

    Class k is uniform on {|x_k| <= gamma/2} with gamma = exp(-alpha);
    epsilon is the l2 attack budget the cross-shaped classifier is
    tuned for (its decision threshold is gamma/2 + epsilon).
    """

    n: int
    alpha: float
    epsilon: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ArgumentError(f"dimension must be >= 2, got {self.n}")
        if self.alpha <= 0:
            raise ArgumentError(f"alpha must be positive, got {self.alpha}")
        if self.epsilon < 0:
            raise ArgumentError(f"epsilon must be >= 0, got {self.epsilon}")

    @property
    def gamma(self) -> float:
        return math.exp(-self.alpha)

    @property
    def threshold(self) -> float:
        return 0.5 * self.gamma + self.epsilon


def _psi_integral(psi: str, lo: float, hi: float) -> float:
    lo = max(lo, 0.0)
    if hi <= lo:
        return 0.0
    if psi == "constant":
        return hi - lo
    return math.exp(-lo) - math.exp(-hi)


def cap_measure(n: int, alpha_angle: float) -> float:
    """Normalized surface area of the spherical cap of angle alpha.

    Fraction of the unit sphere in R^n within geodesic distance alpha
    of a fixed pole, 0.5 * I_{sin^2 alpha}((n-1)/2, 1/2). Valid up to
    the hemisphere.
    """
    if n < 2:
        raise ArgumentError(f"dimension must be >= 2, got {n}")
    if not 0.0 < alpha_angle <= math.pi / 2:
        raise ArgumentError(
            f"cap angle must lie in (0, pi/2], got {alpha_angle}"
        )
    s = math.sin(alpha_angle)
    return 0.5 * reg_inc_beta((n - 1) / 2.0, 0.5, s * s)


def _cap(n: int, angle: float) -> float:
    if angle <= 0.0:
        return 0.0
    return cap_measure(n, min(angle, math.pi / 2))


def _sphere_class1_term(params: SphereExampleParams, eps: float) -> float:
    """Mass of class 1 within eps of the class-2 region (the cap's
    inner collar); saturates at 1 once eps covers the whole cap."""
    if eps >= params.theta0:
        return 1.0
    return _psi_integral(params.psi, params.theta0 - eps, params.theta0) / params.C_psi


def _sphere_class2_term(params: SphereExampleParams, eps: float) -> float:
    """Mass of class 2 within eps of the cap, by cap-area differences.

    The complement measure is d = 2 m(pi/2) - m(theta0) in cap units.
    The three branches split on theta0 + eps against pi/2 and pi; the
    middle branch saturates the bound above the hemisphere, so the
    value is clamped into [0, 1].
    """
    n, theta0 = params.n, params.theta0
    d_norm = 1.0 - _cap(n, theta0)
    reach = theta0 + eps
    if reach <= math.pi / 2:
        value = (_cap(n, reach) - _cap(n, theta0)) / d_norm
    elif reach <= math.pi:
        value = (1.0 - _cap(n, reach - math.pi / 2)) / d_norm
    else:
        value = 1.0 / d_norm
    return min(max(value, 0.0), 1.0)


def sphere_risk_curve(params: SphereExampleParams, eps_grid) -> list[tuple[float, float]]:
    """Robust risk of the cap classifier at each geodesic budget.

    Risk is the even mixture of two terms: the class-1 mass within eps
    of the cap boundary (eps/theta0 for constant psi) and the class-2
    mass within eps of the cap, each clamped to [0, 1].
    """
    rows = []
    for eps in eps_grid:
        eps = float(eps)
        if not 0.0 <= eps <= math.pi:
            raise ArgumentError(f"budget must lie in [0, pi], got {eps}")
        q1 = _sphere_class1_term(params, eps) if eps > 0 else 0.0
        q2 = _sphere_class2_term(params, eps) if eps > 0 else 0.0
        rows.append((eps, 0.5 * q1 + 0.5 * q2))
    return rows


def cube_risk_bound(params: CubeExampleParams) -> float:
    """Upper bound 0.5 (exp(-alpha) + 4 epsilon) on the cross
    classifier's robust risk."""
    return 0.5 * (math.exp(-params.alpha) + 4.0 * params.epsilon)


def cube_concentration(params: CubeExampleParams) -> tuple[ConcentrationParams, StrongConcentrationParams]:
    """Exact concentration parameters of the cube example.

    Each slab is (0.5, alpha/n - 1, 0)-concentrated, and the
    2-epsilon-expanded support of one class carries mass
    0.5 exp(-alpha) + 2 epsilon under the other.
    """
    weak = ConcentrationParams(0.5, params.alpha / params.n - 1.0, 0.0)
    strong = StrongConcentrationParams(
        params.epsilon, 0.0, 0.5 * math.exp(-params.alpha) + 2.0 * params.epsilon
    )
    return weak, strong


def cube_classifier(params: CubeExampleParams):
    """The cross-shaped classifier for the cube example.

    Predicts by the first two coordinates against the threshold
    gamma/2 + epsilon: class 1 on the vertical bar, class 2 on the
    horizontal bar, class 1 on the central square and the corners.
    """
    T = params.threshold

    def f(x) -> int:
        a1, a2 = abs(float(x[0])), abs(float(x[1]))
        if a1 <= T and a2 >= T:
            return 1
        if a2 <= T and a1 >= T:
            return 2
        return 1

    return f


def sample_cube_example(params: CubeExampleParams, per_class: int,
                        seed: int = 0) -> LabeledDataset:
    """Balanced sample of the two slab distributions (per_class each)."""
    if per_class < 1:
        raise ArgumentError(f"per_class must be >= 1, got {per_class}")
    rng = make_rng(seed)
    half = 0.5 * params.gamma
    pts = rng.uniform(-1.0, 1.0, size=(params.n, 2 * per_class))
    pts[0, :per_class] = rng.uniform(-half, half, size=per_class)
    pts[1, per_class:] = rng.uniform(-half, half, size=per_class)
    labels = np.repeat([1, 2], per_class)
    return LabeledDataset(pts, labels)


def cube_adversarial_distance(params: CubeExampleParams, x, label: int) -> float:
    """Smallest l2 perturbation flipping the cross classifier, exactly.

    The classifier only reads |x_1| and |x_2|, and its regions are
    axis-aligned rectangles in that quarter-plane, so the nearest point
    of any differently-labeled region has each coordinate equal to the
    original or to one side of the threshold. Enumerating those
    candidates (a hair inside/outside the threshold) is exhaustive up
    to 1e-12. Returns inf when no in-cube flip exists.
    """
    f = cube_classifier(params)
    T = params.threshold
    nudge = 1e-12
    edges = (T - nudge, T + nudge, -(T - nudge), -(T + nudge))
    x1, x2 = float(x[0]), float(x[1])
    cand1 = [v for v in (x1,) + edges if abs(v) <= 1.0]
    cand2 = [v for v in (x2,) + edges if abs(v) <= 1.0]
    probe = np.array(x, dtype=float)
    best = math.inf
    for v1 in cand1:
        for v2 in cand2:
            probe[0], probe[1] = v1, v2
            if f(probe) != label:
                best = min(best, math.hypot(v1 - x1, v2 - x2))
    return best


def cube_empirical_risk(params: CubeExampleParams, per_class: int = 5000,
                        seed: int = 0) -> float:
    """Sampled robust risk of the cross classifier at budget epsilon.

    A point is at risk when it is cleanly misclassified or its exact
    adversarial distance is within the budget. Compare against
    cube_risk_bound.
    """
    ds = sample_cube_example(params, per_class, seed)
    f = cube_classifier(params)
    at_risk = 0
    slack = 3e-12  # covers the candidate nudge in the distance oracle
    for i in range(ds.count):
        x = ds.point(i)
        y = int(ds.labels[i])
        if f(x) != y or cube_adversarial_distance(params, x, y) <= params.epsilon + slack:
            at_risk += 1
    return at_risk / ds.count


def empirical_concentration_curve(dataset: LabeledDataset, m_grid,
                                  within_class: bool = False) -> list[tuple[int, float, float]]:
    """Greedy concentration parameters of a labeled point cloud.

    Points are ranked by decreasing nearest-neighbor distance (global
    by default, same-class with within_class=True; ties keep index
    order), and each class keeps its first m points. Rows are
    (m, eps_m, 1 - delta_m): eps_m is the smallest distance from any
    kept point to the other classes' data, and 1 - delta_m the
    smallest per-class fraction kept. m larger than a class is clamped
    with a warning.
    """
    if dataset.count == 0:
        raise ModelError("dataset is empty")
    classes = dataset.class_ids()
    if len(classes) < 2:
        raise ModelError("need at least two classes for separation")

    pts = dataset.points
    diff = pts[:, :, None] - pts[:, None, :]
    dist = np.sqrt((diff * diff).sum(axis=0))
    np.fill_diagonal(dist, np.inf)

    same = dataset.labels[:, None] == dataset.labels[None, :]
    if within_class:
        nn = np.where(same, dist, np.inf).min(axis=1)
    else:
        nn = dist.min(axis=1)
    cross = np.where(same, np.inf, dist).min(axis=1)

    order = np.argsort(-nn, kind="stable")
    by_class = {k: [i for i in order if dataset.labels[i] == k] for k in classes}
    class_sizes = {k: len(by_class[k]) for k in classes}

    rows = []
    for m in m_grid:
        m = int(m)
        if m < 1:
            raise ArgumentError(f"m must be >= 1, got {m}")
        if m > min(class_sizes.values()):
            warnings.warn(
                f"m={m} exceeds a class size, clamping per class", stacklevel=2
            )
        selected = [i for k in classes for i in by_class[k][:m]]
        eps_m = float(cross[selected].min())
        mass = min(min(m, class_sizes[k]) / class_sizes[k] for k in classes)
        rows.append((m, eps_m, mass))
    return rows


def shrinkage_volume_bound(n: int, eps: float, vol_A: float) -> tuple[float, float]:
    """Volume bounds for an eps-eroded star-shaped set.

    Returns the exact shrinkage factor vol_A (1 - eps)^n alongside the
    looser exponential bound vol_A exp(-n eps).
    """
    if not 0.0 <= eps < 1.0:
        raise ArgumentError(f"eps must lie in [0, 1), got {eps}")
    if vol_A < 0:
        raise ArgumentError(f"volume must be >= 0, got {vol_A}")
    return vol_A * (1.0 - eps) ** n, vol_A * math.exp(-n * eps)
