"""Tests for the certificate-restricted and decision-based attacks."""

import numpy as np
import pytest

from polycert.attacks import (
    AttackConfig,
    AttackResult,
    boundary_attack,
    estimate_robust_risk,
    pgd_in_certificate,
    score_gap_loss_grad,
)
from polycert.bpdn import DualProblemInstance, active_set, near_degenerate, solve
from polycert.certificate import build_certificate, contains
from polycert.classifier import predict_dual
from polycert.data import Dictionary, LabeledDataset
from polycert.errors import ArgumentError, ModelError


def identity_instance(x=(0.3, 0.3), lam=4.0, labels=(1, 2)):
    """Axis-aligned dictionary whose certificate region is an orthant
    corner at (0.25, 0.25)."""
    D = Dictionary(np.eye(2), np.array(labels))
    xv = np.array(x, dtype=float)
    sol = solve(DualProblemInstance(D, xv, lam), tol=1e-12)
    return build_certificate(sol), xv, D


def dual_label(D, lam):
    return lambda z: predict_dual(D, z, lam)[0].label


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [{"epsilon": -0.1}, {"epsilon": 1.0, "steps": 0},
         {"epsilon": 1.0, "step_size": -1.0}],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ArgumentError):
            AttackConfig(**kwargs)

    def test_zero_step_size_allowed(self):
        assert AttackConfig(epsilon=0.5, step_size=0.0).step_size == 0.0


class TestPgd:
    def test_zero_step_size_stays_put(self):
        cert, x, _ = identity_instance()
        cfg = AttackConfig(epsilon=0.2, steps=5, step_size=0.0, seed=0)
        res = pgd_in_certificate(lambda z: 1, x, 1, cert, cfg)
        assert not res.success
        assert res.final_l2 == 0.0
        np.testing.assert_allclose(res.adversarial_x, x, atol=1e-9)
        assert res.in_certificate
        assert all(l2 == 0.0 for _, l2, _ in res.steps)

    def test_already_misclassified_returns_clean_point(self):
        cert, x, _ = identity_instance()
        cfg = AttackConfig(epsilon=0.2, seed=0)
        res = pgd_in_certificate(lambda z: 2, x, 1, cert, cfg)
        assert res.success
        assert res.final_l2 == 0.0
        assert len(res.steps) == 1

    def test_every_iterate_feasible(self):
        cert, x, _ = identity_instance()
        queried = []

        def recording_target(z):
            queried.append(np.array(z, dtype=float))
            return 1

        cfg = AttackConfig(epsilon=0.15, steps=10, step_size=0.08, seed=3)
        res = pgd_in_certificate(recording_target, x, 1, cert, cfg)
        assert not res.success
        assert len(queried) == 11  # clean point plus one per step
        for pt in queried:
            assert np.linalg.norm(pt - x) <= 0.15 + 1e-9
            assert contains(cert, pt)
        assert res.final_l2 <= 0.15 + 1e-9

    def test_linear_target_crossing_region(self):
        # decision boundary z1 + z2 = 0.7 passes through the region
        # within the budget, so the attack must cross it
        cert, x, _ = identity_instance()

        def scores(z):
            s = float(z[0] + z[1])
            return np.array([0.7 - s, s - 0.7])

        def label(z):
            return int(np.argmax(scores(z))) + 1

        # grid oracle: some feasible point is misclassified
        feasible_hit = False
        for theta in np.linspace(0.0, 2.0 * np.pi, 241):
            for r in np.linspace(0.0, 0.2, 41):
                z = x + r * np.array([np.cos(theta), np.sin(theta)])
                if z[0] >= 0.25 and z[1] >= 0.25 and z[0] + z[1] > 0.7:
                    feasible_hit = True
        assert feasible_hit

        cfg = AttackConfig(epsilon=0.2, steps=20, step_size=0.05, seed=1)
        res = pgd_in_certificate(label, x, 1, cert, cfg, scores=scores)
        assert res.success
        assert res.in_certificate
        assert res.final_l2 <= 0.2 + 1e-9
        assert label(res.adversarial_x) == 2
        assert res.adversarial_x.min() >= 0.25 - 1e-6

    def test_analytic_gradient_also_succeeds(self):
        cert, x, _ = identity_instance()

        def label(z):
            return 2 if z[0] + z[1] > 0.7 else 1

        cfg = AttackConfig(epsilon=0.2, steps=20, step_size=0.05, seed=1)
        res = pgd_in_certificate(
            label, x, 1, cert, cfg, loss_grad=lambda z: np.ones(2)
        )
        assert res.success
        assert label(res.adversarial_x) == 2

    def test_rejects_foreign_anchor(self):
        cert, x, _ = identity_instance()
        cfg = AttackConfig(epsilon=0.1, seed=0)
        with pytest.raises(ArgumentError):
            pgd_in_certificate(lambda z: 1, x + 0.05, 1, cert, cfg)

    def test_dual_classifier_never_flips_inside_certificate(self):
        # the dual prediction is constant on the certificate region, so
        # a certificate-restricted attack on it cannot succeed except at
        # tau-ambiguous boundary points, which are excluded
        rng = np.random.default_rng(2024)
        lam = 2.0
        checked = 0
        for n, M in [(2, 6), (3, 8), (4, 8), (3, 6), (2, 8), (4, 10)]:
            for _ in range(40):
                S = rng.standard_normal((n, M))
                labels = rng.integers(1, 4, size=M)
                D = Dictionary(S, labels)
                x = rng.standard_normal(n)
                x /= max(1.0, float(np.linalg.norm(x)))
                sol = solve(DualProblemInstance(D, x, lam), tol=1e-12)
                if near_degenerate(sol) or active_set(sol).size == 0:
                    continue
                break
            else:
                continue
            cert = build_certificate(sol)
            target = dual_label(D, lam)
            y = target(x)
            cfg = AttackConfig(epsilon=0.4, steps=15, step_size=0.1, seed=checked)
            res = pgd_in_certificate(target, x, y, cert, cfg)
            if res.success:
                sol2 = solve(
                    DualProblemInstance(D, res.adversarial_x, lam), tol=1e-12
                )
                assert near_degenerate(sol2), (
                    "prediction flipped at a non-degenerate certificate point"
                )
            checked += 1
        assert checked >= 4


class TestBoundary:
    def test_constant_wrong_target(self):
        cfg = AttackConfig(epsilon=1.0, seed=0)
        res = boundary_attack(lambda z: 2, np.array([0.4, -0.1]), 1, cfg)
        assert res.success
        assert res.final_l2 <= 1e-4
        assert res.in_certificate is None

    def test_constant_right_target(self):
        cfg = AttackConfig(epsilon=1.0, seed=0)
        res = boundary_attack(lambda z: 1, np.array([0.4, -0.1]), 1, cfg)
        assert not res.success

    @staticmethod
    def halfspace_setup(margin=0.3):
        w = np.array([1.0, 2.0, -1.0])
        w /= np.linalg.norm(w)
        x = np.array([0.5, -0.2, 0.1])
        b = float(w @ x) + margin
        return (lambda z: 2 if float(w @ z) > b else 1), x

    def test_halfspace_distance_bracket(self):
        target, x = self.halfspace_setup(0.3)
        for seed in range(10):
            cfg = AttackConfig(epsilon=1.0, steps=40, step_size=0.2, seed=seed)
            res = boundary_attack(target, x, 1, cfg)
            assert res.success
            assert target(res.adversarial_x) == 2
            assert 0.3 <= res.final_l2 <= 1.2 * 0.3

    def test_transcript_norms_nonincreasing(self):
        target, x = self.halfspace_setup(0.3)
        cfg = AttackConfig(epsilon=1.0, steps=25, step_size=0.2, seed=5)
        res = boundary_attack(target, x, 1, cfg)
        norms = [l2 for _, l2, _ in res.steps]
        assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))
        assert res.final_l2 == norms[-1]


class TestRobustRisk:
    @staticmethod
    def line_dataset():
        pts = np.array([[0.2, 0.6, 0.9], [0.0, 0.0, 0.0]])
        return LabeledDataset(pts, np.array([1, 1, 1]))

    def test_zero_budget_is_clean_error(self):
        ds = LabeledDataset(
            np.array([[0.0, 1.0, 2.0, 3.0]]), np.array([1, 1, 2, 2])
        )
        classifier = lambda z: 1 if z[0] < 0.5 else 2  # wrong on point 1

        def exploding_attack(*args):
            raise AssertionError("attack must not run at zero budget")

        risk = estimate_robust_risk(
            classifier, ds, exploding_attack, AttackConfig(epsilon=0.0, seed=0)
        )
        assert risk == pytest.approx(0.25)

    def test_abstain_counts_as_misclassified(self):
        ds = LabeledDataset(np.array([[0.0, 1.0]]), np.array([1, 1]))
        classifier = lambda z: None if z[0] > 0.5 else 1
        risk = estimate_robust_risk(
            classifier, ds, None, AttackConfig(epsilon=0.0, seed=0)
        )
        assert risk == pytest.approx(0.5)

    def test_monotone_in_budget(self):
        ds = self.line_dataset()
        classifier = lambda z: 2 if z[0] > 1.0 else 1
        risks = [
            estimate_robust_risk(
                classifier, ds, boundary_attack,
                AttackConfig(epsilon=eps, steps=30, step_size=0.2, seed=7),
            )
            for eps in [0.0, 0.15, 0.3, 0.6, 1.2]
        ]
        assert risks[0] == 0.0
        assert risks[-1] == 1.0
        assert all(a <= b for a, b in zip(risks, risks[1:]))

    def test_certificate_attack_adapter(self):
        # attacking the dual classifier inside its own certificates
        # never increases risk beyond the clean error (of zero here)
        D = Dictionary(np.eye(2), np.array([1, 2]))
        lam = 4.0
        pts = np.array([[0.3, 0.5], [0.3, 0.0]])
        ds = LabeledDataset(pts, np.array([1, 1]))
        classifier = dual_label(D, lam)

        def attack(target, x, y, cfg):
            sol = solve(DualProblemInstance(D, x, lam), tol=1e-12)
            cert = build_certificate(sol)
            return pgd_in_certificate(target, x, y, cert, cfg)

        risk = estimate_robust_risk(
            classifier, ds, attack, AttackConfig(epsilon=0.3, steps=10, seed=1)
        )
        assert risk == 0.0

    def test_empty_dataset_rejected(self):
        ds = LabeledDataset(np.zeros((2, 0)), np.zeros(0, dtype=int))
        with pytest.raises(ModelError):
            estimate_robust_risk(
                lambda z: 1, ds, boundary_attack, AttackConfig(epsilon=0.1)
            )


class TestScoreGapGradient:
    def test_matches_linear_oracle(self):
        rng = np.random.default_rng(5)
        W = rng.standard_normal((3, 4))
        c = rng.standard_normal(3)
        scores = lambda z: W @ z + c
        grad = score_gap_loss_grad(scores, y=2)
        for _ in range(10):
            z = rng.standard_normal(4)
            s = W @ z + c
            others = [0, 2]
            k_star = others[int(np.argmax(s[others]))]
            expected = W[k_star] - W[1]
            np.testing.assert_allclose(grad(z), expected, atol=1e-5)
