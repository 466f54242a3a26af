"""Tests for the sphere and cube analytic examples."""

import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from polycert.analytic import (
    ConcentrationParams,
    CubeExampleParams,
    SphereExampleParams,
    StrongConcentrationParams,
    cap_measure,
    cube_adversarial_distance,
    cube_classifier,
    cube_concentration,
    cube_empirical_risk,
    cube_risk_bound,
    empirical_concentration_curve,
    sample_cube_example,
    shrinkage_volume_bound,
    sphere_risk_curve,
    _sphere_class1_term,
)
from polycert.attacks import AttackConfig, AttackResult, estimate_robust_risk
from polycert.data import LabeledDataset
from polycert.errors import ArgumentError, ModelError


class TestCapMeasure:
    @pytest.mark.parametrize("n", [2, 3, 5, 10, 100])
    def test_hemisphere_is_half(self, n):
        assert cap_measure(n, math.pi / 2) == pytest.approx(0.5, abs=1e-12)

    def test_two_sphere_closed_form(self):
        # on S^2 the cap fraction is (1 - cos(angle)) / 2
        for angle in [0.3, math.pi / 3, 1.2]:
            assert cap_measure(3, angle) == pytest.approx(
                (1.0 - math.cos(angle)) / 2.0, abs=1e-12
            )

    def test_monotone_in_angle(self):
        grid = np.linspace(0.05, math.pi / 2, 30)
        vals = [cap_measure(7, a) for a in grid]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("bad", [0.0, -0.1, math.pi / 2 + 0.01])
    def test_angle_domain(self, bad):
        with pytest.raises(ArgumentError):
            cap_measure(5, bad)

    def test_dimension_domain(self):
        with pytest.raises(ArgumentError):
            cap_measure(1, 0.5)

    def test_against_monte_carlo(self):
        rng = np.random.default_rng(99)
        z = rng.standard_normal((200_000, 10))
        angles = np.arccos(z[:, 0] / np.linalg.norm(z, axis=1))
        for alpha in [0.8, 1.2, math.pi / 2]:
            frac = float(np.mean(angles <= alpha))
            assert cap_measure(10, alpha) == pytest.approx(frac, abs=0.015)


class TestSphereExample:
    def test_param_validation(self):
        with pytest.raises(ArgumentError):
            SphereExampleParams(n=1)
        with pytest.raises(ArgumentError):
            SphereExampleParams(n=10, theta0=0.0)
        with pytest.raises(ArgumentError):
            SphereExampleParams(n=10, theta0=2.0)
        with pytest.raises(ArgumentError):
            SphereExampleParams(n=10, psi="linear")

    def test_normalizer_closed_forms(self):
        const = SphereExampleParams(n=100, theta0=0.1, psi="constant")
        assert const.C_psi == pytest.approx(0.1, abs=1e-15)
        decay = SphereExampleParams(n=100, theta0=0.1, psi="exp")
        oracle, _ = quad(lambda t: math.exp(-t), 0.0, 0.1)
        assert decay.C_psi == pytest.approx(oracle, abs=1e-12)

    def test_constant_psi_collar_mass(self):
        # mass of the inner collar of width eps is eps / theta0
        params = SphereExampleParams(n=100, theta0=0.1, psi="constant")
        assert _sphere_class1_term(params, 0.05) == pytest.approx(0.5, abs=1e-12)
        for eps in [0.01, 0.04, 0.09]:
            assert _sphere_class1_term(params, eps) == pytest.approx(
                eps / 0.1, abs=1e-12
            )

    def test_frozen_class1_contribution(self):
        # at eps = 0.05 class 1 contributes 0.5 * 0.5 = 0.25 and the
        # class-2 term in dimension 100 is smaller than roundoff
        params = SphereExampleParams(n=100, theta0=0.1, psi="constant")
        [(_, risk)] = sphere_risk_curve(params, [0.05])
        assert risk == pytest.approx(0.25, abs=1e-9)

    def test_exp_psi_collar_matches_quadrature(self):
        params = SphereExampleParams(n=50, theta0=0.1, psi="exp")
        for eps in [0.02, 0.07]:
            oracle, _ = quad(lambda t: math.exp(-t), 0.1 - eps, 0.1)
            assert _sphere_class1_term(params, eps) == pytest.approx(
                oracle / params.C_psi, abs=1e-12
            )

    def test_zero_budget_zero_risk(self):
        params = SphereExampleParams(n=100)
        [(_, risk)] = sphere_risk_curve(params, [0.0])
        assert risk == 0.0

    def test_risk_jump_past_hemisphere(self):
        # in high dimension the uniform class concentrates at the
        # equator, so the class-2 term snaps on near pi/2 - theta0
        params = SphereExampleParams(n=100, theta0=0.1)
        mid = math.pi / 2 - 0.1
        [(_, lo), (_, hi)] = sphere_risk_curve(params, [mid - 0.2, mid + 0.2])
        assert hi - lo >= 0.2

    def test_monotone_up_to_hemisphere(self):
        params = SphereExampleParams(n=30, theta0=0.1)
        grid = np.linspace(0.0, math.pi / 2 - 0.1, 40)
        risks = [r for _, r in sphere_risk_curve(params, grid)]
        assert all(a <= b + 1e-12 for a, b in zip(risks, risks[1:]))

    def test_bounded_by_one(self):
        for psi in ["constant", "exp"]:
            params = SphereExampleParams(n=15, theta0=0.3, psi=psi)
            grid = np.linspace(0.0, math.pi, 60)
            for _, r in sphere_risk_curve(params, grid):
                assert 0.0 <= r <= 1.0

    def test_saturated_class1_beyond_cap_angle(self):
        params = SphereExampleParams(n=40, theta0=0.1)
        [(_, risk)] = sphere_risk_curve(params, [0.2])
        assert risk >= 0.5

    def test_grid_domain(self):
        params = SphereExampleParams(n=10)
        with pytest.raises(ArgumentError):
            sphere_risk_curve(params, [-0.1])
        with pytest.raises(ArgumentError):
            sphere_risk_curve(params, [math.pi + 0.1])


class TestCubeExample:
    def test_param_validation(self):
        with pytest.raises(ArgumentError):
            CubeExampleParams(n=4, alpha=0.0)
        with pytest.raises(ArgumentError):
            CubeExampleParams(n=4, alpha=1.0, epsilon=-0.1)
        with pytest.raises(ArgumentError):
            CubeExampleParams(n=1, alpha=1.0)

    def test_bound_values(self):
        assert cube_risk_bound(
            CubeExampleParams(n=10, alpha=math.log(2), epsilon=0.1)
        ) == pytest.approx(0.45, abs=1e-12)
        assert cube_risk_bound(CubeExampleParams(n=10, alpha=20.0)) < 1e-8

    def test_concentration_tuples(self):
        params = CubeExampleParams(n=10, alpha=0.7, epsilon=0.03)
        weak, strong = cube_concentration(params)
        assert weak.C == 0.5
        assert weak.epsilon == pytest.approx(0.7 / 10 - 1.0, abs=1e-15)
        assert weak.delta == 0.0
        assert strong.epsilon == 0.03
        assert strong.delta == 0.0
        assert strong.gamma == pytest.approx(
            0.5 * math.exp(-0.7) + 0.06, abs=1e-15
        )

    def test_zero_budget_overlap_is_volume_ratio(self):
        # slab overlap mass by direct volume computation:
        # 2^(n-2) gamma^2 / (gamma 2^(n-1)) = gamma / 2
        n, alpha = 6, 1.0
        gamma = math.exp(-alpha)
        ratio = (2 ** (n - 2) * gamma * gamma) / (gamma * 2 ** (n - 1))
        _, strong = cube_concentration(CubeExampleParams(n=n, alpha=alpha))
        assert strong.gamma == pytest.approx(ratio, abs=1e-15)

    def test_classifier_cases(self):
        params = CubeExampleParams(n=4, alpha=1.0, epsilon=0.05)
        T = params.threshold
        f = cube_classifier(params)
        assert f(np.array([0.0, T + 0.1, 0.0, 0.0])) == 1
        assert f(np.array([T + 0.1, 0.0, 0.0, 0.0])) == 2
        assert f(np.array([0.0, 0.0, 0.0, 0.0])) == 1
        assert f(np.array([T + 0.1, T + 0.1, 0.0, 0.0])) == 1

    def test_adversarial_distance_hand_cases(self):
        # class-2 point: cheapest flip raises x2 above the threshold,
        # landing in the corner region that predicts 1
        params = CubeExampleParams(n=4, alpha=1.0, epsilon=0.05)
        T = params.threshold
        x = np.array([0.9, 0.1, 0.2, -0.3])
        d = cube_adversarial_distance(params, x, 2)
        assert d == pytest.approx(T - 0.1, abs=1e-9)
        # class-1 point deep in the vertical bar: a flip needs x1
        # pushed past the threshold AND x2 pulled below it
        params0 = CubeExampleParams(n=4, alpha=2.0, epsilon=0.0)
        T0 = params0.threshold
        x = np.array([0.0, 0.9, 0.0, 0.0])
        d = cube_adversarial_distance(params0, x, 1)
        assert d == pytest.approx(math.hypot(T0, 0.9 - T0), abs=1e-9)

    def test_empirical_risk_below_bound_on_grid(self):
        for n, alpha, eps in [(4, 0.7, 0.02), (6, 1.0, 0.05), (8, 1.5, 0.0)]:
            params = CubeExampleParams(n=n, alpha=alpha, epsilon=eps)
            risk = cube_empirical_risk(params, per_class=2000, seed=11)
            assert risk <= cube_risk_bound(params)

    def test_robust_risk_estimator_agrees_with_bound(self):
        # wire the exact distance oracle through the generic estimator
        params = CubeExampleParams(n=5, alpha=1.0, epsilon=0.04)
        ds = sample_cube_example(params, per_class=300, seed=3)
        f = cube_classifier(params)

        def oracle_attack(target, x, y, cfg):
            d = cube_adversarial_distance(params, x, y)
            found = math.isfinite(d)
            return AttackResult(
                adversarial_x=np.array(x), success=found,
                final_l2=d if found else 0.0, in_certificate=None,
            )

        risk = estimate_robust_risk(
            f, ds, oracle_attack,
            AttackConfig(epsilon=params.epsilon, seed=0),
        )
        assert risk <= cube_risk_bound(params)

    def test_sample_shapes_and_support(self):
        params = CubeExampleParams(n=5, alpha=1.0)
        ds = sample_cube_example(params, per_class=100, seed=1)
        assert ds.count == 200
        assert ds.dim == 5
        half = 0.5 * params.gamma
        assert np.all(np.abs(ds.points[0, :100]) <= half)
        assert np.all(np.abs(ds.points[1, 100:]) <= half)
        assert np.all(np.abs(ds.points) <= 1.0)


class TestParamTypes:
    def test_concentration_validation(self):
        with pytest.raises(ArgumentError):
            ConcentrationParams(0.0, 0.1, 0.0)
        with pytest.raises(ArgumentError):
            ConcentrationParams(1.0, 0.1, 1.5)
        # negative rates are legal (vacuous bound)
        assert ConcentrationParams(0.5, -0.93, 0.0).epsilon == -0.93

    def test_strong_concentration_validation(self):
        with pytest.raises(ArgumentError):
            StrongConcentrationParams(-0.1, 0.0, 0.5)
        with pytest.raises(ArgumentError):
            StrongConcentrationParams(0.1, 0.0, 1.5)


class TestEmpiricalConcentration:
    @staticmethod
    def line_dataset():
        return LabeledDataset(
            np.array([[0.0, 1.0, 3.0, 7.0]]), np.array([1, 1, 2, 2])
        )

    def test_frozen_four_point_example(self):
        # NN distances 1, 1, 2, 4 rank the points 7, 3, 0, 1; keeping
        # one per class selects {0} and {7}, whose nearest cross-class
        # data sit at 3 and 6
        rows = empirical_concentration_curve(self.line_dataset(), [1, 2])
        m1, eps1, mass1 = rows[0]
        assert (m1, eps1, mass1) == (1, pytest.approx(3.0), pytest.approx(0.5))
        m2, eps2, mass2 = rows[1]
        assert (m2, eps2, mass2) == (2, pytest.approx(2.0), pytest.approx(1.0))

    def test_within_class_ranking(self):
        # same-class NN distances promote 3 over 0, changing the pick
        rows = empirical_concentration_curve(
            self.line_dataset(), [1], within_class=True
        )
        _, eps1, mass1 = rows[0]
        assert eps1 == pytest.approx(2.0)
        assert mass1 == pytest.approx(0.5)

    def test_full_selection_has_zero_deficit(self):
        with pytest.warns(UserWarning):
            rows = empirical_concentration_curve(self.line_dataset(), [4])
        _, eps, mass = rows[0]
        assert mass == 1.0
        assert eps == pytest.approx(2.0)

    def test_monotone_in_m(self):
        rng = np.random.default_rng(17)
        pts = rng.standard_normal((3, 40))
        labels = np.repeat([1, 2], 20)
        ds = LabeledDataset(pts, labels)
        rows = empirical_concentration_curve(ds, range(1, 21))
        eps_vals = [e for _, e, _ in rows]
        masses = [s for _, _, s in rows]
        assert all(a >= b - 1e-12 for a, b in zip(eps_vals, eps_vals[1:]))
        assert all(a <= b + 1e-12 for a, b in zip(masses, masses[1:]))

    def test_rejects_degenerate_inputs(self):
        with pytest.raises(ModelError):
            empirical_concentration_curve(
                LabeledDataset(np.zeros((2, 0)), np.zeros(0, dtype=int)), [1]
            )
        single = LabeledDataset(np.array([[0.0, 1.0]]), np.array([1, 1]))
        with pytest.raises(ModelError):
            empirical_concentration_curve(single, [1])
        with pytest.raises(ArgumentError):
            empirical_concentration_curve(self.line_dataset(), [0])


class TestShrinkage:
    def test_zero_eps_identity(self):
        assert shrinkage_volume_bound(50, 0.0, 2.5) == (2.5, 2.5)

    def test_frozen_values(self):
        tight, loose = shrinkage_volume_bound(100, 0.05, 1.0)
        assert tight == pytest.approx(5.92e-3, abs=1e-5)
        assert loose == pytest.approx(6.74e-3, abs=1e-5)

    def test_tight_below_loose(self):
        for n in [3, 10, 100]:
            for eps in [0.01, 0.3, 0.9]:
                tight, loose = shrinkage_volume_bound(n, eps, 1.0)
                assert tight <= loose

    def test_domain(self):
        with pytest.raises(ArgumentError):
            shrinkage_volume_bound(10, 1.0, 1.0)
        with pytest.raises(ArgumentError):
            shrinkage_volume_bound(10, -0.1, 1.0)
        with pytest.raises(ArgumentError):
            shrinkage_volume_bound(10, 0.5, -1.0)
