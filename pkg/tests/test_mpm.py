import math

import numpy as np
import pytest

from nodeboost import (DistributionFamily, InputError, normal_cdf, normal_quantile,
                       phi, phi_inverse, worst_case_constraint_slack, worst_case_gamma)

FAMILIES = ["arbitrary", "symmetric", "symmetric_unimodal", "gaussian"]


class TestNormal:
    def test_cdf_matches_erf_reference(self):
        for x in np.linspace(-8.0, 8.0, 321):
            ref = 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
            assert abs(normal_cdf(float(x)) - ref) <= 1e-12

    def test_quantile_roundtrip(self):
        for p in np.concatenate([[1e-6], np.linspace(0.001, 0.999, 199), [1 - 1e-6]]):
            assert abs(normal_cdf(normal_quantile(float(p))) - p) <= 1e-10

    def test_quantile_domain(self):
        with pytest.raises(InputError):
            normal_quantile(0.0)


class TestPhi:
    def test_gaussian_at_half_is_zero(self):
        assert phi(0.5, "gaussian") == 0.0

    def test_arbitrary_at_half(self):
        assert phi(0.5, "arbitrary") == pytest.approx(1.0, abs=1e-15)

    def test_symmetric_at_three_quarters(self):
        assert phi(0.75, "symmetric") == pytest.approx(math.sqrt(2.0), abs=1e-12)

    @pytest.mark.parametrize("gamma", [0.55, 0.65, 0.75, 0.85, 0.95])
    def test_family_ordering_above_half(self, gamma):
        values = [phi(gamma, f) for f in FAMILIES]
        assert values[0] > values[1] > values[2] > values[3]

    @pytest.mark.parametrize("family", FAMILIES)
    def test_strictly_increasing(self, family):
        grid = np.linspace(0.01, 0.99, 197)
        vals = [phi(float(g), family) for g in grid]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_domain_checked(self):
        with pytest.raises(InputError):
            phi(1.0, "arbitrary")
        with pytest.raises(InputError):
            phi(0.5, "nonsense")


class TestPhiInverse:
    def test_gaussian_at_zero(self):
        assert phi_inverse(0.0, "gaussian") == 0.5

    def test_arbitrary_at_one(self):
        assert phi_inverse(1.0, "arbitrary") == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_roundtrip_at_0_9(self, family):
        assert phi_inverse(phi(0.9, family), family) == pytest.approx(0.9, abs=1e-10)

    @pytest.mark.parametrize("family", ["arbitrary", "gaussian"])
    def test_roundtrip_full_range(self, family):
        for g in np.linspace(0.02, 0.98, 49):
            assert phi_inverse(phi(float(g), family), family) == pytest.approx(g, abs=1e-10)

    @pytest.mark.parametrize("family", ["symmetric", "symmetric_unimodal"])
    def test_roundtrip_upper_branch(self, family):
        # the gamma <= 0.5 branch of these families has coefficient zero, so
        # the inverse is only defined upward of 0.5
        for g in np.linspace(0.5, 0.98, 25):
            assert phi_inverse(phi(float(g), family), family) == pytest.approx(g, abs=1e-10)

    @pytest.mark.parametrize("family", ["symmetric", "symmetric_unimodal"])
    def test_below_branch_clamps_to_half(self, family):
        assert phi_inverse(-1.0, family) == 0.5
        assert phi_inverse(0.0, family) == 0.5
        assert phi_inverse(0.1, family) == 0.5

    def test_arbitrary_rejects_negative(self):
        with pytest.raises(InputError):
            phi_inverse(-0.5, "arbitrary")


class TestWorstCaseGamma:
    def test_zero_margin_gaussian(self):
        w, mu = np.array([1.0, 0.0]), np.array([3.0, -1.0])
        assert worst_case_gamma(w, float(w @ mu), mu, np.eye(2), "gaussian") == 0.5

    def test_arbitrary_closed_value(self):
        # t = 2 gives gamma = 4/5 for the assumption-free family
        g = worst_case_gamma(np.array([1.0, 0.0]), 0.0, np.array([2.0, 0.0]),
                             np.eye(2), "arbitrary")
        assert g == pytest.approx(0.8, abs=1e-12)

    def test_ordering_with_more_assumptions(self):
        w, b = np.array([1.0, 0.0]), 0.0
        mu, sigma = np.array([2.0, 0.0]), np.eye(2)
        gs = [worst_case_gamma(w, b, mu, sigma, f) for f in FAMILIES]
        assert gs[0] < gs[1] < gs[2] < gs[3]

    def test_zero_variance_rejected(self):
        with pytest.raises(InputError):
            worst_case_gamma(np.array([1.0, 0.0]), 0.0, np.array([1.0, 0.0]),
                             np.diag([0.0, 1.0]), "gaussian")


class TestConstraintSlack:
    def test_symmetric_at_half_is_linear(self):
        w, mu = np.array([0.5, 0.5]), np.array([1.0, 3.0])
        slack = worst_case_constraint_slack(5.0, w, mu, 4.0 * np.eye(2), 0.5, "symmetric")
        assert slack == pytest.approx(5.0 - w @ mu, abs=1e-12)

    def test_gaussian_at_half_matches_symmetric(self):
        w, mu = np.array([0.5, 0.5]), np.array([1.0, 3.0])
        s1 = worst_case_constraint_slack(5.0, w, mu, 4.0 * np.eye(2), 0.5, "symmetric")
        s2 = worst_case_constraint_slack(5.0, w, mu, 4.0 * np.eye(2), 0.5, "gaussian")
        assert s1 == pytest.approx(s2, abs=1e-12)

    def test_arbitrary_tight_case(self):
        slack = worst_case_constraint_slack(2.0, np.array([1.0]), np.array([0.0]),
                                            np.array([[1.0]]), 0.8, "arbitrary")
        assert slack == pytest.approx(0.0, abs=1e-12)

    def test_enum_alias(self):
        assert phi(0.6, DistributionFamily.GAUSSIAN) == phi(0.6, "gaussian")
