import numpy as np
import pytest
from numpy.testing import assert_allclose

from degeig.weights import (
    CATALOGUE,
    WeightDomainError,
    WeightSpec,
    borderline_log,
    borderline_log_radial,
    borderline_log_value,
    compact_bump,
    gaussian_bump,
    indicator_ball,
    power_weight,
    sign_changing_ring,
    tabulated,
    tabulated_from_csv,
    verify_weight_split,
    weight_split,
    weight_value,
)


class TestPowerWeight:
    def test_zero_at_origin(self):
        assert power_weight(np.zeros(3), 1.0) == 0.0

    def test_unit_sphere(self):
        x = np.array([0.0, 1.0, 0.0])
        assert power_weight(x, 1.5) == 1.0

    def test_direct_evaluation(self):
        assert_allclose(power_weight(np.array([2.0, 0.0, 0.0]), 0.5), np.sqrt(2.0), rtol=1e-15)

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            power_weight(np.ones(3), 2.5)


class TestBorderlineLog:
    def test_value_at_origin_is_one(self):
        assert borderline_log_value(np.zeros(3), 3, 1.0) == 1.0
        assert borderline_log_radial(0.0, 3, 1.5) == 1.0

    def test_unit_radius_value(self):
        # r^(a-2) * log(2 + r^(2-a))^((a-2)/N) at r = 1, N = 3, a = 1
        expected = np.log(3.0) ** (-1.0 / 3.0)
        got = borderline_log_value(np.array([1.0, 0.0, 0.0]), 3, 1.0)
        assert_allclose(got, expected, rtol=1e-14)
        assert_allclose(got, 0.9691370, rtol=1e-6)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_weighted_tail_decreases(self, alpha):
        # r^(2-alpha) * h(r) = log(2 + r^(2-alpha))^((alpha-2)/N) decays monotonically
        r = np.array([1e2, 1e4, 1e6])
        vals = r ** (2.0 - alpha) * borderline_log_radial(r, 3, alpha)
        assert vals[0] > vals[1] > vals[2] > 0.0


class TestSplits:
    def test_ring_positive_band(self):
        spec = sign_changing_ring(1.0, 2.0, 1.0, -0.5)
        g1, g2, gm = weight_split(spec, 1.5)
        assert (g1, g2, gm) == (0.0, 1.0, 0.0)
        assert weight_value(spec, 1.5) == 1.0

    def test_ring_negative_shell(self):
        spec = sign_changing_ring(1.0, 2.0, 1.0, -0.5)
        g1, g2, gm = weight_split(spec, 2.5)
        assert (g1, g2, gm) == (0.0, 0.0, 0.5)
        assert weight_value(spec, 2.5) == -0.5

    def test_ball_inside(self):
        spec = indicator_ball(1.0)
        g1, g2, gm = weight_split(spec, 0.5)
        assert (g1, g2, gm) == (1.0, 0.0, 0.0)

    @pytest.mark.parametrize("name", sorted(CATALOGUE))
    def test_split_identity_shares_evaluation_path(self, name):
        spec = CATALOGUE[name](3, 1.0)
        r = np.geomspace(1e-6, 50.0, 400)
        g1, g2, gm = weight_split(spec, r)
        assert np.all(g1 >= 0.0) and np.all(g2 >= 0.0) and np.all(gm >= 0.0)
        # identical floating path: value is defined as the combination
        assert np.array_equal(weight_value(spec, r), g1 + g2 - gm)

    @pytest.mark.parametrize("name", sorted(CATALOGUE))
    def test_positive_negative_parts_disjoint(self, name):
        spec = CATALOGUE[name](3, 1.0)
        r = np.geomspace(1e-6, 50.0, 400)
        g1, g2, gm = weight_split(spec, r)
        assert np.max((g1 + g2) * gm) == 0.0

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            weight_value(gaussian_bump(), -1.0)


class TestTabulated:
    def test_linear_interpolation_and_split(self):
        spec = tabulated([0.0, 1.0, 2.0], [1.0, -1.0, 0.0])
        assert_allclose(weight_value(spec, 0.5), 0.0, atol=1e-15)
        g1, g2, gm = weight_split(spec, 1.5)
        assert g1 == 0.0 and gm == 0.5
        assert not spec.verified_split

    def test_out_of_range(self):
        spec = tabulated([0.5, 1.0, 2.0], [1.0, 1.0, 1.0])
        with pytest.raises(WeightDomainError):
            weight_value(spec, 3.0)

    def test_csv_round_trip(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text("r,g\n0,1.5\n1,0.5\n2,-0.25\n")
        spec = tabulated_from_csv(path)
        assert_allclose(weight_value(spec, 2.0), -0.25)
        bad = tmp_path / "bad.csv"
        bad.write_text("radius,value\n0,1\n1,2\n")
        with pytest.raises(ValueError):
            tabulated_from_csv(bad)


class TestVerifySplit:
    def test_gaussian_passes(self):
        rep = verify_weight_split(gaussian_bump(), 3, 1.0)
        assert rep.overall == "pass"
        assert rep.g1_norm_verdict == "finite"
        assert rep.decay_pass  # decaying part identically zero satisfies everything
        assert rep.positive_part_nonzero

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_borderline_divergent_norm_and_decay_pass(self, alpha):
        rep = verify_weight_split(borderline_log(3, alpha), 3, alpha)
        assert rep.decay_pass
        assert rep.gplus_norm_verdict == "divergent"
        assert rep.g2_norm_verdict == "divergent"
        assert rep.overall == "pass"

    def test_pure_power_fails_at_infinity(self):
        # without the log tempering, r^(2-alpha) * g is identically 1
        alpha = 1.0
        spec = WeightSpec(
            name="pure-power",
            g_decaying=lambda r: np.asarray(r, dtype=float) ** (alpha - 2.0),
        )
        rep = verify_weight_split(spec, 3, alpha)
        assert not rep.infinity.passed
        assert not rep.decay_pass
        assert rep.overall == "fail"

    def test_tabulated_unverifiable(self):
        spec = tabulated(np.linspace(0.0, 5.0, 11), np.ones(11))
        rep = verify_weight_split(spec, 3, 1.0)
        assert rep.overall == "unverified"
        assert rep.g1_norm_verdict == "unverifiable"

    def test_sampling_validation(self):
        with pytest.raises(ValueError):
            verify_weight_split(gaussian_bump(), 3, 1.0, radii=np.array([1.0, 2.0, 3.0, 4.0, 5.0]))
        with pytest.raises(ValueError):
            verify_weight_split(gaussian_bump(), 3, 1.0, radii=np.array([1.0, 1.0, 10.0, 100.0, 1e4]))

    def test_report_serializes(self):
        rep = verify_weight_split(sign_changing_ring(), 3, 1.0)
        d = rep.to_dict()
        assert d["overall"] == "pass"
        assert len(d["probes"]) == 3


class TestConstructorValidation:
    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            gaussian_bump(amplitude=-1.0)
        with pytest.raises(ValueError):
            sign_changing_ring(inner=2.0, outer=1.0)
        with pytest.raises(ValueError):
            compact_bump(radius=0.0)
        with pytest.raises(ValueError):
            borderline_log(2, 1.0)
        with pytest.raises(ValueError):
            tabulated([0.0, 1.0], [1.0, 2.0], rule="spline")
