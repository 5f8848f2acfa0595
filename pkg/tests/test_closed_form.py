import math

import numpy as np
import pytest

from isaccd import (
    BinaryIsacParams,
    GaussianIsacParams,
    binary_capacity_distortion,
    binary_distortion_range,
    gaussian_capacity_logloss,
    gaussian_distortion_range_logloss,
    gaussian_pprime,
    logloss_from_conventional,
    mse_capacity,
    mse_distortion_range,
    solve_alpha_d,
    state_split_transform,
)
from isaccd.closed_form import EXACT, LOWER_BOUND
from isaccd.errors import RangeError, UsageError

from conftest import conv_ref, hb_ref

TWO_PI_E = 2.0 * math.pi * math.e

FIG_BINARY = dict(beta2=0.2, beta_s=0.1)
FIG_GAUSSIAN = dict(n2=2.0, ns=1.0, p=1.0)


def binary(beta1):
    return BinaryIsacParams(beta1, FIG_BINARY["beta2"], FIG_BINARY["beta_s"])


def gaussian(n1):
    return GaussianIsacParams(n1, FIG_GAUSSIAN["n2"], FIG_GAUSSIAN["ns"], FIG_GAUSSIAN["p"])


class TestBinaryRange:
    def test_reference_values(self):
        rng = binary_distortion_range(binary(0.3))
        d_min = hb_ref(0.2) + hb_ref(0.1) - hb_ref(conv_ref(0.2, 0.1))
        assert rng.d_min == pytest.approx(d_min, abs=1e-12)
        assert rng.d_max == pytest.approx(hb_ref(0.1), abs=1e-12)
        assert d_min == pytest.approx(0.3641773159840256, abs=1e-12)
        assert rng.d_max == pytest.approx(0.4689955935892812, abs=1e-12)

    def test_range_collapses_as_beta2_grows(self):
        rng = binary_distortion_range(BinaryIsacParams(0.3, 0.4999, 0.1))
        assert rng.d_max - rng.d_min <= 1e-6

    def test_within_state_entropy(self):
        for b2 in (0.05, 0.2, 0.45):
            for bs in (0.05, 0.2, 0.45):
                rng = binary_distortion_range(BinaryIsacParams(0.3, b2, bs))
                assert 0.0 <= rng.d_min <= rng.d_max <= hb_ref(bs) + 1e-12


class TestSolveAlphaD:
    def test_endpoints(self):
        params = binary(0.18)
        rng = binary_distortion_range(params)
        assert solve_alpha_d(params, rng.d_max) == pytest.approx(0.5, abs=1e-9)
        assert solve_alpha_d(params, rng.d_min) == pytest.approx(0.0, abs=1e-9)

    def test_residual_and_value(self):
        params = binary(0.18)
        alpha = solve_alpha_d(params, 0.42)
        eps = conv_ref(alpha, 0.2)
        value = hb_ref(0.1) + hb_ref(eps) - hb_ref(conv_ref(eps, 0.1))
        assert abs(value - 0.42) <= 1e-12
        assert alpha == pytest.approx(0.14739895543663634, abs=1e-9)

    def test_round_trip_grid(self):
        params = binary(0.18)
        rng = binary_distortion_range(params)
        for d in np.linspace(rng.d_min, rng.d_max, 17):
            alpha = solve_alpha_d(params, float(d))
            eps = conv_ref(alpha, 0.2)
            value = hb_ref(0.1) + hb_ref(eps) - hb_ref(conv_ref(eps, 0.1))
            assert abs(value - d) <= 1e-12

    def test_out_of_range_reports_interval(self):
        params = binary(0.18)
        with pytest.raises(RangeError) as err:
            solve_alpha_d(params, 0.9)
        assert err.value.d_min is not None and err.value.d_max is not None


class TestBinaryCurve:
    def test_constant_regime(self):
        params = binary(0.3)
        rng = binary_distortion_range(params)
        for d in np.linspace(rng.d_min, rng.d_max, 7):
            pt = binary_capacity_distortion(params, float(d))
            assert pt.c == pytest.approx(1 - hb_ref(0.3), abs=1e-12)
            assert pt.exactness == EXACT
        assert 1 - hb_ref(0.3) == pytest.approx(0.1187091007693073, abs=1e-12)

    def test_timeshare_endpoints_and_flags(self):
        params = binary(0.24)
        rng = binary_distortion_range(params)
        lo = binary_capacity_distortion(params, rng.d_min)
        hi = binary_capacity_distortion(params, rng.d_max)
        assert lo.c == pytest.approx(1 - hb_ref(0.26), abs=1e-12)
        assert hi.c == pytest.approx(1 - hb_ref(0.24), abs=1e-12)
        assert lo.exactness == EXACT
        seq = binary_capacity_distortion(params, rng.d_min, loss="sequence")
        assert seq.exactness == LOWER_BOUND
        assert seq.c == pytest.approx(lo.c, abs=1e-15)

    def test_superposition_endpoints(self):
        params = binary(0.18)
        rng = binary_distortion_range(params)
        lo = binary_capacity_distortion(params, rng.d_min)
        hi = binary_capacity_distortion(params, rng.d_max)
        assert lo.c == pytest.approx(1 - hb_ref(0.26), abs=1e-9)
        assert hi.c == pytest.approx(1 - hb_ref(0.18), abs=1e-9)
        for loss in ("symbol", "sequence"):
            assert binary_capacity_distortion(params, 0.42, loss=loss).exactness == EXACT

    def test_case_boundary_agreement(self):
        # constant/timeshare boundary: the line's slope vanishes
        b2s = conv_ref(0.2, 0.1)
        params = BinaryIsacParams(b2s, 0.2, 0.1)
        rng = binary_distortion_range(params)
        for d in np.linspace(rng.d_min, rng.d_max, 5):
            line = (hb_ref(b2s) - hb_ref(params.beta1)) / (
                hb_ref(b2s) - hb_ref(0.2)
            ) * (d - hb_ref(0.1)) + 1 - hb_ref(params.beta1)
            got = binary_capacity_distortion(params, float(d)).c
            assert got == pytest.approx(line, abs=1e-9)
        # timeshare/superposition boundary: both formulas are the same line
        params = BinaryIsacParams(0.2, 0.2, 0.1)
        rng = binary_distortion_range(params)
        for d in np.linspace(rng.d_min, rng.d_max, 5):
            line = (hb_ref(b2s) - hb_ref(0.2)) / (hb_ref(b2s) - hb_ref(0.2)) * (
                d - hb_ref(0.1)
            ) + 1 - hb_ref(0.2)
            got = binary_capacity_distortion(params, float(d)).c
            assert got == pytest.approx(line, abs=1e-9)

    @pytest.mark.parametrize("beta1", [0.3, 0.24, 0.18])
    def test_monotone_and_curvature(self, beta1):
        params = binary(beta1)
        rng = binary_distortion_range(params)
        grid = np.linspace(rng.d_min, rng.d_max, 50)
        vals = np.array([binary_capacity_distortion(params, float(d)).c for d in grid])
        assert np.all(np.diff(vals) >= -1e-9)
        second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
        if beta1 == 0.24:
            assert np.all(np.abs(second) <= 1e-12)
        else:
            assert np.all(second <= 1e-9)

    def test_out_of_range(self):
        with pytest.raises(RangeError):
            binary_capacity_distortion(binary(0.18), 0.1)
        with pytest.raises(UsageError):
            binary_capacity_distortion(binary(0.18), 0.42, loss="blockwise")


class TestGaussianLogLoss:
    def test_range_values(self):
        rng = gaussian_distortion_range_logloss(gaussian(1.5))
        assert rng.d_min == pytest.approx(0.5 * math.log2(TWO_PI_E * 2.0 / 3.0), abs=1e-12)
        assert rng.d_max == pytest.approx(0.5 * math.log2(TWO_PI_E * 0.75), abs=1e-12)

    def test_range_monotone_in_power(self):
        base = None
        for p in (1e-9, 0.5, 1.0, 2.0):
            rng = gaussian_distortion_range_logloss(GaussianIsacParams(1.5, 2.0, 1.0, p))
            width = rng.d_max - rng.d_min
            if base is not None:
                assert width > base
            base = width
        tiny = gaussian_distortion_range_logloss(GaussianIsacParams(1.5, 2.0, 1.0, 1e-12))
        assert tiny.d_max - tiny.d_min <= 1e-9

    def test_pprime_endpoints_and_inversion(self):
        params = gaussian(1.5)
        rng = gaussian_distortion_range_logloss(params)
        assert gaussian_pprime(params, rng.d_min) == pytest.approx(0.0, abs=1e-9)
        assert gaussian_pprime(params, rng.d_max) == pytest.approx(params.p, abs=1e-9)
        pp = gaussian_pprime(params, 1.80)
        assert 0.0 < pp < 1.0
        back = 0.5 * math.log2(TWO_PI_E * (pp + 2.0) / (pp + 3.0))
        assert abs(back - 1.80) <= 1e-12

    def test_constant_regime(self):
        params = gaussian(3.5)
        rng = gaussian_distortion_range_logloss(params)
        for d in np.linspace(rng.d_min, rng.d_max, 5):
            pt = gaussian_capacity_logloss(params, float(d))
            assert pt.c == pytest.approx(0.5 * math.log2(4.5 / 3.5), abs=1e-12)
            assert pt.exactness == EXACT
        assert 0.5 * math.log2(4.5 / 3.5) == pytest.approx(0.18128503969235418, abs=1e-12)

    def test_superposition_values(self):
        params = gaussian(1.5)
        rng = gaussian_distortion_range_logloss(params)
        hi = gaussian_capacity_logloss(params, rng.d_max)
        lo = gaussian_capacity_logloss(params, rng.d_min)
        assert hi.c == pytest.approx(0.5 * math.log2(5.0 / 3.0), abs=1e-12)
        assert lo.c == pytest.approx(0.5 * math.log2(4.0 / 3.0), abs=1e-12)
        assert hi.exactness == EXACT

    def test_timeshare_is_lower_bound_line(self):
        params = gaussian(2.5)
        rng = gaussian_distortion_range_logloss(params)
        pts = [gaussian_capacity_logloss(params, float(d)) for d in np.linspace(rng.d_min, rng.d_max, 9)]
        assert all(p.exactness == LOWER_BOUND for p in pts)
        vals = np.array([p.c for p in pts])
        second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
        assert np.all(np.abs(second) <= 1e-12)
        assert pts[-1].c == pytest.approx(0.5 * math.log2(3.5 / 2.5), abs=1e-12)

    def test_monotone_nondecreasing(self):
        for n1 in (3.5, 2.5, 1.5):
            params = gaussian(n1)
            rng = gaussian_distortion_range_logloss(params)
            vals = [
                gaussian_capacity_logloss(params, float(d)).c
                for d in np.linspace(rng.d_min, rng.d_max, 33)
            ]
            assert np.all(np.diff(vals) >= -1e-9)


class TestMse:
    def test_range_fractions(self):
        rng = mse_distortion_range(gaussian(1.5))
        assert rng.d_min == pytest.approx(2.0 / 3.0, abs=1e-15)
        assert rng.d_max == pytest.approx(0.75, abs=1e-15)

    def test_values_and_exactness(self):
        params = gaussian(1.5)
        hi = mse_capacity(params, 0.75)
        lo = mse_capacity(params, 2.0 / 3.0)
        assert hi.c == pytest.approx(0.5 * math.log2(5.0 / 3.0), abs=1e-12)
        assert lo.c == pytest.approx(0.5 * math.log2((4.0 / 1.5) * (-0.5 + 1.5 * 2.0 / 3.0)), abs=1e-12)
        assert lo.c == pytest.approx(0.20751874963942188, abs=1e-12)
        assert hi.exactness == EXACT and lo.exactness == EXACT
        mid = mse_capacity(gaussian(2.5), 0.7)
        assert mid.exactness == EXACT

    def test_constant_regime(self):
        params = gaussian(3.5)
        for d in np.linspace(2.0 / 3.0, 0.75, 5):
            assert mse_capacity(params, float(d)).c == pytest.approx(
                0.18128503969235418, abs=1e-12
            )

    def test_constant_boundary_continuity(self):
        # at n1 = n2 + ns both branch formulas coincide
        params = GaussianIsacParams(3.0, 2.0, 1.0, 1.0)
        rng = mse_distortion_range(params)
        for d in np.linspace(rng.d_min, rng.d_max, 5):
            inner = (params.n1 - 2.0) * 1.0 + (2.0 + 1.0 - params.n1) * d
            branch2 = 0.5 * math.log2((1.0 + 3.0) / (3.0 * 1.0) * inner)
            assert mse_capacity(params, float(d)).c == pytest.approx(branch2, abs=1e-12)


class TestStateSplit:
    def test_reference_point(self):
        params = gaussian(2.5)
        new_params, d_new = state_split_transform(params, 0.70)
        assert new_params.n2 == pytest.approx(2.5, abs=1e-15)
        assert new_params.ns == pytest.approx(0.5, abs=1e-15)
        assert d_new == pytest.approx(0.5 * (0.5 * 0.3 + 0.7), abs=1e-15)
        assert d_new == pytest.approx(0.425, abs=1e-15)

    def test_round_trip_identity(self):
        params = gaussian(2.5)
        rng = mse_distortion_range(params)
        for d in np.linspace(rng.d_min, rng.d_max, 20):
            new_params, d_new = state_split_transform(params, float(d))
            direct = mse_capacity(params, float(d)).c
            via = mse_capacity(new_params, d_new).c
            assert abs(direct - via) <= 1e-12

    def test_endpoint_maps_to_new_minimum(self):
        params = gaussian(2.5)
        rng = mse_distortion_range(params)
        new_params, d_new = state_split_transform(params, rng.d_min)
        expect = new_params.n2 * new_params.ns / (new_params.n2 + new_params.ns)
        assert d_new == pytest.approx(expect, abs=1e-12)

    def test_preconditions(self):
        with pytest.raises(UsageError):
            state_split_transform(gaussian(1.5), 0.7)  # n1 <= n2
        with pytest.raises(UsageError):
            state_split_transform(gaussian(3.5), 0.7)  # n1 >= n2 + ns


class TestConventionalBridge:
    def test_bernoulli(self):
        assert logloss_from_conventional("bernoulli", 0.1, 0.1) == pytest.approx(
            hb_ref(0.1), abs=1e-12
        )
        assert logloss_from_conventional("bernoulli", 0.1, 0.05) == pytest.approx(
            hb_ref(0.05), abs=1e-12
        )
        assert hb_ref(0.05) == pytest.approx(0.28639695711595625, abs=1e-12)

    def test_gaussian(self):
        assert logloss_from_conventional("gaussian", 1.0, 1.0) == pytest.approx(
            0.5 * math.log2(TWO_PI_E), abs=1e-12
        )
        assert 0.5 * math.log2(TWO_PI_E) == pytest.approx(2.047095585180641, abs=1e-10)

    def test_range_errors(self):
        with pytest.raises(RangeError):
            logloss_from_conventional("bernoulli", 0.1, 0.2)
        with pytest.raises(RangeError):
            logloss_from_conventional("gaussian", 1.0, 1.5)
        with pytest.raises(UsageError):
            logloss_from_conventional("poisson", 1.0, 0.5)
