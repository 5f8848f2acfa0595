import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isaccd import (
    JointPmf,
    Pmf,
    binary_convolve,
    binary_entropy,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    gaussian_differential_entropy,
    mutual_information,
    upper_concave_envelope,
)
from isaccd.errors import DomainError, InvalidDistribution, UsageError

from conftest import conv_ref, entropy_ref, hb_ref, random_joint

probs = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestBinaryEntropy:
    def test_known_values(self):
        assert binary_entropy(0.5) == pytest.approx(1.0, abs=1e-15)
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        # high-precision evaluation of the defining formula
        assert binary_entropy(0.3) == pytest.approx(hb_ref(0.3), abs=1e-15)
        assert hb_ref(0.3) == pytest.approx(0.8812908992306927, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            binary_entropy(-0.01)
        with pytest.raises(DomainError):
            binary_entropy(1.01)

    @given(probs)
    @settings(max_examples=200, deadline=None)
    def test_symmetry(self, p):
        assert binary_entropy(p) == pytest.approx(binary_entropy(1.0 - p), abs=1e-12)

    def test_concavity_on_grid(self):
        grid = np.arange(1e-3, 1.0, 1e-3)
        vals = binary_entropy(grid)
        second = vals[2:] - 2 * vals[1:-1] + vals[:-2]
        assert np.all(second <= 1e-9)

    def test_vectorized(self):
        out = binary_entropy(np.array([0.0, 0.5, 1.0]))
        assert np.allclose(out, [0.0, 1.0, 0.0])


class TestBinaryConvolve:
    def test_identity_and_absorbing(self):
        for a in (0.0, 0.2, 0.37, 0.5):
            assert binary_convolve(a, 0.0) == pytest.approx(a, abs=1e-15)
            assert binary_convolve(a, 0.5) == pytest.approx(0.5, abs=1e-15)

    def test_direct_arithmetic(self):
        assert binary_convolve(0.2, 0.1) == pytest.approx(0.26, abs=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            binary_convolve(-0.1, 0.2)
        with pytest.raises(DomainError):
            binary_convolve(0.2, 1.2)

    @given(probs, probs)
    @settings(max_examples=200, deadline=None)
    def test_commutative(self, a, b):
        assert binary_convolve(a, b) == pytest.approx(binary_convolve(b, a), abs=1e-15)

    @given(probs, probs, probs)
    @settings(max_examples=200, deadline=None)
    def test_associative(self, a, b, c):
        left = binary_convolve(binary_convolve(a, b), c)
        right = binary_convolve(a, binary_convolve(b, c))
        assert left == pytest.approx(right, abs=1e-15)

    def test_monotone_on_lower_square(self):
        grid = np.linspace(0.0, 0.5, 21)
        for b in grid:
            vals = binary_convolve(grid, b)
            assert np.all(np.diff(vals) >= -1e-15)


class TestPmfValidation:
    def test_rejects_bad_mass(self):
        with pytest.raises(InvalidDistribution):
            Pmf(np.array([0.5, 0.6]))

    def test_rejects_negative(self):
        with pytest.raises(InvalidDistribution):
            Pmf(np.array([1.1, -0.1]))

    def test_renormalizes_tiny_drift(self):
        p = Pmf(np.array([0.5, 0.5 + 5e-10]))
        assert p.probs.sum() == pytest.approx(1.0, abs=1e-16)

    def test_joint_axis_errors(self):
        with pytest.raises(UsageError):
            JointPmf(np.full((2, 2), 0.25), ("A",))
        j = JointPmf(np.full((2, 2), 0.25), ("A", "B"))
        with pytest.raises(UsageError):
            j.marginal("C")


class TestShannonQuantities:
    def test_uniform_entropy(self):
        assert entropy(Pmf(np.full(4, 0.25))) == pytest.approx(2.0, abs=1e-12)

    def test_product_pmf_zero_mi(self, rng):
        a = rng.dirichlet(np.ones(3))
        b = rng.dirichlet(np.ones(4))
        j = JointPmf(np.outer(a, b), ("A", "B"))
        assert mutual_information(j, "A", "B") == pytest.approx(0.0, abs=1e-12)

    def test_conditional_entropy_binary_channel_table(self):
        # two-route check: exhaustive 8-cell joint table for the binary
        # sensing channel vs the closed entropy combination
        b2, bs = 0.2, 0.1
        table = np.zeros((2, 2, 2))  # axes (X, S, Y2), X uniform
        for x in range(2):
            for s in range(2):
                ps = bs if s else 1.0 - bs
                for y2 in range(2):
                    flip = y2 ^ x ^ s
                    pz = b2 if flip else 1.0 - b2
                    table[x, s, y2] = 0.5 * ps * pz
        j = JointPmf(table, ("X", "S", "Y2"))
        got = conditional_entropy(j, "S", ("X", "Y2"))
        expect = hb_ref(b2) + hb_ref(bs) - hb_ref(conv_ref(b2, bs))
        assert got == pytest.approx(expect, abs=1e-12)
        assert expect == pytest.approx(0.3641773159840256, abs=1e-12)

    def test_chain_rules_on_random_joints(self, rng):
        for _ in range(20):
            j = random_joint(rng, (3, 2, 4), ("A", "B", "C"))
            h_ab = entropy(j.marginal(("A", "B")))
            assert h_ab == pytest.approx(
                entropy(j.marginal("A")) + conditional_entropy(j, "B", "A"), abs=1e-9
            )
            assert mutual_information(j, "A", "B") >= -1e-9
            lhs = mutual_information(j, ("A", "B"), "C")
            rhs = mutual_information(j, "A", "C") + conditional_mutual_information(
                j, "B", "C", "A"
            )
            assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_data_processing_on_markov_chain(self, rng):
        for _ in range(20):
            p_a = rng.dirichlet(np.ones(3))
            p_b_a = rng.dirichlet(np.ones(3), size=3)
            p_c_b = rng.dirichlet(np.ones(3), size=3)
            table = np.einsum("a,ab,bc->abc", p_a, p_b_a, p_c_b)
            j = JointPmf(table, ("A", "B", "C"))
            assert mutual_information(j, "A", "C") <= mutual_information(j, "A", "B") + 1e-9

    def test_entropy_oracle_agreement(self, rng):
        j = random_joint(rng, (4, 5), ("A", "B"))
        assert entropy(j) == pytest.approx(entropy_ref(j.table), abs=1e-12)


class TestGaussianEntropy:
    def test_unit_argument(self):
        assert gaussian_differential_entropy(1.0 / (2 * math.pi * math.e)) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_scalar_values(self):
        assert gaussian_differential_entropy(2.0 / 3.0) == pytest.approx(
            0.5 * math.log2(2 * math.pi * math.e * 2.0 / 3.0), abs=1e-15
        )
        assert gaussian_differential_entropy(2.0 / 3.0) == pytest.approx(
            1.7546143348200630, abs=1e-12
        )
        assert gaussian_differential_entropy(0.75) == pytest.approx(
            1.8395768355412192, abs=1e-12
        )

    def test_domain(self):
        for bad in (0.0, -1.0, float("nan")):
            with pytest.raises(DomainError):
                gaussian_differential_entropy(bad)


class TestUpperConcaveEnvelope:
    def test_line_reduces_to_extremes(self):
        xs = np.linspace(0.0, 1.0, 11)
        env = upper_concave_envelope([(x, 2.0 * x + 1.0) for x in xs])
        assert len(env.breakpoints) == 2
        assert env.breakpoints[0] == pytest.approx((0.0, 1.0))
        assert env.breakpoints[-1] == pytest.approx((1.0, 3.0))

    def test_strictly_concave_points_retained(self):
        xs = np.linspace(0.1, 0.9, 50)
        pts = [(x, hb_ref(x)) for x in xs]
        env = upper_concave_envelope(pts)
        assert len(env.breakpoints) == len(pts)

    def test_convex_curve_hull_is_chord(self):
        # the timesharing-regime parametric curve is convex, so its upper
        # envelope is the chord between its endpoints
        b1, b2, bs = 0.24, 0.2, 0.1
        b2s = conv_ref(b2, bs)
        alphas = np.linspace(0.0, 0.5, 200)
        pts = []
        for a in alphas:
            d = hb_ref(bs) + hb_ref(conv_ref(a, b2)) - hb_ref(conv_ref(a, b2s))
            r = 1 - hb_ref(b1) + hb_ref(conv_ref(a, b1)) - hb_ref(conv_ref(a, b2s))
            pts.append((d, r))
        env = upper_concave_envelope(pts)
        assert len(env.breakpoints) == 2
        assert env.breakpoints[0][1] == pytest.approx(1 - hb_ref(b2s), abs=1e-12)
        assert env.breakpoints[-1][1] == pytest.approx(1 - hb_ref(b1), abs=1e-12)

    def test_dominates_inputs_and_slopes_decrease(self, rng):
        for _ in range(10):
            pts = [(float(x), float(y)) for x, y in rng.normal(size=(30, 2))]
            env = upper_concave_envelope(pts)
            for x, y in pts:
                assert env(x) >= y - 1e-9
            slopes = env.slopes()
            assert np.all(np.diff(slopes) <= 1e-9)

    def test_usage_errors(self):
        with pytest.raises(UsageError):
            upper_concave_envelope([(0.0, 0.0)])
        with pytest.raises(UsageError):
            upper_concave_envelope([(0.0, 0.0), (0.0, 1.0)])
