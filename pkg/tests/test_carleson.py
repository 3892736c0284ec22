"""Carleson intensities, sequence algebra, and the weight-driven families."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dyadlab as dl


def cascade(depth, delta, seed):
    return dl.generate(dl.WeightFamilySpec.from_string(f"cascade:depth={depth},delta={delta},seed={seed}"))


def random_sequence(grid, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    vals = np.zeros(grid.leaf_count)
    vals[1:] = rng.uniform(0.0, scale, grid.leaf_count - 1)
    return dl.IndexedSequence(grid, vals)


def brute_force_intensity(seq, v=None):
    """Oracle: double loop over (J, I inside J) with slice masses."""
    grid = seq.grid
    best, witness = -np.inf, None
    for J in grid.intervals():
        total = sum(seq.value(I) for I in grid.internal_intervals() if J.contains(I))
        mass = J.length if v is None else float(np.sum(v.leaf_values[grid.leaf_slice(J)])) * 2.0**-grid.depth
        if total / mass > best:
            best, witness = total / mass, J
    return best, witness


class TestIntensity:
    def test_lengths_sequence_gives_depth(self):
        # geometric series: every level contributes |J| inside J, so the root sees D
        depth = 6
        grid = dl.DyadicGrid(depth)
        vals = np.zeros(grid.leaf_count)
        for iv in grid.internal_intervals():
            vals[grid.position(iv)] = iv.length
        rep = dl.intensity(dl.IndexedSequence(grid, vals))
        assert rep.intensity == pytest.approx(float(depth), rel=1e-14)
        assert rep.witness == dl.IntervalId(0, 0)

    def test_single_support(self):
        grid = dl.DyadicGrid(5)
        target = dl.IntervalId(3, 5)
        seq = dl.IndexedSequence.from_entries(grid, {target: 0.7})
        rep = dl.intensity(seq)
        assert rep.intensity == pytest.approx(0.7 / target.length, rel=1e-14)
        assert rep.witness == target

    def test_matches_brute_force(self):
        grid = dl.DyadicGrid(6)
        seq = random_sequence(grid, 3)
        v = cascade(6, 0.7, 4)
        for weight in (None, v):
            rep = dl.intensity(seq, weight)
            oracle, _ = brute_force_intensity(seq, weight)
            assert rep.intensity == pytest.approx(oracle, rel=1e-13)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(min_value=0.01, max_value=100.0))
    def test_positively_homogeneous(self, seed, c):
        grid = dl.DyadicGrid(6)
        seq = random_sequence(grid, seed)
        base = dl.intensity(seq).intensity
        assert dl.intensity(c * seq).intensity == pytest.approx(c * base, rel=1e-12)

    def test_witness_reproduces_value(self):
        grid = dl.DyadicGrid(7)
        seq = random_sequence(grid, 8)
        v = cascade(7, 0.5, 9)
        rep = dl.intensity(seq, v)
        total = sum(seq.value(I) for I in grid.internal_intervals() if rep.witness.contains(I))
        mass = float(np.sum(v.leaf_values[grid.leaf_slice(rep.witness)])) * 2.0**-7
        assert total / mass == pytest.approx(rep.intensity, rel=1e-12)

    def test_negative_values_rejected(self):
        grid = dl.DyadicGrid(3)
        vals = np.zeros(8)
        vals[3] = -1.0
        with pytest.raises(ValueError):
            dl.IndexedSequence(grid, vals)


class TestCombine:
    def test_geometric_mean_self_is_identity(self):
        seq = random_sequence(dl.DyadicGrid(5), 11)
        got = dl.combine(seq, seq, "geometric-mean")
        assert np.allclose(got.values, seq.values, rtol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_linear_intensity_bound(self, seed):
        grid = dl.DyadicGrid(6)
        a, b = random_sequence(grid, seed), random_sequence(grid, seed + 1)
        A, B = dl.intensity(a).intensity, dl.intensity(b).intensity
        c, d = 0.7, 1.9
        got = dl.intensity(dl.combine(a, b, "linear", c=c, d=d)).intensity
        assert got <= (c * A + d * B) * (1.0 + 1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_geometric_mean_intensity_bound(self, seed):
        grid = dl.DyadicGrid(6)
        a, b = random_sequence(grid, seed), random_sequence(grid, seed + 7)
        A, B = dl.intensity(a).intensity, dl.intensity(b).intensity
        got = dl.intensity(dl.combine(a, b, "geometric-mean")).intensity
        assert got <= math.sqrt(A * B) * (1.0 + 1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_square_sum_intensity_bound(self, seed):
        grid = dl.DyadicGrid(6)
        a, b = random_sequence(grid, seed), random_sequence(grid, seed + 13)
        A, B = dl.intensity(a).intensity, dl.intensity(b).intensity
        got = dl.intensity(dl.combine(a, b, "square-sum")).intensity
        assert got <= (2.0 * A + 2.0 * B) * (1.0 + 1e-12)

    def test_grid_mismatch_rejected(self):
        with pytest.raises(ValueError):
            dl.combine(
                random_sequence(dl.DyadicGrid(4), 1), random_sequence(dl.DyadicGrid(5), 1), "linear"
            )


class TestOscillationSequence:
    def test_constant_weight_vanishes(self):
        w = dl.Weight.constant(dl.DyadicGrid(6))
        assert np.all(dl.oscillation_sequence(w, 0.25).values == 0.0)

    def test_single_jump_hand_value(self):
        # one perturbed node: the only term is computable by hand
        w = dl.Weight.from_leaves(2, [1.0, 1.0, 0.5, 1.5])
        seq = dl.oscillation_sequence(w, 0.25)
        target = dl.IntervalId(1, 1)  # averages 0.5 and 1.5
        mw, mwi = 1.0, (2.0 + 2.0 / 3.0) / 2.0
        dw = 1.0
        dwi = 2.0 / 3.0 - 2.0
        expected = (mw * mwi) ** 0.25 * 0.5 * ((dw / mw) ** 2 + (dwi / mwi) ** 2)
        assert seq.value(target) == pytest.approx(expected, rel=1e-13)
        root_mwi = (1.0 + 1.0 + 2.0 + 2.0 / 3.0) / 4.0
        root_dwi = (2.0 + 2.0 / 3.0) / 2.0 - 1.0
        expected_root = root_mwi**0.25 * ((root_dwi / root_mwi) ** 2)
        assert seq.value(dl.IntervalId(0, 0)) == pytest.approx(expected_root, rel=1e-13)

    @pytest.mark.parametrize("alpha", [0.1, 0.25, 0.4])
    def test_small_exponent_intensity_constant(self, alpha):
        bound = 72.0 / (alpha - 2.0 * alpha**2)
        worst = 0.0
        for seed in range(30):
            w = cascade(8, 0.95 * (seed + 1) / 30.0, seed)
            a2 = dl.ap_characteristic(w, 2.0).value
            ratio = dl.intensity(dl.oscillation_sequence(w, alpha)).intensity / a2**alpha
            worst = max(worst, ratio)
        assert worst <= bound

    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    def test_large_exponent_intensity_constant(self, s):
        worst = 0.0
        for seed in range(30):
            w = cascade(8, 0.95 * (seed + 1) / 30.0, 100 + seed)
            a2 = dl.ap_characteristic(w, 2.0).value
            ratio = dl.intensity(dl.oscillation_sequence(w, s)).intensity / a2**s
            worst = max(worst, ratio)
        assert worst <= 576.0

    def test_exponent_validation(self):
        w = cascade(4, 0.5, 0)
        with pytest.raises(ValueError):
            dl.oscillation_sequence(w, 0.0)
        with pytest.raises(ValueError):
            dl.oscillation_intensity_constant(-0.25)

    def test_intensity_constant_values(self):
        assert dl.oscillation_intensity_constant(0.25) == pytest.approx(576.0)
        assert dl.oscillation_intensity_constant(0.1) == pytest.approx(900.0)
        assert dl.oscillation_intensity_constant(1.0) == 576.0


class TestReciprocalJumpSequence:
    def test_constant_weight_vanishes(self):
        w = dl.Weight.constant(dl.DyadicGrid(5), 2.0)
        assert np.all(dl.reciprocal_jump_sequence(w).values == 0.0)

    def test_depth1_hand_value(self):
        w = dl.Weight.from_leaves(1, [1.0, 4.0])
        seq = dl.reciprocal_jump_sequence(w)
        assert seq.value(dl.IntervalId(0, 0)) == pytest.approx(3.515625, rel=1e-15)

    def test_intensity_constant(self):
        worst = 0.0
        for seed in range(30):
            w = cascade(8, 0.95 * (seed + 1) / 30.0, 200 + seed)
            a2 = dl.ap_characteristic(w, 2.0).value
            worst = max(worst, dl.intensity(dl.reciprocal_jump_sequence(w)).intensity / a2**2)
        assert worst <= 288.0


class TestWeightedCoefficientSequence:
    def test_matches_plain_coefficients_for_lebesgue(self):
        rng = np.random.default_rng(5)
        grid = dl.DyadicGrid(6)
        b = dl.StepFunction(grid, rng.normal(size=64))
        seq = dl.weighted_coefficient_sequence(b, dl.Weight.constant(grid), 2.0)
        s = dl.haar_transform(b)
        assert np.allclose(seq.values, s.coeffs**2, rtol=1e-14)

    def test_intensity_bound(self):
        rng = np.random.default_rng(6)
        for seed in range(10):
            w = cascade(7, 0.8, 300 + seed)
            b = dl.StepFunction(w.grid, rng.normal(size=w.grid.leaf_count))
            a2 = dl.ap_characteristic(w, 2.0).value
            bmo = dl.bmo_norm(b)
            for s in (1.0, 2.0):
                got = dl.intensity(dl.weighted_coefficient_sequence(b, w, s)).intensity
                assert got <= bmo**2 * a2**s * (1.0 + 1e-12)


class TestTransfer:
    def test_lebesgue_is_identity(self):
        seq = random_sequence(dl.DyadicGrid(6), 21)
        got = dl.transfer_to_weighted(seq, dl.Weight.constant(dl.DyadicGrid(6)))
        assert np.array_equal(got.values, seq.values)

    def test_bmo_sequence_bound(self):
        rng = np.random.default_rng(22)
        for seed in range(10):
            v = cascade(8, 0.9, 400 + seed)
            b = dl.StepFunction(v.grid, rng.normal(size=256))
            s = dl.haar_transform(b)
            seq = dl.IndexedSequence(v.grid, s.coeffs**2)
            got = dl.intensity(dl.transfer_to_weighted(seq, v), v).intensity
            assert got <= 4.0 * dl.bmo_norm(b) ** 2 * (1.0 + 1e-12)

    def test_adversarial_sweep_stays_under_four(self):
        worst = 0.0
        for seed in range(500):
            v = cascade(6, 0.98 * ((seed % 50) + 1) / 50.0, seed)
            seq = random_sequence(v.grid, 10_000 + seed)
            base = dl.intensity(seq).intensity
            got = dl.intensity(dl.transfer_to_weighted(seq, v), v).intensity
            worst = max(worst, got / base)
        assert worst <= 4.0


class TestPairing:
    def test_constant_function_recovers_root_inequality(self):
        grid = dl.DyadicGrid(6)
        seq = random_sequence(grid, 31)
        v = cascade(6, 0.6, 32)
        lhs = dl.weighted_carleson_pairing(seq, dl.StepFunction.constant(grid, 1.0), v)
        assert lhs == pytest.approx(float(np.sum(seq.values)), rel=1e-13)
        assert lhs <= dl.intensity(seq, v).intensity * v.measure(dl.IntervalId(0, 0)) * (1 + 1e-12)

    def test_normalized_indicator_recovers_defining_inequality(self):
        grid = dl.DyadicGrid(6)
        seq = random_sequence(grid, 33)
        v = cascade(6, 0.6, 34)
        J = dl.IntervalId(2, 1)
        F = np.zeros(64)
        F[grid.leaf_slice(J)] = 1.0 / J.length
        lhs = dl.weighted_carleson_pairing(seq, dl.StepFunction(grid, F), v)
        subtree = sum(seq.value(I) for I in grid.internal_intervals() if J.contains(I))
        assert lhs == pytest.approx(subtree / J.length, rel=1e-13)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_bound_holds_with_both_sides_computed(self, seed):
        rng = np.random.default_rng(seed)
        grid = dl.DyadicGrid(7)
        seq = random_sequence(grid, seed)
        v = cascade(7, 0.7, seed % 100)
        F = dl.StepFunction(grid, rng.uniform(0.0, 3.0, 128))
        lhs = dl.weighted_carleson_pairing(seq, F, v)
        rhs = dl.intensity(seq, v).intensity * float(np.sum(F.leaf_values * v.leaf_values)) / 128.0
        assert lhs <= rhs * (1.0 + 1e-12)

    def test_transfer_composition_bound(self):
        rng = np.random.default_rng(35)
        grid = dl.DyadicGrid(7)
        b = dl.StepFunction(grid, rng.normal(size=128))
        s = dl.haar_transform(b)
        seq = dl.IndexedSequence(grid, s.coeffs**2)
        B = dl.intensity(seq).intensity
        v = cascade(7, 0.8, 36)
        F = dl.StepFunction(grid, rng.uniform(0.0, 2.0, 128))
        lhs = dl.weighted_carleson_pairing(dl.transfer_to_weighted(seq, v), F, v)
        int_fv = float(np.sum(F.leaf_values * v.leaf_values)) / 128.0
        assert lhs <= 4.0 * B * int_fv * (1.0 + 1e-12)

    def test_negative_function_rejected(self):
        grid = dl.DyadicGrid(4)
        seq = random_sequence(grid, 1)
        v = dl.Weight.constant(grid)
        with pytest.raises(ValueError):
            dl.weighted_carleson_pairing(seq, dl.StepFunction.constant(grid, -1.0), v)


class TestSequenceJson:
    def test_roundtrip_omits_zeros(self):
        grid = dl.DyadicGrid(3)
        seq = dl.IndexedSequence.from_entries(
            grid, {dl.IntervalId(0, 0): 1.5, dl.IntervalId(2, 3): 0.25}
        )
        doc = seq.to_json()
        assert doc == {
            "depth": 3,
            "entries": [
                {"level": 0, "index": 0, "value": 1.5},
                {"level": 2, "index": 3, "value": 0.25},
            ],
        }
        back = dl.IndexedSequence.from_json(doc)
        assert np.array_equal(back.values, seq.values)
