"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS/FAIL line (visible with pytest -s); run just
this module via `pytest tests/test_acceptance.py -v`.
"""

import math

import numpy as np
import pytest

import dyadlab as dl
from dyadlab import experiments
from dyadlab.cli import main
from oracles import cascade, operator_zoo, reference_matrix

DEPTH = 10


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}{' ' + detail if detail else ''}")


def spread(k, count, top):
    return top * (k + 1) / count


class TestCriterion1ExactIdentity:
    def test_necessary_condition_identity(self):
        # direct application vs closed form for every admissible I0
        worst = 0.0
        ok = True
        for k in range(50):
            w = cascade(DEPTH, spread(k, 50, 0.95), k)
            wid = f"seed={k}"
            for t in (-0.5, 0.5, 1.0):
                for m in range(3):
                    for n in range(3):
                        rows = experiments.necessary_report(
                            w, wid, t, [1.5, 2.0, 3.0], m, n, identity_tol=1e-11
                        )
                        for row in rows:
                            worst = max(worst, row["max_discrepancy"])
                            ok = ok and row["identity_ok"]
                            # the certified bound reproduces the level-restricted
                            # characteristic and never exceeds the full one
                            assert row["norm_lower_bound"] == pytest.approx(
                                row["restricted_characteristic"], rel=1e-9
                            )
                            assert (
                                row["norm_lower_bound"]
                                <= row["full_characteristic"] * (1.0 + 1e-9)
                            )
        ok = ok and worst < 1e-11
        report("1 exact-identity", ok, f"max discrepancy {worst:.3e}")
        assert ok


class TestCriterion2Orthonormality:
    def test_gram_deviation(self):
        worst = 0.0
        rng = np.random.default_rng(2)
        for k in range(100):
            if k < 80:
                v = cascade(8, spread(k, 80, 0.95), 300 + k)
            else:
                a = float(rng.uniform(-0.5, 2.5))
                x0 = float(rng.uniform(0.0, 1.0))
                v = dl.generate(dl.WeightFamilySpec("power", {"depth": 8, "a": a, "x0": x0}))
            worst = max(worst, experiments.gram_deviation(v))
        ok = worst < 1e-10
        report("2 weighted-haar-orthonormality", ok, f"max Gram deviation {worst:.3e}")
        assert ok


class TestCriterion3Decomposition:
    def test_reconstruction_and_bounds(self):
        worst_err = 0.0
        worst_alpha = 0.0
        worst_beta = 0.0
        for k in range(100):
            v = cascade(8, spread(k, 100, 0.95), 500 + k)
            grid = v.grid
            for iv in grid.internal_intervals():
                d = dl.decompose_haar(v, iv)
                hv = dl.weighted_haar(v, iv).leaf_values
                hl = 2.0 ** (iv.level / 2.0)
                sl = grid.leaf_slice(iv)
                recon = d.alpha * hv[sl] + d.beta * hl
                target = np.where(np.arange(sl.start, sl.stop) < (sl.start + sl.stop) // 2, -hl, hl)
                worst_err = max(worst_err, float(np.abs(recon - target).max()))
                m_v = v.mean(iv)
                left, right = iv.children()
                jump = abs(v.mean(right) - v.mean(left))
                worst_alpha = max(worst_alpha, abs(d.alpha) / math.sqrt(m_v))
                if jump > 0.0:
                    worst_beta = max(worst_beta, abs(d.beta) * m_v / jump)
        ok = worst_err < 1e-12 and worst_alpha <= 1.0 + 1e-12 and worst_beta <= 1.0 + 1e-12
        report(
            "3 two-term-decomposition",
            ok,
            f"max reconstruction {worst_err:.3e}, alpha margin {worst_alpha:.12f}, beta margin {worst_beta:.12f}",
        )
        assert ok


class TestCriterion4ShiftContractivity:
    def test_random_sign_shift_norms(self):
        space = dl.Weight.constant(dl.DyadicGrid(DEPTH))
        worst = 0.0
        for draw in range(50):
            for m in range(4):
                for n in range(4):
                    op = dl.OperatorSpec.haar_shift(m, n, dl.CoefficientFamily.random_signs(draw))
                    est = dl.weighted_norm(op, space, tol=1e-6, max_iter=60, seed=draw)
                    worst = max(worst, est.value)
        ok = worst <= 1.0 + 1e-8
        report("4 haar-shift-contractivity", ok, f"max norm {worst:.12f}")
        assert ok


class TestCriterion5PinnedConstants:
    def test_lemma_suite(self):
        seeds = 200
        euler = math.e
        margins = {
            "transfer": 0.0,
            "osc_0.1": 0.0,
            "osc_0.25": 0.0,
            "osc_0.4": 0.0,
            "jump": 0.0,
            "tau_0.5": 0.0,
            "tau_1": 0.0,
            "tau_2": 0.0,
            "lift_ratio": 0.0,
            "stop_hi": 0.0,
            "stop_lo": math.inf,
        }
        lift_ok = True
        rng = np.random.default_rng(5)
        for k in range(seeds):
            delta = spread(k, seeds, 0.99)
            w = cascade(DEPTH, delta, 700 + k)
            u = w.reciprocal()
            lebesgue = dl.Weight.constant(w.grid)
            a2 = dl.ap_characteristic(w, 2.0).value
            b = experiments.parse_b_spec(f"log:cascade:depth={DEPTH},delta=0.5,seed={1700 + k}", DEPTH)
            spectrum = dl.haar_transform(b)
            bsq = dl.IndexedSequence(w.grid, spectrum.coeffs**2)
            b_int = dl.intensity(bsq).intensity

            got = dl.intensity(dl.transfer_to_weighted(bsq, w), w).intensity / b_int
            margins["transfer"] = max(margins["transfer"], got / 4.0)
            rand_seq = dl.IndexedSequence(w.grid, np.r_[0.0, rng.uniform(0.0, 1.0, w.grid.leaf_count - 1)])
            got = (
                dl.intensity(dl.transfer_to_weighted(rand_seq, w), w).intensity
                / dl.intensity(rand_seq).intensity
            )
            margins["transfer"] = max(margins["transfer"], got / 4.0)

            for s in (0.1, 0.25, 0.4):
                bound = 72.0 / (s - 2.0 * s * s)
                got = dl.intensity(dl.oscillation_sequence(w, s)).intensity / a2**s
                margins[f"osc_{s}"] = max(margins[f"osc_{s}"], got / bound)
            got = dl.intensity(dl.reciprocal_jump_sequence(w)).intensity / a2**2
            margins["jump"] = max(margins["jump"], got / 288.0)
            for s, key in ((0.5, "tau_0.5"), (1.0, "tau_1"), (2.0, "tau_2")):
                got = dl.intensity(dl.oscillation_sequence(w, s)).intensity / a2**s
                margins[key] = max(margins[key], got / 576.0)

            jump_seq = dl.reciprocal_jump_sequence(w)
            base = dl.intensity(jump_seq).intensity
            for m in range(5):
                order = m + 2
                lifted = dl.lift_sequence(
                    jump_seq,
                    lambda L, _m=m, _o=order: dl.build_stopping(w, u, L, _m, _o),
                    lebesgue,
                    m,
                )
                ratio = dl.intensity(lifted).intensity / base
                margins["lift_ratio"] = max(margins["lift_ratio"], ratio / (m + 1))
                lift_ok = lift_ok and ratio <= (m + 1) * (1.0 + 1e-9)
                for level in (0, min(3, DEPTH - m), DEPTH - m):
                    for index in sorted({0, (1 << level) - 1, (1 << level) // 2}):
                        L = dl.IntervalId(level, index)
                        fam = dl.build_stopping(w, u, L, m, order)
                        mLw, mLu = w.mean(L), u.mean(L)
                        for K in fam.members:
                            for g, mL in ((w, mLw), (u, mLu)):
                                r = g.mean(K) / mL
                                margins["stop_hi"] = max(margins["stop_hi"], r)
                                margins["stop_lo"] = min(margins["stop_lo"], r)
        ok = (
            margins["transfer"] <= 1.0
            and all(margins[f"osc_{s}"] <= 1.0 for s in (0.1, 0.25, 0.4))
            and margins["jump"] <= 1.0
            and all(margins[k] <= 1.0 for k in ("tau_0.5", "tau_1", "tau_2"))
            and margins["lift_ratio"] <= 1.0 + 1e-9
            and lift_ok
            and margins["stop_hi"] <= euler
            and margins["stop_lo"] >= 1.0 / euler
        )
        report(
            "5 pinned-constant-lemmas",
            ok,
            "max margins: transfer %.3f, osc %.3f, jump %.3f, tau %.3f, lift %.3f, averages in [%.3f, %.3f]"
            % (
                margins["transfer"],
                max(margins[f"osc_{s}"] for s in (0.1, 0.25, 0.4)),
                margins["jump"],
                max(margins[k] for k in ("tau_0.5", "tau_1", "tau_2")),
                margins["lift_ratio"],
                margins["stop_lo"],
                margins["stop_hi"],
            ),
        )
        assert ok


class TestCriterion6DenseOracle:
    def test_matrix_free_matches_dense(self):
        worst_apply = 0.0
        worst_adj = 0.0
        worst_norm = 0.0
        for depth in (4, 5, 6):
            grid = dl.DyadicGrid(depth)
            w = cascade(depth, 0.6, 40 + depth)
            sqw = np.sqrt(w.leaf_values)
            for op in operator_zoo(depth, depth):
                M_ref = reference_matrix(op, grid)
                scale = max(1.0, np.abs(M_ref).max())
                M_free = dl.apply_leaves(op, depth, np.eye(grid.leaf_count))
                M_adj = dl.apply_adjoint_leaves(op, depth, np.eye(grid.leaf_count))
                worst_apply = max(worst_apply, np.abs(M_ref - M_free).max() / scale)
                worst_adj = max(worst_adj, np.abs(M_free.T - M_adj).max() / scale)
                dense = float(np.linalg.svd(sqw[:, None] * M_free / sqw[None, :], compute_uv=False)[0])
                est = dl.weighted_norm(op, w, tol=1e-12, max_iter=20000)
                if dense > 0.0:
                    worst_norm = max(worst_norm, abs(est.value - dense) / dense)
        ok = worst_apply <= 1e-12 and worst_adj <= 1e-12 and worst_norm <= 1e-6
        report(
            "6 dense-oracle-agreement",
            ok,
            f"apply {worst_apply:.3e}, adjoint {worst_adj:.3e}, norm rel {worst_norm:.3e}",
        )
        assert ok


class TestCriterion7BoundSweeps:
    def test_cascade_family_sweeps(self):
        specs = [
            f"cascade:delta={spread(d, 20, 0.95):.4f},seed={100 * d + s}"
            for d in range(20)
            for s in range(10)
        ]
        mn = [(m, n) for m in range(3) for n in range(3)]
        config = experiments.ExperimentConfig(
            depth=DEPTH,
            weight_specs=specs,
            mn_pairs=mn,
            t_values=[1.0],
            tol=1e-4,
            max_iter=60,
            seed=0,
            b_spec="log:cascade:delta=0.5,seed=1",
        )
        para_rows, para_slopes = experiments.paraproduct_sweep(config)
        mult_rows, _ = experiments.multiplier_sweep(config)

        def grouped_ratio_ok(rows):
            worst = 0.0
            for pair in mn:
                ratios = [r["ratio"] for r in rows if (r["m"], r["n"]) == pair]
                med = float(np.median(ratios))
                worst = max(worst, max(ratios) / med)
                if max(ratios) > 10.0 * med:
                    return worst, False
            return worst, True

        finite = all(
            np.isfinite(r["measured_norm"]) and np.isfinite(r["ratio"]) and r["ratio"] >= 0.0
            for r in para_rows + mult_rows
        )
        para_spread, para_ok = grouped_ratio_ok(para_rows)
        mult_spread, mult_ok = grouped_ratio_ok(mult_rows)
        max_slope = max(s["slope"] for s in para_slopes)
        slope_ok = max_slope <= 1.1
        ok = finite and para_ok and mult_ok and slope_ok
        report(
            "7 bound-sweeps",
            ok,
            f"ratio spread para {para_spread:.2f}x / mult {mult_spread:.2f}x of median, max log-log slope {max_slope:.3f}",
        )
        assert ok


class TestCriterion8Determinism:
    def test_byte_identical_reports(self, tmp_path):
        args = [
            "sweep-mult",
            "--weights",
            "cascade:delta=0.7,seed=9;cascade:delta=0.3,seed=4",
            "--t",
            "0.5,1",
            "--depth",
            "8",
            "--mn",
            "0..1",
            "--seed",
            "7",
            "--tol",
            "1e-5",
            "--max-iter",
            "60",
        ]
        assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
        assert main(args + ["--out", str(tmp_path / "b.csv")]) == 0
        same_csv = (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        same_slopes = (tmp_path / "a_slopes.csv").read_bytes() == (tmp_path / "b_slopes.csv").read_bytes()
        same_png = (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()
        jargs = [
            "verify-lemmas",
            "--depth",
            "7",
            "--seeds",
            "3",
            "--seed",
            "2",
            "--format",
            "json",
            "--no-figure",
        ]
        assert main(jargs + ["--out", str(tmp_path / "a.json")]) == 0
        assert main(jargs + ["--out", str(tmp_path / "b.json")]) == 0
        same_json = (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        ok = same_csv and same_slopes and same_png and same_json
        report("8 determinism", ok, f"csv {same_csv}, slopes {same_slopes}, png {same_png}, json {same_json}")
        assert ok
