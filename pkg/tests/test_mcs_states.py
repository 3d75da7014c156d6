import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bgmcs.fock_algebra import ModelParams, WeightFunction
from bgmcs.mcs_states import (
    CoefficientTable,
    TruncationError,
    assemble_state,
    build_coefficients,
    coherent_table,
    eigen_residual,
    log_coefficients,
    normalize,
)


def _bracket_sum(term, tol=1e-17):
    """Partial sums of a positive decaying series until terms drop below tol."""
    total, n = [], 1
    while True:
        t = term(n)
        total.append(t)
        if t < tol and n > 3:
            return math.fsum(total)
        n += 1


class TestBuild:
    def test_m2_j0_first_ratio(self):
        t = build_coefficients(ModelParams(2, 0, 1.0))
        assert t.coeffs[1] == pytest.approx(1.0, rel=1e-15)

    def test_m3_j2_first_ratio(self):
        t = build_coefficients(ModelParams(3, 2, 1.0))
        # sqrt(2!) f(1) f(2) / sqrt(5!) with f = 1
        assert t.coeffs[1].real == pytest.approx(math.sqrt(2) / math.sqrt(120), rel=1e-14)
        assert t.coeffs[1].real == pytest.approx(0.12910, abs=1e-5)

    @pytest.mark.parametrize("m, j", [(1, 0), (2, 1), (4, 3)])
    def test_zero_alpha_single_entry(self, m, j):
        t = normalize(build_coefficients(ModelParams(m, j, 0.0)))
        assert t.truncation_n == 0
        assert t.coeffs[0] == 1.0
        assert t.norm_const == 1.0

    def test_printed_m3_sectors(self, quartic_weight):
        # closed-form states written out for m = 3 with a general weight
        f = quartic_weight
        alpha = 0.7 * np.exp(0.3j)
        for j, pre in [(0, math.sqrt(2)), (1, math.sqrt(2) * f(1)), (2, math.sqrt(2) * f(1) * f(2))]:
            t = build_coefficients(ModelParams(3, j, alpha, weight=f))
            for n in range(1, t.truncation_n + 1):
                lv = 3 * n + j
                expected = pre * alpha**n / (math.sqrt(math.factorial(lv)) * math.exp(f.log_fact(lv)))
                assert t.coeffs[n] == pytest.approx(expected, rel=1e-12)

    def test_bgcs_reduction(self, quartic_weight):
        for w in (WeightFunction(), quartic_weight):
            alpha = 1.9 * np.exp(0.8j)
            t = build_coefficients(ModelParams(1, 0, alpha, weight=w))
            for n in range(1, t.truncation_n + 1):
                expected = (math.sqrt(2 ** (1 - (n == 1)) / math.factorial(n)) * alpha**n
                            / math.exp(w.log_fact(n)))
                assert abs(t.coeffs[n] - expected) <= 1e-14 * abs(expected)

    def test_single_step_consistency(self, quartic_weight):
        for m, j in [(2, 0), (2, 1), (3, 2), (5, 4)]:
            p = ModelParams(m, j, 1.7 * np.exp(1.1j), weight=quartic_weight)
            t = build_coefficients(p)
            lf = quartic_weight.log_fact
            start = 0 if j >= 2 else 1
            for n in range(start, t.truncation_n):
                lv = m * n + j
                ratio = p.alpha * math.exp(0.5 * (math.lgamma(lv + 1) - math.lgamma(lv + m + 1))
                                           + lf(lv) - lf(lv + m))
                assert t.coeffs[n + 1] / t.coeffs[n] == pytest.approx(ratio, rel=1e-12)

    def test_large_levels_finite(self):
        t = build_coefficients(ModelParams(1, 0, 12.0, n_cap=400))
        assert t.levels[-1] > 250
        assert np.all(np.isfinite(t.coeffs))
        assert np.all(np.isfinite(normalize(t).coeffs))

    def test_truncation_failure(self):
        with pytest.raises(TruncationError):
            build_coefficients(ModelParams(1, 0, 20.0))

    def test_weight_table_too_short(self):
        w = WeightFunction.from_values([1.0] * 8)
        with pytest.raises(TruncationError):
            build_coefficients(ModelParams(2, 0, 3.0, weight=w))

    def test_tail_bound(self):
        for m, j, r in [(1, 0, 3.0), (2, 1, 5.0), (3, 0, 0.2)]:
            p = ModelParams(m, j, r, tol=1e-10)
            t = build_coefficients(p)
            total = float(np.sum(t.weights))
            assert t.tail_bound < p.tol * total
            # the bound really covers the next terms
            longer = build_coefficients(ModelParams(m, j, r, tol=1e-15))
            assert float(np.sum(longer.weights[t.coeffs.size:])) <= t.tail_bound * (1 + 1e-9)


class TestNormalize:
    def test_m2_j0_norm(self):
        expected = 1 + 2 * _bracket_sum(lambda n: 1 / math.factorial(2 * n))
        t = coherent_table(ModelParams(2, 0, np.exp(0.4j)))
        assert t.norm_const**-2 == pytest.approx(expected, rel=1e-12)
        assert t.norm_const**-2 == pytest.approx(2.08616, abs=1e-5)

    def test_m2_j1_norm(self):
        expected = 1 + 2 * _bracket_sum(lambda n: 1 / math.factorial(2 * n + 1))
        t = coherent_table(ModelParams(2, 1, 1.0))
        assert t.norm_const**-2 == pytest.approx(expected, rel=1e-12)
        assert t.norm_const**-2 == pytest.approx(1.35040, abs=1e-5)

    @pytest.mark.parametrize("m, j", [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)])
    def test_printed_brackets(self, m, j, quartic_weight):
        f = quartic_weight
        r = 1.4
        lf = f.log_fact
        pre = {0: 1.0, 1: f(1) ** 2, 2: (f(1) * f(2)) ** 2}[j]
        bracket = 1 + 2 * _bracket_sum(
            lambda n: pre * r ** (2 * n) / (math.factorial(m * n + j) * math.exp(2 * lf(m * n + j))))
        t = coherent_table(ModelParams(m, j, r, weight=f))
        assert t.norm_const == pytest.approx(bracket**-0.5, rel=1e-12)

    def test_unit_norm(self):
        t = coherent_table(ModelParams(3, 1, 2.2 * np.exp(1j)))
        assert float(np.sum(t.weights)) == pytest.approx(1.0, abs=1e-12)

    def test_idempotent(self):
        t = coherent_table(ModelParams(3, 1, 2.2 * np.exp(1j)))
        again = normalize(t)
        assert np.array_equal(again.coeffs, t.coeffs)

    def test_tighter_tol_keeps_entries(self):
        loose = coherent_table(ModelParams(2, 0, 3.0, tol=1e-6))
        tight = coherent_table(ModelParams(2, 0, 3.0, tol=1e-14))
        assert tight.coeffs.size >= loose.coeffs.size
        scale = loose.norm_const / tight.norm_const
        np.testing.assert_allclose(tight.coeffs[: loose.coeffs.size] * scale, loose.coeffs, rtol=1e-12)


class TestAssemble:
    def test_zero_alpha(self):
        s = assemble_state(coherent_table(ModelParams(3, 1, 0.0)))
        assert list(s.levels) == [1]
        assert s.amps[0] == 1

    @pytest.mark.parametrize("m, j, first", [(2, 0, [0, 2, 4]), (3, 2, [2, 5, 8])])
    def test_levels(self, m, j, first):
        s = assemble_state(coherent_table(ModelParams(m, j, 1.0)))
        assert list(s.levels[:3]) == first
        assert s.normalized

    def test_needs_normalized(self):
        with pytest.raises(ValueError):
            assemble_state(build_coefficients(ModelParams(2, 0, 1.0)))


class TestEigenResidual:
    def test_zero_alpha(self):
        for m in (1, 2, 4):
            for j in range(m):
                p = ModelParams(m, j, 0.0)
                assert eigen_residual(assemble_state(coherent_table(p)), p) == 0.0

    def test_m2_j0(self):
        p = ModelParams(2, 0, 1.0)
        assert eigen_residual(assemble_state(coherent_table(p)), p) < 1e-10

    def test_m3_j1_imaginary(self):
        p = ModelParams(3, 1, 2j)
        assert eigen_residual(assemble_state(coherent_table(p)), p) < 1e-10

    def test_detects_wrong_state(self):
        p = ModelParams(2, 0, 1.0)
        wrong = coherent_table(ModelParams(2, 0, 1.1))
        assert eigen_residual(assemble_state(wrong), p) > 1e-3

    @pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("theta", [0.0, math.pi / 4, math.pi / 2])
    def test_sweep(self, m, theta, quartic_weight):
        for j in range(m):
            for w in (WeightFunction(), quartic_weight):
                for r in (0.3, 2.0, 5.0):
                    p = ModelParams.polar(m, j, r, theta, weight=w)
                    assert eigen_residual(assemble_state(coherent_table(p)), p) < 100 * p.tol


class TestSerialization:
    def test_json_round_trip_bitwise(self, quartic_weight):
        t = coherent_table(ModelParams(3, 2, 1.3 * np.exp(0.9j), weight=quartic_weight, k=0.25))
        back = CoefficientTable.from_json(t.to_json())
        assert back.params == t.params
        assert back.coeffs.tobytes() == t.coeffs.tobytes()
        assert back.norm_const == t.norm_const and back.tail_bound == t.tail_bound

    def test_schema(self):
        t = coherent_table(ModelParams(2, 1, 0.5))
        data = json.loads(t.to_json())
        assert set(data) >= {"params", "entries", "norm_const", "tail_bound"}
        n, level, re, im = data["entries"][1]
        assert (n, level) == (1, 3)

    def test_rejects_bad_levels(self):
        data = coherent_table(ModelParams(2, 1, 0.5)).to_dict()
        data["entries"][1][1] = 4
        with pytest.raises(ValueError):
            CoefficientTable.from_dict(data)


@settings(max_examples=60, deadline=None)
@given(
    m=st.integers(1, 5),
    data=st.data(),
    r=st.floats(0.0, 5.0),
    theta=st.floats(-math.pi, math.pi),
)
def test_eigenvalue_property(m, data, r, theta):
    j = data.draw(st.integers(0, m - 1))
    p = ModelParams.polar(m, j, r, theta)
    t = coherent_table(p)
    assert float(np.sum(t.weights)) == pytest.approx(1.0, abs=1e-12)
    assert eigen_residual(assemble_state(t), p) < 100 * p.tol


class TestLargeAlpha:
    P = ModelParams(1, 0, 35.0, n_cap=2000)

    def test_unnormalized_overflow_is_reported(self):
        with pytest.raises(TruncationError, match="overflow"):
            build_coefficients(self.P)

    def test_normalized_from_logs(self):
        t = coherent_table(self.P)
        assert t.normalized
        assert float(np.sum(t.weights)) == pytest.approx(1.0, abs=1e-13)
        # Poisson-like mass centred on n = |alpha|^2
        assert abs(int(np.argmax(t.weights)) - 1225) <= 1
        assert math.log(t.norm_const) == pytest.approx(-0.5 * (35.0**2 + math.log(2.0)), rel=1e-6)
        assert eigen_residual(assemble_state(t), self.P) < 1e-10

    def test_matches_normalize_path_below_overflow(self):
        p = ModelParams(1, 0, 20.0, n_cap=1000)
        a = coherent_table(p)
        assert a.coeffs.size == normalize(build_coefficients(p)).coeffs.size
        assert a.norm_const > 0


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_products_match_log_series(m, quartic_weight):
    for j in range(m):
        p = ModelParams.polar(m, j, 3.0, 0.7, weight=quartic_weight)
        t = build_coefficients(p)
        logc = log_coefficients(p, t.truncation_n)
        np.testing.assert_allclose(np.log(np.abs(t.coeffs)), logc, rtol=0, atol=1e-12)
        np.testing.assert_allclose(np.angle(t.coeffs[1:] / t.coeffs[:-1]), 0.7, atol=1e-12)
