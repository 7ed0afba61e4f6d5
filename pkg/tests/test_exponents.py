import numpy as np
import pytest

from bb84ratio import (
    DomainError,
    ErrorRates,
    ProtocolParams,
    ToleranceConfig,
    d_bit,
    d_phase,
    exponent_bit,
    exponent_phase,
)
from conftest import brute_force_exponent, divergence_oracle


def mp_divergence(basis: str, p1, p2, q, qp) -> float:
    """Arbitrary-precision evaluation of the defining entropy expression."""
    import mpmath

    mpmath.mp.dps = 40

    def h(x):
        x = mpmath.mpf(x)
        if x == 0 or x == 1:
            return mpmath.mpf(0)
        return -(x * mpmath.log(x, 2) + (1 - x) * mpmath.log(1 - x, 2))

    p1, p2, q, qp = (mpmath.mpf(repr(v)) for v in (p1, p2, q, qp))
    if basis == "phase":
        s = p2**2
        w = (1 - p2) ** 2 * (1 - p1)
        pop = s + w
        mix = (s * q + w * qp) / pop
        return float(pop * h(mix) - s * h(q) - w * h(qp))
    mix = p1 * q + (1 - p1) * qp
    return float((1 - p2) ** 2 * (h(mix) - p1 * h(q) - (1 - p1) * h(qp)))


class TestProtocolParams:
    def test_derived_ratios(self):
        p = ProtocolParams(p1=0.1, p2=0.3)
        assert p.phase_sample == pytest.approx(0.09)
        assert p.bit_sample == pytest.approx(0.49 * 0.1)
        assert p.raw_key == pytest.approx(0.49 * 0.9)
        assert p.phase_population == pytest.approx(p.phase_sample + p.raw_key)

    def test_partition_identities(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = ProtocolParams(*rng.uniform(0.0, 0.5, size=2))
            assert p.phase_sample + p.raw_key == pytest.approx(p.phase_population)
            assert p.raw_key + p.bit_sample == pytest.approx((1 - p.p2) ** 2)
            for ratio in (p.phase_sample, p.bit_sample, p.raw_key, p.phase_population):
                assert 0.0 <= ratio <= 1.0

    @pytest.mark.parametrize("p1,p2", [(-0.1, 0.2), (0.6, 0.2), (0.2, 0.51), (1.0, 0.0)])
    def test_validation(self, p1, p2):
        with pytest.raises(DomainError):
            ProtocolParams(p1=p1, p2=p2)


class TestErrorRates:
    def test_validation(self):
        ErrorRates(0.0, 0.5)
        with pytest.raises(DomainError):
            ErrorRates(0.51, 0.1)
        with pytest.raises(DomainError):
            ErrorRates(0.1, -0.01)


class TestDivergences:
    def test_zero_at_equal_rates(self):
        # equality case on a parameter grid
        for p1 in np.linspace(0.0, 0.5, 20):
            for p2 in np.linspace(0.0, 0.5, 20):
                params = ProtocolParams(p1, p2)
                for q in np.linspace(0.0, 0.5, 10):
                    assert d_phase(params, q, q) == pytest.approx(0.0, abs=1e-12)
                    assert d_bit(params, q, q) == pytest.approx(0.0, abs=1e-12)

    def test_phase_collapses_without_samples(self):
        params = ProtocolParams(p1=0.2, p2=0.0)
        for qp in (0.0, 0.1, 0.5):
            assert d_phase(params, 0.05, qp) == 0.0

    def test_bit_collapses_without_check_bits(self):
        params = ProtocolParams(p1=0.0, p2=0.3)
        for qp in (0.0, 0.1, 0.5):
            assert d_bit(params, 0.05, qp) == 0.0

    def test_phase_high_precision_point(self):
        got = d_phase(ProtocolParams(0.1, 0.3), 0.05, 0.10)
        assert got == pytest.approx(mp_divergence("phase", 0.1, 0.3, 0.05, 0.10), abs=1e-14)

    def test_bit_high_precision_point(self):
        got = d_bit(ProtocolParams(0.2, 0.5), 0.05, 0.10)
        assert got == pytest.approx(mp_divergence("bit", 0.2, 0.5, 0.05, 0.10), abs=1e-14)

    def test_nonnegative_and_positive_off_diagonal(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            params = ProtocolParams(rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5))
            q, qp = rng.uniform(0.0, 0.5, size=2)
            dp = d_phase(params, q, qp)
            db = d_bit(params, q, qp)
            assert dp >= 0.0 and db >= 0.0
            if abs(q - qp) > 1e-3:
                assert dp > 0.0 and db > 0.0

    def test_convex_in_q_prime(self):
        # midpoint inequality on random triples
        rng = np.random.default_rng(13)
        for _ in range(200):
            params = ProtocolParams(rng.uniform(0.0, 0.5), rng.uniform(0.0, 0.5))
            q = rng.uniform(0.01, 0.5)
            a, b = np.sort(rng.uniform(0.0, 0.5, size=2))
            mid = 0.5 * (a + b)
            for d in (d_phase, d_bit):
                assert d(params, q, mid) <= 0.5 * (
                    d(params, q, a) + d(params, q, b)
                ) + 1e-12

    def test_matches_vectorized(self):
        params = ProtocolParams(0.15, 0.25)
        grid = np.linspace(0.0, 0.5, 101)
        dp = d_phase(params, 0.07, grid)
        db = d_bit(params, 0.07, grid)
        for i, x in enumerate(grid):
            assert dp[i] == pytest.approx(d_phase(params, 0.07, float(x)), abs=1e-15)
            assert db[i] == pytest.approx(d_bit(params, 0.07, float(x)), abs=1e-15)
        np.testing.assert_allclose(dp, divergence_oracle("phase", params, 0.07, grid), atol=1e-13)

    def test_rejects_out_of_range(self):
        params = ProtocolParams(0.1, 0.3)
        with pytest.raises(DomainError):
            d_phase(params, 0.6, 0.1)
        with pytest.raises(DomainError):
            d_bit(params, 0.1, 0.7)


class TestExponentZeroRegion:
    def test_zero_sacrifice(self):
        params = ProtocolParams(0.1, 0.3)
        assert exponent_phase(0.0, params, 0.05) == pytest.approx(0.0, abs=1e-12)
        assert exponent_bit(0.0, params, 0.05) == pytest.approx(0.0, abs=1e-12)

    def test_zero_below_entropy_budget(self):
        params = ProtocolParams(0.1, 0.3)
        from bb84ratio import binary_entropy

        budget = params.raw_key * binary_entropy(0.05)
        assert exponent_phase(0.9 * budget, params, 0.05) == pytest.approx(0.0, abs=1e-12)
        assert exponent_bit(budget, params, 0.05) == pytest.approx(0.0, abs=1e-11)

    def test_bit_without_check_bits(self):
        # no estimation power: exponent stays zero for any S below raw_key
        params = ProtocolParams(0.0, 0.3)
        for S in (0.0, 0.2, 0.9 * params.raw_key):
            assert exponent_bit(S, params, 0.05) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_negative_sacrifice(self):
        params = ProtocolParams(0.1, 0.3)
        with pytest.raises(DomainError):
            exponent_phase(-0.1, params, 0.05)
        with pytest.raises(DomainError):
            exponent_bit(-0.1, params, 0.05)


class TestExponentAgainstBruteForce:
    def test_phase_spec_point(self):
        from bb84ratio import binary_entropy

        params = ProtocolParams(0.1, 0.3)
        S2 = params.raw_key * binary_entropy(0.05) + 0.01
        got = exponent_phase(S2, params, 0.05)
        oracle = brute_force_exponent("phase", params, 0.05, S2)
        assert got > 0.0
        assert got <= oracle + 1e-12
        assert oracle - got <= 1e-6

    def test_bit_spec_point(self):
        from bb84ratio import binary_entropy

        params = ProtocolParams(0.2, 0.1)
        S1 = params.raw_key * binary_entropy(0.03) + 0.005
        got = exponent_bit(S1, params, 0.03)
        oracle = brute_force_exponent("bit", params, 0.03, S1)
        assert got > 0.0
        assert got <= oracle + 1e-12
        assert oracle - got <= 1e-6

    def test_random_draws_match_dense_grid(self):
        # The refined minimum can only undercut the dense grid; the grid
        # itself overshoots kink minima by at most slope * half-cell, which
        # sets the one-sided comparison tolerance.
        rng = np.random.default_rng(20240809)
        for _ in range(50):
            basis = "phase" if rng.random() < 0.5 else "bit"
            params = ProtocolParams(rng.uniform(0.02, 0.5), rng.uniform(0.02, 0.5))
            q = rng.uniform(0.01, 0.12)
            S = rng.uniform(0.0, params.raw_key + 0.2)
            fn = exponent_phase if basis == "phase" else exponent_bit
            got = fn(S, params, q)
            oracle = brute_force_exponent(basis, params, q, S)
            assert got <= oracle + 1e-12
            assert oracle - got <= 1e-6


class TestExponentMonotonicity:
    @pytest.mark.parametrize("basis", ["phase", "bit"])
    def test_nondecreasing_in_sacrifice(self, basis):
        params = ProtocolParams(0.15, 0.2)
        fn = exponent_phase if basis == "phase" else exponent_bit
        values = [fn(S, params, 0.05) for S in np.linspace(0.0, 1.0, 41)]
        assert values[0] == pytest.approx(0.0, abs=1e-12)
        for a, b in zip(values, values[1:]):
            assert b >= a - 1e-12

    def test_cheap_config_still_close(self):
        # grid_points is a knob: a coarse inner grid must stay within its
        # own resolution of the default result
        params = ProtocolParams(0.1, 0.3)
        cheap = ToleranceConfig(grid_points=256)
        S = 0.2
        a = exponent_phase(S, params, 0.05)
        b = exponent_phase(S, params, 0.05, cheap)
        assert b == pytest.approx(a, abs=1e-5)
