import numpy as np
import pytest

from bb84ratio import (
    DomainError,
    ProtocolParams,
    binary_entropy,
    cross_check,
    d_bit,
    d_phase,
    exponent_bit,
    exponent_phase,
    q_prime_one,
    q_prime_two,
    s_by_inversion,
    s_closed,
)

PHASE_POINT = (ProtocolParams(0.1, 0.3), 0.05)
BIT_POINT = (ProtocolParams(0.25, 0.5), 0.05)


class TestQPrimeOne:
    def test_zero_constraint_returns_observed_rate(self):
        params, q = PHASE_POINT
        assert q_prime_one("phase", params, q, 0.0) == q

    def test_absent_when_divergence_saturates(self):
        params, q = BIT_POINT
        ceiling = d_bit(params, q, 0.5)
        assert q_prime_one("bit", params, q, 2.0 * ceiling) is None

    @pytest.mark.parametrize("basis,point", [("phase", PHASE_POINT), ("bit", BIT_POINT)])
    def test_self_consistency(self, basis, point):
        params, q = point
        C = 1e-4
        root = q_prime_one(basis, params, q, C)
        dfun = d_phase if basis == "phase" else d_bit
        assert q <= root <= 0.5
        assert dfun(params, q, root) == pytest.approx(C, abs=1e-10)


class TestQPrimeTwo:
    def test_substitution_residual_phase(self):
        params, q = PHASE_POINT
        root = q_prime_two("phase", params, q)
        s, w = params.phase_sample, params.raw_key
        odds = (s * q + w * root) / (s * (1 - q) + w * (1 - root))
        assert (root / (1 - root)) ** 2 - odds == pytest.approx(0.0, abs=1e-10)

    def test_substitution_residual_bit(self):
        params, q = BIT_POINT
        root = q_prime_two("bit", params, q)
        p1 = params.p1
        odds = (p1 * q + (1 - p1) * root) / (p1 * (1 - q) + (1 - p1) * (1 - root))
        assert (root / (1 - root)) ** 2 - odds == pytest.approx(0.0, abs=1e-10)

    def test_high_error_limit(self):
        # both sides of the balance approach 1, pushing the root toward 1/2
        params = ProtocolParams(0.25, 0.3)
        root = q_prime_two("bit", params, 0.49)
        assert 0.49 < root <= 0.5

    def test_requires_interior_q(self):
        with pytest.raises(DomainError):
            q_prime_two("bit", ProtocolParams(0.25, 0.3), 0.0)


class TestClosedForm:
    def test_zero_constraint(self):
        params, q = PHASE_POINT
        result = s_closed("phase", params, q, 0.0)
        assert result.branch == "interior"
        assert result.S == pytest.approx(params.raw_key * binary_entropy(q), abs=1e-12)

    @pytest.mark.parametrize(
        "basis,params,q",
        [
            ("phase", *PHASE_POINT),
            ("bit", *BIT_POINT),
        ],
    )
    def test_interior_branch_matches_inversion(self, basis, params, q):
        closed = s_closed(basis, params, q, 1e-4)
        inv = s_by_inversion(basis, params, q, 1e-4)
        assert closed.branch == "interior"
        assert abs(closed.S - inv.S) <= 1e-6

    def test_stationary_branch_recorded(self):
        # large constraint pushes the crossing root beyond the stationary one
        params, q = BIT_POINT
        result = s_closed("bit", params, q, 0.03)
        assert result.branch == "stationary"
        assert result.q1 is not None and result.q2 is not None
        assert result.q1 > result.q2
        assert result.S == pytest.approx(d_bit(params, q, result.q2) + 0.03, abs=1e-12)

    def test_saturated_branch_delegates(self):
        params, q = BIT_POINT
        result = s_closed("bit", params, q, 0.3)
        assert result.branch == "saturated"
        assert result.q1 is None
        inv = s_by_inversion("bit", params, q, 0.3)
        assert result.S == inv.S


class TestInversion:
    def test_residual_within_tolerance_on_random_draws(self):
        rng = np.random.default_rng(99)
        for _ in range(20):
            basis = "phase" if rng.random() < 0.5 else "bit"
            params = ProtocolParams(rng.uniform(0.02, 0.5), rng.uniform(0.02, 0.5))
            q = rng.uniform(0.01, 0.12)
            C = 10 ** rng.uniform(-5, -3)
            result = s_by_inversion(basis, params, q, C)
            fn = exponent_phase if basis == "phase" else exponent_bit
            assert fn(result.S, params, q) == pytest.approx(C, abs=1e-9)
            assert result.residual is not None and result.residual <= 1e-9

    def test_zero_constraint_boundary(self):
        params, q = PHASE_POINT
        result = s_by_inversion("phase", params, q, 0.0)
        assert result.S == pytest.approx(params.raw_key * binary_entropy(q), abs=1e-12)

    def test_no_check_bits_full_sacrifice(self):
        # with no estimation power the exponent is [S - raw_key]_+, so the
        # constraint costs the whole raw key plus the constraint itself
        params = ProtocolParams(0.0, 0.3)
        for C in (1e-4, 1e-2):
            result = s_by_inversion("bit", params, 0.05, C)
            assert result.S == pytest.approx(params.raw_key + C, abs=1e-10)
        result = s_by_inversion("bit", params, 0.05, 0.0)
        assert result.S == pytest.approx(params.raw_key, abs=1e-12)

    def test_monotone_in_constraint(self):
        params, q = PHASE_POINT
        values = [
            s_by_inversion("phase", params, q, C).S
            for C in (0.0, 1e-5, 1e-4, 1e-3, 1e-2, 0.1)
        ]
        floor = params.raw_key * binary_entropy(q)
        assert all(v >= floor - 1e-12 for v in values)
        for a, b in zip(values, values[1:]):
            assert b >= a - 1e-12

    def test_branch_labels_cover_all_three(self):
        params, q = BIT_POINT
        branches = {
            s_by_inversion("bit", params, q, C).branch for C in (1e-4, 0.03, 0.3)
        }
        assert branches == {"interior", "stationary", "saturated"}

    def test_deterministic(self):
        params, q = PHASE_POINT
        a = s_by_inversion("phase", params, q, 3e-4)
        b = s_by_inversion("phase", ProtocolParams(0.1, 0.3), q, 3e-4)
        assert a.S == b.S and a.branch == b.branch


class TestCrossCheck:
    def test_zero_constraint_agreement(self):
        params, q = PHASE_POINT
        report = cross_check("phase", params, q, 0.0)
        assert report.discrepancy <= 1e-9
        assert report.error is None

    def test_interior_agreement(self):
        for basis, (params, q) in (("phase", PHASE_POINT), ("bit", BIT_POINT)):
            report = cross_check(basis, params, q, 1e-4)
            assert report.branch_closed == "interior"
            assert report.discrepancy <= 1e-6

    def test_stationary_discrepancy_surfaced_not_asserted(self):
        # the closed-form stationary value is known to disagree with the
        # direct inversion; the report must carry the gap, whatever it is
        params, q = BIT_POINT
        report = cross_check("bit", params, q, 0.03)
        assert report.branch_closed == "stationary"
        assert report.branch_inversion == "stationary"
        assert report.discrepancy is not None and np.isfinite(report.discrepancy)
        assert report.residual_inversion <= 1e-9

    def test_never_raises_on_bad_regime(self):
        report = cross_check("bit", ProtocolParams(0.0, 0.3), 0.05, 1e-4)
        assert report.s_inversion is not None
