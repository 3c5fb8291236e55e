import numpy as np
import pytest

from oracles import binary_typical_count, binary_typical_enumerate
from relay_integrity import (InputError, SamplingError, default_schedule,
                             empirical_pmf, is_typical, max_deviation, sample_typical)
from relay_integrity.typicality import ToleranceSchedule, block_max_deviations


class TestEmpiricalPmf:
    def test_single_sequence_counts(self):
        emp = empirical_pmf([0, 1, 0, 0], 2)
        assert emp.freqs.tolist() == [0.75, 0.25]

    def test_joint_counts(self):
        emp = empirical_pmf(([0, 1], [1, 0]), (2, 2))
        assert emp.freqs[0, 1] == 0.5
        assert emp.freqs[1, 0] == 0.5
        assert emp.freqs[0, 0] == 0.0

    def test_conditional(self):
        emp = empirical_pmf(([0, 1], [1, 0]), (2, 2))
        cond = emp.conditional(0, 1)       # Pt(x | y)
        assert cond[0, 1] == 1.0
        assert cond[1, 0] == 1.0

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            empirical_pmf(([0, 1], [0]), (2, 2))

    def test_marginal_matches_single(self):
        rng = np.random.default_rng(0)
        x = rng.integers(0, 3, 50)
        y = rng.integers(0, 2, 50)
        joint = empirical_pmf((x, y), (3, 2))
        solo = empirical_pmf(x, 3)
        assert np.array_equal(joint.marginal(0).counts, solo.counts)
        assert np.array_equal(joint.marginal(1).counts, empirical_pmf(y, 2).counts)


class TestIsTypical:
    def test_boundary_closed(self):
        x = [0] * 6 + [1] * 4
        assert is_typical(x, np.array([0.5, 0.5]), 0.1)

    def test_just_inside_boundary_fails(self):
        x = [0] * 6 + [1] * 4
        assert not is_typical(x, np.array([0.5, 0.5]), 0.09)

    def test_own_empirical_at_zero(self):
        rng = np.random.default_rng(1)
        x = rng.integers(0, 3, 30)
        ref = empirical_pmf(x, 3).freqs
        assert is_typical(x, ref, 0.0)

    def test_monotone_in_delta(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            x = rng.integers(0, 2, 20)
            ref = np.array([0.5, 0.5])
            deltas = sorted(rng.random(4))
            verdicts = [is_typical(x, ref, d) for d in deltas]
            # once true, stays true
            assert verdicts == sorted(verdicts)

    def test_joint_typicality_is_joint_check(self):
        x = [0, 1, 0, 1]
        y = [0, 1, 0, 1]
        ref = np.array([[0.5, 0.0], [0.0, 0.5]])
        assert is_typical((x, y), ref, 0.0)
        assert not is_typical((x, y), np.full((2, 2), 0.25), 0.2)


class TestSampleTypical:
    def test_point_mass(self):
        rng = np.random.default_rng(0)
        seq = sample_typical(np.array([0.0, 1.0, 0.0]), 12, 0.0, rng)
        assert seq.tolist() == [1] * 12

    def test_membership(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            seq = sample_typical(np.array([0.5, 0.5]), 10, 0.1, rng)
            assert 4 <= seq.sum() <= 6

    def test_sample_within_delta_always(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            p = rng.dirichlet((2, 2, 2))
            seq = sample_typical(p, 30, 0.2, rng)
            assert max_deviation(seq, p) <= 0.2 + 1e-9

    def test_member_count_672(self):
        assert binary_typical_count(0.5, 10, 0.1) == 672
        assert len(binary_typical_enumerate(0.5, 10, 0.1)) == 672

    def test_uniform_over_typical_set(self):
        members = {m: 0 for m in binary_typical_enumerate(0.5, 10, 0.1)}
        rng = np.random.default_rng(7)
        draws = 100_000
        for _ in range(draws):
            members[tuple(sample_typical(np.array([0.5, 0.5]), 10, 0.1, rng))] += 1
        assert len(members) == 672
        expected = draws / 672
        sigma = np.sqrt(draws * (1 / 672) * (1 - 1 / 672))
        worst = max(abs(c - expected) for c in members.values())
        assert worst < 6 * sigma

    def test_impossible_set_raises(self):
        rng = np.random.default_rng(3)
        # n*p = 1.5 for both symbols; delta 0.01 cannot host any integer type
        with pytest.raises(SamplingError):
            sample_typical(np.array([0.5, 0.5]), 3, 0.01, rng, max_attempts=50)


class TestSchedule:
    def test_delta_values(self):
        sched = default_schedule(3, 2, 2)
        assert sched.delta(1000) == pytest.approx(0.1)
        assert sched.delta(10**6) == pytest.approx(0.01)
        assert np.sqrt(10**6) * sched.delta(10**6) == pytest.approx(10.0)

    def test_mu_default_multiplier(self):
        sched = default_schedule(3, 2, 2)
        assert sched.mu(1000) == pytest.approx(1.2)

    def test_delta_convention_spot_checks(self):
        sched = default_schedule(3, 2, 2)
        ns = [10**2, 10**4, 10**6]
        deltas = [sched.delta(n) for n in ns]
        assert deltas == sorted(deltas, reverse=True)
        growth = [np.sqrt(n) * sched.delta(n) for n in ns]
        assert growth == sorted(growth)

    def test_nu_at_least_mu(self):
        for kt in (0.0, 0.5, 1.0, 2.0):
            sched = default_schedule(3, 2, 2, ktilde=kt)
            for n in (10, 100, 1000, 10**6):
                assert sched.nu(n) >= sched.mu(n)

    def test_override_multiplier(self):
        sched = default_schedule(3, 2, 2, mu_multiplier=0.2)
        assert sched.mu(1000) == pytest.approx(0.02)

    def test_auxiliary_multiples(self):
        sched = default_schedule(3, 2, 2)
        n = 500
        assert sched.mu_prime(n) == pytest.approx(2 * sched.mu(n))
        assert sched.mu_double_prime(n) == pytest.approx(3 * sched.mu(n))
        assert sched.mu_tilde(n) == pytest.approx(2 * sched.mu(n))
        assert sched.mu_hat(n) == pytest.approx(2 * sched.mu(n))

    def test_invalid_parameters(self):
        with pytest.raises(InputError):
            ToleranceSchedule(mu_multiplier=-1.0)
        with pytest.raises(InputError):
            ToleranceSchedule(mu_multiplier=1.0, delta_exponent=0.6)


class TestBlockDeviations:
    def test_matches_max_deviation(self):
        rng = np.random.default_rng(11)
        n = 24
        v = rng.integers(0, 3, n)
        own = rng.integers(0, 2, n)
        ref = rng.dirichlet(np.ones(12)).reshape(3, 2, 2)
        cands = rng.integers(0, 2, (16, n))
        cls = v * 2 + own
        devs = block_max_deviations(cls, cands, 2, ref.reshape(-1), n)
        for i in range(16):
            expected = max_deviation((v, own, cands[i]), ref)
            assert devs[i] == pytest.approx(expected, abs=1e-12)
