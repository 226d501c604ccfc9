import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tauberlab.semigroup import (
    ElementTable,
    build_elements,
    build_primes,
    build_semigroup,
    convolution_identity_check,
    count_M,
    count_N,
    count_pi,
    count_psi,
    fit_density,
    sieve_primes,
)


def trial_division_primes(n):
    return [k for k in range(2, n + 1) if all(k % d for d in range(2, math.isqrt(k) + 1))]


def mobius_sieve(n):
    mu = np.ones(n + 1, dtype=int)
    is_p = np.ones(n + 1, dtype=bool)
    for p in range(2, n + 1):
        if is_p[p]:
            is_p[2 * p :: p] = False
            mu[p::p] *= -1
            mu[p * p :: p * p] = 0
    return mu


def recount(norms, x):
    # independent recursive count of products of the given norms
    norms = sorted(norms)

    def go(start, m):
        total = 1
        for j in range(start, len(norms)):
            if m * norms[j] > x:
                break
            total += go(j, m * norms[j])
        return total

    return go(0, 1.0)


class TestPrimes:
    def test_classical_small(self):
        assert list(build_primes("classical", 10).norms) == [2, 3, 5, 7]

    def test_explicit(self):
        ps = build_primes("explicit", norms=[3, 2])
        assert list(ps.norms) == [2, 3] and ps.q_max == math.inf

    def test_classical_count_matches_trial_division(self):
        assert list(sieve_primes(2000)) == trial_division_primes(2000)
        assert len(build_primes("classical", 1e6)) == 78498

    def test_rejects_small_q_max(self):
        with pytest.raises(ValueError):
            build_primes("classical", 1.5)
        with pytest.raises(ValueError):
            build_primes("nonsense", 10)

    def test_gaussian_norms(self):
        ps = build_primes("gaussian", 30)
        assert list(ps.norms) == [2, 5, 5, 9, 13, 13, 17, 17, 29, 29]

    def test_beurling_deterministic(self):
        a = build_primes("beurling", 1e4, gamma=2.5, seed=3)
        b = build_primes("beurling", 1e4, gamma=2.5, seed=3)
        c = build_primes("beurling", 1e4, gamma=2.5, seed=4)
        assert np.array_equal(a.norms, b.norms)
        assert not np.array_equal(a.norms, c.norms)
        assert np.all(np.diff(a.norms) >= 0) and a.norms[0] > 1

    def test_config_mapping(self):
        ps = build_primes({"generator": "classical", "q_max": 20, "x_max": 20})
        assert len(ps) == 8


class TestElements:
    def test_toy_table(self):
        t = build_elements(build_primes("explicit", norms=[2, 3]), 10)
        assert list(t.norms) == [1, 2, 3, 4, 6, 8, 9]
        assert list(t.mu) == [1, -1, -1, 0, 1, 0, 0]
        assert t.signature(4) == ((0, 1), (1, 1))
        assert t.signature(0) == ()

    def test_identity_only_at_one(self):
        t = build_elements(build_primes("explicit", norms=[2, 3]), 1)
        assert len(t) == 1 and t.mu[0] == 1 and t.lam[0] == 0

    def test_classical_bijection(self, classical_1e4):
        assert np.array_equal(classical_1e4.norms, np.arange(1, 10001))

    def test_incomplete_primes_rejected(self):
        with pytest.raises(ValueError):
            build_elements(build_primes("classical", 100), 1000)

    def test_record_cap(self):
        with pytest.raises(MemoryError):
            build_elements(build_primes("classical", 1e4), 1e4, record_cap=500)

    def test_record_invariants(self, classical_1e4, toy23):
        for t in (classical_1e4, toy23):
            qs = t.primes.norms
            for i in range(len(t)):
                sig = t.signature(i)
                norm = math.prod(qs[j] ** e for j, e in sig)
                assert norm == pytest.approx(t.norms[i], rel=1e-9)
                assert t.omega[i] == len(sig) and t.bigomega[i] == sum(e for _, e in sig)
                squarefree = all(e == 1 for _, e in sig)
                assert t.mu[i] == ((-1) ** len(sig) if squarefree else 0)
                assert t.lam[i] == (math.log(qs[sig[0][0]]) if len(sig) == 1 else 0.0)

    def test_gaussian_ties_ordered_by_signature(self):
        t = build_semigroup({"generator": "gaussian", "x_max": 2000})
        same = np.flatnonzero(np.diff(t.norms) == 0)
        assert same.size > 0
        for i in same:
            assert t.signature(int(i)) < t.signature(int(i) + 1)

    def test_completeness_random_instances(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            norms = sorted(rng.uniform(1.2, 60, int(rng.integers(1, 12))))
            x_max = float(rng.uniform(10, 1000))
            t = build_elements(build_primes("explicit", norms=norms), x_max)
            assert len(t) == recount(norms, x_max)
            for x in rng.uniform(1, x_max, 5):
                assert t.N(x) == recount(norms, x)


class TestCounts:
    def test_toy(self):
        t = build_elements(build_primes("explicit", norms=[2, 3]), 10)
        assert count_N(t, 10) == 7 and count_N(t, 1) == 1
        assert count_pi(t, 10) == 2
        assert count_psi(t, 10) == pytest.approx(3 * math.log(2) + 2 * math.log(3))
        assert count_psi(t, 1) == 0
        assert count_M(t, 10) == 0 and count_M(t, 1) == 1

    def test_rejects_beyond_table(self, toy23):
        with pytest.raises(ValueError):
            count_N(toy23, 2e4)

    def test_classical_values(self, classical_1e6):
        assert count_N(classical_1e6, 1e6) == 10**6
        assert count_pi(classical_1e6, 1e6) == 78498
        assert count_pi(classical_1e6, 2) == 1
        assert count_M(classical_1e6, 10) == -1

    def test_classical_psi_oracle(self, classical_1e6):
        oracle = 0.0
        for p in trial_division_primes(100):
            pk = p
            while pk <= 100:
                oracle += math.log(p)
                pk *= p
        assert abs(count_psi(classical_1e6, 100) - oracle) < 1e-9

    def test_mertens_oracle(self, classical_1e6):
        mu = mobius_sieve(10**4)
        assert count_M(classical_1e6, 1e4) == int(mu[1:].sum())
        assert np.array_equal(classical_1e6.mu[:10**4], mu[1:])

    def test_monotone_and_mertens_increment(self, classical_1e6, beurling_1e6):
        xs = np.geomspace(1, 1e6, 400)
        for t in (classical_1e6, beurling_1e6):
            N, pi, psi, M = t.N_many(xs), t.pi_many(xs), t.psi_many(xs), t.M_many(xs)
            for arr in (N, pi, psi):
                assert np.all(np.diff(arr) >= 0)
            assert np.all(np.abs(np.diff(M)) <= np.diff(N))
            assert np.all(np.abs(M) <= N)


class TestIdentities:
    @pytest.mark.parametrize("which", ["lambda_log", "mu_unit"])
    def test_tables(self, which, classical_1e4, toy23):
        for t in (classical_1e4, toy23):
            rep = convolution_identity_check(t, which)
            assert rep.lhs < 1e-9 and not rep.violated()

    def test_beurling_table(self):
        t = build_semigroup({"generator": "beurling", "gamma": 2.5, "seed": 0, "x_max": 3000})
        for which in ("lambda_log", "mu_unit"):
            assert convolution_identity_check(t, which).lhs < 1e-9

    def test_rejects_unknown(self, toy23):
        with pytest.raises(ValueError):
            convolution_identity_check(toy23, "phi")


class TestDensityFit:
    def test_classical_degenerate(self, classical_1e6):
        fit = fit_density(classical_1e6, A_hint=1.0)
        assert fit.flag.startswith("degenerate") and fit.gamma == math.inf
        assert fit.residual <= 1
        assert fit_density(classical_1e6).A == pytest.approx(1.0)

    def test_zero_density(self, toy23):
        fit = fit_density(toy23)
        assert fit.flag.startswith("zero-density") and fit.A == 0

    def test_beurling_gamma(self, beurling_1e6):
        fit = fit_density(beurling_1e6)
        assert not fit.flag
        assert abs(fit.gamma - 2.5) <= 0.5

    def test_gaussian_density(self):
        fit = fit_density(build_semigroup({"generator": "gaussian", "x_max": 1e5}))
        assert fit.A == pytest.approx(math.pi / 4, rel=1e-3)

    def test_requires_large_table(self):
        t = build_elements(build_primes("classical", 500), 500)
        with pytest.raises(ValueError):
            fit_density(t)


def test_csv_export():
    t = build_elements(build_primes("explicit", norms=[2, 3]), 4)
    assert t.to_csv() == "norm,omega,bigomega,lambda,mu\n1,0,0,0,1\n2,1,1,0.69314718055994529,-1\n3,1,1,1.0986122886681098,-1\n4,1,2,0.69314718055994529,0\n"


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(1.1, 40), min_size=0, max_size=8), st.floats(1, 400))
def test_completeness_property(norms, x_max):
    t = build_elements(build_primes("explicit", norms=norms), x_max)
    assert len(t) == recount(norms, x_max)
    assert np.all(np.diff(t.norms) >= 0)
    assert t.norms[0] == 1
