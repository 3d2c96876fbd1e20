"""Cycle censuses and the Poisson-limit constants."""

import math

import numpy as np
import pytest

from occuthresh.errors import ContractViolation, ParameterError
from occuthresh.instances import (
    Configuration,
    Params,
    child_seed,
    count_two_cycles,
    sample_configuration,
)
from occuthresh.cycles import (
    census_samples,
    count_cycles,
    delta_l,
    lambda_l,
    markov_trace_delta,
    mu_l,
    pair_correlation,
    poisson_gof,
)


def identity_config() -> Configuration:
    return Configuration(Params(n=4, d=2, k=4, r=2), np.arange(8))


def ring_config() -> Configuration:
    """Eight variables and eight binary constraints wired into a single ring."""
    p = Params(n=8, d=2, k=2, r=1)
    wiring = np.empty(16, dtype=np.int64)
    for i in range(8):
        wiring[2 * i] = 2 * i  # variable i -> constraint i, slot 0
        wiring[2 * i + 1] = 2 * ((i - 1) % 8) + 1  # variable i -> constraint i-1, slot 1
    return Configuration(p, wiring)


class TestCensus:
    def test_identity_two_cycles(self):
        census = count_cycles(identity_config(), 2)
        assert census.count(1) == 4 == count_two_cycles(identity_config())
        assert census.count(2) == 0

    def test_single_long_ring(self):
        census = count_cycles(ring_config(), 8, method="walk")
        assert census.counts == (0, 0, 0, 0, 0, 0, 0, 1)

    def test_methods_agree(self):
        for i, (n, d, k) in enumerate([(8, 2, 4), (12, 3, 4), (20, 3, 5), (30, 2, 3)]):
            for t in range(4):
                cfg = sample_configuration(Params(n=n, d=d, k=k, r=1), child_seed(120 + i, t))
                walk = count_cycles(cfg, 2, method="walk").counts
                pairs = count_cycles(cfg, 2, method="pairs").counts
                assert walk == pairs

    def test_pairs_capped_at_two(self):
        with pytest.raises(ParameterError):
            count_cycles(identity_config(), 3, method="pairs")

    def test_l_max_validated(self):
        with pytest.raises(ParameterError):
            count_cycles(identity_config(), 0)

    def test_census_invariant_under_relabeling(self):
        p = Params(n=12, d=3, k=4, r=2)
        rng = np.random.default_rng(5)
        for t in range(4):
            cfg = sample_configuration(p, child_seed(33, t))
            base = count_cycles(cfg, 3, method="walk").counts

            con_perm = rng.permutation(p.m)
            relabeled = np.empty_like(cfg.wiring)
            for s, f in enumerate(cfg.wiring):
                a, h = divmod(int(f), p.k)
                relabeled[s] = con_perm[a] * p.k + h
            assert count_cycles(Configuration(p, relabeled), 3, method="walk").counts == base

            var = int(rng.integers(p.n))
            swapped = cfg.wiring.copy()
            swapped[[var * p.d, var * p.d + 1]] = swapped[[var * p.d + 1, var * p.d]]
            assert count_cycles(Configuration(p, swapped), 3, method="walk").counts == base

    def test_mean_x2_matches_lambda(self, census_10k):
        x2 = np.array([c.count(2) for c in census_10k], dtype=float)
        lam = lambda_l(2, 4, 3)
        assert lam == 9.0
        assert abs(x2.mean() - lam) <= 3 * math.sqrt(lam / x2.size)


class TestConstants:
    def test_lambda_examples(self):
        assert lambda_l(1, 4, 3) == 3.0
        assert lambda_l(2, 4, 3) == 9.0
        assert lambda_l(1, 4, 2) == 1.5

    def test_delta_examples(self):
        assert delta_l(1, 4) == -1.0 / 3.0
        assert delta_l(2, 4) == 1.0 / 9.0

    def test_delta_above_minus_one(self):
        for k in range(4, 13):
            for l in range(1, 12):
                assert delta_l(l, k) > -1.0

    def test_mu_examples(self):
        assert mu_l(1, 4, 3) == pytest.approx(2.0, rel=1e-14)
        assert mu_l(1, 4, 2) == pytest.approx(1.0, rel=1e-14)
        assert mu_l(2, 4, 3) == pytest.approx(10.0, rel=1e-14)

    def test_markov_trace_matches_closed_form(self):
        assert markov_trace_delta(1, 4) == pytest.approx(-1.0 / 3.0, abs=1e-14)
        assert markov_trace_delta(3, 4) == pytest.approx(-1.0 / 27.0, abs=1e-14)
        for k in range(4, 13):
            for l in range(1, 11):
                assert markov_trace_delta(l, k) == pytest.approx(delta_l(l, k), abs=1e-12)

    def test_second_power_identity(self):
        for k in range(4, 13):
            assert abs(markov_trace_delta(2, k) - delta_l(2, k)) < 1e-14


class TestPoissonGof:
    def test_needs_two_samples(self):
        with pytest.raises(ContractViolation):
            poisson_gof([count_cycles(identity_config(), 1)], 4, 2)

    def test_fixture_statistics(self, census_10k):
        rows = poisson_gof(census_10k, 4, 3)
        by_l = {row.l: row for row in rows}
        n = len(census_10k)

        assert abs(by_l[1].empirical_mean - 3.0) <= 3 * math.sqrt(3.0 / n)
        assert abs(by_l[2].empirical_mean - 9.0) <= 3 * math.sqrt(9.0 / n)
        assert abs(by_l[1].empirical_var - 3.0) <= 0.1 * 3.0
        assert abs(by_l[1].z_score) <= 3.0
        for row in rows:
            assert row.chi2 >= 0.0
            assert row.dof >= 1

    def test_asymptotic_independence(self, census_10k):
        assert abs(pair_correlation(census_10k, 1, 2)) <= 0.05


class TestCensusSampling:
    def test_deterministic_and_thread_invariant(self):
        a = census_samples(k=4, d=3, n=60, samples=50, seed=3, l_max=2, threads=1)
        b = census_samples(k=4, d=3, n=60, samples=50, seed=3, l_max=2, threads=3)
        assert [c.counts for c in a] == [c.counts for c in b]

    def test_sample_count_validated(self):
        with pytest.raises(ParameterError):
            census_samples(k=4, d=3, n=60, samples=0, seed=3)
