from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from markov_embedding import (bernoulli, count_distribution, count_distribution_bruteforce,
                              kolmogorov_to_gaussian, limit_diagnose, moments,
                              monte_carlo_counts, pattern_chain, FunctionSource, iid)
from markov_embedding.analysis import CountDistribution, normal_cdf, total_variation
from markov_embedding.errors import InputError, ResourceError

from conftest import binomial_pmf, make_sources


def test_iid_11_small_case(sources):
    chain = pattern_chain(sources["iid_1/2"], "11", 3)
    assert count_distribution(chain, 3).pmf == {0: F(5, 8), 1: F(1, 4), 2: F(1, 8)}


def test_decay_small_case(sources):
    chain = pattern_chain(sources["decay"], "1", 2)
    assert count_distribution(chain, 2).pmf == {0: F(3, 8), 1: F(1, 2), 2: F(1, 8)}


@pytest.mark.parametrize("p", [F(1, 2), F(3, 10), F(5, 7)])
def test_single_symbol_is_binomial(p):
    chain = pattern_chain(bernoulli(p), "1", 30)
    for n in (1, 7, 30):
        assert count_distribution(chain, n).pmf == {k: v for k, v in binomial_pmf(n, p).items() if v}


def test_urn_single_symbol_is_uniform(sources):
    # Pólya (1,1): the number of ones after n draws is uniform on 0..n
    chain = pattern_chain(sources["urn_1_1"], "1", 9)
    assert count_distribution(chain, 9).pmf == {k: F(1, 10) for k in range(10)}


def test_float_mode_matches_exact(B):
    exact = pattern_chain(iid(B, [F(7, 10), F(3, 10)]), "1(0|1)1", 20)
    approx = pattern_chain(iid(B, [0.7, 0.3]), "1(0|1)1", 20)
    a = count_distribution(exact, 20)
    b = count_distribution(approx, 20)
    assert not b.exact
    for k in range(21):
        assert float(a[k]) == pytest.approx(b[k], abs=1e-12)


def test_tail_cap_lumps_upper_counts(sources):
    chain = pattern_chain(sources["iid_1/2"], "1", 10)
    d = count_distribution(chain, 10, cap=3)
    assert d[3] == sum(binomial_pmf(10, F(1, 2))[k] for k in range(3, 11))
    assert sum(d.pmf.values()) == 1


def test_horizon_is_enforced(sources):
    chain = pattern_chain(sources["urn_1_1"], "11", 5)
    with pytest.raises(InputError, match="horizon 5"):
        count_distribution(chain, 6)


def test_lattice_cap(sources):
    chain = pattern_chain(sources["iid_1/2"], "11", 5)
    with pytest.raises(ResourceError):
        count_distribution(chain, 1000, lattice_cap=100)


def test_bruteforce_cap(sources):
    with pytest.raises(ResourceError, match="enumeration cap"):
        count_distribution_bruteforce(sources["iid_1/2"], "1", 25)


def test_general_source_uses_refinement_fallback(B):
    # a history-dependent source with no declared state: P(1) depends on
    # whether the prefix so far contains "11"
    def cond(w):
        seen = any(w[i] == w[i + 1] == 1 for i in range(len(w) - 1))
        return (F(1, 3), F(2, 3)) if seen else (F(1, 2), F(1, 2))

    src = FunctionSource(B, cond)
    chain = pattern_chain(src, "10", 6)
    for n in range(2, 7):
        assert count_distribution(chain, n).pmf == count_distribution_bruteforce(src, "10", n).pmf


def test_moments_exact():
    d = CountDistribution(3, {0: F(5, 8), 1: F(1, 4), 2: F(1, 8)})
    mean, var, skew = moments(d)
    assert mean == F(1, 2)
    assert var == F(1, 2)
    assert skew == pytest.approx((F(5, 8) * F(-1, 2) ** 3 + F(1, 4) * F(1, 2) ** 3
                                  + F(1, 8) * F(3, 2) ** 3) / F(1, 2) ** F(3, 2), rel=1e-12)


def test_normal_cdf_reference_values():
    assert normal_cdf(0) == 0.5
    assert normal_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-15)
    assert normal_cdf(-8) == pytest.approx(6.22096057427178e-16, rel=1e-12)


def test_kolmogorov_of_symmetric_bernoulli():
    d = CountDistribution(1, {0: F(1, 2), 1: F(1, 2)})
    # mean 1/2, sd 1/2: F(0) = 1/2 vs Phi(0) = 1/2; F(-1) = 0 vs Phi(-2)
    expected = normal_cdf(-2)
    assert kolmogorov_to_gaussian(d) == pytest.approx(expected, abs=1e-15)


def test_kolmogorov_degenerate_refused():
    with pytest.raises(InputError):
        kolmogorov_to_gaussian(CountDistribution(3, {0: F(1)}))


def test_total_variation():
    a = CountDistribution(2, {0: F(1, 2), 1: F(1, 2)})
    b = CountDistribution(2, {1: F(1, 2), 2: F(1, 2)})
    assert total_variation(a, b) == 0.5
    assert total_variation(a, a) == 0


def test_iid_11_diagnostics(sources):
    diag = limit_diagnose(sources["iid_1/2"], "11", [25, 100, 400])
    assert diag.mean == [F(24, 4), F(99, 4), F(399, 4)]
    assert diag.verdict == "gaussian_like"
    ks = diag.kolmogorov
    assert ks[0] > ks[1] > ks[2] and ks[2] < 0.05


def test_decay_diagnostics(sources):
    diag = limit_diagnose(sources["decay"], "1", [10, 20, 40])
    assert diag.verdict == "discrete_like"
    assert diag.tv_to_previous[0] is None
    assert diag.tv_to_previous[-1] < 1e-3


def test_deterministic_count_is_inconclusive(B):
    from markov_embedding import deterministic
    diag = limit_diagnose(deterministic(B, "1"), "1", [5, 10, 20])
    assert diag.kolmogorov == [None, None, None]
    assert diag.verdict == "inconclusive"


def test_grid_validation(sources):
    with pytest.raises(InputError):
        limit_diagnose(sources["iid_1/2"], "1", [10, 20])
    with pytest.raises(InputError):
        limit_diagnose(sources["iid_1/2"], "1", [10, 10, 20])


def test_monte_carlo_reproducible(sources):
    a = monte_carlo_counts(sources["iid_1/2"], "11", 5, 2000, seed=11)
    b = monte_carlo_counts(sources["iid_1/2"], "11", 5, 2000, seed=11)
    assert a == b
    assert sum(a.values()) == 1
    assert list(a) == sorted(a)


@settings(max_examples=25, deadline=None)
@given(num=st.integers(1, 19), pattern=st.sampled_from(["11", "10|01", "1(0|1)1", "(00)*01", "0+1"]),
       n=st.integers(1, 10))
def test_dp_equals_bruteforce_random_iid(num, pattern, n):
    src = bernoulli(F(num, 20))
    chain = pattern_chain(src, pattern, n)
    assert count_distribution(chain, n).pmf == count_distribution_bruteforce(src, pattern, n).pmf


@pytest.mark.parametrize("name", sorted(make_sources()))
def test_mean_of_11_from_pairs(name):
    # E[K_n] for "11" is the sum of P(X_i = X_{i+1} = 1)
    src = make_sources()[name]
    from markov_embedding import prefix_probability
    from conftest import all_words
    n = 7
    chain = pattern_chain(src, "11", n)
    mean, _, _ = moments(count_distribution(chain, n))
    direct = sum(prefix_probability(src, w) * sum(w[i] & w[i + 1] for i in range(n - 1))
                 for w in all_words(n))
    assert mean == direct
