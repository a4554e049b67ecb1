"""Exact laws of pattern-occurrence counts and their asymptotic shape."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from .automata import MatchingAutomaton, count_occurrences, matching_automaton
from .chain import FLOAT_TOL, MarkovChain
from .embedding import (automaton_state, canonical_embedding_RX, coarsest_markov_refinement,
                        induced_chain)
from .errors import InputError, ResourceError
from .source import Source, StateSource, SymbolSampler

__all__ = ["MarkovChain", "CountDistribution", "LimitDiagnostics", "count_distribution",
           "count_distribution_bruteforce", "moments", "kolmogorov_to_gaussian",
           "limit_diagnose", "monte_carlo_counts", "pattern_chain", "total_variation"]

# Verdict thresholds for limit_diagnose.
KOLMOGOROV_THRESHOLD = 0.05
TV_THRESHOLD = 1e-3
VARIANCE_GROWTH_THRESHOLD = 0.10

DEFAULT_LATTICE_CAP = 50_000_000
DEFAULT_BRUTEFORCE_CAP = 1 << 20


@dataclass
class CountDistribution:
    n: int
    pmf: dict
    tail_cap: int | None = None  # when set, pmf[tail_cap] is P(K >= tail_cap)

    def __post_init__(self):
        if any(p < 0 for p in self.pmf.values()):
            raise InputError("negative probability in count distribution")
        if any(not 0 <= k <= self.n for k in self.pmf):
            raise InputError(f"count outside 0..{self.n}")
        total = sum(self.pmf.values())
        if self.exact:
            if total != 1:
                raise InputError(f"count distribution sums to {total}")
        elif abs(float(total) - 1) > FLOAT_TOL:
            raise InputError(f"count distribution sums to {total}")

    @property
    def exact(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.pmf.values())

    def __getitem__(self, k):
        return self.pmf.get(k, 0)

    def support(self) -> list[int]:
        return sorted(k for k, p in self.pmf.items() if p > 0)

    def as_float(self) -> np.ndarray:
        out = np.zeros(self.n + 1)
        for k, p in self.pmf.items():
            out[k] = float(p)
        return out


def _trim(pmf: dict) -> dict:
    return {k: p for k, p in sorted(pmf.items()) if p != 0}


def count_distribution(chain: MarkovChain, n: int, cap: int | None = None,
                       lattice_cap: int = DEFAULT_LATTICE_CAP) -> CountDistribution:
    """Law of K_n by dynamic programming over (state, count).

    In exact mode all probabilities are scaled to a common denominator d so
    the recursion runs on integers; mass after t steps is N_t / d**t.
    """
    if n < 1:
        raise InputError("count_distribution needs n >= 1")
    if chain.horizon is not None and n > chain.horizon:
        raise InputError(f"chain is certified to horizon {chain.horizon} only; got n={n}")
    width = n + 1 if cap is None else min(n, cap) + 1
    if chain.n_states * width > lattice_cap:
        raise ResourceError(f"count lattice of {chain.n_states}x{width} exceeds cap {lattice_cap}")
    top = width - 1

    if chain.exact:
        d = lcm(*[p.denominator for p in chain.initial],
                *[p.denominator for out in chain.edges for _, p, _ in out])
        init = [int(p * d) for p in chain.initial]
        edges = [[(j, int(p * d)) for j, p, _ in out] for out in chain.edges]
        cur = [[0] * width for _ in chain.states]
        for i, w in enumerate(init):
            if w:
                cur[i][min(chain.reward[i], top)] += w
        for _ in range(n - 1):
            nxt = [[0] * width for _ in chain.states]
            for i, row in enumerate(cur):
                if not any(row):
                    continue
                for j, w in edges[i]:
                    inc = chain.reward[j]
                    dst = nxt[j]
                    if inc:
                        for k in range(width - 1):
                            if row[k]:
                                dst[k + 1] += row[k] * w
                        if row[top]:
                            dst[top] += row[top] * w
                    else:
                        for k in range(width):
                            if row[k]:
                                dst[k] += row[k] * w
            cur = nxt
        scale = d ** n
        totals = [sum(cur[i][k] for i in range(chain.n_states)) for k in range(width)]
        pmf = {k: Fraction(v, scale) for k, v in enumerate(totals) if v}
        return CountDistribution(n, pmf, tail_cap=cap)

    reward = np.array(chain.reward, dtype=bool)
    cur = np.zeros((chain.n_states, width))
    for i, p in enumerate(chain.initial):
        cur[i, min(chain.reward[i], top)] += float(p)
    for _ in range(n - 1):
        nxt = np.zeros_like(cur)
        shifted = np.zeros_like(cur)
        shifted[:, 1:] = cur[:, :-1]
        shifted[:, top] += cur[:, top]
        for i, out in enumerate(chain.edges):
            for j, p, _ in out:
                nxt[j] += float(p) * (shifted[i] if reward[j] else cur[i])
        cur = nxt
    totals = cur.sum(axis=0)
    pmf = {k: float(v) for k, v in enumerate(totals) if v != 0}
    return CountDistribution(n, pmf, tail_cap=cap)


def count_distribution_bruteforce(source: Source, pattern, n: int,
                                  cap: int = DEFAULT_BRUTEFORCE_CAP) -> CountDistribution:
    """Enumerate every length-n word; the independent oracle for the DP."""
    if n < 1:
        raise InputError("count_distribution_bruteforce needs n >= 1")
    A = source.alphabet.size
    if A ** n > cap:
        raise ResourceError(f"{A}^{n} words exceeds the enumeration cap of {cap}")
    ma = pattern if isinstance(pattern, MatchingAutomaton) else \
        matching_automaton(pattern, source.alphabet)
    pmf: dict = {}
    # Depth-first walk sharing prefix products; words are still scored one by one.
    stateful = isinstance(source, StateSource)

    def walk(word, p, state):
        if p == 0:
            return
        if len(word) == n:
            k = count_occurrences(ma, word)
            pmf[k] = pmf.get(k, source.zero) + p
            return
        vec = source.emit(state) if stateful else source.conditional(word)
        for a in range(A):
            walk(word + (a,), p * vec[a], source.step(state, a) if stateful else None)

    walk((), source.one, source.initial if stateful else None)
    return CountDistribution(n, _trim(pmf))


def moments(dist: CountDistribution):
    """(mean, variance, skewness); exact arithmetic for rational pmfs."""
    items = list(dist.pmf.items())
    zero = Fraction(0) if dist.exact else 0.0
    mean = sum((k * p for k, p in items), zero)
    var = sum(((k - mean) ** 2 * p for k, p in items), zero)
    if var == 0:
        return mean, var, zero
    m3 = sum(((k - mean) ** 3 * p for k, p in items), zero)
    skew = float(m3) / float(var) ** 1.5
    return mean, var, skew


def normal_cdf(x: float) -> float:
    """Standard normal CDF through the C library's erfc (relative error ~1e-16)."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def kolmogorov_to_gaussian(dist: CountDistribution) -> float:
    """sup_k |P(K <= k) - Phi((k + 1/2 - mean) / sd)| over k = -1..n."""
    mean, var, _ = moments(dist)
    if var == 0:
        raise InputError("degenerate distribution: variance is zero")
    mu, sd = float(mean), math.sqrt(float(var))
    cdf = 0.0 if not dist.exact else Fraction(0)
    worst = normal_cdf((-0.5 - mu) / sd)
    for k in range(dist.n + 1):
        cdf += dist.pmf.get(k, 0)
        worst = max(worst, abs(float(cdf) - normal_cdf((k + 0.5 - mu) / sd)))
    return min(1.0, worst)


def total_variation(p: CountDistribution, q: CountDistribution) -> float:
    keys = set(p.pmf) | set(q.pmf)
    if p.exact and q.exact:
        return float(sum(abs(p[k] - q[k]) for k in keys) / 2)
    return 0.5 * sum(abs(float(p[k]) - float(q[k])) for k in keys)


@dataclass
class LimitDiagnostics:
    n_grid: list
    mean: list = field(default_factory=list)
    variance: list = field(default_factory=list)
    skewness: list = field(default_factory=list)
    kolmogorov: list = field(default_factory=list)   # None where the variance is zero
    tv_to_previous: list = field(default_factory=list)  # None at the first grid point
    verdict: str = "inconclusive"
    distributions: list = field(default_factory=list)


def pattern_chain(source: Source, pattern, horizon: int, mode: str | None = None) -> MarkovChain:
    """Chain for counting ``pattern`` in ``source`` up to length ``horizon``.

    Uses the canonical product embedding when the source exposes its state
    (closed when the source is finite-state), otherwise the coarsest Markov
    refinement of the automaton-state map on the prefix tree.
    """
    ma = pattern if isinstance(pattern, MatchingAutomaton) else \
        matching_automaton(pattern, source.alphabet)
    if source.has_state and isinstance(source, StateSource):
        r = canonical_embedding_RX(source, ma)
        if mode is None:
            mode = "closed" if source.finite else "horizon"
        return induced_chain(source, r, mode=mode, horizon=horizon)
    r, _, report = coarsest_markov_refinement(source, automaton_state(ma), max(horizon, 2))
    return induced_chain(source, r, mode="horizon", horizon=max(horizon, 2))


def limit_diagnose(source: Source, pattern, n_grid, method: str = "chain",
                   chain: MarkovChain | None = None) -> LimitDiagnostics:
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 3:
        raise InputError("the grid needs at least 3 lengths")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])) or n_grid[0] < 1:
        raise InputError("the grid must be strictly increasing positive lengths")
    if method == "chain":
        chain = chain or pattern_chain(source, pattern, n_grid[-1])
        dists = [count_distribution(chain, n) for n in n_grid]
    elif method == "bruteforce":
        dists = [count_distribution_bruteforce(source, pattern, n) for n in n_grid]
    else:
        raise InputError(f"unknown method {method!r}")

    diag = LimitDiagnostics(n_grid, distributions=dists)
    prev = None
    for d in dists:
        mean, var, skew = moments(d)
        diag.mean.append(mean)
        diag.variance.append(var)
        diag.skewness.append(skew)
        diag.kolmogorov.append(kolmogorov_to_gaussian(d) if var > 0 else None)
        diag.tv_to_previous.append(None if prev is None else total_variation(prev, d))
        prev = d
    diag.verdict = _verdict(diag)
    return diag


def _verdict(diag: LimitDiagnostics) -> str:
    ks = diag.kolmogorov
    if all(k is not None for k in ks):
        if all(b < a for a, b in zip(ks, ks[1:])) and ks[-1] < KOLMOGOROV_THRESHOLD:
            return "gaussian_like"
    v0, v1 = float(diag.variance[0]), float(diag.variance[-1])
    if v0 > 0 and diag.tv_to_previous[-1] < TV_THRESHOLD \
            and (v1 - v0) / v0 < VARIANCE_GROWTH_THRESHOLD:
        return "discrete_like"
    return "inconclusive"


def monte_carlo_counts(source: Source, pattern, n: int, trials: int, seed: int,
                       stream: int = 0) -> dict:
    """Empirical law of K_n over ``trials`` sampled words (keys sorted).

    Frequencies are exact fractions for rational sources.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    ma = pattern if isinstance(pattern, MatchingAutomaton) else \
        matching_automaton(pattern, source.alphabet)
    sampler = SymbolSampler(source, seed, stream)
    counts: dict = {}
    for _ in range(trials):
        k = count_occurrences(ma, sampler.word(n))
        counts[k] = counts.get(k, 0) + 1
    if source.exact:
        return {k: Fraction(counts[k], trials) for k in sorted(counts)}
    return {k: counts[k] / trials for k in sorted(counts)}
