"""Shared sources and independent oracles."""

from __future__ import annotations

from fractions import Fraction as F
from itertools import product as cartesian

import pytest

from markov_embedding import binary, iid, markov, polya_urn, geometric_decay
from markov_embedding.automata import Alt, Class, Concat, Empty, Lit, Opt, Plus, Star

ORDER1_TABLE = {"0": [F(2, 3), F(1, 3)], "1": [F(1, 4), F(3, 4)]}
ORDER2_TABLE = {"00": [F(1, 3), F(2, 3)], "01": [F(1, 5), F(4, 5)],
                "10": [F(3, 7), F(4, 7)], "11": [F(5, 6), F(1, 6)]}
ORDER2_START = {"": [F(1, 2), F(1, 2)], "0": [F(1, 4), F(3, 4)], "1": [F(2, 3), F(1, 3)]}

CORPUS = ["1", "11", "10|01", "1(0|1)1", "(00)*01"]


def make_sources() -> dict:
    B = binary()
    return {
        "iid_1/2": iid(B, [F(1, 2), F(1, 2)]),
        "iid_3/10": iid(B, [F(7, 10), F(3, 10)]),
        "markov1": markov(B, 1, ORDER1_TABLE),
        "markov2": markov(B, 2, ORDER2_TABLE, ORDER2_START),
        "urn_1_1": polya_urn(B, [1, 1]),
        "decay": geometric_decay(),
    }


@pytest.fixture
def B():
    return binary()


@pytest.fixture
def sources():
    return make_sources()


# ---------------------------------------------------------------------------
# AST interpreter: the set of end offsets reachable from offset i.
# Written against the regex semantics directly, sharing nothing with the
# Thompson/subset/minimization pipeline.
# ---------------------------------------------------------------------------

def ends(ast, word, i) -> frozenset:
    if isinstance(ast, Empty):
        return frozenset({i})
    if isinstance(ast, Lit):
        return frozenset({i + 1}) if i < len(word) and word[i] == ast.symbol else frozenset()
    if isinstance(ast, Class):
        return frozenset({i + 1}) if i < len(word) and word[i] in ast.symbols else frozenset()
    if isinstance(ast, Concat):
        return frozenset(k for j in ends(ast.left, word, i) for k in ends(ast.right, word, j))
    if isinstance(ast, Alt):
        return ends(ast.left, word, i) | ends(ast.right, word, i)
    if isinstance(ast, Opt):
        return ends(ast.inner, word, i) | {i}
    if isinstance(ast, (Star, Plus)):
        seen = {i} if isinstance(ast, Star) else set()
        frontier = set(ends(ast.inner, word, i))
        while frontier - seen:
            new = frontier - seen
            seen |= new
            frontier = {k for j in new for k in ends(ast.inner, word, j)}
        return frozenset(seen)
    raise TypeError(ast)


def ast_matches(ast, word) -> bool:
    return len(word) in ends(ast, word, 0)


def ast_count(ast, word) -> int:
    """End-position occurrence count by scanning every factor."""
    hits = set()
    for j in range(len(word) + 1):
        hits |= {e for e in ends(ast, word, j) if e > j}
    return len(hits)


def all_words(n, size=2):
    return [tuple(w) for w in cartesian(range(size), repeat=n)]


# ---------------------------------------------------------------------------
# Set partitions for the coarseness oracle.
# ---------------------------------------------------------------------------

def set_partitions(items):
    """All set partitions as block-id lists (restricted growth strings)."""
    n = len(items)
    out = []

    def rec(i, labels, top):
        if i == n:
            out.append(list(labels))
            return
        for b in range(top + 1):
            labels.append(b)
            rec(i + 1, labels, max(top, b + 1) if b == top else top)
            labels.pop()

    rec(0, [], 0)
    return out


def binomial_pmf(n, p) -> dict:
    from math import comb
    return {k: comb(n, k) * p ** k * (1 - p) ** (n - k) for k in range(n + 1)}


def extend_to_leaves(tree, base, internal_block):
    """Place depth-N nodes by r-label: the unique internal block with that
    label if there is one, otherwise a shared boundary class."""
    N = tree.depth
    carriers = {}
    for w, b in internal_block.items():
        carriers.setdefault(base[w], set()).add(b)
    full = dict(internal_block)
    for w in tree.nodes:
        if len(w) == N:
            c = carriers.get(base[w], set())
            full[w] = next(iter(c)) if len(c) == 1 else ("leaf", base[w])
    return full


def is_markov_partition(tree, full) -> bool:
    """Every internal block has a single next-block law (exact arithmetic)."""
    laws = {}
    for w in tree.nodes:
        if not w or len(w) == tree.depth:
            continue
        law = {}
        for a, p in enumerate(tree.cond[w]):
            if w + (a,) in tree.prob:
                law[full[w + (a,)]] = law.get(full[w + (a,)], 0) + p
        key = frozenset(law.items())
        if laws.setdefault(full[w], key) != key:
            return False
    return True


def refines(fine: dict, coarse: dict) -> bool:
    """fine(u) == fine(v) implies coarse(u) == coarse(v)."""
    image = {}
    for w, b in fine.items():
        if image.setdefault(b, coarse[w]) != coarse[w]:
            return False
    return True
