from fractions import Fraction as F

import pytest

from markov_embedding import (apply, automaton_state, canonical_embedding_RX, check_markov,
                              coarsest_markov_refinement, constant, count_distribution,
                              enumerate_prefix_tree, induced_chain, last_k_symbols,
                              matching_automaton, product, source_state, symbol_count,
                              time_index, iid, markov, polya_urn, FunctionSource)
from markov_embedding.embedding import labels_on_tree, refinement_pass
from markov_embedding.errors import (InputError, NotMarkovError, ResourceError,
                                     UnsupportedSourceError)

from conftest import ORDER1_TABLE, extend_to_leaves, is_markov_partition, refines


def test_apply_basic_maps(B):
    w = B.parse_word("0110")
    assert apply(last_k_symbols(2), w) == (1, 0)
    assert apply(time_index(), w) == 4
    assert apply(symbol_count(1), w) == 2
    assert apply(constant(), w) == apply(constant(), (1,))
    # "0110" leaves the automaton for "11" in its start state after the 0
    ma = matching_automaton("11", B)
    assert apply(automaton_state(ma), w) == 0
    assert apply(automaton_state(ma), w[:3]) == 2
    with pytest.raises(InputError):
        apply(time_index(), ())


def test_last_symbol_under_urn_is_not_markov(sources):
    urn = sources["urn_1_1"]
    rep = check_markov(urn, last_k_symbols(1), 3)
    assert rep.verdict == "not_markov"
    w = rep.witness
    assert (w.u_text, w.v_text) == ("11", "01")
    assert w.deviation == F(1, 4)
    assert w.label == (1,)
    # next-symbol laws: P(1 | 11) = 3/4, P(1 | 01) = 1/2
    assert w.u_law[(1,)] - w.v_law[(1,)] == F(1, 4)


def test_time_and_count_certify_for_urn(sources):
    urn = sources["urn_1_1"]
    rep = check_markov(urn, product(time_index(), symbol_count(1)), 8)
    assert rep.certified
    assert rep.transition_table[(1, 1)] == {(2, 1): F(1, 3), (2, 2): F(2, 3)}


@pytest.mark.parametrize("name", ["iid_1/2", "iid_3/10", "markov1"])
def test_last_symbol_is_markov_for_order_one(sources, name):
    assert check_markov(sources[name], last_k_symbols(1), 5).certified


def test_last_symbol_fails_for_order_two(sources):
    rep = check_markov(sources["markov2"], last_k_symbols(1), 4)
    assert rep.verdict == "not_markov"
    assert check_markov(sources["markov2"], last_k_symbols(2), 5).certified


def test_witness_histories_are_real_nodes(sources):
    rep = check_markov(sources["markov2"], last_k_symbols(1), 4)
    tree = enumerate_prefix_tree(sources["markov2"], 4)
    w = rep.witness
    assert w.u in tree and w.v in tree
    assert apply(last_k_symbols(1), w.u) == apply(last_k_symbols(1), w.v)


def test_float_mode_uses_tolerance(B):
    src = markov(B, 1, {"0": [2 / 3, 1 / 3], "1": [1 / 4, 3 / 4]})
    assert check_markov(src, last_k_symbols(1), 5).certified
    rep = check_markov(polya_urn(B, [1, 1], exact=False), last_k_symbols(1), 3)
    assert rep.verdict == "not_markov"
    assert rep.witness.deviation == pytest.approx(0.25, abs=1e-12)


def test_insufficient_support_with_pruning(B):
    src = iid(B, [F(9, 10), F(1, 10)])
    rep = check_markov(src, last_k_symbols(1), 3, prune_below=F(95, 1000))
    assert rep.verdict == "insufficient_support"
    assert rep.unsupported == [(1,)]


def test_summary_mentions_verdict(sources, B):
    rep = check_markov(sources["urn_1_1"], last_k_symbols(1), 3)
    text = rep.summary(last_k_symbols(1), B)
    assert "not_markov" in text and "11" in text


def _partition_checks(source, r, N):
    table, partition, report = coarsest_markov_refinement(source, r, N)
    tree = enumerate_prefix_tree(source, N)
    base = labels_on_tree(r, tree)
    out = {w: table.mapping[w] for w in tree.nodes if w}
    partition.check(out)
    assert refines(out, base)
    assert report.certified
    internal = {w: b for w, b in out.items() if len(w) < N}
    assert is_markov_partition(tree, extend_to_leaves(tree, base, internal))
    again, n_split = refinement_pass(tree, base, internal)
    assert n_split == 0
    return table, partition


@pytest.mark.parametrize("name", ["iid_1/2", "markov1", "markov2", "urn_1_1", "decay"])
@pytest.mark.parametrize("N", [2, 3, 4])
@pytest.mark.parametrize("rname", ["constant", "last1", "aut11"])
def test_refinement_laws(sources, B, name, N, rname):
    r = {"constant": constant(), "last1": last_k_symbols(1),
         "aut11": automaton_state(matching_automaton("11", B))}[rname]
    _partition_checks(sources[name], r, N)


def test_refinement_of_markov_map_is_itself(sources):
    # constant r is already Markov: nothing to split
    _, partition = _partition_checks(sources["markov2"], constant(), 4)
    assert len(partition) == 1
    # last symbol under an order-1 chain: two blocks
    _, partition = _partition_checks(sources["markov1"], last_k_symbols(1), 4)
    assert len(partition) == 2


def test_refinement_separates_order_two_contexts(sources):
    table, partition = _partition_checks(sources["markov2"], last_k_symbols(1), 4)
    assert len(partition) > 2
    # prefixes ending in the same two symbols (past depth 1) share a block
    m = table.mapping
    assert m[(0, 1, 1)] == m[(1, 1, 1)]
    assert m[(0, 0, 1)] != m[(0, 1, 1)]


def test_canonical_embedding_chain_for_iid(sources, B):
    src = sources["iid_1/2"]
    rx = canonical_embedding_RX(src, "11")
    chain = induced_chain(src, rx, mode="closed")
    assert chain.n_states == 3
    assert chain.horizon is None
    assert count_distribution(chain, 3).pmf == {0: F(5, 8), 1: F(1, 4), 2: F(1, 8)}


def test_canonical_embedding_for_markov_chain(sources):
    src = sources["markov1"]
    chain = induced_chain(src, canonical_embedding_RX(src, "10|01"), mode="closed")
    assert chain.horizon is None
    for i in range(chain.n_states):
        assert sum(p for _, p, _ in chain.edges[i]) == 1


def test_closed_mode_refuses_unbounded_sources(sources):
    urn = sources["urn_1_1"]
    with pytest.raises(UnsupportedSourceError):
        induced_chain(urn, canonical_embedding_RX(urn, "11"), mode="closed")
    chain = induced_chain(urn, canonical_embedding_RX(urn, "11"), mode="horizon", horizon=6)
    assert chain.horizon == 6


def test_closed_mode_requires_recorded_state(sources):
    with pytest.raises(UnsupportedSourceError):
        induced_chain(sources["iid_1/2"], last_k_symbols(1), mode="closed")


def test_rx_needs_a_state(B):
    src = FunctionSource(B, lambda w: (F(1, 2), F(1, 2)))
    with pytest.raises(UnsupportedSourceError, match="coarsest_markov_refinement"):
        canonical_embedding_RX(src, "11")


def test_induced_chain_refuses_non_markov_map(sources):
    with pytest.raises(NotMarkovError) as info:
        induced_chain(sources["urn_1_1"], last_k_symbols(1), horizon=3)
    assert info.value.report.witness.deviation == F(1, 4)


def test_induced_chain_from_report(sources):
    chain = induced_chain(sources["markov1"], last_k_symbols(1), horizon=4)
    i0, i1 = chain.index[(0,)], chain.index[(1,)]
    assert chain.transition(i0, i1) == ORDER1_TABLE["0"][1]
    assert chain.transition(i1, i1) == ORDER1_TABLE["1"][1]


def test_induced_chain_resource_cap(sources):
    urn = sources["urn_1_1"]
    with pytest.raises(ResourceError):
        induced_chain(urn, source_state(urn), horizon=30, state_cap=20)
