"""Markovian embeddings of finite-alphabet random strings."""

from .source import (Alphabet, PrefixTree, Source, StateSource, FunctionSource, binary, iid,
                     bernoulli, deterministic, markov, polya_urn, time_decay, geometric_decay,
                     table_source, conditional, prefix_probability, enumerate_prefix_tree, sample)
from .automata import (parse_regex, parse_pattern, compile, determinize, minimize,
                       matching_automaton, count_occurrences, MatchingAutomaton, Dfa, Nfa)
from .embedding import (Transformation, apply, constant, last_k_symbols, time_index,
                        automaton_state, source_state, product, table, table_from_function,
                        symbol_count, check_markov, coarsest_markov_refinement,
                        canonical_embedding_RX, induced_chain, MarkovCheckReport, Partition)
from .chain import MarkovChain
from .analysis import (CountDistribution, LimitDiagnostics, count_distribution,
                       count_distribution_bruteforce, moments, kolmogorov_to_gaussian,
                       limit_diagnose, monte_carlo_counts, pattern_chain)

__version__ = "0.1.0"
