"""Show why the last symbol of a Pólya urn is not a Markov chain.

Prints the non-Markov witness at increasing horizons, then certifies the
(time, number of ones) embedding and counts the states of the product
chain used for counting "11".
"""

import argparse

from markov_embedding import (binary, canonical_embedding_RX, check_markov, count_distribution,
                              induced_chain, last_k_symbols, polya_urn, product, symbol_count,
                              time_index)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-horizon", type=int, default=6)
    args = ap.parse_args()
    B = binary()
    urn = polya_urn(B, [1, 1])
    for N in range(2, args.max_horizon + 1):
        rep = check_markov(urn, last_k_symbols(1), N)
        w = rep.witness
        extra = "" if w is None else f"  witness {w.u_text} vs {w.v_text}, deviation {w.deviation}"
        print(f"last symbol, N={N}: {rep.verdict}{extra}")
    rep = check_markov(urn, product(time_index(), symbol_count(1)), 8)
    print(f"(time, ones), N=8: {rep.verdict}")
    chain = induced_chain(urn, canonical_embedding_RX(urn, "11"), horizon=args.max_horizon)
    print(f"R^X chain for '11' up to n={args.max_horizon}: {chain.n_states} states")
    dist = count_distribution(chain, args.max_horizon)
    print("law of the count:", {k: str(p) for k, p in dist.pmf.items()})


if __name__ == "__main__":
    main()
