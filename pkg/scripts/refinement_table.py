"""Coarsest Markov refinement of a labelling, printed block by block."""

import argparse

from markov_embedding import (automaton_state, binary, coarsest_markov_refinement, constant,
                              last_k_symbols, markov, matching_automaton, polya_urn)

ORDER2 = {"00": ["1/3", "2/3"], "01": ["1/5", "4/5"], "10": ["3/7", "4/7"], "11": ["5/6", "1/6"]}
START = {"": ["1/2", "1/2"], "0": ["1/4", "3/4"], "1": ["2/3", "1/3"]}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--source", choices=["order2", "urn"], default="order2")
    ap.add_argument("--map", choices=["constant", "last", "automaton"], default="last")
    ap.add_argument("--pattern", default="11")
    ap.add_argument("--horizon", type=int, default=4)
    args = ap.parse_args()
    B = binary()
    src = markov(B, 2, ORDER2, START) if args.source == "order2" else polya_urn(B, [1, 1])
    r = {"constant": constant(), "last": last_k_symbols(1),
         "automaton": automaton_state(matching_automaton(args.pattern, B))}[args.map]
    _, partition, report = coarsest_markov_refinement(src, r, args.horizon)
    print(f"{len(partition)} blocks, verdict {report.verdict}")
    for i, block in enumerate(partition.blocks):
        print(f"  block {i}: " + " ".join(B.format_word(w) for w in block))


if __name__ == "__main__":
    main()
