"""Gaussian versus discrete limit shapes of pattern counts.

i.i.d. fair bits counted for "11" drift towards a normal law; with a
geometrically decaying chance of a one, the count of ones settles on a
fixed discrete law.
"""

import argparse

from markov_embedding import binary, geometric_decay, iid, limit_diagnose


def show(title, diag):
    print(title)
    print(f"  {'n':>5} {'mean':>12} {'variance':>12} {'kolmogorov':>11} {'tv':>10}")
    for n, m, v, k, tv in zip(diag.n_grid, diag.mean, diag.variance, diag.kolmogorov,
                              diag.tv_to_previous):
        ks = "-" if k is None else f"{k:.5f}"
        tvs = "-" if tv is None else f"{tv:.3g}"
        print(f"  {n:>5} {float(m):>12.4f} {float(v):>12.4f} {ks:>11} {tvs:>10}")
    print(f"  verdict: {diag.verdict}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, nargs=3, default=[25, 100, 400])
    args = ap.parse_args()
    B = binary()
    show("i.i.d.(1/2), pattern 11", limit_diagnose(iid(B, ["1/2", "1/2"]), "11", args.grid))
    show("P(X_n = 1) = 2^-n, pattern 1", limit_diagnose(geometric_decay(), "1", [10, 20, 40]))


if __name__ == "__main__":
    main()
