"""Command-line front end.

Exit codes: 0 success (or Markov certified), 2 configuration error,
3 not Markov, 4 insufficient support, 5 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from .analysis import (count_distribution, limit_diagnose, monte_carlo_counts, pattern_chain)
from .automata import matching_automaton
from .config import ConfigError, ExperimentConfig, load_config
from .embedding import check_markov, coarsest_markov_refinement
from .errors import (AmbiguousSplitError, InputError, NotMarkovError, ResourceError,
                     UnsupportedSourceError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_MARKOV = 3
EXIT_INSUFFICIENT = 4
EXIT_RESOURCE = 5

VERDICT_EXIT = {"markov_certified": EXIT_OK, "not_markov": EXIT_NOT_MARKOV,
                "insufficient_support": EXIT_INSUFFICIENT}


def fmt_number(x) -> str:
    """Exact fractions for rationals, 17 significant digits otherwise."""
    if x is None:
        return ""
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_check(cfg: ExperimentConfig, out: Path) -> int:
    source = cfg.build_source()
    r = cfg.build_transformation(source)
    report = check_markov(source, r, cfg.horizon, cfg.tol, prune_below=cfg.prune,
                          node_cap=cfg.node_cap)
    alphabet = source.alphabet

    def fmt(label):
        return r.format_label(label, alphabet)

    write_atomic(out / "check_report.txt", report.summary(r, alphabet))
    rows = [(fmt(a), fmt(b), fmt_number(p))
            for a in report.label_order if a in report.transition_table
            for b, p in report.transition_table[a].items()]
    if report.certified:
        write_atomic(out / "transitions.csv", csv_text(["from", "to", "probability"], rows))
        write_atomic(out / "initial.csv", csv_text(
            ["label", "probability"], [(fmt(a), fmt_number(p)) for a, p in report.initial.items()]))
    print(f"verdict: {report.verdict} (horizon {cfg.horizon})")
    if report.witness is not None:
        w = report.witness
        print(f"witness: {w.u_text!r} vs {w.v_text!r} share label {fmt(w.label)}, "
              f"deviation {fmt_number(w.deviation)}")
    return VERDICT_EXIT[report.verdict]


def cmd_refine(cfg: ExperimentConfig, out: Path) -> int:
    source = cfg.build_source()
    r = cfg.build_transformation(source)
    table, partition, report = coarsest_markov_refinement(
        source, r, cfg.horizon, cfg.tol, prune_below=cfg.prune, node_cap=cfg.node_cap)
    alphabet = source.alphabet
    rows = [(alphabet.format_word(w), table.mapping[w])
            for w in sorted(table.mapping, key=lambda w: (len(w), w))]
    write_atomic(out / "refinement.csv", csv_text(["prefix", "label"], rows))
    text = f"blocks: {len(partition)}\n" + report.summary()
    write_atomic(out / "refine_report.txt", text)
    print(f"blocks: {len(partition)}")
    print(f"verdict: {report.verdict} (horizon {cfg.horizon})")
    return VERDICT_EXIT[report.verdict]


def cmd_analyze(cfg: ExperimentConfig, out: Path) -> int:
    source = cfg.build_source()
    pattern = cfg.build_pattern(source.alphabet)
    ma = matching_automaton(pattern)
    chain = pattern_chain(source, ma, max(cfg.n_grid[-1], 2))
    diag = limit_diagnose(source, ma, cfg.n_grid, method="chain", chain=chain)
    rows = [(d.n, k, fmt_number(p)) for d in diag.distributions for k, p in sorted(d.pmf.items())]
    write_atomic(out / "distributions.csv", csv_text(["n", "k", "probability"], rows))
    drows = [(n, fmt_number(m), fmt_number(v), fmt_number(s), fmt_number(ks), fmt_number(tv))
             for n, m, v, s, ks, tv in zip(diag.n_grid, diag.mean, diag.variance, diag.skewness,
                                           diag.kolmogorov, diag.tv_to_previous)]
    write_atomic(out / "diagnostics.csv",
                 csv_text(["n", "mean", "variance", "skewness", "kolmogorov", "tv"], drows))
    print(f"chain states: {chain.n_states}")
    print(f"verdict: {diag.verdict}")
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig, out: Path) -> int:
    source = cfg.build_source()
    pattern = cfg.build_pattern(source.alphabet)
    ma = matching_automaton(pattern)
    rows = []
    for stream, n in enumerate(cfg.n_grid):
        freq = monte_carlo_counts(source, ma, n, cfg.trials, cfg.seed, stream=stream)
        rows.extend((n, k, fmt_number(p)) for k, p in freq.items())
    write_atomic(out / "simulation.csv", csv_text(["n", "k", "frequency"], rows))
    print(f"simulated {cfg.trials} words at each of {len(cfg.n_grid)} lengths")
    return EXIT_OK


def cmd_automaton(cfg: ExperimentConfig, out: Path) -> int:
    source_alphabet = cfg.build_alphabet()
    pattern = cfg.build_pattern(source_alphabet)
    ma = matching_automaton(pattern)
    text = ma.dump()
    write_atomic(out / "automaton.txt", text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "refine": cmd_refine, "analyze": cmd_analyze,
            "simulate": cmd_simulate, "automaton": cmd_automaton}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markov-embed", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    parser.add_argument("--mode", choices=["rational", "floating"], help="arithmetic mode")
    parser.add_argument("--seed", type=int, help="random seed (overrides the config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as e:
        print(f"error: config: cannot read {args.config}: {e.strerror}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.mode or args.seed is not None:
            raw = json.loads(text, parse_float=str)
            if isinstance(raw, dict):
                if args.mode:
                    raw["mode"] = args.mode
                if args.seed is not None:
                    raw["seed"] = args.seed
                text = json.dumps(raw)
        cfg = load_config(text)
    except json.JSONDecodeError as e:
        print(f"error: config: line {e.lineno} column {e.colno}: {e.msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, InputError) as e:
        print(f"error: config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or cfg.output_dir)
    try:
        return COMMANDS[args.command](cfg, out)
    except (ConfigError, InputError, UnsupportedSourceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NotMarkovError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_MARKOV
    except AmbiguousSplitError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except ResourceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
