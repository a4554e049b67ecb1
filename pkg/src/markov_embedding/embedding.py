"""Adapted embeddings of random strings and their Markov structure.

A transformation maps every nonempty prefix of the string to a label.  The
embedded process is the label sequence R(X_1), R(X_1 X_2), ...

Markovianity is certified on the finite prefix tree of depth N: for every
positive-probability history u of length 1..N-1, the law of the next label
given u must depend only on the current label R(u).  All depths are pooled,
so this checks homogeneity together with the Markov property.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

from .automata import MatchingAutomaton, matching_automaton
from .chain import MarkovChain
from .errors import (AmbiguousSplitError, InputError, NotMarkovError, ResourceError,
                     UnsupportedSourceError)
from .source import DEFAULT_NODE_CAP, Alphabet, PrefixTree, Source, StateSource, \
    enumerate_prefix_tree

DEFAULT_FLOAT_TOL = 1e-9
DEFAULT_CERT_HORIZON = 6
DEFAULT_STATE_CAP = 200_000


def format_state(x) -> str:
    """Canonical text for labels built from ints, strings and tuples."""
    if isinstance(x, tuple):
        return "(" + ",".join(format_state(v) for v in x) + ")"
    if isinstance(x, Fraction):
        return str(x)
    return str(x)


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------

class Transformation:
    """Map from nonempty prefixes to labels.

    Automatic transformations are computed by a left fold: ``initial`` is
    the (unlabelled) value at the empty prefix and ``step(label, a)`` the
    label after one more symbol.
    """

    automatic = True
    initial: Hashable = None

    def step(self, label, a: int):
        raise NotImplementedError

    def apply(self, prefix: Sequence[int]):
        prefix = tuple(prefix)
        if not prefix:
            raise InputError("transformations are defined on nonempty prefixes only")
        label = self.initial
        for a in prefix:
            label = self.step(label, a)
        return label

    def format_label(self, label, alphabet: Alphabet) -> str:
        return format_state(label)

    # Hooks used by induced_chain.
    def reward(self, label) -> int:
        return 0

    @property
    def has_automaton(self) -> bool:
        return False

    def source_state(self, label, source: Source):
        """Source state determined by ``label``, or None."""
        return None


class Constant(Transformation):
    initial = "*"

    def step(self, label, a):
        return "*"

    def __repr__(self):
        return "constant()"


class LastK(Transformation):
    """Last k symbols; shorter prefixes map to themselves."""

    initial = ()

    def __init__(self, k: int):
        if k < 1:
            raise InputError("last_k_symbols needs k >= 1")
        self.k = k

    def step(self, label, a):
        return (label + (a,))[-self.k:]

    def format_label(self, label, alphabet):
        return alphabet.format_word(label)

    def __repr__(self):
        return f"last_k_symbols({self.k})"


class TimeIndex(Transformation):
    initial = 0

    def step(self, label, a):
        return label + 1

    def __repr__(self):
        return "time_index()"


class SymbolCount(Transformation):
    """Number of occurrences of one symbol so far."""

    initial = 0

    def __init__(self, symbol: int):
        self.symbol = symbol

    def step(self, label, a):
        return label + (a == self.symbol)

    def __repr__(self):
        return f"symbol_count({self.symbol})"


class AutomatonState(Transformation):
    def __init__(self, automaton: MatchingAutomaton):
        self.automaton = automaton
        self.initial = automaton.start

    def step(self, label, a):
        return self.automaton.step(label, a)

    def format_label(self, label, alphabet):
        return f"q{label}"

    def reward(self, label):
        return int(label in self.automaton.accepting)

    @property
    def has_automaton(self):
        return True

    def __repr__(self):
        return f"automaton_state({self.automaton.pattern!r})"


class SourceStateMap(Transformation):
    def __init__(self, source: Source):
        if not source.has_state:
            raise UnsupportedSourceError(
                f"{source.name} exposes no sufficient statistic; use "
                "coarsest_markov_refinement as the general fallback")
        self.source = source
        self.automatic = isinstance(source, StateSource)
        self.initial = source.initial if self.automatic else None

    def step(self, label, a):
        return self.source.step(label, a)

    def apply(self, prefix):
        prefix = tuple(prefix)
        if not prefix:
            raise InputError("transformations are defined on nonempty prefixes only")
        return self.source.state_of(prefix)

    def source_state(self, label, source):
        return label if source is self.source else None

    def __repr__(self):
        return f"source_state({self.source.name})"


class Product(Transformation):
    def __init__(self, parts: Sequence[Transformation]):
        if not parts:
            raise InputError("product needs at least one component")
        self.parts = tuple(parts)
        self.automatic = all(p.automatic for p in self.parts)
        self.initial = tuple(p.initial for p in self.parts)

    def step(self, label, a):
        return tuple(p.step(x, a) for p, x in zip(self.parts, label))

    def apply(self, prefix):
        if self.automatic:
            return super().apply(prefix)
        return tuple(p.apply(prefix) for p in self.parts)

    def format_label(self, label, alphabet):
        return "(" + ",".join(p.format_label(x, alphabet) for p, x in zip(self.parts, label)) + ")"

    def reward(self, label):
        for p, x in zip(self.parts, label):
            if p.has_automaton:
                return p.reward(x)
        return 0

    @property
    def has_automaton(self):
        return any(p.has_automaton for p in self.parts)

    def source_state(self, label, source):
        for p, x in zip(self.parts, label):
            s = p.source_state(x, source)
            if s is not None:
                return s
        return None

    def __repr__(self):
        return "product(" + ", ".join(map(repr, self.parts)) + ")"


class Table(Transformation):
    """Explicit prefix -> label map.

    ``base`` records a transformation this table refines, with
    ``base_label[label]`` its label; rewards are read through it.
    """

    automatic = False

    def __init__(self, mapping: dict, base: Transformation | None = None,
                 base_label: dict | None = None):
        self.mapping = {tuple(k): v for k, v in mapping.items()}
        self.base = base
        self.base_label = base_label or {}

    def apply(self, prefix):
        prefix = tuple(prefix)
        try:
            return self.mapping[prefix]
        except KeyError:
            raise InputError(f"table transformation undefined on prefix {prefix}") from None

    def reward(self, label):
        if self.base is None or label not in self.base_label:
            return 0
        return self.base.reward(self.base_label[label])

    @property
    def has_automaton(self):
        return self.base is not None and self.base.has_automaton

    def __repr__(self):
        return f"table({len(self.mapping)} entries)"


def constant() -> Transformation:
    return Constant()


def last_k_symbols(k: int) -> Transformation:
    return LastK(k)


def time_index() -> Transformation:
    return TimeIndex()


def automaton_state(automaton: MatchingAutomaton) -> Transformation:
    return AutomatonState(automaton)


def source_state(source: Source) -> Transformation:
    return SourceStateMap(source)


def product(*parts: Transformation) -> Transformation:
    if len(parts) == 1 and isinstance(parts[0], (list, tuple)):
        parts = parts[0]
    return Product(parts)


def table(mapping: dict, **kw) -> Transformation:
    return Table(mapping, **kw)


def table_from_function(tree: PrefixTree, fn) -> Transformation:
    """Tabulate ``fn(prefix)`` over the nonempty nodes of ``tree``."""
    return Table({w: fn(w) for w in tree.nodes if w})


def symbol_count(symbol: int) -> Transformation:
    return SymbolCount(symbol)


def apply(r: Transformation, prefix: Sequence[int]):
    return r.apply(prefix)


def labels_on_tree(r: Transformation, tree: PrefixTree) -> dict:
    """Label of every nonempty node, folding automatic maps along the tree."""
    out = {}
    if r.automatic:
        for w in tree.nodes:
            if w:
                parent = out[w[:-1]] if len(w) > 1 else r.initial
                out[w] = r.step(parent, w[-1])
    else:
        for w in tree.nodes:
            if w:
                out[w] = r.apply(w)
    return out


# ---------------------------------------------------------------------------
# Markov certificate
# ---------------------------------------------------------------------------

@dataclass
class Witness:
    label: Hashable
    u: tuple
    v: tuple
    u_law: dict
    v_law: dict
    deviation: object
    u_text: str = ""
    v_text: str = ""


@dataclass
class MarkovCheckReport:
    horizon: int
    tolerance: object
    verdict: str
    witness: Witness | None = None
    transition_table: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    label_order: list = field(default_factory=list)
    max_deviation: object = 0
    unsupported: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == "markov_certified"

    @property
    def certified_horizon(self) -> int:
        return self.horizon

    def summary(self, r: Transformation | None = None, alphabet: Alphabet | None = None) -> str:
        def fmt(label):
            return r.format_label(label, alphabet) if r is not None and alphabet else format_state(label)

        lines = [f"verdict: {self.verdict}",
                 f"horizon: {self.horizon}",
                 f"tolerance: {self.tolerance}",
                 f"labels: {len(self.label_order)}"]
        if self.verdict == "markov_certified":
            lines.append(f"certified to horizon {self.horizon}")
        if self.witness is not None:
            w = self.witness
            lines.append(f"witness label: {fmt(w.label)}")
            lines.append(f"history u: {w.u_text}")
            lines.append(f"history v: {w.v_text}")
            for name, law in (("u", w.u_law), ("v", w.v_law)):
                parts = ", ".join(f"{fmt(k)}: {p}" for k, p in law.items())
                lines.append(f"next-label law given {name}: {{{parts}}}")
            lines.append(f"deviation: {w.deviation}")
        if self.unsupported:
            lines.append("labels without observable outgoing step: "
                         + ", ".join(fmt(x) for x in self.unsupported))
        return "\n".join(lines) + "\n"


def _default_tol(exact: bool, tolerance):
    if tolerance is not None:
        return tolerance
    return 0 if exact else DEFAULT_FLOAT_TOL


def _next_law(tree: PrefixTree, u, class_of) -> tuple[dict, object]:
    """Law of the class of the next node given node u, and the observed mass."""
    vec = tree.cond[u]
    law: dict = {}
    mass = 0 * vec[0]
    for a in range(tree.alphabet.size):
        child = u + (a,)
        if child in tree.prob:
            c = class_of(child)
            law[c] = law.get(c, 0 * vec[0]) + vec[a]
            mass += vec[a]
    if mass != 1 and mass != 0:
        law = {k: p / mass for k, p in law.items()}
    return law, mass


def _witness(tree, groups, order_index):
    """Max-deviation pair; ties go to the latest histories in breadth-first order."""
    best = None
    for label, members in groups.items():
        coords = set()
        for _, law in members:
            coords.update(law)
        for c in coords:
            vals = [(law.get(c, 0), u) for u, law in members]
            hi = max(v for v, _ in vals)
            lo = min(v for v, _ in vals)
            spread = hi - lo
            if spread == 0:
                continue
            top = max(order_index[u] for v, u in vals if v == hi)
            bot = max(order_index[u] for v, u in vals if v == lo)
            pair = (top, bot) if top > bot else (bot, top)
            key = (spread, pair)
            if best is None or key > best[0]:
                best = (key, label)
    return best


def check_markov(source: Source, r: Transformation, horizon: int, tolerance=None,
                 prune_below=0, node_cap: int = DEFAULT_NODE_CAP,
                 tree: PrefixTree | None = None) -> MarkovCheckReport:
    if horizon < 2:
        raise InputError("check_markov needs a horizon of at least 2")
    if tree is None:
        tree = enumerate_prefix_tree(source, horizon, prune_below, node_cap)
    tol = _default_tol(source.exact, tolerance)
    labels = labels_on_tree(r, tree)
    order_index = {w: i for i, w in enumerate(tree.nodes)}

    label_order = []
    seen = set()
    for w in tree.nodes:
        if w and labels[w] not in seen:
            seen.add(labels[w])
            label_order.append(labels[w])

    initial: dict = {}
    for w in tree.at_depth(1):
        initial[labels[w]] = initial.get(labels[w], source.zero) + tree.prob[w]

    groups: dict = {}
    unobserved = set()
    for w in tree.nodes:
        if not w or len(w) >= horizon:
            continue
        law, mass = _next_law(tree, w, labels.__getitem__)
        if mass == 0:
            unobserved.add(labels[w])
            continue
        groups.setdefault(labels[w], []).append((w, law))

    best = _witness(tree, groups, order_index)
    max_dev = best[0][0] if best else 0 * source.zero
    table_ = {label: dict(members[0][1]) for label, members in groups.items()}
    report = MarkovCheckReport(horizon=horizon, tolerance=tol, verdict="markov_certified",
                               transition_table=table_, initial=initial,
                               label_order=label_order, max_deviation=max_dev)
    if best is not None and best[0][0] > tol:
        (spread, (iu, iv)), label = best
        u, v = tree.nodes[iu], tree.nodes[iv]
        laws = dict(groups[label])
        report.verdict = "not_markov"
        report.witness = Witness(label, u, v, laws[u], laws[v], spread,
                                 tree.alphabet.format_word(u), tree.alphabet.format_word(v))
        return report
    missing = [x for x in label_order if x in unobserved and x not in groups]
    if missing:
        report.verdict = "insufficient_support"
        report.unsupported = missing
    return report


# ---------------------------------------------------------------------------
# Coarsest Markov refinement
# ---------------------------------------------------------------------------

@dataclass
class Partition:
    """Blocks of the nonempty tree nodes; block ids follow breadth-first order."""
    blocks: list
    block_of: dict

    def __len__(self):
        return len(self.blocks)

    def check(self, ground) -> None:
        ground = set(ground)
        union = set()
        for b in self.blocks:
            if union & set(b):
                raise InputError("partition blocks overlap")
            union |= set(b)
        if union != ground:
            raise InputError("partition blocks do not cover the ground set")


BOUNDARY = "boundary"


def leaf_classes(internal_labels: dict, base_labels: dict, leaves) -> dict:
    """Class of each depth-N node.

    Leaves are distinguished only by their base label: they join the
    internal block carrying that base label when there is exactly one such
    block, and otherwise share a boundary class of their own.
    """
    blocks_by_base: dict = {}
    for w, b in internal_labels.items():
        blocks_by_base.setdefault(base_labels[w], set()).add(b)
    out = {}
    for w in leaves:
        found = blocks_by_base.get(base_labels[w], ())
        out[w] = next(iter(found)) if len(found) == 1 else (BOUNDARY, base_labels[w])
    return out


def _canonical(nodes, labels: dict) -> dict:
    ids: dict = {}
    out = {}
    for w in nodes:
        if w in labels:
            out[w] = ids.setdefault(labels[w], len(ids))
    return out


def _group_float(keys: list, tol: float) -> list[int]:
    """Cluster vectors at tolerance ``tol``; refuse non-transitive situations."""
    clusters: list[list[dict]] = []
    out = []
    for law in keys:
        def close(other):
            support = set(law) | set(other)
            return max((abs(law.get(c, 0.0) - other.get(c, 0.0)) for c in support), default=0.0) <= tol

        hits = [i for i, members in enumerate(clusters) if any(close(m) for m in members)]
        if len(hits) > 1 or (hits and not all(close(m) for m in clusters[hits[0]])):
            raise AmbiguousSplitError(
                f"next-block laws are not transitively equal at tolerance {tol}; "
                "rerun in exact rational mode")
        if hits:
            clusters[hits[0]].append(law)
            out.append(hits[0])
        else:
            clusters.append([law])
            out.append(len(clusters) - 1)
    return out


def refinement_pass(tree: PrefixTree, base_labels: dict, labels: dict, exact: bool = True,
                    tol: float = DEFAULT_FLOAT_TOL) -> tuple[dict, int]:
    """One splitting pass over the internal nodes.

    ``labels`` assigns a block to every node of depth 1..N-1.  Returns the
    split labelling (canonical ids) and the number of new blocks created.
    """
    N = tree.depth
    internal = [w for w in tree.nodes if 0 < len(w) < N]
    leaves = [w for w in tree.nodes if len(w) == N]
    lc = leaf_classes({w: labels[w] for w in internal}, base_labels, leaves)

    def class_of(w):
        return labels[w] if len(w) < N else lc[w]

    by_block: dict = {}
    for w in internal:
        law, _ = _next_law(tree, w, class_of)
        by_block.setdefault(labels[w], []).append((w, law))
    new = {}
    for b, members in by_block.items():
        if exact:
            keys = [tuple(sorted(law.items(), key=lambda kv: repr(kv[0]))) for _, law in members]
            for (w, _), k in zip(members, keys):
                new[w] = (b, k)
        else:
            groups = _group_float([law for _, law in members], tol)
            for (w, _), g in zip(members, groups):
                new[w] = (b, g)
    new = _canonical(internal, new)
    return new, len(set(new.values())) - len(set(labels[w] for w in internal))


def coarsest_markov_refinement(source: Source, r: Transformation, horizon: int,
                               tolerance=None, prune_below=0,
                               node_cap: int = DEFAULT_NODE_CAP):
    """Coarsest refinement of ``r`` whose embedded process certifies as Markov.

    Blocks start as the r-labels pooled over depths 1..N-1 and are split
    until every block's nodes have the same law of the next block.  Depth-N
    nodes carry no outgoing constraint and are placed by their r-label only
    (see :func:`leaf_classes`).  Returns ``(table, partition, report)``.
    """
    if horizon < 2:
        raise InputError("refinement needs a horizon of at least 2")
    tree = enumerate_prefix_tree(source, horizon, prune_below, node_cap)
    tol = _default_tol(source.exact, tolerance)
    base = labels_on_tree(r, tree)
    internal = [w for w in tree.nodes if 0 < len(w) < horizon]
    leaves = [w for w in tree.nodes if len(w) == horizon]
    labels = _canonical(internal, base)
    while True:
        labels, n_split = refinement_pass(tree, base, labels, source.exact, tol)
        if n_split == 0:
            break
    lc = leaf_classes(labels, base, leaves)
    full = dict(labels)
    full.update(lc)
    final = _canonical([w for w in tree.nodes if w], full)
    blocks: list = [[] for _ in range(len(set(final.values())))]
    for w in tree.nodes:
        if w:
            blocks[final[w]].append(w)
    partition = Partition(blocks, final)
    base_label = {final[w]: base[w] for w in final}
    out = Table(final, base=r, base_label=base_label)
    report = check_markov(source, out, horizon, tol, tree=tree)
    return out, partition, report


# ---------------------------------------------------------------------------
# Canonical embedding and induced chains
# ---------------------------------------------------------------------------

def canonical_embedding_RX(source: Source, pattern, alphabet: Alphabet | None = None) -> Transformation:
    """Product of the matching-automaton state and the source's sufficient statistic."""
    if not source.has_state:
        raise UnsupportedSourceError(
            f"{source.name} exposes no sufficient statistic; use "
            "coarsest_markov_refinement(source, automaton_state(...), N) as the general fallback")
    ma = pattern if isinstance(pattern, MatchingAutomaton) else \
        matching_automaton(pattern, alphabet or source.alphabet)
    return Product((AutomatonState(ma), SourceStateMap(source)))


def _state_driven(source: Source, r: Transformation) -> bool:
    if not (r.automatic and isinstance(source, StateSource)):
        return False
    probe = r.step(r.initial, 0)
    return r.source_state(probe, source) is not None


def _closure_chain(source: StateSource, r: Transformation, depth: int | None,
                   state_cap: int) -> MarkovChain:
    def law(label):
        s = r.source_state(label, source)
        vec = source.emit(s)
        out: dict = {}
        for a in range(source.alphabet.size):
            if vec[a] == 0:
                continue
            t = r.step(label, a)
            if t in out:
                p, syms = out[t]
                out[t] = (p + vec[a], syms + (a,))
            else:
                out[t] = (vec[a], (a,))
        return out

    first: dict = {}
    vec0 = source.emit(source.initial)
    for a in range(source.alphabet.size):
        if vec0[a] != 0:
            t = r.step(r.initial, a)
            first[t] = first.get(t, 0 * vec0[a]) + vec0[a]

    order = list(first)
    index = {s: i for i, s in enumerate(order)}
    level = {s: 1 for s in order}
    edges: dict = {}
    queue = deque(order)
    while queue:
        s = queue.popleft()
        if depth is not None and level[s] >= depth:
            continue
        out = law(s)
        edges[s] = out
        for t in out:
            if t not in index:
                if len(order) >= state_cap:
                    raise ResourceError(f"chain closure exceeded cap of {state_cap} states")
                index[t] = len(order)
                order.append(t)
                level[t] = level[s] + 1
                queue.append(t)
    initial = [first.get(s, source.zero) for s in order]
    edge_list = []
    for s in order:
        out = edges.get(s, {})
        edge_list.append([(index[t], p, syms) for t, (p, syms) in out.items()])
    return MarkovChain(order, initial, edge_list, [r.reward(s) for s in order],
                       horizon=depth, names=[r.format_label(s, source.alphabet) for s in order])


def _report_chain(source: Source, r: Transformation, report: MarkovCheckReport) -> MarkovChain:
    order = list(report.label_order)
    index = {s: i for i, s in enumerate(order)}
    initial = [report.initial.get(s, source.zero) for s in order]
    edges = []
    for s in order:
        law = report.transition_table.get(s, {})
        edges.append([(index[t], p, ()) for t, p in law.items()])
    names = [r.format_label(s, source.alphabet) for s in order]
    return MarkovChain(order, initial, edges, [r.reward(s) for s in order],
                       horizon=report.horizon, names=names)


def induced_chain(source: Source, r: Transformation, mode: str = "horizon",
                  horizon: int | None = None, tolerance=None,
                  cert_horizon: int = DEFAULT_CERT_HORIZON,
                  state_cap: int = DEFAULT_STATE_CAP,
                  node_cap: int = DEFAULT_NODE_CAP) -> MarkovChain:
    """Chain of the embedded process R(X_1), R(X_1 X_2), ...

    ``mode="closed"`` enumerates the product of a finite-state source with an
    automatic transformation that records the source state; the result is
    valid at every length.  ``mode="horizon"`` keeps the labels reachable
    within ``horizon`` symbols.  For state-recording transformations the
    labels are enumerated forward; for anything else the chain is read off
    the prefix-tree certificate.  Either way ``check_markov`` runs first
    (at ``min(horizon, cert_horizon)`` on the forward paths) and a failed
    certificate raises ``NotMarkovError``.
    """
    if mode not in ("horizon", "closed"):
        raise InputError(f"unknown chain mode {mode!r}")
    if mode == "horizon" and (horizon is None or horizon < 1):
        raise InputError("horizon mode needs a horizon >= 1")
    driven = _state_driven(source, r)
    if mode == "closed":
        if not driven:
            raise UnsupportedSourceError(
                "closed mode needs a transformation that records the state of a state source")
        if not source.finite:
            raise UnsupportedSourceError(
                f"{source.name} has an unbounded state space; use horizon mode")
    if driven:
        h = cert_horizon if horizon is None else min(horizon, cert_horizon)
        report = check_markov(source, r, max(h, 2), tolerance, node_cap=node_cap)
        _refuse(report)
        return _closure_chain(source, r, None if mode == "closed" else horizon, state_cap)
    if horizon < 2:
        raise InputError("prefix-tree chains need a horizon of at least 2")
    report = check_markov(source, r, horizon, tolerance, node_cap=node_cap)
    _refuse(report)
    return _report_chain(source, r, report)


def _refuse(report: MarkovCheckReport) -> None:
    if report.verdict == "not_markov":
        raise NotMarkovError(report)
    if report.verdict == "insufficient_support":
        raise ResourceError("insufficient support to certify labels: "
                            + ", ".join(map(format_state, report.unsupported)))
