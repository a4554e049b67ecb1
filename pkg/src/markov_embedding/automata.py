"""Regular expressions over a model alphabet and their matching automata.

Grammar (lowest precedence first)::

    alt     := concat ('|' concat)*
    concat  := postfix*
    postfix := atom ('*' | '+' | '?')*
    atom    := symbol | '{' name '}' | '[' '^'? item+ ']' | '(' alt ')'

Single-character symbol names are written directly; longer names must be
brace-quoted.  ``()`` denotes the empty word.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .errors import (InputError, NullablePatternError, RegexSyntaxError, ResourceError,
                     UnknownSymbolError)
from .source import Alphabet

DEFAULT_SUBSET_CAP = 100_000


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Lit:
    symbol: int


@dataclass(frozen=True)
class Class:
    symbols: frozenset


@dataclass(frozen=True)
class Concat:
    left: object
    right: object


@dataclass(frozen=True)
class Alt:
    left: object
    right: object


@dataclass(frozen=True)
class Star:
    inner: object


@dataclass(frozen=True)
class Plus:
    inner: object


@dataclass(frozen=True)
class Opt:
    inner: object


def node_count(ast) -> int:
    if isinstance(ast, (Empty, Lit, Class)):
        return 1
    if isinstance(ast, (Concat, Alt)):
        return 1 + node_count(ast.left) + node_count(ast.right)
    return 1 + node_count(ast.inner)


def nullable(ast) -> bool:
    if isinstance(ast, Empty):
        return True
    if isinstance(ast, (Lit, Class)):
        return False
    if isinstance(ast, Concat):
        return nullable(ast.left) and nullable(ast.right)
    if isinstance(ast, Alt):
        return nullable(ast.left) or nullable(ast.right)
    if isinstance(ast, Plus):
        return nullable(ast.inner)
    return True


@dataclass(frozen=True)
class Pattern:
    """A parsed pattern together with its source text and alphabet."""
    text: str
    alphabet: Alphabet
    ast: object


class _Parser:
    SPECIAL = set("|()*+?[]{}^")

    def __init__(self, text: str, alphabet: Alphabet):
        self.text = text
        self.alphabet = alphabet
        self.pos = 0

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else None

    def parse(self):
        node = self.alt()
        if self.pos != len(self.text):
            ch = self.text[self.pos]
            raise RegexSyntaxError(f"unexpected {ch!r}", self.pos)
        return node

    def alt(self):
        node = self.concat()
        while self.peek() == "|":
            self.pos += 1
            node = Alt(node, self.concat())
        return node

    def concat(self):
        parts = []
        while self.peek() is not None and self.peek() not in "|)":
            parts.append(self.postfix())
        if not parts:
            return Empty()
        node = parts[0]
        for p in parts[1:]:
            node = Concat(node, p)
        return node

    def postfix(self):
        node = self.atom()
        while self.peek() in ("*", "+", "?"):
            op = self.text[self.pos]
            self.pos += 1
            node = {"*": Star, "+": Plus, "?": Opt}[op](node)
        return node

    def symbol(self) -> int:
        start = self.pos
        ch = self.peek()
        if ch == "{":
            end = self.text.find("}", start + 1)
            if end < 0:
                raise RegexSyntaxError("unterminated '{'", start)
            name = self.text[start + 1:end]
            self.pos = end + 1
        else:
            name = ch
            self.pos += 1
        try:
            return self.alphabet.index(name)
        except InputError:
            raise UnknownSymbolError(name, start) from None

    def atom(self):
        ch = self.peek()
        start = self.pos
        if ch == "(":
            self.pos += 1
            node = self.alt()
            if self.peek() != ")":
                raise RegexSyntaxError("missing ')'", self.pos)
            self.pos += 1
            return node
        if ch == "[":
            self.pos += 1
            negate = self.peek() == "^"
            if negate:
                self.pos += 1
            members = set()
            while self.peek() not in ("]", None):
                if self.peek() in self.SPECIAL - {"{"}:
                    raise RegexSyntaxError(f"unexpected {self.peek()!r} in class", self.pos)
                members.add(self.symbol())
            if self.peek() is None:
                raise RegexSyntaxError("unterminated '['", start)
            self.pos += 1
            if negate:
                members = set(range(self.alphabet.size)) - members
            if not members:
                raise RegexSyntaxError("empty symbol class", start)
            return Class(frozenset(members))
        if ch is None or ch in self.SPECIAL - {"{"}:
            what = "end of pattern" if ch is None else repr(ch)
            raise RegexSyntaxError(f"unexpected {what}", self.pos)
        return Lit(self.symbol())


def parse_regex(text: str, alphabet: Alphabet):
    return _Parser(text, alphabet).parse()


def parse_pattern(text: str, alphabet: Alphabet) -> Pattern:
    return Pattern(text, alphabet, parse_regex(text, alphabet))


# ---------------------------------------------------------------------------
# Thompson NFA
# ---------------------------------------------------------------------------

@dataclass
class Nfa:
    n_states: int
    alphabet_size: int
    transitions: list  # (src, symbol or None, dst)
    start: int
    accepting: frozenset

    def __post_init__(self):
        for s, _, t in self.transitions:
            if not (0 <= s < self.n_states and 0 <= t < self.n_states):
                raise InputError(f"transition {s}->{t} references an undeclared state")
        self._delta = {}
        self._eps = {}
        for s, a, t in self.transitions:
            if a is None:
                self._eps.setdefault(s, []).append(t)
            else:
                self._delta.setdefault((s, a), []).append(t)

    def closure(self, states) -> frozenset:
        stack = list(states)
        seen = set(stack)
        while stack:
            s = stack.pop()
            for t in self._eps.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    def move(self, states, a: int) -> frozenset:
        out = set()
        for s in states:
            out.update(self._delta.get((s, a), ()))
        return self.closure(out)

    def accepts(self, word: Sequence[int]) -> bool:
        cur = self.closure([self.start])
        for a in word:
            cur = self.move(cur, a)
        return bool(cur & self.accepting)


def compile(ast, alphabet: Alphabet) -> Nfa:
    """Thompson construction: one fragment of at most two states per AST node."""
    trans = []
    counter = [0]

    def new():
        counter[0] += 1
        return counter[0] - 1

    def build(node):
        if isinstance(node, Empty):
            s = new()
            return s, s
        if isinstance(node, Lit):
            s, t = new(), new()
            trans.append((s, node.symbol, t))
            return s, t
        if isinstance(node, Class):
            s, t = new(), new()
            for a in sorted(node.symbols):
                trans.append((s, a, t))
            return s, t
        if isinstance(node, Concat):
            s1, t1 = build(node.left)
            s2, t2 = build(node.right)
            trans.append((t1, None, s2))
            return s1, t2
        if isinstance(node, Alt):
            s, t = new(), new()
            s1, t1 = build(node.left)
            s2, t2 = build(node.right)
            trans.extend([(s, None, s1), (s, None, s2), (t1, None, t), (t2, None, t)])
            return s, t
        s, t = new(), new()
        s1, t1 = build(node.inner)
        trans.extend([(s, None, s1), (t1, None, t)])
        if isinstance(node, (Star, Opt)):
            trans.append((s, None, t))
        if isinstance(node, (Star, Plus)):
            trans.append((t1, None, s1))
        return s, t

    start, final = build(ast)
    return Nfa(counter[0], alphabet.size, trans, start, frozenset([final]))


# ---------------------------------------------------------------------------
# DFA
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dfa:
    """Complete DFA; ``delta[q][a]`` is the successor of state q on symbol a."""
    delta: tuple
    start: int
    accepting: frozenset

    @property
    def n_states(self) -> int:
        return len(self.delta)

    @property
    def alphabet_size(self) -> int:
        return len(self.delta[0]) if self.delta else 0

    def run(self, word: Sequence[int], state: int | None = None) -> int:
        q = self.start if state is None else state
        for a in word:
            q = self.delta[q][a]
        return q

    def accepts(self, word: Sequence[int]) -> bool:
        return self.run(word) in self.accepting


def determinize(nfa: Nfa, cap: int = DEFAULT_SUBSET_CAP) -> Dfa:
    """Subset construction.  The empty subset is kept as a dead state."""
    start = nfa.closure([nfa.start])
    index = {start: 0}
    order = [start]
    rows = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for a in range(nfa.alphabet_size):
            nxt = nfa.move(cur, a)
            if nxt not in index:
                if len(order) >= cap:
                    raise ResourceError(f"subset construction exceeded cap of {cap} states")
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        rows.append(tuple(row))
        i += 1
    accepting = frozenset(k for k, S in enumerate(order) if S & nfa.accepting)
    return Dfa(tuple(rows), 0, accepting)


def _renumber(delta, start, accepting, cls=None) -> Dfa:
    """Breadth-first renumbering from the start state, symbols in index order.

    With ``cls`` given, states are first collapsed to their class.
    """
    if cls is None:
        cls = list(range(len(delta)))
    new = {cls[start]: 0}
    order = [start]
    i = 0
    while i < len(order):
        q = order[i]
        for t in delta[q]:
            if cls[t] not in new:
                new[cls[t]] = len(order)
                order.append(t)
        i += 1
    rows = tuple(tuple(new[cls[t]] for t in delta[q]) for q in order)
    acc = frozenset(new[cls[q]] for q in order if q in accepting)
    return Dfa(rows, 0, acc)


def minimize(dfa: Dfa) -> Dfa:
    """Moore partition refinement, after trimming unreachable states."""
    dfa = _renumber(dfa.delta, dfa.start, dfa.accepting)
    n = dfa.n_states
    cls = [1 if q in dfa.accepting else 0 for q in range(n)]
    n_cls = len(set(cls))
    while True:
        sig = {}
        new_cls = []
        for q in range(n):
            key = (cls[q],) + tuple(cls[t] for t in dfa.delta[q])
            new_cls.append(sig.setdefault(key, len(sig)))
        if len(sig) == n_cls:
            break
        cls, n_cls = new_cls, len(sig)
    return _renumber(dfa.delta, dfa.start, dfa.accepting, cls)


# ---------------------------------------------------------------------------
# Matching automata
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchingAutomaton:
    """Minimal complete DFA for A*.L; accepting means a match ends here."""
    dfa: Dfa
    alphabet: Alphabet
    pattern: str = ""

    @property
    def n_states(self):
        return self.dfa.n_states

    @property
    def start(self):
        return self.dfa.start

    @property
    def accepting(self):
        return self.dfa.accepting

    def step(self, q: int, a: int) -> int:
        return self.dfa.delta[q][a]

    def dump(self) -> str:
        """Plain-text transition table: id, accepting flag, successor per symbol."""
        header = ["state", "accepting"] + list(self.alphabet.symbols)
        lines = ["# " + " ".join(header)]
        for q, row in enumerate(self.dfa.delta):
            lines.append(" ".join([str(q), "1" if q in self.accepting else "0"]
                                  + [str(t) for t in row]))
        return "\n".join(lines) + "\n"


def matching_automaton(pattern, alphabet: Alphabet | None = None,
                       cap: int = DEFAULT_SUBSET_CAP) -> MatchingAutomaton:
    """Accepts a ``Pattern``, an AST (with ``alphabet``) or pattern text."""
    text = ""
    if isinstance(pattern, Pattern):
        alphabet, text, ast = pattern.alphabet, pattern.text, pattern.ast
    elif isinstance(pattern, str):
        if alphabet is None:
            raise InputError("an alphabet is required to parse pattern text")
        text, ast = pattern, parse_regex(pattern, alphabet)
    else:
        if alphabet is None:
            raise InputError("an alphabet is required")
        ast = pattern
    if nullable(ast):
        raise NullablePatternError(
            f"pattern {text!r} matches the empty word, so a match would end at every "
            "position; remove the nullable case (e.g. replace X* by X+ or drop '?')")
    anything = Star(Class(frozenset(range(alphabet.size))))
    nfa = compile(Concat(anything, ast), alphabet)
    return MatchingAutomaton(minimize(determinize(nfa, cap)), alphabet, text)


def count_occurrences(ma: MatchingAutomaton, word: Sequence[int]) -> int:
    """Number of end positions i such that some factor ending at i matches."""
    word = ma.alphabet.check_word(word)
    q = ma.start
    k = 0
    for a in word:
        q = ma.dfa.delta[q][a]
        if q in ma.accepting:
            k += 1
    return k
