"""Probability laws of finite-alphabet random strings.

A source is described by its next-symbol conditionals.  Sources that carry
a sufficient statistic (``StateSource``) fold a state forward one symbol at
a time; everything else (``FunctionSource``) evaluates the conditional on the
whole prefix.

Words are tuples of alphabet indices throughout.  Probabilities are
``Fraction`` when every model parameter was given as a rational number and
``float`` otherwise.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import InputError, ResourceError

Word = tuple
Prob = "Fraction | float"

DEFAULT_NODE_CAP = 2_000_000
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not symbols:
            raise InputError("alphabet must contain at least one symbol")
        for s in symbols:
            if not isinstance(s, str) or not s or not s.isprintable():
                raise InputError(f"invalid symbol name {s!r}")
        if len(set(symbols)) != len(symbols):
            raise InputError("alphabet symbols must be distinct")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise InputError(f"unknown symbol {name!r}") from None

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def parse_word(self, text: str) -> Word:
        """Inverse of :meth:`format_word`."""
        if text == "":
            return ()
        if self.single_char:
            return tuple(self.index(c) for c in text)
        return tuple(self.index(part) for part in text.split("·"))

    def format_word(self, word: Iterable[int]) -> str:
        sep = "" if self.single_char else "·"
        return sep.join(self.symbols[a] for a in word)

    def check_word(self, word: Sequence[int]) -> Word:
        word = tuple(word)
        for a in word:
            if not isinstance(a, (int, np.integer)) or not 0 <= a < self.size:
                raise InputError(f"symbol index {a!r} not in alphabet of size {self.size}")
        return word

    def words(self, length: int):
        """All words of the given length, in lexicographic index order."""
        if length == 0:
            yield ()
            return
        for w in self.words(length - 1):
            for a in range(self.size):
                yield w + (a,)


def binary() -> Alphabet:
    return Alphabet(("0", "1"))


def as_number(x, exact: bool):
    """Convert a model parameter to the arithmetic of the model."""
    if exact:
        if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
            return Fraction(x)
        if isinstance(x, Rational):
            return Fraction(x.numerator, x.denominator)
        if isinstance(x, str):
            return Fraction(x)
        raise InputError(f"parameter {x!r} is not rational; use floating mode")
    return float(Fraction(x)) if isinstance(x, str) else float(x)


def all_rational(values: Iterable) -> bool:
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (Rational, str)):
            return False
        if isinstance(v, str):
            try:
                Fraction(v)
            except ValueError:
                return False
    return True


def check_probability_vector(vec: Sequence, size: int, what: str = "probability vector") -> tuple:
    vec = tuple(vec)
    if len(vec) != size:
        raise InputError(f"{what} has {len(vec)} entries, expected {size}")
    if any(p < 0 for p in vec):
        raise InputError(f"{what} has a negative entry: {vec}")
    total = sum(vec)
    if isinstance(total, Fraction):
        if total != 1:
            raise InputError(f"{what} sums to {total}, not 1")
    elif abs(total - 1) > EXACT_TOL:
        raise InputError(f"{what} sums to {total!r}, not 1")
    return vec


class Source:
    """Law of a random string over ``alphabet``."""

    alphabet: Alphabet
    exact: bool
    name: str = "source"

    kind = "general"
    has_state = False

    def conditional(self, prefix: Sequence[int]) -> tuple:
        raise NotImplementedError

    def state_of(self, prefix: Sequence[int]) -> Hashable:
        raise InputError(f"{self.name} exposes no sufficient statistic")

    @property
    def zero(self):
        return Fraction(0) if self.exact else 0.0

    @property
    def one(self):
        return Fraction(1) if self.exact else 1.0

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class FunctionSource(Source):
    """General source given only by a computable conditional law."""

    def __init__(self, alphabet: Alphabet, conditional: Callable[[Word], Sequence],
                 exact: bool = True, name: str = "general", state_of=None):
        self.alphabet = alphabet
        self.exact = exact
        self.name = name
        self._conditional = conditional
        self._state_of = state_of
        self.has_state = state_of is not None

    def conditional(self, prefix):
        prefix = self.alphabet.check_word(prefix)
        return check_probability_vector(self._conditional(prefix), self.alphabet.size)

    def state_of(self, prefix):
        if self._state_of is None:
            return super().state_of(prefix)
        return self._state_of(self.alphabet.check_word(prefix))


class StateSource(Source):
    """Source driven by a sufficient statistic.

    ``step(state, a)`` is the state after appending symbol ``a`` and
    ``emit(state)`` the next-symbol law.  ``finite`` declares that the set
    of reachable states is finite, which is what allows closing the product
    with a matching automaton into a finite chain.
    """

    has_state = True

    def __init__(self, alphabet: Alphabet, initial: Hashable,
                 step: Callable[[Hashable, int], Hashable],
                 emit: Callable[[Hashable], Sequence],
                 exact: bool = True, finite: bool = True, name: str = "state source"):
        self.alphabet = alphabet
        self.initial = initial
        self._step = step
        self._emit = emit
        self.exact = exact
        self.finite = finite
        self.name = name
        self._emit_cache: dict = {}

    @property
    def kind(self):
        return "finite_state" if self.finite else "general"

    def step(self, state, a: int):
        return self._step(state, a)

    def emit(self, state) -> tuple:
        try:
            return self._emit_cache[state]
        except KeyError:
            vec = check_probability_vector(self._emit(state), self.alphabet.size,
                                           f"emission of state {state!r}")
            if len(self._emit_cache) < 100_000:
                self._emit_cache[state] = vec
            return vec

    def state_of(self, prefix):
        state = self.initial
        for a in self.alphabet.check_word(prefix):
            state = self._step(state, a)
        return state

    def conditional(self, prefix):
        return self.emit(self.state_of(prefix))

    def states(self, cap: int = 100_000) -> list:
        """Reachable states in breadth-first order (finite sources only)."""
        if not self.finite:
            raise ResourceError(f"{self.name} has an unbounded state space")
        seen = {self.initial: None}
        queue = deque([self.initial])
        while queue:
            s = queue.popleft()
            vec = self.emit(s)
            for a in range(self.alphabet.size):
                if vec[a] == 0:
                    continue
                t = self._step(s, a)
                if t not in seen:
                    if len(seen) >= cap:
                        raise ResourceError(f"source state closure exceeded cap of {cap} states")
                    seen[t] = None
                    queue.append(t)
        return list(seen)


# ---------------------------------------------------------------------------
# Built-in constructors
# ---------------------------------------------------------------------------

def probability_vector(alphabet: Alphabet, probs, exact: bool, what: str) -> tuple:
    if isinstance(probs, dict):
        vec = [0] * alphabet.size
        for sym, p in probs.items():
            vec[alphabet.index(sym)] = p
        probs = vec
    vec = tuple(as_number(p, exact) for p in probs)
    return check_probability_vector(vec, alphabet.size, what)


def _params_exact(values, exact):
    if exact is None:
        return all_rational(values)
    return exact


def _flatten(probs):
    if isinstance(probs, dict):
        return list(probs.values())
    return list(probs)


def iid(alphabet: Alphabet, probs, exact: bool | None = None) -> StateSource:
    """Independent identically distributed symbols."""
    exact = _params_exact(_flatten(probs), exact)
    vec = probability_vector(alphabet, probs, exact, "i.i.d. law")
    return StateSource(alphabet, 0, lambda s, a: 0, lambda s: vec,
                       exact=exact, finite=True, name=f"iid{vec}")


def bernoulli(p, exact: bool | None = None) -> StateSource:
    """Binary i.i.d. source with P(1) = p."""
    exact = _params_exact([p], exact)
    p = as_number(p, exact)
    return iid(binary(), (1 - p, p), exact=exact)


def deterministic(alphabet: Alphabet, symbol: str) -> StateSource:
    vec = [0] * alphabet.size
    vec[alphabet.index(symbol)] = 1
    return iid(alphabet, vec, exact=True)


def markov(alphabet: Alphabet, order: int, table: dict, start: dict | None = None,
           exact: bool | None = None) -> StateSource:
    """Markov source of order ``order`` (at most 4).

    ``table`` maps each length-``order`` context (a word string) to the law
    of the next symbol.  ``start`` optionally gives the laws after shorter
    contexts; missing ones default to uniform.
    """
    if not 0 <= order <= 4:
        raise InputError("Markov order must be between 0 and 4")
    start = start or {}
    exact = _params_exact(
        [p for rows in (table, start) for row in rows.values() for p in _flatten(row)], exact)
    rows = {}
    for ctx, row in table.items():
        word = alphabet.parse_word(ctx)
        if len(word) != order:
            raise InputError(f"context {ctx!r} does not have length {order}")
        rows[word] = probability_vector(alphabet, row, exact, f"row {ctx!r}")
    for ctx in alphabet.words(order):
        if ctx not in rows:
            raise InputError(f"missing transition row for context {alphabet.format_word(ctx)!r}")
    for ctx, row in start.items():
        word = alphabet.parse_word(ctx)
        if len(word) >= order:
            raise InputError(f"start context {ctx!r} must be shorter than the order")
        rows[word] = probability_vector(alphabet, row, exact, f"start row {ctx!r}")
    uniform = tuple(as_number(Fraction(1, alphabet.size), exact) for _ in alphabet.symbols)

    def step(state, a):
        return (state + (a,))[-order:] if order else ()

    def emit(state):
        return rows.get(state, uniform)

    return StateSource(alphabet, (), step, emit, exact=exact, finite=True,
                       name=f"markov order {order}")


def polya_urn(alphabet: Alphabet, initial: Sequence[int], reinforcement: int = 1,
              exact: bool = True) -> StateSource:
    """Pólya urn: each drawn symbol adds ``reinforcement`` balls of its colour.

    The state is ``(n, c_1, ..., c_{m-1})``: the time index followed by the
    draw counts of every symbol but the first.  For a binary alphabet that
    is ``(n, number of ones)``.
    """
    initial = tuple(int(x) for x in initial)
    if len(initial) != alphabet.size:
        raise InputError("urn composition must list one count per symbol")
    if any(x < 0 for x in initial) or sum(initial) == 0:
        raise InputError("urn composition must be nonnegative and nonempty")
    if int(reinforcement) < 0:
        raise InputError("reinforcement must be nonnegative")
    b = int(reinforcement)
    total0 = sum(initial)

    def step(state, a):
        counts = list(state)
        counts[0] += 1
        if a:
            counts[a] += 1
        return tuple(counts)

    def emit(state):
        n = state[0]
        drawn = [n - sum(state[1:])] + list(state[1:])
        denom = total0 + b * n
        if exact:
            return tuple(Fraction(initial[a] + b * drawn[a], denom) for a in range(alphabet.size))
        return tuple((initial[a] + b * drawn[a]) / denom for a in range(alphabet.size))

    return StateSource(alphabet, (0,) * alphabet.size, step, emit, exact=exact, finite=False,
                       name=f"polya urn {initial} +{b}")


def time_decay(alphabet: Alphabet, schedule: Callable[[int], Sequence], exact: bool = True,
               name: str = "time decay") -> StateSource:
    """Independent symbols whose law at step n (1-based) is ``schedule(n)``.

    The state is the number of symbols read so far.
    """
    return StateSource(alphabet, 0, lambda t, a: t + 1, lambda t: tuple(schedule(t + 1)),
                       exact=exact, finite=False, name=name)


def geometric_decay(first=Fraction(1, 2), ratio=Fraction(1, 2), alphabet: Alphabet | None = None,
                    symbol: str = "1", rest: str | None = None,
                    exact: bool | None = None) -> StateSource:
    """P(X_n = symbol) = first * ratio**(n-1); the remaining mass goes to ``rest``."""
    alphabet = alphabet or binary()
    exact = _params_exact([first, ratio], exact)
    first, ratio = as_number(first, exact), as_number(ratio, exact)
    if not (0 <= first <= 1 and 0 <= ratio <= 1):
        raise InputError("decay parameters must lie in [0, 1]")
    hit = alphabet.index(symbol)
    if rest is None:
        rest_idx = next(i for i in range(alphabet.size) if i != hit)
    else:
        rest_idx = alphabet.index(rest)
    if rest_idx == hit:
        raise InputError("rest symbol must differ from the decaying symbol")

    def schedule(n):
        p = first * ratio ** (n - 1)
        vec = [0 * p] * alphabet.size
        vec[hit] = p
        vec[rest_idx] = 1 - p
        return vec

    return time_decay(alphabet, schedule, exact=exact,
                      name=f"geometric decay {first}*{ratio}^(n-1)")


def table_source(alphabet: Alphabet, conditionals: dict, fallback, exact: bool | None = None) -> StateSource:
    """Explicit conditionals per prefix up to some depth, ``fallback`` beyond.

    Prefixes without an entry, and every prefix longer than the deepest
    entry, use ``fallback``.
    """
    exact = _params_exact(
        [p for row in conditionals.values() for p in _flatten(row)] + _flatten(fallback), exact)
    rows = {alphabet.parse_word(k): probability_vector(alphabet, v, exact, f"conditional of {k!r}")
            for k, v in conditionals.items()}
    fb = probability_vector(alphabet, fallback, exact, "fallback law")
    depth = max((len(w) for w in rows), default=0)
    tail = ("tail",)

    def step(state, a):
        if state == tail or len(state) >= depth:
            return tail
        return state + (a,)

    def emit(state):
        return fb if state == tail else rows.get(state, fb)

    return StateSource(alphabet, (), step, emit, exact=exact, finite=True, name="table source")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def conditional(source: Source, prefix: Sequence[int]) -> tuple:
    return source.conditional(source.alphabet.check_word(prefix))


def prefix_probability(source: Source, word: Sequence[int]):
    word = source.alphabet.check_word(word)
    p = source.one
    if isinstance(source, StateSource):
        state = source.initial
        for a in word:
            p *= source.emit(state)[a]
            state = source.step(state, a)
        return p
    for i, a in enumerate(word):
        p *= source.conditional(word[:i])[a]
    return p


@dataclass
class PrefixTree:
    """Words of length <= depth with probability above the pruning threshold.

    ``nodes`` is in breadth-first order (by length, then lexicographic).
    """

    alphabet: Alphabet
    depth: int
    nodes: list = field(default_factory=list)
    prob: dict = field(default_factory=dict)
    cond: dict = field(default_factory=dict)
    state: dict = field(default_factory=dict)
    threshold: float = 0

    def children(self, node: Word) -> list:
        return [node + (a,) for a in range(self.alphabet.size) if node + (a,) in self.prob]

    def at_depth(self, d: int) -> list:
        return [w for w in self.nodes if len(w) == d]

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, word):
        return tuple(word) in self.prob


def enumerate_prefix_tree(source: Source, depth: int, prune_below=0,
                          node_cap: int = DEFAULT_NODE_CAP) -> PrefixTree:
    if depth < 0:
        raise InputError("depth must be nonnegative")
    if not 0 <= prune_below < 1:
        raise InputError("pruning threshold must lie in [0, 1)")
    size = source.alphabet.size
    stateful = isinstance(source, StateSource)
    tree = PrefixTree(source.alphabet, depth, threshold=prune_below)
    root = ()
    tree.nodes.append(root)
    tree.prob[root] = source.one
    if stateful:
        tree.state[root] = source.initial
    frontier = [root]
    for d in range(depth):
        nxt = []
        for w in frontier:
            if stateful:
                vec = source.emit(tree.state[w])
            else:
                vec = source.conditional(w)
            tree.cond[w] = vec
            pw = tree.prob[w]
            for a in range(size):
                q = pw * vec[a]
                if q <= prune_below or q == 0:
                    continue
                child = w + (a,)
                tree.prob[child] = q
                if stateful:
                    tree.state[child] = source.step(tree.state[w], a)
                tree.nodes.append(child)
                nxt.append(child)
                if len(tree.nodes) > node_cap:
                    raise ResourceError(
                        f"prefix tree exceeded the node cap of {node_cap} nodes at depth {d + 1}")
        frontier = nxt
    return tree


def _thresholds(vec) -> list[int]:
    """Cumulative probabilities scaled to 53-bit integers (exact for rationals)."""
    out = []
    acc = 0
    for p in vec:
        acc += p
        if isinstance(acc, Fraction):
            out.append((acc.numerator << 53) // acc.denominator)
        else:
            out.append(int(acc * (1 << 53)))
    out[-1] = 1 << 53
    return out


class SymbolSampler:
    """Draws symbols from a source with a documented deterministic generator.

    The generator is NumPy's PCG64 seeded through ``SeedSequence(seed,
    spawn_key=(stream,))``.  Every symbol consumes one raw 64-bit output;
    its top 53 bits ``u`` select the first symbol ``a`` with
    ``u < floor(2**53 * P(X <= a))``.  The raw PCG64 stream is stable across
    platforms and NumPy releases, so samples are bit-reproducible.
    """

    def __init__(self, source: Source, seed: int, stream: int = 0, block: int = 4096):
        self.source = source
        bitgen = np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(stream),)))
        self._bitgen = bitgen
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0
        self._block = block
        self._cache: dict = {}

    def _raw(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._bitgen.random_raw(self._block)
            self._pos = 0
        u = int(self._buf[self._pos]) >> 11
        self._pos += 1
        return u

    def _draw(self, vec) -> int:
        key = vec
        th = self._cache.get(key)
        if th is None:
            th = _thresholds(vec)
            if len(self._cache) < 10_000:
                self._cache[key] = th
        u = self._raw()
        for a, t in enumerate(th):
            if u < t:
                return a
        return len(th) - 1

    def word(self, n: int) -> Word:
        src = self.source
        out = []
        if isinstance(src, StateSource):
            state = src.initial
            for _ in range(n):
                a = self._draw(src.emit(state))
                out.append(a)
                state = src.step(state, a)
        else:
            for _ in range(n):
                out.append(self._draw(src.conditional(tuple(out))))
        return tuple(out)


def sample(source: Source, n: int, seed: int) -> Word:
    if n < 0:
        raise InputError("length must be nonnegative")
    return SymbolSampler(source, seed).word(n)
