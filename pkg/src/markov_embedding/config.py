"""Strict JSON experiment configuration.

Unknown fields anywhere are errors.  JSON numbers with a fraction or
exponent are read as decimal strings, so ``0.3`` is exactly 3/10 in
rational mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

from .automata import matching_automaton, parse_pattern
from .embedding import (Transformation, automaton_state, constant, last_k_symbols, product,
                        source_state, table, time_index, SymbolCount)
from .errors import EmbeddingError
from .source import (Alphabet, Source, deterministic, geometric_decay, iid, markov, polya_urn,
                     table_source, time_decay, probability_vector)


class ConfigError(EmbeddingError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass
class ExperimentConfig:
    source: dict
    alphabet: list = field(default_factory=lambda: ["0", "1"])
    pattern: str | None = None
    transformation: dict | None = None
    horizon: int = 6
    n_grid: list = field(default_factory=lambda: [10, 20, 40])
    mode: str = "rational"
    seed: int = 0
    output_dir: str = "out"
    tolerance: str | None = None
    trials: int = 100_000
    node_cap: int = 2_000_000
    prune_below: str = "0"

    @property
    def exact(self) -> bool:
        return self.mode == "rational"

    @property
    def tol(self):
        if self.tolerance is None:
            return None
        return Fraction(self.tolerance) if self.exact else float(Fraction(self.tolerance))

    @property
    def prune(self):
        p = Fraction(self.prune_below)
        return p if self.exact else float(p)

    def build_alphabet(self) -> Alphabet:
        try:
            return Alphabet(tuple(self.alphabet))
        except EmbeddingError as e:
            raise ConfigError("alphabet", str(e)) from None

    def build_source(self, alphabet: Alphabet | None = None) -> Source:
        return build_source(self.source, alphabet or self.build_alphabet(), self.exact)

    def build_pattern(self, alphabet: Alphabet | None = None):
        if self.pattern is None:
            raise ConfigError("pattern", "this command needs a pattern")
        alphabet = alphabet or self.build_alphabet()
        try:
            return parse_pattern(self.pattern, alphabet)
        except EmbeddingError as e:
            raise ConfigError("pattern", str(e)) from None

    def build_transformation(self, source: Source) -> Transformation:
        if self.transformation is None:
            raise ConfigError("transformation", "this command needs a transformation")
        return build_transformation(self.transformation, source, self.pattern, "transformation")


_SPEC = {f.name: f for f in fields(ExperimentConfig)}


def _expect(value, types, path):
    if isinstance(value, bool) or not isinstance(value, types):
        names = types.__name__ if isinstance(types, type) else "/".join(t.__name__ for t in types)
        raise ConfigError(path, f"expected {names}, got {type(value).__name__}")
    return value


def _keys(obj: dict, path: str, required: set, optional: set):
    _expect(obj, dict, path)
    for k in obj:
        if k not in required | optional:
            raise ConfigError(f"{path}.{k}" if path else k, "unknown field")
    for k in required:
        if k not in obj:
            raise ConfigError(f"{path}.{k}" if path else k, "missing required field")


def load_config(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text, parse_float=str)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno} column {e.colno}", e.msg) from None
    _keys(raw, "", {"source"}, set(_SPEC) - {"source"})
    cfg = ExperimentConfig(**raw)
    _expect(cfg.source, dict, "source")
    _expect(cfg.alphabet, list, "alphabet")
    if cfg.pattern is not None:
        _expect(cfg.pattern, str, "pattern")
    if cfg.transformation is not None:
        _expect(cfg.transformation, dict, "transformation")
    _expect(cfg.horizon, int, "horizon")
    if cfg.horizon < 2:
        raise ConfigError("horizon", "must be at least 2")
    _expect(cfg.n_grid, list, "n_grid")
    for i, n in enumerate(cfg.n_grid):
        _expect(n, int, f"n_grid[{i}]")
        if n < 1:
            raise ConfigError(f"n_grid[{i}]", "lengths must be positive")
    if any(b <= a for a, b in zip(cfg.n_grid, cfg.n_grid[1:])):
        raise ConfigError("n_grid", "must be strictly increasing")
    if cfg.mode not in ("rational", "floating"):
        raise ConfigError("mode", "must be 'rational' or 'floating'")
    _expect(cfg.seed, int, "seed")
    _expect(cfg.output_dir, str, "output_dir")
    _expect(cfg.trials, int, "trials")
    if cfg.trials < 1:
        raise ConfigError("trials", "must be >= 1")
    _expect(cfg.node_cap, int, "node_cap")
    cfg.prune_below = str(cfg.prune_below)
    try:
        if not 0 <= Fraction(cfg.prune_below) < 1:
            raise ConfigError("prune_below", "must lie in [0, 1)")
    except ValueError:
        raise ConfigError("prune_below", "not a number") from None
    if cfg.tolerance is not None:
        cfg.tolerance = str(cfg.tolerance)
        try:
            Fraction(cfg.tolerance)
        except ValueError:
            raise ConfigError("tolerance", "not a number") from None
    # Surface constructor errors at load time.
    alphabet = cfg.build_alphabet()
    src = cfg.build_source(alphabet)
    if cfg.transformation is not None:
        build_transformation(cfg.transformation, src, cfg.pattern, "transformation")
    return cfg


def read_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e.strerror}") from None
    return load_config(text)


SOURCE_FIELDS = {
    "iid": ({"probs"}, set()),
    "deterministic": ({"symbol"}, set()),
    "markov": ({"order", "table"}, {"start"}),
    "polya_urn": ({"initial"}, {"reinforcement"}),
    "time_decay": (set(), {"first", "ratio", "symbol", "rest", "schedule", "after"}),
    "table": ({"conditionals", "fallback"}, set()),
}


def build_source(spec: dict, alphabet: Alphabet, exact: bool) -> Source:
    path = "source"
    _expect(spec, dict, path)
    kind = spec.get("kind")
    if kind not in SOURCE_FIELDS:
        raise ConfigError(f"{path}.kind", f"unknown source kind {kind!r}; "
                                          f"expected one of {sorted(SOURCE_FIELDS)}")
    req, opt = SOURCE_FIELDS[kind]
    _keys(spec, path, req | {"kind"}, opt)
    try:
        if kind == "iid":
            return iid(alphabet, spec["probs"], exact=exact)
        if kind == "deterministic":
            return deterministic(alphabet, spec["symbol"])
        if kind == "markov":
            return markov(alphabet, _expect(spec["order"], int, f"{path}.order"), spec["table"],
                          spec.get("start"), exact=exact)
        if kind == "polya_urn":
            initial = [_expect(x, int, f"{path}.initial") for x in spec["initial"]]
            return polya_urn(alphabet, initial, _expect(spec.get("reinforcement", 1), int,
                                                        f"{path}.reinforcement"), exact=exact)
        if kind == "time_decay":
            if "schedule" in spec:
                if {"first", "ratio"} & set(spec):
                    raise ConfigError(path, "give either a schedule or first/ratio, not both")
                rows = [probability_vector(alphabet, row, exact, f"schedule[{i}]")
                        for i, row in enumerate(spec["schedule"])]
                after = probability_vector(alphabet, spec.get("after", spec["schedule"][-1]), exact, "after")
                return time_decay(alphabet, lambda n: rows[n - 1] if n <= len(rows) else after,
                                  exact=exact, name="scheduled time decay")
            return geometric_decay(spec.get("first", "1/2"), spec.get("ratio", "1/2"), alphabet,
                                   spec.get("symbol", alphabet.symbols[-1]), spec.get("rest"),
                                   exact=exact)
        if kind == "table":
            return table_source(alphabet, spec["conditionals"], spec["fallback"], exact=exact)
    except ConfigError:
        raise
    except (EmbeddingError, ValueError, TypeError, ZeroDivisionError) as e:
        raise ConfigError(path, str(e)) from None
    raise AssertionError(kind)


TRANSFORMATION_FIELDS = {
    "constant": (set(), set()),
    "last_k_symbols": ({"k"}, set()),
    "time_index": (set(), set()),
    "automaton_state": (set(), {"pattern"}),
    "source_state": (set(), set()),
    "symbol_count": ({"symbol"}, set()),
    "table": ({"entries"}, set()),
    "product": ({"parts"}, set()),
}


def build_transformation(spec: dict, source: Source, pattern: str | None, path: str) -> Transformation:
    _expect(spec, dict, path)
    kind = spec.get("kind")
    if kind not in TRANSFORMATION_FIELDS:
        raise ConfigError(f"{path}.kind", f"unknown transformation {kind!r}; "
                                          f"expected one of {sorted(TRANSFORMATION_FIELDS)}")
    req, opt = TRANSFORMATION_FIELDS[kind]
    _keys(spec, path, req | {"kind"}, opt)
    alphabet = source.alphabet
    try:
        if kind == "constant":
            return constant()
        if kind == "last_k_symbols":
            return last_k_symbols(_expect(spec["k"], int, f"{path}.k"))
        if kind == "time_index":
            return time_index()
        if kind == "automaton_state":
            text = spec.get("pattern", pattern)
            if text is None:
                raise ConfigError(f"{path}.pattern", "automaton_state needs a pattern")
            return automaton_state(matching_automaton(text, alphabet))
        if kind == "source_state":
            return source_state(source)
        if kind == "symbol_count":
            return SymbolCount(alphabet.index(spec["symbol"]))
        if kind == "table":
            entries = _expect(spec["entries"], dict, f"{path}.entries")
            return table({alphabet.parse_word(k): v for k, v in entries.items()})
        if kind == "product":
            parts = _expect(spec["parts"], list, f"{path}.parts")
            return product([build_transformation(p, source, pattern, f"{path}.parts[{i}]")
                            for i, p in enumerate(parts)])
    except ConfigError:
        raise
    except (EmbeddingError, ValueError, TypeError) as e:
        raise ConfigError(path, str(e)) from None
    raise AssertionError(kind)
