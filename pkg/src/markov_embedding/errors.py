class EmbeddingError(Exception):
    """Base class for errors raised by this package."""


class InputError(EmbeddingError, ValueError):
    """Malformed input: unknown symbols, bad parameters, out-of-domain queries."""


class ResourceError(EmbeddingError):
    """A configured size cap would be exceeded."""


class RegexSyntaxError(InputError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class UnknownSymbolError(InputError):
    def __init__(self, token: str, position: int):
        super().__init__(f"unknown symbol {token!r} at offset {position}")
        self.token = token
        self.position = position


class NullablePatternError(InputError):
    pass


class UnsupportedSourceError(EmbeddingError):
    pass


class NotMarkovError(EmbeddingError):
    def __init__(self, report):
        w = report.witness
        super().__init__(
            f"embedded process is not Markov to horizon {report.horizon}: "
            f"histories {w.u_text!r} and {w.v_text!r} share label {w.label!r} "
            f"but their next-label laws differ by {w.deviation}")
        self.report = report


class AmbiguousSplitError(EmbeddingError):
    pass
