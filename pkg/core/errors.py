from __future__ import annotations


class FolTraceError(Exception):
    """Base class for every domain error raised by the core package."""


class ParseError(FolTraceError):
    def __init__(self, text: str, offset: int, expected: set[str] | frozenset[str] = frozenset()):
        self.text = text
        self.offset = offset  # byte offset into the UTF-8 encoding of text
        self.expected = frozenset(expected)
        where = "end-of-input" if offset >= len(text.encode("utf-8")) else f"byte {offset}"
        exp = ", ".join(sorted(self.expected)) or "nothing"
        super().__init__(f"cannot parse {text!r} at {where}; expected one of: {exp}")

    @property
    def at_end(self) -> bool:
        return self.offset >= len(self.text.encode("utf-8"))


class MissingAssignment(FolTraceError):
    def __init__(self, atom: str):
        self.atom = atom
        super().__init__(f"interpretation has no value for atom {atom!r}")


class UnsupportedQuantifier(FolTraceError):
    pass


class CatalogError(FolTraceError):
    pass


class UnknownRule(FolTraceError):
    def __init__(self, rule_id: str):
        self.rule_id = rule_id
        super().__init__(f"no catalogued rule with id {rule_id!r}")


class LexiconExhausted(FolTraceError):
    def __init__(self, needed: int, available: int):
        self.needed = needed
        self.available = available
        super().__init__(f"template needs {needed} distinct predicates, lexicon has {available}")


class SchemaError(FolTraceError):
    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        self.reason = reason
        super().__init__(f"{path}:{line}: {reason}")


class NoMaskableSpan(FolTraceError):
    def __init__(self, kind: str):
        self.kind = kind
        super().__init__(f"formula has no maskable {kind} span")


class ChainTooShort(FolTraceError):
    def __init__(self, length: int, blanks: int):
        self.length = length
        self.blanks = blanks
        super().__init__(f"chain of {length} step(s) cannot hide {blanks} trailing step(s)")


class EndpointError(FolTraceError):
    def __init__(self, attempts: int, last_error: BaseException | None):
        self.attempts = attempts
        self.last_error = last_error
        super().__init__(f"model endpoint failed after {attempts} attempt(s): {last_error!r}")


class ConfigError(FolTraceError):
    pass
