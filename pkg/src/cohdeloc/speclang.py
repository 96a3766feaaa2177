"""A tiny language for naming states on the command line.

Grammar (whitespace is insignificant)::

    spec    := kind "(" param ("," param)* ")"
    param   := name "=" value
    value   := number | complex | list
    complex := number ("+"|"-") number "i"
    list    := "[" value ("," value)* "]"

Kinds and their parameters::

    dimer | two_photon | spin_orbit | two_photon_parallel   p1, eps, phase=0
    nsite                                                   amps=[...], eps

Examples: ``dimer(p1=0.5, eps=1.0)``, ``nsite(amps=[0.6, 0.8+0i], eps=0.4)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .states import ScenarioBasis, SingleExcitationState, StateError

GRAMMAR = """\
spec    := kind "(" param ("," param)* ")"
param   := name "=" value
value   := number | complex | list
complex := number ("+"|"-") number "i"
list    := "[" value ("," value)* "]\""""

DIMER_LIKE = ("dimer", "two_photon", "spin_orbit", "two_photon_parallel")
KINDS = DIMER_LIKE + ("nsite",)

NATURAL_BASIS = {
    "dimer": ScenarioBasis.DIMER,
    "two_photon": ScenarioBasis.TWO_PHOTON_ANTIPARALLEL,
    "spin_orbit": ScenarioBasis.SPIN_ORBIT,
    "two_photon_parallel": ScenarioBasis.TWO_PHOTON_PARALLEL,
}

# parameter name -> value type, in canonical print order
_REAL, _LIST = "real", "list"
PARAMETERS: Dict[str, Dict[str, str]] = {k: {"p1": _REAL, "eps": _REAL, "phase": _REAL} for k in DIMER_LIKE}
PARAMETERS["nsite"] = {"amps": _LIST, "eps": _REAL}
DEFAULTS: Dict[str, Dict[str, Any]] = {k: {"phase": 0.0} for k in DIMER_LIKE}
DEFAULTS["nsite"] = {}


class SpecError(ValueError):
    """An error tied to a 1-based line/column in the spec text."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ParseError(SpecError):
    def __init__(self, message: str, line: int, column: int, expected: Iterable[str] = ()):
        super().__init__(message, line, column)
        self.expected: FrozenSet[str] = frozenset(expected)


class EvaluationError(SpecError):
    """Domain error raised while turning a parsed spec into a state."""


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, NUMBER, EOF, or the punctuation character itself
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)"
    r"|(?P<NUMBER>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<NAME>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[()\[\],=+\-])"
)


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col, {"token"})
        kind = m.lastgroup
        chunk = m.group()
        if kind == "ws":
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                line_start = pos + chunk.rindex("\n") + 1
        else:
            tokens.append(Token(chunk if kind == "punct" else kind, chunk, line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "EOF" else repr(tok.text)


def _format_expected(expected: Iterable[str]) -> str:
    items = sorted(expected)
    return items[0] if len(items) == 1 else ", ".join(items[:-1]) + " or " + items[-1]


@dataclass(frozen=True)
class StateSpec:
    """Parsed state description. ``params`` maps parameter name to value.

    Values are ``float``, ``complex``, or a tuple of those (for ``amps``).
    Source positions are kept for error messages but ignored by ``==``.
    """

    kind: str
    params: Mapping[str, Any]
    locations: Mapping[str, Tuple[int, int]] = field(default_factory=dict, compare=False, repr=False)

    def location(self, name: Optional[str] = None) -> Tuple[int, int]:
        return self.locations.get(name or "", self.locations.get("", (1, 1)))


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def fail(self, expected: Iterable[str], tok: Optional[Token] = None):
        tok = tok or self.tok
        expected = frozenset(expected)
        raise ParseError(f"expected {_format_expected(expected)}, got {_describe(tok)}", tok.line, tok.column, expected)

    def expect(self, kind: str, label: Optional[str] = None) -> Token:
        if self.tok.kind != kind:
            self.fail({label or repr(kind)})
        return self.advance()

    def spec(self) -> StateSpec:
        kind_tok = self.expect("NAME", "kind")
        kind = kind_tok.text
        if kind not in PARAMETERS:
            raise ParseError(f"unknown kind {kind!r}", kind_tok.line, kind_tok.column, set(KINDS))
        allowed = PARAMETERS[kind]
        self.expect("(")
        params: Dict[str, Any] = {}
        locations = {"": (kind_tok.line, kind_tok.column)}
        while True:
            name_tok = self.expect("NAME", "parameter name")
            name = name_tok.text
            if name not in allowed:
                raise ParseError(
                    f"{kind} takes no parameter {name!r}", name_tok.line, name_tok.column, set(allowed)
                )
            if name in params:
                raise ParseError(f"duplicate parameter {name!r}", name_tok.line, name_tok.column)
            self.expect("=")
            value_tok = self.tok
            value = self.value()
            self._check_type(kind, name, value, value_tok)
            params[name] = value
            locations[name] = (value_tok.line, value_tok.column)
            if self.tok.kind == ",":
                self.advance()
                continue
            if self.tok.kind != ")":
                self.fail({"','", "')'"})
            self.advance()
            break
        if self.tok.kind != "EOF":
            self.fail({"end of input"})
        for name, default in DEFAULTS[kind].items():
            params.setdefault(name, default)
        ordered = {name: params[name] for name in allowed if name in params}
        return StateSpec(kind, ordered, locations)

    def _check_type(self, kind: str, name: str, value, tok: Token):
        want = PARAMETERS[kind][name]
        if want == _REAL and not isinstance(value, float):
            raise ParseError(f"parameter {name!r} takes a real number", tok.line, tok.column, {"number"})
        if want == _LIST:
            if not isinstance(value, tuple):
                raise ParseError(f"parameter {name!r} takes a list", tok.line, tok.column, {"'['"})
            if any(isinstance(v, tuple) for v in value):
                raise ParseError(f"parameter {name!r} takes a flat list of numbers", tok.line, tok.column, {"number"})

    def value(self):
        if self.tok.kind == "[":
            return self.list_()
        if self.tok.kind not in ("NUMBER", "+", "-"):
            self.fail({"number", "'['"})
        re_part = self.number()
        if self.tok.kind in ("+", "-"):
            sign = 1.0 if self.advance().kind == "+" else -1.0
            im_part = self.number()
            tok = self.tok
            if tok.kind != "NAME" or tok.text != "i":
                self.fail({"'i'"})
            self.advance()
            return complex(re_part, sign * im_part)
        return re_part

    def number(self) -> float:
        sign = 1.0
        if self.tok.kind in ("+", "-"):
            sign = 1.0 if self.advance().kind == "+" else -1.0
        tok = self.expect("NUMBER", "number")
        value = sign * float(tok.text)
        if not math.isfinite(value):
            raise ParseError(f"numeric literal {tok.text!r} is not finite", tok.line, tok.column, {"number"})
        return value

    def list_(self) -> tuple:
        self.expect("[")
        items = [self.value()]
        while self.tok.kind == ",":
            self.advance()
            items.append(self.value())
        if self.tok.kind != "]":
            self.fail({"','", "']'"})
        self.advance()
        return tuple(items)


def parse(text: str) -> StateSpec:
    """Parse spec text; raises :class:`ParseError` with a location on failure."""
    if not isinstance(text, str):
        raise TypeError("spec text must be a string")
    return _Parser(text).spec()


def format_value(value) -> str:
    if isinstance(value, tuple):
        return "[" + ", ".join(format_value(v) for v in value) + "]"
    if isinstance(value, complex):
        sign = "-" if math.copysign(1.0, value.imag) < 0 else "+"
        return f"{value.real!r}{sign}{abs(value.imag)!r}i"
    return repr(float(value))


def format_spec(spec: StateSpec) -> str:
    """Canonical text for ``spec``; ``parse(format_spec(s)) == s``."""
    body = ", ".join(f"{name}={format_value(v)}" for name, v in spec.params.items())
    return f"{spec.kind}({body})"


def make_spec(kind: str, **params) -> StateSpec:
    """Build a spec programmatically, applying the same checks as the parser."""
    text = f"{kind}(" + ", ".join(f"{k}={format_value(v)}" for k, v in params.items()) + ")"
    return parse(text)


def evaluate(spec: StateSpec) -> Tuple[SingleExcitationState, Optional[ScenarioBasis]]:
    """Turn a spec into a state and its natural basis.

    ``nsite`` specs have no scenario basis unless they have two sites, in
    which case the dimer basis is used.
    """
    def located(name: str, exc: Exception) -> EvaluationError:
        line, col = spec.location(name)
        return EvaluationError(str(exc), line, col)

    p1 = spec.params.get("p1")
    if p1 is not None and not 0.0 <= p1 <= 1.0:
        raise located("p1", StateError(f"p1 out of [0,1]: {p1!r}"))
    for name in PARAMETERS[spec.kind]:
        if name not in spec.params:
            line, col = spec.location()
            raise EvaluationError(f"missing parameter {name!r} for {spec.kind}", line, col)

    p = spec.params
    if spec.kind == "nsite":
        amps = [complex(a) for a in p["amps"]]
        try:
            state = SingleExcitationState(amps, 0.0)
        except StateError as exc:
            raise located("amps", exc) from None
        try:
            state = SingleExcitationState(state.amplitudes, p["eps"])
        except StateError as exc:
            raise located("eps", exc) from None
        return state, ScenarioBasis.DIMER if state.n_sites == 2 else None

    p1, eps, phase = p["p1"], p["eps"], p["phase"]
    try:
        state = SingleExcitationState.dimer(p1, eps, phase)
    except StateError as exc:
        raise located("eps", exc) from None
    return state, NATURAL_BASIS[spec.kind]
