"""Text format for pulse programs.

The notation follows the usual way these sequences are written down::

    L--X/2--(XY16-64 t=0.4115)---X/2--LRO
    ((PolX tau=1.248)^20--L)^20--((PolY tau=1.248)^20--LRO)^20

See ``GRAMMAR.md`` next to this module for the full grammar.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .builders import pulsepol_unit, xy16_block
from .ir import (
    HALF_PI,
    PI,
    Block,
    Delay,
    LaserInit,
    LaserRead,
    MwPulse,
    ParameterError,
    PulseProgram,
    RfPulse,
)


class ParseError(ValueError):
    def __init__(self, message, line, column, token):
        super().__init__(f"{message} at line {line}, column {column} (token {token!r})")
        self.line = line
        self.column = column
        self.token = token


_TOKEN_RE = re.compile(r"""
    (?P<comment>\#[^\n]*)
  | (?P<ws>\s+)
  | (?P<sep>--)
  | (?P<pulse>-?[XY](?:/2)?(?![A-Za-z0-9]))
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<word>[A-Za-z][A-Za-z0-9]*(?:-\d+|/2)?)
  | (?P<punct>[()^=,])
  | (?P<bad>\S+?(?=--|[\s()^=,]|$))
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    toks, line, line_start = [], 1, 0
    for m in _TOKEN_RE.finditer(text):
        kind, s = m.lastgroup, m.group()
        col = m.start() - line_start + 1
        if kind in ("ws", "comment"):
            nl = s.count("\n")
            if nl:
                line += nl
                line_start = m.start() + s.rfind("\n") + 1
            continue
        toks.append(_Tok(kind, s, line, col))
    toks.append(_Tok("eof", "", line, len(text) - line_start + 1))
    return toks


_PULSES = {
    "X": ("X", PI), "Y": ("Y", PI), "-X": ("-X", PI), "-Y": ("-Y", PI),
    "X/2": ("X", HALF_PI), "Y/2": ("Y", HALF_PI), "-X/2": ("-X", HALF_PI), "-Y/2": ("-Y", HALF_PI),
}
_MACRO_RE = re.compile(r"^(XY16-\d+|PolY|PolX)$")


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.cur
        raise ParseError(msg, tok.line, tok.col, tok.text)

    def expect(self, kind, text=None) -> _Tok:
        t = self.cur
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            self.error(f"expected {want!r}")
        return self.advance()

    def number(self) -> float:
        return float(self.expect("number").text)

    def program(self):
        if self.cur.kind == "eof":
            self.error("empty program")
        items = self.sequence()
        if self.cur.kind != "eof":
            self.error("unexpected token")
        return items

    def sequence(self):
        items = [self.item()]
        while self.cur.kind == "sep":
            self.advance()
            items.append(self.item())
        return items

    def item(self):
        t = self.cur
        if t.kind == "pulse":
            self.advance()
            axis, angle = _PULSES[t.text]
            return MwPulse(axis, angle)
        if t.kind == "word":
            if t.text == "L":
                self.advance()
                return LaserInit()
            if t.text == "LRO":
                self.advance()
                return LaserRead()
            if t.text == "d":
                return self.delay()
            if t.text == "rf":
                return self.rf()
            self.error("unknown token")
        if t.kind == "punct" and t.text == "(":
            return self.group()
        if t.kind == "eof":
            self.error("unexpected end of input")
        self.error("unknown token")

    def delay(self):
        self.advance()
        self.expect("punct", "(")
        dur_tok = self.cur
        dur = self.number()
        dephase = False
        if self.cur.text == ",":
            self.advance()
            self.expect("word", "dephase")
            dephase = True
        self.expect("punct", ")")
        try:
            return Delay(dur, dephase)
        except ParameterError as exc:
            self.error(str(exc), dur_tok)

    def rf(self):
        start = self.advance()
        self.expect("punct", "(")
        vals = {}
        while True:
            key = self.expect("word")
            if key.text not in ("f", "phi", "T", "W") or key.text in vals:
                self.error("unknown or repeated rf parameter", key)
            self.expect("punct", "=")
            vals[key.text] = self.number()
            if self.cur.text == ",":
                self.advance()
                continue
            break
        self.expect("punct", ")")
        missing = {"f", "phi", "T", "W"} - set(vals)
        if missing:
            self.error(f"rf pulse missing {sorted(missing)}", start)
        try:
            return RfPulse(vals["f"], vals["phi"], vals["T"], vals["W"])
        except ParameterError as exc:
            self.error(str(exc), start)

    def group(self):
        self.advance()  # "("
        head = self.cur
        if head.kind == "word" and _MACRO_RE.match(head.text):
            node = self.macro()
            self.expect("punct", ")")
            if self.cur.text == "^":
                return Block((node,), self.repeat())
            return node
        body = self.sequence()
        self.expect("punct", ")")
        count = self.repeat() if self.cur.text == "^" else 1
        return Block(tuple(body), count)

    def repeat(self) -> int:
        self.expect("punct", "^")
        t = self.cur
        if t.kind != "number" or not re.fullmatch(r"\d+", t.text) or int(t.text) < 1:
            self.error("repetition count must be a positive integer")
        self.advance()
        return int(t.text)

    def macro(self):
        head = self.advance()
        key = "tau" if head.text in ("PolY", "PolX") else "t"
        self.expect("word", key)
        self.expect("punct", "=")
        value = self.number()
        try:
            if head.text.startswith("XY16"):
                return xy16_block(int(head.text.split("-")[1]), value)
            return pulsepol_unit(value, head.text)
        except ParameterError as exc:
            self.error(str(exc), head)


def parse_sequence(text: str) -> PulseProgram:
    """Parse DSL text into a :class:`PulseProgram`."""
    parser = _Parser(text)
    items = parser.program()
    try:
        return PulseProgram(tuple(items))
    except ParameterError as exc:
        # only program-level check left: a readout with no preceding init
        tok = next((t for t in parser.toks if t.text == "LRO"), parser.toks[0])
        raise ParseError(str(exc), tok.line, tok.col, tok.text) from exc


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ParameterError(f"cannot format non-finite value {x!r}")
    return repr(x)


def _format_item(e) -> str:
    if isinstance(e, MwPulse):
        return e.axis + ("/2" if e.angle == HALF_PI else "")
    if isinstance(e, LaserInit):
        return "L"
    if isinstance(e, LaserRead):
        return "LRO"
    if isinstance(e, Delay):
        return f"d({_num(e.duration)}{',dephase' if e.dephase else ''})"
    if isinstance(e, RfPulse):
        return (f"rf(f={_num(e.frequency)},phi={_num(e.phase)},"
                f"T={_num(e.duration)},W={_num(e.rabi)})")
    if isinstance(e, Block):
        if e.macro is not None:
            return f"({e.macro})"
        if len(e.body) == 1 and isinstance(e.body[0], Block) and e.body[0].macro is not None:
            return f"({e.body[0].macro})^{e.count}"
        return "(" + _join(e.body) + f")^{e.count}"
    raise TypeError(f"cannot format element {e!r}")


def _join(elements) -> str:
    return "--".join(_format_item(e) for e in elements)


def format_sequence(program: PulseProgram) -> str:
    """Canonical, byte-stable text for ``program``."""
    return _join(program.elements)
