"""Composition-schedule expression grammar.

One expression denotes one period of the composition. Grammar (LL(1),
recursive descent, single token of lookahead):

    schedule  := item { item }
    item      := primitive [ "^" INT ]
    primitive := "K[" angle "]" | "Q[" angle "]"
               | "C[" ratio { "," ratio } "]"
               | "G[" piece { ";" piece } "]"
    piece     := "(" ratio "," angle "," ("draw" | "gap") ")"
    ratio     := INT "/" INT | DECIMAL
    angle     := [ "-" ] ( "pi" [ "/" INT ] | DECIMAL | INT )

Whitespace between tokens is insignificant. Ratios written as fractions are
kept exact (`fractions.Fraction`); decimals stay floats, and `format` emits
whichever form was parsed. The older subscript notation C_{[1/3 1/3]} puts
spaces between ratios; this grammar standardizes on commas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ScheduleSemanticError, ScheduleSyntaxError

Ratio = Fraction | float


@dataclass(frozen=True)
class Angle:
    """An angle in radians, remembering whether it was written as +/-pi/k."""

    value: float
    pi_k: int | None = None

    def __str__(self) -> str:
        if self.pi_k is not None:
            sign = "-" if self.value < 0 else ""
            return f"{sign}pi" if self.pi_k == 1 else f"{sign}pi/{self.pi_k}"
        return repr(self.value)


@dataclass(frozen=True)
class PieceExpr:
    """One generator piece: scale factor, heading, pen up or down."""

    ratio: Ratio
    angle: Angle
    draw: bool

    def __str__(self) -> str:
        pen = "draw" if self.draw else "gap"
        return f"({_format_ratio(self.ratio)},{self.angle},{pen})"


@dataclass(frozen=True)
class ScheduleItem:
    """One substage term: a generator primitive with a repeat count."""

    kind: str  # "K" | "Q" | "C" | "G"
    repeat: int = 1
    angle: Angle | None = None
    ratios: tuple[Ratio, ...] | None = None
    pieces: tuple[PieceExpr, ...] | None = None
    span: tuple[int, int] = field(default=(0, 0), compare=False)  # byte offsets

    def __str__(self) -> str:
        if self.kind in ("K", "Q"):
            body = str(self.angle)
        elif self.kind == "C":
            body = ",".join(_format_ratio(r) for r in self.ratios)
        else:
            body = ";".join(str(p) for p in self.pieces)
        text = f"{self.kind}[{body}]"
        if self.repeat > 1:
            text += f"^{self.repeat}"
        return text


@dataclass(frozen=True)
class ScheduleExpr:
    """Ordered substage terms making up one period of the composition."""

    items: tuple[ScheduleItem, ...]

    def __str__(self) -> str:
        return format(self)


def _format_ratio(r: Ratio) -> str:
    if isinstance(r, Fraction):
        return f"{r.numerator}/{r.denominator}"
    return repr(r)


def format(e: ScheduleExpr) -> str:
    """Canonical text form: single spaces between items, ^n only when n > 1."""
    return " ".join(str(item) for item in e.items)


# --- tokenizer -------------------------------------------------------------

_PUNCT = set("[](),;^/-")


@dataclass(frozen=True)
class _Token:
    kind: str  # NAME, INT, DECIMAL, one of the punct chars, EOF
    text: str
    pos: int  # character offset


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _PUNCT:
            tokens.append(_Token(c, c, i))
            i += 1
            continue
        if c.isascii() and c.isalpha():
            j = i
            while j < n and text[j].isascii() and text[j].isalpha():
                j += 1
            tokens.append(_Token("NAME", text[i:j], i))
            i = j
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                start_frac = j
                while j < n and text[j].isdigit():
                    j += 1
                if start_frac == j or j == i + 1:  # "1." or lone "."
                    raise ScheduleSyntaxError(
                        "malformed number", _byte_offset(text, i), frozenset({"digit"})
                    )
                tokens.append(_Token("DECIMAL", text[i:j], i))
            else:
                tokens.append(_Token("INT", text[i:j], i))
            i = j
            continue
        raise ScheduleSyntaxError(
            f"unexpected character {c!r}", _byte_offset(text, i), frozenset()
        )
    tokens.append(_Token("EOF", "", n))
    return tokens


def _byte_offset(text: str, char_pos: int) -> int:
    return len(text[:char_pos].encode("utf-8"))


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected: set[str], message: str = "unexpected token") -> None:
        raise ScheduleSyntaxError(
            f"{message} {self.tok.text!r}" if self.tok.kind != "EOF" else "unexpected end of input",
            _byte_offset(self.text, self.tok.pos),
            frozenset(expected),
        )

    def expect(self, kind: str) -> _Token:
        if self.tok.kind != kind:
            self.fail({kind})
        return self.advance()

    def semantic(self, message: str) -> None:
        raise ScheduleSemanticError(message)

    def parse_schedule(self) -> ScheduleExpr:
        items = [self.parse_item()]
        while self.tok.kind != "EOF":
            items.append(self.parse_item())
        return ScheduleExpr(tuple(items))

    def parse_item(self) -> ScheduleItem:
        if self.tok.kind != "NAME" or self.tok.text not in ("K", "Q", "C", "G"):
            self.fail({"K", "Q", "C", "G"}, "expected a generator")
        start = self.tok.pos
        name = self.advance().text
        self.expect("[")
        if name in ("K", "Q"):
            angle = self.parse_angle()
            item_args = {"angle": angle}
            if name == "Q" and angle.value != math.pi / 2:
                self.semantic(f"unsupported quadratic angle {angle}; only pi/2 is available")
        elif name == "C":
            ratios = [self.parse_ratio()]
            while self.tok.kind == ",":
                self.advance()
                ratios.append(self.parse_ratio())
            item_args = {"ratios": tuple(ratios)}
        else:
            pieces = [self.parse_piece()]
            while self.tok.kind == ";":
                self.advance()
                pieces.append(self.parse_piece())
            item_args = {"pieces": tuple(pieces)}
        self.expect("]")
        repeat = 1
        if self.tok.kind == "^":
            self.advance()
            repeat = int(self.expect("INT").text)
            if repeat < 1:
                self.semantic("repeat count must be >= 1")
        end = self.tokens[self.i - 1].pos + len(self.tokens[self.i - 1].text)
        span = (_byte_offset(self.text, start), _byte_offset(self.text, end))
        return ScheduleItem(kind=name, repeat=repeat, span=span, **item_args)

    def parse_piece(self) -> PieceExpr:
        self.expect("(")
        ratio = self.parse_ratio()
        self.expect(",")
        angle = self.parse_angle()
        self.expect(",")
        pen = self.expect("NAME").text
        if pen not in ("draw", "gap"):
            self.i -= 1
            self.fail({"draw", "gap"}, "expected a pen state")
        self.expect(")")
        return PieceExpr(ratio=ratio, angle=angle, draw=pen == "draw")

    def parse_ratio(self) -> Ratio:
        if self.tok.kind == "DECIMAL":
            value: Ratio = float(self.advance().text)
        elif self.tok.kind == "INT":
            num = int(self.advance().text)
            if self.tok.kind == "/":
                self.advance()
                den = int(self.expect("INT").text)
                if den == 0:
                    self.semantic("ratio denominator must be nonzero")
                value = Fraction(num, den)
            else:
                value = Fraction(num)
        else:
            self.fail({"number"}, "expected a ratio")
        if not 0 < value < 1:
            self.semantic(f"scale factor {_format_ratio(value)} outside (0, 1)")
        return value

    def parse_angle(self) -> Angle:
        sign = 1.0
        if self.tok.kind == "-":
            self.advance()
            sign = -1.0
        if self.tok.kind == "NAME" and self.tok.text == "pi":
            self.advance()
            k = 1
            if self.tok.kind == "/":
                self.advance()
                k = int(self.expect("INT").text)
                if k < 1:
                    self.semantic("angle denominator must be >= 1")
            angle = Angle(value=sign * math.pi / k, pi_k=k)
        elif self.tok.kind in ("DECIMAL", "INT"):
            angle = Angle(value=sign * float(self.advance().text))
        else:
            self.fail({"pi", "number"}, "expected an angle")
        if abs(angle.value) >= math.pi:
            self.semantic(f"angle {angle} outside (-pi, pi)")
        return angle


def parse(text: str) -> ScheduleExpr:
    """Parse a schedule expression (one period of the composition).

    Raises ScheduleSyntaxError with a byte offset and the accepted-token set,
    or ScheduleSemanticError for well-formed text denoting an invalid
    schedule (scale factor outside (0,1), angle at or beyond +/-pi, ...).
    """
    return _Parser(text).parse_schedule()
