"""Parser for one-line distribution specs used by the command line.

Grammar::

    spec      := family ( "|" transform )*
    family    := "gaussian(" mu "," sigma ")"
               | "mix2(" w "," mu1 "," s1 "," mu2 "," s2 ")"
               | "skew(" alpha "," mu "," scale [ "," base_h "," base_G ] ")"
    transform := "cube" | "sinh" | "arctan" [ "(" c ")" ] | "scaled-arctan" [ "(" c ")" ]

Numbers use Python float syntax; whitespace between tokens is ignored.
``w`` is the weight of the first mix2 component.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .distributions import (
    SYMMETRIC_BASES,
    TRANSFORMS,
    Gaussian,
    MarginDistribution,
    SkewSymmetric,
    TwoGaussianMixture,
    apply_odd_monotone,
)
from .errors import DistSpecError, SelgroupError

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_-]*)|(?P<punct>[(),|]))"
)

FAMILIES = {"gaussian": (2, 2), "mix2": (5, 5), "skew": (3, 5)}
TRANSFORM_NAMES = tuple(TRANSFORMS) + ("scaled-arctan",)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise DistSpecError(text, start, f"unexpected character {text[start]!r}")
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, tok: _Tok, message: str):
        raise DistSpecError(self.text, tok.pos, message)

    def take(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text else kind
            got = "end of input" if tok.kind == "end" else repr(tok.text)
            self.fail(tok, f"expected {want}, got {got}")
        self.i += 1
        return tok

    def args(self) -> list[_Tok]:
        self.take("punct", "(")
        out = []
        while True:
            tok = self.peek()
            if tok.kind in ("num", "name"):
                out.append(tok)
                self.i += 1
            else:
                self.fail(tok, "expected a value")
            tok = self.peek()
            if tok.kind == "punct" and tok.text == ",":
                self.i += 1
                continue
            self.take("punct", ")")
            return out

    def number(self, tok: _Tok) -> float:
        if tok.kind != "num":
            self.fail(tok, f"expected a number, got {tok.text!r}")
        return float(tok.text)

    def parse(self) -> MarginDistribution:
        head = self.take("name")
        if head.text not in FAMILIES:
            self.fail(head, f"unknown family {head.text!r}; expected one of {', '.join(FAMILIES)}")
        args = self.args()
        lo, hi = FAMILIES[head.text]
        if not lo <= len(args) <= hi or (head.text == "skew" and len(args) == 4):
            want = f"{lo}" if lo == hi else f"{lo} or {hi}"
            self.fail(head, f"{head.text} takes {want} arguments, got {len(args)}")
        dist = self.build(head, args)
        while self.peek().kind != "end":
            self.take("punct", "|")
            name = self.take("name")
            if name.text not in TRANSFORM_NAMES:
                self.fail(name, f"unknown transform {name.text!r}; expected one of {', '.join(TRANSFORM_NAMES)}")
            c = 1.0
            if self.peek().kind == "punct" and self.peek().text == "(":
                if name.text in ("cube", "sinh"):
                    self.fail(self.peek(), f"{name.text} takes no argument")
                targs = self.args()
                if len(targs) != 1:
                    self.fail(name, f"{name.text} takes one argument")
                c = self.number(targs[0])
                if not c > 0:
                    self.fail(targs[0], "transform scale must be > 0")
            dist = apply_odd_monotone(dist, name.text, c)
        return dist

    def build(self, head: _Tok, args: list[_Tok]) -> MarginDistribution:
        try:
            if head.text == "gaussian":
                return Gaussian(*(self.number(a) for a in args))
            if head.text == "mix2":
                return TwoGaussianMixture(*(self.number(a) for a in args))
            nums = [self.number(a) for a in args[:3]]
            bases = []
            for a in args[3:]:
                if a.kind != "name" or a.text not in SYMMETRIC_BASES:
                    self.fail(a, f"unknown base {a.text!r}; expected one of {', '.join(sorted(SYMMETRIC_BASES))}")
                bases.append(a.text)
            return SkewSymmetric(*nums, *bases)
        except DistSpecError:
            raise
        except SelgroupError as exc:
            self.fail(head, str(exc))


def parse_dist(text: str) -> MarginDistribution:
    """Build a distribution from its spec string.

    Raises:
        DistSpecError: with a caret-positioned message on any grammar or
            parameter error.
    """
    return _Parser(text).parse()
