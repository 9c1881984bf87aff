"""Group words, eventually periodic rays and symbol tokenization."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ParseError

Letter = tuple[str, int]

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def tokenize(text: str, symbols: Iterable[str]) -> tuple[str, ...]:
    """Split ``text`` into symbols by greedy longest match; whitespace separates."""
    ordered = sorted(set(symbols), key=len, reverse=True)
    out = []
    for chunk in text.split():
        i = 0
        while i < len(chunk):
            for s in ordered:
                if chunk.startswith(s, i):
                    out.append(s)
                    i += len(s)
                    break
            else:
                raise ParseError(f"unknown symbol at {chunk[i:]!r} in {text!r}")
    return tuple(out)


def symbols_text(seq: Sequence[str]) -> str:
    if all(len(s) == 1 for s in seq):
        return "".join(seq)
    return " ".join(seq)


def reduce_letters(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for name, sign in letters:
        if stack and stack[-1][0] == name and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((name, sign))
    return tuple(stack)


@dataclass(frozen=True)
class GroupWord:
    """Product of signed generators; the rightmost letter acts first."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        for name, sign in self.letters:
            if sign not in (1, -1):
                raise ValueError(f"bad sign {sign} for {name}")

    @classmethod
    def identity(cls) -> GroupWord:
        return cls(())

    @classmethod
    def gen(cls, name: str, sign: int = 1) -> GroupWord:
        return cls(((name, sign),))

    @classmethod
    def parse(cls, text: str, names: Iterable[str] | None = None) -> GroupWord:
        """Parse ``"a b^-1"``, ``"a ~b"`` or a juxtaposition like ``"cc'abb'"``.

        Juxtaposed names are split greedily when ``names`` is given.  ``1``
        denotes the identity, and so does ``e`` unless it is a generator name.
        """
        known = sorted(set(names), key=len, reverse=True) if names is not None else None
        identity = {"1", "ε"} if known is not None and "e" in known else {"e", "1", "ε"}
        letters: list[Letter] = []
        for tok in text.replace("·", " ").replace("*", " ").split():
            if tok in identity:
                continue
            letters.extend(_parse_token(tok, known))
        return cls(tuple(letters))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other: GroupWord) -> GroupWord:
        return GroupWord(self.letters + other.letters)

    def __pow__(self, k: int) -> GroupWord:
        if k < 0:
            return self.inverse() ** (-k)
        return GroupWord(self.letters * k)

    def inverse(self) -> GroupWord:
        return GroupWord(tuple((n, -s) for n, s in reversed(self.letters)))

    def reduced(self) -> GroupWord:
        return GroupWord(reduce_letters(self.letters))

    def names(self) -> set[str]:
        return {n for n, _ in self.letters}

    def __str__(self):
        if not self.letters:
            return "e"
        return " ".join(n if s == 1 else f"{n}^-1" for n, s in self.letters)

    def doc(self) -> str:
        """Machine-document spelling (``~`` marks inverses)."""
        if not self.letters:
            return "e"
        return " ".join(n if s == 1 else f"~{n}" for n, s in self.letters)


def _parse_token(tok: str, known):
    sign = 1
    if tok.endswith("^-1"):
        sign, tok = -1, tok[:-3]
    elif tok.endswith("^1"):
        tok = tok[:-2]
    letters = []
    i = 0
    while i < len(tok):
        inv = 1
        if tok[i] == "~":
            inv, i = -1, i + 1
        if known is None:
            m = _NAME.match(tok, i)
            if not m:
                raise ParseError(f"bad generator token {tok!r}")
            name = m.group(0)
        else:
            for name in known:
                if tok.startswith(name, i):
                    break
            else:
                raise ParseError(f"unknown generator at {tok[i:]!r}")
        letters.append((name, inv))
        i += len(name)
    if sign == -1:
        if len(letters) != 1:
            raise ParseError(f"^-1 applies to a single generator, got {tok!r}")
        letters = [(letters[0][0], -letters[0][1])]
    return letters


def _primitive_root(period: tuple) -> tuple:
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period[:d] * (n // d) == period:
            return period[:d]
    return period


@dataclass(frozen=True)
class RaySpec:
    """Eventually periodic ray ``prefix · period^ω``."""

    prefix: tuple[str, ...]
    period: tuple[str, ...]

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be non-empty")

    @classmethod
    def of(cls, prefix: Sequence[str], period: Sequence[str]) -> RaySpec:
        return cls(tuple(prefix), tuple(period)).canonical()

    @classmethod
    def parse(cls, text: str, symbols: Iterable[str]) -> RaySpec:
        """Parse ``prefix:period``."""
        head, sep, tail = text.partition(":")
        if not sep:
            raise ParseError(f"ray {text!r} needs 'prefix:period'")
        symbols = list(symbols)
        return cls.of(tokenize(head, symbols), tokenize(tail, symbols))

    def canonical(self) -> RaySpec:
        period = _primitive_root(self.period)
        prefix = list(self.prefix)
        while prefix and prefix[-1] == period[-1]:
            prefix.pop()
            period = (period[-1],) + period[:-1]
        return RaySpec(tuple(prefix), period)

    def letter(self, i: int) -> str:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def take(self, n: int) -> tuple[str, ...]:
        return tuple(self.letter(i) for i in range(n))

    def drop(self, n: int) -> RaySpec:
        """Tail after the first ``n`` letters."""
        if n <= len(self.prefix):
            return RaySpec(self.prefix[n:], self.period).canonical()
        k = (n - len(self.prefix)) % len(self.period)
        return RaySpec((), self.period[k:] + self.period[:k]).canonical()

    def with_prefix(self, head: Sequence[str], n: int) -> RaySpec:
        """Replace the first ``n`` letters by ``head``."""
        tail = self.drop(n)
        return RaySpec(tuple(head) + tail.prefix, tail.period).canonical()

    def __str__(self):
        return f"{symbols_text(self.prefix)}:{symbols_text(self.period)}"

    def sort_key(self):
        return (len(self.prefix), self.prefix, len(self.period), self.period)
