"""Machine definitions and the alphabets and rules they are built from."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from ..errors import ValidationError
from ..words import GroupWord, Letter


@dataclass(frozen=True)
class Alphabet:
    """Per-level symbol sets; the level list repeats periodically."""

    levels: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.levels:
            raise ValidationError("alphabet has no levels")
        for i, lev in enumerate(self.levels):
            if not lev:
                raise ValidationError(f"alphabet level {i} is empty")
            if len(set(lev)) != len(lev):
                raise ValidationError(f"alphabet level {i} repeats a symbol")
            for s in lev:
                if not s or any(c in s for c in " \t:.;()#~") or s.startswith("-"):
                    raise ValidationError(f"bad symbol {s!r}")

    @classmethod
    def of(cls, symbols: Iterable[str]) -> Alphabet:
        return cls((tuple(symbols),))

    @property
    def uniform(self) -> bool:
        return all(lev == self.levels[0] for lev in self.levels)

    @property
    def period(self) -> int:
        return len(self.levels)

    def at(self, level: int) -> tuple[str, ...]:
        return self.levels[level % len(self.levels)]

    def symbols(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for lev in self.levels:
            for s in lev:
                seen.setdefault(s)
        return tuple(seen)

    def index(self, level: int, symbol: str) -> int:
        return self.at(level).index(symbol)


@dataclass(frozen=True)
class Subshift:
    """Allowed first symbols and allowed consecutive pairs."""

    initials: frozenset[str]
    allowed: frozenset[tuple[str, str]]

    @cached_property
    def _succ(self) -> dict[str, frozenset[str]]:
        table: dict[str, set[str]] = {}
        for a, b in self.allowed:
            table.setdefault(a, set()).add(b)
        return {a: frozenset(bs) for a, bs in table.items()}

    def successors(self, x: str) -> frozenset[str]:
        return self._succ.get(x, frozenset())


@dataclass(frozen=True)
class Rule:
    """Read ``window``, write ``output`` over the first ``len(output)`` letters,
    continue with ``next`` on the rest."""

    window: tuple[str, ...]
    output: tuple[str, ...]
    next: tuple[Letter, ...] = ()

    def __post_init__(self):
        if not self.output:
            raise ValidationError("rule must consume at least one letter")
        if len(self.output) > len(self.window):
            raise ValidationError(
                f"rule window {self.window} shorter than output {self.output}"
            )

    @property
    def consumed(self) -> int:
        return len(self.output)

    @property
    def next_word(self) -> GroupWord:
        return GroupWord(self.next)


_NEED = "need"


@dataclass(eq=False)
class MachineDef:
    """A finite system of synchronous prefix-rewriting rules.

    Instances are treated as immutable after construction; internal memo
    caches are guarded by a lock.
    """

    alphabet: Alphabet
    generators: Mapping[str, tuple[Rule, ...]]
    subshift: Subshift | None = None
    homes: Mapping[str, int] = field(default_factory=dict)
    aliases: Mapping[str, str] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.alphabet.uniform and self.alphabet.period > 1:
            self.alphabet = Alphabet((self.alphabet.levels[0],))
        self.generators = {n: tuple(rs) for n, rs in sorted(self.generators.items())}
        self.homes = {n: self.homes.get(n, 0) % self.alphabet.period for n in self.generators}
        self.aliases = dict(self.aliases)

    def _content(self):
        return (self.alphabet, self.generators, self.subshift, self.homes, self.aliases)

    def __eq__(self, other):
        if not isinstance(other, MachineDef):
            return NotImplemented
        return self._content() == other._content()

    def __hash__(self):
        return hash((self.alphabet, self.names))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.generators)

    @property
    def uniform(self) -> bool:
        return self.alphabet.period == 1

    def max_window(self) -> int:
        return max((len(r.window) for rs in self.generators.values() for r in rs), default=1)

    def has_lookahead(self) -> bool:
        """True when some rule is not a plain one-letter tree rule."""
        return any(
            len(r.window) != 1 for rs in self.generators.values() for r in rs
        )

    def word(self, text: str) -> GroupWord:
        return GroupWord.parse(text, self.names)

    def home_of(self, word) -> int:
        """Level at which every letter of ``word`` acts (0 for the identity)."""
        homes = {self.homes.get(n, 0) for n, _ in letters_of(word)}
        if len(homes) > 1:
            raise ValidationError(f"word mixes generators living at levels {sorted(homes)}")
        return homes.pop() if homes else 0

    # -- admissibility -------------------------------------------------

    def next_symbols(self, last: str | None, level: int) -> tuple[str, ...]:
        key = (last, level % self.alphabet.period, level == 0)
        table = self._cache.setdefault("next_symbols", {})
        hit = table.get(key)
        if hit is None:
            hit = table[key] = self._next_symbols(last, level)
        return hit

    def _next_symbols(self, last, level):
        syms = self.alphabet.at(level)
        if self.subshift is None:
            return syms
        if last is None:
            if level == 0:
                return tuple(s for s in syms if s in self.subshift.initials)
            targets = {b for _, b in self.subshift.allowed} | set(self.subshift.initials)
            return tuple(s for s in syms if s in targets)
        succ = self.subshift.successors(last)
        return tuple(s for s in syms if s in succ)

    def is_admissible(self, word, level: int = 0, last: str | None = None) -> bool:
        prev = last
        for i, x in enumerate(word):
            if x not in self.next_symbols(prev, level + i):
                return False
            prev = x
        return True

    def words(self, n: int, level: int = 0, last: str | None = None,
              start: tuple[str, ...] = ()) -> Iterator[tuple[str, ...]]:
        """Admissible words of length ``n`` (beginning with ``start``), in canonical order."""
        if start:
            if not self.is_admissible(start, level, last):
                return
            if len(start) >= n:
                yield tuple(start[:n])
                return
            for tail in self.words(n - len(start), level + len(start), start[-1]):
                yield tuple(start) + tail
            return
        if n == 0:
            yield ()
            return
        for x in self.next_symbols(last, level):
            for tail in self.words(n - 1, level + 1, x if self.subshift else None):
                yield (x,) + tail

    def count_words_at(self, level: int, n: int) -> int:
        """Number of words of length ``n`` starting at ``level`` (no subshift)."""
        total = 1
        for i in range(n):
            total *= len(self.alphabet.at(level + i))
        return total

    def count_words(self, n: int) -> int:
        if self.subshift is None:
            total = 1
            for i in range(n):
                total *= len(self.alphabet.at(i))
            return total
        counts = {x: 1 for x in self.next_symbols(None, 0)}
        for i in range(1, n):
            nxt: dict[str, int] = {}
            for x, c in counts.items():
                for y in self.next_symbols(x, i):
                    nxt[y] = nxt.get(y, 0) + c
            counts = nxt
        return sum(counts.values()) if n else 1

    # -- rule lookup ------------------------------------------------------

    def rules(self, letter: Letter) -> tuple[Rule, ...]:
        name, sign = letter
        if name not in self.generators:
            raise ValidationError(f"unknown generator {name!r}")
        if sign == 1:
            return self.generators[name]
        from .engine import derive_inverse

        return derive_inverse(self, name)

    def match_table(self, letter: Letter) -> tuple[dict, int]:
        key = ("match", letter)
        table = self._cache.get(key)
        if table is None:
            rules = self.rules(letter)
            tab: dict = {}
            for r in rules:
                for i in range(1, len(r.window)):
                    tab.setdefault(r.window[:i], _NEED)
                tab[r.window] = r
            table = (tab, max(len(r.window) for r in rules))
            with self._lock:
                self._cache[key] = table
        return table


def letters_of(word) -> tuple[Letter, ...]:
    if isinstance(word, GroupWord):
        return word.letters
    return tuple(word)


def product_words(n_levels: int, alphabet: Alphabet) -> Iterator[tuple[str, ...]]:
    return itertools.product(*(alphabet.at(i) for i in range(n_levels)))
