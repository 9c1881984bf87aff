"""Machine-definition documents (line format and JSON).

Line format::

    # comment
    alphabet 0 1                      | alphabet-levels (a b) (x y z)
    subshift init a0 a1 b ; allow a0a1 a1a0 a1b ba0 ba1
    home g 1                          (level of a generator, non-uniform trees)
    alias bp b'                       (display name)
    a: 1 -> 0 . b                     (window -> output . next-word)
    b: 1 0 -> 1 . ~a b                (next-word: names, ~ for inverse, e for identity)
"""

from __future__ import annotations

import json
import re

from ..errors import ParseError, SSLabError, ValidationError
from ..words import GroupWord, tokenize
from .machine import Alphabet, MachineDef, Rule, Subshift

_RULE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:(.*)$")
_LEVELS = re.compile(r"\(([^()]*)\)")


def parse_machine(text: str, validate: bool = True) -> MachineDef:
    """Parse a document (line format or JSON) into a machine."""
    if text.lstrip().startswith("{"):
        m = _parse_json(text)
    else:
        m = _parse_lines(text)
    if validate:
        from .engine import validate as _validate

        _validate(m)
    return m


def _parse_lines(text: str) -> MachineDef:
    alphabet = None
    subshift = None
    homes: dict[str, int] = {}
    aliases: dict[str, str] = {}
    raw_rules: list[tuple[int, str, str]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        head = body.split(None, 1)[0]
        rest = body.split(None, 1)[1] if len(body.split(None, 1)) > 1 else ""
        try:
            if head == "alphabet":
                if alphabet is not None:
                    raise ParseError("alphabet given twice", lineno)
                alphabet = Alphabet.of(rest.split())
            elif head == "alphabet-levels":
                if alphabet is not None:
                    raise ParseError("alphabet given twice", lineno)
                groups = _LEVELS.findall(rest)
                if not groups or _LEVELS.sub("", rest).strip():
                    raise ParseError("expected '(s1 s2 ...) (...)'", lineno, len(head) + 2)
                alphabet = Alphabet(tuple(tuple(g.split()) for g in groups))
            elif head == "subshift":
                if alphabet is None:
                    raise ParseError("subshift before alphabet", lineno)
                subshift = _parse_subshift(rest, alphabet, lineno)
            elif head == "home":
                parts = rest.split()
                if len(parts) != 2 or not parts[1].lstrip("-").isdigit():
                    raise ParseError("expected 'home <generator> <level>'", lineno)
                homes[parts[0]] = int(parts[1])
            elif head == "alias":
                parts = rest.split()
                if len(parts) != 2:
                    raise ParseError("expected 'alias <name> <display>'", lineno)
                aliases[parts[0]] = parts[1]
            else:
                mt = _RULE.match(body)
                if not mt:
                    raise ParseError(f"unrecognized line {body.strip()!r}", lineno, 1)
                raw_rules.append((lineno, mt.group(1), mt.group(2)))
        except ParseError:
            raise
        except SSLabError as exc:
            raise ParseError(str(exc), lineno) from None
    if alphabet is None:
        raise ParseError("missing alphabet line")
    names = {n for _, n, _ in raw_rules}
    generators: dict[str, list[Rule]] = {n: [] for n in sorted(names)}
    symbols = alphabet.symbols()
    for lineno, name, body in raw_rules:
        generators[name].append(_parse_rule(body, symbols, names, lineno, len(name) + 2))
    for n in homes:
        if n not in names:
            raise ParseError(f"home for unknown generator {n!r}")
    try:
        return MachineDef(alphabet, generators, subshift, homes, aliases)
    except ValidationError as exc:
        raise ParseError(str(exc)) from None


def _parse_subshift(rest: str, alphabet: Alphabet, lineno: int) -> Subshift:
    left, sep, right = rest.partition(";")
    lw = left.split()
    rw = right.split()
    if not lw or lw[0] != "init" or not sep or not rw or rw[0] != "allow":
        raise ParseError("expected 'subshift init ... ; allow ...'", lineno)
    symbols = alphabet.symbols()
    initials = frozenset(lw[1:])
    for s in initials:
        if s not in symbols:
            raise ParseError(f"unknown symbol {s!r} in subshift", lineno)
    pairs = set()
    for tok in rw[1:]:
        try:
            pair = tokenize(tok, symbols)
        except ParseError as exc:
            raise ParseError(str(exc), lineno) from None
        if len(pair) != 2:
            raise ParseError(f"allowed pair {tok!r} must have two symbols", lineno)
        pairs.add(pair)
    return Subshift(initials, frozenset(pairs))


def _parse_rule(body: str, symbols, names, lineno: int, col: int) -> Rule:
    window_text, arrow, rhs = body.partition("->")
    if not arrow:
        raise ParseError("rule needs '->'", lineno, col)
    out_text, dot, next_text = rhs.partition(".")
    try:
        window = tokenize(window_text, symbols)
        output = tokenize(out_text, symbols)
        nxt = GroupWord.parse(next_text, names) if dot else GroupWord()
    except ParseError as exc:
        raise ParseError(str(exc), lineno, col) from None
    if not window:
        raise ParseError("empty window", lineno, col)
    try:
        return Rule(window, output, nxt.letters)
    except ValidationError as exc:
        raise ParseError(str(exc), lineno, col) from None


def _parse_json(text: str) -> MachineDef:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    try:
        if "alphabet_levels" in data:
            alphabet = Alphabet(tuple(tuple(l) for l in data["alphabet_levels"]))
        else:
            alphabet = Alphabet.of(data["alphabet"])
        sub = data.get("subshift")
        subshift = None
        if sub is not None:
            subshift = Subshift(
                frozenset(sub["init"]), frozenset(tuple(p) for p in sub["allow"])
            )
        names = set(data["generators"])
        generators = {}
        for name, rules in data["generators"].items():
            generators[name] = [
                Rule(tuple(r["window"]), tuple(r["output"]),
                     GroupWord.parse(r.get("next", ""), names).letters)
                for r in rules
            ]
        return MachineDef(alphabet, generators, subshift,
                          data.get("homes", {}), data.get("aliases", {}))
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"malformed machine JSON: {exc}") from None
    except ValidationError as exc:
        raise ParseError(str(exc)) from None


def _rule_key(m: MachineDef, name: str, rule: Rule):
    home = m.homes.get(name, 0)
    return tuple(m.alphabet.index(home + i, x) for i, x in enumerate(rule.window))


def _sym_index(m: MachineDef):
    order = {}
    for s in m.alphabet.symbols():
        order.setdefault(s, len(order))
    return order


def serialize_machine(m: MachineDef, fmt: str = "text") -> str:
    """Canonical document: generators alphabetical, rules by window."""
    if fmt == "json":
        return _serialize_json(m)
    lines = []
    if m.alphabet.period == 1:
        lines.append("alphabet " + " ".join(m.alphabet.levels[0]))
    else:
        lines.append("alphabet-levels " + " ".join(
            "(" + " ".join(l) + ")" for l in m.alphabet.levels))
    if m.subshift is not None:
        order = _sym_index(m)
        init = sorted(m.subshift.initials, key=order.__getitem__)
        allow = sorted(m.subshift.allowed, key=lambda p: (order[p[0]], order[p[1]]))
        lines.append(
            "subshift init " + " ".join(init) + " ; allow "
            + " ".join(a + b for a, b in allow)
        )
    for name in m.names:
        if m.homes.get(name, 0):
            lines.append(f"home {name} {m.homes[name]}")
    for name in sorted(m.aliases):
        lines.append(f"alias {name} {m.aliases[name]}")
    multi = any(len(s) > 1 for s in m.alphabet.symbols())
    join = " ".join if multi else "".join
    for name in m.names:
        for r in sorted(m.generators[name], key=lambda r: _rule_key(m, name, r)):
            lines.append(f"{name}: {join(r.window)} -> {join(r.output)} . {_next_doc(m, r)}")
    return "\n".join(lines) + "\n"


def _next_doc(m: MachineDef, rule: Rule) -> str:
    if not rule.next and "e" in m.generators:
        return "1"
    return GroupWord(rule.next).doc()


def _serialize_json(m: MachineDef) -> str:
    data: dict = {}
    if m.alphabet.period == 1:
        data["alphabet"] = list(m.alphabet.levels[0])
    else:
        data["alphabet_levels"] = [list(l) for l in m.alphabet.levels]
    if m.subshift is not None:
        order = _sym_index(m)
        data["subshift"] = {
            "init": sorted(m.subshift.initials, key=order.__getitem__),
            "allow": [list(p) for p in sorted(
                m.subshift.allowed, key=lambda p: (order[p[0]], order[p[1]]))],
        }
    homes = {n: h for n, h in m.homes.items() if h}
    if homes:
        data["homes"] = homes
    if m.aliases:
        data["aliases"] = dict(sorted(m.aliases.items()))
    data["generators"] = {
        name: [
            {"window": list(r.window), "output": list(r.output),
             "next": _next_doc(m, r)}
            for r in sorted(m.generators[name], key=lambda r: _rule_key(m, name, r))
        ]
        for name in m.names
    }
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


__all__ = ["parse_machine", "serialize_machine"]
