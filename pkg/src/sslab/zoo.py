"""Catalog of concrete groups and systems, each with checkable claims."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from . import caps
from .core.document import parse_machine
from .core.machine import Alphabet, MachineDef, Rule
from .errors import SSLabError, ValidationError
from .words import GroupWord, RaySpec


@dataclass(frozen=True)
class Claim:
    statement: str
    check: Callable[["ZooEntry"], bool]


@dataclass(frozen=True)
class ZooEntry:
    name: str
    machine: Any  # MachineDef, or OrderedBratteliDiagram for diagram entries
    params: dict = field(default_factory=dict)
    claims: tuple[Claim, ...] = ()
    notes: str = ""
    extras: dict = field(default_factory=dict)

    def check_claims(self) -> dict[str, bool]:
        return {c.statement: bool(c.check(self)) for c in self.claims}


class UnknownEntry(SSLabError):
    pass


# -- documents ----------------------------------------------------------------

BASILICA = """\
alphabet 0 1
a: 0 -> 1 . e
a: 1 -> 0 . b
b: 0 -> 0 . e
b: 1 -> 1 . a
"""

GRIGORCHUK = """\
alphabet 0 1
a: 0 -> 1 . e
a: 1 -> 0 . e
b: 0 -> 0 . a
b: 1 -> 1 . c
c: 0 -> 0 . a
c: 1 -> 1 . d
d: 0 -> 0 . e
d: 1 -> 1 . b
"""

HENON = """\
alphabet 0 1
alias t τ
alpha: 0 -> 1 . ~alpha
alpha: 1 -> 0 . beta
beta: 0 -> 1 . gamma
beta: 1 -> 0 . t
gamma: 00 -> 11 . ~t
gamma: 01 -> 01 . e
gamma: 10 -> 10 . e
gamma: 11 -> 00 . t
t: 0 -> 1 . e
t: 1 -> 0 . t
"""

MATING_IMG = """\
alphabet 0 1
alias bp b′
alias cp c′
a: 0 -> 1 . e
a: 1 -> 0 . e
b: 0 -> 0 . e
b: 1 -> 1 . a
bp: 0 -> 0 . c cp a b bp
bp: 1 -> 1 . e
c: 0 -> 0 . c
c: 1 -> 1 . b
cp: 0 -> 0 . cp
cp: 1 -> 1 . bp
"""

# Shift on itineraries, split into involutions supported on cylinders.
# tau(a1 w) = b w when w starts with a0: the letter after a1 is then
# grouped with it, so nothing below the first level changes.
FIBONACCI = """\
alphabet a0 a1 b
subshift init a0 a1 b ; allow a0a1 a1a0 a1b ba0 ba1
alias t τ
alias alpha0 α0
alias alpha1 α1
alias beta β
t: a0 -> b . e
t: a1 a0 -> b . e
t: a1 b -> a0 . t
t: b -> a1 . t
alpha0: a0 -> b . e
alpha0: a1 -> a1 . e
alpha0: b a0 -> b . e
alpha0: b a1 -> a0 . e
alpha1: a0 -> a1 . ~t
alpha1: a1 a0 -> b . e
alpha1: a1 b -> a0 . t
alpha1: b a0 -> a1 . e
alpha1: b a1 -> b . e
beta: a0 -> a0 . e
beta: a1 -> b . ~t
beta: b -> a1 . t
"""

PENROSE = """\
alphabet a b c
subshift init a b c ; allow aa ab ac bb bc ca cb cc
L: a a -> b . S
L: a b -> a . M
L: a c -> a . M
L: b b -> b . S
L: b c -> a . S
L: c -> c . L
M: a -> a . L
M: b -> c . e
M: c a -> c . M
M: c b -> b . e
M: c c -> b . e
S: a -> c . e
S: b -> b . M
S: c -> a . e
"""

PENROSE_PRIME = """\
alphabet a b c
subshift init a b c ; allow aa ab ac bb bc ca cb cc
alias Lp L′
alias Mp M′
alias Sp S′
Lp: a a -> b . Sp
Lp: a b -> a . e
Lp: a c -> a . e
Lp: b b -> b . Sp
Lp: b c -> a . Sp
Lp: c -> c . Lp
Mp: a -> a . e
Mp: b -> c . e
Mp: c a -> c . Mp
Mp: c b -> b . e
Mp: c c -> b . e
Sp: a -> c . e
Sp: b -> b . Mp
Sp: c -> a . e
"""

# n -> n + 1 and 2^m(2k+1) -> 2^m(2k+3) on 2-adic digits, least significant first.
ZB_LINE = """\
alphabet 0 1
a: 0 -> 1 . e
a: 1 -> 0 . a
b: 0 -> 0 . b
b: 1 -> 1 . a
"""


# -- integer oracle for the line example --------------------------------------


def zb_int_a(n: int) -> int:
    return n + 1


def zb_int_b(n: int) -> int:
    if n == 0:
        return 0
    m = (n & -n).bit_length() - 1
    return n + (1 << (m + 1))


def int_to_digits(n: int, length: int) -> tuple[str, ...]:
    """Two's-complement digits of ``n`` modulo ``2**length``, least significant first."""
    r = n % (1 << length)
    return tuple(str((r >> i) & 1) for i in range(length))


def digits_to_int(digits, signed: bool = True) -> int:
    v = sum(int(d) << i for i, d in enumerate(digits))
    if signed and digits and digits[-1] == "1":
        v -= 1 << len(digits)
    return v


# -- families ---------------------------------------------------------------------


def _sequence(w) -> RaySpec:
    if isinstance(w, RaySpec):
        ray = w
    else:
        ray = RaySpec.parse(str(w), ["0", "1"])
    if set(ray.prefix + ray.period) - {"0", "1"}:
        raise ValidationError("family parameter must be a 0/1 sequence")
    return ray


def _shift_classes(ray: RaySpec) -> tuple[int, Callable[[int], int]]:
    n = len(ray.prefix) + len(ray.period)

    def nxt(i: int) -> int:
        return i + 1 if i + 1 < n else len(ray.prefix)

    return n, nxt


def poly_iteration_r(w="0:1") -> MachineDef:
    """Three bounded generators alpha_i, beta_i, gamma_i per shift s^i(w)."""
    ray = _sequence(w)
    n, nxt = _shift_classes(ray)
    g: dict[str, list[Rule]] = {}
    for i in range(n):
        j = nxt(i)
        g[f"alpha_{i}"] = [Rule(("0",), ("1",)), Rule(("1",), ("0",), ((f"gamma_{j}", 1),))]
        g[f"gamma_{i}"] = [Rule(("0",), ("0",)), Rule(("1",), ("1",), ((f"beta_{j}", 1),))]
        if ray.letter(i) == "0":
            g[f"beta_{i}"] = [Rule(("0",), ("0",), ((f"alpha_{j}", 1),)), Rule(("1",), ("1",))]
        else:
            g[f"beta_{i}"] = [Rule(("0",), ("0",)), Rule(("1",), ("1",), ((f"alpha_{j}", 1),))]
    return MachineDef(Alphabet.of("01"), g)


def poly_iteration_ab(w="0") -> MachineDef:
    """Generators a_i, b_i of the z^2 / 1 - z^2 sequence family."""
    ray = _sequence(w if ":" in str(w) else f":{w}")
    n, nxt = _shift_classes(ray)
    g: dict[str, list[Rule]] = {}
    for i in range(n):
        j = nxt(i)
        if ray.letter(i) == "0":
            g[f"a_{i}"] = [Rule(("0",), ("1",)), Rule(("1",), ("0",), ((f"b_{j}", 1),))]
            g[f"b_{i}"] = [Rule(("0",), ("0",)), Rule(("1",), ("1",), ((f"a_{j}", 1),))]
        else:
            g[f"a_{i}"] = [Rule(("0",), ("1",)), Rule(("1",), ("0",), ((f"a_{j}", 1),))]
            g[f"b_{i}"] = [Rule(("0",), ("0",)), Rule(("1",), ("1",), ((f"b_{j}", 1),))]
    return MachineDef(Alphabet.of("01"), g)


@dataclass(frozen=True)
class SegalLevel:
    """A transitive permutation group on ``symbols`` given by generator images."""

    symbols: tuple[str, ...]
    perms: tuple[tuple[str, ...], ...]  # perms[j][k] = image of symbols[k]
    x: str
    y: str


DEFAULT_SEGAL = (
    SegalLevel(("0", "1", "2"), (("1", "0", "2"), ("1", "2", "0")), "0", "1"),
    SegalLevel(("0", "1"), (("1", "0"), ("0", "1")), "0", "1"),
)


def neumann_segal(levels=DEFAULT_SEGAL) -> MachineDef:
    """Periodic level data; generators alpha_i_j (finitary) and beta_i_j (bounded)."""
    levels = tuple(levels)
    period = len(levels)
    if not period:
        raise ValidationError("need at least one level")
    if period > caps.get("instantiate"):
        raise ValidationError(f"period {period} exceeds the instantiation cap")
    k = len(levels[0].perms)
    g: dict[str, list[Rule]] = {}
    homes: dict[str, int] = {}
    for i, lev in enumerate(levels):
        if len(lev.perms) != k:
            raise ValidationError("every level needs the same number of generators")
        if lev.x == lev.y or lev.x not in lev.symbols or lev.y not in lev.symbols:
            raise ValidationError(f"level {i}: x and y must be distinct symbols")
        i1 = (i + 1) % period
        for j, perm in enumerate(lev.perms, 1):
            if sorted(perm) != sorted(lev.symbols):
                raise ValidationError(f"level {i}: generator {j} is not a permutation")
            a, b = f"alpha_{i}_{j}", f"beta_{i}_{j}"
            g[a] = [Rule((s,), (t,)) for s, t in zip(lev.symbols, perm)]
            rules = []
            for s in lev.symbols:
                if s == lev.x:
                    rules.append(Rule((s,), (s,), ((f"beta_{i1}_{j}", 1),)))
                elif s == lev.y:
                    rules.append(Rule((s,), (s,), ((f"alpha_{i1}_{j}", 1),)))
                else:
                    rules.append(Rule((s,), (s,)))
            g[b] = rules
            homes[a] = homes[b] = i
    alphabet = Alphabet(tuple(lev.symbols for lev in levels))
    return MachineDef(alphabet, g, homes=homes)


# -- entries -----------------------------------------------------------------------


def _activity(entry, word, n=None):
    from .activity import alpha_n, classify_activity, nontrivial_state_graph

    m = entry.machine
    g = m.word(word)
    if n is not None:
        return alpha_n(m, g, n)
    return classify_activity(nontrivial_state_graph(m, g))


def _at_most_linear(entry, word):
    from .activity import ActivityClass

    return _activity(entry, word) <= ActivityClass.polynomial(1)


def _kind(expected):
    def check(entry, word):
        return str(_activity(entry, word)) == expected

    return check


def _basilica(params):
    m = parse_machine(BASILICA)
    claims = (
        Claim("alpha_n(a) = 1 for n <= 16",
              lambda e: all(_activity(e, "a", n) == 1 for n in range(1, 17))),
        Claim("alpha_n(b) = 1 for n <= 16",
              lambda e: all(_activity(e, "b", n) == 1 for n in range(1, 17))),
        Claim("a is bounded", lambda e: _kind("Bounded")(e, "a")),
        Claim("b is bounded", lambda e: _kind("Bounded")(e, "b")),
    )
    return ZooEntry("basilica", m, {}, claims)


def _grigorchuk(params):
    from .core.engine import equals_exact

    m = parse_machine(GRIGORCHUK)
    claims = (
        Claim("b c d = 1", lambda e: equals_exact(e.machine, e.machine.word("b c d"), GroupWord())),
        Claim("(a d)^4 = 1", lambda e: equals_exact(e.machine, e.machine.word("a d") ** 4, GroupWord())),
        Claim("b, c, d are bounded",
              lambda e: all(_kind("Bounded")(e, x) for x in "bcd")),
    )
    return ZooEntry("grigorchuk", m, {}, claims,
                    notes="standard four-generator rules, externally sourced")


def _henon(params):
    m = parse_machine(HENON)
    claims = (
        Claim("state closure with inverses is finite",
              lambda e: _closure_size(e.machine) < caps.get("closure")),
        Claim("alpha has linear activity", lambda e: _kind("Polynomial(1)")(e, "alpha")),
        # beta only passes through gamma and t, so its activity is in fact bounded
        Claim("beta has activity at most linear",
              lambda e: _at_most_linear(e, "beta")),
        Claim("gamma is bounded", lambda e: _kind("Bounded")(e, "gamma")),
        Claim("t is bounded", lambda e: _kind("Bounded")(e, "t")),
    )
    return ZooEntry("henon", m, {}, claims)


def _closure_size(m):
    from .core.engine import state_closure

    return len(state_closure(m, include_inverses=True))


def _mating(params):
    m = parse_machine(MATING_IMG)
    B = m.word("b bp")
    C = m.word("c cp")
    # found by searching words of length <= 4 over {a, B, C}; not claimed to be
    # the generators of the index-two abelian subgroup
    pair = (m.word("a") * B, m.word("a") * C)
    return ZooEntry(
        "mating_img", m, {},
        (Claim("level orbits of {a,b,c,b',c'} and {a,B,C} agree for n <= 6",
               lambda e: _mating_orbits_agree(e.machine, 6)),
         Claim("aB and aC commute", lambda e: _commute(e.machine, *e.extras["commuting_pair"]))),
        extras={"B": B, "C": C, "commuting_pair": pair},
    )


def _commute(m, u, v):
    from .core.engine import equals_exact

    return equals_exact(m, u * v, v * u)


def _mating_orbits_agree(m, depth):
    from .schreier import level_graph, orbit_partition

    full = [m.word(x) for x in ("a", "b", "c", "bp", "cp")]
    sub = [m.word(x) for x in ("a", "b bp", "c cp")]
    return all(
        orbit_partition(level_graph(m, full, n)) == orbit_partition(level_graph(m, sub, n))
        for n in range(1, depth + 1)
    )


def _fibonacci(params):
    m = parse_machine(FIBONACCI)
    return ZooEntry(
        "fibonacci", m, {},
        (Claim("generators respect the subshift on words of length 8",
               lambda e: _respects_subshift(e.machine, 8)),),
    )


def _respects_subshift(m, n):
    from .core.engine import apply_prefix

    for g in m.names:
        for v in m.words(n):
            if not m.is_admissible(apply_prefix(m, m.word(g), v)):
                return False
    return True


def _penrose(params):
    m = parse_machine(PENROSE)
    return ZooEntry(
        "penrose", m, {},
        (Claim("generators respect the subshift on words of length 8",
               lambda e: _respects_subshift(e.machine, 8)),),
    )


def _penrose_prime(params):
    m = parse_machine(PENROSE_PRIME)
    claims = (
        Claim("M' is finitary", lambda e: _activity(e, "Mp").kind == "Finitary"),
        Claim("S' is finitary", lambda e: _activity(e, "Sp").kind == "Finitary"),
        Claim("L' is bounded", lambda e: _kind("Bounded")(e, "Lp")),
    )
    return ZooEntry("penrose_prime", m, {}, claims)


def _zb_line(params):
    m = parse_machine(ZB_LINE)
    claims = (
        Claim("b(1)=3, b(2)=6, b(0)=0",
              lambda e: (zb_int_b(1), zb_int_b(2), zb_int_b(0)) == (3, 6, 0)),
        Claim("machine agrees with the integer action on [-2^10, 2^10]",
              lambda e: zb_agrees(e.machine, 1 << 10)),
        Claim("b has linear activity", lambda e: _kind("Polynomial(1)")(e, "b")),
        Claim("a is bounded", lambda e: _kind("Bounded")(e, "a")),
    )
    return ZooEntry("zb_line", m, {}, claims,
                    extras={"int_a": zb_int_a, "int_b": zb_int_b})


def zb_agrees(m, bound: int, length: int | None = None) -> bool:
    """Compare the binary machine with the integer action on [-bound, bound]."""
    from .core.engine import apply_word

    length = length or bound.bit_length() + 4
    mod = 1 << length
    for name, f in (("a", zb_int_a), ("b", zb_int_b)):
        g = m.word(name)
        for n in range(-bound, bound + 1):
            img = apply_word(m, g, int_to_digits(n, length))
            if digits_to_int(img, signed=False) != f(n) % mod:
                return False
    return True


def _neumann_segal(params):
    m = neumann_segal(params.get("levels", DEFAULT_SEGAL))
    claims = (
        Claim("alpha generators are finitary",
              lambda e: all(_activity(e, g).kind == "Finitary"
                            for g in e.machine.names if g.startswith("alpha_0_"))),
        Claim("beta generators are bounded",
              lambda e: all(_activity(e, g).kind == "Bounded"
                            for g in e.machine.names if g.startswith("beta_0_"))),
    )
    return ZooEntry("neumann_segal", m, dict(params), claims)


def _poly_r(params):
    w = params.get("w", "0:1")
    m = poly_iteration_r(w)
    roots = ("alpha_0", "beta_0", "gamma_0")
    claims = (
        Claim("alpha_w, beta_w, gamma_w are bounded",
              lambda e: all(_kind("Bounded")(e, g) for g in roots)),
    )
    return ZooEntry("poly_iteration_r", m, {"w": str(w)}, claims)


def _poly_ab(params):
    w = params.get("w", "0")
    m = poly_iteration_ab(w)
    claims = (
        Claim("a_w, b_w are bounded",
              lambda e: all(_kind("Bounded")(e, g) for g in ("a_0", "b_0"))),
    )
    return ZooEntry("poly_iteration_ab", m, {"w": str(w)}, claims)


def _odometer(params):
    from .bratteli import odometer_diagram

    depth = int(params.get("depth", 12))
    D = odometer_diagram(depth)
    return ZooEntry(
        "odometer", D, {"depth": depth},
        (Claim("adic orbit of the minimal path has period 2^n for n <= 8",
               lambda e: all(_adic_period(e.machine, n) == 2 ** n for n in range(1, 9))),),
    )


def _adic_period(D, n):
    from .bratteli import adic_successor, extreme_path

    start = extreme_path(D, n, which="min")
    p, k = adic_successor(D, start, wrap=True), 1
    while p != start:
        p, k = adic_successor(D, p, wrap=True), k + 1
    return k


_BUILDERS = {
    "basilica": _basilica,
    "fibonacci": _fibonacci,
    "grigorchuk": _grigorchuk,
    "henon": _henon,
    "mating_img": _mating,
    "neumann_segal": _neumann_segal,
    "odometer": _odometer,
    "penrose": _penrose,
    "penrose_prime": _penrose_prime,
    "poly_iteration_ab": _poly_ab,
    "poly_iteration_r": _poly_r,
    "zb_line": _zb_line,
}


def zoo_names() -> tuple[str, ...]:
    return tuple(_BUILDERS)


def zoo_build(name: str, params: dict | None = None) -> ZooEntry:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise UnknownEntry(f"unknown zoo entry {name!r}; try one of {', '.join(_BUILDERS)}") from None
    entry = builder(dict(params or {}))
    if isinstance(entry.machine, MachineDef):
        from .core.engine import validate

        validate(entry.machine)
    return entry


def machine_entries() -> tuple[str, ...]:
    return tuple(n for n in _BUILDERS if n != "odometer")
