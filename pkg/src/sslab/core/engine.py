"""Exact evaluation of rule machines.

A running element is a *configuration*: a tuple of items ``(letter, buffer)``
ordered like the group word (the rightmost item reads the input first).
An item whose buffer is non-empty has read letters but not yet found a
matching window.  A configuration with all buffers empty is an ordinary
section, i.e. a group word.
"""

from __future__ import annotations

from typing import Iterable

from .. import caps
from ..errors import (
    CapExceeded,
    InadmissibleWord,
    NeedsMoreLetters,
    NonUniformMachine,
    NotEventuallyPeriodic,
    ValidationError,
)
from ..words import GroupWord, Letter, RaySpec, reduce_letters
from .machine import _NEED, MachineDef, Rule, letters_of

Item = tuple[Letter, tuple[str, ...]]
Config = tuple[Item, ...]


# -- configurations --------------------------------------------------------


def start_config(word) -> Config:
    return tuple((l, ()) for l in reduce_letters(letters_of(word)))


def _norm(items: Iterable[Item]) -> Config:
    stack: list[Item] = []
    for it in items:
        if (
            stack
            and not it[1]
            and not stack[-1][1]
            and stack[-1][0][0] == it[0][0]
            and stack[-1][0][1] == -it[0][1]
        ):
            stack.pop()
        else:
            stack.append(it)
    return tuple(stack)


def _feed_item(m: MachineDef, letter: Letter, buf, inp):
    buf = buf + inp
    table, maxw = m.match_table(letter)
    rule = None
    for n in range(1, min(len(buf), maxw) + 1):
        hit = table.get(buf[:n])
        if hit is None:
            raise InadmissibleWord(
                f"no rule of {_letter_str(letter)} matches {' '.join(buf)!r}"
            )
        if hit is not _NEED:
            rule = hit
            break
    if rule is None:
        return ((letter, buf),), ()
    rest = buf[len(rule.output):]
    sub = tuple((l, ()) for l in rule.next)
    if rest:
        sub, out = _feed(m, sub, rest)
        return sub, rule.output + out
    return sub, rule.output


def _feed(m: MachineDef, items: Config, inp: tuple[str, ...]):
    """Push input letters through a configuration; return (config, emitted)."""
    stream = inp
    groups = []
    for letter, buf in reversed(items):
        if not stream:
            groups.append(((letter, buf),))
            continue
        new, stream = _feed_item(m, letter, buf, stream)
        groups.append(new)
    flat = [it for g in reversed(groups) for it in g]
    return _norm(flat), stream


def buffered(cfg: Config) -> int:
    return sum(len(b) for _, b in cfg)


def config_word(cfg: Config) -> GroupWord:
    if buffered(cfg):
        raise ValueError("configuration has pending letters")
    return GroupWord(reduce_letters(l for l, _ in cfg))


def config_str(cfg: Config) -> str:
    if not cfg:
        return "e"
    parts = []
    for l, b in cfg:
        s = _letter_str(l)
        if b:
            s += "[" + " ".join(b) + "]"
        parts.append(s)
    return " ".join(parts)


def _letter_str(l: Letter) -> str:
    return l[0] if l[1] == 1 else f"{l[0]}^-1"


def _check_input(m, v, level, last):
    if not m.is_admissible(v, level, last):
        raise InadmissibleWord(f"word {' '.join(v)!r} is not admissible")


def run(m: MachineDef, g, v, level: int = 0, last: str | None = None):
    """Feed the finite word ``v``; return (emitted output, residual configuration)."""
    v = tuple(v)
    _check_input(m, v, level, last)
    return _run_cfg(m, start_config(g), v)


def _run_cfg(m, cfg, v):
    out: list[str] = []
    for x in v:
        cfg, o = _feed(m, cfg, (x,))
        out.extend(o)
    return tuple(out), cfg


def _need_bound(m, cfg, n):
    extra = 0
    for letter, buf in cfg:
        if buf:
            extra = max(extra, m.match_table(letter)[1] - len(buf))
    return n + max(extra, 1)


# -- evaluation --------------------------------------------------------------


def apply_word(m: MachineDef, g, v, level: int = 0, last: str | None = None) -> tuple[str, ...]:
    """Image of the finite word ``v``; raises NeedsMoreLetters on unresolved lookahead."""
    out, cfg = run(m, g, v, level, last)
    if buffered(cfg):
        raise NeedsMoreLetters(
            "lookahead reaches past the end of the word", _need_bound(m, cfg, len(v))
        )
    return out


def apply_prefix(m: MachineDef, g, v, level: int = 0, last: str | None = None) -> tuple[str, ...]:
    """Longest prefix of the image of every continuation of ``v`` that ``v`` determines."""
    return run(m, g, v, level, last)[0]


def section_of(m: MachineDef, g, v, level: int = 0, last: str | None = None) -> GroupWord:
    out, cfg = run(m, g, v, level, last)
    if buffered(cfg):
        raise NeedsMoreLetters(
            "section is not determined by this prefix", _need_bound(m, cfg, len(v))
        )
    return config_word(cfg)


def residual(m: MachineDef, g, v, level: int = 0, last: str | None = None):
    """(emitted output, configuration) after reading ``v``; never raises on lookahead."""
    return run(m, g, v, level, last)


# -- triviality / equality ---------------------------------------------------


def _explore(m: MachineDef, cfg: Config, last, level: int, depth: int | None):
    """Check that ``cfg`` maps every admissible continuation ``x`` to ``u·x``
    for one fixed word ``u`` of length ``buffered(cfg)``.

    With ``depth`` set only the first ``depth`` output letters are checked.
    Returns (verdict, u-prefix found).
    """
    track = m.subshift is not None
    period = m.alphabet.period
    B = buffered(cfg)
    u: list[str] = []
    cap = caps.get("closure") * 64
    seen: set = set()
    stack = [(cfg, (), 0, last if track else None, level, depth)]
    while stack:
        cfg, queue, j, prev, lev, rem = stack.pop()
        if rem is not None and rem <= 0:
            continue
        if not cfg and not queue and j == B:
            continue
        key = (cfg, queue, j, prev, lev % period, lev == 0, rem)
        if key in seen:
            continue
        seen.add(key)
        if len(seen) > cap:
            raise CapExceeded(f"identity check exceeded {cap} states")
        for y in m.next_symbols(prev, lev):
            ncfg, out = _feed(m, cfg, (y,))
            q = queue + (y,)
            jj, r = j, rem
            for o in out:
                if r is not None and r <= 0:
                    break
                if jj < B:
                    if jj < len(u):
                        if u[jj] != o:
                            return False, tuple(u)
                    else:
                        u.append(o)
                    jj += 1
                else:
                    if q[0] != o:
                        return False, tuple(u)
                    q = q[1:]
                if r is not None:
                    r -= 1
            stack.append((ncfg, q, jj, y if track else None, lev + 1, r))
    return True, tuple(u)


def is_clean(m: MachineDef, cfg: Config, last=None, level: int = 0, depth: int | None = None) -> bool:
    """True when the configuration is a pure prefix exchange followed by the identity."""
    if not cfg:
        return True
    key = ("clean", cfg, last if m.subshift else None, level % m.alphabet.period, level == 0, depth)
    hit = m._cache.get(key)
    if hit is None:
        hit = _explore(m, cfg, last, level, depth)[0]
        with m._lock:
            m._cache[key] = hit
    return hit


def is_trivial_to_depth(m: MachineDef, g, n: int) -> bool:
    """True iff ``g`` fixes every admissible word of length ``n``."""
    if n < 0:
        raise ValueError("depth must be non-negative")
    cfg = start_config(g)
    if not cfg or n == 0:
        return True
    key = ("trivial_to", cfg, n)
    hit = m._cache.get(key)
    if hit is None:
        hit = _explore(m, cfg, None, 0, n)[0]
        with m._lock:
            m._cache[key] = hit
    return hit


def is_trivial(m: MachineDef, g) -> bool:
    """Exact triviality on the whole boundary (finite-state machines)."""
    cfg = start_config(g)
    if not cfg:
        return True
    return is_clean(m, cfg, None, 0)


def equals_exact(m: MachineDef, g, h) -> bool:
    """Decide whether ``g`` and ``h`` induce the same homeomorphism."""
    if not m.uniform:
        raise NonUniformMachine("exact equality needs a level-homogeneous alphabet")
    g = GroupWord(letters_of(g))
    h = GroupWord(letters_of(h))
    return is_trivial(m, g * h.inverse())


# -- closure ----------------------------------------------------------------


def state_closure(m: MachineDef, gens=None, include_inverses: bool = False) -> set[GroupWord]:
    """Reduced section words reachable from the generators.

    Buffered intermediate configurations are walked through but not reported.
    """
    if gens is None:
        gens = [GroupWord.gen(n) for n in m.names]
    else:
        gens = [GroupWord(letters_of(g)) for g in gens]
    if include_inverses:
        gens = gens + [g.inverse() for g in gens]
    cap = caps.get("closure")
    track = m.subshift is not None
    period = m.alphabet.period
    words: set[GroupWord] = set()
    seen: set = set()
    stack = []
    for g in gens:
        stack.append((start_config(g), None, 0))
    while stack:
        cfg, prev, lev = stack.pop()
        key = (cfg, prev, lev % period, lev == 0)
        if key in seen:
            continue
        seen.add(key)
        if not buffered(cfg):
            words.add(config_word(cfg))
            if len(words) > cap:
                raise CapExceeded(f"state closure exceeded {cap} states")
        if len(seen) > cap * 16:
            raise CapExceeded("state closure exceeded the configuration cap")
        if not cfg:
            continue
        for y in m.next_symbols(prev, lev):
            ncfg, _ = _feed(m, cfg, (y,))
            stack.append((ncfg, y if track else None, lev + 1))
    return words


# -- rays --------------------------------------------------------------------


def apply_ray(m: MachineDef, g, ray: RaySpec, level: int = 0) -> RaySpec:
    """Exact image of an eventually periodic ray, in canonical form."""
    period_len = m.alphabet.period
    probe = ray.prefix + ray.period * (period_len + 1)
    if not m.is_admissible(probe, level):
        raise InadmissibleWord(f"ray {ray} is not admissible")
    cfg = start_config(g)
    if not cfg:
        return ray.canonical()
    out: list[str] = []
    for i, x in enumerate(ray.prefix):
        cfg, o = _feed(m, cfg, (x,))
        out.extend(o)
        if not cfg:
            return RaySpec(tuple(out) + ray.prefix[i + 1:], ray.period).canonical()
    seen: dict = {}
    pos = level + len(ray.prefix)
    limit = caps.get("ray_cycles")
    for _ in range(limit):
        key = (cfg, pos % period_len)
        if key in seen:
            i = seen[key]
            image = RaySpec(tuple(out[:i]), tuple(out[i:])).canonical()
            return image
        seen[key] = len(out)
        for x in ray.period:
            cfg, o = _feed(m, cfg, (x,))
            out.extend(o)
        pos += len(ray.period)
    raise NotEventuallyPeriodic(
        f"no repeated state after {limit} periods of {ray}; use finite truncations"
    )


# -- inverses -----------------------------------------------------------------


def _images(m: MachineDef, name: str, rule: Rule, M: int):
    k = rule.consumed
    if M <= k:
        return {rule.output[:M]}
    need = M - k
    home = m.homes.get(name, 0)
    last = rule.window[k - 1] if m.subshift else None
    lookahead = rule.window[k:]
    extra = max(len(lookahead), 1)
    for _ in range(8):
        imgs = set()
        short = False
        for c in m.words(max(need + extra, len(lookahead)), level=home + k, last=last, start=lookahead):
            out = _run_cfg(m, start_config(rule.next), c)[0]
            if len(out) < need:
                short = True
                break
            imgs.add(rule.output + out[:need])
        if not short:
            return imgs
        extra += 2
    raise ValidationError(f"cannot resolve images of a rule of {name!r}")


def derive_inverse(m: MachineDef, name: str) -> tuple[Rule, ...]:
    """Rules of the formal inverse ``name^-1``."""
    key = ("inverse", name)
    hit = m._cache.get(key)
    if hit is not None:
        return hit
    busy = m._cache.setdefault("inverse_busy", set())
    if name in busy:
        raise ValidationError(f"inverse of {name!r} depends on itself through lookahead")
    busy.add(name)
    try:
        rules = m.generators[name]
        top = m.max_window() + 6
        images = None
        for M in range(1, top + 1):
            images = [_images(m, name, r, M) for r in rules]
            owner: dict = {}
            clash = False
            for i, imgs in enumerate(images):
                for s in imgs:
                    if owner.setdefault(s, i) != i:
                        clash = True
            if not clash:
                break
        else:
            raise ValidationError(f"generator {name!r} is not injective")
        inverse = []
        for i, r in enumerate(rules):
            others = [s for j, imgs in enumerate(images) if j != i for s in imgs]
            windows = set()
            for s in images[i]:
                for ell in range(r.consumed, len(s) + 1):
                    if not any(t[:ell] == s[:ell] for t in others):
                        windows.add(s[:ell])
                        break
            minimal = [
                w for w in windows
                if not any(o != w and w[:len(o)] == o for o in windows)
            ]
            inv_next = tuple((n, -s) for n, s in reversed(r.next))
            for w in sorted(minimal):
                inverse.append(Rule(w, r.window[:r.consumed], inv_next))
        result = tuple(sorted(inverse, key=lambda r: r.window))
    finally:
        busy.discard(name)
    with m._lock:
        m._cache[key] = result
    return result


# -- validation -----------------------------------------------------------------


def _context_words(m: MachineDef, n: int, level: int):
    """Locally admissible words of length ``n`` that may start at ``level``."""
    if m.subshift is None:
        yield from m.words(n, level)
        return
    firsts = set(m.next_symbols(None, level if level else 0))
    if level == 0:
        firsts |= {b for _, b in m.subshift.allowed}
    for x in m.alphabet.at(level):
        if x in firsts:
            yield from m.words(n, level, None, start=(x,)) if n > 1 else iter([(x,)])


def _check_subshift(m: MachineDef):
    sub = m.subshift
    if sub is None:
        return
    symbols = set(m.alphabet.symbols())
    bad = set(sub.initials) - symbols
    for a, b in sub.allowed:
        bad |= {a, b} - symbols
    if bad:
        raise ValidationError(f"subshift uses unknown symbols {sorted(bad)}")
    if not sub.initials:
        raise ValidationError("subshift has no initial symbols")
    alive = symbols
    while True:
        nxt = {x for x in alive if sub.successors(x) & alive}
        if nxt == alive:
            break
        alive = nxt
    reach = set(sub.initials)
    frontier = list(reach)
    while frontier:
        x = frontier.pop()
        for y in sub.successors(x):
            if y not in reach:
                reach.add(y)
                frontier.append(y)
    dead = reach - alive
    if dead:
        raise ValidationError(f"subshift has dead ends at {sorted(dead)}")


def validate(m: MachineDef, depth: int | None = None) -> MachineDef:
    """Structural and exhaustive checks; raises ValidationError."""
    _check_subshift(m)
    period = m.alphabet.period
    for name, rules in m.generators.items():
        if not rules:
            raise ValidationError(f"generator {name!r} has no rules")
        home = m.homes.get(name, 0)
        windows = []
        for r in rules:
            for i, x in enumerate(r.window):
                if x not in m.alphabet.at(home + i):
                    raise ValidationError(f"{name}: window symbol {x!r} not in level {home + i}")
            for i, x in enumerate(r.output):
                if x not in m.alphabet.at(home + i):
                    raise ValidationError(f"{name}: output symbol {x!r} not in level {home + i}")
            for n, _ in r.next:
                if n not in m.generators:
                    raise ValidationError(f"{name}: unknown generator {n!r} in rule")
                if period > 1 and m.homes[n] != (home + r.consumed) % period:
                    raise ValidationError(
                        f"{name}: section {n!r} lives at level {m.homes[n]}, "
                        f"expected {(home + r.consumed) % period}"
                    )
            windows.append(r.window)
        for w in windows:
            for o in windows:
                if o is not w and len(o) <= len(w) and w[:len(o)] == o:
                    raise ValidationError(f"{name}: windows {o} and {w} overlap")
        width = max(len(w) for w in windows)
        wset = set(windows)
        for v in _context_words(m, width, home):
            hits = [v[:i] for i in range(1, width + 1) if v[:i] in wset]
            if len(hits) != 1:
                raise ValidationError(
                    f"{name}: windows are not a complete prefix code "
                    f"(word {' '.join(v)!r} matched {len(hits)} rules)"
                )
    for name in m.names:
        derive_inverse(m, name)
    top = depth if depth is not None else m.max_window() + 2
    budget = 4096
    for name in m.names:
        home = m.homes.get(name, 0)
        if home:
            continue
        g = GroupWord.gen(name)
        gi = g.inverse()
        for n in range(1, top + 1):
            if m.count_words(n) > budget:
                break
            for v in m.words(n):
                for a, b in ((g, gi), (gi, g)):
                    try:
                        img = apply_prefix(m, a, v)
                    except InadmissibleWord as exc:
                        raise ValidationError(f"{name}: {exc}") from None
                    if not m.is_admissible(img):
                        raise ValidationError(
                            f"{name}: image of {' '.join(v)!r} leaves the subshift"
                        )
                    back = apply_prefix(m, b, img) if img else ()
                    if back != v[:len(back)]:
                        raise ValidationError(
                            f"{name}: level map is not bijective at {' '.join(v)!r}"
                        )
    return m


# -- whole-level permutations ---------------------------------------------------------


def level_permutation(m: MachineDef, g, n: int):
    """Image indices of all level-n words of a tree machine without subshift.

    Words are indexed in ``m.words(n)`` order (first letter most
    significant).  Returns a numpy integer array.
    """
    import numpy as np

    if m.subshift is not None:
        raise NonUniformMachine("level permutations need a full tree (no subshift)")
    if m.count_words(n) > caps.get("level"):
        raise CapExceeded(f"level {n} has more than {caps.get('level')} words")
    memo: dict = {}

    def perm(cfg: Config, lev: int, k: int):
        if k == 0:
            return np.zeros(1, dtype=np.int64)
        key = (cfg, lev % m.alphabet.period, k)
        hit = memo.get(key)
        if hit is not None:
            return hit
        syms = m.alphabet.at(lev)
        block = m.count_words_at(lev + 1, k - 1)
        if not cfg:
            out = np.arange(len(syms) * block, dtype=np.int64)
        else:
            parts = []
            for y in syms:
                ncfg, o = _feed(m, cfg, (y,))
                if buffered(ncfg) or len(o) != 1:
                    raise NeedsMoreLetters("element does not act letter by letter on the tree")
                parts.append(syms.index(o[0]) * block + perm(ncfg, lev + 1, k - 1))
            out = np.concatenate(parts)
        memo[key] = out
        return out

    return perm(start_config(g), 0, n)


def permutation_order(perm) -> int:
    """Order of a permutation given as an image array."""
    import math

    import numpy as np

    perm = np.asarray(perm)
    seen = np.zeros(len(perm), dtype=bool)
    order = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        length, j = 0, i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        order = order * length // math.gcd(order, length)
    return order
