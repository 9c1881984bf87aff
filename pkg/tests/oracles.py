"""Reference implementations that share no code with the package.

Each oracle works from first principles, by recursion on words or by
brute-force enumeration.
"""

from fractions import Fraction
from functools import lru_cache
import itertools

# Wreath recursions as plain tables: generator -> {letter: (output, next_word)}.
# A next word is a tuple of (name, +-1); the rightmost letter acts first.
BASILICA = {
    "a": {"0": ("1", ()), "1": ("0", (("b", 1),))},
    "b": {"0": ("0", ()), "1": ("1", (("a", 1),))},
}
GRIGORCHUK = {
    "a": {"0": ("1", ()), "1": ("0", ())},
    "b": {"0": ("0", (("a", 1),)), "1": ("1", (("c", 1),))},
    "c": {"0": ("0", (("a", 1),)), "1": ("1", (("d", 1),))},
    "d": {"0": ("0", ()), "1": ("1", (("b", 1),))},
}
MATING = {
    "a": {"0": ("1", ()), "1": ("0", ())},
    "b": {"0": ("0", ()), "1": ("1", (("a", 1),))},
    "c": {"0": ("0", (("c", 1),)), "1": ("1", (("b", 1),))},
    "bp": {"0": ("0", (("c", 1), ("cp", 1), ("a", 1), ("b", 1), ("bp", 1))), "1": ("1", ())},
    "cp": {"0": ("0", (("cp", 1),)), "1": ("1", (("bp", 1),))},
}


def _letter(table, name, sign, v):
    """Image and section of a single generator (or inverse) on word v."""
    if not v:
        return (), ()
    rules = table[name]
    if sign > 0:
        x = v[0]
        out, nxt = rules[x]
    else:
        x = next(s for s, (o, _) in rules.items() if o == v[0])
        out = x
        nxt = tuple((n, -s) for n, s in reversed(rules[x][1]))
    rest = act(table, nxt, v[1:])
    return (out,) + rest, nxt


def act(table, word, v):
    """Image of the tuple v under a group word (rightmost letter first)."""
    v = tuple(v)
    for name, sign in reversed(word):
        v = _letter(table, name, sign, v)[0]
    return v


def section(table, word, v):
    """Section of ``word`` at ``v`` as a word, by pushing v through letters."""
    out = []
    v = tuple(v)
    for name, sign in reversed(word):
        sec = (((name, sign),))
        for i in range(len(v)):
            # section of a single generator word at a prefix, letter by letter
            new = []
            x = v[i]
            for n2, s2 in reversed(sec):
                rules = table[n2]
                if s2 > 0:
                    o, nxt = rules[x]
                else:
                    src = next(s for s, (o2, _) in rules.items() if o2 == x)
                    o, nxt = src, tuple((n, -s) for n, s in reversed(rules[src][1]))
                new = list(nxt) + new
                x = o
            sec = tuple(new)
        out = list(sec) + out
        v = act(table, ((name, sign),), v)
    return tuple(out)


def acts_trivially(table, word, depth, alphabet=("0", "1")):
    for n in range(1, depth + 1):
        for v in itertools.product(alphabet, repeat=n):
            if act(table, word, v) != v:
                return False
    return True


def alpha_brute(table, word, n, depth, alphabet=("0", "1")):
    """Words of length n whose section moves some word of length <= depth."""
    return sum(
        1 for v in itertools.product(alphabet, repeat=n)
        if not acts_trivially(table, section(table, word, v), depth, alphabet)
    )


# -- Fibonacci tiling --------------------------------------------------------------


def fibonacci_word(k):
    w = "a"
    for _ in range(k):
        w = "".join("ab" if c == "a" else "a" for c in w)
    return w


def itineraries(k, levels):
    """Itinerary prefixes for positions of psi^k(a), skipping positions whose
    itinerary depends on letters outside the finite word."""
    x = fibonacci_word(k)
    n = len(x)
    pos = list(range(n))  # index of each original position in the current word
    its = [[] for _ in range(n)]
    ok = [True] * n
    cur = x
    for _ in range(levels):
        m = len(cur)
        sym = []
        for i, c in enumerate(cur):
            if c == "b":
                sym.append("b")
            elif i == 0:
                sym.append(None)
            else:
                sym.append("a0" if cur[i - 1] == "a" else "a1")
        for p in range(n):
            j = pos[p]
            if j < 2 or j > m - 3 or sym[j] is None:
                ok[p] = False
            else:
                its[p].append(sym[j])
        # group each b with the preceding a
        group = [0] * m
        nxt = []
        i = 0
        while i < m:
            if cur[i] == "a" and i + 1 < m and cur[i + 1] == "b":
                group[i] = group[i + 1] = len(nxt)
                nxt.append("a")
                i += 2
            else:
                group[i] = len(nxt)
                nxt.append("b" if cur[i] == "a" else "?")
                i += 1
        pos = [group[j] for j in pos]
        cur = "".join(nxt)
    return [tuple(its[p]) if ok[p] else None for p in range(n)]


FIB_ALLOWED = {("a0", "a1"), ("a1", "a0"), ("a1", "b"), ("b", "a0"), ("b", "a1")}


# -- electrical networks --------------------------------------------------------------


def series(*rs):
    return sum(rs, Fraction(0))


def parallel(*rs):
    return 1 / sum(1 / Fraction(r) for r in rs)


def brute_energy(n, edges, basepoint, grounded, grid):
    """Least energy over potentials taking values on a grid (interior vertices)."""
    interior = [v for v in range(n) if v != basepoint and v not in grounded]
    best = None
    for vals in itertools.product(grid, repeat=len(interior)):
        a = [0.0] * n
        a[basepoint] = 1.0
        for v, x in zip(interior, vals):
            a[v] = x
        e = sum((a[s] - a[t]) ** 2 for s, t in edges)
        best = e if best is None else min(best, e)
    return best


# -- 2-adic integers ------------------------------------------------------------------


def zb_b(n):
    """2^m(2k+1) -> 2^m(2k+3), 0 fixed."""
    if n == 0:
        return 0
    m = 0
    while n % 2 == 0:
        n //= 2
        m += 1
    return 2 ** m * (n + 2)
