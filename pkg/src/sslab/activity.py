"""Activity growth: how many level-n sections of an element are nontrivial.

For machines with lookahead a section is counted as trivial when it is a
pure prefix exchange (it rewrites a fixed number of letters to a fixed word
and then acts as the identity).  On tree machines this is plain triviality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering

import networkx as nx

from . import caps
from .core.engine import _feed, config_str, is_clean, residual, start_config
from .core.machine import MachineDef
from .errors import CapExceeded
from .words import GroupWord, RaySpec

_RANK = {"Finitary": 0, "Bounded": 1, "Polynomial": 2, "Exponential": 3}


@total_ordering
@dataclass(frozen=True)
class ActivityClass:
    kind: str
    degree: int = 0  # depth for Finitary, growth degree for Polynomial

    def __post_init__(self):
        if self.kind not in _RANK:
            raise ValueError(f"unknown activity kind {self.kind!r}")

    @classmethod
    def finitary(cls, depth: int) -> ActivityClass:
        return cls("Finitary", depth)

    @classmethod
    def polynomial(cls, degree: int) -> ActivityClass:
        return cls("Bounded", 0) if degree == 0 else cls("Polynomial", degree)

    def _rank(self):
        return (_RANK[self.kind], self.degree if self.kind != "Bounded" else 0)

    def __lt__(self, other):
        return self._rank() < other._rank()

    @property
    def bounded(self) -> bool:
        return self.kind in ("Finitary", "Bounded")

    def __str__(self):
        if self.kind in ("Finitary", "Polynomial"):
            return f"{self.kind}({self.degree})"
        return self.kind


Vertex = tuple  # (config, last letter, level mod period, at root)


@dataclass(frozen=True)
class StateGraph:
    """Nontrivial section states reachable from an element, and the letters between them."""

    vertices: tuple[Vertex, ...]
    edges: tuple[tuple[int, str, int], ...]
    start: int | None
    exact: bool = True

    def labels(self) -> list[str]:
        return [config_str(v[0]) for v in self.vertices]

    def digraph(self) -> nx.MultiDiGraph:
        G = nx.MultiDiGraph()
        G.add_nodes_from(range(len(self.vertices)))
        for s, x, t in self.edges:
            G.add_edge(s, t, letter=x)
        return G

    def successors(self, i: int):
        return [(x, t) for s, x, t in self.edges if s == i]


def nontrivial_state_graph(m: MachineDef, g, level: int | None = None) -> StateGraph:
    """Graph whose length-n paths from the start are the level-n words with
    nontrivial section.  ``level`` defaults to the home level of ``g``."""
    if level is None:
        level = m.home_of(g)
    cfg = start_config(g)
    if not cfg or is_clean(m, cfg, None, level):
        return StateGraph((), (), None)
    track = m.subshift is not None
    period = m.alphabet.period
    # only a subshift's initial symbols make the root differ from deeper levels
    start: Vertex = (cfg, None, level % period, level == 0 and track)
    index = {start: 0}
    order = [start]
    edges = []
    cap = caps.get("closure")
    i = 0
    while i < len(order):
        cur, last, lev, root = order[i]
        level = 0 if root else (lev or period)
        for y in m.next_symbols(last, level):
            ncfg, _ = _feed(m, cur, (y,))
            nlast = y if track else None
            if is_clean(m, ncfg, nlast, level + 1):
                continue
            v = (ncfg, nlast, (level + 1) % period, False)
            j = index.get(v)
            if j is None:
                j = index[v] = len(order)
                order.append(v)
                if len(order) > cap:
                    raise CapExceeded(f"state graph exceeded {cap} vertices")
            edges.append((i, y, j))
        i += 1
    return StateGraph(tuple(order), tuple(edges), 0)


def _condensation(sg: StateGraph):
    G = nx.DiGraph()
    G.add_nodes_from(range(len(sg.vertices)))
    G.add_edges_from((s, t) for s, _, t in sg.edges)
    C = nx.condensation(G)
    members = C.graph["mapping"]
    inner = {c: 0 for c in C.nodes}
    branching = False
    out_inner: dict[int, int] = {}
    for s, _, t in sg.edges:
        if members[s] == members[t]:
            inner[members[s]] += 1
            out_inner[s] = out_inner.get(s, 0) + 1
            if out_inner[s] >= 2:
                branching = True
    cyclic = {c for c, k in inner.items() if k > 0}
    return C, members, cyclic, branching


def classify_activity(sg: StateGraph) -> ActivityClass:
    if not sg.vertices:
        return ActivityClass.finitary(0)
    C, members, cyclic, branching = _condensation(sg)
    if branching:
        return ActivityClass("Exponential")
    if not cyclic:
        # longest path counted in vertices
        G = sg.digraph()
        return ActivityClass.finitary(nx.dag_longest_path_length(nx.DiGraph(G)) + 1)
    best: dict[int, int] = {}
    for c in reversed(list(nx.topological_sort(C))):
        below = max((best[d] for d in C.successors(c)), default=0)
        best[c] = below + (1 if c in cyclic else 0)
    k = best[members[sg.start]]
    return ActivityClass.polynomial(k - 1)


def activity_class(m: MachineDef, g, level: int | None = None) -> ActivityClass:
    return classify_activity(nontrivial_state_graph(m, g, level))


def alpha_profile(sg: StateGraph, n: int) -> list[int]:
    """[alpha_0, ..., alpha_n] by path counting."""
    if sg.start is None:
        return [0] * (n + 1)
    counts = {sg.start: 1}
    out = [1]
    for _ in range(n):
        nxt: dict[int, int] = {}
        for s, _, t in sg.edges:
            c = counts.get(s)
            if c:
                nxt[t] = nxt.get(t, 0) + c
        counts = nxt
        out.append(sum(counts.values()))
    return out


def alpha_n(m: MachineDef, g, n: int, level: int | None = None) -> int:
    """Number of admissible length-n words whose section is nontrivial."""
    return alpha_profile(nontrivial_state_graph(m, g, level), n)[n]


def alpha_n_enumerated(m: MachineDef, g, n: int, level: int | None = None) -> int:
    """Same count by enumerating all length-n words (reference implementation)."""
    if level is None:
        level = m.home_of(g)
    total = 0
    for v in m.words(n, level):
        _, cfg = residual(m, g, v, level)
        if not is_clean(m, cfg, v[-1] if (v and m.subshift) else None, level + n):
            total += 1
    return total


@dataclass(frozen=True)
class SingularPrefixes:
    words: tuple[tuple[str, ...], ...]
    rays: tuple[RaySpec, ...]

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)


def singular_prefixes(m: MachineDef, g, n: int, level: int | None = None) -> SingularPrefixes:
    """Level-n words with nontrivial section; for bounded elements also the
    eventually periodic rays along which they concentrate."""
    sg = nontrivial_state_graph(m, g, level)
    if sg.start is None:
        return SingularPrefixes((), ())
    adj: dict[int, list[tuple[str, int]]] = {}
    for s, x, t in sg.edges:
        adj.setdefault(s, []).append((x, t))
    words = []
    stack = [(sg.start, ())]
    while stack:
        v, w = stack.pop()
        if len(w) == n:
            words.append(w)
            continue
        for x, t in adj.get(v, ()):
            stack.append((t, w + (x,)))
    return SingularPrefixes(tuple(sorted(words, key=_word_key(m))), _singular_rays(sg, adj))


def _word_key(m):
    order = {s: i for i, s in enumerate(m.alphabet.symbols())}
    return lambda w: tuple(order[x] for x in w)


def _singular_rays(sg: StateGraph, adj) -> tuple[RaySpec, ...]:
    if classify_activity(sg).kind != "Bounded":
        return ()
    C, members, cyclic, _ = _condensation(sg)
    cycle_word: dict[int, tuple[str, ...]] = {}
    for v in range(len(sg.vertices)):
        if members[v] not in cyclic:
            continue
        word, u = [], v
        while True:
            x, u = next((x, t) for x, t in adj[u] if members[t] == members[v])
            word.append(x)
            if u == v:
                break
        cycle_word[v] = tuple(word)
    rays = set()
    stack = [(sg.start, ())]
    while stack:
        v, w = stack.pop()
        if v in cycle_word:
            rays.add(RaySpec(w, cycle_word[v]).canonical())
            continue
        for x, t in adj.get(v, ()):
            stack.append((t, w + (x,)))
    return tuple(sorted(rays, key=RaySpec.sort_key))


def activity_table(m: MachineDef, words, samples=(1, 2, 4, 8, 16)) -> list[dict]:
    rows = []
    for w in words:
        g = w if isinstance(w, GroupWord) else m.word(w)
        sg = nontrivial_state_graph(m, g)
        cls = classify_activity(sg)
        prof = alpha_profile(sg, max(samples))
        rows.append({
            "element": str(g),
            "class": cls.kind,
            "degree": cls.degree,
            **{f"alpha_{n}": prof[n] for n in samples},
        })
    return rows
