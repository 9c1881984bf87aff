"""Schreier graphs on tree levels and on orbits of eventually periodic rays,
and the tail-preserving Følner sets used for recurrence certificates."""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable

from . import caps
from .core.engine import apply_ray, apply_word
from .core.machine import MachineDef
from .errors import CapExceeded, ValidationError
from .words import GroupWord, RaySpec, symbols_text

PALETTE = ("black", "red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan", "gray")


@dataclass(frozen=True)
class Generator:
    label: str
    word: GroupWord
    positive: bool


def symmetric(m: MachineDef | None, S: Iterable) -> tuple[Generator, ...]:
    """Generators followed by their inverses, in input order."""
    words = []
    for s in S:
        if isinstance(s, GroupWord):
            words.append(s)
        elif m is not None:
            words.append(m.word(s))
        else:
            words.append(GroupWord.parse(s))
    out = [Generator(str(w), w, True) for w in words]
    out += [Generator(str(w.inverse()), w.inverse(), False) for w in words]
    return tuple(out)


@dataclass(frozen=True)
class SchreierGraph:
    """Vertices (level words or rays), labelled edges, basepoint.

    ``edges`` holds (src, label, dst) index triples for every vertex and
    generator whose image lies in the graph; on a ball the sphere vertices
    may lose edges that leave the ball.
    """

    vertices: tuple[Hashable, ...]
    edges: tuple[tuple[int, str, int], ...]
    gens: tuple[Generator, ...]
    basepoint: int | None = 0
    distance: tuple[int, ...] | None = None
    radius: int | None = None

    def index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @property
    def sphere(self) -> tuple[int, ...]:
        if self.distance is None or self.radius is None:
            return ()
        return tuple(i for i, d in enumerate(self.distance) if d == self.radius)

    def label(self, i: int) -> str:
        return vertex_label(self.vertices[i])

    def action(self, label: str) -> dict[int, int]:
        return {s: t for s, l, t in self.edges if l == label}

    def network_edges(self) -> list[tuple[int, int]]:
        """One undirected edge per (positive generator, vertex)."""
        pos = {g.label for g in self.gens if g.positive}
        return [(s, t) for s, l, t in self.edges if l in pos]


def vertex_label(v) -> str:
    if isinstance(v, RaySpec):
        return str(v)
    return symbols_text(v) if v else "ε"


def level_graph(m: MachineDef, S, n: int) -> SchreierGraph:
    gens = symmetric(m, S)
    if m.count_words(n) > caps.get("level"):
        raise CapExceeded(f"level {n} has more than {caps.get('level')} words")
    verts = tuple(m.words(n))
    index = {v: i for i, v in enumerate(verts)}
    edges = []
    for g in gens:
        for i, v in enumerate(verts):
            edges.append((i, g.label, index[apply_word(m, g.word, v)]))
    edges.sort(key=lambda e: (e[0], e[1], e[2]))
    return SchreierGraph(verts, tuple(edges), gens, 0 if verts else None)


def orbit_partition(graph: SchreierGraph) -> frozenset[frozenset]:
    parent = list(range(len(graph.vertices)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for s, _, t in graph.edges:
        a, b = find(s), find(t)
        if a != b:
            parent[a] = b
    groups: dict[int, set] = {}
    for i, v in enumerate(graph.vertices):
        groups.setdefault(find(i), set()).add(v)
    return frozenset(frozenset(g) for g in groups.values())


def orbit_ball(m: MachineDef, S, p: RaySpec, radius: int) -> SchreierGraph:
    gens = symmetric(m, S)
    p = p.canonical()
    dist = {p: 0}
    order = [p]
    queue = deque([p])
    cap = caps.get("orbit")
    images: dict = {}
    while queue:
        x = queue.popleft()
        for g in gens:
            y = apply_ray(m, g.word, x)
            images[(x, g.label)] = y
            if y not in dist and dist[x] < radius:
                dist[y] = dist[x] + 1
                order.append(y)
                queue.append(y)
                if len(order) > cap:
                    raise CapExceeded(f"orbit ball exceeded {cap} points")
    verts = tuple(sorted(order, key=lambda r: (dist[r],) + r.sort_key()))
    index = {v: i for i, v in enumerate(verts)}
    edges = []
    for (x, label), y in images.items():
        if y in index:
            edges.append((index[x], label, index[y]))
    edges.sort()
    return SchreierGraph(verts, tuple(edges), gens, index[p],
                         tuple(dist[v] for v in verts), radius)


# -- Følner sets from tails ------------------------------------------------------------


@dataclass(frozen=True)
class FolnerSet:
    n: int
    points: frozenset
    boundary: frozenset

    @property
    def size(self) -> int:
        return len(self.points)


class _RayCache(dict):
    def __init__(self, m):
        super().__init__()
        self.m = m

    def image(self, g: Generator, x: RaySpec) -> RaySpec:
        key = (g.label, x)
        y = self.get(key)
        if y is None:
            y = self[key] = apply_ray(self.m, g.word, x)
        return y


def _cache_for(m, gens, cache):
    # cached images are keyed by label, so a cache only serves one machine
    if cache is None or cache.m is not m:
        return _RayCache(m)
    return cache


def _boundary(cache, gens, points) -> frozenset:
    return frozenset(
        x for x in points if any(cache.image(g, x) not in points for g in gens)
    )


def _tail_orbit(cache, gens, p: RaySpec, n: int, depth: int) -> frozenset:
    tail = p.drop(depth)
    reach = {p}
    queue = deque([p])
    cap = caps.get("orbit")
    while queue:
        x = queue.popleft()
        for g in gens:
            y = cache.image(g, x)
            if y not in reach and y.drop(depth) == tail:
                reach.add(y)
                queue.append(y)
                if len(reach) > cap:
                    raise CapExceeded(f"tail orbit exceeded {cap} points")
    near = p.drop(n)
    return frozenset(y for y in reach if y.drop(n) == near)


def cofinal(x: RaySpec, y: RaySpec) -> bool:
    """Whether two rays differ in finitely many letters."""
    n = max(len(x.prefix), len(y.prefix))
    return x.drop(n) == y.drop(n)


def tail_transversal(m: MachineDef, S, p: RaySpec, probe: int = 4,
                     limit: int = 64, kw_cache=None) -> tuple[RaySpec, ...]:
    """One ray from each cofinality class met by the orbit of ``p``.

    Classes are discovered by following generators out of the level-``probe``
    pieces of the classes already known, until no new class appears.
    """
    gens = symmetric(m, S)
    cache = _cache_for(m, gens, kw_cache)
    reps = [p.canonical()]
    i = 0
    while i < len(reps):
        for x in _tail_piece(cache, gens, reps[i], probe):
            for g in gens:
                y = cache.image(g, x)
                if not any(cofinal(y, r) for r in reps):
                    reps.append(y)
                    if len(reps) > limit:
                        raise CapExceeded(f"orbit meets more than {limit} tail classes")
        i += 1
    return tuple(reps)


def _tail_piece(cache, gens, u: RaySpec, n: int, max_margin: int = 8) -> frozenset:
    prev = None
    for margin in range(max_margin + 1):
        cur = _tail_orbit(cache, gens, u, n, n + margin)
        if cur == prev:
            break
        prev = cur
    return prev


def cofinality_folner_sets(m: MachineDef, S, p: RaySpec, n: int,
                           constant_tails: bool = False, max_margin: int = 8,
                           transversal: tuple[RaySpec, ...] | None = None,
                           cache: _RayCache | None = None) -> FolnerSet:
    """Orbit points agreeing after the first ``n`` letters with one of the
    tail-class representatives of the orbit of ``p``.

    Each piece is explored inside the points agreeing with its representative
    after ``n + margin`` letters; the margin grows until the piece stops
    changing.  With ``constant_tails`` the set is instead every ray
    ``u x x x ...`` with ``|u| = n``.
    """
    gens = symmetric(m, S)
    cache = _cache_for(m, gens, cache)
    if constant_tails:
        if m.subshift is not None or not m.uniform:
            raise ValidationError("constant tails need a full uniform tree")
        pts = frozenset(
            RaySpec(u, (x,)).canonical() for x in m.alphabet.at(0) for u in m.words(n)
        )
        return FolnerSet(n, pts, _boundary(cache, gens, pts))
    if transversal is None:
        transversal = tail_transversal(m, S, p, kw_cache=cache)
    pts = frozenset().union(*(_tail_piece(cache, gens, u, n, max_margin) for u in transversal))
    return FolnerSet(n, pts, _boundary(cache, gens, pts))


@dataclass(frozen=True)
class FolnerChain:
    sets: tuple[FolnerSet, ...]

    @property
    def ns(self) -> tuple[int, ...]:
        return tuple(f.n for f in self.sets)

    @property
    def boundary_sizes(self) -> tuple[int, ...]:
        return tuple(len(f.boundary) for f in self.sets)

    def nested(self) -> bool:
        return all(a.points <= b.points for a, b in zip(self.sets, self.sets[1:]))

    def disjoint_boundaries(self) -> bool:
        seen: set = set()
        for f in self.sets:
            if seen & f.boundary:
                return False
            seen |= f.boundary
        return True


def folner_chain(m: MachineDef, S, p: RaySpec, ns: Iterable[int], **kw) -> FolnerChain:
    kw.setdefault("cache", _RayCache(m))
    if not kw.get("constant_tails") and kw.get("transversal") is None:
        kw["transversal"] = tail_transversal(m, S, p, kw_cache=kw["cache"])
    return FolnerChain(tuple(cofinality_folner_sets(m, S, p, n, **kw) for n in ns))


def select_disjoint(chain: FolnerChain) -> FolnerChain:
    """Greedy subsequence with nested sets and pairwise disjoint boundaries."""
    kept: list[FolnerSet] = []
    used: set = set()
    for f in chain.sets:
        if kept and not kept[-1].points <= f.points:
            continue
        if used & f.boundary:
            continue
        kept.append(f)
        used |= f.boundary
    return FolnerChain(tuple(kept))


# -- export ---------------------------------------------------------------------------


def export_graph(graph: SchreierGraph, fmt: str = "dot") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["src", "label", "dst"])
        if not graph.edges and graph.basepoint is not None:
            w.writerow([graph.label(graph.basepoint), "", ""])
        for s, l, t in graph.edges:
            w.writerow([graph.label(s), l, graph.label(t)])
        return buf.getvalue()
    if fmt != "dot":
        raise ValueError(f"unknown format {fmt!r}")
    colors = {g.label: PALETTE[i % len(PALETTE)] for i, g in enumerate(graph.gens)}
    lines = ["digraph schreier {"]
    for i in range(len(graph.vertices)):
        extra = ", shape=doublecircle" if i == graph.basepoint else ""
        lines.append(f'  n{i} [label="{graph.label(i)}"{extra}];')
    for s, l, t in graph.edges:
        lines.append(f'  n{s} -> n{t} [label="{l}", color="{colors.get(l, "black")}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def import_csv(text: str) -> tuple[set[str], set[tuple[str, str, str]]]:
    """Vertices and labelled edges of a CSV export."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["src", "label", "dst"]:
        raise ValidationError("expected header src,label,dst")
    verts: set[str] = set()
    edges: set[tuple[str, str, str]] = set()
    for row in rows[1:]:
        s, l, t = row
        verts.add(s)
        if l:
            verts.add(t)
            edges.add((s, l, t))
    return verts, edges
