"""Bratteli diagrams with their depth-n elements and the adic map.

Levels are numbered from 1 as in ``level i`` lines of the text format;
edges of level ``i`` go from level ``i`` vertices to level ``i + 1``
vertices.  A finite path is a tuple of edge names, one per level.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import ParseError, ValidationError

Path = tuple[str, ...]


@dataclass(frozen=True)
class Edge:
    name: str
    src: str
    dst: str
    order: int | None = None


LevelData = tuple[tuple[str, ...], tuple[Edge, ...]]


@dataclass(frozen=True)
class BratteliDiagram:
    """Vertices V_1..V_{N+1} and edges E_1..E_N (horizon N).

    ``grow(i)`` may supply (V_{i+1}, E_i) for levels past the horizon.
    """

    vertices: tuple[tuple[str, ...], ...]
    edges: tuple[tuple[Edge, ...], ...]
    grow: Callable[[int], LevelData] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.vertices) != len(self.edges) + 1:
            raise ValidationError("need one more vertex level than edge levels")
        for i, es in enumerate(self.edges, 1):
            names = [e.name for e in es]
            if len(set(names)) != len(names):
                raise ValidationError(f"level {i}: repeated edge name")
            for e in es:
                if e.src not in self.vertices[i - 1] or e.dst not in self.vertices[i]:
                    raise ValidationError(f"level {i}: edge {e.name} has unknown endpoint")
        for i, vs in enumerate(self.vertices, 1):
            for v in vs:
                if i <= self.horizon and not any(e.src == v for e in self.edges[i - 1]):
                    raise ValidationError(f"vertex {v} at level {i} has no outgoing edge")
                if i > 1 and not any(e.dst == v for e in self.edges[i - 2]):
                    raise ValidationError(f"vertex {v} at level {i} has no incoming edge")

    @property
    def horizon(self) -> int:
        return len(self.edges)

    def extend_to(self, n: int) -> BratteliDiagram:
        if n <= self.horizon:
            return self
        if self.grow is None:
            raise ValidationError(f"level {n} is beyond the horizon {self.horizon}")
        vs, es = list(self.vertices), list(self.edges)
        for i in range(self.horizon + 1, n + 1):
            nv, ne = self.grow(i)
            vs.append(tuple(nv))
            es.append(tuple(ne))
        return BratteliDiagram(tuple(vs), tuple(es), self.grow)

    def _need(self, n: int):
        if n > self.horizon:
            raise ValidationError(f"level {n} is beyond the horizon {self.horizon}")

    def edge(self, level: int, name: str) -> Edge:
        for e in self.edges[level - 1]:
            if e.name == name:
                return e
        raise ValidationError(f"no edge {name!r} at level {level}")

    def incoming(self, level: int, v: str) -> list[Edge]:
        """Edges of level ``level`` ending at ``v`` (a level ``level + 1`` vertex), in order."""
        es = [e for e in self.edges[level - 1] if e.dst == v]
        return sorted(es, key=lambda e: (e.order if e.order is not None else 0, e.name))

    def end(self, p: Path) -> str:
        if not p:
            raise ValidationError("empty path has no end")
        return self.edge(len(p), p[-1]).dst

    def check_path(self, p: Path):
        self._need(len(p))
        for i in range(1, len(p)):
            if self.edge(i, p[i - 1]).dst != self.edge(i + 1, p[i]).src:
                raise ValidationError(f"path {p} breaks at level {i}")


def _order_key(D: BratteliDiagram, p: Path):
    return tuple(
        (D.edge(i, x).order if D.edge(i, x).order is not None else 0, x)
        for i, x in reversed(list(enumerate(p, 1)))
    )


def enumerate_paths(D: BratteliDiagram, n: int, v: str | None = None) -> list[Path]:
    """All paths of length ``n`` (ending at ``v`` if given), ordered with the
    last edge most significant."""
    D = _diagram(D)
    D._need(n)
    frontier: dict[str, list[Path]] = {u: [()] for u in D.vertices[0]}
    for i in range(1, n + 1):
        nxt: dict[str, list[Path]] = {}
        for e in D.edges[i - 1]:
            for p in frontier.get(e.src, ()):
                nxt.setdefault(e.dst, []).append(p + (e.name,))
        frontier = nxt
    if v is not None:
        if v not in D.vertices[n]:
            raise ValidationError(f"{v!r} is not a vertex of level {n + 1}")
        paths = frontier.get(v, [])
    else:
        paths = [p for ps in frontier.values() for p in ps]
    return sorted(paths, key=lambda p: _order_key(D, p))


def tail_exchange(D: BratteliDiagram, w1: Path, w2: Path, p: Path) -> Path:
    """Replace the prefix ``w1`` of ``p`` by ``w2``."""
    w1, w2, p = tuple(w1), tuple(w2), tuple(p)
    if len(w1) != len(w2):
        raise ValidationError("exchanged prefixes must have equal length")
    D.check_path(w1)
    D.check_path(w2)
    if w1 and D.end(w1) != D.end(w2):
        raise ValidationError("exchanged prefixes end at different vertices")
    if p[:len(w1)] != w1:
        raise ValidationError("path is not in the cylinder of the first prefix")
    return w2 + p[len(w1):]


@dataclass(frozen=True)
class DepthNElement:
    """A permutation of each fiber Paths_v, v in V_{n+1}; tails are kept."""

    diagram: BratteliDiagram
    n: int
    blocks: tuple[tuple[str, tuple[int, ...]], ...]  # (vertex, image indices)

    def __post_init__(self):
        seen = set()
        for v, perm in self.blocks:
            k = len(enumerate_paths(self.diagram, self.n, v))
            if sorted(perm) != list(range(k)):
                raise ValidationError(f"block at {v} is not a permutation of {k} paths")
            seen.add(v)
        missing = set(self.diagram.vertices[self.n]) - seen
        if missing:
            object.__setattr__(self, "blocks", self.blocks + tuple(
                (v, tuple(range(len(enumerate_paths(self.diagram, self.n, v)))))
                for v in sorted(missing)))

    @classmethod
    def from_map(cls, D: BratteliDiagram, n: int, f: Callable[[Path], Path]) -> DepthNElement:
        blocks = []
        for v in D.vertices[n]:
            paths = enumerate_paths(D, n, v)
            index = {p: i for i, p in enumerate(paths)}
            blocks.append((v, tuple(index[tuple(f(p))] for p in paths)))
        return cls(D, n, tuple(blocks))

    @classmethod
    def identity(cls, D: BratteliDiagram, n: int) -> DepthNElement:
        return cls.from_map(D, n, lambda p: p)

    def _table(self) -> dict[Path, Path]:
        table = self.__dict__.get("_tab")
        if table is not None:
            return table
        table = {}
        for v, perm in self.blocks:
            paths = enumerate_paths(self.diagram, self.n, v)
            for i, j in enumerate(perm):
                table[paths[i]] = paths[j]
        object.__setattr__(self, "_tab", table)
        return table

    def apply(self, p: Path) -> Path:
        p = tuple(p)
        if len(p) < self.n:
            raise ValidationError(f"path shorter than depth {self.n}")
        head = self._table().get(p[:self.n])
        if head is None:
            raise ValidationError(f"path {p} is not in the diagram")
        return head + p[self.n:]

    def compose(self, other: DepthNElement) -> DepthNElement:
        """``self ∘ other`` (``other`` acts first); depths are aligned upward."""
        n = max(self.n, other.n)
        a, b = self.embed(n), other.embed(n)
        return DepthNElement.from_map(a.diagram, n, lambda p: a.apply(b.apply(p)))

    def embed(self, n: int | None = None) -> DepthNElement:
        n = self.n + 1 if n is None else n
        if n < self.n:
            raise ValidationError("cannot embed into a smaller depth")
        if n == self.n:
            return self
        D = self.diagram.extend_to(n)
        return DepthNElement.from_map(D, n, self.apply)

    def cycles(self) -> str:
        return serialize_element(self)


def depth_n_apply(g: DepthNElement, p: Path) -> Path:
    return g.apply(p)


def serialize_element(g: DepthNElement) -> str:
    lines = [f"depth {g.n}"]
    for v, perm in sorted(g.blocks):
        seen, cyc = set(), []
        for i in range(len(perm)):
            if i in seen or perm[i] == i:
                continue
            c, j = [], i
            while j not in seen:
                seen.add(j)
                c.append(j)
                j = perm[j]
            cyc.append("(" + " ".join(map(str, c)) + ")")
        lines.append(f"{v}: {''.join(cyc) or '()'}")
    return "\n".join(lines) + "\n"


def parse_element(D: BratteliDiagram, text: str) -> DepthNElement:
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    if not lines or not lines[0].startswith("depth "):
        raise ParseError("expected 'depth n' header", 1)
    n = int(lines[0].split()[1])
    blocks = []
    for lineno, line in enumerate(lines[1:], 2):
        v, sep, body = line.partition(":")
        if not sep:
            raise ParseError("expected 'vertex: (cycles)'", lineno)
        k = len(enumerate_paths(D, n, v.strip()))
        perm = list(range(k))
        for cyc in re.findall(r"\(([^()]*)\)", body):
            idx = [int(t) for t in cyc.split()]
            for a, b in zip(idx, idx[1:] + idx[:1]):
                perm[a] = b
        blocks.append((v.strip(), tuple(perm)))
    return DepthNElement(D, n, tuple(blocks))


# -- ordered diagrams ------------------------------------------------------------


@dataclass(frozen=True)
class OrderedBratteliDiagram:
    diagram: BratteliDiagram

    def __post_init__(self):
        D = self.diagram
        for i in range(1, D.horizon + 1):
            for v in D.vertices[i]:
                orders = [e.order for e in D.edges[i - 1] if e.dst == v]
                if None in orders or len(set(orders)) != len(orders):
                    raise ValidationError(f"edges into {v} at level {i + 1} are not totally ordered")

    @property
    def horizon(self) -> int:
        return self.diagram.horizon


def _diagram(O) -> BratteliDiagram:
    return O.diagram if isinstance(O, OrderedBratteliDiagram) else O


def extreme_path(O: OrderedBratteliDiagram, n: int, v: str | None = None,
                 which: str = "min") -> Path:
    """The path of length ``n`` into ``v`` using only minimal (or maximal) edges."""
    D = _diagram(O)
    D._need(n)
    if which not in ("min", "max"):
        raise ValueError("which must be 'min' or 'max'")
    if v is None:
        if len(D.vertices[n]) != 1:
            raise ValidationError(f"level {n + 1} has several vertices; name one")
        v = D.vertices[n][0]
    out = []
    for level in range(n, 0, -1):
        es = D.incoming(level, v)
        e = es[0] if which == "min" else es[-1]
        out.append(e.name)
        v = e.src
    return tuple(reversed(out))


def adic_successor(O: OrderedBratteliDiagram, p: Path, wrap: bool = False) -> Path:
    """Next path in the adic order.

    The maximal path of a fiber has no successor; with ``wrap`` it is sent
    to the minimal path of the same fiber.
    """
    D = _diagram(O)
    p = tuple(p)
    D.check_path(p)
    for k in range(len(p)):
        e = D.edge(k + 1, p[k])
        fiber = D.incoming(k + 1, e.dst)
        pos = fiber.index(e)
        if pos + 1 < len(fiber):
            nxt = fiber[pos + 1]
            head = extreme_path(O, k, nxt.src, "min") if k else ()
            return head + (nxt.name,) + p[k + 1:]
    if not wrap:
        raise ValidationError("maximal path has no adic successor")
    return extreme_path(O, len(p), D.end(p) if p else None, "min") if p else p


def adic_element(O: OrderedBratteliDiagram, n: int) -> DepthNElement:
    """The adic map on level n, wrapped on each fiber."""
    return DepthNElement.from_map(_diagram(O), n, lambda p: adic_successor(O, p, wrap=True))


# -- builders ------------------------------------------------------------------------


def periodic_diagram(vertices: Iterable[str], edges: Iterable[tuple], horizon: int) -> BratteliDiagram:
    """Stationary diagram; ``edges`` holds (name, src, dst[, order]) tuples."""
    vs = tuple(vertices)
    es = tuple(Edge(*e) for e in edges)

    def grow(i):
        return vs, es

    return BratteliDiagram((vs,) * (horizon + 1), (es,) * horizon, grow)


def odometer_diagram(horizon: int, order: tuple[str, ...] = ("0", "1")) -> OrderedBratteliDiagram:
    """One vertex per level, edges named by digits, ordered as given."""
    edges = [(d, "*", "*", i) for i, d in enumerate(order)]
    return OrderedBratteliDiagram(periodic_diagram(["*"], edges, horizon))


def machine_diagram(m, horizon: int) -> BratteliDiagram:
    """Diagram whose level-n paths are the admissible words of ``m``.

    Without a subshift there is one vertex per level; with one, the vertex
    after a path is its last symbol.
    """
    vs: list[tuple[str, ...]] = [("*",)]
    es: list[tuple[Edge, ...]] = []
    for i in range(horizon):
        if m.subshift is None:
            vs.append(("*",))
            es.append(tuple(Edge(x, "*", "*", k) for k, x in enumerate(m.alphabet.at(i))))
            continue
        level = []
        for src in vs[-1]:
            last = None if src == "*" else src
            for x in m.next_symbols(last, i):
                level.append(Edge(f"{src}>{x}" if i else x, src, x))
        names = {}
        for e in level:
            names.setdefault(e.dst, []).append(e)
        ordered = []
        for dst, group in names.items():
            for k, e in enumerate(group):
                ordered.append(Edge(e.name, e.src, e.dst, k))
        vs.append(tuple(sorted({e.dst for e in level})))
        es.append(tuple(ordered))
    return BratteliDiagram(tuple(vs), tuple(es))


def path_word(D: BratteliDiagram, p: Path) -> tuple[str, ...]:
    """Machine word of a path of ``machine_diagram``."""
    return tuple(x.split(">")[-1] for x in p)


# -- bounded-type measurement ---------------------------------------------------------


@dataclass(frozen=True)
class AlphaVProfile:
    levels: tuple[dict, ...]  # levels[n-1][v] = alpha_v for v in V_{n+1}
    maximum: int
    trend: str

    def at(self, n: int) -> dict:
        return self.levels[n - 1]


def alpha_v_profile(m, g, D: BratteliDiagram | OrderedBratteliDiagram | None = None,
                    upto: int = 8) -> AlphaVProfile:
    """Per-vertex count of fiber paths whose section is not a prefix exchange."""
    from .activity import nontrivial_state_graph

    D = machine_diagram(m, upto) if D is None else _diagram(D).extend_to(upto)
    for n in range(1, upto + 1):
        if len(enumerate_paths(D, n)) != m.count_words(n):
            raise ValidationError(f"diagram level {n} does not match the machine's words")
    sg = nontrivial_state_graph(m, g, 0)
    single = all(len(vs) == 1 for vs in D.vertices)
    if not single and m.subshift is None:
        raise ValidationError("multi-vertex diagram needs a machine with a subshift")
    counts = {sg.start: 1} if sg.start is not None else {}
    levels = []
    for n in range(1, upto + 1):
        nxt: dict[int, int] = {}
        per: dict[str, int] = {v: 0 for v in D.vertices[n]}
        for s, x, t in sg.edges:
            c = counts.get(s)
            if c:
                nxt[t] = nxt.get(t, 0) + c
        counts = nxt
        for t, c in counts.items():
            v = D.vertices[n][0] if single else sg.vertices[t][1]
            per[v] = per.get(v, 0) + c
        levels.append(per)
    series = [max(l.values(), default=0) for l in levels]
    top = max(series, default=0)
    tail = series[len(series) // 2:]
    trend = "bounded" if tail and max(tail) <= max(series[: max(1, len(series) // 2)]) else "growing"
    return AlphaVProfile(tuple(levels), top, trend)


def alpha_v_depth(g: DepthNElement, upto: int) -> list[dict]:
    """alpha_v for a depth-n element: paths whose cylinder is not moved by a
    single prefix exchange."""
    D = g.diagram.extend_to(max(upto, g.n))
    out = []
    for k in range(1, upto + 1):
        per = {}
        for v in D.vertices[k]:
            count = 0
            if k < g.n:
                for w in enumerate_paths(D, k, v):
                    exts = [p for p in enumerate_paths(D, g.n) if p[:k] == w]
                    heads = {g.apply(p)[:k] for p in exts}
                    tails_ok = all(g.apply(p)[k:] == p[k:] for p in exts)
                    if len(heads) != 1 or not tails_ok:
                        count += 1
            per[v] = count
        out.append(per)
    return out


# -- text format ----------------------------------------------------------------------


_LEVEL = re.compile(r"^level\s+(\d+)\s*:(.*)$")
_EDGE = re.compile(r"^edge\s+(\d+)\s*:\s*(\S+)\s+(\S+)\s+(\S+)(?:\s+(-?\d+))?\s*$")


def parse_diagram(text: str) -> BratteliDiagram | OrderedBratteliDiagram:
    """``level i: v1 v2 ...`` and ``edge i: name src dst [order]`` lines."""
    levels: dict[int, tuple[str, ...]] = {}
    edges: dict[int, list[Edge]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        mt = _LEVEL.match(body)
        if mt:
            levels[int(mt.group(1))] = tuple(mt.group(2).split())
            continue
        mt = _EDGE.match(body)
        if mt:
            order = int(mt.group(5)) if mt.group(5) is not None else None
            edges.setdefault(int(mt.group(1)), []).append(
                Edge(mt.group(2), mt.group(3), mt.group(4), order))
            continue
        raise ParseError(f"unrecognized line {body!r}", lineno)
    if not levels or sorted(levels) != list(range(1, len(levels) + 1)):
        raise ParseError("levels must be numbered 1..N+1 without gaps")
    n = len(levels) - 1
    if set(edges) - set(range(1, n + 1)):
        raise ParseError("edge level outside the diagram")
    D = BratteliDiagram(
        tuple(levels[i] for i in range(1, n + 2)),
        tuple(tuple(edges.get(i, ())) for i in range(1, n + 1)),
    )
    ordered = all(e.order is not None for es in D.edges for e in es)
    return OrderedBratteliDiagram(D) if ordered and D.edges else D


def serialize_diagram(O: BratteliDiagram | OrderedBratteliDiagram) -> str:
    D = _diagram(O)
    lines = [f"level {i}: {' '.join(vs)}" for i, vs in enumerate(D.vertices, 1)]
    for i, es in enumerate(D.edges, 1):
        for e in es:
            tail = f" {e.order}" if e.order is not None else ""
            lines.append(f"edge {i}: {e.name} {e.src} {e.dst}{tail}")
    return "\n".join(lines) + "\n"
