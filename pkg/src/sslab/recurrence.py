"""Recurrence diagnostics for orbital graphs.

Three kinds of evidence are produced here:

* Nash-Williams sums over nested finite sets with disjoint boundaries.  When
  the boundaries stay bounded (or grow sublinearly) the sum diverges and the
  graph is recurrent; this is a certificate, not a heuristic.
* Capacity profiles.  For each radius the unit potential at the basepoint is
  extended harmonically to the ball with the sphere grounded; its Dirichlet
  energy is the effective conductance to the sphere.  Conductance tending to
  zero is consistent with recurrence, a plateau with transience.  These
  verdicts are evidence only.
* Product-vector overlaps built from a potential, together with the
  exponential lower bound in terms of its energy.

Electrical networks use one unit conductor per positive generator edge, so a
generator and its inverse do not double count.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import cg

from .core.machine import MachineDef
from .errors import ConvergenceError, ValidationError
from .schreier import FolnerChain, SchreierGraph, orbit_ball
from .words import RaySpec

TOLERANCE = 1e-10
CONDUCTANCE_FLOOR = 1e-6
PLATEAU_RATIO = 0.95


# -- networks ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Network:
    """Undirected multigraph on ``0..size-1`` with unit conductors."""

    size: int
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, graph: SchreierGraph) -> Network:
        return cls(len(graph.vertices), tuple(graph.network_edges()))

    def without(self, k: int) -> Network:
        return Network(self.size, self.edges[:k] + self.edges[k + 1:])

    def neighbours(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.size)]
        for s, t in self.edges:
            if s != t:
                adj[s].append(t)
                adj[t].append(s)
        return adj

    def energy(self, a: Sequence) -> float:
        return sum((a[s] - a[t]) ** 2 for s, t in self.edges)


def _as_network(graph) -> Network:
    return graph if isinstance(graph, Network) else Network.of(graph)


@dataclass(frozen=True)
class Potential:
    values: tuple
    energy: float
    residual: float
    exact: bool = False


def _check_problem(net: Network, basepoint: int, grounded: Iterable[int]) -> frozenset[int]:
    grounded = frozenset(grounded)
    if not grounded:
        raise ValidationError("grounded set is empty")
    if basepoint in grounded:
        raise ValidationError("basepoint lies in the grounded set")
    adj = net.neighbours()
    seen = {basepoint}
    queue = deque([basepoint])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    if len(seen) != net.size:
        raise ValidationError("network is disconnected; the Dirichlet system is singular")
    return grounded


def dirichlet_solve(graph, basepoint: int | None = None, grounded: Iterable[int] | None = None,
                    exact: bool = False, tol: float = TOLERANCE) -> Potential:
    """Harmonic extension of 1 at the basepoint and 0 on the grounded set.

    Parameters
    ----------
    graph : SchreierGraph or Network
        A Schreier ball uses its basepoint and sphere by default.
    exact : bool
        Solve with rational elimination instead of conjugate gradients.
        Intended for small networks.

    Returns
    -------
    Potential
        Values clamped to [0, 1], their Dirichlet energy, and the residual
        norm of the linear system before clamping.
    """
    if isinstance(graph, SchreierGraph):
        basepoint = graph.basepoint if basepoint is None else basepoint
        grounded = graph.sphere if grounded is None else grounded
    if basepoint is None or grounded is None:
        raise ValidationError("basepoint and grounded set are required")
    net = _as_network(graph)
    grounded = _check_problem(net, basepoint, grounded)
    if exact:
        return _solve_exact(net, basepoint, grounded)
    interior = [v for v in range(net.size) if v != basepoint and v not in grounded]
    pos = {v: i for i, v in enumerate(interior)}
    n = len(interior)
    a = np.zeros(net.size)
    a[basepoint] = 1.0
    residual = 0.0
    if n:
        rows, cols, vals = [], [], []
        b = np.zeros(n)
        for s, t in net.edges:
            if s == t:
                continue
            for u, v in ((s, t), (t, s)):
                if u in pos:
                    i = pos[u]
                    rows.append(i)
                    cols.append(i)
                    vals.append(1.0)
                    if v in pos:
                        rows.append(i)
                        cols.append(pos[v])
                        vals.append(-1.0)
                    elif v == basepoint:
                        b[i] += 1.0
        A = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        x, info = cg(A, b, rtol=tol, atol=0.0, maxiter=10 * net.size)
        residual = float(np.linalg.norm(A @ x - b))
        if info != 0 or residual > tol * max(1.0, float(np.linalg.norm(b))):
            raise ConvergenceError(f"conjugate gradients stopped with residual {residual:.3e}")
        a[interior] = x
    np.clip(a, 0.0, 1.0, out=a)
    return Potential(tuple(float(v) for v in a), float(net.energy(a)), residual)


def _solve_exact(net: Network, basepoint: int, grounded: frozenset[int]) -> Potential:
    interior = [v for v in range(net.size) if v != basepoint and v not in grounded]
    pos = {v: i for i, v in enumerate(interior)}
    n = len(interior)
    M = [[Fraction(0)] * (n + 1) for _ in range(n)]
    for s, t in net.edges:
        if s == t:
            continue
        for u, v in ((s, t), (t, s)):
            if u in pos:
                i = pos[u]
                M[i][i] += 1
                if v in pos:
                    M[i][pos[v]] -= 1
                elif v == basepoint:
                    M[i][n] += 1
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            raise ValidationError("singular Dirichlet system")
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    a = [Fraction(0)] * net.size
    a[basepoint] = Fraction(1)
    for v, i in pos.items():
        a[v] = M[i][n]
    return Potential(tuple(a), net.energy(a), 0.0, exact=True)


# -- capacity profiles ------------------------------------------------------------------


@dataclass(frozen=True)
class CapacityProfile:
    """Effective conductance from the basepoint to each sphere.

    ``truncated`` marks a finite orbit: the first radius whose sphere is
    empty is recorded with conductance 0 and the profile stops there.
    """

    radii: tuple[int, ...]
    conductances: tuple[float, ...]
    energies: tuple[float, ...]
    residuals: tuple[float, ...]
    truncated: bool = False
    verdict: str = "inconclusive"

    @property
    def capacities(self) -> tuple[float, ...]:
        return tuple(math.sqrt(c) for c in self.conductances)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "energy", "conductance", "residual"])
        for row in zip(self.radii, self.energies, self.conductances, self.residuals):
            w.writerow([row[0]] + [repr(float(x)) for x in row[1:]])
        return buf.getvalue()


def trend_verdict(radii: Sequence[int], conductances: Sequence[float],
                  truncated: bool = False) -> str:
    """Heuristic reading of a conductance profile (evidence, not proof)."""
    if truncated:
        return "recurrence-consistent"
    if len(radii) < 2:
        return "inconclusive"
    last = conductances[-1]
    if last < CONDUCTANCE_FLOOR:
        return "recurrence-consistent"
    ratio = last / conductances[-2]
    if ratio >= PLATEAU_RATIO:
        if radii[-1] >= 16 * radii[0]:
            return "transience-consistent"
        return "inconclusive"
    return "recurrence-consistent"


def network_profile(net: Network, basepoint: int, distance: Sequence[int],
                    radii: Iterable[int], exact: bool = False) -> CapacityProfile:
    """Capacity profile of a network whose vertices carry distances from the basepoint."""
    radii = sorted(set(radii))
    out_r, cond, energy, res = [], [], [], []
    truncated = False
    for r in radii:
        keep = [v for v in range(net.size) if distance[v] <= r]
        sphere = [v for v in keep if distance[v] == r]
        if r > 0 and not sphere:
            truncated = True
            out_r.append(r)
            cond.append(0.0)
            energy.append(0.0)
            res.append(0.0)
            break
        pos = {v: i for i, v in enumerate(keep)}
        sub = Network(len(keep), tuple(
            (pos[s], pos[t]) for s, t in net.edges if s in pos and t in pos
        ))
        pot = dirichlet_solve(sub, pos[basepoint], [pos[v] for v in sphere], exact=exact)
        out_r.append(r)
        energy.append(float(pot.energy))
        cond.append(float(pot.energy))
        res.append(pot.residual)
    return CapacityProfile(tuple(out_r), tuple(cond), tuple(energy), tuple(res),
                           truncated, trend_verdict(out_r, cond, truncated))


def capacity_profile(m: MachineDef, S, p: RaySpec, radii: Iterable[int],
                     exact: bool = False) -> CapacityProfile:
    radii = sorted(set(radii))
    if not radii or radii[0] < 1:
        raise ValidationError("radii must be positive")
    ball = orbit_ball(m, S, p, radii[-1])
    return network_profile(Network.of(ball), ball.basepoint, ball.distance, radii, exact)


def binary_tree(depth: int) -> tuple[Network, tuple[int, ...]]:
    """Rooted binary tree of the given depth with vertex depths (heap numbering)."""
    size = 2 ** (depth + 1) - 1
    edges = tuple(((v - 1) // 2, v) for v in range(1, size))
    dist = tuple(int(math.log2(v + 1)) for v in range(size))
    return Network(size, edges), dist


def line_segment(r: int) -> tuple[Network, tuple[int, ...]]:
    """Integers -r..r with unit edges, basepoint 0 at index r."""
    edges = tuple((i, i + 1) for i in range(2 * r))
    return Network(2 * r + 1, edges), tuple(abs(i - r) for i in range(2 * r + 1))


# -- Nash-Williams ----------------------------------------------------------------------


@dataclass(frozen=True)
class NashWilliamsReport:
    ns: tuple[int, ...]
    boundary_sizes: tuple[int, ...]
    partial_sums: tuple[Fraction, ...]
    bound: int
    verdict: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "boundary", "partial_sum"])
        for n, b, s in zip(self.ns, self.boundary_sizes, self.partial_sums):
            w.writerow([n, b, repr(float(s))])
        return buf.getvalue()


def _growth_exponent(sizes: Sequence[int]) -> float:
    xs = np.log(np.arange(1, len(sizes) + 1, dtype=float))
    ys = np.log(np.asarray(sizes, dtype=float))
    half = len(sizes) // 2
    slope = np.polyfit(xs[half:], ys[half:], 1)[0]
    return float(slope)


def nash_williams_certify(chain: FolnerChain | Sequence[int], ns: Sequence[int] | None = None,
                          degree_bounded: bool = True) -> NashWilliamsReport:
    """Partial sums of 1/|boundary| and a divergence verdict.

    A chain is checked for nesting and disjoint boundaries first.  A plain
    sequence of boundary sizes is taken as already valid.  The verdict is
    "certified-recurrent" when the sizes are bounded (the later half never
    exceeds the earlier maximum) or grow with fitted exponent at most 1, so
    the series dominates a multiple of the harmonic series.
    """
    if isinstance(chain, FolnerChain):
        if not chain.nested():
            raise ValidationError("sets are not nested")
        if not chain.disjoint_boundaries():
            raise ValidationError("boundaries are not disjoint")
        sizes = chain.boundary_sizes
        ns = chain.ns
    else:
        sizes = tuple(chain)
        ns = tuple(ns) if ns is not None else tuple(range(1, len(sizes) + 1))
    if any(s <= 0 for s in sizes):
        raise ValidationError("boundary sizes must be positive")
    sums, total = [], Fraction(0)
    for s in sizes:
        total += Fraction(1, s)
        sums.append(total)
    verdict = "inconclusive"
    if degree_bounded and len(sizes) >= 3:
        half = len(sizes) // 2
        if max(sizes[half:]) <= max(sizes[:half]) or _growth_exponent(sizes) <= 1.0:
            verdict = "certified-recurrent"
    return NashWilliamsReport(tuple(ns), tuple(sizes), tuple(sums), max(sizes, default=0), verdict)


# -- product vectors --------------------------------------------------------------------


def xi(t: float) -> np.ndarray:
    """Unit vector in l2 of a two-point space with uniform weights."""
    return np.array([math.sqrt(2) * math.cos(t * math.pi / 4), math.sqrt(2) * math.sin(t * math.pi / 4)])


def xi_overlap(s: float, t: float) -> float:
    return float(np.dot(xi(s), xi(t)) / 2)


@dataclass(frozen=True)
class PirReport:
    labels: tuple[str, ...]
    overlaps: tuple[float, ...]
    lower_bounds: tuple[float, ...]
    generator_energies: tuple[float, ...]
    energy: float
    potential: tuple[float, ...] = field(repr=False)

    def holds(self) -> bool:
        return all(0 < o <= 1 and o >= lb for o, lb in zip(self.overlaps, self.lower_bounds))


def pir_overlap_report(graph: SchreierGraph, a: Sequence[float], labels: Iterable[str] | None = None) -> PirReport:
    """Overlap of the product vector with its translate, per generator.

    The factor at a point ``x`` is the inner product of the two-point vectors
    for ``a(x)`` and ``a(g x)``; points whose image falls outside the graph
    see potential 0 there, so ``a`` should vanish where edges are missing.
    """
    a = [float(v) for v in a]
    if len(a) != len(graph.vertices):
        raise ValidationError("potential has the wrong length")
    if any(v < 0 or v > 1 for v in a):
        raise ValidationError("potential must take values in [0, 1]")
    if labels is None:
        labels = [g.label for g in graph.gens if g.positive]
    labels = tuple(labels)
    E = Network.of(graph).energy(a)
    bound = math.exp(-math.pi ** 2 / 16 * E)
    overlaps, bounds, energies = [], [], []
    for label in labels:
        act = graph.action(label)
        prod = 1.0
        eg = 0.0
        for x, ax in enumerate(a):
            y = act.get(x)
            ay = a[y] if y is not None else 0.0
            prod *= math.cos(math.pi / 4 * (ax - ay))  # equals xi_overlap(ax, ay)
            eg += (ax - ay) ** 2
        overlaps.append(prod)
        bounds.append(bound)
        energies.append(eg)
    return PirReport(labels, tuple(overlaps), tuple(bounds), tuple(energies), E, tuple(a))


def cos_exp_margin(points: int = 10 ** 4) -> float:
    """Smallest value of cos(x) - exp(-x^2) on an even grid of |x| <= pi/4."""
    x = np.linspace(-math.pi / 4, math.pi / 4, points)
    return float(np.min(np.cos(x) - np.exp(-x ** 2)))


# -- Følner quality ---------------------------------------------------------------------


@dataclass(frozen=True)
class FolnerQuality:
    ratio: Fraction
    moved: dict

    def is_folner(self, eps: float) -> bool:
        return self.ratio < eps


def folner_quality(graph: SchreierGraph, F: Iterable, labels: Iterable[str] | None = None) -> FolnerQuality:
    """Sum over generators of |gF symmetric-difference F| divided by |F|.

    ``F`` holds vertex indices or vertex values of the graph.  Images that
    leave the graph count as leaving ``F``.
    """
    index = graph.index()
    pts = set()
    for v in F:
        if isinstance(v, int) and not isinstance(v, bool) and 0 <= v < len(graph.vertices) \
                and v not in index:
            pts.add(v)
        elif v in index:
            pts.add(index[v])
        else:
            raise ValidationError(f"{v!r} is not a vertex of the graph")
    if not pts:
        raise ValidationError("F is empty")
    if labels is None:
        labels = [g.label for g in graph.gens]
    moved = {}
    for label in labels:
        act = graph.action(label)
        image = {act.get(x, ("out", x)) for x in pts}
        moved[label] = len(image ^ pts)
    return FolnerQuality(Fraction(sum(moved.values()), len(pts)), moved)
