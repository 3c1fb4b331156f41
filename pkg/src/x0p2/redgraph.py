"""Metrized dual (reduction) graphs of special fibers."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .exactkernel import fmt
from .fibermodel import FiberModel

# Components met by the cusp sections; kept as vertices so the cusps stay visible.
CUSP_COMPONENTS = ("C20", "C02")


@dataclass(frozen=True)
class Vertex:
    label: str
    genus: int


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: Fraction


@dataclass(frozen=True)
class MetrizedGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        n = len(self.vertices)
        for e in self.edges:
            if not (0 <= e.u < n and 0 <= e.v < n):
                raise ValueError(f"edge {e} references a missing vertex")
            if e.length <= 0:
                raise ValueError(f"edge length must be positive, got {e.length}")

    @property
    def labels(self) -> list[str]:
        return [v.label for v in self.vertices]

    def vertex_index(self, label: str) -> int:
        return self.labels.index(label)

    def valence(self, i: int) -> int:
        """Number of edge endpoints at vertex ``i`` (a self-loop counts twice)."""
        return sum((e.u == i) + (e.v == i) for e in self.edges)

    def valences(self) -> list[int]:
        val = [0] * len(self.vertices)
        for e in self.edges:
            val[e.u] += 1
            val[e.v] += 1
        return val

    def neighbors(self) -> list[list[tuple[int, int]]]:
        """Per vertex, the list of ``(edge index, other endpoint)``."""
        out: list[list[tuple[int, int]]] = [[] for _ in self.vertices]
        for k, e in enumerate(self.edges):
            out[e.u].append((k, e.v))
            if e.u != e.v:
                out[e.v].append((k, e.u))
        return out

    def is_connected(self, skip_edge: int | None = None) -> bool:
        n = len(self.vertices)
        if n == 0:
            return False
        nbrs = self.neighbors()
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for k, j in nbrs[i]:
                if k != skip_edge and j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == n

    def scaled(self, c) -> "MetrizedGraph":
        c = Fraction(c)
        return MetrizedGraph(self.vertices, tuple(Edge(e.u, e.v, c * e.length) for e in self.edges))


def _collapse(labels, genera, edge_list, keep):
    """Smooth away genus-0 valence-2 vertices, merging their two edges."""
    n = len(labels)
    edges = {k: list(e) for k, e in enumerate(edge_list)}
    inc: list[list[int]] = [[] for _ in range(n)]
    for k, (u, v, _) in edges.items():
        inc[u].append(k)
        inc[v].append(k)
    alive = [True] * n
    next_id = len(edge_list)
    todo = list(range(n - 1, -1, -1))
    while todo:
        x = todo.pop()
        if not alive[x] or genera[x] != 0 or len(inc[x]) != 2 or labels[x] in keep:
            continue
        e1, e2 = inc[x]
        if e1 == e2:  # x carries only a loop: the graph is a bare circle
            continue
        ends = []
        length = Fraction(0)
        for k in (e1, e2):
            u, v, L = edges.pop(k)
            ends.append(v if u == x else u)
            length += L
        y, z = ends
        inc[y].remove(e1)
        inc[z].remove(e2)
        edges[next_id] = [y, z, length]
        inc[y].append(next_id)
        inc[z].append(next_id)
        next_id += 1
        alive[x] = False
        inc[x] = []
        todo.extend((y, z))
    keep_idx = [i for i in range(n) if alive[i]]
    remap = {old: new for new, old in enumerate(keep_idx)}
    verts = tuple(Vertex(labels[i], genera[i]) for i in keep_idx)
    out_edges = []
    for u, v, L in edges.values():
        a, b = sorted((remap[u], remap[v]))
        out_edges.append(Edge(a, b, L))
    out_edges.sort(key=lambda e: (e.u, e.v, e.length))
    return MetrizedGraph(verts, tuple(out_edges))


def dual_graph(m: FiberModel, keep: tuple[str, ...] = CUSP_COMPONENTS) -> MetrizedGraph:
    """Dual graph of a fiber: unit edge per node, then genus-0 valence-2 vertices smoothed.

    Components named in ``keep`` are never smoothed; pass ``keep=()`` for the
    fully collapsed graph.
    """
    labels = m.ids
    genera = [c.genus for c in m.components]
    idx = m.index
    edge_list = []
    for a, b, mult in m.nodes:
        edge_list.extend([(idx[a], idx[b], Fraction(1))] * mult)
    return _collapse(labels, genera, edge_list, set(keep))


def total_length(g: MetrizedGraph) -> Fraction:
    return sum((e.length for e in g.edges), Fraction(0))


def betti1(g: MetrizedGraph) -> int:
    if not g.is_connected():
        raise ValueError("betti1 expects a connected graph")
    return len(g.edges) - len(g.vertices) + 1


def genus_oracle(p: int) -> int:
    """Genus of X0(p^2) from the index, elliptic points and cusps of Gamma0(p^2)."""
    nu2 = 2 if p % 4 == 1 else 0
    nu3 = 2 if p % 3 == 1 else 0
    g = 1 + Fraction(p * (p + 1), 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(p + 1, 2)
    assert g.denominator == 1, g
    return int(g)


def total_length_closed_form(p: int) -> int:
    k, cls = divmod(p, 12)
    a, b = {1: (2, 0), 5: (42, 18), 7: (32, 16), 11: (72, 60)}[cls]
    return 12 * k * k + a * k + b


def observed_genus_constant(p: int) -> Fraction:
    """The constant c in g = 1 + ((p+1)(p-6) - 12c)/12 actually realised by p."""
    return Fraction((p + 1) * (p - 6) - 12 * (genus_oracle(p) - 1), 12)


def to_dot(g: MetrizedGraph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    for v in g.vertices:
        lines.append(f'  "{v.label}" [label="{v.label} (g={v.genus})"];')
    for e in g.edges:
        lines.append(f'  "{g.vertices[e.u].label}" -- "{g.vertices[e.v].label}" [len="{fmt(e.length)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def genus_sum(g: MetrizedGraph) -> int:
    return sum(v.genus for v in g.vertices)


def positive_genera(g: MetrizedGraph) -> list[int]:
    return sorted(v.genus for v in g.vertices if v.genus > 0)


def edge_multiset(g: MetrizedGraph) -> dict[tuple[str, str, Fraction], int]:
    """Edges keyed by sorted endpoint labels and length, for order-free comparisons."""
    out: dict[tuple[str, str, Fraction], int] = defaultdict(int)
    for e in g.edges:
        a, b = sorted((g.vertices[e.u].label, g.vertices[e.v].label))
        out[a, b, e.length] += 1
    return dict(out)
