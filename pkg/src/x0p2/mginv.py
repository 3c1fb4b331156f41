"""Exact invariants of metrized graphs: resistance, tau constant, theta sums."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .exactkernel import Factorization, QMatrix, fmt
from .redgraph import MetrizedGraph, betti1, total_length


def _require_connected(g: MetrizedGraph):
    if not g.is_connected():
        raise ValueError("graph must be connected")


def laplacian(g: MetrizedGraph) -> QMatrix:
    """Weighted Laplacian with conductance 1/length per edge; loops carry no current."""
    n = len(g.vertices)
    rows: list[dict[int, Fraction]] = [{} for _ in range(n)]
    for e in g.edges:
        if e.u == e.v:
            continue
        w = 1 / e.length
        for a, b in ((e.u, e.v), (e.v, e.u)):
            rows[a][a] = rows[a].get(a, 0) + w
            rows[a][b] = rows[a].get(b, 0) - w
    return QMatrix(n, n, rows)


def grounded_inverse(g: MetrizedGraph, q: int) -> list[list[Fraction]]:
    """Inverse of the Laplacian with vertex ``q`` grounded, padded with zeros at ``q``.

    Entry (x, x) is r(x, q); r(x, y) = G[x][x] + G[y][y] - 2 G[x][y].
    """
    _require_connected(g)
    n = len(g.vertices)
    lap = laplacian(g)
    others = [i for i in range(n) if i != q]
    pos = {v: k for k, v in enumerate(others)}
    sub = QMatrix(n - 1, n - 1, [
        {pos[j]: v for j, v in lap.row(i).items() if j != q} for i in others
    ])
    fac = Factorization(sub)
    G = [[Fraction(0)] * n for _ in range(n)]
    for col in others:
        rhs = [Fraction(0)] * (n - 1)
        rhs[pos[col]] = Fraction(1)
        x = fac.solve(rhs)
        for i in others:
            G[i][col] = x[pos[i]]
    return G


@dataclass(frozen=True)
class ResistanceTable:
    labels: tuple[str, ...]
    table: tuple[tuple[Fraction, ...], ...]

    def __call__(self, x: int, y: int) -> Fraction:
        return self.table[x][y]

    def get(self, a: str, b: str) -> Fraction:
        return self.table[self.labels.index(a)][self.labels.index(b)]

    def pairs(self):
        n = len(self.labels)
        for i in range(n):
            for j in range(i + 1, n):
                yield i, j, self.table[i][j]


def effective_resistance(g: MetrizedGraph) -> ResistanceTable:
    n = len(g.vertices)
    G = grounded_inverse(g, 0)
    table = tuple(
        tuple(G[x][x] + G[y][y] - 2 * G[x][y] for y in range(n)) for x in range(n)
    )
    return ResistanceTable(tuple(g.labels), table)


def bridges(g: MetrizedGraph) -> list[bool]:
    """Flag per edge: True iff deleting it disconnects the graph."""
    return [e.u != e.v and not g.is_connected(skip_edge=k) for k, e in enumerate(g.edges)]


def tau_contributions(g: MetrizedGraph, q: int = 0) -> list[Fraction]:
    """Per-edge pieces of tau, (1/4) * integral of (d r(x, q)/dx)^2 over each edge.

    Off-edge resistances r_{G - e} come from a rank-one update of the grounded
    inverse, so one factorization serves every edge.
    """
    G = grounded_inverse(g, q)
    is_bridge = bridges(g)
    out = []
    for k, e in enumerate(g.edges):
        L = e.length
        if is_bridge[k]:
            out.append(L / 4)
            continue
        a, b = e.u, e.v
        if a == b:
            # loop: r(x, q) restricted to the loop is that of a circle through a
            out.append(L / 12)
            continue
        r_ab = G[a][a] + G[b][b] - 2 * G[a][b]
        denom = 1 - r_ab / L
        if denom == 0:
            raise AssertionError(f"edge {k} behaves like a bridge but is not one")
        ga = G[a][a] - G[a][b]
        gb = G[b][a] - G[b][b]
        scale = 1 / (L * denom)
        A = G[a][a] + scale * ga * ga
        B = G[b][b] + scale * gb * gb
        Gab = G[a][b] + scale * ga * gb
        R = A + B - 2 * Gab
        c = L + B - A
        out.append((c**3 - (c - 2 * L) ** 3) / (24 * (L + R) ** 2))
    return out


def tau_constant(g: MetrizedGraph, q: int = 0) -> Fraction:
    """Tau constant; ``q`` is the reference vertex and does not affect the value."""
    if not g.edges:
        return Fraction(0)
    return sum(tau_contributions(g, q), Fraction(0))


def vertex_weights(g: MetrizedGraph) -> list[int]:
    """v(x) - 2 + 2 g(x) for every vertex; negative values are kept."""
    return [v - 2 + 2 * vx.genus for v, vx in zip(g.valences(), g.vertices)]


def theta(g: MetrizedGraph, r: ResistanceTable, x: int, y: int) -> Fraction:
    w = vertex_weights(g)
    return w[x] * w[y] * r(x, y)


def theta_tilde(g: MetrizedGraph, r: ResistanceTable | None = None, ordered: bool = True) -> Fraction:
    """Sum of theta(x, y) over ordered vertex pairs (halve with ``ordered=False``)."""
    if len(g.vertices) <= 1:
        return Fraction(0)
    if r is None:
        r = effective_resistance(g)
    w = vertex_weights(g)
    total = Fraction(0)
    for i, j, rij in r.pairs():
        total += w[i] * w[j] * rij
    return 2 * total if ordered else total


@dataclass(frozen=True)
class BoundQuantities:
    q_tau: Fraction
    q_theta: Fraction


def bound_quantities(p: int, g: MetrizedGraph, genus: int, tau: Fraction | None = None,
                     theta_sum: Fraction | None = None) -> BoundQuantities:
    if tau is None:
        tau = tau_constant(g)
    if theta_sum is None:
        theta_sum = theta_tilde(g)
    scale = Fraction(1, (p * p - 1) * genus * genus)
    return BoundQuantities(8 * (genus - 1) * tau * scale, theta_sum * scale)


def graph_report(g: MetrizedGraph, verbose: bool = False) -> dict:
    r = effective_resistance(g) if len(g.vertices) > 1 else None
    th = theta_tilde(g, r) if r is not None else Fraction(0)
    out = {
        "l": fmt(total_length(g)),
        "betti1": betti1(g),
        "tau": fmt(tau_constant(g)),
        "theta_tilde": fmt(th),
        "theta_tilde_pairs": "ordered",
        "resistance": [] if r is None else [
            [r.labels[i], r.labels[j], fmt(v)] for i, j, v in r.pairs()
        ],
    }
    if verbose:
        out["theta_tilde_unordered"] = fmt(th / 2)
    return out
