"""Special fibers of the minimal regular model of X0(p^2) at one prime above p.

A fiber is a list of components (with geometric genus) and a multiset of
nodes.  Self-intersections are always recomputed from the fact that every
component meets the whole fiber trivially, so the intersection matrix has
zero row sums.  All intersection numbers are in units of log #k = log p^2.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property, lru_cache

from sympy import isprime

from .exactkernel import QMatrix

CLASSES = (1, 5, 7, 11)


class InvalidPrime(ValueError):
    """Raised for inputs that have no semi-stable model to build."""


@dataclass(frozen=True)
class ResidueClass:
    p: int
    cls: int
    k: int

    def __post_init__(self):
        if self.cls not in CLASSES or self.p != 12 * self.k + self.cls:
            raise ValueError(f"inconsistent residue class {self}")


@dataclass(frozen=True)
class Component:
    id: str
    genus: int
    kind: str = "principal"  # or "chain"


def classify_prime(p: int) -> ResidueClass:
    if not isinstance(p, int) or p <= 3 or not isprime(p):
        raise InvalidPrime(f"{p} is not an odd prime > 3")
    if p == 5:
        raise InvalidPrime("p = 5: X0(25) has genus 0 (genus zero curve), no semi-stable model of positive genus")
    return ResidueClass(p, p % 12, p // 12)


@dataclass(frozen=True, eq=False)
class FiberModel:
    residue: ResidueClass
    components: tuple[Component, ...]
    nodes: tuple[tuple[str, str, int], ...]
    selfints: tuple[int, ...]

    @cached_property
    def index(self) -> dict[str, int]:
        return {c.id: i for i, c in enumerate(self.components)}

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.components]

    def __len__(self) -> int:
        return len(self.components)

    def component(self, cid: str) -> Component:
        return self.components[self.index[cid]]

    def selfint(self, cid: str) -> int:
        return self.selfints[self.index[cid]]

    @cached_property
    def adjacency(self) -> list[dict[int, int]]:
        adj: list[dict[int, int]] = [defaultdict(int) for _ in self.components]
        idx = self.index
        for a, b, mult in self.nodes:
            i, j = idx[a], idx[b]
            adj[i][j] += mult
            adj[j][i] += mult
        return [dict(d) for d in adj]

    def intersection(self, a: str, b: str) -> int:
        i, j = self.index[a], self.index[b]
        if i == j:
            return self.selfints[i]
        return self.adjacency[i].get(j, 0)

    @cached_property
    def matrix(self) -> QMatrix:
        rows = []
        for i, adj in enumerate(self.adjacency):
            r = dict(adj)
            r[i] = self.selfints[i]
            rows.append(r)
        n = len(self.components)
        return QMatrix(n, n, rows)

    def to_json(self) -> dict:
        return {
            "p": self.residue.p,
            "class": self.residue.cls,
            "k": self.residue.k,
            "components": [
                {"id": c.id, "genus": c.genus, "self_intersection": s}
                for c, s in zip(self.components, self.selfints)
            ],
            "nodes": [[a, b, m] for a, b, m in self.nodes],
        }


def _assemble(rc: ResidueClass, components: list[Component], nodes: dict[tuple[str, str], int]) -> FiberModel:
    """Canonicalize node order and derive self-intersections from zero row sums."""
    idx = {c.id: i for i, c in enumerate(components)}
    if len(idx) != len(components):
        raise ValueError("duplicate component ids")
    merged: dict[tuple[int, int], int] = defaultdict(int)
    for (a, b), m in nodes.items():
        i, j = sorted((idx[a], idx[b]))
        if i == j:
            raise ValueError(f"self-node on {a} is not modeled")
        merged[i, j] += m
    degree = [0] * len(components)
    for (i, j), m in merged.items():
        degree[i] += m
        degree[j] += m
    ordered = tuple(
        (components[i].id, components[j].id, m) for (i, j), m in sorted(merged.items()) if m
    )
    return FiberModel(rc, tuple(components), ordered, tuple(-d for d in degree))


def build_blueprint(rc: ResidueClass) -> FiberModel:
    """Fiber before minimality cleanup, one layout per residue class of p mod 12."""
    k, cls = rc.k, rc.cls
    # (genus of C11_j, genus of L_i, length of the A/B chains)
    table = {
        1: (3 * k * k - 3 * k + 1, 6 * k, 6 * k - 1),
        5: (3 * k * k - k, 6 * k + 2, 6 * k + 1),
        7: (3 * k * k, 6 * k + 3, 6 * k + 2),
        11: (3 * k * k + 2 * k, 6 * k + 5, 6 * k + 4),
    }
    g11, gL, ab = table[cls]
    has_e = cls in (7, 11)
    has_f = cls in (5, 11)

    comps = [
        Component("C20", 0),
        Component("C02", 0),
        Component("C11_1", g11),
        Component("C11_2", g11),
    ]
    comps += [Component(f"L_{i}", gL) for i in range(1, k + 1)]
    if has_e:
        comps.append(Component("E", 3 * k + 1 if cls == 7 else 3 * k + 2))
    if has_f:
        comps.append(Component("F", 2 * k if cls == 5 else 2 * k + 1))
    if has_e:
        comps += [Component("U", 0, "chain"), Component("V", 0, "chain")]
    if has_f:
        comps += [Component(n, 0, "chain") for n in ("S1", "S2", "T1", "T2")]

    nodes: dict[tuple[str, str], int] = defaultdict(int)

    def chain(names: list[str], start: str, end: str):
        comps.extend(Component(n, 0, "chain") for n in names)
        path = [start, *names, end]
        for a, b in zip(path, path[1:]):
            nodes[a, b] += 1

    for i in range(1, k + 1):
        chain([f"A_{i}_{l}" for l in range(1, ab + 1)], "C20", f"L_{i}")
        chain([f"B_{i}_{l}" for l in range(1, ab + 1)], "C02", f"L_{i}")
        nodes[f"L_{i}", "C11_1"] += 1
        nodes[f"L_{i}", "C11_2"] += 1
    if has_e:
        mn = 12 * k + 5 if cls == 7 else 12 * k + 9
        chain([f"M_{j}" for j in range(1, mn + 1)], "C20", "E")
        chain([f"N_{j}" for j in range(1, mn + 1)], "C02", "E")
        for a, b in (("E", "U"), ("U", "C11_1"), ("E", "V"), ("V", "C11_2")):
            nodes[a, b] += 1
    if has_f:
        gh = 18 * k + 5 if cls == 5 else 18 * k + 14
        chain([f"G_{j}" for j in range(1, gh + 1)], "C20", "F")
        chain([f"H_{j}" for j in range(1, gh + 1)], "C02", "F")
        for a, b in (("F", "S1"), ("S1", "S2"), ("S2", "C11_1"),
                     ("F", "T1"), ("T1", "T2"), ("T2", "C11_2")):
            nodes[a, b] += 1
    return _assemble(rc, comps, nodes)


def contract_minimal(m: FiberModel) -> FiberModel:
    """Blow down genus-0 (-1)-curves until none remain."""
    n = len(m.components)
    adj = [dict(d) for d in m.adjacency]
    selfint = list(m.selfints)
    alive = [True] * n
    alive_count = n
    queue = [i for i in range(n) if m.components[i].genus == 0 and selfint[i] == -1]
    while queue:
        x = queue.pop()
        if not alive[x] or m.components[x].genus != 0 or selfint[x] != -1 or alive_count == 1:
            continue
        alive[x] = False
        alive_count -= 1
        nbrs = adj[x]
        for y, yx in nbrs.items():
            del adj[y][x]
            selfint[y] += yx * yx
            for z, xz in nbrs.items():
                if z > y:
                    adj[y][z] = adj[y].get(z, 0) + yx * xz
                    adj[z][y] = adj[y][z]
            if m.components[y].genus == 0 and selfint[y] == -1:
                queue.append(y)
        adj[x] = {}
    if alive_count == n:
        return m
    keep = [i for i in range(n) if alive[i]]
    comps = [m.components[i] for i in keep]
    nodes = {}
    for i in keep:
        for j, mult in adj[i].items():
            if i < j and mult:
                nodes[m.components[i].id, m.components[j].id] = mult
    out = _assemble(m.residue, comps, nodes)
    check = tuple(selfint[i] for i in keep)
    if len(keep) > 1 and check != out.selfints:
        raise AssertionError("blow-down broke zero row sums")
    if len(keep) == 1:
        out = FiberModel(m.residue, out.components, out.nodes, (0,))
    return out


def is_connected(m: FiberModel) -> bool:
    n = len(m.components)
    if n == 0:
        return False
    seen = {0}
    stack = [0]
    adj = m.adjacency
    while stack:
        i = stack.pop()
        for j in adj[i]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == n


def validate(m: FiberModel) -> list[str]:
    """Violations of the fiber invariants; empty list means the model is sound."""
    violations = []
    mat = m.matrix
    if not mat.is_symmetric():
        violations.append("symmetry: intersection matrix is not symmetric")
    for cid, s in zip(m.ids, mat.row_sums()):
        if s != 0:
            violations.append(f"row sum: {cid} row sums to {s}")
    if not is_connected(m):
        violations.append("connectedness: fiber is disconnected")
    if len(m.components) > 1:
        for c, s in zip(m.components, m.selfints):
            if c.genus == 0 and -s < 2:
                violations.append(f"semi-stability: genus-0 component {c.id} has self-intersection {s}")
    return violations


def count_nodes(m: FiberModel) -> int:
    return sum(mult for _, _, mult in m.nodes)


@lru_cache(maxsize=64)
def minimal_model(p: int) -> FiberModel:
    return contract_minimal(build_blueprint(classify_prime(p)))


def node_count_closed_form(p: int) -> int:
    """Node count per fiber as a closed form in p, one formula per residue class."""
    cls = p % 12
    num = {1: p * p - 1, 5: (p + 1) * (p + 31), 7: (p + 1) * (p + 17), 11: (p + 1) * (p + 49)}[cls]
    assert num % 12 == 0
    return num // 12
