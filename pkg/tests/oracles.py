"""Independent reference computations used only by the tests."""
from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from math import gcd

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import splu
from sympy import factorint, totient


def subdivided_tau(g, m: int = 10, q: int = 0, block: int = 512) -> float:
    """tau by brute force: split every edge into 2**m pieces, get r(x, q) at every
    grid point from the discrete Laplacian and sum (dr/dx)^2 / 4 piecewise."""
    pieces = 2 ** m
    n = len(g.vertices)
    ii, jj, ww = [], [], []
    chains = []
    nxt = n
    for e in g.edges:
        h = float(e.length) / pieces
        path = [e.u] + list(range(nxt, nxt + pieces - 1)) + [e.v]
        nxt += pieces - 1
        chains.append((path, h))
        for a, b in zip(path, path[1:]):
            ii += [a, b, a, b]
            jj += [a, b, b, a]
            ww += [1 / h, 1 / h, -1 / h, -1 / h]
    lap = coo_matrix((ww, (ii, jj)), shape=(nxt, nxt)).tocsc()
    keep = np.array([i for i in range(nxt) if i != q])
    lu = splu(lap[keep][:, keep].tocsc())
    diag = np.zeros(nxt)
    for start in range(0, len(keep), block):
        cols = np.arange(start, min(start + block, len(keep)))
        rhs = np.zeros((len(keep), len(cols)))
        rhs[cols, np.arange(len(cols))] = 1.0
        sol = lu.solve(rhs)
        diag[keep[cols]] = sol[cols, np.arange(len(cols))]
    total = 0.0
    for path, h in chains:
        r = diag[path]
        total += float(np.sum(np.diff(r) ** 2)) / h
    return total / 4


def cofactor_inverse(rows):
    """Inverse of a small matrix by the adjugate, determinants by permutation expansion."""
    n = len(rows)

    def det(a):
        total = Fraction(0)
        for perm in permutations(range(len(a))):
            sign = 1
            for i in range(len(perm)):
                for j in range(i + 1, len(perm)):
                    if perm[i] > perm[j]:
                        sign = -sign
            term = Fraction(sign)
            for i, j in enumerate(perm):
                term *= a[i][j]
            total += term
        return total

    d = det(rows)
    adj = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
            adj[j][i] = (-1) ** (i + j) * det(minor)
    return [[v / d for v in r] for r in adj]


def naive_solve(rows, b):
    """Textbook Gauss-Jordan over Fractions with partial pivoting on nonzero entries."""
    n = len(rows)
    a = [[Fraction(v) for v in r] + [Fraction(bi)] for r, bi in zip(rows, b)]
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            return None
        a[k], a[piv] = a[piv], a[k]
        for i in range(n):
            if i != k and a[i][k]:
                f = a[i][k] / a[k][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return [a[i][n] / a[i][i] for i in range(n)]


def shortest_paths(g):
    """Floyd-Warshall over exact edge lengths."""
    n = len(g.vertices)
    inf = None
    d = [[Fraction(0) if i == j else inf for j in range(n)] for i in range(n)]
    for e in g.edges:
        if e.u != e.v and (d[e.u][e.v] is None or e.length < d[e.u][e.v]):
            d[e.u][e.v] = d[e.v][e.u] = e.length
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] is not None and d[k][j] is not None:
                    via = d[i][k] + d[k][j]
                    if d[i][j] is None or via < d[i][j]:
                        d[i][j] = via
    return d


def genus_x0(n: int) -> int:
    """Genus of X0(n) from the general formula with elliptic points and cusps, n arbitrary."""
    f = factorint(n)
    mu = n
    for q in f:
        mu = mu * (q + 1) // q
    nu2 = 0 if n % 4 == 0 else int(np.prod([1 + (-1 if q % 4 == 3 else (1 if q % 4 == 1 else 0)) for q in f]))
    nu3 = 0 if n % 9 == 0 else int(np.prod([1 + (-1 if q % 3 == 2 else (1 if q % 3 == 1 else 0)) for q in f]))
    cusps = sum(int(totient(gcd(d, n // d))) for d in range(1, n + 1) if n % d == 0)
    g = 1 + Fraction(mu, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    assert g.denominator == 1
    return int(g)
