"""Convex decompositions of LP points into spanning trees.

The decomposition is found by column generation: a phase-1 master matches
the target edge vector exactly (one row per support edge plus a convexity
row), and the pricing oracle is a max-weight spanning tree on the master's
dual weights, restricted to the support graph.  Everything is exact.

A distribution is a plain list of Atom records; helper functions implement
reconstruction, rounding to a weight grid, and the canonical file format.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .instance import (Instance, edge, format_rational, parse_rational,
                       support, vector_cost)
from .simplex import ExactSimplex

ZERO = Fraction(0)
ONE = Fraction(1)


class DecompositionError(Exception):
    pass


@dataclass(frozen=True)
class Atom:
    """One spanning tree with its weight and an origin tag."""
    tree: frozenset
    weight: Fraction
    tag: str = "decompose"


# ----- spanning tree utilities -----

class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, v):
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, u, v):
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return False
        self.parent[ru] = rv
        return True


def is_spanning_tree(edges, n) -> bool:
    if len(edges) != n - 1:
        return False
    uf = UnionFind(n)
    for (u, v) in edges:
        if not (0 <= u < n and 0 <= v < n) or not uf.union(u, v):
            return False
    return True


def max_weight_spanning_tree(n, weights: dict, allowed=None):
    """Kruskal on -weight with canonical (edge-id) tie-breaks.

    Returns (frozenset of edges, total weight), or None if the allowed
    graph does not connect all n vertices.
    """
    pool = sorted(weights.keys() if allowed is None else allowed)
    pool.sort(key=lambda e: (-weights[e], e))
    uf = UnionFind(n)
    picked = []
    total = ZERO
    for e in pool:
        if uf.union(*e):
            picked.append(e)
            total += weights[e]
            if len(picked) == n - 1:
                return frozenset(picked), total
    return None


def tree_path(tree, start, goal):
    """Vertex sequence from start to goal inside a tree (edge set)."""
    adj = {}
    for (u, v) in tree:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    parent = {start: None}
    stack = [start]
    while stack:
        v = stack.pop()
        if v == goal:
            break
        for w in adj.get(v, ()):
            if w not in parent:
                parent[w] = v
                stack.append(w)
    if goal not in parent:
        raise ValueError(f"no path {start}..{goal} in tree")
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path


# ----- distributions -----

def reconstruct(dist) -> dict:
    """Sum of weight * tree incidence, as an exact edge vector."""
    x = {}
    for atom in dist:
        for e in atom.tree:
            x[e] = x.get(e, ZERO) + atom.weight
    return {e: v for e, v in x.items() if v != 0}


def total_weight(dist) -> Fraction:
    return sum((a.weight for a in dist), ZERO)


def distribution_cost(dist, inst: Instance) -> Fraction:
    return sum((a.weight * sum((inst.cost[e] for e in a.tree), ZERO)
                for a in dist), ZERO)


def decompose(x: dict, inst: Instance, tag="decompose"):
    """Write x exactly as a convex combination of spanning trees.

    Raises DecompositionError when pricing proves x is outside the
    spanning tree polytope (upstream bug: x should come from the LP).
    """
    n = inst.n
    edges = sorted(support(x))
    if len(edges) == n - 1 and all(x[e] == 1 for e in edges):
        tree = frozenset(edges)
        if not is_spanning_tree(tree, n):
            raise DecompositionError("integral x is not a spanning tree")
        return [Atom(tree, ONE, tag)]

    row_of = {e: i for i, e in enumerate(edges)}
    conv = len(edges)  # convexity row id
    sx = ExactSimplex()
    columns = {}       # simplex column id -> tree

    def add_tree(tree):
        coeffs = {row_of[e]: ONE for e in tree}
        coeffs[conv] = ONE
        columns[sx.add_column(ZERO, coeffs)] = tree

    for e in edges:
        sx.add_constraint({}, "=", x[e])
    sx.add_constraint({}, "=", ONE)
    sx.solve_phase1()  # sets up the all-artificial basis

    seeded = max_weight_spanning_tree(n, x, edges)
    if seeded is None:
        raise DecompositionError("support graph is not connected")
    add_tree(seeded[0])

    seen = {seeded[0]}
    limit = 20 * n * n + 200
    for _ in range(limit):
        gap = sx.solve_phase1()
        if gap == 0:
            break
        y = sx.duals("z1")
        weights = {e: y[row_of[e]] for e in edges}
        best = max_weight_spanning_tree(n, weights, edges)
        if best is None or best[1] + y[conv] <= 0:
            raise DecompositionError(
                f"pricing found no improving tree; residual gap {gap}")
        tree = best[0]
        assert tree not in seen, "pricing returned a known tree"
        seen.add(tree)
        add_tree(tree)
    else:
        raise DecompositionError("column generation did not converge")

    dist = []
    for j, tree in columns.items():
        w = sx.value_of(j)
        if w < 0:
            raise DecompositionError("negative weight in master solution")
        if w > 0:
            dist.append(Atom(tree, w, tag))
    assert total_weight(dist) == 1
    assert reconstruct(dist) == {e: v for e, v in x.items() if v != 0}
    assert len(dist) < n * n
    for atom in dist:
        assert is_spanning_tree(atom.tree, n)
    return dist


def round_distribution(dist, eps, n):
    """Round weights down onto the eps/n^2 grid.

    Returns (rounded, residual): rounded atoms carry their original tags
    with weights that are integer multiples of eps/n^2; the residual list
    holds the leftovers, tagged 'residual', with total mass < eps.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    grid = eps / (n * n)
    rounded, residual = [], []
    for atom in dist:
        steps = atom.weight / grid
        down = grid * (steps.numerator // steps.denominator)
        if down > 0:
            rounded.append(Atom(atom.tree, down, atom.tag))
        if atom.weight > down:
            residual.append(Atom(atom.tree, atom.weight - down, "residual"))
    mass = total_weight(residual)
    assert mass < eps, f"residual mass {mass} >= {eps}"
    return rounded, residual


# ----- canonical file format -----

def _tree_key(tree):
    return tuple(sorted(tree))


def emit_distribution(dist) -> str:
    """Blocks of `tree a/b` + one `u v` line per edge; trees sorted
    lexicographically by edge list, equal trees merged."""
    merged = {}
    for atom in dist:
        k = _tree_key(atom.tree)
        merged[k] = merged.get(k, ZERO) + atom.weight
    out = []
    for k in sorted(merged):
        out.append(f"tree {format_rational(merged[k])}")
        for (u, v) in k:
            out.append(f"{u} {v}")
    return "\n".join(out) + "\n"


def parse_distribution(text: str, n=None, tag="file"):
    dist = []
    cur_weight = None
    cur_edges = []

    def flush():
        if cur_weight is None:
            return
        if n is not None and not is_spanning_tree(cur_edges, n):
            raise ValueError(f"block is not a spanning tree: {cur_edges}")
        dist.append(Atom(frozenset(cur_edges), cur_weight, tag))

    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "tree":
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: malformed tree header")
            flush()
            cur_weight = parse_rational(parts[1])
            if cur_weight <= 0:
                raise ValueError(f"line {lineno}: weight must be positive")
            cur_edges = []
        else:
            if cur_weight is None:
                raise ValueError(f"line {lineno}: edge before any tree header")
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: expected `u v`")
            cur_edges.append(edge(int(parts[0]), int(parts[1])))
    flush()
    if not dist:
        raise ValueError("no trees in distribution file")
    return dist


def read_distribution(path, n=None):
    with open(path) as fh:
        return parse_distribution(fh.read(), n)


def write_distribution(path, dist):
    with open(path, "w") as fh:
        fh.write(emit_distribution(dist))
