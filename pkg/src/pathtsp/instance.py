"""Metric s-t path instances: value types, file I/O, and generators.

Conventions used across the package:
  * an Edge is a canonical tuple (u, v) with u < v (use edge() to build one);
  * an edge vector is a plain dict Edge -> Fraction, missing entries meaning 0;
  * all arithmetic is exact (fractions.Fraction), never floats.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction


def edge(u, v):
    """Canonical edge tuple (smaller endpoint first)."""
    if u == v:
        raise ValueError(f"self-loop at vertex {u}")
    return (u, v) if u < v else (v, u)


def complete_edges(n):
    """All edges of the complete graph on vertices 0..n-1, sorted."""
    return [(u, v) for u in range(n) for v in range(u + 1, n)]


def parse_rational(tok: str) -> Fraction:
    return Fraction(tok)


def format_rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


@dataclass(frozen=True)
class Instance:
    """A complete graph with symmetric rational costs and endpoints s != t."""

    n: int
    s: int
    t: int
    cost: dict = field(compare=True)  # Edge -> Fraction, all n*(n-1)/2 pairs

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two vertices")
        if not (0 <= self.s < self.n and 0 <= self.t < self.n):
            raise ValueError("s/t out of range")
        if self.s == self.t:
            raise ValueError("s and t must differ")

    def c(self, u, v) -> Fraction:
        return self.cost[edge(u, v)]


def vector_cost(x: dict, inst: Instance) -> Fraction:
    """c(x) = sum of x_e * cost(e)."""
    return sum((q * inst.cost[e] for e, q in x.items()), Fraction(0))


def edges_cost(edges, inst: Instance) -> Fraction:
    return sum((inst.cost[e] for e in edges), Fraction(0))


def support(x: dict):
    """Sorted edges carrying nonzero value."""
    return sorted(e for e, q in x.items() if q != 0)


def validate_metric(inst: Instance):
    """Every ordered triple (u,v,w) violating c(u,w) <= c(u,v) + c(v,w)."""
    bad = []
    c = inst.cost
    for u in range(inst.n):
        for w in range(inst.n):
            if u == w:
                continue
            cuw = c[edge(u, w)]
            for v in range(inst.n):
                if v == u or v == w:
                    continue
                if cuw > c[edge(u, v)] + c[edge(v, w)]:
                    bad.append((u, v, w))
    return bad


def metric_closure(n, weighted_edges):
    """All-pairs shortest path distances of a connected weighted graph.

    weighted_edges: dict Edge -> nonnegative length. Returns a full cost dict.
    """
    INF = None
    dist = [[INF] * n for _ in range(n)]
    for v in range(n):
        dist[v][v] = 0
    for (u, v), w in weighted_edges.items():
        if dist[u][v] is None or w < dist[u][v]:
            dist[u][v] = dist[v][u] = w
    for m in range(n):
        dm = dist[m]
        for u in range(n):
            dum = dist[u][m]
            if dum is None:
                continue
            du = dist[u]
            for v in range(n):
                if dm[v] is None:
                    continue
                alt = dum + dm[v]
                if du[v] is None or alt < du[v]:
                    du[v] = alt
    out = {}
    for u in range(n):
        for v in range(u + 1, n):
            if dist[u][v] is None:
                raise ValueError("support graph is disconnected")
            out[(u, v)] = Fraction(dist[u][v])
    return out


def random_metric_instance(n: int, seed: int) -> Instance:
    """Deterministic random metric: closure of a random connected integer-weighted graph."""
    if n < 3:
        raise ValueError("need n >= 3")
    rng = random.Random(f"pathtsp/{n}/{seed}")
    order = list(range(n))
    rng.shuffle(order)
    weights = {}
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        weights[edge(u, v)] = rng.randint(1, 20)
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in weights and rng.random() < 0.35:
                weights[(u, v)] = rng.randint(1, 20)
    cost = metric_closure(n, weights)
    s, t = rng.sample(range(n), 2)
    return Instance(n=n, s=s, t=t, cost=cost)


# ---------------------------------------------------------------------------
# file format: header "n s t", then one line "u v a/b" per edge
# ---------------------------------------------------------------------------

def emit_instance(inst: Instance) -> str:
    lines = [f"{inst.n} {inst.s} {inst.t}"]
    for (u, v) in complete_edges(inst.n):
        lines.append(f"{u} {v} {format_rational(inst.cost[(u, v)])}")
    return "\n".join(lines) + "\n"


def parse_instance(text: str, closure: bool = False) -> Instance:
    rows = [ln for ln in (raw.strip() for raw in text.splitlines())
            if ln and not ln.startswith("#")]
    if not rows:
        raise ValueError("empty instance file")
    head = rows[0].split()
    if len(head) != 3:
        raise ValueError(f"bad header {rows[0]!r}, expected 'n s t'")
    n, s, t = (int(tok) for tok in head)
    given = {}
    for ln in rows[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"bad edge line {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"vertex out of range in {ln!r}")
        e = edge(u, v)
        if e in given:
            raise ValueError(f"duplicate edge {e}")
        q = parse_rational(parts[2])
        if q < 0:
            raise ValueError(f"negative cost in {ln!r}")
        given[e] = q
    full = set(complete_edges(n))
    missing = full - set(given)
    if missing:
        if not closure:
            raise ValueError(f"{len(missing)} missing edge costs (use closure mode "
                             "to complete by shortest paths)")
        cost = metric_closure(n, given)
    else:
        cost = {e: given[e] for e in sorted(given)}
    return Instance(n=n, s=s, t=t, cost=cost)


def read_instance(path, closure=False) -> Instance:
    with open(path) as fh:
        return parse_instance(fh.read(), closure=closure)


def write_instance(inst: Instance, path):
    with open(path, "w") as fh:
        fh.write(emit_instance(inst))


def instance_digest(inst: Instance) -> str:
    return hashlib.sha256(emit_instance(inst).encode()).hexdigest()


# ---------------------------------------------------------------------------
# the wall fixture: a 20+4k vertex fractional solution whose internal narrow
# cuts all carry load 3/2, together with the four trees averaging to it
# ---------------------------------------------------------------------------

H = Fraction(1, 2)
Q = Fraction(1, 4)


def _wall_names(k):
    names = ["s", "a1", "a2", "b", "b2", "c1", "c2", "c3", "c4", "d", "d2", "e", "e2"]
    for i in range(1, k + 1):
        names += [f"dn{i}", f"db{i}", f"up{i}", f"ut{i}"]
    names += ["f", "f2", "g", "g2", "h1", "h2", "t"]
    return names


def build_appendix_instance(k: int = 0):
    """The hard wall family: (Instance, xstar, four-tree distribution).

    k >= 0 inserts k extra column pairs (one bottom-rung, one top-rung) in the
    middle of the wall, growing the instance by 4 vertices and 6 support edges
    per step.  Costs are the metric closure of the support graph with unit
    edge lengths; the fixture is structural, not cost-optimal.
    """
    from .tree_decomp import Atom  # local import, avoids a module cycle

    if k < 0:
        raise ValueError("k must be nonnegative")
    names = _wall_names(k)
    ix = {nm: i for i, nm in enumerate(names)}
    n = len(names)

    down_mids = [f"dn{i}" for i in range(1, k + 1)]
    up_mids = [f"up{i}" for i in range(1, k + 1)]
    bottoms_ins = [f"db{i}" for i in range(1, k + 1)]
    tops_ins = [f"ut{i}" for i in range(1, k + 1)]

    rungs = ([("a1", "a2"), ("b", "b2"), ("c1", "c2"), ("c3", "c4"),
              ("d", "d2"), ("e", "e2")]
             + [(f"dn{i}", f"db{i}") for i in range(1, k + 1)]
             + [(f"up{i}", f"ut{i}") for i in range(1, k + 1)]
             + [("f", "f2"), ("g", "g2"), ("h1", "h2")])

    mids = ["c3", "d", "e"]
    for i in range(1, k + 1):
        mids += [f"dn{i}", f"up{i}"]
    mids += ["f", "g"]
    mid_row = list(zip(mids, mids[1:])) + [("g", "h1")]

    tops = ["c4", "e2"] + tops_ins + ["g2"]
    top_row = [("c2", "c4")] + list(zip(tops, tops[1:]))

    bottoms = ["b2", "d2"] + bottoms_ins + ["f2", "h1"]
    bottom_row = list(zip(bottoms, bottoms[1:]))

    half_edges = ([("a2", "c2"), ("a2", "b"), ("b", "c1"), ("c1", "c3")]
                  + mid_row + top_row + bottom_row)
    quarter_edges = [("s", "b2"), ("a1", "b2"), ("g2", "h2"), ("g2", "t")]
    threequarter_edges = [("s", "a1"), ("h2", "t")]

    xstar = {}
    for u, v in rungs:
        xstar[edge(ix[u], ix[v])] = Fraction(1)
    for u, v in half_edges:
        xstar[edge(ix[u], ix[v])] = H
    for u, v in quarter_edges:
        xstar[edge(ix[u], ix[v])] = Q
    for u, v in threequarter_edges:
        xstar[edge(ix[u], ix[v])] = Fraction(3, 4)
    assert len(xstar) == 30 + 6 * k

    unit = {e: 1 for e in xstar}
    cost = metric_closure(n, unit)
    inst = Instance(n=n, s=ix["s"], t=ix["t"], cost=cost)

    # the four trees averaging to xstar
    up_exits = list(zip(["c3", "e"] + up_mids, ["d"] + down_mids + ["f"])) + [("g", "h1")]
    down_exits = list(zip(["d"] + down_mids, ["e"] + up_mids)) + [("f", "g")]

    def tr(pairs):
        return frozenset(edge(ix[u], ix[v]) for u, v in pairs)

    t1 = tr(rungs + [("s", "a1"), ("a2", "c2"), ("a2", "b")] + top_row + up_exits
            + [("g2", "t")])
    t2 = tr(rungs + [("s", "a1"), ("a2", "c2"), ("b", "c1")] + top_row + down_exits
            + [("g2", "h2"), ("h2", "t")])
    t3 = tr(rungs + [("s", "b2"), ("a2", "b"), ("c1", "c3")] + bottom_row + up_exits
            + [("h2", "t")])
    t4 = tr(rungs + [("s", "a1"), ("a1", "b2"), ("b", "c1"), ("c1", "c3")]
            + bottom_row + down_exits + [("h2", "t")])

    p4 = [Atom(tree=t, weight=Q, tag="fixture") for t in (t1, t2, t3, t4)]
    for atom in p4:
        assert len(atom.tree) == n - 1
    acc = {}
    for atom in p4:
        for e in atom.tree:
            acc[e] = acc.get(e, Fraction(0)) + atom.weight
    assert acc == xstar, "four-tree average must reproduce xstar"
    return inst, xstar, p4


def appendix_certificate_sets(k: int = 0):
    """Vertex sets whose cut constraints are tight at the fixture's xstar.

    The rung pairs plus the c-block quadruple plus every singleton: together
    exactly as many sets as support edges, with linearly independent cut
    incidence vectors.
    """
    names = _wall_names(k)
    ix = {nm: i for i, nm in enumerate(names)}
    pair_names = ([("a1", "a2"), ("b", "b2"), ("c1", "c2"), ("c3", "c4"),
                   ("d", "d2"), ("e", "e2")]
                  + [(f"dn{i}", f"db{i}") for i in range(1, k + 1)]
                  + [(f"up{i}", f"ut{i}") for i in range(1, k + 1)]
                  + [("f", "f2"), ("g", "g2"), ("h1", "h2")])
    sets = [frozenset(ix[u] for u in pair) for pair in pair_names]
    sets.append(frozenset(ix[u] for u in ("c1", "c2", "c3", "c4")))
    sets += [frozenset([v]) for v in range(len(names))]
    return sets


def appendix_wall_cut_indices(k: int = 0):
    """Chain indices (0-based, in the full narrow-cut chain) of the wall cuts."""
    return list(range(5, 9 + 2 * k))
