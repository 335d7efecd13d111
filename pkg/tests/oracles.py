"""Brute-force reference implementations the tests compare against.

Everything here favors obviously-correct code over speed: factorial and
powerset enumeration with plain Fractions.  Nothing is imported from the
package under test except the Instance container, so an agreement between
a fast routine and its oracle is evidence, not circularity.
"""

from fractions import Fraction
from itertools import combinations, permutations

ZERO = Fraction(0)


def cut_value(x, U):
    """x(delta(U)) computed straight from the definition."""
    U = set(U)
    return sum((v for (a, b), v in x.items() if (a in U) != (b in U)), ZERO)


def matching_min_cost(T, inst):
    """Minimum perfect-matching cost on T, by exhaustive pairing."""
    T = sorted(T)
    if len(T) % 2:
        raise ValueError("odd vertex set has no perfect matching")
    if len(T) > 10:
        raise ValueError("oracle is factorial; keep |T| small")

    def rec(rest):
        if not rest:
            return ZERO
        first, rest = rest[0], rest[1:]
        return min(inst.c(first, rest[i])
                   + rec(rest[:i] + rest[i + 1:])
                   for i in range(len(rest)))

    return rec(tuple(T))


def path_min_cost(inst):
    """Cheapest Hamiltonian s-t path by trying every internal order."""
    inner = [v for v in range(inst.n) if v not in (inst.s, inst.t)]
    if len(inner) > 7:
        raise ValueError("oracle is factorial; keep n small")
    best = None
    for perm in permutations(inner):
        seq = (inst.s,) + perm + (inst.t,)
        cost = sum(inst.c(a, b) for a, b in zip(seq, seq[1:]))
        if best is None or cost < best:
            best = cost
    return best


def s_side_subsets(inst):
    """All proper vertex subsets containing s but not all of V."""
    others = [v for v in range(inst.n) if v != inst.s]
    for size in range(len(others)):
        for extra in combinations(others, size):
            yield {inst.s, *extra}


def violated_cuts(x, inst):
    """Every violated cut constraint, by full subset enumeration."""
    out = []
    for U in s_side_subsets(inst):
        need = 2 if inst.t in U else 1
        load = cut_value(x, U)
        if load < need:
            out.append((frozenset(U), Fraction(need)))
    return out


def narrow_sets(x, inst):
    """All s-side sets with load < 2, as the cut-chain oracle."""
    return [frozenset(U) for U in s_side_subsets(inst)
            if cut_value(x, U) < 2]


def spans(edges, n):
    """|edges| = n-1 and the graph is connected (breadth-first search)."""
    if len(set(edges)) != n - 1:
        return False
    adj = {v: [] for v in range(n)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = {0}
    queue = [0]
    while queue:
        v = queue.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == n


def rational_rank(rows):
    """Rank over the rationals by Gaussian elimination on Fractions."""
    mat = [list(map(Fraction, row)) for row in rows]
    rank = 0
    cols = len(mat[0]) if mat else 0
    for col in range(cols):
        piv = next((r for r in range(rank, len(mat)) if mat[r][col]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = 1 / mat[rank][col]
        mat[rank] = [v * inv for v in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col]:
                factor = mat[r][col]
                mat[r] = [a - factor * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
        if rank == len(mat):
            break
    return rank
