"""Narrow cuts of an LP point: the chain, its statistics, and checks.

A cut here is delta(L) for a vertex set L with s in L, t not in L; it is
narrow when its load x(delta(L)) is below 2.  For a feasible LP point the
narrow cuts are totally ordered by inclusion of their s-sides — that chain,
the sub-chain of xi-narrow cuts (load < xi), and the per-cut crossing
statistics of a tree distribution are what the reassembly stage consumes.

Levels are carried both as sorted vertex tuples and as int bitmasks; the
bitmask makes "does edge (u,v) cross cut i" a two-shift test.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from .flows import max_flow_min_cut
from .instance import Instance, format_rational
from .tree_decomp import total_weight

ZERO = Fraction(0)
ONE = Fraction(1)
TWO = Fraction(2)
XI_DEFAULT = Fraction(173, 100)

ENUM_LIMIT = 22
INT64_GUARD = 1 << 61


class ChainError(Exception):
    """The load<2 cuts fail to nest — the input x cannot be LP-feasible."""


def crossing_mask(mask: int, u: int, v: int) -> bool:
    return ((mask >> u) & 1) != ((mask >> v) & 1)


def crossings(tree, mask: int) -> int:
    return sum(1 for (u, v) in tree if ((mask >> u) ^ (mask >> v)) & 1)


def load_of_mask(x: dict, mask: int) -> Fraction:
    total = ZERO
    for (u, v), val in x.items():
        if ((mask >> u) ^ (mask >> v)) & 1:
            total += val
    return total


@dataclass
class CutChain:
    levels: list          # sorted vertex tuples, strictly nested s-sides
    masks: list           # int bitmask per level
    loads: list           # Fraction load per level
    xi: Fraction
    xi_indices: list      # chain indices with load < xi
    inst: Instance = None # the instance and LP point the chain belongs to
    x: dict = None

    def __len__(self):
        return len(self.levels)

    def cut_edges(self, i, x: dict):
        mask = self.masks[i]
        return sorted(e for e in x if crossing_mask(mask, *e))


def narrow_cuts(x: dict, inst: Instance, xi=XI_DEFAULT,
                method="auto") -> CutChain:
    """All cuts with load < 2, assembled into the nested chain.

    method: 'auto' picks subset enumeration for n <= 22, otherwise the
    all-pairs exact max-flow route; 'enumerate'/'flows' force one path.
    """
    n, s, t = inst.n, inst.s, inst.t
    xi = Fraction(xi)
    if method == "auto":
        method = "enumerate" if n <= ENUM_LIMIT else "flows"
    if method == "enumerate":
        masks = _narrow_masks_enumerate(x, n)
    elif method == "flows":
        masks = _narrow_masks_flows(x, n, s, t)
    else:
        raise ValueError(f"unknown method {method!r}")

    full = (1 << n) - 1
    oriented = set()
    for mask in masks:
        if not (mask >> s) & 1:
            mask ^= full
        if (mask >> t) & 1:
            raise ChainError("narrow cut contains both path ends")
        oriented.add(mask)
    levels = sorted(oriented, key=lambda m: (bin(m).count("1"), m))
    for a, b in zip(levels, levels[1:]):
        if a & ~b:
            raise ChainError("narrow cuts do not form a chain")
    if levels[0] != 1 << s:
        raise ChainError("chain does not start at {s}")
    if levels[-1] != full ^ (1 << t):
        raise ChainError("chain does not end at V-{t}")

    loads = [load_of_mask(x, m) for m in levels]
    assert loads[0] == 1 and loads[-1] == 1, "end cuts must have load 1"
    assert all(lo < 2 for lo in loads)
    xi_indices = [i for i, lo in enumerate(loads) if lo < xi]
    tuples = [tuple(v for v in range(n) if (m >> v) & 1) for m in levels]
    return CutChain(levels=tuples, masks=levels, loads=loads, xi=xi,
                    xi_indices=xi_indices, inst=inst,
                    x={e: v for e, v in x.items() if v != 0})


def _narrow_masks_enumerate(x: dict, n: int):
    items = sorted((e, v) for e, v in x.items() if v != 0)
    m = 1 << (n - 1)
    idx2 = (np.arange(m, dtype=np.int64) << 1) | 1
    denom = lcm(*[v.denominator for _, v in items]) if items else 1
    max_load = sum((v for _, v in items), ZERO) * 2
    found = []
    if denom * (max_load.numerator // max_load.denominator + 1) < INT64_GUARD:
        load = np.zeros(m, dtype=np.int64)
        for (u, v), val in items:
            load += (((idx2 >> u) ^ (idx2 >> v)) & 1) * int(val * denom)
        bad = np.nonzero((load < 2 * denom) & (idx2 != (1 << n) - 1))[0]
        found = [int(idx2[i]) for i in bad.tolist()]
    else:
        loadf = np.zeros(m)
        for (u, v), val in items:
            loadf += (((idx2 >> u) ^ (idx2 >> v)) & 1) * float(val)
        cand = np.nonzero((loadf < 2 + 1e-9) & (idx2 != (1 << n) - 1))[0]
        for i in cand.tolist():
            mask = int(idx2[i])
            if load_of_mask(x, mask) < 2:
                found.append(mask)
    return found


def _narrow_masks_flows(x: dict, n: int, s: int, t: int):
    """All-pairs min cuts.  Complete because a narrow cut is the UNIQUE
    narrow cut separating any (a, b) drawn from the two chain gaps around
    it, and a min cut of value < 2 is itself narrow."""
    cap = {e: v for e, v in x.items() if v != 0}
    found = set()
    for a in range(n):
        for b in range(a + 1, n):
            value, side = max_flow_min_cut(cap, a, b)
            if value < 2:
                mask = 0
                for v in side:
                    mask |= 1 << v
                found.add(mask)
    return found


# ----- pairwise structure -----

def shared_load(x: dict, mask_a: int, mask_b: int) -> Fraction:
    """x-mass on edges lying in BOTH cuts."""
    total = ZERO
    for (u, v), val in x.items():
        if (((mask_a >> u) ^ (mask_a >> v)) & 1
                and ((mask_b >> u) ^ (mask_b >> v)) & 1):
            total += val
    return total


def pairwise_intersection_check(chain: CutChain, x: dict):
    """Margins  load(C)/2 + load(C')/2 - 1 - x(C cap C')  for all pairs.

    Raises if any margin is negative (LP feasibility would be broken)."""
    margins = []
    for i in range(len(chain)):
        for j in range(i + 1, len(chain)):
            margin = (chain.loads[i] / 2 + chain.loads[j] / 2 - 1
                      - shared_load(x, chain.masks[i], chain.masks[j]))
            if margin < 0:
                raise ValueError(
                    f"cut pair ({i},{j}) has negative margin {margin}")
            margins.append(margin)
    return margins


# ----- per-cut crossing statistics of a distribution -----

@dataclass
class CutStat:
    load: Fraction
    p_even: Fraction
    p_one: Fraction
    p_many: Fraction


def cut_stats(chain: CutChain, dist) -> list:
    """One CutStat per chain level; asserts the crossing identities."""
    out = []
    total = total_weight(dist)
    for i, mask in enumerate(chain.masks):
        load = chain.loads[i]
        p_even = ZERO
        p_one = ZERO
        p_many = ZERO
        weighted = ZERO
        for atom in dist:
            k = crossings(atom.tree, mask)
            assert k >= 1, "a spanning tree must cross every cut"
            weighted += atom.weight * k
            if k % 2 == 0:
                p_even += atom.weight
            elif k == 1:
                p_one += atom.weight
            p_many += atom.weight * ((k - 1) // 2)
        if total == 1:
            assert weighted == load, "x(C) = sum p_S |S cap C| failed"
            assert p_even <= load - 1
            assert p_one >= 2 - load
            assert p_many == (load - 1 - p_even) / 2
        out.append(CutStat(load=load, p_even=p_even, p_one=p_one,
                           p_many=p_many))
    return out


# ----- report formatting -----

def format_cut_report(chain: CutChain) -> list:
    lines = ["cuts:"]
    for i, level in enumerate(chain.levels):
        ids = " ".join(str(v) for v in level)
        xi_flag = "yes" if i in chain.xi_indices else "no"
        lines.append(f"  {ids} load {format_rational(chain.loads[i])} "
                     f"xi_narrow: {xi_flag}")
    return lines
