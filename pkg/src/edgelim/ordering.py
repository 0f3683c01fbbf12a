"""Symbolic elimination engine: orderings, heuristics, and cost accounting.

Eliminating all edges of a hypergraph one by one models the numeric
eigensolver in :mod:`edgelim.eliminator`: the vertex count of an edge at the
moment it is eliminated equals the number of secular-equation roots that step
would have to compute, so an ordering is scored by the per-step sizes |x| and
the totals sum(|x|) and sum(|x|^2).

Greedy heuristics:

* ``"mi"``  - fewest incident edges (analogous to minimum degree),
* ``"mr"``  - smallest current vertex count |x|,
* ``"mc1"`` / ``"mc2"`` - |x|^k plus the growth |x u e|^k - |e|^k this
  elimination inflicts on every intersecting edge e (one-step look-ahead),
  k = 1 or 2.

Ties are broken by smallest edge id.  ``Random`` and ``Given`` orderings are
replayed rather than searched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .hypergraph import Hypergraph

__all__ = [
    "GREEDY_HEURISTICS",
    "Random",
    "Given",
    "HeuristicKind",
    "CostReport",
    "BaselineStats",
    "EliminationState",
    "run_elimination",
    "simulate_ordering",
    "random_baseline",
    "symbolic_ge_fill_equivalence",
    "brute_force_optimal",
]

GREEDY_HEURISTICS = ("mi", "mr", "mc1", "mc2")

RNG_NAME = "pcg64"  # numpy PCG64; per-trial streams are seeded as seed + trial


@dataclass(frozen=True)
class Random:
    """Replay a uniformly random ordering drawn from a seeded generator."""

    seed: int


@dataclass(frozen=True)
class Given:
    """Replay an explicit ordering (a permutation of the live edge ids)."""

    ordering: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "ordering", tuple(self.ordering))


HeuristicKind = Union[str, Random, Given]


@dataclass(frozen=True)
class CostReport:
    """Per-step elimination sizes plus the two derived cost totals."""

    per_step_sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "per_step_sizes", tuple(int(s) for s in self.per_step_sizes))

    @property
    def total_roots(self) -> int:
        return sum(self.per_step_sizes)

    @property
    def total_root_cost(self) -> int:
        return sum(s * s for s in self.per_step_sizes)

    def to_json_dict(self) -> dict:
        return {
            "per_step_sizes": list(self.per_step_sizes),
            "total_roots": self.total_roots,
            "total_root_cost": self.total_root_cost,
        }


@dataclass(frozen=True)
class BaselineStats:
    """Order statistics over random-ordering trials, plus the raw values."""

    trials: int
    seed: int
    rng: str
    roots_raw: tuple[int, ...]
    cost_raw: tuple[int, ...]

    def _summary(self, raw: tuple[int, ...]) -> dict:
        q1, med, q3 = np.percentile(raw, [25, 50, 75])
        return {
            "min": float(min(raw)),
            "q1": float(q1),
            "median": float(med),
            "q3": float(q3),
            "max": float(max(raw)),
        }

    @property
    def roots_summary(self) -> dict:
        return self._summary(self.roots_raw)

    @property
    def cost_summary(self) -> dict:
        return self._summary(self.cost_raw)

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "rng": self.rng,
            "total_roots": dict(self.roots_summary, raw=list(self.roots_raw)),
            "total_root_cost": dict(self.cost_summary, raw=list(self.cost_raw)),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


class EliminationState:
    """Mutable elimination engine over one hypergraph.

    Holds, per live edge, its current vertex set (a row of a boolean incidence
    matrix) and the matrix of pairwise intersection sizes, which makes the
    heuristic values cheap to maintain incrementally.  The input hypergraph is
    never mutated.
    """

    def __init__(self, g: Hypergraph):
        edges = sorted(g.edges, key=lambda e: e.id)
        self.ids = np.array([e.id for e in edges], dtype=np.int64)
        self._pos = {int(e.id): k for k, e in enumerate(edges)}
        m, n = len(edges), g.n_vertices
        self.m = m
        self.n_vertices = n
        self._inc = np.zeros((m, n), dtype=np.uint8)
        for k, e in enumerate(edges):
            self._inc[k, list(e.vertices)] = 1
        if m:
            f = self._inc.astype(np.float32)
            self._isect = np.rint(f @ f.T).astype(np.int64)
        else:
            self._isect = np.zeros((0, 0), dtype=np.int64)
        self._sizes = self._isect.diagonal().copy() if m else np.zeros(0, dtype=np.int64)
        self._live = np.ones(m, dtype=bool)

    # -- bookkeeping -------------------------------------------------------

    def _position(self, edge_id: int) -> int:
        k = self._pos.get(edge_id)
        if k is None:
            raise KeyError(f"unknown edge id {edge_id}")
        if not self._live[k]:
            raise ValueError(f"edge {edge_id} has already been eliminated")
        return k

    def live_edge_ids(self) -> list[int]:
        return [int(i) for i in self.ids[self._live]]

    def edge_vertices(self, edge_id: int) -> tuple[int, ...]:
        k = self._position(edge_id)
        return tuple(int(v) for v in np.nonzero(self._inc[k])[0])

    def neighbors(self, edge_id: int) -> list[int]:
        k = self._position(edge_id)
        mask = (self._isect[k] > 0) & self._live
        mask[k] = False
        return [int(i) for i in self.ids[mask]]

    # -- heuristic values ----------------------------------------------------

    def mu_r(self, edge_id: int) -> int:
        """Current vertex count of the edge."""
        return int(self._sizes[self._position(edge_id)])

    def mu_i(self, edge_id: int, *, include_self: bool = False) -> int:
        """Number of live edges intersecting the edge (itself excluded)."""
        k = self._position(edge_id)
        cnt = int(np.count_nonzero((self._isect[k] > 0) & self._live))
        return cnt if include_self else cnt - 1

    def mu_c(self, edge_id: int, k: int) -> int:
        """|x|^k plus the growth |x u e|^k - |e|^k over intersecting edges."""
        if k not in (1, 2):
            raise ValueError(f"look-ahead exponent must be 1 or 2, got {k}")
        p = self._position(edge_id)
        live = np.nonzero(self._live)[0]
        c = self._isect[p, live]
        ss = self._sizes[live]
        sx = self._sizes[p]
        u = sx + ss - c
        grow = np.where((c > 0) & (live != p), u**k - ss**k, 0)
        return int(sx**k + grow.sum())

    # -- elimination ---------------------------------------------------------

    def eliminate(self, edge_id: int) -> int:
        """Eliminate the edge; returns its size at elimination time."""
        k = self._position(edge_id)
        size = int(self._sizes[k])
        self._eliminate_position(k)
        return size

    def _eliminate_position(self, k: int) -> np.ndarray:
        """Core update; returns the positions of the edges that grew."""
        nb = np.nonzero((self._isect[k] > 0) & self._live)[0]
        nb = nb[nb != k]
        self._live[k] = False
        if nb.size:
            # After the merge, |e u f| for e, f both intersecting x changes by
            # |x| - |e n f n x|; pairs where one side misses x are unaffected.
            xcols = np.nonzero(self._inc[k])[0]
            sub = self._inc[np.ix_(nb, xcols)].astype(np.float32)
            triple = np.rint(sub @ sub.T).astype(np.int64)
            self._isect[np.ix_(nb, nb)] += self._sizes[k] - triple
            self._inc[nb] |= self._inc[k]
            self._sizes[nb] = self._isect[nb, nb]
        return nb


class _GreedySelector:
    """Incrementally maintained heuristic values over an EliminationState."""

    def __init__(self, state: EliminationState, kind: str, *,
                 full_recompute: bool = False, mu_i_includes_self: bool = False):
        self.state = state
        self.kind = kind
        self.full = full_recompute
        self.self_count = 1 if mu_i_includes_self else 0
        self.mu = np.zeros(state.m, dtype=np.int64)
        self._recompute(np.nonzero(state._live)[0])

    def _recompute(self, positions: np.ndarray) -> None:
        if positions.size == 0:
            return
        st = self.state
        if self.kind == "mr":
            self.mu[positions] = st._sizes[positions]
            return
        live = np.nonzero(st._live)[0]
        block = st._isect[np.ix_(positions, live)]
        if self.kind == "mi":
            self.mu[positions] = (block > 0).sum(axis=1) - 1 + self.self_count
            return
        k = 1 if self.kind == "mc1" else 2
        sx = st._sizes[positions][:, None]
        ss = st._sizes[live][None, :]
        u = sx + ss - block
        grow = np.where(block > 0, u**k - ss**k, 0)
        # The self column contributes |x u x|^k - |x|^k = 0, so no exclusion
        # is needed.
        self.mu[positions] = (sx[:, 0] ** k) + grow.sum(axis=1)

    def pick(self) -> int:
        st = self.state
        live = np.nonzero(st._live)[0]
        return int(live[np.argmin(self.mu[live])])

    def after_elimination(self, changed: np.ndarray) -> None:
        st = self.state
        if self.full:
            self._recompute(np.nonzero(st._live)[0])
            return
        if changed.size == 0:
            return
        if self.kind in ("mr", "mi"):
            self._recompute(changed)
            return
        # Look-ahead values also change for the live neighbors of the changed
        # edges (their growth terms reference the changed sizes).
        affected = (st._isect[changed] > 0).any(axis=0) & st._live
        self._recompute(np.nonzero(affected)[0])


def _edge_bitmasks(g: Hypergraph) -> dict[int, int]:
    bits = {}
    for e in g.edges:
        b = 0
        for v in e.vertices:
            b |= 1 << v
        bits[e.id] = b
    return bits


def _check_permutation(g: Hypergraph, ordering: Sequence[int]) -> tuple[int, ...]:
    ordering = tuple(int(x) for x in ordering)
    if sorted(ordering) != sorted(g.edge_ids()):
        raise ValueError("ordering is not a permutation of the hypergraph's edge ids")
    return ordering


def simulate_ordering(g: Hypergraph, ordering: Sequence[int]) -> CostReport:
    """Replay eliminations in the given order and record the per-step sizes.

    Pure function of (graph, ordering); used both to score externally supplied
    orderings and as an independent cross-check of the greedy engine.
    """
    ordering = _check_permutation(g, ordering)
    bits = _edge_bitmasks(g)
    ids = list(bits)
    masks = [bits[i] for i in ids]
    pos = {eid: k for k, eid in enumerate(ids)}
    sizes = []
    for x in ordering:
        i = pos.pop(x)
        xb = masks[i]
        last = len(ids) - 1
        if i != last:
            ids[i] = ids[last]
            masks[i] = masks[last]
            pos[ids[i]] = i
        ids.pop()
        masks.pop()
        sizes.append(xb.bit_count())
        for j in range(len(masks)):
            if masks[j] & xb:
                masks[j] |= xb
    return CostReport(tuple(sizes))


def run_elimination(
    g: Hypergraph,
    heuristic: HeuristicKind,
    *,
    full_recompute: bool = False,
    mu_i_includes_self: bool = False,
) -> tuple[tuple[int, ...], CostReport]:
    """Eliminate all edges of ``g``, returning the ordering and its cost.

    Greedy kinds pick, at each step, the live edge minimizing the heuristic
    value, ties broken by smallest edge id.  ``Random(seed)`` and
    ``Given(ordering)`` are replayed via :func:`simulate_ordering`.

    ``full_recompute`` switches the greedy engine to recomputing every
    heuristic value from scratch each step (debug cross-check of the
    incremental updates).  ``mu_i_includes_self`` shifts all mu_i values by
    one (the edge counted as incident to itself); it cannot change the
    selected ordering.
    """
    if g.n_edges == 0:
        raise ValueError("hypergraph has no edges to eliminate")
    if isinstance(heuristic, Given):
        ordering = _check_permutation(g, heuristic.ordering)
        return ordering, simulate_ordering(g, ordering)
    if isinstance(heuristic, Random):
        ids = sorted(g.edge_ids())
        rng = np.random.Generator(np.random.PCG64(heuristic.seed))
        ordering = tuple(ids[i] for i in rng.permutation(len(ids)))
        return ordering, simulate_ordering(g, ordering)
    if heuristic not in GREEDY_HEURISTICS:
        raise ValueError(f"unknown heuristic {heuristic!r}; expected one of {GREEDY_HEURISTICS}")

    state = EliminationState(g)
    sel = _GreedySelector(
        state, heuristic, full_recompute=full_recompute, mu_i_includes_self=mu_i_includes_self
    )
    order, sizes = [], []
    for _ in range(state.m):
        k = sel.pick()
        order.append(int(state.ids[k]))
        sizes.append(int(state._sizes[k]))
        changed = state._eliminate_position(k)
        sel.after_elimination(changed)
    return tuple(order), CostReport(tuple(sizes))


def random_baseline(g: Hypergraph, trials: int, seed: int) -> BaselineStats:
    """Cost statistics over ``trials`` uniform-random orderings.

    Trial t draws its permutation from an independent PCG64 stream seeded
    ``seed + t``, so results are reproducible and independent of any
    parallel execution order.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    ids = sorted(g.edge_ids())
    roots, cost = [], []
    for t in range(trials):
        rng = np.random.Generator(np.random.PCG64(seed + t))
        ordering = [ids[i] for i in rng.permutation(len(ids))]
        rep = simulate_ordering(g, ordering)
        roots.append(rep.total_roots)
        cost.append(rep.total_root_cost)
    return BaselineStats(trials, seed, RNG_NAME, tuple(roots), tuple(cost))


def symbolic_ge_fill_equivalence(
    g: Hypergraph, ordering: Sequence[int]
) -> tuple[tuple, tuple]:
    """Fill events of Gaussian elimination on the edge adjacency pattern vs
    newly-intersecting edge pairs under edge elimination.

    Both procedures are run with the same pivot order.  The first trace
    records, per pivot step, the fill positions (pairs of live edges made
    adjacent) created by symbolic Gaussian elimination on the edge-edge
    adjacency pattern; the second records the pairs of live edges that become
    intersecting when the pivot edge is merged into both.  The two traces are
    equal: a grown hyperedge pair shares the pivot's vertices exactly when
    the corresponding fill entry appears.

    Events are ``(step, (id_lo, id_hi))`` tuples, sorted.
    """
    ordering = _check_permutation(g, ordering)
    ids = [e.id for e in g.edges]
    pos = {eid: k for k, eid in enumerate(ids)}

    # Gaussian elimination on the edge-edge adjacency pattern.
    adj = g.adjacency_matrices()[1].to_dense()
    live = set(range(len(ids)))
    fill = []
    for step, x in enumerate(ordering):
        px = pos[x]
        nbrs = [q for q in live if q != px and adj[px, q]]
        for a in range(len(nbrs)):
            for b in range(a + 1, len(nbrs)):
                i, j = nbrs[a], nbrs[b]
                if not adj[i, j]:
                    adj[i, j] = adj[j, i] = True
                    lo, hi = sorted((ids[i], ids[j]))
                    fill.append((step, (lo, hi)))
        live.discard(px)

    # Edge elimination, recording pairs that newly intersect.
    bits = _edge_bitmasks(g)
    growth = []
    for step, x in enumerate(ordering):
        xb = bits.pop(x)
        nb = [e for e, b in bits.items() if b & xb]
        for a in range(len(nb)):
            for b in range(a + 1, len(nb)):
                if not (bits[nb[a]] & bits[nb[b]]):
                    lo, hi = sorted((nb[a], nb[b]))
                    growth.append((step, (lo, hi)))
        for e in nb:
            bits[e] |= xb
    return tuple(sorted(fill)), tuple(sorted(growth))


BRUTE_FORCE_EDGE_LIMIT = 10


def brute_force_optimal(
    g: Hypergraph, measure: str = "roots"
) -> tuple[tuple[int, ...], int]:
    """Exhaustive search for a cost-minimizing ordering.

    Guarded to at most 10 edges.  States reached by eliminating the same edge
    subset coincide regardless of order (an edge's grown vertex set is the
    union of the eliminated edges reachable from it through pairwise
    intersections), which allows memoizing over subsets instead of visiting
    all |E|! orderings.  Ties resolve toward smaller edge ids.
    """
    if measure not in ("roots", "cost"):
        raise ValueError(f"measure must be 'roots' or 'cost', got {measure!r}")
    m = g.n_edges
    if m == 0:
        raise ValueError("hypergraph has no edges")
    if m > BRUTE_FORCE_EDGE_LIMIT:
        raise ValueError(
            f"{m} edges exceeds the brute-force limit of {BRUTE_FORCE_EDGE_LIMIT}"
        )
    ids = sorted(g.edge_ids())
    bits = _edge_bitmasks(g)
    base = [bits[i] for i in ids]

    def grown_size(idx: int, elim_mask: int) -> int:
        cur = base[idx]
        pending = elim_mask
        changed = True
        while changed:
            changed = False
            rest = pending
            while rest:
                low = rest & -rest
                j = low.bit_length() - 1
                rest ^= low
                if base[j] & cur:
                    cur |= base[j]
                    pending ^= low
                    changed = True
        return cur.bit_count()

    memo: dict[int, tuple[int, int]] = {}
    full = (1 << m) - 1

    def best(elim_mask: int) -> tuple[int, int]:
        if elim_mask == full:
            return 0, -1
        hit = memo.get(elim_mask)
        if hit is not None:
            return hit
        best_val, best_idx = None, -1
        for idx in range(m):
            if elim_mask & (1 << idx):
                continue
            sz = grown_size(idx, elim_mask)
            step = sz if measure == "roots" else sz * sz
            val = step + best(elim_mask | (1 << idx))[0]
            if best_val is None or val < best_val:
                best_val, best_idx = val, idx
        memo[elim_mask] = (best_val, best_idx)
        return best_val, best_idx

    value, _ = best(0)
    order = []
    mask = 0
    while mask != full:
        _, idx = best(mask)
        order.append(ids[idx])
        mask |= 1 << idx
    return tuple(order), value
