"""Numeric eigensolver by successive rank-1 edge elimination.

A sparse Hermitian matrix splits into a real diagonal D plus one rank-1 term
r_e * z_e z_e^H per strict-lower-triangle nonzero, where z_e carries a 1 and a
unit-modulus phase on the edge's two indices and D holds the lower Gershgorin
interval bounds (with the upper-bound variant obtained by subtracting the
terms instead).  Eliminating the terms one at a time - solve the current
diagonal-plus-rank-1 problem, fold its eigenvector block into the accumulated
Q and into every remaining z vector - drives the matrix to diagonal form and
yields the full eigendecomposition.

The support of each transformed z vector grows exactly like a hyperedge under
symbolic elimination, which is what makes the cost of an ordering predictable
by :mod:`edgelim.ordering`; :func:`predictive_consistency` checks the two
engines against each other step by step.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .hypergraph import SparsityPattern, hypergraph_from_matrix_pattern
from .ordering import Given, HeuristicKind, Random, run_elimination
from .secular import rank_one_eig

__all__ = [
    "HermitianInput",
    "RankOneTerm",
    "Decomposition",
    "EliminationOptions",
    "EigResult",
    "StepRecord",
    "decompose",
    "eliminate_all",
    "eliminate_decomposition",
    "predictive_consistency",
    "ConsistencyReport",
    "svd_embedding",
    "svd_from_embedding",
]


@dataclass(frozen=True)
class HermitianInput:
    """Sparse Hermitian matrix: real diagonal plus strict-lower entries.

    ``entries`` maps (k, l) with k > l to a_{k,l}; the mirrored conjugates and
    the real diagonal are implied, so Hermiticity holds by construction.
    """

    n: int
    diag: tuple[float, ...]
    entries: tuple[tuple[int, int, complex], ...]

    def __post_init__(self):
        if len(self.diag) != self.n:
            raise ValueError("diagonal length does not match n")
        fixed = []
        seen = set()
        for (k, l, v) in sorted(self.entries, key=lambda t: (t[1], t[0])):
            if not (0 <= l < k < self.n):
                raise ValueError(f"entry ({k}, {l}) is not in the strict lower triangle")
            if (k, l) in seen:
                raise ValueError(f"duplicate entry ({k}, {l})")
            seen.add((k, l))
            fixed.append((int(k), int(l), complex(v)))
        object.__setattr__(self, "entries", tuple(fixed))
        object.__setattr__(self, "diag", tuple(float(x) for x in self.diag))

    @classmethod
    def from_dense(cls, a) -> "HermitianInput":
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix is {a.shape}, not square")
        if not np.array_equal(a, a.conj().T):
            raise ValueError("matrix is not Hermitian")
        n = a.shape[0]
        entries = [
            (k, l, a[k, l]) for l in range(n) for k in range(l + 1, n) if a[k, l] != 0
        ]
        return cls(n, tuple(a.diagonal().real.tolist()), tuple(entries))

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=complex)
        for i, v in enumerate(self.diag):
            a[i, i] = v
        for (k, l, v) in self.entries:
            a[k, l] = v
            a[l, k] = np.conj(v)
        return a

    def pattern(self) -> SparsityPattern:
        ent = set()
        for (k, l, _) in self.entries:
            ent.add((k, l))
            ent.add((l, k))
        return SparsityPattern(self.n, self.n, ent)

    def fro_norm(self) -> float:
        off = 2.0 * sum(abs(v) ** 2 for (_, _, v) in self.entries)
        return float(np.sqrt(off + sum(x * x for x in self.diag)))


@dataclass(frozen=True)
class RankOneTerm:
    """One update term: weight > 0 and a sparse complex vector."""

    edge_id: int
    weight: float
    support: tuple[int, ...]
    values: tuple[complex, ...]

    def dense(self, n: int) -> np.ndarray:
        z = np.zeros(n, dtype=complex)
        z[list(self.support)] = self.values
        return z


@dataclass(frozen=True)
class Decomposition:
    """Diagonal d0 plus ordered rank-1 terms representing a Hermitian matrix.

    ``side == "lower"`` reconstructs as D + sum r * z z^H (d0 holds the lower
    Gershgorin bounds); ``side == "upper"`` as D - sum r * z z^H.
    """

    n: int
    d0: tuple[float, ...]
    terms: tuple[RankOneTerm, ...]
    side: str = "lower"

    @property
    def sign(self) -> float:
        return 1.0 if self.side == "lower" else -1.0

    def reconstruct(self) -> np.ndarray:
        a = np.diag(np.asarray(self.d0, dtype=complex))
        for t in self.terms:
            z = t.dense(self.n)
            a += self.sign * t.weight * np.outer(z, z.conj())
        return a


def decompose(a: HermitianInput, side: str = "lower") -> Decomposition:
    """Split a Hermitian matrix into diagonal-plus-rank-1 terms, one per edge.

    Term ids align with the edge ids of ``hypergraph_from_matrix_pattern``
    applied to the matrix's pattern (column-major over the lower triangle).
    """
    if side not in ("lower", "upper"):
        raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    radii = np.zeros(a.n)
    terms = []
    for eid, (k, l, v) in enumerate(a.entries):  # entries are (col,row)-sorted
        r = abs(v)
        phase = v / r
        radii[k] += r
        radii[l] += r
        zk = phase if side == "lower" else -phase
        terms.append(RankOneTerm(eid, r, (l, k), (1.0 + 0.0j, zk)))
    d0 = np.asarray(a.diag) - radii if side == "lower" else np.asarray(a.diag) + radii
    return Decomposition(a.n, tuple(d0.tolist()), tuple(terms), side)


@dataclass(frozen=True)
class EliminationOptions:
    """Knobs for :func:`eliminate_all`.

    ``ordering_source`` is a greedy heuristic name, a ``Random``/``Given``
    kind, or an explicit sequence of edge ids.  ``drop_tolerance`` zeroes
    transformed-vector entries below the given fraction of the vector norm
    (0 keeps exact support).  ``inject_skip_update`` is a fault-injection hook
    for consistency verification: it deliberately skips one pending-vector
    update so the support check is exercised against a real corruption.
    """

    gershgorin_side: str = "lower"
    drop_tolerance: float = 0.0
    ordering_source: HeuristicKind | Sequence[int] = "mr"
    inject_skip_update: bool = False

    def __post_init__(self):
        if self.gershgorin_side not in ("lower", "upper"):
            raise ValueError("gershgorin_side must be 'lower' or 'upper'")
        if self.drop_tolerance < 0:
            raise ValueError("drop_tolerance must be >= 0")


@dataclass(frozen=True)
class StepRecord:
    """Observed data for one elimination step."""

    edge_id: int
    nnz: int
    displacement: float
    weight: float
    observed_support: tuple[int, ...]


@dataclass(frozen=True)
class EigResult:
    """Eigendecomposition with residual diagnostics and the per-step trace."""

    q: np.ndarray
    lam: np.ndarray
    residual_eig: float
    residual_orth: float
    steps: tuple[StepRecord, ...]
    ordering: tuple[int, ...]
    drop_tolerance: float

    @property
    def per_step_nnz(self) -> tuple[int, ...]:
        return tuple(s.nnz for s in self.steps)

    def to_json_dict(self) -> dict:
        return {
            "n": int(self.lam.size),
            "residual_eig": self.residual_eig,
            "residual_orth": self.residual_orth,
            "drop_tolerance": self.drop_tolerance,
            "ordering": list(self.ordering),
            "per_step_nnz": list(self.per_step_nnz),
            "per_step_displacement": [s.displacement for s in self.steps],
        }


def _resolve_ordering(a: HermitianInput, dec: Decomposition,
                      source: HeuristicKind | Sequence[int]) -> tuple[int, ...]:
    if isinstance(source, (str, Random, Given)):
        g = hypergraph_from_matrix_pattern(a.pattern())
        if g.n_edges == 0:
            return ()
        ordering, _ = run_elimination(g, source)
        return ordering
    ordering = tuple(int(x) for x in source)
    if sorted(ordering) != sorted(t.edge_id for t in dec.terms):
        raise ValueError("ordering does not match the decomposition's term ids")
    return ordering


def eliminate_all(a: HermitianInput, opts: EliminationOptions | None = None) -> EigResult:
    """Full eigendecomposition of ``a`` by successive edge elimination."""
    opts = opts or EliminationOptions()
    dec = decompose(a, opts.gershgorin_side)
    ordering = _resolve_ordering(a, dec, opts.ordering_source)
    return eliminate_decomposition(
        dec,
        ordering,
        drop_tolerance=opts.drop_tolerance,
        reference=a.to_dense(),
        inject_skip_update=opts.inject_skip_update,
    )


def eliminate_decomposition(
    dec: Decomposition,
    ordering: Sequence[int],
    *,
    drop_tolerance: float = 0.0,
    reference: np.ndarray | None = None,
    inject_skip_update: bool = False,
    observer=None,
) -> EigResult:
    """Run the elimination loop on an explicit decomposition.

    The decomposition may contain general terms (supports larger than two),
    e.g. column-at-a-time groupings supplied by the caller.  ``reference``
    is the dense matrix used for residuals (reconstructed if omitted).
    ``observer(step, edge_id, observed_support)`` is called per step with the
    support in original index order.
    """
    n = dec.n
    ordering = tuple(int(x) for x in ordering)
    by_id = {t.edge_id: t for t in dec.terms}
    if sorted(ordering) != sorted(by_id):
        raise ValueError("ordering does not match the decomposition's term ids")
    if reference is None:
        reference = dec.reconstruct()

    # Keep the working diagonal sorted: fold the sorting permutation into Q's
    # columns and into every pending vector, so each rank-1 subproblem sees
    # sorted input directly.
    d0 = np.asarray(dec.d0, dtype=float)
    perm = np.argsort(d0, kind="stable")
    dcur = d0[perm]
    q = np.zeros((n, n), dtype=complex)
    q[perm, np.arange(n)] = 1.0
    orig_of_row = perm.copy()
    pending = {t.edge_id: t.dense(n)[perm] for t in dec.terms}

    skip_victim: int | None = None
    skip_done = False
    steps: list[StepRecord] = []
    for step, x in enumerate(ordering):
        w = pending.pop(x)
        if drop_tolerance > 0.0:
            w = np.where(np.abs(w) > drop_tolerance * np.linalg.norm(w), w, 0.0)
        supp = np.nonzero(w)[0]
        observed = tuple(sorted(int(v) for v in orig_of_row[supp]))
        if observer is not None:
            observer(step, x, observed)
        rho = dec.sign * by_id[x].weight
        if supp.size == 0:
            steps.append(StepRecord(x, 0, 0.0, by_id[x].weight, observed))
            continue

        res = rank_one_eig(dcur[supp], rho, w[supp])
        displacement = float(np.abs(res.lam - dcur[supp]).sum())
        dcur[supp] = res.lam
        q[:, supp] = q[:, supp] @ res.q

        skipped_now = False
        if inject_skip_update and not skip_done and pending:
            candidates = [e for e in ordering[step + 1 :] if np.any(pending[e][supp])]
            if candidates:
                skip_victim = candidates[-1]
                skip_done = skipped_now = True
        for e, v in pending.items():
            if skipped_now and e == skip_victim:
                continue  # fault injection: this update is deliberately dropped
            if np.any(v[supp]):
                v[supp] = res.q.conj().T @ v[supp]
                if drop_tolerance > 0.0:
                    v[supp] = np.where(
                        np.abs(v[supp]) > drop_tolerance * np.linalg.norm(v), v[supp], 0.0
                    )

        # Restore global sort order of the working diagonal.
        pi = np.argsort(dcur, kind="stable")
        if not np.array_equal(pi, np.arange(n)):
            dcur = dcur[pi]
            q = q[:, pi]
            orig_of_row = orig_of_row[pi]
            for e, v in pending.items():
                if skipped_now and e == skip_victim:
                    continue  # and it misses this step's realignment too
                pending[e] = v[pi]

        steps.append(StepRecord(x, int(supp.size), displacement, by_id[x].weight, observed))

    lam = dcur
    scale = max(np.linalg.norm(reference), 1e-300)
    residual_eig = float(np.linalg.norm(reference @ q - q * lam))
    residual_orth = float(np.linalg.norm(q.conj().T @ q - np.eye(n)))
    return EigResult(q, lam, residual_eig, residual_orth, tuple(steps), ordering,
                     drop_tolerance)


@dataclass(frozen=True)
class ConsistencyStep:
    edge_id: int
    predicted: tuple[int, ...]
    observed: tuple[int, ...]

    @property
    def violation(self) -> bool:
        return not set(self.observed) <= set(self.predicted)

    @property
    def cancellation(self) -> bool:
        return not self.violation and set(self.observed) != set(self.predicted)


@dataclass(frozen=True)
class ConsistencyReport:
    """Side-by-side symbolic prediction vs observed numeric supports."""

    steps: tuple[ConsistencyStep, ...]

    @property
    def ok(self) -> bool:
        return not any(s.violation for s in self.steps)

    @property
    def n_exact(self) -> int:
        return sum(1 for s in self.steps if s.observed == s.predicted)

    @property
    def n_cancellations(self) -> int:
        return sum(1 for s in self.steps if s.cancellation)

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "n_steps": len(self.steps),
            "n_exact": self.n_exact,
            "n_cancellations": self.n_cancellations,
            "violations": [
                {"edge_id": s.edge_id, "predicted": list(s.predicted), "observed": list(s.observed)}
                for s in self.steps
                if s.violation
            ],
        }


def predictive_consistency(
    a: HermitianInput,
    ordering: HeuristicKind | Sequence[int] = "mr",
    *,
    drop_tolerance: float = 0.0,
    inject_skip_update: bool = False,
) -> ConsistencyReport:
    """Run symbolic and numeric elimination side by side and compare supports.

    Per step, the hyperedge predicted by symbolic elimination is compared
    against the observed support of the eliminated vector.  Observed entries
    outside the prediction indicate a bug; predicted-but-absent entries are
    benign cancellation.
    """
    dec = decompose(a)
    order = _resolve_ordering(a, dec, ordering)
    g = hypergraph_from_matrix_pattern(a.pattern())

    predicted: list[tuple[int, ...]] = []
    sets = {e.id: set(e.vertices) for e in g.edges}
    for x in order:
        xs = sets.pop(x)
        predicted.append(tuple(sorted(xs)))
        for s in sets.values():
            if s & xs:
                s |= xs

    observed: list[tuple[int, ...]] = [()] * len(order)

    def _observer(step, edge_id, supp):
        observed[step] = supp

    eliminate_decomposition(
        dec,
        order,
        drop_tolerance=drop_tolerance,
        reference=a.to_dense(),
        inject_skip_update=inject_skip_update,
        observer=_observer,
    )
    steps = tuple(
        ConsistencyStep(x, predicted[i], observed[i]) for i, x in enumerate(order)
    )
    return ConsistencyReport(steps)


def svd_embedding(b) -> HermitianInput:
    """Hermitian embedding [[0, B^H], [B, 0]] of an m x n matrix.

    Column-space indices come first (0..n-1), row-space indices follow, so all
    of B lands in the strict lower triangle.  Eigenvalues come in +/- sigma
    pairs plus |m - n| zeros; eigenvectors stack the right and left singular
    vectors.
    """
    b = np.asarray(b, dtype=complex)
    if b.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    if not np.any(b):
        raise ValueError("matrix must have at least one nonzero")
    m, n = b.shape
    entries = [
        (n + i, j, b[i, j]) for j in range(n) for i in range(m) if b[i, j] != 0
    ]
    return HermitianInput(m + n, (0.0,) * (m + n), tuple(entries))


def svd_from_embedding(q: np.ndarray, lam: np.ndarray, m: int, n: int):
    """Map embedding eigenpairs back to (u, s, vh) with s descending.

    Takes the min(m, n) largest eigenvalues as singular values; their
    eigenvectors split as [v; u] / sqrt(2).
    """
    r = min(m, n)
    idx = np.argsort(lam)[::-1][:r]
    s = np.maximum(lam[idx], 0.0)
    v = q[:n, idx] * np.sqrt(2.0)
    u = q[n:, idx] * np.sqrt(2.0)
    return u, s, v.conj().T
