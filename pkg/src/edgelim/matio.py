"""Matrix/graph ingestion, generators for the experiment families, reports.

Matrix Market support covers the coordinate format in its ``real symmetric``,
``complex hermitian`` and ``pattern symmetric`` flavors (what a Hermitian
eigensolver can consume), plus the ``array general`` writer used to dump
eigenvector matrices.  Pattern generators produce the three experiment graph
families: chains, 4-neighbor lattices, Delaunay triangulations of random
points in the unit disc, and symmetric random patterns of prescribed expected
density.  All generators are pure functions of their spec.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .eliminator import EigResult, HermitianInput
from .hypergraph import Hypergraph, SparsityPattern
from .ordering import BaselineStats, CostReport

__all__ = [
    "MatrixMarketError",
    "read_matrix_market",
    "write_matrix_market_hermitian",
    "write_matrix_market_pattern",
    "write_matrix_market_dense",
    "read_hypergraph_text",
    "write_hypergraph_text",
    "GraphSpec",
    "generate",
    "random_hermitian",
    "pattern_components",
    "ExperimentConfig",
    "write_ordering_json",
    "write_steps_csv",
    "write_eigenvalues_text",
]


class MatrixMarketError(ValueError):
    """Parse failure; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def read_matrix_market(path) -> HermitianInput | SparsityPattern:
    """Read a coordinate Matrix Market file.

    ``real symmetric`` and ``complex hermitian`` files become
    :class:`HermitianInput` (1-based indices converted, duplicates summed);
    ``pattern symmetric`` becomes a :class:`SparsityPattern`.  Anything else
    is rejected: the solver needs a Hermitian matrix, so the header must
    declare symmetric/hermitian storage.
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    header = lines[0].strip().split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise MatrixMarketError("expected '%%MatrixMarket matrix coordinate ...' header", 1)
    _, obj, fmt, fld, sym = (t.lower() for t in header)
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"unsupported object/format '{obj} {fmt}'", 1)
    if sym not in ("symmetric", "hermitian"):
        raise MatrixMarketError(
            f"storage must be declared symmetric or hermitian, got '{sym}'", 1
        )
    if fld not in ("real", "integer", "complex", "pattern"):
        raise MatrixMarketError(f"unsupported field type '{fld}'", 1)
    if fld == "complex" and sym != "hermitian":
        raise MatrixMarketError("complex matrices must be declared hermitian", 1)

    k = 1
    while k < len(lines) and (not lines[k].strip() or lines[k].lstrip().startswith("%")):
        k += 1
    if k >= len(lines):
        raise MatrixMarketError("missing size line", len(lines))
    parts = lines[k].split()
    try:
        n_rows, n_cols, nnz = (int(t) for t in parts)
    except ValueError:
        raise MatrixMarketError(f"bad size line {lines[k]!r}", k + 1) from None
    if n_rows != n_cols:
        raise MatrixMarketError(f"matrix is {n_rows}x{n_cols}, not square", k + 1)

    want_vals = 2 if fld in ("real", "integer") else (3 if fld == "complex" else 0)
    diag = np.zeros(n_rows)
    lower: dict[tuple[int, int], complex] = {}
    pattern_entries: set[tuple[int, int]] = set()
    count = 0
    for ln in range(k + 1, len(lines)):
        raw = lines[ln].strip()
        if not raw or raw.startswith("%"):
            continue
        parts = raw.split()
        if len(parts) != 2 + want_vals:
            raise MatrixMarketError(
                f"expected {2 + want_vals} fields, got {len(parts)}", ln + 1
            )
        try:
            i, j = int(parts[0]), int(parts[1])
            vals = [float(t) for t in parts[2:]]
        except ValueError:
            raise MatrixMarketError(f"cannot parse entry {raw!r}", ln + 1) from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise MatrixMarketError(f"index ({i}, {j}) out of range", ln + 1)
        count += 1
        i, j = i - 1, j - 1
        if fld == "pattern":
            pattern_entries.add((i, j))
            pattern_entries.add((j, i))
            continue
        v = complex(vals[0], vals[1] if fld == "complex" else 0.0)
        if i == j:
            if abs(v.imag) > 0:
                raise MatrixMarketError("diagonal entry must be real", ln + 1)
            diag[i] += v.real
        else:
            if i < j:  # fold upper-triangle duplicates onto the lower triangle
                i, j = j, i
                v = np.conj(v)
            lower[(i, j)] = lower.get((i, j), 0.0) + v
    if count != nnz:
        raise MatrixMarketError(f"size line declared {nnz} entries, found {count}",
                                len(lines))
    if fld == "pattern":
        return SparsityPattern(n_rows, n_cols, pattern_entries)
    entries = tuple((k_, l_, v) for (k_, l_), v in lower.items() if v != 0)
    return HermitianInput(n_rows, tuple(diag.tolist()), entries)


def write_matrix_market_hermitian(path, a: HermitianInput) -> None:
    lines = [
        "%%MatrixMarket matrix coordinate complex hermitian",
        f"{a.n} {a.n} {len(a.entries) + a.n}",
    ]
    for i, v in enumerate(a.diag):
        lines.append(f"{i + 1} {i + 1} {v!r} 0.0")
    for (k, l, v) in a.entries:
        lines.append(f"{k + 1} {l + 1} {v.real!r} {v.imag!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_matrix_market_pattern(path, p: SparsityPattern) -> None:
    if not p.is_symmetric():
        raise ValueError("only symmetric patterns are written")
    lower = sorted((i, j) for (i, j) in p.entries if i >= j)
    lines = [
        "%%MatrixMarket matrix coordinate pattern symmetric",
        f"{p.n_rows} {p.n_cols} {len(lower)}",
    ]
    lines += [f"{i + 1} {j + 1}" for (i, j) in lower]
    Path(path).write_text("\n".join(lines) + "\n")


def write_matrix_market_dense(path, q: np.ndarray) -> None:
    """Dense complex matrix in array format (used for eigenvector output)."""
    q = np.asarray(q, dtype=complex)
    lines = [
        "%%MatrixMarket matrix array complex general",
        f"{q.shape[0]} {q.shape[1]}",
    ]
    for j in range(q.shape[1]):  # column-major per the array format
        for i in range(q.shape[0]):
            lines.append(f"{q[i, j].real!r} {q[i, j].imag!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_hypergraph_text(path) -> Hypergraph:
    return Hypergraph.from_text(Path(path).read_text())


def write_hypergraph_text(path, g: Hypergraph) -> None:
    Path(path).write_text(g.to_text())


# -- generators --------------------------------------------------------------


@dataclass(frozen=True)
class GraphSpec:
    """One experiment graph family instance.

    kinds: ``chain`` (n), ``lattice`` (rows x cols), ``disc`` (Delaunay
    triangulation of ``points`` seeded-random points in the unit disc),
    ``randsym`` (n with expected off-diagonal density).  The spec string
    grammar is ``chain:256``, ``lattice:16x16``, ``disc:600:seed3``,
    ``randsym:128:0.0625:seed7``.
    """

    kind: str
    n: int = 0
    rows: int = 0
    cols: int = 0
    points: int = 0
    density: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind == "chain":
            if self.n < 2:
                raise ValueError("chain needs n >= 2")
        elif self.kind == "lattice":
            if self.rows < 2 or self.cols < 2:
                raise ValueError("lattice needs rows, cols >= 2")
        elif self.kind == "disc":
            if self.points < 3:
                raise ValueError("disc triangulation needs >= 3 points")
        elif self.kind == "randsym":
            if self.n < 2 or not (0.0 < self.density <= 1.0):
                raise ValueError("randsym needs n >= 2 and density in (0, 1]")
        else:
            raise ValueError(f"unknown graph kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "GraphSpec":
        parts = text.split(":")
        kind = parts[0]

        def seed_of(tok: str) -> int:
            return int(tok[4:]) if tok.startswith("seed") else int(tok)

        try:
            if kind == "chain":
                return cls("chain", n=int(parts[1]))
            if kind == "lattice":
                r, c = parts[1].lower().split("x")
                return cls("lattice", rows=int(r), cols=int(c))
            if kind == "disc":
                seed = seed_of(parts[2]) if len(parts) > 2 else 0
                return cls("disc", points=int(parts[1]), seed=seed)
            if kind == "randsym":
                seed = seed_of(parts[3]) if len(parts) > 3 else 0
                return cls("randsym", n=int(parts[1]), density=float(parts[2]), seed=seed)
        except (IndexError, ValueError) as exc:
            raise ValueError(f"cannot parse graph spec {text!r}: {exc}") from None
        raise ValueError(f"unknown graph kind {kind!r} in spec {text!r}")

    def __str__(self) -> str:
        if self.kind == "chain":
            return f"chain:{self.n}"
        if self.kind == "lattice":
            return f"lattice:{self.rows}x{self.cols}"
        if self.kind == "disc":
            return f"disc:{self.points}:seed{self.seed}"
        return f"randsym:{self.n}:{self.density}:seed{self.seed}"


def _sym(pairs) -> set[tuple[int, int]]:
    out = set()
    for (i, j) in pairs:
        out.add((i, j))
        out.add((j, i))
    return out


def generate(spec: GraphSpec) -> SparsityPattern:
    """Off-diagonal sparsity pattern of the requested graph (no diagonal)."""
    if spec.kind == "chain":
        n = spec.n
        return SparsityPattern(n, n, _sym((i + 1, i) for i in range(n - 1)))
    if spec.kind == "lattice":
        r, c = spec.rows, spec.cols
        n = r * c
        idx = lambda i, j: i * c + j
        pairs = []
        for i in range(r):
            for j in range(c):
                if j + 1 < c:
                    pairs.append((idx(i, j + 1), idx(i, j)))
                if i + 1 < r:
                    pairs.append((idx(i + 1, j), idx(i, j)))
        return SparsityPattern(n, n, _sym(pairs))
    if spec.kind == "disc":
        from scipy.spatial import Delaunay

        rng = np.random.Generator(np.random.PCG64(spec.seed))
        radius = np.sqrt(rng.random(spec.points))
        angle = 2.0 * np.pi * rng.random(spec.points)
        pts = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
        tri = Delaunay(pts)
        pairs = set()
        for simplex in tri.simplices:
            a, b, c = (int(v) for v in simplex)
            pairs.update([(max(a, b), min(a, b)), (max(b, c), min(b, c)),
                          (max(a, c), min(a, c))])
        return SparsityPattern(spec.points, spec.points, _sym(pairs))
    if spec.kind == "randsym":
        n = spec.n
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        # Expected total off-diagonal nonzeros = density * n^2, i.e. each of
        # the n(n-1)/2 lower-triangle positions is filled with probability
        # density * n / (n - 1).
        p = min(1.0, spec.density * n / (n - 1))
        mask = rng.random((n, n)) < p
        pairs = [(i, j) for i in range(1, n) for j in range(i) if mask[i, j]]
        return SparsityPattern(n, n, _sym(pairs))
    raise ValueError(f"unknown graph kind {spec.kind!r}")


def random_hermitian(pattern: SparsityPattern, seed: int, *,
                     complex_values: bool = True) -> HermitianInput:
    """Random Hermitian values on a symmetric pattern.

    Off-diagonal entries are standard normal (complex by default); the real
    diagonal is made diagonally dominant so the matrix is comfortably
    positive definite.
    """
    if not pattern.is_symmetric():
        raise ValueError("pattern must be symmetric")
    n = pattern.n_rows
    rng = np.random.Generator(np.random.PCG64(seed))
    lower = sorted(((j, i) for (i, j) in pattern.entries if i > j))  # (col, row)
    entries = []
    radius = np.zeros(n)
    for (l, k) in lower:
        v = complex(rng.normal(), rng.normal() if complex_values else 0.0)
        if v == 0:
            v = 1.0 + 0.0j
        entries.append((k, l, v))
        radius[k] += abs(v)
        radius[l] += abs(v)
    diag = radius + rng.random(n) + 0.1
    return HermitianInput(n, tuple(diag.tolist()), tuple(entries))


def pattern_components(p: SparsityPattern) -> int:
    """Number of connected components of the off-diagonal adjacency graph."""
    n = p.n_rows
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for (i, j) in p.entries:
        if i != j:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
    return len({find(i) for i in range(n)})


# -- experiment configuration and report writers ------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative experiment: graph source, heuristics, baseline, outputs.

    JSON schema: ``{"graph": "<spec-or-path>", "heuristics": [...],
    "baseline_trials": int, "seed": int, "out_dir": str}``.
    """

    graph: str
    heuristics: tuple[str, ...] = ()
    baseline_trials: int = 0
    seed: int = 0
    out_dir: str = "."

    def __post_init__(self):
        if not self.heuristics and self.baseline_trials <= 0:
            raise ValueError("request at least one heuristic or a baseline")

    def to_json(self) -> str:
        return json.dumps(
            {
                "graph": self.graph,
                "heuristics": list(self.heuristics),
                "baseline_trials": self.baseline_trials,
                "seed": self.seed,
                "out_dir": self.out_dir,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        return cls(
            graph=raw["graph"],
            heuristics=tuple(raw.get("heuristics", ())),
            baseline_trials=int(raw.get("baseline_trials", 0)),
            seed=int(raw.get("seed", 0)),
            out_dir=raw.get("out_dir", "."),
        )


def write_ordering_json(path, ordering: Sequence[int], report: CostReport,
                        extra: dict | None = None) -> None:
    payload = {"ordering": [int(x) for x in ordering]}
    payload.update(report.to_json_dict())
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def write_steps_csv(path, ordering: Sequence[int], report: CostReport) -> None:
    """One row per elimination step: step, edge_id, size, cum_roots, cum_cost."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["step", "edge_id", "size", "cum_roots", "cum_cost"])
        roots = cost = 0
        for step, (eid, size) in enumerate(zip(ordering, report.per_step_sizes)):
            roots += size
            cost += size * size
            wr.writerow([step, eid, size, roots, cost])


def write_eigenvalues_text(path, lam) -> None:
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in np.asarray(lam)))
