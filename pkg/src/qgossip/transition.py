"""
Symmetric contact-probability matrices.

Entry ``P[i, j]`` (``i != j``) is the probability that vertex ``i`` contacts
``j`` in a round. The diagonal, together with any residual row mass, is the
probability that ``i`` contacts nobody.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .graph import Graph, gen_complete, gen_ring

TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    graph: Graph
    entries: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.shape != (self.graph.n, self.graph.n):
            raise InvalidParameter(
                f"matrix shape {arr.shape} does not match graph with n={self.graph.n}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.graph.n

    def __getitem__(self, idx):
        return self.entries[idx]

    def to_json(self) -> dict:
        return {"n": self.n, "rows": self.entries.tolist()}


@dataclass(frozen=True)
class Diagnostic:
    invariant: str
    indices: tuple[int, ...]
    message: str

    def __str__(self):
        return f"{self.invariant}: {self.message}"


def _first(mask: np.ndarray):
    hits = np.argwhere(mask)
    return tuple(int(x) for x in hits[0]) if len(hits) else None


def validate(P: TransitionMatrix, tol: float = TOL) -> Diagnostic | None:
    """Check the matrix invariants; return the first violation or ``None``.

    Order of checks: range, symmetry, row sums, support on graph edges.
    """
    a = P.entries
    bad = _first(~np.isfinite(a) | (a < -tol) | (a > 1 + tol))
    if bad:
        i, j = bad
        return Diagnostic("range", bad, f"entry ({i}, {j}) = {a[i, j]!r} outside [0, 1]")
    bad = _first(np.triu(np.abs(a - a.T) > tol, k=1))
    if bad:
        i, j = bad
        return Diagnostic("symmetry", bad, f"asymmetric at ({i}, {j}): {a[i, j]!r} != {a[j, i]!r}")
    rows = a.sum(axis=1)
    bad = _first(rows > 1 + tol)
    if bad:
        (i,) = bad
        return Diagnostic("row-sum", bad, f"row {i} sums to {rows[i]!r} > 1")
    adj = np.zeros(a.shape, dtype=bool)
    for i, j in P.graph.edges:
        adj[i, j] = adj[j, i] = True
    np.fill_diagonal(adj, True)
    bad = _first((a > tol) & ~adj)
    if bad:
        i, j = bad
        return Diagnostic("support", bad, f"positive entry at ({i}, {j}) but ({i}, {j}) is not an edge")
    return None


def ring_matrix(n: int) -> TransitionMatrix:
    g = gen_ring(n)
    a = np.zeros((n, n))
    np.fill_diagonal(a, 0.5)
    for i, j in g.edges:
        a[i, j] = a[j, i] = 0.25
    return TransitionMatrix(g, a, "ring")


def complete_matrix(n: int) -> TransitionMatrix:
    """Uniform matrix with every entry, diagonal included, equal to ``1/n``."""
    g = gen_complete(n)
    return TransitionMatrix(g, np.full((n, n), 1.0 / n), "complete")


def lazy_uniform_matrix(g: Graph) -> TransitionMatrix:
    """Lazy walk normalised by the maximum degree.

    Each edge gets ``1/(2 d_max)`` and vertex ``i`` keeps
    ``1 - deg(i)/(2 d_max)`` on the diagonal.
    """
    if not g.edges:
        raise InvalidParameter("lazy uniform matrix needs at least one edge")
    deg = g.degrees()
    dmax = int(deg.max())
    a = np.zeros((g.n, g.n))
    w = 1.0 / (2 * dmax)
    for i, j in g.edges:
        a[i, j] = a[j, i] = w
    np.fill_diagonal(a, 1.0 - deg / (2.0 * dmax))
    return TransitionMatrix(g, a, "lazy")


def make_matrix(name: str, g: Graph) -> TransitionMatrix:
    if name == "default":
        # n=3: ring and complete coincide; the ring builder wins
        if g.n >= 3 and g == gen_ring(g.n):
            return ring_matrix(g.n)
        if g == gen_complete(g.n):
            return complete_matrix(g.n)
        raise InvalidParameter("the 'default' matrix is defined only for ring and complete graphs")
    if name == "ring":
        if g.n < 3 or g != gen_ring(g.n):
            raise InvalidParameter("ring matrix requested for a non-ring graph")
        return ring_matrix(g.n)
    if name == "complete":
        if g != gen_complete(g.n):
            raise InvalidParameter("complete matrix requested for a non-complete graph")
        return complete_matrix(g.n)
    if name == "lazy":
        return lazy_uniform_matrix(g)
    raise InvalidParameter(f"unknown matrix builder {name!r}")


def matrix_from_json(obj: dict, graph: Graph | None = None) -> TransitionMatrix:
    """Load ``{"n": int, "rows": [[...], ...]}`` and validate it.

    Without ``graph`` the graph is taken to be the off-diagonal support.
    """
    n = obj["n"]
    rows = np.asarray(obj["rows"], dtype=float)
    if rows.shape != (n, n):
        raise InvalidParameter(f"matrix JSON: rows have shape {rows.shape}, expected ({n}, {n})")
    if graph is None:
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if rows[i, j] > TOL or rows[j, i] > TOL]
        graph = Graph(n, edges)
    P = TransitionMatrix(graph, rows)
    diag = validate(P)
    if diag is not None:
        raise InvalidParameter(f"matrix JSON rejected: {diag}")
    return P


def loads_matrix(text: str, graph: Graph | None = None) -> TransitionMatrix:
    return matrix_from_json(json.loads(text), graph)


def dumps_matrix(P: TransitionMatrix) -> str:
    return json.dumps(P.to_json())
