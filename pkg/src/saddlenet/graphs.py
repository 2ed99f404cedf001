"""Communication graphs and gossip mixing matrices.

A mixing matrix encodes one round of weighted neighbor averaging over an
undirected connected graph.  For the solvers in this package a matrix ``W``
is admissible when

* it is supported on the graph (``w_ij = 0`` for non-adjacent ``i != j``),
* it is symmetric,
* ``1`` is a simple eigenvalue with the all-ones eigenvector,
* every eigenvalue lies in ``(-1, 1]``.

Two standard constructions are provided (Laplacian-based and Metropolis
weights) together with a numerical certificate for arbitrary matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Graph",
    "GraphFormatError",
    "MixingCertificate",
    "MixingMatrix",
    "certify_mixing",
    "complete_graph",
    "graph_to_edge_list",
    "is_connected",
    "laplacian",
    "metropolis_mixing",
    "mixing_from_laplacian",
    "named_topology",
    "parse_edge_list",
    "path_graph",
    "random_connected_graph",
    "ring_graph",
    "star_graph",
]


class GraphFormatError(ValueError):
    """Raised when an edge-list document cannot be parsed."""


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0 .. n-1``.

    Edges are stored as a frozenset of ``(i, j)`` pairs with ``i < j``.
    """

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        for e in self.edges:
            i, j = e
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge {e} out of range for n={self.n}")

    @classmethod
    def from_edges(cls, n, edges):
        norm = frozenset((min(i, j), max(i, j)) for i, j in edges)
        return cls(n, norm)

    @property
    def sorted_edges(self):
        return tuple(sorted(self.edges))

    def neighbors(self, i):
        out = [j for (a, b) in self.edges for j in ((b,) if a == i else (a,) if b == i else ())]
        return tuple(sorted(out))

    def degree(self, i):
        return len(self.neighbors(i))

    def adjacency(self):
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = a[j, i] = 1.0
        return a


def parse_edge_list(text):
    """Parse a plain-text edge list into a :class:`Graph`.

    One edge per line as ``i j`` (whitespace separated, zero-based).  Blank
    lines and ``#`` comments are ignored.  An optional ``n <count>`` header
    fixes the vertex count; otherwise it is ``1 + max index``.  Duplicate
    edges collapse; self-loops and out-of-range indices are errors.
    """
    declared_n = None
    raw_edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "n":
            if declared_n is not None:
                raise GraphFormatError(f"line {lineno}: duplicate 'n' header")
            if len(parts) != 2:
                raise GraphFormatError(f"line {lineno}: malformed header {line!r}")
            try:
                declared_n = int(parts[1])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: malformed header {line!r}") from None
            if declared_n < 1:
                raise GraphFormatError(f"line {lineno}: vertex count must be positive")
            continue
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: malformed edge line {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: malformed edge line {line!r}") from None
        if i < 0 or j < 0:
            raise GraphFormatError(f"line {lineno}: negative vertex index")
        if i == j:
            raise GraphFormatError(f"line {lineno}: self-loop at vertex {i}")
        raw_edges.append((lineno, min(i, j), max(i, j)))

    if declared_n is None:
        if not raw_edges:
            raise GraphFormatError("empty edge list and no 'n' header")
        declared_n = 1 + max(j for (_, _, j) in raw_edges)
    for lineno, i, j in raw_edges:
        if j >= declared_n:
            raise GraphFormatError(f"line {lineno}: vertex {j} exceeds declared n={declared_n}")
    return Graph(declared_n, frozenset((i, j) for (_, i, j) in raw_edges))


def graph_to_edge_list(g):
    """Serialize a graph to the text format accepted by :func:`parse_edge_list`."""
    lines = [f"n {g.n}"]
    lines += [f"{i} {j}" for i, j in g.sorted_edges]
    return "\n".join(lines) + "\n"


def is_connected(g):
    """Breadth-first connectivity test (a single vertex counts as connected)."""
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for i in frontier:
            for j in g.neighbors(i):
                if j not in seen:
                    seen.add(j)
                    nxt.append(j)
        frontier = nxt
    return len(seen) == g.n


def laplacian(g):
    """Graph Laplacian ``L = D - A`` as a dense float array."""
    a = g.adjacency()
    return np.diag(a.sum(axis=1)) - a


# ---------------------------------------------------------------------------
# named topologies
# ---------------------------------------------------------------------------

def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def ring_graph(n):
    if n < 3:
        raise ValueError("ring needs at least 3 vertices")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(n):
    if n < 2:
        raise ValueError("star needs at least 2 vertices")
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


def complete_graph(n):
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def random_connected_graph(n, density=0.3, seed=0):
    """Random connected graph: a random spanning tree plus Bernoulli edges.

    Vertices are attached in a random order, each to a uniformly chosen
    earlier vertex (guaranteeing connectivity); every remaining pair is then
    added independently with probability ``density``.  Fully reproducible
    from ``seed`` (PCG64).
    """
    if n < 1:
        raise ValueError("graph needs at least one vertex")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    edges = set()
    for k in range(1, n):
        anchor = order[int(rng.integers(0, k))]
        edges.add((min(anchor, order[k]), max(anchor, order[k])))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < density:
                edges.add((i, j))
    return Graph.from_edges(n, edges)


_TOPOLOGIES = {
    "path": path_graph,
    "ring": ring_graph,
    "star": star_graph,
    "complete": complete_graph,
}


def named_topology(name, n, density=0.3, seed=0):
    """Build one of the named graph families (``random`` takes density/seed)."""
    if name == "random":
        return random_connected_graph(n, density=density, seed=seed)
    try:
        return _TOPOLOGIES[name](n)
    except KeyError:
        raise ValueError(f"unknown topology {name!r}") from None


# ---------------------------------------------------------------------------
# mixing matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MixingMatrix:
    """A certified mixing matrix bound to its communication graph."""

    w: np.ndarray
    graph: Graph
    lambda_min: float

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    @property
    def n(self):
        return self.graph.n

    def apply(self, x):
        """One averaging round applied to stacked per-agent rows."""
        return self.w @ np.asarray(x, dtype=float)


@dataclass(frozen=True)
class MixingCertificate:
    """Per-property result of checking a candidate mixing matrix."""

    decentralized: bool
    symmetric: bool
    kernel: bool
    spectral: bool
    lambda_min: float
    lambda_max: float
    unit_eigenvalue_multiplicity: int
    tol: float
    notes: tuple

    @property
    def passed(self):
        return self.decentralized and self.symmetric and self.kernel and self.spectral

    def summary(self):
        flag = lambda ok: "pass" if ok else "FAIL"  # noqa: E731
        lines = [
            f"decentralized (supported on graph):  {flag(self.decentralized)}",
            f"symmetric:                           {flag(self.symmetric)}",
            f"simple unit eigenvalue on consensus: {flag(self.kernel)}",
            f"spectrum in (-1, 1]:                 {flag(self.spectral)}",
            f"lambda_min = {self.lambda_min!r}",
            f"lambda_max = {self.lambda_max!r}",
            f"unit eigenvalue multiplicity = {self.unit_eigenvalue_multiplicity}",
            f"tolerance = {self.tol!r}",
        ]
        lines += list(self.notes)
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def certify_mixing(w, graph, tol=1e-9):
    """Check the four mixing-matrix properties of ``w`` against ``graph``.

    Properties are verified numerically to ``tol``: support on the graph,
    symmetry, a simple eigenvalue 1 whose eigenvector is parallel to the
    all-ones vector, and all eigenvalues in ``(-1 + tol, 1 + tol]``.
    Eigenvalues come from a symmetric eigensolver, so symmetry is checked
    first; if it fails, the spectral properties are reported as failed too.
    """
    w = np.asarray(w, dtype=float)
    n = graph.n
    if w.shape != (n, n):
        raise ValueError(f"matrix shape {w.shape} does not match n={n}")

    notes = []
    allowed = graph.adjacency().astype(bool) | np.eye(n, dtype=bool)
    off_support = np.abs(np.where(allowed, 0.0, w))
    decentralized = bool(off_support.max(initial=0.0) <= tol)
    if not decentralized:
        i, j = np.unravel_index(np.argmax(off_support), w.shape)
        notes.append(f"nonzero weight {w[i, j]!r} on non-edge ({i}, {j})")

    symmetric = bool(np.abs(w - w.T).max(initial=0.0) <= tol)

    if symmetric:
        vals, vecs = np.linalg.eigh((w + w.T) / 2.0)
        lam_min, lam_max = float(vals[0]), float(vals[-1])
        near_one = np.abs(vals - 1.0) <= tol
        multiplicity = int(near_one.sum())
        kernel = multiplicity == 1
        if kernel:
            v = vecs[:, int(np.argmax(near_one))]
            ones = np.ones(n) / np.sqrt(n)
            aligned = min(np.abs(v - ones).max(), np.abs(v + ones).max())
            kernel = bool(aligned <= tol)
            if not kernel:
                notes.append("unit eigenvector is not the consensus direction")
        elif multiplicity == 0:
            notes.append("no eigenvalue equal to 1")
        else:
            notes.append(f"eigenvalue 1 has multiplicity {multiplicity}")
        spectral = bool(lam_max <= 1.0 + tol and lam_min > -1.0 + tol)
        if not spectral:
            notes.append("eigenvalues must lie in (-1, 1]")
    else:
        notes.append("matrix is not symmetric; spectral checks skipped")
        lam_min = lam_max = float("nan")
        multiplicity = 0
        kernel = spectral = False

    return MixingCertificate(
        decentralized=decentralized,
        symmetric=symmetric,
        kernel=kernel,
        spectral=spectral,
        lambda_min=lam_min,
        lambda_max=lam_max,
        unit_eigenvalue_multiplicity=multiplicity,
        tol=tol,
        notes=tuple(notes),
    )


def _certified(w, graph, origin):
    cert = certify_mixing(w, graph)
    if not cert.passed:  # pragma: no cover - construction guarantees the properties
        raise RuntimeError(f"{origin} produced an invalid mixing matrix:\n{cert.summary()}")
    return MixingMatrix(w, graph, cert.lambda_min)


def mixing_from_laplacian(g, alpha):
    """Laplacian mixing ``W = I - L / alpha`` for ``alpha > lambda_max(L) / 2``.

    The bound on ``alpha`` is what keeps the spectrum above ``-1``; it is
    checked against an eigendecomposition of ``L`` and violations raise.
    """
    if not is_connected(g):
        raise ValueError("graph must be connected")
    lap = laplacian(g)
    lam_max = float(np.linalg.eigvalsh(lap)[-1])
    if alpha <= lam_max / 2.0:
        raise ValueError(
            f"alpha={alpha!r} must exceed half the largest Laplacian eigenvalue ({lam_max / 2.0!r})"
        )
    w = np.eye(g.n) - lap / alpha
    return _certified(w, g, "mixing_from_laplacian")


def metropolis_mixing(g):
    """Metropolis weights ``w_ij = 1 / (1 + max(deg_i, deg_j))`` on edges.

    Diagonal entries take the complement so each row sums to one; the result
    is symmetric, doubly stochastic and admissible for any connected graph.
    """
    if not is_connected(g):
        raise ValueError("graph must be connected")
    n = g.n
    deg = [g.degree(i) for i in range(n)]
    w = np.zeros((n, n))
    for i, j in g.edges:
        w[i, j] = w[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
    for i in range(n):
        w[i, i] = 1.0 - w[i].sum()
    return _certified(w, g, "metropolis_mixing")
