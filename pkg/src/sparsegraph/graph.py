"""Weighted undirected graphs, their Laplacian operators, and file ingestion.

A :class:`Graph` is immutable after construction: vertex ids are dense in
``[0, n)``, edges are simple (parallel edges merged by weight summation,
self-loops rejected) and carry strictly positive weights. Edge order is the
first-occurrence order of the input, which all index-based tie-break rules
downstream rely on.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import (
    DegenerateInputError,
    GraphFormatError,
    ValidationError,
)

__all__ = [
    "Graph",
    "LaplacianOperator",
    "load_matrix_market",
    "load_edge_list",
    "largest_component",
    "quadratic_form",
    "write_edge_list",
]


def _canonical_merge(n: int, endpoints: np.ndarray, weights: np.ndarray):
    """Canonicalize endpoint order, validate, and merge parallel edges.

    Merged weight is the sum of duplicates; the merged edge keeps the
    position of its first occurrence.
    """
    endpoints = np.asarray(endpoints, dtype=np.int64).reshape(-1, 2)
    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if endpoints.shape[0] != weights.shape[0]:
        raise ValidationError("endpoint and weight arrays differ in length")
    if endpoints.size and (endpoints.min() < 0 or endpoints.max() >= n):
        raise ValidationError(f"vertex id out of range [0, {n})")
    if np.any(endpoints[:, 0] == endpoints[:, 1]):
        bad = int(np.flatnonzero(endpoints[:, 0] == endpoints[:, 1])[0])
        raise ValidationError(f"self-loop at vertex {endpoints[bad, 0]}")
    if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
        raise ValidationError("edge weights must be finite and strictly positive")

    endpoints = np.sort(endpoints, axis=1)
    keys = endpoints[:, 0] * np.int64(n) + endpoints[:, 1]
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    merged_w = np.bincount(inverse, weights=weights, minlength=uniq.size)
    order = np.argsort(first, kind="stable")
    uniq = uniq[order]
    merged = np.column_stack((uniq // n, uniq % n))
    return merged, merged_w[order]


class Graph:
    """Immutable weighted undirected graph with an adjacency index.

    Use :meth:`from_edges` for untrusted input; the constructor assumes the
    edge set is already canonical (u < v, unique pairs, positive weights).
    """

    __slots__ = (
        "n",
        "endpoints",
        "weights",
        "degrees",
        "_adj",
        "_adj_csr",
        "_connected",
    )

    def __init__(self, n: int, endpoints: np.ndarray, weights: np.ndarray):
        if n < 1:
            raise ValidationError("graph needs at least one vertex")
        self.n = int(n)
        self.endpoints = np.ascontiguousarray(endpoints, dtype=np.int64).reshape(-1, 2)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64).reshape(-1)
        self.degrees = np.bincount(
            self.endpoints[:, 0], weights=self.weights, minlength=self.n
        ) + np.bincount(self.endpoints[:, 1], weights=self.weights, minlength=self.n)
        self._adj = None
        self._adj_csr = None
        self._connected = None

    @classmethod
    def from_edges(cls, n: int, endpoints, weights=None) -> "Graph":
        """Build a graph from raw (p, q[, w]) data, merging parallel edges."""
        endpoints = np.asarray(endpoints, dtype=np.int64).reshape(-1, 2)
        if weights is None:
            weights = np.ones(endpoints.shape[0])
        merged, merged_w = _canonical_merge(n, endpoints, weights)
        return cls(n, merged, merged_w)

    @property
    def num_edges(self) -> int:
        return self.endpoints.shape[0]

    def adjacency_csr(self) -> sp.csr_matrix:
        """Symmetric weighted adjacency matrix (cached)."""
        if self._adj_csr is None:
            u, v = self.endpoints[:, 0], self.endpoints[:, 1]
            self._adj_csr = sp.coo_matrix(
                (
                    np.concatenate((self.weights, self.weights)),
                    (np.concatenate((u, v)), np.concatenate((v, u))),
                ),
                shape=(self.n, self.n),
            ).tocsr()
        return self._adj_csr

    def _adjacency_index(self):
        if self._adj is None:
            u, v = self.endpoints[:, 0], self.endpoints[:, 1]
            src = np.concatenate((u, v))
            dst = np.concatenate((v, u))
            eid = np.concatenate((np.arange(self.num_edges), np.arange(self.num_edges)))
            order = np.lexsort((dst, src))
            src, dst, eid = src[order], dst[order], eid[order]
            ptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(src, minlength=self.n), out=ptr[1:])
            self._adj = (ptr, dst, eid)
        return self._adj

    def neighbors(self, v: int):
        """Neighbor ids and incident edge ids of ``v`` (sorted by neighbor)."""
        ptr, dst, eid = self._adjacency_index()
        return dst[ptr[v] : ptr[v + 1]], eid[ptr[v] : ptr[v + 1]]

    def is_connected(self) -> bool:
        if self._connected is None:
            if self.n == 1:
                self._connected = True
            else:
                ncomp = csgraph.connected_components(
                    self.adjacency_csr(), directed=False, return_labels=False
                )
                self._connected = ncomp == 1
        return self._connected

    def subgraph(self, edge_ids) -> "Graph":
        """Spanning subgraph (same vertex set) keeping the given edges.

        Edges appear in ascending original-id order.
        """
        ids = np.unique(np.asarray(edge_ids, dtype=np.int64))
        return Graph(self.n, self.endpoints[ids], self.weights[ids])

    def edge_mask(self, edge_ids) -> np.ndarray:
        mask = np.zeros(self.num_edges, dtype=bool)
        mask[np.asarray(list(edge_ids) if isinstance(edge_ids, set) else edge_ids, dtype=np.int64)] = True
        return mask

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.num_edges})"


class LaplacianOperator:
    """Matrix-free view of the graph Laplacian L = D - A.

    Provides ``matvec`` and diagonal access; the dense matrix is never
    formed. Row sums vanish up to floating-point accumulation order.
    """

    __slots__ = ("graph", "_csr", "_lap_csr")

    def __init__(self, graph: Graph):
        self.graph = graph
        self._csr = graph.adjacency_csr()
        self._lap_csr = None

    @property
    def n(self) -> int:
        return self.graph.n

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.graph.n,):
            raise ValidationError(
                f"vector has shape {x.shape}, expected ({self.graph.n},)"
            )
        return self.graph.degrees * x - self._csr @ x

    def diagonal(self) -> np.ndarray:
        """Weighted degrees (the Laplacian diagonal)."""
        return self.graph.degrees.copy()

    def to_csr(self) -> sp.csr_matrix:
        """Sparse CSR form of L (cached); used for factorization."""
        if self._lap_csr is None:
            self._lap_csr = (
                sp.diags(self.graph.degrees) - self._csr
            ).tocsr()
        return self._lap_csr


def quadratic_form(L: LaplacianOperator, x: np.ndarray) -> float:
    """x^T L x computed edge-wise: sum of w_pq (x_p - x_q)^2."""
    g = L.graph
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.n,):
        raise ValidationError(f"vector has shape {x.shape}, expected ({g.n},)")
    d = x[g.endpoints[:, 0]] - x[g.endpoints[:, 1]]
    return float(np.sum(g.weights * d * d))


def load_edge_list(path) -> Graph:
    """Load a whitespace-separated edge list: ``p q [w]`` per line.

    Weight defaults to 1. Blank lines and lines starting with ``#`` are
    skipped. Parallel edges merge by weight summation.
    """
    endpoints = []
    weights = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise GraphFormatError(
                    f"expected 'p q [w]', got {len(parts)} fields", line=lineno
                )
            try:
                p, q = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(
                    f"non-integer vertex token in {parts[:2]}", line=lineno
                ) from None
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise GraphFormatError(
                        f"bad weight token {parts[2]!r}", line=lineno
                    ) from None
            else:
                w = 1.0
            if p == q:
                raise ValidationError(f"line {lineno}: self-loop at vertex {p}")
            if not (w > 0) or not np.isfinite(w):
                raise ValidationError(
                    f"line {lineno}: weight must be positive, got {parts[2] if len(parts) == 3 else w}"
                )
            if p < 0 or q < 0:
                raise ValidationError(f"line {lineno}: negative vertex id")
            endpoints.append((p, q))
            weights.append(w)
    if not endpoints:
        raise DegenerateInputError(f"{path}: no edges found")
    arr = np.asarray(endpoints, dtype=np.int64)
    n = int(arr.max()) + 1
    return Graph.from_edges(n, arr, np.asarray(weights))


_MM_FORMATS = {"coordinate"}
_MM_FIELDS = {"real", "integer", "pattern"}
_MM_SYMMETRIES = {"general", "symmetric"}


def load_matrix_market(path) -> Graph:
    """Load a Matrix Market coordinate file as a graph.

    Each strictly-lower-triangle entry A(p,q), p > q, becomes the edge
    (p, q) with weight |A(p,q)| (weight 1 for pattern files). Diagonal
    entries and upper-triangle entries are discarded; duplicate
    coordinates are summed before taking the absolute value.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("%%MatrixMarket"):
            raise GraphFormatError("missing %%MatrixMarket header", line=1)
        tokens = header.strip().split()
        if len(tokens) < 5 or tokens[1].lower() != "matrix":
            raise GraphFormatError(f"malformed header {header.strip()!r}", line=1)
        fmt, field, symmetry = (t.lower() for t in tokens[2:5])
        if fmt not in _MM_FORMATS:
            raise GraphFormatError(f"unsupported format {fmt!r} (need coordinate)", line=1)
        if field not in _MM_FIELDS:
            raise GraphFormatError(f"unsupported field {field!r}", line=1)
        if symmetry not in _MM_SYMMETRIES:
            raise GraphFormatError(f"unsupported symmetry {symmetry!r}", line=1)
        pattern = field == "pattern"

        lineno = 1
        size = None
        for raw in fh:
            lineno += 1
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError("size line must be 'rows cols nnz'", line=lineno)
            try:
                rows, cols, nnz = (int(p) for p in parts)
            except ValueError:
                raise GraphFormatError(f"bad size line {line!r}", line=lineno) from None
            size = (rows, cols, nnz)
            break
        if size is None:
            raise GraphFormatError("missing size line", line=lineno)
        rows, cols, nnz = size
        if rows != cols:
            raise GraphFormatError(f"matrix must be square, got {rows}x{cols}", line=lineno)

        ii = np.empty(nnz, dtype=np.int64)
        jj = np.empty(nnz, dtype=np.int64)
        vv = np.empty(nnz, dtype=np.float64)
        k = 0
        for raw in fh:
            lineno += 1
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            parts = line.split()
            want = 2 if pattern else 3
            if len(parts) < want:
                raise GraphFormatError(
                    f"entry needs {want} fields, got {len(parts)}", line=lineno
                )
            try:
                i, j = int(parts[0]), int(parts[1])
                v = 1.0 if pattern else float(parts[2])
            except ValueError:
                raise GraphFormatError(f"bad entry {line!r}", line=lineno) from None
            if k >= nnz:
                raise GraphFormatError("more entries than declared nnz", line=lineno)
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise GraphFormatError(f"index ({i},{j}) out of bounds", line=lineno)
            ii[k], jj[k], vv[k] = i - 1, j - 1, v
            k += 1
        if k != nnz:
            raise GraphFormatError(
                f"declared {nnz} entries but found {k}", line=lineno
            )

    lower = ii > jj
    ii, jj, vv = ii[lower], jj[lower], vv[lower]
    if ii.size == 0:
        raise DegenerateInputError(
            f"{path}: no off-diagonal entries, nothing to build a graph from"
        )
    # Sum duplicate coordinates before |.| so repeated entries behave like
    # one accumulated matrix entry.
    keys = ii * np.int64(rows) + jj
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    sums = np.bincount(inverse, weights=vv, minlength=uniq.size)
    order = np.argsort(first, kind="stable")
    uniq, sums = uniq[order], np.abs(sums[order])
    keep = sums > 0
    uniq, sums = uniq[keep], sums[keep]
    if uniq.size == 0:
        raise DegenerateInputError(f"{path}: all off-diagonal entries cancel to zero")
    endpoints = np.column_stack((uniq // rows, uniq % rows))
    return Graph.from_edges(rows, endpoints, sums)


def largest_component(g: Graph):
    """Largest connected component as a densely re-indexed graph.

    Returns ``(subgraph, old_ids)`` where ``old_ids[new_id]`` is the
    original vertex id. Size ties go to the component containing the
    smallest original vertex id. Connected input comes back unchanged
    with the identity map.
    """
    if g.is_connected():
        return g, np.arange(g.n, dtype=np.int64)
    ncomp, labels = csgraph.connected_components(g.adjacency_csr(), directed=False)
    sizes = np.bincount(labels, minlength=ncomp)
    best_size = sizes.max()
    candidates = np.flatnonzero(sizes == best_size)
    # Tie-break: component whose smallest original vertex id is smallest.
    min_vertex = np.full(ncomp, g.n, dtype=np.int64)
    np.minimum.at(min_vertex, labels, np.arange(g.n))
    chosen = candidates[np.argmin(min_vertex[candidates])]

    old_ids = np.flatnonzero(labels == chosen).astype(np.int64)
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[old_ids] = np.arange(old_ids.size)
    u, v = g.endpoints[:, 0], g.endpoints[:, 1]
    keep = (labels[u] == chosen) & (labels[v] == chosen)
    sub = Graph(old_ids.size, np.column_stack((remap[u[keep]], remap[v[keep]])),
                g.weights[keep])
    return sub, old_ids


def write_edge_list(g: Graph, path) -> None:
    """Write ``p q w`` lines with round-trippable (17 significant digit) weights."""
    with open(path, "w", encoding="utf-8") as fh:
        for (u, v), w in zip(g.endpoints, g.weights):
            fh.write(f"{u} {v} {w:.17g}\n")
