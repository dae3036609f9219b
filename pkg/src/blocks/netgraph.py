"""
Contact Graphs
==============
Undirected simple graphs stored as symmetric CSR adjacency with a type tag
per edge (close | normal | untyped).

Responsibilities:
- Edge-list ingestion with first-appearance id remapping
- Neighborhood overlap and threshold edge typing
- Descriptive statistics (mean degree, degree correlation, clustering)
- Configuration-model generation
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr
from scipy import sparse

from src.blocks.dist import DegreeDistribution
from src.core.errors import (
    DataError,
    EdgeListParseError,
    EmptyInputError,
    GenerationError,
    ParameterError,
)
from src.models.output import NetworkStats
from src.utils.logger import get_component_logger

logger = get_component_logger("netgraph")

OVERLAP_CHUNK_ROWS = 4096
MAX_PARITY_RESAMPLES = 100


class EdgeKind(str, Enum):
    UNTYPED = "untyped"
    CLOSE = "close"
    NORMAL = "normal"

    @property
    def code(self) -> int:
        return _KIND_CODES[self]


_KIND_CODES = {EdgeKind.UNTYPED: 0, EdgeKind.CLOSE: 1, EdgeKind.NORMAL: 2}
_KIND_NAMES = np.array([EdgeKind.UNTYPED.value, EdgeKind.CLOSE.value, EdgeKind.NORMAL.value])


class ContactGraph(BaseModel):
    """
    Immutable undirected simple graph.

    `edges` lists every edge once as (u, v) with u < v in lexicographic order;
    `kinds` holds one type code per edge. The CSR arrays store both
    orientations with sorted neighbor lists, and `edge_id` maps each CSR
    entry back to its row in `edges`.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(..., ge=0)
    edges: np.ndarray
    kinds: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    edge_id: np.ndarray
    labels: Optional[np.ndarray] = Field(None, description="Original node ids, when loaded from a file")
    dropped: Dict[str, int] = Field(default_factory=dict)

    _adjacency: Optional[sparse.csr_matrix] = PrivateAttr(default=None)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: np.ndarray,
        kinds: Optional[np.ndarray] = None,
        labels: Optional[np.ndarray] = None,
        dropped: Optional[Dict[str, int]] = None,
    ) -> "ContactGraph":
        """
        Build from a simple edge array (no self-loops, no duplicates, either orientation).
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(edges) and (edges.min() < 0 or edges.max() >= n):
            raise ParameterError(f"edge endpoints must lie in 0..{n - 1}")
        canonical = np.sort(edges, axis=1)
        order = np.lexsort((canonical[:, 1], canonical[:, 0]))
        canonical = canonical[order]
        if kinds is None:
            kinds = np.zeros(len(canonical), dtype=np.int8)
        else:
            kinds = np.asarray(kinds, dtype=np.int8)[order]

        m = len(canonical)
        rows = np.concatenate([canonical[:, 0], canonical[:, 1]])
        cols = np.concatenate([canonical[:, 1], canonical[:, 0]])
        ids = np.concatenate([np.arange(m), np.arange(m)])
        csr_order = np.lexsort((cols, rows))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])

        return cls(
            n=n, edges=canonical, kinds=kinds, indptr=indptr,
            indices=cols[csr_order], edge_id=ids[csr_order],
            labels=labels, dropped=dropped or {},
        )

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def adjacency(self) -> sparse.csr_matrix:
        if self._adjacency is None:
            data = np.ones(len(self.indices), dtype=np.int32)
            self._adjacency = sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))
        return self._adjacency

    @property
    def is_typed(self) -> bool:
        return bool(np.all(self.kinds != EdgeKind.UNTYPED.code))

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def edge_index(self, u: int, v: int) -> Optional[int]:
        """Row of (u, v) in `edges`, or None if the edge is absent."""
        if not (0 <= u < self.n and 0 <= v < self.n):
            return None
        row = self.neighbors(u)
        pos = np.searchsorted(row, v)
        if pos < len(row) and row[pos] == v:
            return int(self.edge_id[self.indptr[u] + pos])
        return None

    def has_edge(self, u: int, v: int) -> bool:
        return self.edge_index(u, v) is not None

    def kind_of(self, u: int, v: int) -> EdgeKind:
        i = self.edge_index(u, v)
        if i is None:
            raise ParameterError(f"({u}, {v}) is not an edge")
        return EdgeKind(_KIND_NAMES[self.kinds[i]])

    def entry_kinds(self) -> np.ndarray:
        """Type code of every CSR entry (both orientations)."""
        return self.kinds[self.edge_id]

    def with_kinds(self, kinds: np.ndarray) -> "ContactGraph":
        """Copy with new per-edge type codes (aligned with `edges`)."""
        kinds = np.asarray(kinds, dtype=np.int8)
        if kinds.shape != (self.m,):
            raise ParameterError(f"expected {self.m} edge types, got {kinds.shape}")
        return self.model_copy(update={"kinds": kinds})

    def with_kind(self, kind: EdgeKind) -> "ContactGraph":
        """Copy with every edge given the same type."""
        return self.with_kinds(np.full(self.m, EdgeKind(kind).code, dtype=np.int8))

    def kind_counts(self) -> Dict[str, int]:
        counts = np.bincount(self.kinds, minlength=3)
        return {name: int(counts[i]) for i, name in enumerate(_KIND_NAMES)}

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(
            (int(u), int(v), {"kind": _KIND_NAMES[k]}) for (u, v), k in zip(self.edges, self.kinds)
        )
        return G

    @classmethod
    def from_networkx(cls, G: nx.Graph) -> "ContactGraph":
        """Nodes are numbered in G's iteration order; 'kind' edge attributes are kept."""
        index = {node: i for i, node in enumerate(G.nodes)}
        pairs, kinds = [], []
        for a, b, attrs in G.edges(data=True):
            if a == b:
                continue
            pairs.append((index[a], index[b]))
            kinds.append(EdgeKind(attrs.get("kind", EdgeKind.UNTYPED.value)).code)
        return cls.from_edges(len(index), np.array(pairs, dtype=np.int64).reshape(-1, 2), np.array(kinds, dtype=np.int8))


def _simplify(pairs: np.ndarray) -> Tuple[np.ndarray, int, int]:
    """Drop self-loops and duplicate edges; returns (edges, n_self_loops, n_duplicates)."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    loops = pairs[:, 0] == pairs[:, 1]
    canonical = np.sort(pairs[~loops], axis=1)
    unique = np.unique(canonical, axis=0) if len(canonical) else canonical
    return unique, int(loops.sum()), len(canonical) - len(unique)


# --- Ingestion ---
def _parse_edge_lines(path: Path) -> np.ndarray:
    pairs: List[Tuple[int, int]] = []
    matrix_market = False
    size_line_seen = False
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for line_no, raw in enumerate(handle, start=1):
                line = raw.strip()
                if line_no == 1 and line.startswith("%%MatrixMarket"):
                    matrix_market = True
                    continue
                if not line or line[0] in "#%":
                    continue
                if matrix_market and not size_line_seen:
                    size_line_seen = True
                    continue
                tokens = line.split()
                if len(tokens) != 2:
                    raise EdgeListParseError(str(path), line_no, line)
                try:
                    pairs.append((int(tokens[0]), int(tokens[1])))
                except ValueError:
                    raise EdgeListParseError(str(path), line_no, line) from None
    except OSError as e:
        raise DataError(f"cannot read edge list {path}: {e}") from e
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def load_edge_list(path: Union[str, Path]) -> ContactGraph:
    """
    Read an undirected edge list: one whitespace-separated integer pair per
    line, '#' and '%' comment lines, optional Matrix Market header.

    Node ids are remapped to 0..n-1 in order of first appearance; the
    original ids are kept in `labels`. Self-loops and duplicate edges are
    dropped and counted.

    Raises:
        EdgeListParseError: A line is not an integer pair
        EmptyInputError: The file holds no edges
    """
    path = Path(path)
    raw = _parse_edge_lines(path)
    if len(raw) == 0:
        raise EmptyInputError(f"{path} contains no edges")

    codes, labels = pd.factorize(raw.ravel())
    edges, loops, duplicates = _simplify(codes.reshape(-1, 2))
    if loops or duplicates:
        logger.warning(f"{path.name}: dropped {duplicates} duplicate edge(s) and {loops} self-loop(s)")

    graph = ContactGraph.from_edges(
        len(labels), edges, labels=np.asarray(labels, dtype=np.int64),
        dropped={"duplicates": duplicates, "self_loops": loops},
    )
    logger.info(f"Loaded {path.name}: n={graph.n}, m={graph.m}")
    return graph


def write_edge_list(g: ContactGraph, path: Union[str, Path]) -> Path:
    """Write 'u v' lines (0-based ids), readable by load_edge_list."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"# n={g.n} m={g.m}\n")
        np.savetxt(handle, g.edges, fmt="%d", delimiter=" ")
    return path


def node_mapping_frame(g: ContactGraph) -> pd.DataFrame:
    """Internal node index against the original label."""
    labels = g.labels if g.labels is not None else np.arange(g.n)
    return pd.DataFrame({"node": np.arange(g.n), "label": labels})


def edge_frame(g: ContactGraph) -> pd.DataFrame:
    return pd.DataFrame({"u": g.edges[:, 0], "v": g.edges[:, 1], "kind": _KIND_NAMES[g.kinds]})


# --- Overlap and typing ---
def neighborhood_overlap(g: ContactGraph, u: int, v: int) -> float:
    """
    |N(u) & N(v)| / |N(u) | N(v) - {u, v}| for the edge (u, v); 0 when the
    denominator is empty.
    """
    if not g.has_edge(u, v):
        raise ParameterError(f"({u}, {v}) is not an edge")
    nu, nv = g.neighbors(u), g.neighbors(v)
    common = len(np.intersect1d(nu, nv, assume_unique=True))
    denominator = len(nu) + len(nv) - common - 2
    return common / denominator if denominator > 0 else 0.0


def common_neighbor_counts(g: ContactGraph) -> np.ndarray:
    """Number of common neighbors of every edge (aligned with g.edges)."""
    counts = np.zeros(g.m, dtype=np.int64)
    if g.m == 0:
        return counts
    A = g.adjacency
    us, vs = g.edges[:, 0], g.edges[:, 1]
    bounds = np.searchsorted(us, np.arange(0, g.n + OVERLAP_CHUNK_ROWS, OVERLAP_CHUNK_ROWS))
    for start_node, (lo, hi) in zip(range(0, g.n, OVERLAP_CHUNK_ROWS), zip(bounds[:-1], bounds[1:])):
        if lo == hi:
            continue
        block = A[start_node:start_node + OVERLAP_CHUNK_ROWS] @ A
        counts[lo:hi] = np.asarray(block[us[lo:hi] - start_node, vs[lo:hi]]).ravel()
    return counts


def edge_overlaps(g: ContactGraph) -> np.ndarray:
    """Neighborhood overlap of every edge (aligned with g.edges)."""
    common = common_neighbor_counts(g).astype(float)
    deg = g.degrees
    denominator = deg[g.edges[:, 0]] + deg[g.edges[:, 1]] - common - 2
    overlaps = np.zeros(g.m)
    np.divide(common, denominator, out=overlaps, where=denominator > 0)
    return overlaps


def classify_edges(g: ContactGraph, h_overlap: float) -> ContactGraph:
    """Type each edge close if its overlap >= h_overlap, otherwise normal."""
    if not 0 <= h_overlap <= 1:
        raise ParameterError(f"h_overlap must lie in [0, 1], got {h_overlap}")
    close = edge_overlaps(g) >= h_overlap
    kinds = np.where(close, EdgeKind.CLOSE.code, EdgeKind.NORMAL.code).astype(np.int8)
    typed = g.with_kinds(kinds)
    logger.debug(f"h_overlap={h_overlap}: {typed.kind_counts()}")
    return typed


# --- Statistics ---
def graph_stats(g: ContactGraph) -> NetworkStats:
    """
    n, m, mean degree, degree correlation over edges, global transitivity and
    mean local clustering. rho is NaN when endpoint degrees have no variance.
    """
    if g.n < 1:
        raise ParameterError("graph_stats needs at least one node")
    deg = g.degrees.astype(float)
    common = common_neighbor_counts(g).astype(float)

    triples = float(np.sum(deg * (deg - 1) / 2))
    C = float(common.sum() / triples) if triples > 0 else 0.0

    per_node = np.bincount(g.edges[:, 0], weights=common, minlength=g.n)
    per_node += np.bincount(g.edges[:, 1], weights=common, minlength=g.n)
    pairs = deg * (deg - 1)
    local = np.zeros(g.n)
    np.divide(per_node, pairs, out=local, where=pairs > 0)

    rho = float("nan")
    if g.m > 0:
        x = np.concatenate([deg[g.edges[:, 0]], deg[g.edges[:, 1]]])
        y = np.concatenate([deg[g.edges[:, 1]], deg[g.edges[:, 0]]])
        if np.std(x) > 0:
            rho = float(np.corrcoef(x, y)[0, 1])

    return NetworkStats(n=g.n, m=g.m, K0=2 * g.m / g.n, rho=rho, C=C, C_local=float(local.mean()))


# --- Generation ---
def configuration_model(deg: DegreeDistribution, n: int, seed: int) -> ContactGraph:
    """
    Stub-matching random graph with i.i.d. degrees drawn from deg.

    An odd stub total is fixed by redrawing the last node's degree. Self-loops
    and multi-edges produced by the matching are erased.

    Raises:
        GenerationError: No even stub total after 100 redraws
    """
    if n < 2:
        raise ParameterError(f"configuration model needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    support = deg.degrees
    degrees = rng.choice(support, size=n, p=deg.pmf)

    attempts = 0
    while degrees.sum() % 2:
        if attempts == MAX_PARITY_RESAMPLES:
            raise GenerationError(f"odd stub total after {MAX_PARITY_RESAMPLES} redraws of the last degree")
        degrees[-1] = rng.choice(support, p=deg.pmf)
        attempts += 1

    stubs = np.repeat(np.arange(n), degrees)
    rng.shuffle(stubs)
    edges, loops, duplicates = _simplify(stubs.reshape(-1, 2))
    logger.info(
        f"Configuration model n={n}, seed={seed}: m={len(edges)} "
        f"({loops} self-loops, {duplicates} multi-edges erased)"
    )
    return ContactGraph.from_edges(n, edges, dropped={"duplicates": duplicates, "self_loops": loops})
