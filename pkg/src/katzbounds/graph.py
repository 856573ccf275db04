"""Directed graph with batch mutation and a cached sparse adjacency view.

The node universe is fixed at construction; arcs form a set (no parallel
arcs, self-loops permitted). Both directions are queryable in O(1) per
membership test and O(deg) per neighbor scan. Mutation happens through
validated arc batches; a compressed row snapshot for the numeric kernels
is rebuilt lazily whenever the arc set has changed.
"""
from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import sparse

from .errors import BatchPreconditionError, NodeRangeError, ParseError

log = logging.getLogger(__name__)

Arc = tuple[int, int]

# Node ids must stay indexable by 32-bit sparse indices.
MAX_NODE_ID = 2**31 - 1


@dataclass
class EdgeBatch:
    """A set of arc insertions and deletions applied as one unit.

    Preconditions (checked against a graph before anything mutates):
    inserted arcs must be absent, deleted arcs must be present, and the
    two lists must not overlap or contain duplicates.
    """

    insertions: list[Arc] = field(default_factory=list)
    deletions: list[Arc] = field(default_factory=list)

    def __post_init__(self):
        self.insertions = [(int(u), int(v)) for u, v in self.insertions]
        self.deletions = [(int(u), int(v)) for u, v in self.deletions]

    def validate_shape(self) -> None:
        """Structural checks that need no graph: duplicates and overlap."""
        ins, dels = set(self.insertions), set(self.deletions)
        if len(ins) != len(self.insertions):
            dup = _first_duplicate(self.insertions)
            raise BatchPreconditionError(f"duplicate insertion of arc {dup}")
        if len(dels) != len(self.deletions):
            dup = _first_duplicate(self.deletions)
            raise BatchPreconditionError(f"duplicate deletion of arc {dup}")
        overlap = ins & dels
        if overlap:
            arc = min(overlap)
            raise BatchPreconditionError(
                f"arc {arc} appears in both insertions and deletions")

    def is_symmetric(self) -> bool:
        """True when both lists are closed under arc reversal."""
        ins, dels = set(self.insertions), set(self.deletions)
        return all((v, u) in ins for u, v in ins) and \
            all((v, u) in dels for u, v in dels)

    def __len__(self) -> int:
        return len(self.insertions) + len(self.deletions)


def _first_duplicate(arcs: Sequence[Arc]) -> Arc:
    seen = set()
    for a in arcs:
        if a in seen:
            return a
        seen.add(a)
    return arcs[0]


class Graph:
    """Mutable directed graph over the fixed universe 0..node_count-1."""

    __slots__ = ("_n", "_out", "_in", "_arc_count", "_version",
                 "_max_out", "_max_dirty", "_csr", "_csr_version")

    def __init__(self, node_count: int):
        if node_count < 0:
            raise NodeRangeError(f"node_count must be >= 0, got {node_count}")
        self._n = int(node_count)
        self._out: list[set[int]] = [set() for _ in range(self._n)]
        self._in: list[set[int]] = [set() for _ in range(self._n)]
        self._arc_count = 0
        self._version = 0
        self._max_out = 0
        self._max_dirty = False
        self._csr = None
        self._csr_version = -1

    # ---- construction helpers ----

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Arc],
                   undirected: bool = False) -> "Graph":
        """Build a graph from (u, v) pairs; duplicates collapse.

        With undirected=True every pair contributes both arc directions.
        """
        g = cls(node_count)
        for u, v in edges:
            g._check_node(u)
            g._check_node(v)
            g._add_arc(u, v)
            if undirected:
                g._add_arc(v, u)
        g._version += 1
        return g

    # ---- read access ----

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def arc_count(self) -> int:
        return self._arc_count

    @property
    def version(self) -> int:
        """Monotone counter bumped by every mutating call."""
        return self._version

    def has_arc(self, u: int, v: int) -> bool:
        self._check_node(u)
        self._check_node(v)
        return v in self._out[u]

    def out_neighbors(self, v: int) -> Iterator[int]:
        self._check_node(v)
        return iter(self._out[v])

    def in_neighbors(self, v: int) -> Iterator[int]:
        self._check_node(v)
        return iter(self._in[v])

    def out_degree(self, v: int) -> int:
        self._check_node(v)
        return len(self._out[v])

    def in_degree(self, v: int) -> int:
        self._check_node(v)
        return len(self._in[v])

    def max_out_degree(self) -> int:
        if self._max_dirty:
            self._max_out = max((len(s) for s in self._out), default=0)
            self._max_dirty = False
        return self._max_out

    def out_degrees(self) -> np.ndarray:
        return np.array([len(s) for s in self._out], dtype=np.int64)

    def arcs(self) -> Iterator[Arc]:
        for u in range(self._n):
            for v in self._out[u]:
                yield (u, v)

    def is_symmetric(self) -> bool:
        """True when the arc set is closed under reversal."""
        for u in range(self._n):
            onbrs = self._out[u]
            for v in onbrs:
                if u not in self._out[v]:
                    return False
        return True

    def out_csr(self) -> sparse.csr_matrix:
        """Row-per-source 0/1 adjacency snapshot, columns sorted.

        Cached per graph version, so the cost of a rebuild is only paid
        after mutation. Row order is canonical: two graphs with equal arc
        sets produce bitwise-identical matrices.
        """
        if self._csr is None or self._csr_version != self._version:
            indptr = np.zeros(self._n + 1, dtype=np.int64)
            for v in range(self._n):
                indptr[v + 1] = indptr[v] + len(self._out[v])
            indices = np.empty(int(indptr[-1]), dtype=np.int32)
            for v in range(self._n):
                lo = int(indptr[v])
                nbrs = sorted(self._out[v])
                indices[lo:lo + len(nbrs)] = nbrs
            data = np.ones(len(indices), dtype=np.float64)
            self._csr = sparse.csr_matrix((data, indices, indptr),
                                          shape=(self._n, self._n))
            self._csr_version = self._version
        return self._csr

    # ---- mutation ----

    def apply_batch(self, batch: EdgeBatch) -> None:
        """Atomically delete then insert; validates everything first."""
        self.validate_batch(batch)
        self.remove_arcs(batch.deletions, _validated=True)
        self.insert_arcs(batch.insertions, _validated=True)

    def validate_batch(self, batch: EdgeBatch) -> None:
        batch.validate_shape()
        for u, v in batch.insertions:
            self._check_node(u)
            self._check_node(v)
            if v in self._out[u]:
                raise BatchPreconditionError(
                    f"cannot insert arc ({u}, {v}): already present")
        for u, v in batch.deletions:
            self._check_node(u)
            self._check_node(v)
            if v not in self._out[u]:
                raise BatchPreconditionError(
                    f"cannot delete arc ({u}, {v}): not present")

    def insert_arcs(self, arcs: Sequence[Arc], _validated: bool = False) -> None:
        if not _validated:
            self.validate_batch(EdgeBatch(insertions=list(arcs)))
        for u, v in arcs:
            self._add_arc(u, v)
        self._version += 1

    def remove_arcs(self, arcs: Sequence[Arc], _validated: bool = False) -> None:
        if not _validated:
            self.validate_batch(EdgeBatch(deletions=list(arcs)))
        for u, v in arcs:
            self._out[u].discard(v)
            self._in[v].discard(u)
            self._arc_count -= 1
        self._max_dirty = True
        self._version += 1

    # ---- internals ----

    def _add_arc(self, u: int, v: int) -> None:
        if v not in self._out[u]:
            self._out[u].add(v)
            self._in[v].add(u)
            self._arc_count += 1
            if len(self._out[u]) > self._max_out and not self._max_dirty:
                self._max_out = len(self._out[u])

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self._n:
            raise NodeRangeError(
                f"node id {v} outside universe [0, {self._n})")

    def __repr__(self) -> str:
        return f"Graph(nodes={self._n}, arcs={self._arc_count})"


# ---- edge list ingestion ----

def load_edge_list(source, undirected: bool = False) -> Graph:
    """Parse a whitespace-separated edge list into a Graph.

    Accepted lines: an optional leading "NODES <n>" header, comment lines
    starting with '#' or '%', blank lines, and "u v" arc lines with
    non-negative integer ids. Without a header the universe is
    1 + max id seen; the header allows trailing isolated nodes. Duplicate
    lines collapse to one arc. With undirected=True each line contributes
    both directions.

    `source` may be a path or an open text/binary stream.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return load_edge_list(fh, undirected=undirected)

    declared: int | None = None
    edges: list[Arc] = []
    max_id = -1
    self_loops = 0
    lines_read = 0
    header_allowed = True

    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError:
                raise ParseError("not valid UTF-8 text", lineno)
        else:
            line = raw
        line = line.strip()
        lines_read += 1
        if not line or line.startswith("#") or line.startswith("%"):
            continue
        parts = line.split()
        if header_allowed and parts[0].upper() == "NODES":
            if len(parts) != 2:
                raise ParseError("malformed NODES header", lineno)
            declared = _parse_id(parts[1], lineno)
            header_allowed = False
            continue
        header_allowed = False
        if len(parts) != 2:
            raise ParseError(
                f"expected two node ids, got {len(parts)} fields", lineno)
        u = _parse_id(parts[0], lineno)
        v = _parse_id(parts[1], lineno)
        if u == v:
            self_loops += 1
        max_id = max(max_id, u, v)
        edges.append((u, v))

    node_count = declared if declared is not None else max_id + 1
    if max_id >= node_count:
        raise NodeRangeError(
            f"node id {max_id} exceeds declared universe of {node_count}")
    g = Graph.from_edges(node_count, edges, undirected=undirected)
    log.info("loaded edge list: %d lines, %d nodes, %d arcs, %d self-loops",
             lines_read, node_count, g.arc_count, self_loops)
    return g


def _parse_id(token: str, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"not an integer: {token!r}", lineno) from None
    if value < 0:
        raise ParseError(f"negative node id {value}", lineno)
    if value > MAX_NODE_ID:
        raise NodeRangeError(
            f"line {lineno}: node id {value} overflows the 32-bit id type")
    return value


def dumps_edge_list(node_count: int, edges: Iterable[Arc]) -> str:
    """Serialize edges with an explicit NODES header (keeps isolated ids)."""
    out = io.StringIO()
    out.write(f"NODES {node_count}\n")
    for u, v in edges:
        out.write(f"{u} {v}\n")
    return out.getvalue()
