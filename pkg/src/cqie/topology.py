"""Spin-network graphs on which reset protocols run.

A topology is a weighted undirected graph over contiguous 0-based node
indices.  All builder functions return canonical, immutable `Topology`
values: the edge list is sorted, duplicate-free and stores each edge once
as (i, j, weight) with i < j.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import InfeasibleError, InvalidArgumentError


class TopologyKind(str, Enum):
    INDIVIDUAL = "individual"
    SQUARE_LATTICE = "square_lattice"
    PEGASUS = "pegasus"
    PEGASUS_PATCH = "pegasus_patch"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Topology:
    """Immutable weighted graph; safe to share across workers."""

    n: int
    edges: tuple[tuple[int, int, float], ...]
    kind: TopologyKind
    seed: int = 0
    # For patches: parent node index of each local node, for provenance.
    parent_nodes: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError(f"node count must be >= 1, got {self.n}")
        seen = set()
        prev = None
        for i, j, w in self.edges:
            if not (0 <= i < j < self.n):
                raise InvalidArgumentError(f"bad edge ({i}, {j}) for n={self.n}")
            if (i, j) in seen:
                raise InvalidArgumentError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            if prev is not None and (i, j) < prev:
                raise InvalidArgumentError("edge list is not sorted")
            prev = (i, j)
            float(w)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def _csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Adjacency in CSR form: (indptr, indices, weights)."""
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j, _ in self.edges:
            deg[i] += 1
            deg[j] += 1
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.zeros(indptr[-1], dtype=np.int64)
        weights = np.zeros(indptr[-1], dtype=np.float64)
        cursor = indptr[:-1].copy()
        for i, j, w in self.edges:
            indices[cursor[i]] = j
            weights[cursor[i]] = w
            cursor[i] += 1
            indices[cursor[j]] = i
            weights[cursor[j]] = w
            cursor[j] += 1
        return indptr, indices, weights

    def neighbors(self, i: int) -> np.ndarray:
        indptr, indices, _ = self._csr
        return indices[indptr[i]:indptr[i + 1]]

    def degree(self, i: int) -> int:
        indptr, _, _ = self._csr
        return int(indptr[i + 1] - indptr[i])

    def degrees(self) -> np.ndarray:
        indptr, _, _ = self._csr
        return np.diff(indptr)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(f"n={self.n} kind={self.kind.value} seed={self.seed}\n".encode())
        for i, j, w in self.edges:
            h.update(f"{i} {j} {w!r}\n".encode())
        return h.hexdigest()[:16]


def average_connectivity(t: Topology) -> float:
    """Mean degree 2|E|/n."""
    return 2.0 * t.n_edges / t.n


def build_individual(n: int) -> Topology:
    """Edgeless graph: every spin resets on its own."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    return Topology(n=n, edges=(), kind=TopologyKind.INDIVIDUAL)


def build_square_lattice(L: int, periodic: bool = False) -> Topology:
    """L x L nearest-neighbour lattice, row-major indexing, unit weights."""
    if L < 1:
        raise InvalidArgumentError(f"L must be >= 1, got {L}")
    if periodic and L < 3:
        raise InvalidArgumentError(
            f"periodic boundaries need L >= 3 (L={L} would duplicate edges)")
    edges = []
    for r in range(L):
        for c in range(L):
            i = r * L + c
            if c + 1 < L:
                edges.append((i, i + 1, 1.0))
            elif periodic:
                edges.append((r * L, i, 1.0))
            if r + 1 < L:
                edges.append((i, i + L, 1.0))
            elif periodic:
                edges.append((c, i, 1.0))
    edges = tuple(sorted((min(i, j), max(i, j), w) for i, j, w in edges))
    return Topology(n=L * L, edges=edges, kind=TopologyKind.SQUARE_LATTICE)


# Track offsets of the Pegasus lattice geometry: qubit k of a vertical
# (u=0) or horizontal (u=1) tile is a length-12 segment shifted by
# _SHIFTS[u][k] along its axis.
_SHIFTS = (
    (2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6),
    (6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10),
)


def _pegasus_coords(m: int):
    return [(u, w, k, z)
            for u in range(2) for w in range(m)
            for k in range(12) for z in range(m - 1)]


def _pegasus_edges(m: int):
    """Edge list over (u, w, k, z) coordinates for the full P_m graph."""
    edges = []
    for u in range(2):
        for w in range(m):
            for k in range(12):
                for z in range(m - 1):
                    a = (u, w, k, z)
                    # external: consecutive segments on the same track
                    if z + 1 < m - 1:
                        edges.append((a, (u, w, k, z + 1)))
                    # odd: the paired qubit on the neighbouring track
                    if k % 2 == 0:
                        edges.append((a, (u, w, k + 1, z)))
    # internal: crossings between perpendicular segments
    for w in range(m):
        for k in range(12):
            x = 12 * w + k
            for z in range(m - 1):
                y0 = 12 * z + _SHIFTS[0][k]
                for y in range(y0, y0 + 12):
                    w2, k2 = divmod(y, 12)
                    if not 0 <= w2 < m:
                        continue
                    off = _SHIFTS[1][k2]
                    z2, rem = divmod(x - off, 12)
                    if rem < 0:  # x < off
                        continue
                    if 0 <= z2 < m - 1:
                        edges.append(((0, w, k, z), (1, w2, k2, z2)))
    return edges


def build_pegasus(m: int, trimmed: bool = True) -> Topology:
    """Pegasus graph P_m in the (u, w, k, z) coordinate construction.

    The untrimmed graph has 24*m*(m-1) nodes.  The trimmed variant drops
    boundary qubits that have no internal (crossing) couplers, leaving
    8*(3m-1)*(m-1) nodes, which for m=16 is the 5640-qubit fabric.
    """
    if m < 2:
        raise InvalidArgumentError(f"Pegasus m must be >= 2, got {m}")
    coords = _pegasus_coords(m)
    raw_edges = _pegasus_edges(m)
    if trimmed:
        internal_deg: dict = {}
        for a, b in raw_edges:
            if a[0] != b[0]:
                internal_deg[a] = internal_deg.get(a, 0) + 1
                internal_deg[b] = internal_deg.get(b, 0) + 1
        coords = [c for c in coords if internal_deg.get(c, 0) > 0]
        keep = set(coords)
        raw_edges = [(a, b) for a, b in raw_edges if a in keep and b in keep]
    index = {c: i for i, c in enumerate(coords)}
    edges = sorted(
        (min(index[a], index[b]), max(index[a], index[b]), 1.0)
        for a, b in raw_edges)
    return Topology(n=len(coords), edges=tuple(edges), kind=TopologyKind.PEGASUS)


def build_random_regular(n: int, degree: int, seed: int) -> Topology:
    """Random regular graph with unit weights (dense-connectivity stand-in)."""
    import networkx as nx

    if n < 1 or degree < 0 or degree >= n or (n * degree) % 2 != 0:
        raise InvalidArgumentError(
            f"no {degree}-regular graph on {n} nodes")
    g = nx.random_regular_graph(degree, n, seed=seed)
    edges = tuple(sorted((min(i, j), max(i, j), 1.0) for i, j in g.edges()))
    return Topology(n=n, edges=edges, kind=TopologyKind.CUSTOM, seed=seed)


def sample_patch(parent: Topology, target_n: int, seed: int) -> Topology:
    """Connected induced subgraph grown breadth-first from a seeded start.

    All parent edges among the selected nodes are retained.  Determinism:
    the start node comes from the seed, BFS expands in queue order with
    neighbours visited in ascending index order.
    """
    if target_n < 1:
        raise InvalidArgumentError(f"target_n must be >= 1, got {target_n}")
    if target_n > parent.n:
        raise InvalidArgumentError(
            f"target_n={target_n} exceeds parent size {parent.n}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    order = rng.permutation(parent.n)
    tried: set[int] = set()
    selected: list[int] | None = None
    for start in order:
        if start in tried:
            continue
        visited = {int(start)}
        queue = [int(start)]
        head = 0
        while head < len(queue) and len(visited) < target_n:
            node = queue[head]
            head += 1
            for nb in sorted(int(v) for v in parent.neighbors(node)):
                if nb not in visited:
                    visited.add(nb)
                    queue.append(nb)
                    if len(visited) == target_n:
                        break
        if len(visited) >= target_n:
            selected = sorted(visited)
            break
        tried |= visited  # whole component exhausted, too small
    if selected is None:
        raise InfeasibleError(
            f"no connected component with >= {target_n} nodes")
    local = {p: i for i, p in enumerate(selected)}
    keep = set(selected)
    edges = tuple(sorted(
        (local[i], local[j], w)
        for i, j, w in parent.edges if i in keep and j in keep))
    return Topology(
        n=target_n, edges=edges, kind=TopologyKind.PEGASUS_PATCH, seed=seed,
        parent_nodes=tuple(selected))


def remove_random_nodes(parent: Topology, n_remove: int, seed: int,
                        kind: TopologyKind = TopologyKind.CUSTOM) -> Topology:
    """Seeded deletion of nodes (stand-in for a hardware working graph
    whose dead-qubit layout is unpublished)."""
    if not 0 <= n_remove < parent.n:
        raise InvalidArgumentError(f"cannot remove {n_remove} of {parent.n} nodes")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    dead = set(int(v) for v in rng.choice(parent.n, size=n_remove, replace=False))
    kept = [i for i in range(parent.n) if i not in dead]
    local = {p: i for i, p in enumerate(kept)}
    edges = tuple(sorted(
        (local[i], local[j], w)
        for i, j, w in parent.edges if i not in dead and j not in dead))
    return Topology(n=len(kept), edges=edges, kind=kind, seed=seed,
                    parent_nodes=tuple(kept))


def write_edge_list(t: Topology, path) -> None:
    """One edge per line `i j weight` after a `# nodes=...` header."""
    with open(path, "w") as fh:
        fh.write(f"# nodes={t.n} kind={t.kind.value} seed={t.seed}\n")
        for i, j, w in t.edges:
            fh.write(f"{i} {j} {w!r}\n")


def read_edge_list(path) -> Topology:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# nodes="):
            raise InvalidArgumentError(f"bad edge-list header: {header!r}")
        fields = dict(part.split("=", 1) for part in header[2:].split())
        n = int(fields["nodes"])
        kind = TopologyKind(fields["kind"])
        seed = int(fields["seed"])
        edges = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            i, j, w = line.split()
            edges.append((int(i), int(j), float(w)))
    return Topology(n=n, edges=tuple(edges), kind=kind, seed=seed)
