"""Finite scattering graphs with rail-attachment (boundary) vertices.

A scattering center is a finite graph whose vertex set splits into N
boundary vertices (labelled 1..N, one semi-infinite rail attached to each)
and M internal vertices (labelled N+1..N+M).  The adjacency matrix is kept
in block form::

    [[A, B^T],
     [B, D ]]

with A the boundary-boundary block (N x N), B internal-boundary (M x N)
and D internal-internal (M x M).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class GraphError(ValueError):
    """Invalid graph construction input."""


class ChainCondition(enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    EDGE_BETWEEN_BOUNDARY = "edge_between_boundary"


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable scattering graph in boundary/internal block form.

    Instances hash by identity so downstream solvers can cache
    factorizations keyed by the graph object.
    """

    name: str
    n_boundary: int
    n_internal: int
    block_a: np.ndarray
    block_b: np.ndarray
    block_d: np.ndarray
    edges: tuple = field(default=(), repr=False)

    def __post_init__(self):
        n, m = self.n_boundary, self.n_internal
        a, b, d = self.block_a, self.block_b, self.block_d
        if a.shape != (n, n) or b.shape != (m, n) or d.shape != (m, m):
            raise GraphError("block shapes inconsistent with (N, M)")
        for blk in (a, d):
            if not np.array_equal(blk, blk.T):
                raise GraphError("A and D must be symmetric")
            if np.any(np.diag(blk) != 0):
                raise GraphError("self-loops are not allowed")
        for blk in (a, b, d):
            if not np.all((blk == 0) | (blk == 1)):
                raise GraphError("adjacency entries must be 0 or 1")
            blk.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return self.n_boundary + self.n_internal

    @property
    def h_g(self) -> np.ndarray:
        """Full adjacency matrix [[A, B^T], [B, D]] (float)."""
        n, m = self.n_boundary, self.n_internal
        h = np.zeros((n + m, n + m))
        h[:n, :n] = self.block_a
        h[:n, n:] = self.block_b.T
        h[n:, :n] = self.block_b
        h[n:, n:] = self.block_d
        return h

    @property
    def p_m_diag(self) -> np.ndarray:
        """Diagonal of the projector onto internal vertices."""
        return np.concatenate(
            [np.zeros(self.n_boundary), np.ones(self.n_internal)]
        )

    def __str__(self):
        return f"{self.name}(N={self.n_boundary}, M={self.n_internal})"


def build_graph(edge_list, boundary, name="graph") -> Graph:
    """Build a Graph from an edge list and an ordered boundary vertex list.

    Vertices are relabelled so boundary vertices come first in the given
    order, internal vertices follow in ascending label order.
    """
    boundary = list(boundary)
    if len(set(boundary)) != len(boundary):
        raise GraphError("boundary vertices must be distinct")
    vertices = set(boundary)
    seen = set()
    for u, v in edge_list:
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        vertices.update(key)
    internal = sorted(vertices - set(boundary))
    order = boundary + internal
    index = {v: i for i, v in enumerate(order)}
    n, m = len(boundary), len(internal)
    h = np.zeros((n + m, n + m), dtype=int)
    for u, v in seen:
        h[index[u], index[v]] = 1
        h[index[v], index[u]] = 1
    return Graph(
        name=name,
        n_boundary=n,
        n_internal=m,
        block_a=h[:n, :n],
        block_b=h[n:, :n],
        block_d=h[n:, n:],
        edges=tuple(sorted(seen)),
    )


class Family(enum.Enum):
    LINE = "Line"
    AL = "AL"
    AC = "AC"
    AC2 = "AC2"
    CYCLE = "C"


@dataclass(frozen=True)
class FamilySpec:
    family: Family
    n: int
    l: int | None = None

    def __post_init__(self):
        fam, n = self.family, self.n
        if fam is Family.LINE and n < 0:
            raise GraphError("Line(N) requires N >= 0")
        if fam is Family.AL and n < 2:
            raise GraphError("AL(N) requires N >= 2")
        if fam in (Family.AC, Family.AC2) and n < 3:
            raise GraphError(f"{fam.value}(N) requires N >= 3")
        if fam is Family.CYCLE:
            if self.l is None:
                raise GraphError("C(N,L) requires L")
            if not 2 <= self.l <= n // 2:
                raise GraphError("C(N,L) requires 2 <= L <= floor(N/2)")

    @property
    def label(self) -> str:
        if self.family is Family.CYCLE:
            return f"C({self.n},{self.l})"
        return f"{self.family.value}({self.n})"


def make_family(spec: FamilySpec) -> Graph:
    """Construct one of the named graph families.

    Line(N): boundary pair joined by a path of N internal vertices.
    AL(N):   both boundary vertices attach to the head of a pendant
             path of N internal vertices.
    AC(N):   both boundary vertices attach to one vertex of an internal
             N-cycle.
    AC2(N):  both boundary vertices attach to a hub vertex which hangs
             off an internal N-cycle (N+1 internal vertices).
    C(N,L):  N-cycle with the two boundary vertices on the cycle at
             shortest-path distance L.
    """
    fam, n = spec.family, spec.n
    edges = []
    if fam is Family.LINE:
        chain = [1] + list(range(3, n + 3)) + [2]
        edges = list(zip(chain[:-1], chain[1:]))
        if n == 0:
            edges = [(1, 2)]
    elif fam is Family.AL:
        edges = [(1, 3), (2, 3)]
        edges += [(k, k + 1) for k in range(3, n + 2)]
    elif fam is Family.AC:
        cyc = list(range(3, n + 3))
        edges = [(1, 3), (2, 3)]
        edges += list(zip(cyc[:-1], cyc[1:])) + [(cyc[-1], cyc[0])]
    elif fam is Family.AC2:
        cyc = list(range(4, n + 4))
        edges = [(1, 3), (2, 3), (3, 4)]
        edges += list(zip(cyc[:-1], cyc[1:])) + [(cyc[-1], cyc[0])]
    elif fam is Family.CYCLE:
        l = spec.l
        side_a = list(range(3, l + 2))            # L-1 vertices
        side_b = list(range(l + 2, n + 1))        # N-L-1 vertices
        path_a = [1] + side_a + [2]
        path_b = [1] + side_b + [2]
        edges = list(zip(path_a[:-1], path_a[1:]))
        edges += list(zip(path_b[:-1], path_b[1:]))
    return build_graph(edges, [1, 2], name=spec.label)


def family_from_string(text: str) -> FamilySpec:
    """Parse family strings like ``AC:4``, ``C:10:5`` or ``Line:7``."""
    parts = text.split(":")
    try:
        fam = Family(parts[0])
    except ValueError:
        raise GraphError(f"unknown family {parts[0]!r}") from None
    if fam is Family.CYCLE:
        if len(parts) != 3:
            raise GraphError("cycle spec must be C:<N>:<L>")
        return FamilySpec(fam, int(parts[1]), int(parts[2]))
    if len(parts) != 2:
        raise GraphError(f"family spec must be {fam.value}:<N>")
    return FamilySpec(fam, int(parts[1]))


def chain_condition(g: Graph):
    """Evaluate (d1 - 1)(d2 - 1) - p12^2 for a two-rail graph.

    d1, d2 are the inner degrees of the boundary vertices and p12 the
    number of length-2 paths between them.  Returns a (ChainCondition,
    value) pair; the value is meaningless for EDGE_BETWEEN_BOUNDARY.
    """
    if g.n_boundary != 2:
        raise GraphError("chain condition is defined for exactly 2 boundary vertices")
    if g.block_a[0, 1] != 0:
        return ChainCondition.EDGE_BETWEEN_BOUNDARY, 0
    deg = g.block_a.sum(axis=0) + g.block_b.sum(axis=0)
    h2 = g.block_a @ g.block_a + g.block_b.T @ g.block_b
    p12 = int(h2[0, 1])
    value = int((deg[0] - 1) * (deg[1] - 1) - p12 * p12)
    status = ChainCondition.HOLDS if value != 0 else ChainCondition.FAILS
    return status, value


def write_graph_file(g: Graph, path):
    """Write the plain-text graph format (header, edges, boundary line)."""
    n, m = g.n_boundary, g.n_internal
    h = g.h_g
    lines = [f"graph {g.name} {n} {m}"]
    for u in range(n + m):
        for v in range(u + 1, n + m):
            if h[u, v]:
                lines.append(f"{u + 1} {v + 1}")
    lines.append("boundary: " + " ".join(str(i + 1) for i in range(n)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_graph_file(path) -> Graph:
    """Parse the plain-text graph format; rejects trailing garbage."""
    with open(path) as fh:
        raw = [ln.strip() for ln in fh]
    lines = [ln for ln in raw if ln]
    if not lines or not lines[0].startswith("graph "):
        raise GraphError("missing 'graph <name> <N> <M>' header")
    head = lines[0].split()
    if len(head) != 4:
        raise GraphError("malformed header")
    name, n, m = head[1], int(head[2]), int(head[3])
    if not lines[-1].startswith("boundary:"):
        raise GraphError("missing boundary line")
    boundary = [int(tok) for tok in lines[-1].split()[1:]]
    if len(boundary) != n:
        raise GraphError("boundary line does not list N vertices")
    edges = []
    for ln in lines[1:-1]:
        toks = ln.split()
        if len(toks) != 2:
            raise GraphError(f"trailing garbage in graph file: {ln!r}")
        edges.append((int(toks[0]), int(toks[1])))
    g = build_graph(edges, boundary, name=name)
    if g.n_internal != m:
        raise GraphError(f"header claims M={m} but edges imply M={g.n_internal}")
    return g
