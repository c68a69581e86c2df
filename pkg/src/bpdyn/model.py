"""Basis pursuit instances ``min ||x||_1 s.t. A x = b``.

Instances come from explicit matrices, seeded random generators, or
undirected graphs through the signed incidence matrix (shortest s-t path
as an l1 problem).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DisconnectedInstance, FormatError, NonFiniteInput, RankDeficient


@dataclass(frozen=True, eq=False)
class GraphSpec:
    vertex_count: int
    edges: tuple
    source: int
    sink: int

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(t), int(h)) for t, h in self.edges))
        V = self.vertex_count
        if self.source == self.sink:
            raise ValueError("source and sink must differ")
        for v in (self.source, self.sink):
            if not 0 <= v < V:
                raise ValueError(f"vertex {v} out of range 0..{V - 1}")
        for t, h in self.edges:
            if t == h:
                raise ValueError(f"self-loop at vertex {t}")
            if not (0 <= t < V and 0 <= h < V):
                raise ValueError(f"edge ({t}, {h}) out of range")

    def adjacency(self):
        adj = [[] for _ in range(self.vertex_count)]
        for t, h in self.edges:
            adj[t].append(h)
            adj[h].append(t)
        return adj

    def components(self):
        """Component label per vertex (labels ordered by first vertex)."""
        label = [-1] * self.vertex_count
        adj = self.adjacency()
        c = 0
        for s in range(self.vertex_count):
            if label[s] >= 0:
                continue
            label[s] = c
            todo = [s]
            while todo:
                u = todo.pop()
                for v in adj[u]:
                    if label[v] < 0:
                        label[v] = c
                        todo.append(v)
            c += 1
        return label

    def edge_labels(self):
        seen = {}
        out = []
        for t, h in self.edges:
            name = f"u{t}-u{h}"
            dup = seen.get(name, 0)
            seen[name] = dup + 1
            out.append(name if dup == 0 else f"{name}.{dup}")
        return tuple(out)


@dataclass(frozen=True, eq=False)
class Instance:
    """The pair ``(A, b)``; ``A`` must have full row rank."""

    A: np.ndarray
    b: np.ndarray
    provenance: str = "explicit"
    column_names: tuple | None = None
    graph: GraphSpec | None = field(default=None, repr=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float, ndmin=2)
        b = np.array(self.b, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise NonFiniteInput("instance contains NaN or Inf")
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"b has length {b.shape[0]}, A has {A.shape[0]} rows")
        if np.linalg.matrix_rank(A) < A.shape[0]:
            raise RankDeficient(f"A ({A.shape[0]}x{A.shape[1]}) does not have full row rank")
        if self.column_names is not None:
            names = tuple(self.column_names)
            if len(names) != A.shape[1]:
                raise ValueError("column_names must have one label per column")
            object.__setattr__(self, "column_names", names)
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def is_integer(self):
        return bool(np.all(self.A == np.round(self.A)))

    def column(self, name):
        if self.column_names is None:
            raise KeyError(name)
        return self.column_names.index(name)

    def least_squares_point(self):
        """Minimum Euclidean-norm solution of ``A x = b``."""
        return self.A.T @ np.linalg.solve(self.A @ self.A.T, self.b)


def incidence_matrix(g):
    """Signed V x E incidence matrix: -1 at the tail, +1 at the head."""
    M = np.zeros((g.vertex_count, len(g.edges)))
    for j, (t, h) in enumerate(g.edges):
        M[t, j] -= 1.0
        M[h, j] += 1.0
    return M


def reachable(g, s, t):
    adj = g.adjacency()
    seen = {s}
    todo = deque([s])
    while todo:
        u = todo.popleft()
        if u == t:
            return True
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return False


def build_graph_instance(g):
    """Shortest s-t path as basis pursuit on the incidence matrix of ``g``.

    ``b = e_t - e_s``.  One row per connected component is removed to restore
    full row rank: the row of the highest-index vertex of that component (for
    a connected graph, simply the last row).
    """
    if not reachable(g, g.source, g.sink):
        raise DisconnectedInstance(f"no path from u{g.source} to u{g.sink}")
    M = incidence_matrix(g)
    b = np.zeros(g.vertex_count)
    b[g.sink] += 1.0
    b[g.source] -= 1.0
    label = g.components()
    drop = {max(v for v in range(g.vertex_count) if label[v] == c) for c in set(label)}
    rows = [v for v in range(g.vertex_count) if v not in drop]
    return Instance(
        M[rows],
        b[rows],
        provenance=f"graph(V={g.vertex_count}, E={len(g.edges)}, s={g.source}, t={g.sink})",
        column_names=g.edge_labels(),
        graph=g,
    )


APPENDIX_A_EDGES = ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (0, 4), (3, 7))

# the start on which IRLS stalls, exact; every entry agrees with the edge orientation
APPENDIX_A_START = {
    "u0-u1": Fraction(3, 4),
    "u1-u2": Fraction(3, 4),
    "u2-u3": Fraction(3, 4),
    "u3-u4": Fraction(1, 2),
    "u4-u5": Fraction(3, 4),
    "u5-u6": Fraction(3, 4),
    "u6-u7": Fraction(3, 4),
    "u0-u4": Fraction(1, 4),
    "u3-u7": Fraction(1, 4),
}


def appendix_a_graph():
    return GraphSpec(8, APPENDIX_A_EDGES, source=0, sink=7)


def appendix_a_state():
    """The eight-vertex counterexample graph and the start on which IRLS stalls.

    Returns ``(instance, y0)`` where ``y0`` is ordered like
    ``instance.column_names``.
    """
    inst = build_graph_instance(appendix_a_graph())
    y0 = np.array([float(APPENDIX_A_START[c]) for c in inst.column_names])
    return inst, y0


def random_instance(m, n, sparsity, seed):
    """Gaussian ``A`` with a planted ``sparsity``-sparse solution.

    Returns ``(instance, planted)`` with ``b = A @ planted``.  Nonzero planted
    values are uniform on ``[-2, -0.5] U [0.5, 2]``.
    """
    if not 0 < sparsity <= m < n:
        raise ValueError("need 0 < sparsity <= m < n")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    planted = _plant(rng, n, sparsity)
    try:
        inst = Instance(A, A @ planted, provenance=f"random_gaussian(seed={seed})")
    except RankDeficient as exc:
        raise RankDeficient(f"seed {seed} gave a rank-deficient matrix; retry") from exc
    return inst, planted


def random_integer_instance(m, n, sparsity, seed, bound=1):
    """Like :func:`random_instance` with entries drawn from ``{-bound..bound}``.

    Draws are repeated (from the same generator) until ``A`` has full row rank,
    no zero column, and ``b != 0``.
    """
    if not 0 < sparsity <= m < n:
        raise ValueError("need 0 < sparsity <= m < n")
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        A = rng.integers(-bound, bound + 1, size=(m, n)).astype(float)
        planted = _plant(rng, n, sparsity)
        b = A @ planted
        if np.any(np.abs(A).sum(axis=0) == 0) or not np.any(b):
            continue
        if np.linalg.matrix_rank(A) < m:
            continue
        return Instance(A, b, provenance=f"random_integer(seed={seed}, bound={bound})"), planted
    raise RankDeficient(f"no usable integer matrix after 1000 draws (seed {seed})")


def _plant(rng, n, sparsity):
    x = np.zeros(n)
    idx = rng.choice(n, size=sparsity, replace=False)
    x[idx] = rng.uniform(0.5, 2.0, size=sparsity) * rng.choice([-1.0, 1.0], size=sparsity)
    return x


# -- text formats -----------------------------------------------------------


def _tokens(path):
    lines = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if text:
            lines.append((lineno, text.split()))
    return lines


def read_instance(path):
    """Parse a ``.bpinst`` file: ``m n``, m rows of A, one row of b."""
    lines = _tokens(path)
    lineno = 1
    try:
        lineno, head = lines[0]
        m, n = (int(t) for t in head)
        if len(lines) != m + 2:
            raise FormatError(f"{path}: expected {m + 2} non-empty lines, got {len(lines)}")
        rows = []
        for lineno, toks in lines[1 : m + 1]:
            if len(toks) != n:
                raise FormatError(f"{path}:{lineno}: expected {n} entries, got {len(toks)}")
            rows.append([float(t) for t in toks])
        lineno, toks = lines[m + 1]
        if len(toks) != m:
            raise FormatError(f"{path}:{lineno}: b needs {m} entries, got {len(toks)}")
        b = [float(t) for t in toks]
    except (IndexError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}:{lineno}: malformed instance file ({exc})") from exc
    return Instance(np.array(rows).reshape(m, n), b, provenance=f"file({Path(path).name})")


def write_instance(inst, path):
    with open(path, "w") as fh:
        fh.write(f"{inst.m} {inst.n}\n")
        for row in inst.A:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        fh.write(" ".join(repr(float(v)) for v in inst.b) + "\n")


def read_graph(path):
    """Parse a ``.bpgraph`` file: ``V E s t`` then E lines ``tail head``."""
    lines = _tokens(path)
    lineno = 1
    try:
        lineno, head = lines[0]
        V, E, s, t = (int(x) for x in head)
        if len(lines) != E + 1:
            raise FormatError(f"{path}: expected {E} edge lines, got {len(lines) - 1}")
        edges = []
        for lineno, toks in lines[1:]:
            if len(toks) != 2:
                raise FormatError(f"{path}:{lineno}: edge line needs 'tail head'")
            edges.append((int(toks[0]), int(toks[1])))
        return GraphSpec(V, tuple(edges), s, t)
    except FormatError:
        raise
    except (IndexError, ValueError) as exc:
        raise FormatError(f"{path}:{lineno}: {exc}") from exc


def write_graph(g, path):
    with open(path, "w") as fh:
        fh.write(f"{g.vertex_count} {len(g.edges)} {g.source} {g.sink}\n")
        for t, h in g.edges:
            fh.write(f"{t} {h}\n")


def load(path):
    """Instance from a ``.bpinst`` or ``.bpgraph`` file (by suffix)."""
    if str(path).endswith(".bpgraph"):
        return build_graph_instance(read_graph(path))
    return read_instance(path)
