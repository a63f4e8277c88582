"""Core graph types and algorithms.

Provides directed acyclic graphs (:class:`Dag`), partially directed
patterns (:class:`Pattern`), d-separation, CPDAG construction,
orientation propagation, and Markov-equivalence-class enumeration.

All types are immutable by convention after construction; operations
return new objects and are safe to call concurrently.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ConfigError, DataError, GraphSizeError, OrientationConflictError

MEC_NODE_LIMIT = 12


class EdgeKind(Enum):
    ABSENT = "absent"
    UNDIRECTED = "undirected"
    DIRECTED_IJ = "directed_ij"  # i -> j for the queried order (i, j)
    DIRECTED_JI = "directed_ji"

    def mirrored(self) -> "EdgeKind":
        if self is EdgeKind.DIRECTED_IJ:
            return EdgeKind.DIRECTED_JI
        if self is EdgeKind.DIRECTED_JI:
            return EdgeKind.DIRECTED_IJ
        return self


def is_acyclic(adj) -> bool:
    """True iff the boolean adjacency matrix admits a topological order.

    Raises DataError for non-square input or self-loops.
    """
    a = np.asarray(adj, dtype=bool)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DataError("adjacency must be a square matrix")
    if a.diagonal().any():
        raise DataError("self-loops are not allowed")
    n = a.shape[0]
    indeg = a.sum(axis=0).astype(int)
    queue = deque(i for i in range(n) if indeg[i] == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen += 1
        for w in np.flatnonzero(a[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(int(w))
    return seen == n


class Dag:
    """Directed acyclic graph over nodes 0..n-1.

    adj[i, j] is True iff the edge i -> j exists. Construction rejects
    cyclic or malformed adjacency.
    """

    def __init__(self, adj):
        a = np.array(adj, dtype=bool)
        if not is_acyclic(a):
            raise DataError("adjacency contains a directed cycle")
        a.setflags(write=False)
        self.adj = a
        self.n = a.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges) -> "Dag":
        a = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            a[i, j] = True
        return cls(a)

    def edges(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adj))]

    def edge_count(self) -> int:
        return int(self.adj.sum())

    def parents(self, j: int) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.adj[:, j])]

    def children(self, i: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.adj[i])]

    def max_degree(self) -> int:
        deg = self.adj.sum(axis=0) + self.adj.sum(axis=1)
        return int(deg.max()) if self.n else 0

    def skeleton(self) -> np.ndarray:
        return self.adj | self.adj.T

    def __eq__(self, other):
        return isinstance(other, Dag) and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash(self.adj.tobytes())

    def __repr__(self):
        return f"Dag(n={self.n}, edges={self.edges()})"


def topological_order(g: Dag) -> list[int]:
    """Topological order of g, ties broken by ascending node index."""
    indeg = g.adj.sum(axis=0).astype(int)
    ready = sorted(i for i in range(g.n) if indeg[i] == 0)
    order = []
    import heapq

    heapq.heapify(ready)
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in g.children(v):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    return order


def _ancestors_of(g: Dag, nodes) -> set[int]:
    """nodes plus all their ancestors."""
    out = set(int(v) for v in nodes)
    stack = list(out)
    while stack:
        v = stack.pop()
        for p in g.parents(v):
            if p not in out:
                out.add(p)
                stack.append(p)
    return out


def d_separated(g: Dag, i: int, j: int, s) -> bool:
    """True iff i and j are d-separated given s in g.

    Uses the ancestral moral graph criterion: restrict to ancestors of
    {i, j} | s, moralize, drop s, and test connectivity.
    """
    s = set(int(v) for v in s)
    for v in (i, j, *s):
        if not (0 <= v < g.n):
            raise ConfigError(f"node index {v} out of range")
    if i == j or i in s or j in s:
        raise ConfigError("i, j must be distinct and not in s")
    keep = _ancestors_of(g, {i, j} | s)
    # moralized undirected adjacency on the ancestral subgraph
    und = {v: set() for v in keep}
    for v in keep:
        for p in g.parents(v):
            if p in keep:
                und[v].add(p)
                und[p].add(v)
        ps = [p for p in g.parents(v) if p in keep]
        for a, b in itertools.combinations(ps, 2):
            und[a].add(b)
            und[b].add(a)
    # BFS from i to j avoiding s
    seen = {i}
    queue = deque([i])
    while queue:
        v = queue.popleft()
        for w in und[v]:
            if w in s or w in seen:
                continue
            if w == j:
                return False
            seen.add(w)
            queue.append(w)
    return True


class Pattern:
    """Partially directed graph with one mark per unordered pair.

    Internal encoding: int8 matrix m where m[i, j] == 1 means there is
    an edge mark from i towards j. Directed i->j is (1, 0), undirected
    is (1, 1), absent is (0, 0).
    """

    def __init__(self, n: int, m: np.ndarray | None = None):
        self.n = n
        if m is None:
            m = np.zeros((n, n), dtype=np.int8)
        self._m = m

    @classmethod
    def complete(cls, n: int) -> "Pattern":
        m = np.ones((n, n), dtype=np.int8)
        np.fill_diagonal(m, 0)
        return cls(n, m)

    @classmethod
    def from_dag(cls, g: Dag) -> "Pattern":
        return cls(g.n, g.adj.astype(np.int8))

    def copy(self) -> "Pattern":
        return Pattern(self.n, self._m.copy())

    def mark(self, i: int, j: int) -> EdgeKind:
        a, b = self._m[i, j], self._m[j, i]
        if a and b:
            return EdgeKind.UNDIRECTED
        if a:
            return EdgeKind.DIRECTED_IJ
        if b:
            return EdgeKind.DIRECTED_JI
        return EdgeKind.ABSENT

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self._m[i, j] or self._m[j, i])

    def is_directed(self, i: int, j: int) -> bool:
        """True iff the edge is directed i -> j."""
        return bool(self._m[i, j] and not self._m[j, i])

    def is_undirected(self, i: int, j: int) -> bool:
        return bool(self._m[i, j] and self._m[j, i])

    def set_undirected(self, i: int, j: int) -> None:
        self._m[i, j] = self._m[j, i] = 1

    def set_directed(self, i: int, j: int) -> None:
        self._m[i, j], self._m[j, i] = 1, 0

    def remove(self, i: int, j: int) -> None:
        self._m[i, j] = self._m[j, i] = 0

    def orient(self, i: int, j: int) -> None:
        """Direct an existing edge i -> j; conflicting marks raise."""
        if self.is_directed(j, i):
            raise OrientationConflictError(i, j)
        self.set_directed(i, j)

    def neighbors(self, i: int) -> list[int]:
        row = self._m[i] | self._m[:, i]
        return [int(j) for j in np.flatnonzero(row)]

    def pairs(self):
        """All unordered pairs with an edge, lexicographic."""
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if self.has_edge(i, j):
                    yield i, j

    def skeleton(self) -> np.ndarray:
        return (self._m | self._m.T).astype(bool)

    def directed_edges(self) -> list[tuple[int, int]]:
        out = []
        for i in range(self.n):
            for j in range(self.n):
                if i != j and self.is_directed(i, j):
                    out.append((i, j))
        return out

    def edge_count(self) -> int:
        return int(self.skeleton().sum()) // 2

    def v_structures(self) -> list[tuple[int, int, int]]:
        """Unshielded colliders (i, j, k), i < k, marked i -> j <- k."""
        out = []
        for j in range(self.n):
            into = [i for i in range(self.n) if i != j and self.is_directed(i, j)]
            for i, k in itertools.combinations(into, 2):
                if not self.has_edge(i, k):
                    out.append((i, j, k))
        return out

    def mark_matrix(self) -> np.ndarray:
        return self._m.copy()

    def __eq__(self, other):
        return isinstance(other, Pattern) and np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self):
        marks = []
        for i, j in self.pairs():
            k = self.mark(i, j)
            sym = {"undirected": "--", "directed_ij": "->", "directed_ji": "<-"}[k.value]
            marks.append(f"{i}{sym}{j}")
        return f"Pattern(n={self.n}, {', '.join(marks)})"


@dataclass
class SepSetMap:
    """Separating sets recorded during skeleton search.

    Keys are unordered pairs removed from the skeleton; values never
    contain either endpoint.
    """

    sets: dict[frozenset, frozenset] = field(default_factory=dict)

    def record(self, i: int, j: int, s) -> None:
        key = frozenset((i, j))
        if key not in self.sets:
            self.sets[key] = frozenset(s)

    def get(self, i: int, j: int):
        return self.sets.get(frozenset((i, j)))

    def __contains__(self, pair):
        return frozenset(pair) in self.sets

    def __len__(self):
        return len(self.sets)


def _has_directed_path(p: Pattern, i: int, j: int) -> bool:
    """True iff a fully directed path i ~> j exists in p."""
    seen = {i}
    queue = deque([i])
    while queue:
        v = queue.popleft()
        for w in range(p.n):
            if w == v or w in seen:
                continue
            if p.is_directed(v, w):
                if w == j:
                    return True
                seen.add(w)
                queue.append(w)
    return False


def _apply_rules_once(p: Pattern, variant: str) -> bool:
    changed = False
    for x in range(p.n):
        for y in range(p.n):
            if x == y or not p.is_undirected(x, y):
                continue
            # R1: z -> x, z and y non-adjacent  =>  x -> y
            fired = any(
                p.is_directed(z, x) and not p.has_edge(z, y)
                for z in range(p.n)
                if z not in (x, y)
            )
            if not fired and variant == "meek4":
                # R2: x -> z -> y  =>  x -> y
                fired = any(
                    p.is_directed(x, z) and p.is_directed(z, y)
                    for z in range(p.n)
                    if z not in (x, y)
                )
                if not fired:
                    # R3: x -- z, x -- w, z -> y, w -> y, z,w non-adjacent
                    cands = [
                        z
                        for z in range(p.n)
                        if z not in (x, y)
                        and p.is_undirected(x, z)
                        and p.is_directed(z, y)
                    ]
                    fired = any(
                        not p.has_edge(z, w)
                        for z, w in itertools.combinations(cands, 2)
                    )
                if not fired:
                    # R4: x adjacent z, z -> w, w -> y, z,y non-adjacent
                    fired = any(
                        p.has_edge(x, z)
                        and p.is_directed(z, w)
                        and p.is_directed(w, y)
                        and not p.has_edge(z, y)
                        for z in range(p.n)
                        for w in range(p.n)
                        if len({x, y, z, w}) == 4
                    )
            elif not fired and variant == "paper2":
                # directed path x ~> y plus undirected (x, y)  =>  x -> y
                fired = _has_directed_path(p, x, y)
            if fired:
                p.orient(x, y)
                changed = True
    return changed


def meek_closure(p: Pattern, variant: str = "meek4") -> Pattern:
    """Fixed point of orientation-propagation rules.

    variant "meek4" applies the four standard Meek rules; "paper2"
    applies only the two-rule variant (R1 plus the directed-path rule).
    Never un-orients an edge; idempotent.
    """
    if variant not in ("meek4", "paper2"):
        raise ConfigError(f"unknown propagation variant: {variant!r}")
    out = p.copy()
    while _apply_rules_once(out, variant):
        pass
    return out


def cpdag_of(g: Dag, variant: str = "meek4") -> Pattern:
    """CPDAG of g: skeleton, v-structures, then propagation closure."""
    p = Pattern(g.n)
    for i, j in g.edges():
        p.set_undirected(i, j)
    for i, j, k in Pattern.from_dag(g).v_structures():
        p.set_directed(i, j)
        p.set_directed(k, j)
    return meek_closure(p, variant)


def enumerate_mec(p: Pattern, limit: int = 1_000_000) -> list[Dag]:
    """All consistent DAG extensions of p, up to limit, deterministic order.

    A consistent extension keeps p's skeleton and directed edges and has
    exactly the v-structures implied by p's directed marks.
    """
    if p.n > MEC_NODE_LIMIT:
        raise GraphSizeError(f"enumeration limited to n <= {MEC_NODE_LIMIT}")
    if limit <= 0:
        raise ConfigError("limit must be positive")
    target_v = set(p.v_structures())
    und = [(i, j) for i, j in p.pairs() if p.is_undirected(i, j)]
    base = np.zeros((p.n, p.n), dtype=bool)
    for i, j in p.directed_edges():
        base[i, j] = True
    out: list[Dag] = []
    for bits in range(1 << len(und)):
        a = base.copy()
        for b, (i, j) in enumerate(und):
            if bits >> b & 1:
                a[j, i] = True
            else:
                a[i, j] = True
        if not is_acyclic(a):
            continue
        d = Dag(a)
        if set(Pattern.from_dag(d).v_structures()) != target_v:
            continue
        out.append(d)
        if len(out) >= limit:
            break
    return out


# --- edge-list text serialization ---

_MARK_TO_SYM = {
    EdgeKind.DIRECTED_IJ: "->",
    EdgeKind.DIRECTED_JI: "<-",
    EdgeKind.UNDIRECTED: "--",
    EdgeKind.ABSENT: ".",
}
_SYM_TO_MARK = {v: k for k, v in _MARK_TO_SYM.items()}


def to_text(g) -> str:
    """Serialize a Dag or Pattern to the edge-list text format."""
    if isinstance(g, Dag):
        lines = [f"dag n={g.n}"]
        lines += [f"{i} {j} ->" for i, j in g.edges()]
    elif isinstance(g, Pattern):
        lines = [f"pattern n={g.n}"]
        for i, j in g.pairs():
            lines.append(f"{i} {j} {_MARK_TO_SYM[g.mark(i, j)]}")
    else:
        raise ConfigError(f"cannot serialize {type(g).__name__}")
    return "\n".join(lines) + "\n"


def from_text(text: str):
    """Parse the edge-list text format into a Dag or Pattern."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataError("empty graph file")
    head = lines[0].split()
    if len(head) != 2 or not head[1].startswith("n="):
        raise DataError(f"bad graph header: {lines[0]!r}")
    kind, n = head[0], int(head[1][2:])
    marks = []
    for ln in lines[1:]:
        i, j, sym = ln.split()
        if sym not in _SYM_TO_MARK:
            raise DataError(f"bad edge mark: {sym!r}")
        marks.append((int(i), int(j), _SYM_TO_MARK[sym]))
    if kind == "dag":
        adj = np.zeros((n, n), dtype=bool)
        for i, j, mk in marks:
            if mk is not EdgeKind.DIRECTED_IJ:
                raise DataError("dag files may only contain '->' marks")
            adj[i, j] = True
        return Dag(adj)
    if kind == "pattern":
        p = Pattern(n)
        for i, j, mk in marks:
            if mk is EdgeKind.UNDIRECTED:
                p.set_undirected(i, j)
            elif mk is EdgeKind.DIRECTED_IJ:
                p.set_directed(i, j)
            elif mk is EdgeKind.DIRECTED_JI:
                p.set_directed(j, i)
        return p
    raise DataError(f"unknown graph kind: {kind!r}")
