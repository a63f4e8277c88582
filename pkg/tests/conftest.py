import itertools

import numpy as np
import pytest

from sea.graph import Dag


@pytest.fixture
def y_graph():
    """X -> Z <- Y, Z -> W with X=0, Y=1, Z=2, W=3."""
    return Dag.from_edges(4, [(0, 2), (1, 2), (2, 3)])


def random_dag_max_degree(n: int, rng, max_degree: int = 3, p: float = 0.35) -> Dag:
    """Rejection-sample an ER DAG whose total degree stays bounded."""
    while True:
        adj = np.zeros((n, n), dtype=bool)
        order = rng.permutation(n)
        for a in range(n):
            for b in range(a + 1, n):
                if rng.random() < p:
                    adj[order[a], order[b]] = True
        g = Dag(adj)
        if g.max_degree() <= max_degree:
            return g


def all_undirected_paths(g: Dag, i: int, j: int):
    """Every simple path between i and j ignoring edge direction."""
    sk = g.skeleton()

    def extend(path):
        last = path[-1]
        if last == j:
            yield list(path)
            return
        for nxt in range(g.n):
            if sk[last, nxt] and nxt not in path:
                yield from extend(path + [nxt])

    yield from extend([i])


def path_blocked(g: Dag, path, s: set) -> bool:
    """Classic per-path blocking: chains/forks blocked by membership,
    colliders blocked unless the collider or a descendant is in s."""
    desc_cache = {}

    def descendants(v):
        if v not in desc_cache:
            out, stack = set(), [v]
            while stack:
                u = stack.pop()
                for c in g.children(u):
                    if c not in out:
                        out.add(c)
                        stack.append(c)
            desc_cache[v] = out
        return desc_cache[v]

    for pos in range(1, len(path) - 1):
        a, b, c = path[pos - 1], path[pos], path[pos + 1]
        collider = g.adj[a, b] and g.adj[c, b]
        if collider:
            if b not in s and not (descendants(b) & s):
                return True
        else:
            if b in s:
                return True
    return False


def d_separated_bruteforce(g: Dag, i: int, j: int, s) -> bool:
    """Independent oracle: enumerate all paths and check blocking."""
    s = set(s)
    return all(path_blocked(g, p, s) for p in all_undirected_paths(g, i, j))


def all_dags(n: int):
    """Every DAG on n nodes (exponential; keep n <= 3)."""
    pairs = list(itertools.combinations(range(n), 2))
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        adj = np.zeros((n, n), dtype=bool)
        for (i, j), st in zip(pairs, states):
            if st == 1:
                adj[i, j] = True
            elif st == 2:
                adj[j, i] = True
        from sea.graph import is_acyclic

        if is_acyclic(adj):
            yield Dag(adj)
