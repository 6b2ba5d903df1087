"""Multigraphs stored as identified half-edges.

Layout: paired half-edges occupy ids ``0 .. 2E-1`` and edge ``e`` is the pair
``(2e, 2e + 1)``, so the pairing involution is ``h ^ 1``.  Unpaired half-edges
(only present in serialized mid-run states) follow at ``2E .. H-1``.  Rewiring
moves a half-edge's owner; half-edge and edge ids never change.

Per-vertex half-edge lists are intrusive doubly linked lists
(``head``/``nxt``/``prv``) so that a move is O(1); the numba kernels operate
on copies of the same arrays.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import DegreeDistribution


class GraphError(ValueError):
    pass


class StaleEdgeError(GraphError):
    """Edge handle does not refer to a live edge of this graph."""


def build_lists(n: int, owner: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Intrusive per-vertex lists, half-edges in increasing id order."""
    H = owner.size
    head = np.full(n, -1, dtype=np.int64)
    nxt = np.full(H, -1, dtype=np.int64)
    prv = np.full(H, -1, dtype=np.int64)
    if H == 0:
        return head, nxt, prv
    order = np.argsort(owner, kind="stable")
    own = owner[order]
    same = own[1:] == own[:-1]
    nxt[order[:-1][same]] = order[1:][same]
    prv[order[1:][same]] = order[:-1][same]
    first = np.ones(H, dtype=bool)
    first[1:] = ~same
    head[own[first]] = order[first]
    return head, nxt, prv


@dataclass
class HalfEdgeGraph:
    n: int
    owner: np.ndarray  # half-edge -> vertex
    n_edges: int
    head: np.ndarray = field(repr=False, default=None)
    nxt: np.ndarray = field(repr=False, default=None)
    prv: np.ndarray = field(repr=False, default=None)
    alive: np.ndarray = field(repr=False, default=None)
    rewirings: np.ndarray = field(repr=False, default=None)
    ell: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self.owner = np.ascontiguousarray(self.owner, dtype=np.int64)
        if self.n < 1:
            raise GraphError("graph needs at least one vertex")
        if self.owner.size < 2 * self.n_edges:
            raise GraphError("fewer half-edges than 2 * n_edges")
        if self.owner.size and (self.owner.min() < 0 or self.owner.max() >= self.n):
            raise GraphError("half-edge owner out of range")
        if self.head is None:
            self.head, self.nxt, self.prv = build_lists(self.n, self.owner)
        if self.alive is None:
            self.alive = np.ones(self.n_edges, dtype=bool)
        if self.rewirings is None:
            self.rewirings = np.zeros(self.n_edges, dtype=np.int64)
        if self.ell is None:
            self.ell = np.zeros(self.n_edges, dtype=np.int64)

    # construction -------------------------------------------------------
    @classmethod
    def from_edges(cls, n: int, edges, unpaired_owners=()) -> "HalfEdgeGraph":
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        extra = np.asarray(unpaired_owners, dtype=np.int64).reshape(-1)
        owner = np.concatenate([edges.ravel(), extra])
        return cls(n=n, owner=owner, n_edges=edges.shape[0])

    def copy(self) -> "HalfEdgeGraph":
        return HalfEdgeGraph(
            n=self.n, owner=self.owner.copy(), n_edges=self.n_edges,
            head=self.head.copy(), nxt=self.nxt.copy(), prv=self.prv.copy(),
            alive=self.alive.copy(), rewirings=self.rewirings.copy(), ell=self.ell.copy(),
        )

    # queries ------------------------------------------------------------
    @property
    def n_half_edges(self) -> int:
        return self.owner.size

    def partner(self, h: int) -> int:
        return h ^ 1 if h < 2 * self.n_edges else -1

    def half_edges_of(self, v: int) -> list[int]:
        out = []
        h = self.head[v]
        while h >= 0:
            out.append(int(h))
            h = self.nxt[h]
        return out

    def degree(self, v: int) -> int:
        E = 2 * self.n_edges
        return sum(1 for h in self.half_edges_of(v) if h >= E or self.alive[h >> 1])

    def degrees(self) -> np.ndarray:
        """Half-edges per vertex, counting only live edges and unpaired stubs."""
        keep = np.ones(self.owner.size, dtype=bool)
        dead = np.nonzero(~self.alive)[0]
        keep[2 * dead] = False
        keep[2 * dead + 1] = False
        return np.bincount(self.owner[keep], minlength=self.n)

    def endpoints(self, e: int) -> tuple[int, int]:
        self._check_edge(e)
        return int(self.owner[2 * e]), int(self.owner[2 * e + 1])

    def edge_array(self, live_only: bool = True) -> np.ndarray:
        pairs = self.owner[: 2 * self.n_edges].reshape(-1, 2)
        return pairs[self.alive] if live_only else pairs

    def unpaired_owners(self) -> np.ndarray:
        return self.owner[2 * self.n_edges:]

    def is_simple(self) -> bool:
        pairs = self.edge_array()
        if np.any(pairs[:, 0] == pairs[:, 1]):
            return False
        key = np.sort(pairs, axis=1)
        return np.unique(key, axis=0).shape[0] == key.shape[0]

    # mutation -----------------------------------------------------------
    def _check_edge(self, e: int):
        if not (0 <= e < self.n_edges) or not self.alive[e]:
            raise StaleEdgeError(f"edge {e} is not a live edge")

    def _move(self, h: int, new_owner: int):
        old = self.owner[h]
        # unlink
        p, q = self.prv[h], self.nxt[h]
        if p >= 0:
            self.nxt[p] = q
        else:
            self.head[old] = q
        if q >= 0:
            self.prv[q] = p
        # push front
        first = self.head[new_owner]
        self.nxt[h] = first
        self.prv[h] = -1
        if first >= 0:
            self.prv[first] = h
        self.head[new_owner] = h
        self.owner[h] = new_owner

    def rewire(self, e: int, end: int, new_vertex: int) -> None:
        """Move half-edge ``2e + end`` to ``new_vertex``.

        Counts as a rewiring even when the vertex does not change.
        """
        self._check_edge(e)
        if end not in (0, 1):
            raise GraphError("end selector must be 0 or 1")
        if not 0 <= new_vertex < self.n:
            raise GraphError("target vertex out of range")
        h = 2 * e + end
        if self.owner[h] != new_vertex:
            self._move(h, new_vertex)
        self.rewirings[e] += 1

    def drop(self, e: int) -> None:
        self._check_edge(e)
        self.alive[e] = False

    def check_invariants(self) -> None:
        H = self.owner.size
        # lists partition the half-edges and agree with owner
        seen = np.zeros(H, dtype=np.int64)
        for v in range(self.n):
            h, prev = self.head[v], -1
            while h >= 0:
                if self.owner[h] != v or self.prv[h] != prev:
                    raise GraphError(f"list corruption at vertex {v}, half-edge {h}")
                seen[h] += 1
                prev, h = h, self.nxt[h]
        if np.any(seen != 1):
            raise GraphError("half-edge missing from or repeated in vertex lists")
        paired = np.arange(2 * self.n_edges)
        if np.any((paired ^ 1) ^ 1 != paired) or np.any((paired ^ 1) == paired):
            raise GraphError("pairing is not a fixed-point-free involution")
        deg = self.degrees()
        n_unpaired = H - 2 * self.n_edges
        if deg.sum() != 2 * int(self.alive.sum()) + n_unpaired:
            raise GraphError("degree sum does not match edge count")

    # serialization ------------------------------------------------------
    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"n={self.n}\n")
        for u, v in self.edge_array():
            buf.write(f"{u} {v}\n")
        unp = self.unpaired_owners()
        if unp.size:
            buf.write("unpaired\n")
            for v in unp:
                buf.write(f"{v}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "HalfEdgeGraph":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or not lines[0].startswith("n="):
            raise GraphError("missing 'n=<n>' header")
        n = int(lines[0][2:])
        edges, unpaired, section = [], [], "edges"
        for ln in lines[1:]:
            if ln == "unpaired":
                section = "unpaired"
                continue
            parts = ln.split()
            if section == "edges":
                if len(parts) != 2:
                    raise GraphError(f"bad edge line {ln!r}")
                edges.append((int(parts[0]), int(parts[1])))
            else:
                unpaired.append(int(parts[0]))
        return cls.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2), unpaired)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "HalfEdgeGraph":
        return cls.from_text(Path(path).read_text())


def sample_degrees(n: int, dist: DegreeDistribution, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. degrees; the last one is resampled until the sum is even."""
    if n < 1:
        raise GraphError("n must be >= 1")
    support = np.nonzero(dist.pmf)[0]
    deg = dist.sample(n, rng)
    if deg.sum() % 2:
        rest = deg[:-1].sum()
        if not np.any((rest + support) % 2 == 0):
            raise GraphError("no degree sequence with even sum exists for this n and distribution")
        while deg.sum() % 2:
            deg[-1] = dist.sample(1, rng)[0]
    return deg.astype(np.int64)


def config_model_from_degrees(degrees, rng: np.random.Generator) -> HalfEdgeGraph:
    degrees = np.asarray(degrees, dtype=np.int64)
    if degrees.sum() % 2:
        raise GraphError("degree sum must be even")
    stubs = np.repeat(np.arange(degrees.size, dtype=np.int64), degrees)
    rng.shuffle(stubs)
    return HalfEdgeGraph(n=degrees.size, owner=stubs, n_edges=stubs.size // 2)


def gen_config_model(n: int, dist: DegreeDistribution, rng_seed) -> HalfEdgeGraph:
    """CM(n, D) with self-loops and multi-edges kept (annealed measure)."""
    rng = np.random.default_rng(rng_seed)
    return config_model_from_degrees(sample_degrees(n, dist, rng), rng)


_DENSE_PAIRS = 2_000_000


def gen_er(n: int, mu: float, rng_seed) -> HalfEdgeGraph:
    """Erdos-Renyi G(n, mu/n) in half-edge form."""
    if n < 1:
        raise GraphError("n must be >= 1")
    p = mu / n
    if not 0 <= p <= 1:
        raise GraphError("need 0 <= mu/n <= 1")
    rng = np.random.default_rng(rng_seed)
    n_pairs = n * (n - 1) // 2
    if n_pairs <= _DENSE_PAIRS:
        iu, ju = np.triu_indices(n, k=1)
        keep = rng.random(iu.size) < p
        edges = np.stack([iu[keep], ju[keep]], axis=1)
    else:
        m = int(rng.binomial(n_pairs, p))
        edges = _distinct_pairs(n, m, rng)
    return HalfEdgeGraph.from_edges(n, edges)


def _distinct_pairs(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """A uniformly random m-subset of unordered vertex pairs (m << n^2)."""
    chosen = np.empty(0, dtype=np.int64)
    while chosen.size < m:
        k = int((m - chosen.size) * 1.1) + 16
        a = rng.integers(0, n, size=k)
        b = rng.integers(0, n, size=k)
        ok = a != b
        key = np.minimum(a, b)[ok] * n + np.maximum(a, b)[ok]
        allkeys = np.concatenate([chosen, key])
        # first occurrence in draw order keeps the subset uniform
        _, first = np.unique(allkeys, return_index=True)
        chosen = allkeys[np.sort(first)][:m]
    return np.stack([chosen // n, chosen % n], axis=1)
