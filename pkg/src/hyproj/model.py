"""Planted noisy-projection model.

A latent d-uniform hypergraph H on [n] includes every d-subset independently
with probability s.  Its projection P(H) joins two vertices iff they share a
hyperedge.  The observation A keeps each projection edge with probability p
and adds each non-projection pair with probability q <= p.  Rates are usually
resolved from exponents: s = c_s * n^(delta-(d-1)), p = c_p * n^(alpha-1),
q = c_q * n^(beta-1), each clamped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from itertools import combinations

import numpy as np

from .errors import BudgetExceeded, InvalidParams
from .util import (
    all_subsets,
    lexsort_rows,
    num_pairs,
    pair_index,
    pair_unindex,
)

MAX_ARITY = 6

# Below this many d-subsets the sampler materializes them all and picks an
# index subset; above it, rejection sampling of distinct d-subsets is used.
_DENSE_SUBSET_CAP = 200_000

# Hard cap on materialized hyperedges per sample.
_SAMPLE_EDGE_CAP = 50_000_000

_INT64_MAX = 2**63 - 1


def _log_n(value: float, n: int) -> float:
    if value <= 0.0:
        return float("-inf")
    return math.log(value) / math.log(n)


@dataclass(frozen=True)
class ModelParams:
    """Exponent-level parameters plus the resolved (s, p, q) rates.

    Single source of truth for an experiment: build via resolve_rates() (or
    ModelParams.resolve for direct-rate overrides) rather than by hand.
    allow_inverted skips the q <= p check; the anti-signal regime q > p is
    outside the model proper but useful for negative controls.
    """

    n: int
    d: int
    delta: float
    alpha: float
    beta: float
    s: float
    p: float
    q: float
    c_s: float = 1.0
    c_p: float = 1.0
    c_q: float = 1.0
    allow_inverted: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.d < 2 or self.d > MAX_ARITY:
            raise InvalidParams(f"d must be in [2, {MAX_ARITY}], got {self.d}")
        if self.n < self.d:
            raise InvalidParams(f"n must be >= d, got n={self.n}, d={self.d}")
        for name in ("s", "p", "q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0 or math.isnan(v):
                raise InvalidParams(f"{name}={v} outside [0, 1]")
        for name in ("c_s", "c_p", "c_q"):
            if getattr(self, name) <= 0.0:
                raise InvalidParams(f"{name} must be positive")
        if self.q > self.p and not self.allow_inverted:
            raise InvalidParams(
                f"q={self.q} > p={self.p}; projection edges must not be less "
                "likely than background ones (pass allow_inverted=True for "
                "anti-signal diagnostics)"
            )

    @classmethod
    def resolve(
        cls,
        n: int,
        d: int,
        *,
        delta: float | None = None,
        alpha: float | None = None,
        beta: float | None = None,
        s: float | None = None,
        p: float | None = None,
        q: float | None = None,
        c_s: float = 1.0,
        c_p: float = 1.0,
        c_q: float = 1.0,
        allow_inverted: bool = False,
    ) -> "ModelParams":
        """Resolve rates from exponents, with optional direct-rate overrides.

        For each rate, a direct value wins over the exponent; the exponent is
        then back-computed as a base-n logarithm for reporting.  Exponent
        ranges (delta in [0,1), alpha/beta in [0,1]) are enforced only on the
        exponent path: back-computed values may fall outside them.
        """
        if n < d or d < 2:
            raise InvalidParams(f"need n >= d >= 2, got n={n}, d={d}")

        def one_rate(direct, expo, c, name, expo_name, shift, strict_hi):
            if direct is None and expo is None:
                raise InvalidParams(f"must give either {name} or {expo_name}")
            if direct is not None:
                if not 0.0 <= direct <= 1.0:
                    raise InvalidParams(f"{name}={direct} outside [0, 1]")
                return float(direct), _log_n(direct, n) + shift
            bad = expo < 0.0 or expo > 1.0 or (strict_hi and expo == 1.0)
            if bad:
                rng_txt = "[0, 1)" if strict_hi else "[0, 1]"
                raise InvalidParams(f"{expo_name}={expo} outside {rng_txt}")
            return min(1.0, c * float(n) ** (expo - shift)), float(expo)

        s_val, delta_val = one_rate(s, delta, c_s, "s", "delta", d - 1, True)
        p_val, alpha_val = one_rate(p, alpha, c_p, "p", "alpha", 1, False)
        q_val, beta_val = one_rate(q, beta, c_q, "q", "beta", 1, False)
        return cls(
            n=n, d=d, delta=delta_val, alpha=alpha_val, beta=beta_val,
            s=s_val, p=p_val, q=q_val, c_s=c_s, c_p=c_p, c_q=c_q,
            allow_inverted=allow_inverted,
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def resolve_rates(
    n: int,
    d: int,
    delta: float,
    alpha: float,
    beta: float,
    c_s: float = 1.0,
    c_p: float = 1.0,
    c_q: float = 1.0,
) -> ModelParams:
    """s = min(1, c_s n^(delta-(d-1))), p = min(1, c_p n^(alpha-1)),
    q = min(1, c_q n^(beta-1)).  Raises InvalidParams if q > p after
    resolution."""
    return ModelParams.resolve(
        n, d, delta=delta, alpha=alpha, beta=beta, c_s=c_s, c_p=c_p, c_q=c_q
    )


class Hypergraph:
    """A set of d-subsets of {1..n}.  Immutable once built.

    Internally stored as an (m, d) int32 array with each row sorted ascending
    and rows in lexicographic order, so iteration order is deterministic and
    set operations stay vectorized at experiment scale.
    """

    __slots__ = ("n", "d", "_rows", "_edge_set")

    def __init__(self, n: int, d: int, rows: np.ndarray | None = None):
        if d < 2 or d > MAX_ARITY:
            raise InvalidParams(f"d must be in [2, {MAX_ARITY}], got {d}")
        if n < d:
            raise InvalidParams(f"n must be >= d, got n={n}, d={d}")
        if rows is None:
            rows = np.empty((0, d), dtype=np.int32)
        rows = np.ascontiguousarray(rows, dtype=np.int32)
        if rows.ndim != 2 or rows.shape[1] != d:
            raise InvalidParams(f"rows must have shape (m, {d})")
        self.n = int(n)
        self.d = int(d)
        self._rows = rows
        self._rows.setflags(write=False)
        self._edge_set: frozenset | None = None

    @classmethod
    def from_edges(cls, n: int, d: int, edges) -> "Hypergraph":
        """Build from an iterable of vertex tuples, validating and
        canonicalizing (sorted tuples, lexicographic order, no duplicates)."""
        rows = np.array(sorted({tuple(sorted(e)) for e in edges}), dtype=np.int64)
        if rows.size == 0:
            return cls(n, d)
        if rows.ndim != 2 or rows.shape[1] != d:
            raise InvalidParams(f"every hyperedge must have exactly {d} vertices")
        if (np.diff(rows, axis=1) <= 0).any():
            raise InvalidParams("hyperedge vertices must be distinct")
        if rows.min() < 1 or rows.max() > n:
            raise InvalidParams(f"vertex ids must lie in [1, {n}]")
        return cls(n, d, rows.astype(np.int32))

    @property
    def rows(self) -> np.ndarray:
        """(m, d) int32 array, rows sorted lexicographically."""
        return self._rows

    @property
    def edges(self) -> frozenset:
        """The hyperedges as a frozenset of sorted tuples (built lazily)."""
        if self._edge_set is None:
            self._edge_set = frozenset(map(tuple, self._rows.tolist()))
        return self._edge_set

    def __len__(self) -> int:
        return self._rows.shape[0]

    def __contains__(self, edge) -> bool:
        return tuple(edge) in self.edges

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.d == other.d
            and self._rows.shape == other._rows.shape
            and bool((self._rows == other._rows).all())
        )

    def __hash__(self) -> int:
        return hash((self.n, self.d, self._rows.tobytes()))

    def __repr__(self) -> str:
        return f"Hypergraph(n={self.n}, d={self.d}, m={len(self)})"


class Graph:
    """A simple graph on {1..n} stored as an (m, 2) int32 array of pairs
    (i, j), i < j, in lexicographic order."""

    __slots__ = ("n", "_rows", "_edge_set")

    def __init__(self, n: int, rows: np.ndarray | None = None):
        if n < 1:
            raise InvalidParams(f"n must be >= 1, got {n}")
        if rows is None:
            rows = np.empty((0, 2), dtype=np.int32)
        rows = np.ascontiguousarray(rows, dtype=np.int32)
        if rows.ndim != 2 or rows.shape[1] != 2:
            raise InvalidParams("rows must have shape (m, 2)")
        self.n = int(n)
        self._rows = rows
        self._rows.setflags(write=False)
        self._edge_set: frozenset | None = None

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        rows = np.array(sorted({tuple(sorted(e)) for e in edges}), dtype=np.int64)
        if rows.size == 0:
            return cls(n)
        if rows.ndim != 2 or rows.shape[1] != 2:
            raise InvalidParams("every edge must be a vertex pair")
        if (rows[:, 0] >= rows[:, 1]).any():
            raise InvalidParams("self-loops are not allowed")
        if rows.min() < 1 or rows.max() > n:
            raise InvalidParams(f"vertex ids must lie in [1, {n}]")
        return cls(n, rows.astype(np.int32))

    @classmethod
    def from_pair_indices(cls, n: int, idx: np.ndarray) -> "Graph":
        """Build from sorted dense pair indices (see util.pair_index)."""
        i, j = pair_unindex(idx, n)
        return cls(n, np.column_stack([i, j]).astype(np.int32))

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def edges(self) -> frozenset:
        if self._edge_set is None:
            self._edge_set = frozenset(map(tuple, self._rows.tolist()))
        return self._edge_set

    def pair_indices(self) -> np.ndarray:
        """Dense pair indices of the edges, ascending."""
        return pair_index(self._rows[:, 0], self._rows[:, 1], self.n)

    @property
    def num_edges(self) -> int:
        return self._rows.shape[0]

    def __len__(self) -> int:
        return self._rows.shape[0]

    def __contains__(self, edge) -> bool:
        return tuple(edge) in self.edges

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self._rows.shape == other._rows.shape
            and bool((self._rows == other._rows).all())
        )

    def __hash__(self) -> int:
        return hash((self.n, self._rows.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges})"


def sample_hypergraph(params: ModelParams, seed: int) -> Hypergraph:
    """Include each d-subset independently with probability s.

    Two-stage scheme, exactly equivalent in distribution: draw the edge count
    m ~ Binomial(C(n,d), s), then pick m distinct d-subsets uniformly (index
    choice when the subset universe is small, batched rejection otherwise).
    """
    n, d, s = params.n, params.d, params.s
    rng = np.random.default_rng(seed)
    total = math.comb(n, d)
    if s == 0.0:
        return Hypergraph(n, d)
    if total <= _INT64_MAX:
        m = int(rng.binomial(total, s))
    else:
        # Binomial(N, s) is within total variation N*s^2 of Poisson(N*s);
        # negligible at any scale where N overflows int64 (s <= n^(d-2)/N).
        lam = math.exp(
            math.log(s) + math.lgamma(n + 1) - math.lgamma(d + 1) - math.lgamma(n - d + 1)
        )
        m = int(rng.poisson(lam))
    if m > _SAMPLE_EDGE_CAP:
        raise BudgetExceeded(f"sampled hypergraph would have {m} hyperedges")
    if m == 0:
        return Hypergraph(n, d)

    if total <= _DENSE_SUBSET_CAP:
        subsets = all_subsets(n, d)
        idx = rng.choice(total, size=m, replace=False)
        idx.sort()
        rows = np.array([subsets[k] for k in idx], dtype=np.int32)
        return Hypergraph(n, d, rows)

    # Rejection path: draw batches of random d-tuples, keep rows with d
    # distinct vertices, dedupe in draw order until m collected.  Collisions
    # are rare because m << C(n,d) here.
    chosen: set = set()
    out: list = []
    while len(out) < m:
        batch = max(4096, 2 * (m - len(out)))
        draws = rng.integers(1, n + 1, size=(batch, d), dtype=np.int64)
        draws.sort(axis=1)
        distinct = (np.diff(draws, axis=1) > 0).all(axis=1)
        for row in draws[distinct].tolist():
            key = tuple(row)
            if key not in chosen:
                chosen.add(key)
                out.append(key)
                if len(out) == m:
                    break
    rows = lexsort_rows(np.array(out, dtype=np.int32))
    return Hypergraph(n, d, rows)


def project(H: Hypergraph) -> Graph:
    """Projection graph: (i, j) is an edge iff some hyperedge contains both."""
    if len(H) == 0:
        return Graph(H.n)
    rows = H.rows.astype(np.int64)
    parts = [
        pair_index(rows[:, a], rows[:, b], H.n)
        for a, b in combinations(range(H.d), 2)
    ]
    idx = np.unique(np.concatenate(parts))
    return Graph.from_pair_indices(H.n, idx)


def apply_noise(proj: Graph, p: float, q: float, seed: int) -> Graph:
    """Keep each projection edge with probability p; add each non-edge with
    probability q.  One uniform draw per vertex pair, so for a fixed seed the
    edge set is monotone in (p, q): raising q never removes an edge."""
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise InvalidParams(f"p={p}, q={q} must lie in [0, 1]")
    n = proj.n
    total = num_pairs(n)
    rng = np.random.default_rng(seed)
    u = rng.random(total)
    keep_prob = np.full(total, q)
    keep_prob[proj.pair_indices()] = p
    idx = np.flatnonzero(u < keep_prob)
    return Graph.from_pair_indices(n, idx)


def sample_null(n: int, q: float, seed: int) -> Graph:
    """Erdos-Renyi graph with edge density q."""
    if not 0.0 <= q <= 1.0:
        raise InvalidParams(f"q={q} outside [0, 1]")
    rng = np.random.default_rng(seed)
    u = rng.random(num_pairs(n))
    return Graph.from_pair_indices(n, np.flatnonzero(u < q))


def edge_multiplicity_histogram(H: Hypergraph) -> dict[int, int]:
    """Map k -> number of projected edges covered by at least k hyperedges.

    Values are weakly decreasing in k and the k=1 entry equals |E(P(H))|.
    Empty hypergraph gives an empty histogram.
    """
    if len(H) == 0:
        return {}
    rows = H.rows.astype(np.int64)
    parts = [
        pair_index(rows[:, a], rows[:, b], H.n)
        for a, b in combinations(range(H.d), 2)
    ]
    _, cover = np.unique(np.concatenate(parts), return_counts=True)
    max_k = int(cover.max())
    hist = {}
    for k in range(1, max_k + 1):
        hist[k] = int((cover >= k).sum())
    return hist


# --- file formats ---
# Hypergraph: header "n d", then one hyperedge per line as d ascending ids.
# Graph: header "n", then one edge per line "i j" with i < j.
# UTF-8, LF line endings, edges in lexicographic order.

def write_hypergraph(H: Hypergraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{H.n} {H.d}\n")
        for row in H.rows.tolist():
            fh.write(" ".join(map(str, row)) + "\n")


def read_hypergraph(path) -> Hypergraph:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise InvalidParams(f"{path}: expected header 'n d'")
        n, d = int(header[0]), int(header[1])
        edges = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            vs = tuple(int(tok) for tok in line.split())
            if len(vs) != d or any(a >= b for a, b in zip(vs, vs[1:])):
                raise InvalidParams(f"{path}: bad hyperedge line {line!r}")
            edges.append(vs)
        return Hypergraph.from_edges(n, d, edges)


def write_graph(G: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{G.n}\n")
        for i, j in G.rows.tolist():
            fh.write(f"{i} {j}\n")


def read_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 1:
            raise InvalidParams(f"{path}: expected header 'n'")
        n = int(header[0])
        edges = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            toks = line.split()
            if len(toks) != 2:
                raise InvalidParams(f"{path}: bad edge line {line!r}")
            i, j = int(toks[0]), int(toks[1])
            if i >= j:
                raise InvalidParams(f"{path}: edges must satisfy i < j, got {line!r}")
            edges.append((i, j))
        return Graph.from_edges(n, edges)
