"""Detection statistics, decision thresholds, likelihood edge factors, the
matched null density, and the projected-edge intersection statistic.

Clique counting and listing run over a degeneracy-style vertex ordering with
bitset neighborhood intersections, so they stay feasible on the sparse graphs
the model produces (never by iterating all C(n,d) subsets).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CliqueBudgetExceeded, DegenerateNoise, InvalidParams
from .model import Graph, Hypergraph, ModelParams, project
from .util import (
    bit_positions,
    bitset_width,
    lexsort_rows,
    num_pairs,
    popcount,
    scaled_comb,
)


class StatisticName(str, Enum):
    EDGE_COUNT = "edge_count"
    CLIQUE_COUNT = "clique_count"


class Decision(str, Enum):
    PLANTED = "planted"
    NULL = "null"


@dataclass(frozen=True)
class TestOutcome:
    """One thresholded test: decision is Planted iff value >= threshold
    (ties go to Planted by convention)."""

    statistic_name: StatisticName
    value: float
    threshold: float
    decision: Decision

    @classmethod
    def decide(cls, statistic_name: StatisticName, value: float, threshold: float) -> "TestOutcome":
        decision = Decision.PLANTED if value >= threshold else Decision.NULL
        return cls(statistic_name, value, threshold, decision)


def edge_count(A: Graph) -> int:
    """Total number of edges of the observation."""
    return A.num_edges


def edge_count_threshold(params: ModelParams, calibrated: bool = False) -> float:
    """q*C(n,2) + (1/2)*p*s*C(d,2)*C(n,d).

    With calibrated=True, returns the midpoint variant
    q*C(n,2) + 0.45*(p-q)*s*C(d,2)*C(n,d), which centers the margin on the
    actual planted excess instead of the p-based surrogate; useful at small n
    when p - q is well below p.
    """
    n, d = params.n, params.d
    base = params.q * num_pairs(n)
    pairs_per_edge = math.comb(d, 2)
    if calibrated:
        signal = 0.45 * (params.p - params.q) * pairs_per_edge * scaled_comb(params.s, n, d)
    else:
        signal = 0.5 * params.p * pairs_per_edge * scaled_comb(params.s, n, d)
    return base + signal


def _density_power_times_comb(density: float, power: int, n: int, d: int) -> float:
    """density**power * C(n,d), switching to log-domain if the direct power
    underflows."""
    if density == 0.0:
        return scaled_comb(1.0, n, d) if power == 0 else 0.0
    direct = density**power
    if direct > 0.0 and math.isfinite(direct):
        return scaled_comb(direct, n, d)
    log_val = (
        power * math.log(density)
        + math.lgamma(n + 1)
        - math.lgamma(d + 1)
        - math.lgamma(n - d + 1)
    )
    return math.exp(log_val)


def clique_count_threshold(params: ModelParams) -> float:
    """q^C(d,2) * C(n,d) + (1/2)*p*s*C(n,d)."""
    n, d = params.n, params.d
    null_term = _density_power_times_comb(params.q, math.comb(d, 2), n, d)
    return null_term + 0.5 * params.p * scaled_comb(params.s, n, d)


def clique_count_threshold_matched(params: ModelParams) -> float:
    """Clique-count threshold centered at the matched null actually in force:
    qt^C(d,2) * C(n,d) + (1/2)*p*s*C(n,d) with qt the matched density.

    At finite n the q-centered formula can sit below the matched null's own
    mean clique count (the binomial cross terms in qt^C(d,2) - q^C(d,2) decay
    slower than they vanish asymptotically), so tests against the matched
    null threshold here.
    """
    n, d = params.n, params.d
    qt = matched_null_density(params)
    null_term = _density_power_times_comb(qt, math.comb(d, 2), n, d)
    return null_term + 0.5 * params.p * scaled_comb(params.s, n, d)


def matched_null_density(params: ModelParams) -> float:
    """qt = ((p-q)*s*C(n,d)*C(d,2)) / C(n,2) + q, clamped to [0, 1].

    Clamping indicates the formula left the unit interval (extreme prefactors
    at small n); a warning is emitted and the experiment proceeds visibly
    degraded rather than aborting.
    """
    n, d = params.n, params.d
    excess = (params.p - params.q) * math.comb(d, 2) * scaled_comb(params.s, n, d)
    qt = excess / num_pairs(n) + params.q
    if qt < 0.0 or qt > 1.0:
        clamped = min(1.0, max(0.0, qt))
        warnings.warn(
            f"matched null density {qt} clamped to {clamped}", stacklevel=2
        )
        return clamped
    return qt


def likelihood_edge_factors(p: float, q: float) -> tuple[float, float, float]:
    """(l(1), l(0), E_null[l^2]) = (p/q, (1-p)/(1-q), p^2/q + (1-p)^2/(1-q)).

    Requires 0 < q <= p < 1 so both factors are finite; the exact oracle
    handles the degenerate boundaries by support restriction instead.
    """
    if q <= 0.0 or p >= 1.0:
        raise DegenerateNoise(f"edge factors undefined for p={p}, q={q}")
    if q > p:
        raise InvalidParams(f"q={q} > p={p}")
    ell_one = p / q
    ell_zero = (1.0 - p) / (1.0 - q)
    second_moment_factor = p * p / q + (1.0 - p) ** 2 / (1.0 - q)
    return ell_one, ell_zero, second_moment_factor


def intersection_statistic(H: Hypergraph, Hp: Hypergraph) -> int:
    """Number of edges shared by the two projection graphs."""
    if H.n != Hp.n:
        raise InvalidParams(f"vertex counts differ: {H.n} vs {Hp.n}")
    a = project(H).pair_indices()
    b = project(Hp).pair_indices()
    return int(np.intersect1d(a, b, assume_unique=True).size)


def expected_intersection(n: int, d: int, s: float) -> tuple[float, float]:
    """(exact, paper_approx) for the expected shared projected-edge count of
    two independent hypergraphs.

    exact  = C(n,2) * (1 - (1-s)^C(n-2,d-2))^2   (per-pair coverage squared)
    approx = C(n,2) * (C(n-2,d-2) * s)^2          (first-order in s)
    The exact value never exceeds the approximation.
    """
    if not 0.0 <= s <= 1.0:
        raise InvalidParams(f"s={s} outside [0, 1]")
    if n < d or d < 2:
        raise InvalidParams(f"need n >= d >= 2, got n={n}, d={d}")
    covers = math.comb(n - 2, d - 2)
    if s == 1.0:
        coverage = 1.0 if covers > 0 else 0.0
    else:
        coverage = -math.expm1(covers * math.log1p(-s))
    pairs = float(num_pairs(n))
    exact = pairs * coverage * coverage
    approx_root = scaled_comb(s, n - 2, d - 2)
    paper_approx = pairs * approx_root * approx_root
    return exact, paper_approx


# --- clique machinery ---


def _degeneracy_order(A: Graph) -> np.ndarray:
    """Peeling order (repeatedly remove a minimum-degree vertex).  Returns
    pos such that pos[v-1] is the 0-based position of vertex v."""
    n = A.n
    rows = A.rows
    m = rows.shape[0]
    # CSR adjacency over 0-based vertices
    u = rows[:, 0].astype(np.int64) - 1
    v = rows[:, 1].astype(np.int64) - 1
    heads = np.concatenate([u, v])
    tails = np.concatenate([v, u])
    order_idx = np.argsort(heads, kind="stable")
    nbrs = tails[order_idx]
    deg = np.bincount(heads, minlength=n)
    indptr = np.concatenate([[0], np.cumsum(deg)])

    degree = deg.tolist()
    indptr_l = indptr.tolist()
    nbrs_l = nbrs.tolist()
    removed = [False] * n
    max_deg = max(degree, default=0)
    buckets = [[] for _ in range(max_deg + 1)]
    for vert in range(n):
        buckets[degree[vert]].append(vert)
    pos = [0] * n
    cur = 0
    for rank in range(n):
        while cur < len(buckets) and not buckets[cur]:
            cur += 1
        # lazy deletion: skip entries whose degree has since dropped
        while True:
            vert = buckets[cur].pop()
            if not removed[vert] and degree[vert] == cur:
                break
            while cur < len(buckets) and not buckets[cur]:
                cur += 1
        removed[vert] = True
        pos[vert] = rank
        for k in range(indptr_l[vert], indptr_l[vert + 1]):
            w = nbrs_l[k]
            if not removed[w]:
                degree[w] -= 1
                buckets[degree[w]].append(w)
                if degree[w] < cur:
                    cur = degree[w]
    return np.asarray(pos, dtype=np.int64)


def _forward_bitsets(A: Graph) -> tuple[np.ndarray, np.ndarray]:
    """(fw, vertex_of_pos): fw[i] is the bitset of neighbors of the vertex at
    position i that come later in the peeling order; vertex_of_pos maps
    positions back to 1-based vertex ids."""
    n = A.n
    pos = _degeneracy_order(A)
    vertex_of_pos = np.empty(n, dtype=np.int64)
    vertex_of_pos[pos] = np.arange(1, n + 1)
    width = bitset_width(n)
    fw = np.zeros((n, width), dtype=np.uint64)
    rows = A.rows
    if rows.shape[0]:
        a = pos[rows[:, 0].astype(np.int64) - 1]
        b = pos[rows[:, 1].astype(np.int64) - 1]
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        flat = lo * width + (hi >> 6)
        bits = (np.uint64(1) << (hi & 63).astype(np.uint64))
        np.bitwise_or.at(fw.reshape(-1), flat, bits)
    return fw, vertex_of_pos


def _count_from(fw: np.ndarray, cand: np.ndarray, remaining: int) -> int:
    if remaining == 1:
        return int(popcount(cand).sum())
    members = bit_positions(cand)
    if members.size == 0:
        return 0
    if remaining == 2:
        return int(popcount(fw[members] & cand).sum())
    total = 0
    for a in members:
        total += _count_from(fw, cand & fw[a], remaining - 1)
    return total


def clique_count(A: Graph, d: int) -> int:
    """Number of d-vertex subsets of A inducing a complete subgraph."""
    if not 2 <= d <= 6:
        raise InvalidParams(f"d must be in [2, 6], got {d}")
    if A.n < d:
        return 0
    if d == 2:
        return A.num_edges
    fw, _ = _forward_bitsets(A)
    total = 0
    for i in range(A.n):
        total += _count_from(fw, fw[i], d - 1)
    return total


def _list_from(fw, cand, remaining, prefix, out, cap):
    if remaining == 1:
        members = bit_positions(cand)
        if cap is not None and len(out) + members.size > cap:
            raise CliqueBudgetExceeded(
                f"clique listing exceeded the cap of {cap}"
            )
        for b in members:
            out.append(prefix + (int(b),))
        return
    for a in bit_positions(cand):
        _list_from(fw, cand & fw[a], remaining - 1, prefix + (int(a),), out, cap)


def list_cliques(A: Graph, d: int, cap: int | None = None) -> np.ndarray:
    """All d-cliques of A as an (m, d) int32 array of sorted vertex rows in
    lexicographic order.  Raises CliqueBudgetExceeded when more than cap
    cliques would be emitted."""
    if not 2 <= d <= 6:
        raise InvalidParams(f"d must be in [2, 6], got {d}")
    if A.n < d:
        return np.empty((0, d), dtype=np.int32)
    if d == 2:
        if cap is not None and A.num_edges > cap:
            raise CliqueBudgetExceeded(f"clique listing exceeded the cap of {cap}")
        return A.rows.copy()
    fw, vertex_of_pos = _forward_bitsets(A)
    out: list = []
    for i in range(A.n):
        _list_from(fw, fw[i], d - 1, (i,), out, cap)
    if not out:
        return np.empty((0, d), dtype=np.int32)
    rows = vertex_of_pos[np.asarray(out, dtype=np.int64)]
    rows.sort(axis=1)
    return lexsort_rows(rows.astype(np.int32))
