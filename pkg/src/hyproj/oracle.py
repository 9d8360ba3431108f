"""Exact brute-force ground truth at tiny scale.

Graphs are encoded as bit-vectors over the canonical pair ordering and
hypergraphs as bit-vectors over the lexicographic ordering of d-subsets; both
bit counts are capped at 20 (2^20 states per side).  Every quantity here is an
explicit finite sum: marginals, likelihood ratios, total variation, null
second moments, posteriors.  Degenerate channels (q in {0,1}, p = 1) are
handled by support restriction (zero-probability states dropped), never by
log-domain infinities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded, DegenerateNoise, InvalidParams, ZeroEvidence
from .model import Graph, Hypergraph, ModelParams, apply_noise, project, sample_hypergraph
from .util import all_subsets, derive_seed, num_pairs, pair_index

MAX_STATE_BITS = 20
_CHUNK = 4096

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ExactDistribution:
    """Explicit finite distribution over graphs or hypergraphs.

    support holds bit-vector encodings (ascending, distinct, zero-probability
    states dropped); probs is the parallel probability vector.
    """

    kind: str  # "graph" | "hypergraph"
    n: int
    d: int | None
    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.kind not in ("graph", "hypergraph"):
            raise InvalidParams(f"unknown kind {self.kind!r}")
        if self.support.shape != self.probs.shape or self.support.ndim != 1:
            raise InvalidParams("support and probs must be parallel 1-d arrays")
        if self.support.size and (np.diff(self.support) <= 0).any():
            raise InvalidParams("support must be strictly increasing")
        if (self.probs < 0).any():
            raise InvalidParams("probabilities must be nonnegative")
        total = float(self.probs.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise InvalidParams(f"probabilities sum to {total}, not 1")

    def prob_of(self, code: int) -> float:
        k = int(np.searchsorted(self.support, code))
        if k < self.support.size and self.support[k] == code:
            return float(self.probs[k])
        return 0.0

    def sample(self, seed: int, size: int | None = None):
        rng = np.random.default_rng(seed)
        out = rng.choice(self.support, size=size, p=self.probs)
        return int(out) if size is None else out.astype(np.int64)

    def map_estimate(self) -> int:
        """Encoding of the highest-probability state; ties break to the
        smallest encoding (support is ascending and argmax takes the first)."""
        return int(self.support[int(np.argmax(self.probs))])

    def to_json_dict(self, params: ModelParams | None = None) -> dict:
        out = {
            "kind": self.kind,
            "n": self.n,
            "d": self.d,
            "support_encoding": [int(c) for c in self.support],
            "probs": [float(x) for x in self.probs],
        }
        if params is not None:
            out["params"] = params.as_dict()
        return out

    @classmethod
    def from_json_dict(cls, payload: dict) -> "ExactDistribution":
        return cls(
            kind=payload["kind"],
            n=int(payload["n"]),
            d=None if payload["d"] is None else int(payload["d"]),
            support=np.asarray(payload["support_encoding"], dtype=np.int64),
            probs=np.asarray(payload["probs"], dtype=np.float64),
        )


def write_fixture(dist: ExactDistribution, params: ModelParams, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(dist.to_json_dict(params), fh, sort_keys=True)
        fh.write("\n")


def read_fixture(path) -> tuple[dict, ExactDistribution]:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return payload.get("params", {}), ExactDistribution.from_json_dict(payload)


def check_budget(n: int, d: int) -> None:
    if num_pairs(n) > MAX_STATE_BITS or math.comb(n, d) > MAX_STATE_BITS:
        raise BudgetExceeded(
            f"enumeration needs C({n},2)={num_pairs(n)} and "
            f"C({n},{d})={math.comb(n, d)} bits; cap is {MAX_STATE_BITS}"
        )


class _Space:
    """Enumeration tables for one (n, d)."""

    def __init__(self, n: int, d: int):
        check_budget(n, d)
        self.n = n
        self.d = d
        self.pair_bits = num_pairs(n)
        self.edge_bits = math.comb(n, d)
        subsets = all_subsets(n, d)
        self.subset_index = {sub: k for k, sub in enumerate(subsets)}
        masks = []
        for sub in subsets:
            m = 0
            for a in range(d):
                for b in range(a + 1, d):
                    m |= 1 << int(pair_index(sub[a], sub[b], n))
            masks.append(m)
        self.subset_pair_masks = np.asarray(masks, dtype=np.int64)
        # projection mask of every hypergraph code, by doubling DP
        proj = np.zeros(1 << self.edge_bits, dtype=np.int64)
        for k in range(self.edge_bits):
            half = 1 << k
            proj[half : 2 * half] = proj[:half] | self.subset_pair_masks[k]
        self.proj_masks = proj
        self.h_popcount = np.bitwise_count(
            np.arange(1 << self.edge_bits, dtype=np.int64)
        ).astype(np.int64)
        self.g_popcount = np.bitwise_count(
            np.arange(1 << self.pair_bits, dtype=np.int64)
        ).astype(np.int64)

    def mu(self, s: float) -> np.ndarray:
        """Prior over hypergraph codes: s^|H| (1-s)^(C(n,d)-|H|)."""
        pc = self.h_popcount
        return np.power(s, pc) * np.power(1.0 - s, self.edge_bits - pc)

    def null_probs(self, q: float) -> np.ndarray:
        """Erdos-Renyi(q) over graph codes."""
        pc = self.g_popcount
        return np.power(q, pc) * np.power(1.0 - q, self.pair_bits - pc)

    def proj_weights(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        """(codes, weights): total prior mass landing on each distinct
        projection mask."""
        w = np.zeros(1 << self.pair_bits, dtype=np.float64)
        np.add.at(w, self.proj_masks, self.mu(s))
        nz = np.flatnonzero(w > 0.0)
        return nz.astype(np.int64), w[nz]

    def encode_hypergraph(self, H: Hypergraph) -> int:
        if H.n != self.n or H.d != self.d:
            raise InvalidParams("hypergraph shape does not match the space")
        code = 0
        for row in map(tuple, H.rows.tolist()):
            code |= 1 << self.subset_index[row]
        return code

    def decode_hypergraph(self, code: int) -> Hypergraph:
        subsets = all_subsets(self.n, self.d)
        edges = [subsets[k] for k in range(self.edge_bits) if code >> k & 1]
        return Hypergraph.from_edges(self.n, self.d, edges)

    def encode_graph(self, G: Graph) -> int:
        if G.n != self.n:
            raise InvalidParams("graph size does not match the space")
        return sum(1 << int(k) for k in G.pair_indices())

    def decode_graph(self, code: int) -> Graph:
        idx = np.asarray(
            [k for k in range(self.pair_bits) if code >> k & 1], dtype=np.int64
        )
        return Graph.from_pair_indices(self.n, idx)


@lru_cache(maxsize=8)
def _space_for(n: int, d: int) -> _Space:
    return _Space(n, d)


def _space(params: ModelParams) -> _Space:
    return _space_for(params.n, params.d)


def _channel_probs(a_codes: np.ndarray, proj_codes: np.ndarray, pair_bits: int,
                   p: float, q: float) -> np.ndarray:
    """Matrix P(A | proj) for a chunk of graph codes x projection codes."""
    inter = np.bitwise_count(a_codes[:, None] & proj_codes[None, :]).astype(np.int64)
    proj_sizes = np.bitwise_count(proj_codes).astype(np.int64)[None, :]
    a_sizes = np.bitwise_count(a_codes).astype(np.int64)[:, None]
    kept = inter
    dropped = proj_sizes - inter
    added = a_sizes - inter
    silent = (pair_bits - proj_sizes) - added
    return (
        np.power(p, kept)
        * np.power(1.0 - p, dropped)
        * np.power(q, added)
        * np.power(1.0 - q, silent)
    )


def exact_planted_marginal(params: ModelParams) -> ExactDistribution:
    """Exact marginal law of the observation: P(A) = sum_H mu(H) P(A|H)."""
    sp = _space(params)
    proj_codes, w = sp.proj_weights(params.s)
    total_graphs = 1 << sp.pair_bits
    probs = np.empty(total_graphs, dtype=np.float64)
    codes = np.arange(total_graphs, dtype=np.int64)
    for lo in range(0, total_graphs, _CHUNK):
        chunk = codes[lo : lo + _CHUNK]
        probs[lo : lo + _CHUNK] = _channel_probs(
            chunk, proj_codes, sp.pair_bits, params.p, params.q
        ) @ w
    keep = probs > 0.0
    return ExactDistribution("graph", params.n, None, codes[keep], probs[keep])


def _likelihood_vector(params: ModelParams, sp: _Space) -> np.ndarray:
    """L(A) = E_H[prod of edge factors over E(P(H))], for every graph code.

    Valid for q in (0,1); p = 1 is fine (the absent-edge factor is then 0 and
    0^0 = 1 keeps fully-kept projections on support).
    """
    if params.q <= 0.0 or params.q >= 1.0:
        raise DegenerateNoise(f"likelihood ratio undefined for q={params.q}")
    ell1 = params.p / params.q
    ell0 = (1.0 - params.p) / (1.0 - params.q)
    proj_codes, w = sp.proj_weights(params.s)
    proj_sizes = np.bitwise_count(proj_codes).astype(np.int64)
    total_graphs = 1 << sp.pair_bits
    codes = np.arange(total_graphs, dtype=np.int64)
    out = np.empty(total_graphs, dtype=np.float64)
    for lo in range(0, total_graphs, _CHUNK):
        chunk = codes[lo : lo + _CHUNK]
        kept = np.bitwise_count(chunk[:, None] & proj_codes[None, :]).astype(np.int64)
        dropped = proj_sizes[None, :] - kept
        out[lo : lo + _CHUNK] = (np.power(ell1, kept) * np.power(ell0, dropped)) @ w
    return out


def exact_likelihood_ratio(A: Graph, params: ModelParams) -> float:
    """L(A) = P(A)/Q(A), computed by hypergraph enumeration of the edge-factor
    product (not by dividing the two marginals)."""
    sp = _space(params)
    code = sp.encode_graph(A)
    return float(_likelihood_vector(params, sp)[code])


def exact_tv(params: ModelParams) -> float:
    """Total variation distance between the planted marginal and the
    Erdos-Renyi null with density q."""
    sp = _space(params)
    planted = exact_planted_marginal(params)
    full_p = np.zeros(1 << sp.pair_bits, dtype=np.float64)
    full_p[planted.support] = planted.probs
    return float(0.5 * np.abs(full_p - sp.null_probs(params.q)).sum())


@dataclass(frozen=True)
class SecondMoment:
    direct: float
    replica: float


def exact_second_moment(params: ModelParams) -> SecondMoment:
    """Null second moment of the likelihood ratio, two independent ways.

    direct  = sum_A Q(A) L(A)^2 over the graph enumeration;
    replica = E over hypergraph pairs of lambda^|shared projected edges| with
    lambda = p^2/q + (1-p)^2/(1-q).  The two agree up to float roundoff.
    """
    if params.q <= 0.0 or params.q >= 1.0 or params.p >= 1.0:
        raise DegenerateNoise(
            f"second moment needs q in (0,1) and p < 1, got p={params.p}, q={params.q}"
        )
    sp = _space(params)
    lvec = _likelihood_vector(params, sp)
    direct = float(np.dot(sp.null_probs(params.q), lvec * lvec))

    lam = params.p ** 2 / params.q + (1.0 - params.p) ** 2 / (1.0 - params.q)
    proj_codes, w = sp.proj_weights(params.s)
    replica = 0.0
    for lo in range(0, proj_codes.size, _CHUNK):
        chunk = proj_codes[lo : lo + _CHUNK]
        shared = np.bitwise_count(chunk[:, None] & proj_codes[None, :]).astype(np.int64)
        replica += float(w[lo : lo + _CHUNK] @ np.power(lam, shared) @ w)
    return SecondMoment(direct, replica)


def exact_posterior(A: Graph, params: ModelParams) -> ExactDistribution:
    """Exact posterior over hypergraphs given the observation A."""
    sp = _space(params)
    a_code = np.asarray([sp.encode_graph(A)], dtype=np.int64)
    mu = sp.mu(params.s)
    like = _channel_probs(
        a_code, sp.proj_masks, sp.pair_bits, params.p, params.q
    )[0]
    weights = mu * like
    total = float(weights.sum())
    if total <= 0.0:
        raise ZeroEvidence("the observation has probability zero under the model")
    probs = weights / total
    codes = np.arange(1 << sp.edge_bits, dtype=np.int64)
    keep = probs > 0.0
    return ExactDistribution("hypergraph", params.n, params.d, codes[keep], probs[keep])


def exact_overlap_distribution(
    params: ModelParams, seed: int, trials: int
) -> dict[int, int]:
    """Histogram of |H intersect H'| with H from the planted model and H'
    drawn from the exact posterior given the observation."""
    if trials < 1:
        raise InvalidParams(f"trials must be >= 1, got {trials}")
    sp = _space(params)
    hist: dict[int, int] = {}
    for t in range(trials):
        H = sample_hypergraph(params, derive_seed(seed, t, "hypergraph"))
        A = apply_noise(project(H), params.p, params.q, derive_seed(seed, t, "noise"))
        post = exact_posterior(A, params)
        h_code = sp.encode_hypergraph(H)
        hp_code = post.sample(derive_seed(seed, t, "posterior"))
        overlap = int(h_code & hp_code).bit_count()
        hist[overlap] = hist.get(overlap, 0) + 1
    return hist
