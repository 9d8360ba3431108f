"""Clique reconstruction estimator, error metrics, and the empty-hyperedge
diagnostic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InvalidParams
from .model import Graph, Hypergraph, ModelParams
from .stats import list_cliques
from .util import pair_index, rows_as_void, scaled_comb

DEFAULT_CLIQUE_CAP = 10**8


@dataclass(frozen=True)
class ReconMetrics:
    """Symmetric-difference accounting between the truth H and an estimate.

    normalized_error is |H triangle Hhat| / (s * C(n,d)); partial
    reconstruction at a trial level corresponds to values bounded away from 1,
    almost-exact to values near 0.
    """

    sym_diff: int
    missed: int
    false_pos: int
    normalizer: float
    normalized_error: float


def clique_estimator(A: Graph, d: int, cap: int = DEFAULT_CLIQUE_CAP) -> Hypergraph:
    """All d-subsets whose internal pairs are all present in A.

    Raises CliqueBudgetExceeded past the cap, which signals a parameter point
    far above the reconstruction threshold rather than a recoverable state.
    """
    rows = list_cliques(A, d, cap=cap)
    return Hypergraph(A.n, d, rows)


def recon_metrics(H: Hypergraph, Hhat: Hypergraph, s: float) -> ReconMetrics:
    """Set-difference counts between truth and estimate, normalized by
    s * C(n,d)."""
    if H.n != Hhat.n or H.d != Hhat.d:
        raise InvalidParams(
            f"mismatched shapes: ({H.n},{H.d}) vs ({Hhat.n},{Hhat.d})"
        )
    if not 0.0 <= s <= 1.0:
        raise InvalidParams(f"s={s} outside [0, 1]")
    if len(H) == 0 or len(Hhat) == 0:
        common = 0
    else:
        common = int(
            np.intersect1d(
                rows_as_void(H.rows), rows_as_void(Hhat.rows), assume_unique=True
            ).size
        )
    missed = len(H) - common
    false_pos = len(Hhat) - common
    sym_diff = missed + false_pos
    normalizer = scaled_comb(s, H.n, H.d)
    if normalizer > 0.0:
        normalized_error = sym_diff / normalizer
    else:
        normalized_error = 0.0 if sym_diff == 0 else math.inf
    return ReconMetrics(sym_diff, missed, false_pos, normalizer, normalized_error)


def empty_set(H: Hypergraph, A: Graph) -> Hypergraph:
    """Sub-hypergraph of H whose hyperedges have no internal pair observed
    in A."""
    if H.n != A.n:
        raise InvalidParams(f"vertex counts differ: {H.n} vs {A.n}")
    if len(H) == 0:
        return Hypergraph(H.n, H.d)
    rows = H.rows.astype(np.int64)
    pair_cols = [
        pair_index(rows[:, a], rows[:, b], H.n)
        for a, b in combinations(range(H.d), 2)
    ]
    internal = np.column_stack(pair_cols)
    observed = np.isin(internal, A.pair_indices())
    keep = ~observed.any(axis=1)
    return Hypergraph(H.n, H.d, H.rows[keep])


def expected_params_normalizer(params: ModelParams) -> float:
    """Convenience: the reconstruction normalizer s * C(n,d) for params."""
    return scaled_comb(params.s, params.n, params.d)
