"""Closed-form phase boundaries, region classification for the constant-p
regime, and the exact false-positive exponent minimization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import product

from .errors import UnsupportedArity, UnsupportedRegime

BOUNDARY_TOL = 1e-12


class RegionLabel(str, Enum):
    I_RECONSTRUCTABLE = "I"
    II_DETECT_ONLY_MATCHED_NULL = "II"
    III_DETECT_SIMPLE_NULL_ONLY = "III"
    BOUNDARY = "boundary"


def detection_boundary(delta: float, alpha: float) -> float:
    """beta* = 2*(delta + alpha) - 1.  Detection via edge counting succeeds
    for beta below this value; may be negative (never detectable within
    [0,1]) or exceed 1 (always detectable)."""
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta={delta} outside [0, 1)")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    return 2.0 * (delta + alpha) - 1.0


@dataclass(frozen=True)
class ReconBoundary:
    delta_star: float
    beta_star: float


def reconstruction_boundary(d: int, delta: float) -> ReconBoundary:
    """delta* = (d-1)/(d+1) and beta*(delta) = 2*delta/(d*(d-1)) + (d-2)/d."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta={delta} outside [0, 1)")
    delta_star = (d - 1) / (d + 1)
    beta_star = 2.0 * delta / (d * (d - 1)) + (d - 2) / d
    return ReconBoundary(delta_star, beta_star)


def classify_region(
    d: int,
    delta: float,
    beta: float,
    alpha: float = 1.0,
    tol: float = BOUNDARY_TOL,
) -> RegionLabel:
    """Classify a (delta, beta) point of the constant-p phase diagram.

    I:   reconstruction possible (delta < delta* and beta < beta*(delta)).
    II:  matched-null detection guaranteed (delta, beta < (d-1)/(d+1)) but
         outside region I.
    III: remainder; simple-null detection still succeeds for all
         delta, beta in (0,1) at alpha=1, but matched-null detection carries
         no guarantee here.
    Points within tol of any dividing curve return Boundary.
    """
    if d < 3:
        raise UnsupportedArity(f"region classification needs d >= 3, got {d}")
    if alpha != 1.0:
        raise UnsupportedRegime(
            "region classification is stated only for the constant-p regime (alpha = 1)"
        )
    if not (0.0 < delta < 1.0 and 0.0 < beta < 1.0):
        raise ValueError(f"delta={delta}, beta={beta} must lie in (0, 1)")
    bound = reconstruction_boundary(d, delta)
    delta_star, beta_star = bound.delta_star, bound.beta_star
    near_delta_star = abs(delta - delta_star) <= tol
    near_matched_edge = abs(beta - delta_star) <= tol
    near_recon_curve = delta < delta_star + tol and abs(beta - beta_star) <= tol
    if near_delta_star or near_matched_edge or near_recon_curve:
        return RegionLabel.BOUNDARY
    if delta < delta_star and beta < beta_star:
        return RegionLabel.I_RECONSTRUCTABLE
    if delta < delta_star and beta < delta_star:
        return RegionLabel.II_DETECT_ONLY_MATCHED_NULL
    return RegionLabel.III_DETECT_SIMPLE_NULL_ONLY


@dataclass(frozen=True)
class FalsePositiveExponent:
    min_omega: float
    argmin_config: tuple[int, ...]
    passes: bool


def false_positive_exponent(
    d: int,
    delta: float,
    beta: float,
    allow_repeats: bool = False,
) -> FalsePositiveExponent:
    """Minimize the false-clique weight over families of proper subsets.

    A family of distinct subsets A_1..A_k of a d-set, 2 <= |A_l| <= d-1, has
    weight  sum_l (|A_l| - 1 - delta)
          + (1 - beta) * max(0, C(d,2) - sum_l C(|A_l|, 2)).
    The weight depends on the family only through its multiset of sizes, so
    the exact minimum is found by enumerating size counts (size-m count capped
    at C(d,m); doubled when allow_repeats, which models each subset appearing
    at most twice for validation).  passes is min_omega > d - 1 - delta; true
    exactly when false cliques stay asymptotically negligible relative to the
    planted hyperedge count.
    """
    if not 3 <= d <= 5:
        raise UnsupportedArity(f"supported arities are 3..5, got {d}")
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta={delta} outside [0, 1)")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta={beta} outside [0, 1]")
    pairs_total = math.comb(d, 2)
    sizes = range(2, d)
    mult = 2 if allow_repeats else 1
    caps = {m: mult * math.comb(d, m) for m in sizes}

    best = math.inf
    best_config: tuple[int, ...] = ()
    for counts in product(*(range(caps[m] + 1) for m in sizes)):
        cost = 0.0
        covered = 0
        config: list[int] = []
        for m, k in zip(sizes, counts):
            cost += k * (m - 1 - delta)
            covered += k * math.comb(m, 2)
            config.extend([m] * k)
        omega = cost + (1.0 - beta) * max(0, pairs_total - covered)
        if omega < best:
            best = omega
            best_config = tuple(config)
    return FalsePositiveExponent(best, best_config, best > d - 1 - delta)
