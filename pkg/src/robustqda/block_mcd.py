"""Block-parallel minimum covariance determinant estimation.

Pipeline: standardize robustly, shuffle rows into q blocks, fit each
block independently (those fits may run on worker threads), pool the
per-block estimates through entry-wise medians, discard the half of the
blocks whose estimates deviate most from that median in a KL sense,
re-pool the surviving h-subsets in a single pass, reweight once against
the pooled raw estimate, and map everything back to the original
coordinates.  Given the same seed the result is identical for any worker
count, any block processing order, and any row permutation of the input.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from ._threads import ordered_map
from .core import LocationScatter, as_data_matrix
from .errors import BlocksTooSmall, DataError, DimensionMismatch, DomainError, TooFewObservations
from .mcd import RawEstimate, consistency_factor, fit_mcd, h_from_fraction, reweight
from .robust_scale import Standardizer, destandardize_estimate, fit_standardizer, standardize

__all__ = [
    "BlockDiagnostics",
    "BlockPlan",
    "BlockwiseResult",
    "PooledRaw",
    "blockwise_mcd",
    "default_block_count",
    "kl_deviation",
    "median_pool",
    "select_and_pool",
    "split_blocks",
]

_MIN_BLOCK_ROWS = 20


@dataclass(frozen=True)
class BlockPlan:
    """Disjoint covering assignment of row indices to q blocks."""

    q: int
    assignments: tuple
    sizes: tuple

    @property
    def n(self) -> int:
        return int(sum(self.sizes))


@dataclass(frozen=True)
class PooledRaw:
    """Raw pooled estimate over the h-subsets of the selected blocks."""

    loc_scat: LocationScatter
    subset: np.ndarray = field(repr=False)
    c_alpha: float
    contributing_blocks: tuple
    n_selected: int

    def __post_init__(self):
        object.__setattr__(self, "subset", np.array(self.subset, dtype=np.intp))
        self.subset.setflags(write=False)

    @property
    def h(self) -> int:
        return self.subset.shape[0]


@dataclass(frozen=True)
class BlockDiagnostics:
    q: int
    block_sizes: tuple
    h_values: tuple
    block_dets: tuple
    kl_deviations: tuple
    selected_blocks: tuple
    pooled_h: int
    inlier_count: int


@dataclass(frozen=True)
class BlockwiseResult:
    estimate: LocationScatter
    weights: np.ndarray = field(repr=False)
    standardizer: Standardizer
    raw: PooledRaw
    diagnostics: BlockDiagnostics

    def __post_init__(self):
        self.weights.setflags(write=False)


def default_block_count(n: int, p: int) -> int:
    """Default q: one block per available core, capped so blocks stay big
    enough (at least ``20 p`` rows per block and the hard minimum size)."""
    cores = os.cpu_count() or 1
    cap = min(n // (20 * p), n // max(2 * (p + 1), _MIN_BLOCK_ROWS))
    return max(1, min(cores, cap))


def split_blocks(n: int, q: int, rng: np.random.Generator, *, min_block_size: int = _MIN_BLOCK_ROWS) -> BlockPlan:
    """Shuffle rows 0..n-1 and chunk them into q nearly equal blocks.

    The first ``n mod q`` blocks receive one extra row.  With q = 1 the
    single block keeps all rows (no shuffle needed, no size constraint).
    """
    if q < 1 or int(q) != q:
        raise DomainError(f"q must be a positive integer, got {q!r}")
    q = int(q)
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    if q == 1:
        return BlockPlan(q=1, assignments=(np.arange(n, dtype=np.intp),), sizes=(n,))
    if n // q < min_block_size:
        raise BlocksTooSmall(
            f"{q} blocks of {n} rows gives blocks of {n // q} < {min_block_size} rows"
        )
    perm = rng.permutation(n)
    base, extra = divmod(n, q)
    assignments = []
    start = 0
    for block in range(q):
        size = base + (1 if block < extra else 0)
        assignments.append(perm[start : start + size].astype(np.intp))
        start += size
    return BlockPlan(q=q, assignments=tuple(assignments), sizes=tuple(len(a) for a in assignments))


def median_pool(estimates) -> tuple[np.ndarray, np.ndarray]:
    """Entry-wise median of per-block locations and scatters.

    The pooled scatter is symmetric by construction but not necessarily
    positive definite; it only serves as a reference point for the KL
    screening below.
    """
    if len(estimates) < 1:
        raise DataError("median_pool needs at least one estimate")
    mus = np.stack([e.mu for e in estimates])
    sigmas = np.stack([e.sigma for e in estimates])
    return np.median(mus, axis=0), np.median(sigmas, axis=0)


def _kl_core(sigma_a: np.ndarray, mu_a: np.ndarray, ls_b: LocationScatter) -> float:
    p = ls_b.p
    sign, logdet_a = np.linalg.slogdet(sigma_a)
    if sign <= 0:
        return float("inf")
    trace = float(np.sum(sigma_a * ls_b.precision))
    diff = mu_a - ls_b.mu
    quad = float(diff @ ls_b.precision @ diff)
    return trace - p - (logdet_a - ls_b.log_det) + quad


def kl_deviation(sigma_a, mu_a, sigma_b, mu_b) -> float:
    """Gaussian KL-style deviation of (sigma_a, mu_a) from (sigma_b, mu_b).

    ``trace(A B^-1 - I) - ln|A B^-1| + (a - b)' B^-1 (a - b)``.  The first
    argument pair may be indefinite (entry-wise medians can be); when its
    determinant is not positive the deviation is +inf.  The second pair
    must be positive definite.
    """
    ls_b = LocationScatter.from_sigma(mu_b, sigma_b)
    sigma_a = np.asarray(sigma_a, dtype=np.float64)
    mu_a = np.asarray(mu_a, dtype=np.float64)
    if sigma_a.shape != ls_b.sigma.shape or mu_a.shape != ls_b.mu.shape:
        raise DimensionMismatch("deviation arguments have mismatched shapes")
    if not np.all(np.isfinite(sigma_a)) or not np.all(np.isfinite(mu_a)):
        raise DataError("deviation arguments contain non-finite entries")
    if np.abs(sigma_a - sigma_a.T).max() > 1e-12 * max(np.abs(sigma_a).max(), 1.0):
        raise DataError("sigma_a is not symmetric")
    return _kl_core(sigma_a, mu_a, ls_b)


def select_and_pool(Z, plan: BlockPlan, estimates) -> PooledRaw:
    """Screen block fits against their median and pool the survivors.

    Keeps the floor(q/2) blocks with the smallest KL deviation from the
    entry-wise median estimate (ties resolve to the lower block id; a
    single block is always kept) and recomputes one raw estimate from the
    union of their h-subsets via accumulated sums and cross-products.
    """
    Z = as_data_matrix(Z, name="Z")
    n, p = Z.shape
    if len(estimates) != plan.q:
        raise DataError(f"expected {plan.q} block estimates, got {len(estimates)}")
    mu_med, sigma_med = median_pool(estimates)
    deviations = np.array([_kl_core(sigma_med, mu_med, e.loc_scat) for e in estimates])
    keep = max(1, plan.q // 2)
    chosen = np.sort(np.argsort(deviations, kind="stable")[:keep])
    pooled_rows = np.sort(
        np.concatenate([plan.assignments[b][estimates[b].subset] for b in chosen])
    )
    m = pooled_rows.shape[0]
    n_selected = int(sum(plan.sizes[b] for b in chosen))
    rows = Z[pooled_rows]
    sum_x = rows.sum(axis=0)
    cross = rows.T @ rows
    mu = sum_x / m
    scatter = cross - np.outer(sum_x, sum_x) / m
    c_alpha = consistency_factor(m, n_selected, p)
    loc_scat = LocationScatter.from_sigma(mu, c_alpha * scatter / (m - 1))
    return PooledRaw(
        loc_scat=loc_scat,
        subset=pooled_rows,
        c_alpha=c_alpha,
        contributing_blocks=tuple(int(b) + 1 for b in chosen),
        n_selected=n_selected,
    )


def blockwise_mcd(X, *, h_frac: float = 0.5, blocks: int = 1, rng=0) -> BlockwiseResult:
    """Robust location/scatter of ``X`` via block-parallel MCD.

    Parameters
    ----------
    X : array, shape (n, p)
        Raw data in original coordinates; ``n > 2p`` required.
    h_frac : float
        Coverage fraction in [0.5, 1) handed to :func:`h_from_fraction`
        within every block.
    blocks : int
        Number of blocks q.  ``default_block_count`` gives a sensible
        machine-dependent choice; q = 1 reduces to a single MCD fit
        followed by reweighting.
    rng : int or numpy Generator
        Seed (or generator) driving the single random element, the
        row shuffle.  Everything else is deterministic.

    Returns
    -------
    BlockwiseResult
        Reweighted estimate in original coordinates, per-row 0/1 inlier
        weights, the standardizer, the pooled raw estimate (standardized
        coordinates), and per-block diagnostics.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    if n <= 2 * p:
        raise TooFewObservations(f"need n > 2p, got n={n}, p={p}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(np.random.SeedSequence(int(rng)))
    standardizer = fit_standardizer(X)
    Z = standardize(X, standardizer)
    # Canonical row order: makes every accumulation below independent of
    # the caller's row ordering, bit for bit.
    order = np.lexsort(Z.T[::-1])
    Zc = Z[order]
    plan = split_blocks(n, blocks, rng, min_block_size=max(2 * (p + 1), _MIN_BLOCK_ROWS))

    def fit_block(b: int) -> RawEstimate:
        rows = plan.assignments[b]
        h = h_from_fraction(rows.shape[0], p, h_frac)
        return fit_mcd(Zc[rows], h)

    estimates = ordered_map(fit_block, range(plan.q))
    pooled = select_and_pool(Zc, plan, estimates)
    mu_med, sigma_med = median_pool(estimates)
    deviations = tuple(float(_kl_core(sigma_med, mu_med, e.loc_scat)) for e in estimates)
    refined, weights_c = reweight(Zc, pooled)
    weights = np.empty(n, dtype=bool)
    weights[order] = weights_c
    # The pooled subset indexes the canonical ordering; translate it to
    # the caller's row numbering before exposing it.
    pooled = replace(pooled, subset=np.sort(order[pooled.subset]))
    diagnostics = BlockDiagnostics(
        q=plan.q,
        block_sizes=plan.sizes,
        h_values=tuple(int(e.h) for e in estimates),
        block_dets=tuple(float(e.det_uncorrected) for e in estimates),
        kl_deviations=deviations,
        selected_blocks=pooled.contributing_blocks,
        pooled_h=pooled.h,
        inlier_count=int(weights.sum()),
    )
    return BlockwiseResult(
        estimate=destandardize_estimate(refined, standardizer),
        weights=weights,
        standardizer=standardizer,
        raw=pooled,
        diagnostics=diagnostics,
    )
