"""Randomized counterparts of a binary matrix with increasingly strict degree constraints.

Four levels, from loosest to strictest:

``density_only``
    same number of edges, placed uniformly.
``preserve_country_degrees``
    each country keeps its number of products, drawn uniformly.
``preserve_product_degrees``
    each product keeps its number of exporters.
``preserve_both``
    double-edge swaps ``(c1,p1),(c2,p2) -> (c1,p2),(c2,p1)``, which keep every
    row and column sum.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDistributionError, InputError
from .matrix import BipartiteMatrix
from .reflections import reflect
from .stats import pearson

log = logging.getLogger(__name__)


class NullLevel(str, enum.Enum):
    DENSITY_ONLY = "density_only"
    PRESERVE_COUNTRY_DEGREES = "preserve_country_degrees"
    PRESERVE_PRODUCT_DEGREES = "preserve_product_degrees"
    PRESERVE_BOTH = "preserve_both"


@dataclass(frozen=True)
class NullModelSpec:
    level: NullLevel
    n_samples: int
    seed: int = 0
    swap_factor: float = 10.0  # preserve_both: successful swaps per edge

    def __post_init__(self):
        try:
            object.__setattr__(self, "level", NullLevel(self.level))
        except ValueError:
            raise InputError(f"unknown null model level {self.level!r}") from None
        if isinstance(self.n_samples, bool) or int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise InputError(f"n_samples must be >= 1, got {self.n_samples!r}")
        if not self.swap_factor > 0:
            raise InputError("swap_factor must be positive")


@dataclass
class NullSamples:
    matrices: list[BipartiteMatrix]
    spec: NullModelSpec
    no_rewiring_possible: bool = False
    swaps: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __getitem__(self, i):
        return self.matrices[i]


def _rng(seed: int, sample: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(sample,)))


def _density_only(adj: np.ndarray, rng) -> np.ndarray:
    n_c, n_p = adj.shape
    out = np.zeros(n_c * n_p, dtype=bool)
    out[rng.choice(n_c * n_p, size=int(adj.sum()), replace=False)] = True
    return out.reshape(n_c, n_p)


def _preserve_rows(adj: np.ndarray, rng) -> np.ndarray:
    deg = adj.sum(axis=1)
    ranks = rng.random(adj.shape).argsort(axis=1).argsort(axis=1)
    return ranks < deg[:, None]


def can_swap(adj: np.ndarray) -> bool:
    """True if some double-edge swap is legal.

    A swap needs rows c1, c2 and columns p1, p2 with p1 only in c1 and p2 only
    in c2, i.e. two rows neither of which contains the other.
    """
    a = adj.astype(np.int64)
    overlap = a @ a.T
    deg = a.sum(axis=1)
    smaller = np.minimum(deg[:, None], deg[None, :])
    return bool(np.any(overlap < smaller))


def _swap_chain(adj: np.ndarray, n_swaps: int, rng) -> tuple[np.ndarray, int]:
    """Rewire by double-edge swaps until ``n_swaps`` have been accepted.

    Each round pairs the non-empty rows at random (disjoint pairs) and proposes
    one swap per pair from a uniformly chosen edge of each row. Rows in a round
    are distinct, so accepted swaps never interact and can be applied at once.
    The proposal is symmetric given fixed degrees, so the chain targets the
    uniform distribution over matrices with these margins.
    """
    a = adj.copy()
    rows = np.flatnonzero(a.any(axis=1))
    deg = a.sum(axis=1)
    edge_rows, edge_cols = np.nonzero(a)  # row-major, grouped by row
    start = np.zeros(a.shape[0], dtype=np.int64)
    start[1:] = np.cumsum(deg)[:-1]
    cols = edge_cols.copy()
    half = rows.size // 2
    done = 0
    rounds = 0
    max_rounds = 1000 + 200 * math.ceil(n_swaps / max(half, 1))
    while done < n_swaps and rounds < max_rounds:
        rounds += 1
        perm = rng.permutation(rows)
        r1, r2 = perm[:half], perm[half : 2 * half]
        i1 = start[r1] + (rng.random(half) * deg[r1]).astype(np.int64)
        i2 = start[r2] + (rng.random(half) * deg[r2]).astype(np.int64)
        p1, p2 = cols[i1], cols[i2]
        ok = ~a[r1, p2] & ~a[r2, p1]
        if done + ok.sum() > n_swaps:
            ok &= np.cumsum(ok) <= n_swaps - done
        r1, r2, p1, p2, i1, i2 = r1[ok], r2[ok], p1[ok], p2[ok], i1[ok], i2[ok]
        a[r1, p1] = False
        a[r2, p2] = False
        a[r1, p2] = True
        a[r2, p1] = True
        cols[i1], cols[i2] = p2, p1
        done += int(ok.sum())
    if done < n_swaps:
        log.warning("swap chain stopped after %d of %d swaps", done, n_swaps)
    return a, done


def randomize(m: BipartiteMatrix, spec: NullModelSpec) -> NullSamples:
    """Draw ``spec.n_samples`` null matrices; sample ``i`` uses stream ``(spec.seed, i)``.

    For ``preserve_both`` on a matrix where no swap is legal (nested rows, e.g.
    a complete matrix) the samples are copies of ``m`` and
    ``no_rewiring_possible`` is set.
    """
    if m.n_edges == 0:
        raise InputError("cannot randomize a matrix with no edges")
    adj = m.adjacency
    out = NullSamples([], spec)
    if spec.level is NullLevel.PRESERVE_BOTH and not can_swap(adj):
        out.no_rewiring_possible = True
        out.matrices = [m.with_adjacency(adj) for _ in range(spec.n_samples)]
        out.swaps = [0] * spec.n_samples
        return out
    n_swaps = math.ceil(spec.swap_factor * m.n_edges)
    # pair along whichever side has more nodes: more proposals per round
    transpose = adj.shape[1] > adj.shape[0]
    for i in range(spec.n_samples):
        rng = _rng(spec.seed, i)
        if spec.level is NullLevel.DENSITY_ONLY:
            new = _density_only(adj, rng)
        elif spec.level is NullLevel.PRESERVE_COUNTRY_DEGREES:
            new = _preserve_rows(adj, rng)
        elif spec.level is NullLevel.PRESERVE_PRODUCT_DEGREES:
            new = _preserve_rows(adj.T, rng).T
        else:
            if transpose:
                new, done = _swap_chain(adj.T, n_swaps, rng)
                new = new.T
            else:
                new, done = _swap_chain(adj, n_swaps, rng)
            out.swaps.append(done)
        out.matrices.append(m.with_adjacency(new))
    return out


def k0_k1_correlation(m: BipartiteMatrix) -> float:
    """Pearson correlation between diversification and mean ubiquity of exports."""
    traj = reflect(m, depth=1)
    return pearson(traj.country_levels[0], traj.country_levels[1])


@dataclass
class NullComparison:
    observed: float
    null_values: np.ndarray  # NaN where a sample's statistic is undefined
    p_value: float
    no_rewiring_possible: bool = False

    @property
    def n_degenerate(self) -> int:
        return int(np.isnan(self.null_values).sum())

    @property
    def mean(self) -> float:
        v = self.null_values[~np.isnan(self.null_values)]
        return float(v.mean()) if v.size else math.nan

    @property
    def stdev(self) -> float:
        v = self.null_values[~np.isnan(self.null_values)]
        return float(v.std(ddof=0)) if v.size else math.nan


def null_comparison(m: BipartiteMatrix, spec: NullModelSpec, statistic=k0_k1_correlation) -> NullComparison:
    """Compare ``statistic`` on ``m`` with its distribution over null samples.

    The p-value is one-sided towards more negative values: the fraction of
    defined null statistics that are <= the observed one.

    Raises:
        DegenerateDistributionError: if the statistic is undefined on ``m``.
    """
    if spec.n_samples < 20:
        log.warning("only %d null samples; the p-value will be coarse", spec.n_samples)
    observed = statistic(m)
    samples = randomize(m, spec)
    values = np.empty(len(samples))
    for i, s in enumerate(samples):
        try:
            values[i] = statistic(s)
        except DegenerateDistributionError:
            values[i] = math.nan
    defined = values[~np.isnan(values)]
    p = float(np.mean(defined <= observed)) if defined.size else math.nan
    return NullComparison(observed, values, p, samples.no_rewiring_possible)
