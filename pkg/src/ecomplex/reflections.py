"""The method of reflections.

Starting from the degrees of the binary matrix, each iteration replaces every
node's value by the mean of its neighbours' previous values::

    k_c,N = (1 / k_c,0) * sum_p M_cp k_p,N-1
    k_p,N = (1 / k_p,0) * sum_c M_cp k_c,N-1

Even levels of the country vector generalise diversification, odd levels
generalise the ubiquity of a country's exports. Raw values contract towards a
constant as N grows; nothing is rescaled inside the iteration, so compare
levels through :func:`normalize`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateDistributionError,
    InputError,
    InsufficientOverlapError,
    NothingToIterateError,
)
from .matrix import BipartiteMatrix
from .stats import descending_ranks, is_constant, safe_pearson, spearman

DEFAULT_DEPTH = 19


@dataclass(frozen=True, eq=False)
class ReflectionTrajectory:
    """Country and product vectors for levels ``0..depth``.

    ``country_levels[N]`` is k_{c,N} over :attr:`countries`; likewise for
    products. Nodes with degree zero are excluded up front and listed in
    ``excluded_countries`` / ``excluded_products``.
    """

    countries: tuple[str, ...]
    products: tuple[str, ...]
    country_levels: np.ndarray
    product_levels: np.ndarray
    excluded_countries: tuple[str, ...] = ()
    excluded_products: tuple[str, ...] = ()

    def __post_init__(self):
        cl = np.asarray(self.country_levels, dtype=float)
        pl = np.asarray(self.product_levels, dtype=float)
        if cl.ndim != 2 or cl.shape[1] != len(self.countries):
            raise InputError("country_levels must be (depth + 1, n_countries)")
        if pl.ndim != 2 or pl.shape[1] != len(self.products) or pl.shape[0] != cl.shape[0]:
            raise InputError("product_levels must be (depth + 1, n_products)")
        object.__setattr__(self, "country_levels", cl)
        object.__setattr__(self, "product_levels", pl)

    @property
    def depth(self) -> int:
        return self.country_levels.shape[0] - 1

    @property
    def country_vectors(self) -> list[np.ndarray]:
        return list(self.country_levels)

    @property
    def product_vectors(self) -> list[np.ndarray]:
        return list(self.product_levels)

    def check_level(self, level: int) -> int:
        if not 0 <= level <= self.depth:
            raise InputError(f"level {level} outside 0..{self.depth}")
        return int(level)

    def country_values(self, level: int) -> dict[str, float]:
        self.check_level(level)
        return dict(zip(self.countries, self.country_levels[level].tolist()))

    def product_values(self, level: int) -> dict[str, float]:
        self.check_level(level)
        return dict(zip(self.products, self.product_levels[level].tolist()))


def reflect(m: BipartiteMatrix, depth: int = DEFAULT_DEPTH) -> ReflectionTrajectory:
    """Run the method of reflections on ``m`` to ``depth`` iterations.

    Raises:
        InputError: if ``depth`` is negative.
        NothingToIterateError: if ``m`` has no edges.
    """
    if int(depth) != depth or depth < 0:
        raise InputError(f"depth must be a non-negative integer, got {depth}")
    depth = int(depth)
    if m.n_edges == 0:
        raise NothingToIterateError("nothing to iterate: matrix has no edges")

    adj = m.adjacency
    keep_c = adj.any(axis=1)
    keep_p = adj.any(axis=0)
    a = adj[np.ix_(keep_c, keep_p)].astype(float)
    kc0 = a.sum(axis=1)
    kp0 = a.sum(axis=0)

    kc = np.empty((depth + 1, kc0.size))
    kp = np.empty((depth + 1, kp0.size))
    kc[0], kp[0] = kc0, kp0
    for n in range(1, depth + 1):
        kc[n] = (a @ kp[n - 1]) / kc0
        kp[n] = (a.T @ kc[n - 1]) / kp0

    return ReflectionTrajectory(
        countries=tuple(c for c, k in zip(m.countries, keep_c) if k),
        products=tuple(p for p, k in zip(m.products, keep_p) if k),
        country_levels=kc,
        product_levels=kp,
        excluded_countries=tuple(c for c, k in zip(m.countries, keep_c) if not k),
        excluded_products=tuple(p for p, k in zip(m.products, keep_p) if not k),
    )


@dataclass(frozen=True)
class NormalizedScores:
    countries: tuple[str, ...]
    values: np.ndarray
    level: int
    mean_used: float
    stdev_used: float

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.countries, self.values.tolist()))


def normalize(trajectory: ReflectionTrajectory, level: int) -> NormalizedScores:
    """Z-score k_{c,level} across countries using the population standard deviation.

    Raises:
        DegenerateDistributionError: if every country has the same value.
    """
    level = trajectory.check_level(level)
    x = trajectory.country_levels[level]
    if is_constant(x):
        raise DegenerateDistributionError(f"level {level} has zero variance; cannot normalize")
    mean = float(x.mean())
    sd = float(x.std(ddof=0))
    return NormalizedScores(trajectory.countries, (x - mean) / sd, level, mean, sd)


@dataclass(frozen=True)
class RankShift:
    level_a: int
    level_b: int
    correlation: float
    rows: list[tuple[str, float, float]]  # (country, rank at level_a, rank at level_b)

    @property
    def deltas(self) -> dict[str, float]:
        return {c: rb - ra for c, ra, rb in self.rows}


def rank_shift(trajectory: ReflectionTrajectory, level_a: int, level_b: int) -> RankShift:
    """Compare country rankings (1 = largest value) at two levels of the same parity."""
    level_a = trajectory.check_level(level_a)
    level_b = trajectory.check_level(level_b)
    if (level_a - level_b) % 2:
        raise InputError(
            f"levels {level_a} and {level_b} have different parity; rankings are not comparable"
        )
    xa = trajectory.country_levels[level_a]
    xb = trajectory.country_levels[level_b]
    ra, rb = descending_ranks(xa), descending_ranks(xb)
    rho = 1.0 if level_a == level_b else spearman(xa, xb)
    rows = [(c, float(a), float(b)) for c, a, b in zip(trajectory.countries, ra, rb)]
    return RankShift(level_a, level_b, rho, rows)


@dataclass(frozen=True)
class ExternalCorrelation:
    levels: tuple[int, ...]
    correlations: dict[int, float]
    n_overlap: int
    missing: tuple[str, ...]
    degenerate_levels: tuple[int, ...]


def correlate_external(
    trajectory: ReflectionTrajectory,
    series: Mapping[str, float],
    levels: Sequence[int] | None = None,
    log_transform: bool = False,
) -> ExternalCorrelation:
    """Pearson correlation between an external country series and k_{c,N} at each level.

    Countries in the trajectory but not in ``series`` are listed in ``missing``.
    Levels where either side has zero variance get NaN and are listed in
    ``degenerate_levels``.

    Raises:
        InsufficientOverlapError: if fewer than three countries are shared.
        InputError: if ``log_transform`` is set and a shared value is not positive.
    """
    levels = tuple(range(trajectory.depth + 1)) if levels is None else tuple(levels)
    for lv in levels:
        trajectory.check_level(lv)
    idx = [i for i, c in enumerate(trajectory.countries) if c in series]
    missing = tuple(c for c in trajectory.countries if c not in series)
    if len(idx) < 3:
        raise InsufficientOverlapError(f"insufficient overlap: {len(idx)} shared countries")
    y = np.array([series[trajectory.countries[i]] for i in idx], dtype=float)
    if not np.all(np.isfinite(y)):
        raise InputError("series contains non-finite values")
    if log_transform:
        if np.any(y <= 0):
            raise InputError("log transform requires strictly positive series values")
        y = np.log(y)
    corr = {}
    for lv in levels:
        corr[lv] = safe_pearson(trajectory.country_levels[lv][idx], y)
    degenerate = tuple(lv for lv in levels if np.isnan(corr[lv]))
    return ExternalCorrelation(levels, corr, len(idx), missing, degenerate)


def random_walk_check(m: BipartiteMatrix, trajectory: ReflectionTrajectory, level: int) -> float:
    """Largest gap between ``trajectory`` at ``level`` and the N-step random-walk composition.

    Builds the row-stochastic country->product operator ``M_cp / k_c,0`` and
    product->country operator ``M_cp / k_p,0``, multiplies them into a single
    N-step operator per side, and applies it to the level-0 degrees.
    """
    if level < 1:
        raise InputError("random-walk check needs level >= 1")
    trajectory.check_level(level)
    ci = {c: i for i, c in enumerate(m.countries)}
    pi = {p: j for j, p in enumerate(m.products)}
    try:
        rows = [ci[c] for c in trajectory.countries]
        cols = [pi[p] for p in trajectory.products]
    except KeyError as exc:
        raise InputError(f"trajectory node {exc.args[0]!r} not in matrix") from None
    a = m.adjacency[np.ix_(rows, cols)].astype(float)
    kc0, kp0 = a.sum(axis=1), a.sum(axis=0)
    s_cp = a / kc0[:, None]
    s_pc = a.T / kp0[:, None]

    # walk ending on countries: operators alternate c<-p<-c<-p...
    op_c = np.eye(len(rows))
    op_p = np.eye(len(cols))
    for step in range(level):
        if step % 2 == 0:
            op_c, op_p = op_c @ s_cp, op_p @ s_pc
        else:
            op_c, op_p = op_c @ s_pc, op_p @ s_cp
    if level % 2 == 0:
        comp_c, comp_p = op_c @ kc0, op_p @ kp0
    else:
        comp_c, comp_p = op_c @ kp0, op_p @ kc0
    return float(
        max(
            np.max(np.abs(comp_c - trajectory.country_levels[level])),
            np.max(np.abs(comp_p - trajectory.product_levels[level])),
        )
    )
