"""Tripartite capability model.

Countries hold capabilities, products require them, and a country makes a
product exactly when it holds every capability the product requires. Both
incidence matrices are i.i.d. Bernoulli: a country holds each capability with
probability ``r``, a product requires each capability with probability ``q``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Mapping

import numpy as np

from .errors import InputError
from .matrix import BipartiteMatrix
from .reflections import reflect
from .stats import is_constant, safe_pearson, safe_spearman


@dataclass(frozen=True)
class CapabilityParams:
    n_countries: int = 150
    n_products: int = 1000
    n_capabilities: int = 60
    r: float = 0.7
    q: float = 0.05

    def __post_init__(self):
        for name in ("r", "q"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0.0 <= v <= 1.0):
                raise InputError(f"{name} must be a probability in [0, 1], got {v!r}")
        for name in ("n_countries", "n_products", "n_capabilities"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise InputError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def expected_density(self) -> float:
        """Probability that a given country can make a given product."""
        return (1.0 - self.q + self.q * self.r) ** self.n_capabilities


# 3x3 grid of (r, q) around the defaults; every cell sits at 28-55% density.
DEFAULT_GRID: dict[str, tuple] = {
    "r": (0.65, 0.70, 0.75),
    "q": (0.04, 0.05, 0.06),
}


@dataclass(frozen=True, eq=False)
class CapabilityWorld:
    country_capabilities: np.ndarray  # (countries, capabilities), bool
    product_requirements: np.ndarray  # (products, capabilities), bool
    params: CapabilityParams
    seed: int
    replicate: tuple[int, ...] = ()

    @property
    def capability_counts(self) -> np.ndarray:
        return self.country_capabilities.sum(axis=1)


def _rng(seed: int, key: tuple[int, ...] = ()) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def sample_world(params: CapabilityParams, seed: int, key: tuple[int, ...] = ()) -> CapabilityWorld:
    """Draw C_ca and Pi_pa. The stream is fixed by ``(seed, key)`` alone."""
    rng = _rng(seed, key)
    c = rng.random((params.n_countries, params.n_capabilities)) < params.r
    p = rng.random((params.n_products, params.n_capabilities)) < params.q
    return CapabilityWorld(c, p, params, int(seed), tuple(key))


def derive_matrix(world: CapabilityWorld) -> BipartiteMatrix:
    """M_cp = 1 iff every capability required by p is held by c."""
    held = world.country_capabilities.astype(np.int64)
    req = world.product_requirements.astype(np.int64)
    covered = held @ req.T  # required capabilities of p that c holds
    adj = covered == req.sum(axis=1)[None, :]
    pw = len(str(max(world.params.n_products - 1, 0)))
    cw = len(str(max(world.params.n_countries - 1, 0)))
    countries = [f"c{i:0{cw}d}" for i in range(world.params.n_countries)]
    products = [f"p{j:0{pw}d}" for j in range(world.params.n_products)]
    return BipartiteMatrix(countries, products, adj)


@dataclass
class ReplicateStats:
    index: int
    capability_count: np.ndarray
    k_c0: np.ndarray
    k_c1: np.ndarray
    n_excluded: int
    degenerate: str | None = None  # reason, when the replicate is left out of pooled stats

    @property
    def pearson_k0_k1(self) -> float:
        return safe_pearson(self.k_c0, self.k_c1)


@dataclass
class EnsembleResult:
    params: CapabilityParams
    seed: int
    replicates: list[ReplicateStats]
    pearson_k0_k1: float = math.nan
    spearman_cap_k0: float = math.nan
    spearman_cap_k1: float = math.nan

    @property
    def degenerate(self) -> bool:
        return all(r.degenerate for r in self.replicates)

    @property
    def n_excluded_countries(self) -> int:
        return sum(r.n_excluded for r in self.replicates)

    @property
    def degenerate_replicates(self) -> list[int]:
        return [r.index for r in self.replicates if r.degenerate]

    def rows(self):
        """Yield ``(replicate, country, capability_count, k_c0, k_c1)`` in a fixed order."""
        for rep in self.replicates:
            for i, (n, k0, k1) in enumerate(zip(rep.capability_count, rep.k_c0, rep.k_c1)):
                yield rep.index, i, int(n), float(k0), float(k1)


def _run_replicate(params: CapabilityParams, seed: int, key: tuple[int, ...], index: int) -> ReplicateStats:
    world = sample_world(params, seed, key + (index,))
    m = derive_matrix(world)
    caps = world.capability_counts
    if m.n_edges == 0:
        empty = np.zeros(0)
        return ReplicateStats(index, empty.astype(int), empty, empty, params.n_countries, "no edges")
    traj = reflect(m, depth=1)
    keep = np.isin(np.asarray(m.countries), np.asarray(traj.countries))
    k0, k1 = traj.country_levels[0], traj.country_levels[1]
    reason = None
    if is_constant(k0) or is_constant(k1):
        reason = "zero variance in k_c0 or k_c1"
    elif is_constant(caps[keep]):
        reason = "zero variance in capability counts"
    return ReplicateStats(index, caps[keep], k0, k1, int((~keep).sum()), reason)


def ensemble_statistics(
    params: CapabilityParams,
    n_replicates: int,
    seed: int,
    key: tuple[int, ...] = (),
    n_jobs: int = 1,
) -> EnsembleResult:
    """Simulate ``n_replicates`` worlds and pool (k_c0, k_c1, capability count) over them.

    Replicate ``i`` draws from ``(seed, key + (i,))``, so results do not depend on
    ``n_jobs`` or execution order. Countries that make nothing are dropped and
    counted; replicates with zero variance are flagged and left out of the
    pooled correlations.
    """
    if int(n_replicates) != n_replicates or n_replicates < 1:
        raise InputError(f"n_replicates must be >= 1, got {n_replicates}")
    key = tuple(key)
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            reps = list(pool.map(lambda i: _run_replicate(params, seed, key, i), range(n_replicates)))
    else:
        reps = [_run_replicate(params, seed, key, i) for i in range(n_replicates)]
    result = EnsembleResult(params, int(seed), reps)
    good = [r for r in reps if not r.degenerate]
    if good:
        caps = np.concatenate([r.capability_count for r in good])
        k0 = np.concatenate([r.k_c0 for r in good])
        k1 = np.concatenate([r.k_c1 for r in good])
        result.pearson_k0_k1 = safe_pearson(k0, k1)
        result.spearman_cap_k0 = safe_spearman(caps, k0)
        result.spearman_cap_k1 = safe_spearman(caps, k1)
    return result


@dataclass(frozen=True)
class SweepConfig:
    """Parameter grid plus replicate count and master seed.

    ``grid`` maps any :class:`CapabilityParams` field to a list of values; fields
    not listed take ``base`` values. Cells are the Cartesian product in field
    declaration order.
    """

    grid: Mapping[str, tuple] = field(default_factory=lambda: dict(DEFAULT_GRID))
    replicates: int = 20
    seed: int = 0
    base: CapabilityParams = CapabilityParams()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SweepConfig":
        """Parse and fully validate a JSON-style config before anything is sampled."""
        allowed = {"grid", "replicates", "seed", "base"}
        unknown = set(data) - allowed
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        names = [f.name for f in fields(CapabilityParams)]
        base_raw = dict(data.get("base", {}))
        bad = set(base_raw) - set(names)
        if bad:
            raise InputError(f"unknown base parameters: {sorted(bad)}")
        base = CapabilityParams(**base_raw)
        grid_raw = data.get("grid", DEFAULT_GRID)
        bad = set(grid_raw) - set(names)
        if bad:
            raise InputError(f"unknown grid parameters: {sorted(bad)}")
        grid = {}
        for name, values in grid_raw.items():
            if isinstance(values, (str, bytes)) or not hasattr(values, "__iter__"):
                values = [values]
            values = tuple(values)
            if not values:
                raise InputError(f"grid entry {name!r} is empty")
            grid[name] = values
        reps = data.get("replicates", 20)
        if isinstance(reps, bool) or not isinstance(reps, int) or reps < 1:
            raise InputError(f"replicates must be a positive integer, got {reps!r}")
        seed = data.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise InputError(f"seed must be a non-negative integer, got {seed!r}")
        config = cls(grid, reps, seed, base)
        config.cells()  # validates every combination
        return config

    def to_dict(self) -> dict:
        return {
            "grid": {k: list(v) for k, v in self.grid.items()},
            "replicates": self.replicates,
            "seed": self.seed,
            "base": asdict(self.base),
        }

    def cells(self) -> list[CapabilityParams]:
        names = [f.name for f in fields(CapabilityParams) if f.name in self.grid]
        out = []
        for combo in itertools.product(*(self.grid[n] for n in names)):
            out.append(replace(self.base, **dict(zip(names, combo))))
        return out


def run_sweep(config: SweepConfig, n_jobs: int = 1) -> list[EnsembleResult]:
    """One :class:`EnsembleResult` per grid cell; cell ``j`` uses stream key ``(j,)``."""
    return [
        ensemble_statistics(params, config.replicates, config.seed, key=(j,), n_jobs=n_jobs)
        for j, params in enumerate(config.cells())
    ]
