"""Export tables, revealed comparative advantage and the binary country-product matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError, NoDataError

Key = tuple[str, str]


def _validate_entries(entries: Mapping[Key, float], what: str) -> dict[Key, float]:
    clean = {}
    for key, value in entries.items():
        if not (isinstance(key, tuple) and len(key) == 2):
            raise InputError(f"{what} keys must be (country, product) pairs, got {key!r}")
        value = float(value)
        if not math.isfinite(value) or value < 0:
            raise InputError(f"{what} value for {key} must be finite and >= 0, got {value}")
        clean[(str(key[0]), str(key[1]))] = value
    return clean


def _dense(entries: Mapping[Key, float]) -> tuple[tuple[str, ...], tuple[str, ...], np.ndarray]:
    countries = tuple(sorted({c for c, _ in entries}))
    products = tuple(sorted({p for _, p in entries}))
    ci = {c: i for i, c in enumerate(countries)}
    pi = {p: j for j, p in enumerate(products)}
    values = np.zeros((len(countries), len(products)))
    for (c, p), v in entries.items():
        values[ci[c], pi[p]] = v
    return countries, products, values


@dataclass(frozen=True)
class ExportVolumeTable:
    """Export values x_cp for one year, keyed by (country, product)."""

    year: int
    entries: Mapping[Key, float]

    def __post_init__(self):
        object.__setattr__(self, "entries", _validate_entries(self.entries, "export"))

    @classmethod
    def from_records(cls, year: int, records: Iterable[tuple[str, str, float]]) -> "ExportVolumeTable":
        """Build a table from ``(country, product, value)`` triples, rejecting duplicate keys."""
        entries: dict[Key, float] = {}
        for country, product, value in records:
            key = (str(country), str(product))
            if key in entries:
                raise InputError(f"duplicate entry for {key} in year {year}")
            entries[key] = value
        return cls(year, entries)

    def __len__(self):
        return len(self.entries)

    @property
    def countries(self) -> tuple[str, ...]:
        return tuple(sorted({c for c, _ in self.entries}))

    @property
    def products(self) -> tuple[str, ...]:
        return tuple(sorted({p for _, p in self.entries}))

    def dense(self) -> tuple[tuple[str, ...], tuple[str, ...], np.ndarray]:
        """Return ``(countries, products, values)`` with missing cells filled by zero."""
        return _dense(self.entries)


@dataclass(frozen=True)
class RcaTable:
    year: int
    entries: Mapping[Key, float]

    def __post_init__(self):
        object.__setattr__(self, "entries", _validate_entries(self.entries, "RCA"))

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, key: Key) -> float:
        return self.entries[key]

    def dense(self) -> tuple[tuple[str, ...], tuple[str, ...], np.ndarray]:
        return _dense(self.entries)


@dataclass(frozen=True, eq=False)
class BipartiteMatrix:
    """Binary country-product adjacency.

    Countries and products keep their position in the index even when they
    have no edges; those are reported by :attr:`isolated_countries` and
    :attr:`isolated_products` rather than dropped.
    """

    countries: tuple[str, ...]
    products: tuple[str, ...]
    adjacency: np.ndarray
    threshold: float | None = None
    year: int | None = None
    _edges: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        countries = tuple(str(c) for c in self.countries)
        products = tuple(str(p) for p in self.products)
        if len(set(countries)) != len(countries):
            raise InputError("duplicate country ids")
        if len(set(products)) != len(products):
            raise InputError("duplicate product ids")
        adj = np.array(self.adjacency, dtype=bool, copy=True)
        if adj.shape != (len(countries), len(products)):
            raise InputError(
                f"adjacency shape {adj.shape} does not match "
                f"{len(countries)} countries x {len(products)} products"
            )
        adj.setflags(write=False)
        object.__setattr__(self, "countries", countries)
        object.__setattr__(self, "products", products)
        object.__setattr__(self, "adjacency", adj)
        rows, cols = np.nonzero(adj)
        object.__setattr__(self, "_edges", frozenset(zip(rows.tolist(), cols.tolist())))

    @classmethod
    def from_edges(cls, countries, products, edges, threshold=None, year=None) -> "BipartiteMatrix":
        """Build from ``(country_index, product_index)`` pairs.

        Raises:
            InputError: if an index is out of bounds or an edge is repeated.
        """
        countries, products = tuple(countries), tuple(products)
        adj = np.zeros((len(countries), len(products)), dtype=bool)
        for c, p in edges:
            if not (0 <= c < len(countries) and 0 <= p < len(products)):
                raise InputError(f"edge ({c}, {p}) out of bounds")
            if adj[c, p]:
                raise InputError(f"duplicate edge ({c}, {p})")
            adj[c, p] = True
        return cls(countries, products, adj, threshold, year)

    @classmethod
    def from_labeled_edges(cls, edges: Iterable[Key], countries=None, products=None, **kw) -> "BipartiteMatrix":
        """Build from ``(country_id, product_id)`` pairs; the index defaults to the sorted ids seen."""
        edges = list(edges)
        if countries is None:
            countries = sorted({c for c, _ in edges})
        if products is None:
            products = sorted({p for _, p in edges})
        ci = {c: i for i, c in enumerate(countries)}
        pi = {p: j for j, p in enumerate(products)}
        try:
            idx = [(ci[c], pi[p]) for c, p in edges]
        except KeyError as exc:
            raise InputError(f"edge refers to unknown id {exc.args[0]!r}") from None
        return cls.from_edges(countries, products, idx, **kw)

    @property
    def shape(self) -> tuple[int, int]:
        return self.adjacency.shape

    @property
    def edges(self) -> frozenset:
        return self._edges

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    @property
    def isolated_countries(self) -> tuple[str, ...]:
        deg = self.adjacency.sum(axis=1)
        return tuple(c for c, d in zip(self.countries, deg) if d == 0)

    @property
    def isolated_products(self) -> tuple[str, ...]:
        deg = self.adjacency.sum(axis=0)
        return tuple(p for p, d in zip(self.products, deg) if d == 0)

    def labeled_edges(self) -> list[Key]:
        """Edges as ``(country_id, product_id)`` in row-major order."""
        rows, cols = np.nonzero(self.adjacency)
        return [(self.countries[r], self.products[c]) for r, c in zip(rows, cols)]

    def with_adjacency(self, adjacency: np.ndarray) -> "BipartiteMatrix":
        return BipartiteMatrix(self.countries, self.products, adjacency, self.threshold, self.year)

    def __eq__(self, other):
        if not isinstance(other, BipartiteMatrix):
            return NotImplemented
        return (
            self.countries == other.countries
            and self.products == other.products
            and np.array_equal(self.adjacency, other.adjacency)
        )

    __hash__ = None


def compute_rca(table: ExportVolumeTable) -> RcaTable:
    """Revealed comparative advantage of every (country, product) cell in ``table``.

    RCA_cp = (x_cp / sum_p x_cp) / (sum_c x_cp / sum_cp x_cp). Countries with zero
    total exports get RCA 0 everywhere.

    Raises:
        NoDataError: if the table is empty or world exports sum to zero.
    """
    if len(table) == 0:
        raise NoDataError("no data")
    countries, products, x = table.dense()
    world = x.sum()
    if world <= 0:
        raise NoDataError("no data: world exports sum to zero")
    country_tot = x.sum(axis=1, keepdims=True)
    product_share = x.sum(axis=0, keepdims=True) / world
    with np.errstate(divide="ignore", invalid="ignore"):
        rca = (x / country_tot) / product_share
    rca[~np.isfinite(rca)] = 0.0
    rca[x == 0] = 0.0
    ci = {c: i for i, c in enumerate(countries)}
    pi = {p: j for j, p in enumerate(products)}
    return RcaTable(table.year, {(c, p): float(rca[ci[c], pi[p]]) for c, p in table.entries})


def threshold_to_binary(rca: RcaTable, threshold: float = 1.0) -> BipartiteMatrix:
    """Binary matrix with an edge wherever RCA >= ``threshold``."""
    if not threshold > 0:
        raise InputError(f"threshold must be positive, got {threshold}")
    countries, products, values = rca.dense()
    return BipartiteMatrix(countries, products, values >= threshold, float(threshold), rca.year)


def build_matrix(table: ExportVolumeTable, threshold: float = 1.0) -> BipartiteMatrix:
    return threshold_to_binary(compute_rca(table), threshold)


def diversification(m: BipartiteMatrix) -> np.ndarray:
    """Number of products each country exports (row sums), in ``m.countries`` order."""
    return m.adjacency.sum(axis=1).astype(np.int64)


def ubiquity(m: BipartiteMatrix) -> np.ndarray:
    """Number of countries exporting each product (column sums), in ``m.products`` order."""
    return m.adjacency.sum(axis=0).astype(np.int64)
