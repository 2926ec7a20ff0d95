"""Empirical analyses on top of the reflection vectors.

Labor-input diversity of export baskets, the growth regression

    log(GDP(t+dt) / GDP(t)) = a + b1 GDP(t) + b2 k_c,N(t) + b3 k_c,N+1(t),

concentration baselines (Herfindahl, entropy) and the new-export analysis
relating a country's structure at t0 to the products it starts exporting by t1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CollinearityError, InputError, InsufficientOverlapError
from .matrix import BipartiteMatrix, ExportVolumeTable, compute_rca, threshold_to_binary
from .reflections import ReflectionTrajectory, reflect
from .stats import is_constant, safe_pearson

MIN_REGRESSION_COUNTRIES = 8


@dataclass(frozen=True)
class CountrySeries:
    values: Mapping[str, float]
    label: str = ""
    year: int | None = None

    def __post_init__(self):
        clean = {}
        for k, v in self.values.items():
            v = float(v)
            if not math.isfinite(v):
                raise InputError(f"{self.label or 'series'}: non-finite value for {k!r}")
            clean[str(k)] = v
        object.__setattr__(self, "values", clean)

    def __contains__(self, country):
        return country in self.values

    def __getitem__(self, country):
        return self.values[country]

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class ProductAttributeMap:
    """Product -> set of attribute ids (e.g. employment categories)."""

    attributes: Mapping[str, frozenset]

    def __post_init__(self):
        clean = {}
        for p, attrs in self.attributes.items():
            attrs = frozenset(attrs)
            if not attrs:
                raise InputError(f"product {p!r} has an empty attribute set")
            clean[str(p)] = attrs
        object.__setattr__(self, "attributes", clean)

    @classmethod
    def from_pairs(cls, pairs) -> "ProductAttributeMap":
        acc: dict[str, set] = {}
        for product, attribute in pairs:
            acc.setdefault(str(product), set()).add(str(attribute))
        return cls(acc)

    def size(self, product: str) -> int:
        return len(self.attributes[product])

    def unmapped(self, products) -> list[str]:
        return [p for p in products if p not in self.attributes]


# --- labor-input diversity -------------------------------------------------


@dataclass
class LaborDiversity:
    averages: dict[str, float]
    coverage: dict[str, float]  # mapped share of each country's exported products
    overall_coverage: float
    excluded: list[str]
    unmapped_products: list[str]
    correlations: dict[int, float]

    @property
    def degenerate_levels(self) -> list[int]:
        return [lv for lv, r in self.correlations.items() if math.isnan(r)]


def labor_diversity(
    m: BipartiteMatrix,
    attrs: ProductAttributeMap,
    depth: int = 2,
    trajectory: ReflectionTrajectory | None = None,
) -> LaborDiversity:
    """Mean attribute-set size over each country's mapped exports, correlated with k_{c,0..depth}.

    Countries exporting no mapped product are excluded and listed. Levels at
    which the averages or k values are constant get a NaN correlation.
    """
    if trajectory is None:
        trajectory = reflect(m, depth)
    sizes = np.array([len(attrs.attributes.get(p, ())) for p in m.products], dtype=float)
    mapped = sizes > 0
    adj = m.adjacency
    averages, coverage, excluded = {}, {}, []
    total_exported = total_mapped = 0
    for i, c in enumerate(m.countries):
        row = adj[i]
        n_exp = int(row.sum())
        n_map = int((row & mapped).sum())
        total_exported += n_exp
        total_mapped += n_map
        if n_exp:
            coverage[c] = n_map / n_exp
        if n_map == 0:
            excluded.append(c)
            continue
        averages[c] = float(sizes[row & mapped].mean())
    pos = [i for i, c in enumerate(trajectory.countries) if c in averages]
    y = np.array([averages[trajectory.countries[i]] for i in pos])
    correlations = {
        lv: safe_pearson(trajectory.country_levels[lv][pos], y) if len(pos) >= 2 else math.nan
        for lv in range(trajectory.depth + 1)
    }
    used = {p for i, p in enumerate(m.products) if adj[:, i].any()}
    return LaborDiversity(
        averages=averages,
        coverage=coverage,
        overall_coverage=total_mapped / total_exported if total_exported else 0.0,
        excluded=excluded,
        unmapped_products=sorted(attrs.unmapped(used)),
        correlations=correlations,
    )


# --- least squares ---------------------------------------------------------


@dataclass
class OLSFit:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    r_squared: float
    fitted: np.ndarray
    residuals: np.ndarray


def ols(x: np.ndarray, y: np.ndarray, names: Sequence[str]) -> OLSFit:
    """Least squares through the normal equations.

    Columns are scaled to unit norm before forming X'X, and the solution gets
    one step of iterative refinement; both keep levels like GDP (~1e4) from
    swamping the conditioning.

    Raises:
        CollinearityError: naming every column that takes part in a linear
            dependency.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = x.shape
    if n < k:
        raise InsufficientOverlapError(f"{n} observations for {k} coefficients")
    norms = np.linalg.norm(x, axis=0)
    if np.any(norms == 0):
        raise CollinearityError([names[j] for j in np.flatnonzero(norms == 0)])
    xs = x / norms
    rank = np.linalg.matrix_rank(xs)
    if rank < k:
        offending = [
            names[j] for j in range(k) if np.linalg.matrix_rank(np.delete(xs, j, axis=1)) == rank
        ]
        raise CollinearityError(offending)

    gram = xs.T @ xs
    beta = np.linalg.solve(gram, xs.T @ y)
    beta += np.linalg.solve(gram, xs.T @ (y - xs @ beta))
    fitted = xs @ beta
    resid = y - fitted
    rss = float(resid @ resid)
    dev = y - y.mean()
    tss = float(dev @ dev)
    if is_constant(y) or tss == 0:
        r2 = 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - rss / tss))
    if n > k:
        sigma2 = rss / (n - k)
        se = np.sqrt(sigma2 * np.diag(np.linalg.inv(gram))) / norms
    else:
        se = np.full(k, math.nan)
    return OLSFit(beta / norms, se, r2, fitted, resid)


@dataclass
class RegressionResult:
    names: tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    r_squared: float
    n_observations: int
    predictions: dict  # country (or (period, country)) -> fitted growth
    observed: dict
    dropped: list[str] = field(default_factory=list)
    level: int = 0
    log_gdp: bool = False

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    @property
    def a(self) -> float:
        return float(self.coefficients[0])

    @property
    def b1(self) -> float:
        return float(self.coefficients[1])

    @property
    def b2(self) -> float:
        return float(self.coefficients[2])

    @property
    def b3(self) -> float:
        return float(self.coefficients[3])

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "log_gdp": self.log_gdp,
            "coefficients": dict(zip(self.names, self.coefficients.tolist())),
            "standard_errors": dict(zip(self.names, self.standard_errors.tolist())),
            "r_squared": self.r_squared,
            "n_observations": self.n_observations,
            "dropped_countries": list(self.dropped),
        }


def _growth_design(gdp_t, gdp_t_plus, trajectory, level, log_gdp):
    if level < 0 or level + 1 > trajectory.depth:
        raise InputError(f"level {level} needs a trajectory of depth >= {level + 1}, have {trajectory.depth}")
    g0 = gdp_t.values if isinstance(gdp_t, CountrySeries) else dict(gdp_t)
    g1 = gdp_t_plus.values if isinstance(gdp_t_plus, CountrySeries) else dict(gdp_t_plus)
    idx = [i for i, c in enumerate(trajectory.countries) if c in g0 and c in g1]
    countries = [trajectory.countries[i] for i in idx]
    dropped = sorted((set(trajectory.countries) | set(g0) | set(g1)) - set(countries))
    v0 = np.array([g0[c] for c in countries], dtype=float)
    v1 = np.array([g1[c] for c in countries], dtype=float)
    if np.any(v0 <= 0) or np.any(v1 <= 0):
        raise InputError("GDP values must be strictly positive")
    y = np.log(v1 / v0)
    income = np.log(v0) if log_gdp else v0
    x = np.column_stack(
        [
            np.ones(len(idx)),
            income,
            trajectory.country_levels[level][idx],
            trajectory.country_levels[level + 1][idx],
        ]
    )
    return countries, x, y, dropped


def _coef_names(level, log_gdp):
    return ("a", "b1_log_gdp" if log_gdp else "b1_gdp", f"b2_k{level}", f"b3_k{level + 1}")


def growth_regression(
    gdp_t: CountrySeries | Mapping[str, float],
    gdp_t_plus: CountrySeries | Mapping[str, float],
    trajectory: ReflectionTrajectory,
    level: int,
    log_gdp: bool = False,
) -> RegressionResult:
    """Regress log income growth on initial income, k_{c,level} and k_{c,level+1}.

    Uses countries present in all three inputs; everything else is listed in
    ``dropped``. ``log_gdp`` swaps the GDP(t) regressor for log GDP(t).

    Raises:
        InsufficientOverlapError: fewer than 8 shared countries.
        CollinearityError: rank-deficient design matrix.
    """
    countries, x, y, dropped = _growth_design(gdp_t, gdp_t_plus, trajectory, level, log_gdp)
    if len(countries) < MIN_REGRESSION_COUNTRIES:
        raise InsufficientOverlapError(
            f"insufficient overlap: {len(countries)} countries, need {MIN_REGRESSION_COUNTRIES}"
        )
    fit = ols(x, y, _coef_names(level, log_gdp))
    return RegressionResult(
        names=_coef_names(level, log_gdp),
        coefficients=fit.coefficients,
        standard_errors=fit.standard_errors,
        r_squared=fit.r_squared,
        n_observations=len(countries),
        predictions=dict(zip(countries, fit.fitted.tolist())),
        observed=dict(zip(countries, y.tolist())),
        dropped=dropped,
        level=level,
        log_gdp=log_gdp,
    )


def pooled_growth_regression(
    periods: Sequence[tuple],
    level: int,
    log_gdp: bool = False,
    country_dummies: bool = False,
) -> RegressionResult:
    """Stack several ``(gdp_t, gdp_t_plus, trajectory)`` periods into one regression.

    With ``country_dummies`` each country except the first (sorted) gets an
    indicator column. Standard errors are plain OLS; no panel corrections.
    Prediction keys are ``(period_index, country)``.
    """
    blocks, keys, dropped = [], [], set()
    for j, (g0, g1, traj) in enumerate(periods):
        countries, x, y, d = _growth_design(g0, g1, traj, level, log_gdp)
        blocks.append((x, y))
        keys.extend((j, c) for c in countries)
        dropped.update(d)
    if not blocks:
        raise InputError("no periods supplied")
    x = np.vstack([b[0] for b in blocks])
    y = np.concatenate([b[1] for b in blocks])
    names = list(_coef_names(level, log_gdp))
    if country_dummies:
        present = sorted({c for _, c in keys})
        for c in present[1:]:
            names.append(f"country_{c}")
            x = np.column_stack([x, [1.0 if kc == c else 0.0 for _, kc in keys]])
    if len(keys) < max(MIN_REGRESSION_COUNTRIES, len(names)):
        raise InsufficientOverlapError(f"insufficient overlap: {len(keys)} observations")
    fit = ols(x, y, names)
    return RegressionResult(
        names=tuple(names),
        coefficients=fit.coefficients,
        standard_errors=fit.standard_errors,
        r_squared=fit.r_squared,
        n_observations=len(keys),
        predictions=dict(zip(keys, fit.fitted.tolist())),
        observed=dict(zip(keys, y.tolist())),
        dropped=sorted(dropped - {c for _, c in keys}),
        level=level,
        log_gdp=log_gdp,
    )


# --- concentration baselines -----------------------------------------------


@dataclass
class BaselineIndices:
    hhi: dict[str, float]
    entropy: dict[str, float]
    excluded: list[str]


def baseline_indices(table: ExportVolumeTable) -> BaselineIndices:
    """Herfindahl index and Shannon entropy (natural log) of each country's export shares."""
    countries, _, x = table.dense()
    totals = x.sum(axis=1)
    hhi, ent, excluded = {}, {}, []
    for c, row, tot in zip(countries, x, totals):
        if tot <= 0:
            excluded.append(c)
            continue
        s = row[row > 0] / tot
        hhi[c] = float(np.sum(s * s))
        ent[c] = float(-np.sum(s * np.log(s))) if s.size > 1 else 0.0
    return BaselineIndices(hhi, ent, excluded)


# --- new exports ------------------------------------------------------------


@dataclass
class NewExportRow:
    country: str
    k_c0: float
    k_c1: float
    mean_kp0: float
    mean_kp1: float
    n_new_products: int
    n_measured: int  # new products that exist in the t0 network


@dataclass
class NewExports:
    new_products: dict[str, frozenset]  # every country with at least one new export
    rows: list[NewExportRow]
    no_new_exports: list[str]
    absent_at_t0: list[str]  # countries with new exports but no t0 network position
    unmeasured: list[str]  # countries whose new products are all outside the t0 network


def new_exports(
    table_t0: ExportVolumeTable,
    table_t1: ExportVolumeTable,
    low_threshold: float = 0.1,
    high_threshold: float = 1.0,
    matrix_threshold: float = 1.0,
    leave_one_out: bool = False,
) -> NewExports:
    """Products each country moves into between t0 and t1, and their t0 network position.

    A product is new for country c if RCA_t0 < ``low_threshold`` (a missing
    t0 entry counts as 0) and RCA_t1 >= ``high_threshold``. The averages of
    k_p,0 and k_p,1 come from the t0 matrix built at ``matrix_threshold`` and
    cover the new products present in that network.
    ``leave_one_out`` removes the focal country from k_p,0 and k_p,1 where it
    is itself linked to the product at t0.
    """
    if not low_threshold < high_threshold:
        raise InputError("low_threshold must be below high_threshold")
    rca_t0 = compute_rca(table_t0)
    rca0 = rca_t0.entries
    rca1 = compute_rca(table_t1).entries

    found: dict[str, set] = {}
    for (c, p), v in rca1.items():
        if v >= high_threshold and rca0.get((c, p), 0.0) < low_threshold:
            found.setdefault(c, set()).add(p)
    new = {c: frozenset(ps) for c, ps in sorted(found.items())}

    m0 = threshold_to_binary(rca_t0, matrix_threshold)
    traj = reflect(m0, depth=1)
    c_pos = {c: i for i, c in enumerate(traj.countries)}
    p_pos = {p: j for j, p in enumerate(traj.products)}
    kc0, kc1 = traj.country_levels
    kp0, kp1 = traj.product_levels
    m_rows = {c: i for i, c in enumerate(m0.countries)}
    m_cols = {p: j for j, p in enumerate(m0.products)}

    all_countries = sorted({c for c, _ in rca0} | {c for c, _ in rca1})
    rows, absent, unmeasured = [], [], []
    for c, prods in new.items():
        if c not in c_pos:
            absent.append(c)
            continue
        ci = c_pos[c]
        v0, v1 = [], []
        for p in sorted(prods):
            if p not in p_pos:
                continue
            j = p_pos[p]
            u0, u1 = kp0[j], kp1[j]
            if leave_one_out and m0.adjacency[m_rows[c], m_cols[p]]:
                if u0 <= 1:
                    continue
                u1 = (u0 * u1 - kc0[ci]) / (u0 - 1)
                u0 = u0 - 1
            v0.append(u0)
            v1.append(u1)
        if not v0:
            unmeasured.append(c)
            continue
        rows.append(
            NewExportRow(c, float(kc0[ci]), float(kc1[ci]), float(np.mean(v0)), float(np.mean(v1)), len(prods), len(v0))
        )
    return NewExports(
        new_products=new,
        rows=rows,
        no_new_exports=[c for c in all_countries if c not in new],
        absent_at_t0=absent,
        unmeasured=unmeasured,
    )

