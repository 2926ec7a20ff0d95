"""File formats.

Inputs:
    trade CSV       ``year,country,product,value``
    series CSV      ``country,value`` (one file per year)
    attribute CSV   ``product,attribute``

Matrix artifact: an edge list CSV ``country,product`` plus a JSON sidecar with
the same stem holding the full country/product index, threshold and isolates.

Every file written here starts with a metadata header: ``#``-prefixed JSON
lines for CSV, a leading ``"metadata"`` key for JSON. No timestamps, so
identical inputs give byte-identical outputs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__
from .errors import InputError, MalformedRowError, NoDataError
from .matrix import BipartiteMatrix, ExportVolumeTable

TRADE_HEADER = ["year", "country", "product", "value"]


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def make_metadata(command: str, parameters: dict, seed=None, inputs: Iterable = ()) -> dict:
    return {
        "tool": "ecomplex",
        "version": __version__,
        "command": command,
        "parameters": parameters,
        "seed": seed,
        "inputs": {Path(p).name: file_digest(p) for p in inputs},
    }


def _rows(path, expected_header: Sequence[str]):
    """Yield ``(line_number, fields)`` for data rows, after checking the header.

    Blank lines and ``#`` comment lines are skipped.
    """
    try:
        fh = open(path, newline="", encoding="utf-8-sig")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    with fh:
        text = fh.read()
    lines = text.splitlines()
    header_seen = False
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = next(csv.reader([line]))
        fields = [f.strip() for f in fields]
        if not header_seen:
            if [f.lower() for f in fields] != list(expected_header):
                raise MalformedRowError(path, lineno, f"expected header {','.join(expected_header)}")
            header_seen = True
            continue
        if len(fields) != len(expected_header):
            raise MalformedRowError(path, lineno, f"expected {len(expected_header)} fields, got {len(fields)}")
        yield lineno, fields
    if not header_seen:
        raise NoDataError(f"{path}: no data")


def _number(path, lineno, text, what):
    try:
        v = float(text)
    except ValueError:
        raise MalformedRowError(path, lineno, f"non-numeric {what} {text!r}") from None
    if not math.isfinite(v):
        raise MalformedRowError(path, lineno, f"non-finite {what} {text!r}")
    return v


def read_trade_csv(path) -> dict[int, ExportVolumeTable]:
    """Parse a trade file into one :class:`ExportVolumeTable` per year.

    Raises:
        NoDataError: no header or no data rows.
        MalformedRowError: bad header, non-numeric or negative value, bad
            year, empty id or duplicate (year, country, product); the message
            carries the line number.
    """
    by_year: dict[int, dict] = {}
    for lineno, (year, country, product, value) in _rows(path, TRADE_HEADER):
        try:
            y = int(year)
        except ValueError:
            raise MalformedRowError(path, lineno, f"non-integer year {year!r}") from None
        if not country or not product:
            raise MalformedRowError(path, lineno, "empty country or product code")
        v = _number(path, lineno, value, "value")
        if v < 0:
            raise MalformedRowError(path, lineno, f"negative value {value}")
        entries = by_year.setdefault(y, {})
        if (country, product) in entries:
            raise MalformedRowError(path, lineno, f"duplicate entry ({country}, {product}) for year {y}")
        entries[(country, product)] = v
    if not by_year:
        raise NoDataError(f"{path}: no data")
    return {y: ExportVolumeTable(y, e) for y, e in sorted(by_year.items())}


def read_single_year(path, year: int | None = None) -> ExportVolumeTable:
    tables = read_trade_csv(path)
    if year is None:
        if len(tables) != 1:
            raise InputError(f"{path}: contains years {sorted(tables)}; pick one")
        return next(iter(tables.values()))
    if year not in tables:
        raise InputError(f"{path}: year {year} not present")
    return tables[year]


def read_series_csv(path) -> dict[str, float]:
    out = {}
    for lineno, (country, value) in _rows(path, ["country", "value"]):
        if country in out:
            raise MalformedRowError(path, lineno, f"duplicate country {country!r}")
        out[country] = _number(path, lineno, value, "value")
    return out


def read_attribute_csv(path) -> list[tuple[str, str]]:
    pairs = []
    for lineno, (product, attribute) in _rows(path, ["product", "attribute"]):
        if not product or not attribute:
            raise MalformedRowError(path, lineno, "empty product or attribute")
        pairs.append((product, attribute))
    return pairs


def _header_lines(meta: dict) -> str:
    return "".join(f"# {line}\n" for line in json.dumps(meta, sort_keys=True).splitlines())


def _fmt(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], meta: dict) -> Path:
    path = Path(path)
    buf = io.StringIO()
    buf.write(_header_lines(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_json(path, payload: dict, meta: dict) -> Path:
    path = Path(path)
    doc = {"metadata": meta}
    doc.update(payload)
    path.write_text(json.dumps(_jsonable(doc), indent=2) + "\n", encoding="utf-8")
    return path


def write_table(path_stem, columns, rows, meta: dict, fmt: str = "csv") -> Path:
    """Write tabular output as CSV or as JSON records, by ``fmt``."""
    path_stem = Path(path_stem)
    if fmt == "csv":
        return write_csv(path_stem.with_suffix(".csv"), columns, rows, meta)
    if fmt == "json":
        records = [dict(zip(columns, r)) for r in rows]
        return write_json(path_stem.with_suffix(".json"), {"columns": list(columns), "rows": records}, meta)
    raise InputError(f"unknown format {fmt!r}")


def sidecar_path(edge_csv) -> Path:
    return Path(edge_csv).with_suffix(".json")


def write_matrix(m: BipartiteMatrix, edge_csv, meta: dict) -> tuple[Path, Path]:
    edge_csv = Path(edge_csv)
    write_csv(edge_csv, ["country", "product"], m.labeled_edges(), meta)
    side = {
        "year": m.year,
        "threshold": m.threshold,
        "n_countries": len(m.countries),
        "n_products": len(m.products),
        "n_edges": m.n_edges,
        "countries": list(m.countries),
        "products": list(m.products),
        "isolated_countries": list(m.isolated_countries),
        "isolated_products": list(m.isolated_products),
    }
    return edge_csv, write_json(sidecar_path(edge_csv), side, meta)


def read_matrix(edge_csv) -> BipartiteMatrix:
    """Load a matrix artifact; without a sidecar the index is the sorted ids in the edge list."""
    edges = [tuple(f) for _, f in _rows(edge_csv, ["country", "product"])]
    side = sidecar_path(edge_csv)
    countries = products = None
    threshold = year = None
    if side.exists():
        try:
            info: dict[str, Any] = json.loads(side.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{side}: invalid JSON ({exc.msg})") from None
        countries, products = info.get("countries"), info.get("products")
        threshold, year = info.get("threshold"), info.get("year")
    if not edges and countries is None:
        raise NoDataError(f"{edge_csv}: no data")
    return BipartiteMatrix.from_labeled_edges(edges, countries, products, threshold=threshold, year=year)
