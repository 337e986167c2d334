"""CSV, binary and JSON artifacts.

Floats are written with ``repr`` so files round-trip exactly and identical
inputs give byte-identical outputs.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .classes import OrderParams, SymbolSpec, tabulated
from .errors import ConfigurationError
from .grid import Grid, SampledField, Side, make_grid
from .weights import Weight, tabulated_weight

_HEADER = struct.Struct("<qqd")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _index_columns(n: int, stem: str = "index") -> list[str]:
    return [stem] if n == 1 else [f"{stem}_{d}" for d in range(n)]


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """RFC-4180 CSV with CRLF line endings."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def write_dicts(path, rows: Sequence[Mapping], header: Sequence[str] | None = None) -> Path:
    header = list(header or (rows[0].keys() if rows else []))
    return write_rows(path, header, ([r.get(k, "") for k in header] for r in rows))


def read_rows(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigurationError(f"{path}: empty CSV")
    return rows[0], rows[1:]


# --------------------------------------------------------------------------- fields


def write_field_csv(path, u: SampledField) -> Path:
    g = u.grid
    idx = np.indices(g.shape).reshape(g.n, -1).T
    vals = u.values.reshape(-1)
    return write_rows(path, _index_columns(g.n) + ["re", "im"],
                      ([*i, v.real, v.imag] for i, v in zip(idx, vals)))


def read_field_csv(path, grid: Grid, side: Side = Side.PHYSICAL) -> SampledField:
    header, rows = read_rows(path)
    expected = _index_columns(grid.n) + ["re", "im"]
    if header != expected:
        raise ConfigurationError(f"{path}: header {header} != {expected}")
    vals = np.zeros(grid.shape, complex)
    for r in rows:
        idx = tuple(int(v) for v in r[:grid.n])
        vals[idx] = float(r[-2]) + 1j * float(r[-1])
    if len(rows) != grid.size:
        raise ConfigurationError(f"{path}: {len(rows)} rows for a grid of {grid.size} points")
    return SampledField(grid, vals, side)


def write_field_binary(path, u: SampledField) -> Path:
    """Header (int64 n, int64 N, float64 L) then interleaved float64 (re, im), little-endian, C order."""
    g = u.grid
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(g.n, g.N, float(g.L)))
        fh.write(np.ascontiguousarray(u.values, dtype="<c16").tobytes())
    return path


def read_field_binary(path, side: Side = Side.PHYSICAL) -> SampledField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ConfigurationError(f"{path}: truncated header")
    n, N, L = _HEADER.unpack_from(raw)
    grid = make_grid(int(n), int(N), float(L), require_pow2=False)
    body = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    if body.size != grid.size:
        raise ConfigurationError(f"{path}: {body.size} values for a grid of {grid.size} points")
    return SampledField(grid, body.reshape(grid.shape).astype(complex), side)


# --------------------------------------------------------------------------- tables


def write_symbol_csv(path, grid: Grid, table: np.ndarray) -> Path:
    table = np.asarray(table, complex)
    rows = ((i, j, table[i, j].real, table[i, j].imag) for i in range(grid.size) for j in range(grid.size))
    return write_rows(path, ["x_index", "xi_index", "re", "im"], rows)


def read_symbol_csv(path, grid: Grid, order: OrderParams) -> SymbolSpec:
    header, rows = read_rows(path)
    if header != ["x_index", "xi_index", "re", "im"]:
        raise ConfigurationError(f"{path}: header must be x_index,xi_index,re,im")
    table = np.zeros((grid.size, grid.size), complex)
    for r in rows:
        table[int(r[0]), int(r[1])] = float(r[2]) + 1j * float(r[3])
    return tabulated(grid, table, order)


def write_weight_csv(path, grid: Grid, values) -> Path:
    vals = np.asarray(values, float).reshape(grid.shape)
    idx = np.indices(grid.shape).reshape(grid.n, -1).T
    return write_rows(path, _index_columns(grid.n, "x_index") + ["value"],
                      ([*i, v] for i, v in zip(idx, vals.reshape(-1))))


def read_weight_csv(path, grid: Grid) -> Weight:
    header, rows = read_rows(path)
    expected = _index_columns(grid.n, "x_index") + ["value"]
    if header != expected:
        raise ConfigurationError(f"{path}: header {header} != {expected}")
    vals = np.full(grid.shape, np.nan)
    for r in rows:
        vals[tuple(int(v) for v in r[:grid.n])] = float(r[-1])
    if np.isnan(vals).any():
        raise ConfigurationError(f"{path}: weight table does not cover the grid")
    if (vals < 0).any():
        raise ConfigurationError(f"{path}: weights must be non-negative")
    return tabulated_weight(grid, vals)


# --------------------------------------------------------------------------- JSON


def _jsonable(v):
    if isinstance(v, Mapping):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if np.isfinite(f) else repr(f)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path
