"""CTM table files and result export.

Table file layout (UTF-8)::

    schema_version=1
    dimensionality=1
    states=2
    ...
    <blank line>
    0,1000
    1,1000
    00,264

Header keys appear in ``HEADER_KEYS`` order. Body records are sorted
canonically, so equal tables always serialise to identical bytes. 2D objects
are written as ``RxC:<row-major bits>``.
"""
from __future__ import annotations

import csv
import io as _io
import json
import os
import re
import tempfile
from dataclasses import fields, is_dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

from .turing import SCHEMA_VERSION, CtmTable, TmSpace, object_sort_key

HEADER_KEYS = (
    "schema_version",
    "dimensionality",
    "states",
    "symbols",
    "cutoff",
    "total_machines",
    "total_halting",
    "protocol",
    "exhaustive",
    "seed",
    "ranges",
)
_KEY_1D = re.compile(r"[01]+")
_KEY_2D = re.compile(r"(\d+)x(\d+):([01]+)")


class SchemaMismatch(ValueError):
    pass


class ChecksumMismatch(ValueError):
    pass


class BadRecord(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class SinkFailure(IOError):
    pass


class EmptyInput(ValueError):
    pass


def _write(sink: BinaryIO, data: bytes) -> None:
    try:
        sink.write(data)
    except (OSError, ValueError) as exc:
        raise SinkFailure(str(exc)) from exc


def dump_ctm_table(t: CtmTable) -> bytes:
    header = {
        "schema_version": t.schema_version,
        "dimensionality": t.dimensionality,
        "states": t.space.states,
        "symbols": t.space.symbols,
        "cutoff": t.space.cutoff,
        "total_machines": t.total_machines,
        "total_halting": t.total_halting,
        "protocol": t.protocol,
        "exhaustive": "true" if t.exhaustive else "false",
        "seed": "" if t.seed is None else t.seed,
        "ranges": ",".join(f"{lo}-{hi}" for lo, hi in t.ranges),
    }
    if "\n" in t.protocol:
        raise ValueError("protocol text must be a single line")
    lines = [f"{k}={header[k]}" for k in HEADER_KEYS]
    lines.append("")
    lines.extend(f"{k},{c}" for k, c in t.counts.items())
    return ("\n".join(lines) + "\n").encode("utf-8")


def save_ctm_table(t: CtmTable, sink: BinaryIO) -> None:
    _write(sink, dump_ctm_table(t))


def _parse_header(lines: list[str]) -> dict[str, str]:
    header: dict[str, str] = {}
    for no, line in enumerate(lines, 1):
        key, sep, value = line.partition("=")
        if not sep:
            raise BadRecord(no, f"header line without '=': {line!r}")
        if key in header:
            raise BadRecord(no, f"duplicate header key {key!r}")
        header[key] = value
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise SchemaMismatch(f"missing header keys: {', '.join(missing)}")
    if header["schema_version"] != str(SCHEMA_VERSION):
        raise SchemaMismatch(f"schema_version {header['schema_version']} != {SCHEMA_VERSION}")
    if header["dimensionality"] not in ("1", "2"):
        raise SchemaMismatch(f"dimensionality must be 1 or 2, got {header['dimensionality']}")
    return header


def load_ctm_table(source: BinaryIO | bytes) -> CtmTable:
    """Parse and validate a table file; the result is sealed."""
    data = source if isinstance(source, bytes) else source.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise SchemaMismatch(f"not UTF-8: {exc}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    try:
        blank = lines.index("")
    except ValueError:
        raise SchemaMismatch("no blank line between header and body") from None
    header = _parse_header(lines[:blank])
    dim = int(header["dimensionality"])
    pattern = _KEY_1D if dim == 1 else _KEY_2D

    counts: dict[str, int] = {}
    prev = None
    for no, line in enumerate(lines[blank + 1 :], blank + 2):
        key, sep, count = line.rpartition(",")
        m = pattern.fullmatch(key) if sep else None
        if m is None or not count.isdigit() or int(count) < 1:
            raise BadRecord(no, f"malformed record {line!r}")
        if dim == 2 and int(m.group(1)) * int(m.group(2)) != len(m.group(3)):
            raise BadRecord(no, f"object size does not match its dimensions: {key!r}")
        order = object_sort_key(key)
        if prev is not None and order <= prev:
            raise BadRecord(no, f"record {key!r} out of canonical order or duplicated")
        prev = order
        counts[key] = int(count)

    try:
        total_machines = int(header["total_machines"])
        total_halting = int(header["total_halting"])
        space = TmSpace(int(header["states"]), int(header["cutoff"]), int(header["symbols"]))
        seed = int(header["seed"]) if header["seed"] else None
        ranges = tuple(tuple(int(x) for x in r.split("-")) for r in header["ranges"].split(",") if r)
    except ValueError as exc:
        raise SchemaMismatch(f"bad header value: {exc}") from exc
    if header["exhaustive"] not in ("true", "false"):
        raise SchemaMismatch("exhaustive must be true or false")
    if sum(counts.values()) != total_halting:
        raise ChecksumMismatch(f"body sums to {sum(counts.values())}, header says {total_halting}")
    return CtmTable(
        space=space,
        counts=counts,
        total_machines=total_machines,
        total_halting=total_halting,
        schema_version=SCHEMA_VERSION,
        dimensionality=dim,
        protocol=header["protocol"],
        exhaustive=header["exhaustive"] == "true",
        seed=seed,
        ranges=ranges,
    )


def read_ctm_table(path: str | os.PathLike) -> CtmTable:
    with open(path, "rb") as fh:
        return load_ctm_table(fh)


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write to a temporary sibling, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return f"{value:.6f}"
    return value


def _records(rows: Iterable) -> list[dict]:
    out = []
    for row in rows:
        if hasattr(row, "to_record"):
            out.append(row.to_record())
        elif is_dataclass(row):
            out.append({f.name: getattr(row, f.name) for f in fields(row)})
        else:
            out.append(dict(row))
    return out


def render_results(rows: Sequence, fmt: str = "csv") -> bytes:
    """CSV (header + one line per row) or a JSON array with the same field names.

    Floats are printed with 6 decimals so repeated runs produce identical bytes.
    """
    records = _records(rows)
    if not records:
        raise EmptyInput("no rows to export")
    names = list(records[0])
    if fmt == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(names)
        for rec in records:
            writer.writerow(["" if rec[n] is None else _fmt(rec[n]) for n in names])
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        objs = [{n: (float(_fmt(rec[n])) if isinstance(rec[n], float) else rec[n]) for n in names} for rec in records]
        return (json.dumps(objs, indent=1) + "\n").encode("utf-8")
    raise ValueError(f"unknown export format {fmt!r}")


def export_results(rows: Sequence, fmt: str, sink: BinaryIO) -> None:
    _write(sink, render_results(rows, fmt))
