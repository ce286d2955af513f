import hashlib
import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algorand_lab.aid import Perturbation, information_delta
from algorand_lab.core import BitGrid
from algorand_lab.io import (
    BadRecord,
    ChecksumMismatch,
    EmptyInput,
    SchemaMismatch,
    SinkFailure,
    atomic_write,
    dump_ctm_table,
    export_results,
    load_ctm_table,
    render_results,
    save_ctm_table,
)
from algorand_lab.turing import CtmTable, TmSpace, build_ctm_table, empty_table

# Frozen after the (2,2) table matched the brute-force enumeration oracle.
SHA256_TABLE_22 = "cde61fcf0fed4cd8da3862b43c4bf1f1d3659e97769fc60973ad27eb1a7bbde4"


def roundtrip(t):
    buf = io.BytesIO()
    save_ctm_table(t, buf)
    buf.seek(0)
    return load_ctm_table(buf)


def test_empty_table_is_header_only():
    data = dump_ctm_table(empty_table(TmSpace(2, 7)))
    head, _, body = data.decode().partition("\n\n")
    assert body == ""
    assert "total_halting=0" in head.splitlines()


def test_save_is_canonical(table22):
    assert dump_ctm_table(table22) == dump_ctm_table(table22)
    shuffled = CtmTable(
        table22.space,
        dict(reversed(list(table22.counts.items()))),
        table22.total_machines,
        table22.total_halting,
        ranges=table22.ranges,
    )
    assert dump_ctm_table(shuffled) == dump_ctm_table(table22)


def test_2_2_file_regression(table22):
    data = dump_ctm_table(table22)
    body = data.decode().split("\n\n", 1)[1].splitlines()
    assert len(body) == len(table22.counts) == 17
    assert hashlib.sha256(data).hexdigest() == SHA256_TABLE_22


def test_body_order():
    t = CtmTable(TmSpace(1, 2), {"10": 1, "1": 2, "01": 1, "000": 1}, 10, 5)
    body = dump_ctm_table(t).decode().split("\n\n")[1].split()
    assert body == ["1,2", "01,1", "10,1", "000,1"]


@given(st.dictionaries(st.text(alphabet="01", min_size=1, max_size=12), st.integers(1, 10**9), max_size=40))
@settings(max_examples=100)
def test_roundtrip_random_tables(counts):
    total = sum(counts.values())
    t = CtmTable(TmSpace(3, 22), counts, total + 17, total, ranges=((100, 117 + total),))
    assert roundtrip(t) == t


def test_roundtrip_2d_and_sampled_metadata():
    t = CtmTable(
        TmSpace(2, 50),
        {"4x4:" + "0" * 16: 10, "2x3:011010": 3},
        total_machines=1000,
        total_halting=13,
        dimensionality=2,
        protocol="turmite 2D; published table",
        exhaustive=False,
        seed=42,
    )
    back = roundtrip(t)
    assert back == t and back.seed == 42 and back.dimensionality == 2
    assert list(back.counts) == ["2x3:011010", "4x4:" + "0" * 16]


def _replace_line(data: bytes, old: str, new: str) -> bytes:
    return data.decode().replace(old, new, 1).encode()


def test_checksum_mismatch(table22):
    data = _replace_line(dump_ctm_table(table22), "total_halting=3044", "total_halting=3045")
    with pytest.raises(ChecksumMismatch):
        load_ctm_table(data)


def test_bad_record(table22):
    data = dump_ctm_table(table22) + b"01x,3\n"
    with pytest.raises(BadRecord):
        load_ctm_table(data)
    data = _replace_line(dump_ctm_table(table22), "\n00,264", "\n00,abc")
    with pytest.raises(BadRecord):
        load_ctm_table(data)


def test_out_of_order_record(table22):
    data = _replace_line(dump_ctm_table(table22), "\n0,1000\n1,1000", "\n1,1000\n0,1000")
    with pytest.raises(BadRecord):
        load_ctm_table(data)


def test_schema_mismatch(table22):
    with pytest.raises(SchemaMismatch):
        load_ctm_table(_replace_line(dump_ctm_table(table22), "schema_version=1", "schema_version=9"))
    with pytest.raises(SchemaMismatch):
        load_ctm_table(_replace_line(dump_ctm_table(table22), "protocol=", "proto="))
    with pytest.raises(SchemaMismatch):
        load_ctm_table(b"schema_version=1\n")


class _BrokenSink:
    def write(self, data):
        raise OSError("disk full")


def test_sink_failure(table22):
    with pytest.raises(SinkFailure):
        save_ctm_table(table22, _BrokenSink())


def test_export_perturbation_reports(est32):
    g = BitGrid([[0] * 8] * 8)
    reports = [information_delta(est32, g, Perturbation.flip((r, r)), 4, label=f"flip {r}") for r in range(3)]
    csv_text = render_results(reports, "csv").decode()
    assert len(csv_text.splitlines()) == 4
    header = csv_text.splitlines()[0].split(",")
    objs = json.loads(render_results(reports, "json"))
    assert len(objs) == 3 and list(objs[0]) == header


def test_export_number_format():
    out = render_results([{"x": 1 / 3, "n": 7}], "csv").decode()
    assert out == "x,n\n0.333333,7\n"
    assert render_results([{"x": 1 / 3}], "csv") == render_results([{"x": 1 / 3}], "csv")


def test_export_empty():
    with pytest.raises(EmptyInput):
        export_results([], "csv", io.BytesIO())


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "out.txt"
    atomic_write(p, b"one")
    atomic_write(p, b"two")
    assert p.read_bytes() == b"two"
    assert [f.name for f in tmp_path.iterdir()] == ["out.txt"]
