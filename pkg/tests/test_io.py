import json

import numpy as np
import pytest

from compactseg import io
from compactseg.admm import AdmmConfig, run
from compactseg.errors import FormatError, InputError
from compactseg.grid import GridDomain, build_edges


def test_raster_round_trip(tmp_path, rng):
    values = rng.random(7 * 5 * 3).astype(np.float32)
    header = io.RasterHeader((7, 5, 3), "float32", spacing=(1.0, 1.0, 2.5))
    path = tmp_path / "p.raw"
    io.write_raster(values, header, path)
    back_header, back = io.read_raster(path, probability=True)
    assert back.tobytes() == values.tobytes()
    assert back_header == header
    assert path.read_bytes() == values.astype("<f4").tobytes()
    doc = json.loads(io.sidecar_path(path).read_text())
    assert doc["axis_order"] == "x-fastest" and doc["dims"] == [7, 5, 3]


def test_probability_range_checked(tmp_path):
    path = tmp_path / "p.raw"
    io.write_raster(np.array([0.2, 1.5], np.float32), io.RasterHeader((2, 1)), path)
    with pytest.raises(InputError):
        io.read_raster(path, probability=True)


def test_raster_size_mismatch(tmp_path):
    path = tmp_path / "p.raw"
    io.write_raster(np.zeros(4, np.float32), io.RasterHeader((2, 2)), path)
    path.write_bytes(b"\0" * 12)
    with pytest.raises(FormatError):
        io.read_raster(path)


def test_pgm_mask_bytes(tmp_path):
    path = tmp_path / "m.pgm"
    d = GridDomain((2, 2))
    io.write_mask_pgm(d.ravel(np.array([[1, 0], [0, 1]])), d, path)
    data = path.read_bytes()
    assert data.startswith(b"P5\n2 2\n255\n")
    assert data[-4:] == bytes([0xFF, 0x00, 0x00, 0xFF])
    dom, y = io.read_mask(path)
    assert dom == d and y.tolist() == [1, 0, 0, 1]


def test_pgm_with_comment_and_16_bit(tmp_path):
    path = tmp_path / "img.pgm"
    payload = np.array([0, 1000, 65535], ">u2").tobytes()
    path.write_bytes(b"P5\n# a comment\n3 1\n65535\n" + payload)
    img = io.read_pgm(path)
    assert img.domain.dims == (3, 1)
    assert img.values[:, 0].tolist() == [0.0, 1000.0, 65535.0]


def test_pgm_bad_magic(tmp_path):
    path = tmp_path / "bad.pgm"
    path.write_bytes(b"P2\n2 2\n255\n\0\0\0\0")
    with pytest.raises(FormatError, match="offset 0"):
        io.read_pgm(path)


def test_pgm_truncated(tmp_path):
    path = tmp_path / "short.pgm"
    path.write_bytes(b"P5\n4 4\n255\n\0\0")
    with pytest.raises(FormatError, match="offset"):
        io.read_pgm(path)


def test_mask_raster_round_trip(tmp_path, rng):
    d = GridDomain((4, 3, 2))
    y = rng.integers(0, 2, d.size).astype(np.uint8)
    io.write_mask(y, d, tmp_path / "m.raw")
    dom, back = io.read_mask(tmp_path / "m.raw")
    assert dom == d and back.tobytes() == y.tobytes()


def test_trace_csv_round_trip(tmp_path):
    d = GridDomain((12, 12))
    u = np.where(np.arange(d.size) % 5 == 0, -2.0, 0.7)
    res = run(u, build_edges(d), AdmmConfig(1.0, max_iters=5))
    path = tmp_path / "t.csv"
    io.write_trace_csv(res.trace, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iter,E,E_p,E_c,P,A,res_yz,res_s,alpha,beta,gamma,s,mu1,mu2,pcg_iters"
    rows = io.read_trace_csv(path)
    assert len(rows) == res.iterations
    for row, rec in zip(rows, res.trace):
        assert list(row.values()) == list(rec.as_row())
