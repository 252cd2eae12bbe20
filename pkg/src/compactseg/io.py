"""File formats: binary PGM, raw rasters with a JSON sidecar, trace CSV.

Raw rasters are little-endian with the first axis varying fastest, the
same order as the in-memory pixel vectors. The sidecar (``<raw>.json``
by default) looks like::

    {"dims": [64, 64], "dtype": "float32", "axis_order": "x-fastest",
     "spacing": null}
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InputError
from .grid import FeatureImage, GridDomain

DTYPES = {"uint8": "<u1", "uint16": "<u2", "float32": "<f4"}
AXIS_ORDER = "x-fastest"


@dataclass(frozen=True)
class RasterHeader:
    dims: tuple[int, ...]
    dtype: str = "float32"
    axis_order: str = AXIS_ORDER
    spacing: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.dtype not in DTYPES:
            raise FormatError(f"unsupported element type {self.dtype!r}; use one of {sorted(DTYPES)}")
        if self.axis_order != AXIS_ORDER:
            raise FormatError(f"unsupported axis order {self.axis_order!r}")
        if self.spacing is not None:
            spacing = tuple(float(s) for s in self.spacing)
            if len(spacing) != len(self.dims):
                raise FormatError("spacing must have one entry per axis")
            object.__setattr__(self, "spacing", spacing)

    @property
    def domain(self) -> GridDomain:
        return GridDomain(self.dims)

    @property
    def numpy_dtype(self) -> np.dtype:
        return np.dtype(DTYPES[self.dtype])

    @property
    def payload_bytes(self) -> int:
        return self.domain.size * self.numpy_dtype.itemsize

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "dtype": self.dtype,
            "axis_order": self.axis_order,
            "spacing": None if self.spacing is None else list(self.spacing),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RasterHeader":
        try:
            return cls(
                dims=tuple(doc["dims"]),
                dtype=doc.get("dtype", "float32"),
                axis_order=doc.get("axis_order", AXIS_ORDER),
                spacing=doc.get("spacing"),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad raster sidecar: {exc}") from exc


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


# --- PGM -------------------------------------------------------------------


def _pgm_tokens(data: bytes, count: int):
    """Read ``count`` header tokens; returns (tokens, offset of the payload)."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        if pos >= n:
            raise FormatError(f"PGM header truncated at byte offset {pos}")
        ch = data[pos:pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise FormatError(f"unterminated PGM comment at byte offset {pos}")
            pos = end + 1
        else:
            start = pos
            while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
                pos += 1
            tokens.append((data[start:pos], start))
    if pos >= n or not data[pos:pos + 1].isspace():
        raise FormatError(f"expected a single whitespace byte after PGM header at offset {pos}")
    return tokens, pos + 1


def _parse_pgm(data: bytes):
    if data[:2] != b"P5":
        raise FormatError(f"bad PGM magic number {data[:2]!r} at byte offset 0 (expected b'P5')")
    tokens, offset = _pgm_tokens(data[2:], 3)
    values = []
    for raw, at in tokens:
        if not raw.isdigit():
            raise FormatError(f"bad PGM header field {raw!r} at byte offset {at + 2}")
        values.append(int(raw))
    width, height, maxval = values
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise FormatError(f"invalid PGM header values {values}")
    offset += 2
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    size = width * height * dtype.itemsize
    payload = data[offset:offset + size]
    if len(payload) != size:
        raise FormatError(
            f"PGM payload truncated at byte offset {offset + len(payload)}: "
            f"expected {size} bytes"
        )
    pixels = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    if pixels.max(initial=0) > maxval:
        raise FormatError(f"PGM sample exceeds maxval {maxval}")
    return (width, height), maxval, pixels


def read_pgm(path) -> FeatureImage:
    """Binary graymap as a one-feature image (raw sample values)."""
    dims, _, pixels = _parse_pgm(Path(path).read_bytes())
    return FeatureImage(GridDomain(dims), pixels.astype(np.float64))


def read_mask_pgm(path):
    """``(domain, labels)`` with every non-zero sample mapped to 1."""
    dims, _, pixels = _parse_pgm(Path(path).read_bytes())
    return GridDomain(dims), (pixels > 0).astype(np.uint8)


def write_mask_pgm(y, domain: GridDomain, path) -> None:
    """8-bit P5 graymap, foreground 255 and background 0 (2-D only)."""
    if domain.ndim != 2:
        raise InputError("PGM masks are 2-D only; use write_raster for volumes")
    y = np.asarray(y)
    domain.check_vector(y, "mask")
    width, height = domain.dims
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    payload = np.where(y > 0, 255, 0).astype(np.uint8).tobytes()
    _write_atomic(Path(path), header + payload)


# --- raw raster + sidecar -------------------------------------------------------


def write_raster(values, header: RasterHeader, path, sidecar=None) -> None:
    values = np.asarray(values)
    header.domain.check_vector(values, "raster values")
    out = values.astype(header.numpy_dtype, copy=False)
    if out.dtype.kind == "u" and not np.array_equal(out, values):
        raise InputError(f"values do not fit element type {header.dtype}")
    _write_atomic(Path(path), out.tobytes())
    doc = json.dumps(header.to_json(), indent=2, sort_keys=True) + "\n"
    _write_atomic(Path(sidecar) if sidecar else sidecar_path(path), doc.encode("utf-8"))


def read_raster(path, sidecar=None, probability: bool = False):
    """Return ``(header, values)`` with values in the stored element type.

    With ``probability`` set, values outside ``[0, 1]`` are rejected.
    """
    side = Path(sidecar) if sidecar else sidecar_path(path)
    try:
        doc = json.loads(side.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise FormatError(f"sidecar {side} is not valid JSON: {exc}") from exc
    header = RasterHeader.from_json(doc)
    data = Path(path).read_bytes()
    if len(data) != header.payload_bytes:
        raise FormatError(
            f"raster {path} holds {len(data)} bytes; header implies {header.payload_bytes}"
        )
    values = np.frombuffer(data, dtype=header.numpy_dtype).copy()
    if probability:
        if np.any(~np.isfinite(values)) or np.any((values < 0) | (values > 1)):
            raise InputError(f"probability raster {path} has values outside [0, 1]")
    return header, values


def write_mask(y, domain: GridDomain, path) -> None:
    """PGM for ``*.pgm`` paths, otherwise a uint8 raster (values 0/1) plus sidecar."""
    if str(path).lower().endswith(".pgm"):
        write_mask_pgm(y, domain, path)
    else:
        write_raster(np.asarray(y, dtype=np.uint8), RasterHeader(domain.dims, "uint8"), path)


def read_mask(path):
    """``(domain, labels)`` from a PGM or raster mask."""
    if str(path).lower().endswith(".pgm"):
        return read_mask_pgm(path)
    header, values = read_raster(path)
    return header.domain, (values > 0).astype(np.uint8)


def read_image(path):
    """Feature image from a PGM or a raster (one feature per pixel)."""
    if str(path).lower().endswith(".pgm"):
        return read_pgm(path)
    header, values = read_raster(path)
    return FeatureImage(header.domain, values.astype(np.float64))


# --- trace CSV ----------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_trace_csv(trace, path) -> None:
    from .admm import TRACE_FIELDS

    lines = [",".join(TRACE_FIELDS)]
    for rec in trace:
        lines.append(",".join(_fmt(v) for v in rec.as_row()))
    _write_atomic(Path(path), ("\n".join(lines) + "\n").encode("ascii"))


def read_trace_csv(path) -> list[dict]:
    from .admm import TRACE_FIELDS

    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_FIELDS:
            raise FormatError(f"unexpected trace header {reader.fieldnames}")
        rows = []
        for row in reader:
            rows.append(
                {k: int(v) if k in ("iter", "A", "pcg_iters") else float(v) for k, v in row.items()}
            )
    return rows


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
