"""Readers and writers for volumes, images, kernels and traces.

IVOL layout: ``b"IVOL"``, version byte ``0x01``, u8 ndim (2 or 3), ndim
little-endian u32 extents ``(nrow, ncol[, nframe])``, then the samples as
little-endian float64, row-major with the frame index slowest.
"""
from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import FormatError
from .volume import Shape, check_finite

MAGIC = b"IVOL"
VERSION = 1


def atomic_write_bytes(path, data: bytes):
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_ivol(x: np.ndarray) -> bytes:
    x = check_finite(np.asarray(x, dtype=np.float64))
    shape = Shape.of(x)
    if x.ndim == 2:
        header = MAGIC + struct.pack("<BB2I", VERSION, 2, shape.nrow, shape.ncol)
    else:
        header = MAGIC + struct.pack("<BB3I", VERSION, 3, shape.nrow, shape.ncol, shape.nframe)
    return header + np.ascontiguousarray(x).astype("<f8").tobytes()


def decode_ivol(data: bytes) -> np.ndarray:
    if len(data) < 6 or data[:4] != MAGIC:
        raise FormatError("not an IVOL file (bad magic)")
    version, ndim = data[4], data[5]
    if version != VERSION:
        raise FormatError(f"unsupported IVOL version {version}")
    if ndim not in (2, 3):
        raise FormatError(f"IVOL ndim must be 2 or 3, got {ndim}")
    hdr = 6 + 4 * ndim
    if len(data) < hdr:
        raise FormatError("truncated IVOL header")
    extents = struct.unpack(f"<{ndim}I", data[6:hdr])
    if min(extents) < 1:
        raise FormatError(f"IVOL extents must be positive, got {extents}")
    count = int(np.prod(extents))
    if len(data) - hdr != 8 * count:
        raise FormatError(f"IVOL payload has {len(data) - hdr} bytes, expected {8 * count}")
    x = np.frombuffer(data, dtype="<f8", offset=hdr, count=count).astype(np.float64)
    if ndim == 2:
        x = x.reshape(extents)
    else:
        nrow, ncol, nframe = extents
        x = x.reshape(nframe, nrow, ncol)
    if not np.all(np.isfinite(x)):
        raise FormatError("IVOL payload contains NaN or Inf")
    return x


def write_ivol(path, x):
    atomic_write_bytes(path, encode_ivol(x))


def read_ivol(path) -> np.ndarray:
    return decode_ivol(Path(path).read_bytes())


def _pgm_tokens(data: bytes, count: int):
    """Pull ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens, i = [], 2
    while len(tokens) < count:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if i < len(data) and data[i:i + 1] == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < len(data) and not data[i:i + 1].isspace():
            i += 1
        if start == i:
            raise FormatError("truncated PGM header")
        tokens.append(int(data[start:i]))
    return tokens, i + 1  # exactly one whitespace byte precedes the raster


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM and scale samples linearly to [0, 1]."""
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise FormatError("only binary PGM (P5) is supported")
    try:
        (ncol, nrow, maxval), offset = _pgm_tokens(data, 3)
    except ValueError as exc:
        raise FormatError(f"bad PGM header: {exc}") from None
    if not 0 < maxval < 65536:
        raise FormatError(f"PGM maxval out of range: {maxval}")
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    n = nrow * ncol
    raster = np.frombuffer(data, dtype=dtype, count=n, offset=offset) if len(data) >= offset + n * np.dtype(dtype).itemsize else None
    if raster is None:
        raise FormatError("truncated PGM raster")
    return raster.reshape(nrow, ncol).astype(np.float64) / maxval


def write_pgm(path, img, maxval: int = 255):
    """Write a 2D image in [0, 1] as P5; values are clipped and rounded."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise FormatError("PGM holds 2D images only")
    if not 0 < maxval < 65536:
        raise FormatError(f"PGM maxval out of range: {maxval}")
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval)
    raster = q.astype(np.uint8 if maxval < 256 else ">u2").tobytes()
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode("ascii")
    atomic_write_bytes(path, header + raster)


def read_kernel_text(path) -> np.ndarray:
    """Plain-text kernel: first line ``rows cols``, then reals in row-major order."""
    text = Path(path).read_text().split("\n", 1)
    try:
        rows, cols = (int(t) for t in text[0].split())
        vals = np.array(text[1].split() if len(text) > 1 else [], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"bad kernel file {path}: {exc}") from None
    if vals.size != rows * cols:
        raise FormatError(f"kernel file {path} declares {rows}x{cols} but holds {vals.size} values")
    return vals.reshape(rows, cols)


def read_volume(path) -> np.ndarray:
    """Dispatch on content: IVOL magic or P5 PGM."""
    head = Path(path).read_bytes()[:4]
    if head == MAGIC:
        return read_ivol(path)
    if head[:2] == b"P5":
        return read_pgm(path)
    raise FormatError(f"{path}: neither IVOL nor P5 PGM")


def read_kernel(path) -> np.ndarray:
    head = Path(path).read_bytes()[:4]
    if head == MAGIC:
        k = read_ivol(path)
        if k.ndim != 2:
            raise FormatError("kernel IVOL must be 2D")
        return k
    return read_kernel_text(path)
