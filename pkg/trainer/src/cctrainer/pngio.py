"""PNG I/O for the dataset wire format (8-bit images, 16-bit maps).

The trainer talks to the toolkit through files only, so it carries its
own reader/writer for non-interlaced RGB PNGs at bit depth 8 or 16
(16-bit maps decode as value/65535). Writing uses filter 0 scanlines.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class PngError(ValueError):
    pass


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def write_rgb8(path, img01: np.ndarray) -> None:
    """Clip a float [0,1] image and write an 8-bit RGB PNG."""
    data = np.round(np.clip(img01, 0.0, 1.0) * 255.0).astype(np.uint8)
    height, width = data.shape[:2]
    rows = data.reshape(height, -1)
    scan = np.concatenate([np.zeros((height, 1), dtype=np.uint8), rows], axis=1)
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    with open(path, "wb") as fh:
        fh.write(_SIGNATURE)
        fh.write(_chunk(b"IHDR", ihdr))
        fh.write(_chunk(b"IDAT", zlib.compress(scan.tobytes(), 6)))
        fh.write(_chunk(b"IEND", b""))


def read_rgb(path) -> np.ndarray:
    """Read an RGB PNG as float64 in [0,1] (8- or 16-bit source)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != _SIGNATURE:
        raise PngError(f"{path}: not a PNG")
    pos, ihdr, idat = 8, None, bytearray()
    while pos + 8 <= len(data):
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        tag = data[pos + 4 : pos + 8]
        payload = data[pos + 8 : pos + 8 + length]
        pos += 12 + length
        if tag == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", payload)
        elif tag == b"IDAT":
            idat.extend(payload)
        elif tag == b"IEND":
            break
    if ihdr is None:
        raise PngError(f"{path}: missing IHDR")
    width, height, depth, color, _, _, interlace = ihdr
    if color != 2 or depth not in (8, 16) or interlace != 0:
        raise PngError(f"{path}: unsupported PNG layout (need plain 8/16-bit RGB)")
    bpp = 3 * depth // 8
    stride = width * bpp
    raw = np.frombuffer(zlib.decompress(bytes(idat)), dtype=np.uint8)
    raw = raw.reshape(height, stride + 1)
    filters, rows = raw[:, 0], raw[:, 1:]
    if np.any(filters):
        rows = _unfilter(rows.copy(), filters, bpp)
    if depth == 8:
        pixels = rows.reshape(height, width, 3).astype(np.float64)
        return pixels / 255.0
    as16 = rows.reshape(height, -1).view(">u2").astype(np.float64)
    return as16.reshape(height, width, 3) / 65535.0


def _unfilter(rows: np.ndarray, filters: np.ndarray, bpp: int) -> np.ndarray:
    height, stride = rows.shape
    prev = np.zeros(stride, dtype=np.uint8)
    for y in range(height):
        f, line = filters[y], rows[y]
        if f == 1:
            for x in range(bpp, stride):
                line[x] = (int(line[x]) + int(line[x - bpp])) & 0xFF
        elif f == 2:
            rows[y] = line = ((line.astype(np.uint16) + prev) & 0xFF).astype(np.uint8)
        elif f == 3:
            for x in range(stride):
                left = int(line[x - bpp]) if x >= bpp else 0
                line[x] = (int(line[x]) + ((left + int(prev[x])) >> 1)) & 0xFF
        elif f == 4:
            for x in range(stride):
                left = int(line[x - bpp]) if x >= bpp else 0
                up, ul = int(prev[x]), int(prev[x - bpp]) if x >= bpp else 0
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                pred = left if pa <= pb and pa <= pc else up if pb <= pc else ul
                line[x] = (int(line[x]) + pred) & 0xFF
        elif f != 0:
            raise PngError(f"unknown scanline filter {f}")
        prev = line
    return rows
