"""Minimal PNG codec for 8-bit and 16-bit RGB images.

Pillow silently refuses (or downconverts) 16-bit-per-channel RGB PNGs,
and the ground-truth illumination maps need the full 16 bits, so the
toolkit carries its own codec. Writing always emits color type 2 (RGB),
no interlacing, filter 0 on every scanline, zlib level 6 — a fixed
recipe, so identical pixel data yields identical bytes. Reading handles
any row filters but only non-interlaced RGB at depth 8 or 16; anything
else raises `PngFormatError` rather than guessing.

In-memory layout everywhere in the toolkit: row-major (height, width, 3)
arrays, channel-interleaved, R/G/B order. 16-bit samples are big-endian
on disk per the PNG spec.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_ZLIB_LEVEL = 6


class PngFormatError(ValueError):
    """Raised for files this codec cannot parse or encode."""


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def write_png(path, pixels: np.ndarray) -> None:
    """Write an RGB PNG; dtype uint8 -> 8-bit file, uint16 -> 16-bit file."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise PngFormatError(f"expected (H, W, 3) pixel array, got {pixels.shape}")
    if pixels.dtype == np.uint8:
        depth = 8
        raw = pixels
    elif pixels.dtype == np.uint16:
        depth = 16
        raw = pixels.astype(">u2")
    else:
        raise PngFormatError(f"expected uint8 or uint16 pixels, got {pixels.dtype}")

    height, width = pixels.shape[:2]
    row_bytes = raw.reshape(height, -1).view(np.uint8).reshape(height, -1)
    scanlines = np.concatenate(
        [np.zeros((height, 1), dtype=np.uint8), row_bytes], axis=1
    )

    ihdr = struct.pack(">IIBBBBB", width, height, depth, 2, 0, 0, 0)
    idat = zlib.compress(scanlines.tobytes(), _ZLIB_LEVEL)
    with open(path, "wb") as fh:
        fh.write(_SIGNATURE)
        fh.write(_chunk(b"IHDR", ihdr))
        fh.write(_chunk(b"IDAT", idat))
        fh.write(_chunk(b"IEND", b""))


def read_png(path) -> np.ndarray:
    """Read an RGB PNG into (H, W, 3) uint8 or uint16 (native byte order)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != _SIGNATURE:
        raise PngFormatError(f"{path}: not a PNG file")

    pos = 8
    ihdr = None
    idat = bytearray()
    while pos + 8 <= len(data):
        (length,) = struct.unpack(">I", data[pos : pos + 4])
        tag = data[pos + 4 : pos + 8]
        payload = data[pos + 8 : pos + 8 + length]
        if len(payload) != length:
            raise PngFormatError(f"{path}: truncated chunk {tag!r}")
        pos += 12 + length
        if tag == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", payload)
        elif tag == b"IDAT":
            idat.extend(payload)
        elif tag == b"IEND":
            break
    if ihdr is None:
        raise PngFormatError(f"{path}: missing IHDR")

    width, height, depth, color_type, compression, filt, interlace = ihdr
    if color_type != 2:
        raise PngFormatError(
            f"{path}: unsupported color type {color_type} (only RGB is handled)"
        )
    if depth not in (8, 16):
        raise PngFormatError(f"{path}: unsupported bit depth {depth}")
    if compression != 0 or filt != 0:
        raise PngFormatError(f"{path}: nonstandard compression/filter method")
    if interlace != 0:
        raise PngFormatError(f"{path}: interlaced PNGs are not supported")

    bpp = 3 * (depth // 8)
    stride = width * bpp
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise PngFormatError(f"{path}: corrupt image data ({exc})") from exc
    if len(raw) != (stride + 1) * height:
        raise PngFormatError(f"{path}: IDAT size mismatch")
    raw = np.frombuffer(raw, dtype=np.uint8).reshape(height, stride + 1)

    filters = raw[:, 0]
    rows = raw[:, 1:]
    if np.any(filters):
        rows = _unfilter(rows.copy(), filters, bpp)

    if depth == 8:
        return rows.reshape(height, width, 3).copy()
    return rows.reshape(height, -1).view(">u2").astype(np.uint16).reshape(height, width, 3)


def _unfilter(rows: np.ndarray, filters: np.ndarray, bpp: int) -> np.ndarray:
    """Undo PNG scanline filters in place (types 0-4)."""
    height, stride = rows.shape
    prev = np.zeros(stride, dtype=np.uint8)
    for y in range(height):
        f = filters[y]
        line = rows[y]
        if f == 0:
            pass
        elif f == 1:  # Sub
            for x in range(bpp, stride):
                line[x] = (int(line[x]) + int(line[x - bpp])) & 0xFF
        elif f == 2:  # Up
            rows[y] = line = ((line.astype(np.uint16) + prev) & 0xFF).astype(np.uint8)
        elif f == 3:  # Average
            for x in range(stride):
                left = int(line[x - bpp]) if x >= bpp else 0
                line[x] = (int(line[x]) + ((left + int(prev[x])) >> 1)) & 0xFF
        elif f == 4:  # Paeth
            for x in range(stride):
                left = int(line[x - bpp]) if x >= bpp else 0
                up = int(prev[x])
                ul = int(prev[x - bpp]) if x >= bpp else 0
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                if pa <= pb and pa <= pc:
                    pred = left
                elif pb <= pc:
                    pred = up
                else:
                    pred = ul
                line[x] = (int(line[x]) + pred) & 0xFF
        else:
            raise PngFormatError(f"unknown scanline filter {f}")
        prev = line
    return rows
