"""Minimal deterministic PNG writer (RGBA8, zlib level 9, no ancillary chunks).

Used to embed heatmap rasters in SVG exports; byte-identical output for
identical input is part of the atlas determinism contract, which rules out
image libraries that write timestamps or version-dependent metadata.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def encode_rgba(pixels: np.ndarray) -> bytes:
    """PNG bytes from an (h, w, 4) uint8 array."""
    if pixels.ndim != 3 or pixels.shape[2] != 4 or pixels.dtype != np.uint8:
        raise ValueError(f"expected (h, w, 4) uint8, got {pixels.shape} {pixels.dtype}")
    h, w = pixels.shape[:2]
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 6, 0, 0, 0)  # 8-bit RGBA
    raw = b"".join(b"\x00" + pixels[row].tobytes() for row in range(h))
    idat = zlib.compress(raw, 9)
    return _SIGNATURE + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", idat) + _chunk(b"IEND", b"")
