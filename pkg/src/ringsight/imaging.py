"""Image containers, PPM/PNG ingestion and emission, and RGB to HSV conversion.

The canonical on-disk format is binary PPM (P6, maxval 255), which round-trips
bit-exactly and needs no external decoder. PNG is supported read-only as a
convenience for 8-bit RGB/RGBA files (alpha is discarded).
"""

import io
from typing import NamedTuple

import numpy as np
from PIL import Image

from .validation import MAX_DIMENSION, check_rgb_image


class PixelCoord(NamedTuple):
    """Sub-pixel image position: origin top-left, x right, y down."""

    x: float
    y: float


class ImageFormatError(ValueError):
    """Raised for unreadable or unsupported image file contents."""


def _parse_ppm_tokens(data, count):
    """Pull `count` whitespace-separated header tokens off a P6 byte stream.

    PPM headers allow '#' comments that run to end of line. Returns the
    tokens and the offset of the first raster byte (one whitespace byte
    after the last token).
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if pos == start:
            raise ImageFormatError("truncated PPM header")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos : pos + 1].isspace():
        raise ImageFormatError("PPM header must end with a whitespace byte")
    return tokens, pos + 1


def _load_ppm(data):
    tokens, offset = _parse_ppm_tokens(data, 4)
    if tokens[0] != b"P6":
        raise ImageFormatError(f"unsupported PPM magic {tokens[0]!r}, only P6 is handled")
    try:
        width = int(tokens[1])
        height = int(tokens[2])
        maxval = int(tokens[3])
    except ValueError as exc:
        raise ImageFormatError(f"non-numeric PPM header field: {exc}") from None
    if width < 1 or height < 1 or width > MAX_DIMENSION or height > MAX_DIMENSION:
        raise ImageFormatError(f"bad PPM dimensions {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"unsupported PPM maxval {maxval}, only 255 is handled")
    expected = width * height * 3
    raster = data[offset : offset + expected]
    if len(raster) != expected:
        raise ImageFormatError(
            f"PPM raster truncated: expected {expected} bytes, found {len(raster)}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3).copy()


def _load_png(data):
    try:
        pil = Image.open(io.BytesIO(data))
        pil.load()
    except Exception as exc:
        raise ImageFormatError(f"undecodable PNG: {exc}") from None
    if pil.mode == "RGBA":
        pil = pil.convert("RGB")
    if pil.mode != "RGB":
        raise ImageFormatError(
            f"unsupported PNG mode {pil.mode!r}, only 8-bit RGB/RGBA is handled"
        )
    arr = np.asarray(pil, dtype=np.uint8)
    if arr.shape[0] > MAX_DIMENSION or arr.shape[1] > MAX_DIMENSION:
        raise ImageFormatError("PNG dimensions exceed the sanity bound")
    return arr.copy()


def load_image(path):
    """Read a P6 PPM or an 8-bit RGB/RGBA PNG into an (H, W, 3) uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"P6":
        return _load_ppm(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _load_png(data)
    raise ImageFormatError(f"{path}: not a P6 PPM or PNG file")


def save_image(img, path):
    """Write an RGB raster as a binary P6 PPM (maxval 255)."""
    arr = check_rgb_image(img)
    height, width = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


def rgb_to_hsv(img):
    """Hexcone RGB to HSV conversion.

    Hue is in degrees [0, 360) with achromatic pixels assigned hue 0;
    saturation and value are fractions in [0, 1]. Output is float64 with
    the same raster shape.
    """
    arr = check_rgb_image(img).astype(np.float64) / 255.0
    r = arr[..., 0]
    g = arr[..., 1]
    b = arr[..., 2]
    mx = arr.max(axis=2)
    mn = arr.min(axis=2)
    delta = mx - mn
    v = mx
    s = np.where(mx > 0.0, np.divide(delta, mx, out=np.zeros_like(mx), where=mx > 0.0), 0.0)

    safe = np.where(delta > 0.0, delta, 1.0)
    h = np.select(
        [mx == r, mx == g],
        [np.mod((g - b) / safe, 6.0), (b - r) / safe + 2.0],
        default=(r - g) / safe + 4.0,
    )
    h = np.where(delta > 0.0, h * 60.0, 0.0)
    # Guard against float rounding landing exactly on the open bound.
    h = np.where(h >= 360.0, 0.0, h)
    return np.stack([h, s, v], axis=2)
