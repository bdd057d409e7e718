"""Binary netpbm codecs: PGM P5 (8 and 16 bit) and PPM P6 (8 bit)."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from lode_app.exceptions import MaskFormatError

_WHITESPACE = b" \t\r\n\x0b\x0c"


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` header tokens, skipping ``#`` comments.

    Returns the tokens and the offset of the raster, which starts after the
    single whitespace byte terminating the last token.
    """
    tokens: list[bytes] = []
    pos = 0
    size = len(data)
    while len(tokens) < count:
        while pos < size and data[pos] in _WHITESPACE:
            pos += 1
        if pos >= size:
            raise MaskFormatError("malformed header: unexpected end of file")
        if data[pos] == ord("#"):
            end = data.find(b"\n", pos)
            pos = size if end < 0 else end + 1
            continue
        start = pos
        while pos < size and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        tokens.append(data[start:pos])
    if pos >= size or data[pos] not in _WHITESPACE:
        raise MaskFormatError("malformed header: missing separator before raster")
    return tokens, pos + 1


def read_pgm(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a binary PGM file into an (height, width) array and its maxval."""
    data = Path(path).read_bytes()
    tokens, offset = _header_tokens(data, 4)
    if tokens[0] != b"P5":
        raise MaskFormatError(f"malformed header: expected P5, found {tokens[0]!r}")
    try:
        width, height, maxval = (int(tok) for tok in tokens[1:])
    except ValueError as exc:
        raise MaskFormatError(f"malformed header: {exc}") from exc
    if width <= 0 or height <= 0:
        raise MaskFormatError("malformed header: non-positive image size")
    if maxval == 255:
        dtype = np.dtype(np.uint8)
    elif maxval == 65535:
        dtype = np.dtype(">u2")
    else:
        raise MaskFormatError("unsupported maxval")
    needed = width * height * dtype.itemsize
    if len(data) - offset < needed:
        raise MaskFormatError(f"truncated payload: expected {needed} bytes, found {len(data) - offset}")
    raster = np.frombuffer(data, dtype=dtype, count=width * height, offset=offset)
    return raster.reshape(height, width).astype(np.uint16 if maxval == 65535 else np.uint8), maxval


def write_pgm(path: str | Path, image: np.ndarray, maxval: int = 255) -> None:
    if image.ndim != 2:
        raise ValueError("PGM image must be 2D")
    if maxval == 255:
        raster = np.ascontiguousarray(image, dtype=np.uint8)
    elif maxval == 65535:
        raster = np.ascontiguousarray(image, dtype=">u2")
    else:
        raise ValueError(f"unsupported maxval {maxval}")
    height, width = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        fh.write(raster.tobytes())


def write_ppm(path: str | Path, rgb: np.ndarray) -> None:
    """Write an (height, width, 3) uint8 array as binary PPM (P6)."""
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("rgb must be (H, W, 3)")
    height, width = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())
