"""Binary PPM (P6) and PGM (P5) reading and writing, 8 bit, maxval 255.

Dependency-free image I/O: grayscale images are (H, W) uint8 arrays,
color images (H, W, 3).  Header comments are tolerated when reading.
"""

from __future__ import annotations

import numpy as np

__all__ = ["read_pnm", "write_pgm", "write_ppm", "write_pnm"]


def _read_header_tokens(buf: bytes, count: int) -> tuple[list[int], int]:
    """Parse `count` whitespace/comment-separated integers after the magic."""
    tokens: list[int] = []
    i = 2  # past the magic number
    while len(tokens) < count:
        if i >= len(buf):
            raise ValueError("truncated header")
        c = buf[i : i + 1]
        if c == b"#":
            while i < len(buf) and buf[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(buf) and not buf[j : j + 1].isspace():
                j += 1
            tokens.append(int(buf[i:j]))
            i = j
    return tokens, i + 1  # single whitespace byte ends the header


def read_pnm(path) -> np.ndarray:
    """Read a binary PGM/PPM file into a uint8 array."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic = buf[:2]
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"unsupported magic {magic!r}; expected binary P5 or P6")
    (width, height, maxval), offset = _read_header_tokens(buf, 3)
    if maxval != 255:
        raise ValueError(f"only maxval 255 is supported, got {maxval}")
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    data = np.frombuffer(buf, dtype=np.uint8, count=expected, offset=offset)
    if data.size != expected:
        raise ValueError("truncated pixel data")
    if channels == 1:
        return data.reshape(height, width).copy()
    return data.reshape(height, width, 3).copy()


def write_pgm(path, image: np.ndarray) -> None:
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError(f"grayscale image must be 2-D, got shape {img.shape}")
    img = img.astype(np.uint8, copy=False)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())


def write_ppm(path, image: np.ndarray) -> None:
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"color image must be (H, W, 3), got shape {img.shape}")
    img = img.astype(np.uint8, copy=False)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())


def write_pnm(path, image: np.ndarray) -> None:
    """Dispatch on array shape: 2-D -> PGM, (H, W, 3) -> PPM."""
    img = np.asarray(image)
    if img.ndim == 2:
        write_pgm(path, img)
    else:
        write_ppm(path, img)
