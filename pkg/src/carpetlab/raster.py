"""Rasters over plane viewports, with PGM (binary P5) and PNG export.

The PNG encoder is hand-rolled (zlib + fixed chunk layout, filter 0 on
every scanline) so identical pixel data always yields identical bytes; the
tile service's golden-file determinism rests on this.  Raster occupancy is
stored bottom-up (row 0 = smallest y); image files are written top-down.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

Viewport = tuple[float, float, float, float]


@dataclass(eq=False)
class Raster:
    """Boolean occupancy grid over a viewport rectangle.

    sphere=True marks grids whose diameters should be measured in the
    chordal metric rather than the Euclidean plane metric.
    """

    occupancy: np.ndarray
    viewport: Viewport = (0.0, 0.0, 1.0, 1.0)
    sphere: bool = False

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=bool)
        if occ.ndim != 2 or occ.shape[0] < 1 or occ.shape[1] < 1:
            raise ValueError(f"occupancy must be a 2D grid, got shape {occ.shape}")
        x0, y0, x1, y1 = self.viewport
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"degenerate viewport {self.viewport}")
        self.occupancy = occ

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    @property
    def pixel_size(self) -> tuple[float, float]:
        x0, y0, x1, y1 = self.viewport
        return ((x1 - x0) / self.width, (y1 - y0) / self.height)

    def occupied_fraction(self) -> float:
        return float(self.occupancy.mean())


# ---------------------------------------------------------------------------
# PGM (binary P5, one byte per pixel: 0 empty / 255 occupied)
# ---------------------------------------------------------------------------

def pgm_bytes(raster: Raster) -> bytes:
    img = np.where(raster.occupancy[::-1], 255, 0).astype(np.uint8)
    header = f"P5\n{raster.width} {raster.height}\n255\n".encode("ascii")
    return header + img.tobytes()


def write_pgm(raster: Raster, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(raster))


def read_pgm(path: str) -> Raster:
    """Read a binary P5 PGM as an occupancy raster (values >= 128 occupied).

    The viewport is reconstructed as a unit-width rectangle with square
    pixels; PGM carries no plane coordinates.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    i = 0
    while len(tokens) < 4:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if i < len(data) and data[i : i + 1] == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
            continue
        start = i
        while i < len(data) and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise ValueError("truncated PGM header")
        tokens.append(data[start:i])
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM (P5): magic {tokens[0]!r}")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise ValueError("only 8-bit PGM supported")
    i += 1  # single whitespace byte after maxval
    pixels = np.frombuffer(data[i : i + width * height], dtype=np.uint8)
    if pixels.size != width * height:
        raise ValueError("truncated PGM pixel data")
    occ = (pixels.reshape(height, width) >= 128)[::-1]
    return Raster(occupancy=occ, viewport=(0.0, 0.0, 1.0, height / width))


# ---------------------------------------------------------------------------
# PNG (8-bit grayscale or RGB, filter 0, single IDAT)
# ---------------------------------------------------------------------------

def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (struct.pack(">I", len(payload)) + tag + payload
            + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF))


def png_bytes(image: np.ndarray) -> bytes:
    """Encode a uint8 image (H,W) grayscale or (H,W,3) RGB, row 0 at top."""
    img = np.ascontiguousarray(image, dtype=np.uint8)
    if img.ndim == 2:
        color_type = 0
    elif img.ndim == 3 and img.shape[2] == 3:
        color_type = 2
    else:
        raise ValueError(f"unsupported image shape {img.shape}")
    height, width = img.shape[:2]
    ihdr = struct.pack(">IIBBBBB", width, height, 8, color_type, 0, 0, 0)
    raw = b"".join(b"\x00" + img[r].tobytes() for r in range(height))
    idat = zlib.compress(raw, 9)
    return (b"\x89PNG\r\n\x1a\n" + _chunk(b"IHDR", ihdr)
            + _chunk(b"IDAT", idat) + _chunk(b"IEND", b""))


def read_png(data: bytes) -> np.ndarray:
    """Decode PNGs produced by png_bytes (8-bit, filter 0, no interlace)."""
    if data[:8] != b"\x89PNG\r\n\x1a\n":
        raise ValueError("not a PNG")
    i = 8
    width = height = color_type = None
    idat = b""
    while i < len(data):
        (length,) = struct.unpack(">I", data[i : i + 4])
        tag = data[i + 4 : i + 8]
        payload = data[i + 8 : i + 8 + length]
        i += 12 + length
        if tag == b"IHDR":
            width, height, depth, color_type, comp, filt, interlace = struct.unpack(
                ">IIBBBBB", payload)
            if depth != 8 or interlace != 0 or color_type not in (0, 2):
                raise ValueError("unsupported PNG variant")
        elif tag == b"IDAT":
            idat += payload
        elif tag == b"IEND":
            break
    if width is None:
        raise ValueError("missing IHDR")
    raw = zlib.decompress(idat)
    channels = 1 if color_type == 0 else 3
    stride = width * channels + 1
    rows = []
    for r in range(height):
        line = raw[r * stride : (r + 1) * stride]
        if line[0] != 0:
            raise ValueError("only filter 0 scanlines supported")
        rows.append(np.frombuffer(line[1:], dtype=np.uint8))
    img = np.vstack(rows)
    if channels == 3:
        img = img.reshape(height, width, 3)
    return img


def raster_png_bytes(raster: Raster) -> bytes:
    return png_bytes(np.where(raster.occupancy[::-1], 255, 0).astype(np.uint8))


def write_png(image: np.ndarray, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(png_bytes(image))
