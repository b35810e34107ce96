"""Fixed tile palettes.

These constants are load-bearing: golden-file tests and the browser
explorer both reproduce them byte for byte, so any change invalidates
cached tiles.  Classification colors:

    Cantor        #404040
    CantorCircles #1f77b4
    Carpet(k)     ramp from #d62728 (k=3) toward #ffbf00, saturating at k=10
    NonEscaping   #000000
    Undetermined  #ffffff

Escape-time coloring is grayscale: 0 for non-escaped pixels, otherwise
40 + ((index - 1) * 9) mod 216.
"""

from __future__ import annotations

import numpy as np

from .dynamics import CODE_NON_ESCAPING, CODE_UNDETERMINED

COLOR_CANTOR = (0x40, 0x40, 0x40)
COLOR_CANTOR_CIRCLES = (0x1F, 0x77, 0xB4)
COLOR_NON_ESCAPING = (0x00, 0x00, 0x00)
COLOR_UNDETERMINED = (0xFF, 0xFF, 0xFF)
CARPET_RAMP_START = (0xD6, 0x27, 0x28)
CARPET_RAMP_END = (0xFF, 0xBF, 0x00)
CARPET_RAMP_SPAN = 7  # k = 3 .. 10 spans the ramp


def carpet_color(k: int) -> tuple[int, int, int]:
    t = min(max(k - 3, 0), CARPET_RAMP_SPAN) / CARPET_RAMP_SPAN
    return tuple(
        int(round(a + (b - a) * t))
        for a, b in zip(CARPET_RAMP_START, CARPET_RAMP_END)
    )


def classification_rgb(codes: np.ndarray) -> np.ndarray:
    """Map a classification-code grid to an RGB uint8 image (same row order)."""
    h, w = codes.shape
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[codes == 0] = COLOR_CANTOR
    img[codes == 2] = COLOR_CANTOR_CIRCLES
    img[codes == CODE_NON_ESCAPING] = COLOR_NON_ESCAPING
    img[codes == CODE_UNDETERMINED] = COLOR_UNDETERMINED
    for k in np.unique(codes[codes >= 3]):
        img[codes == k] = carpet_color(int(k))
    return img


def escape_gray(index: int) -> int:
    return 0 if index < 1 else 40 + ((index - 1) * 9) % 216


def escape_rgb(esc: np.ndarray, n_max: int) -> np.ndarray:
    """Map an escape-index grid to grayscale RGB; non-escaped pixels black.

    Indices beyond n_max (stability overruns) render as non-escaped.
    """
    gray = np.zeros(esc.shape, dtype=np.uint8)
    escaped = (esc >= 1) & (esc <= n_max)
    gray[escaped] = (40 + ((esc[escaped] - 1) * 9) % 216).astype(np.uint8)
    # index 0 (outside the escape radius at z0) renders like index 1
    at_start = esc == 0
    gray[at_start] = 40
    return np.repeat(gray[:, :, None], 3, axis=2)
