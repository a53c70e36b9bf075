"""PPM (P6) encoding of zone label rasters."""
from __future__ import annotations

import colorsys

import numpy as np

from .zones import NONE_LABEL, RasterLabel

WHITE = (255, 255, 255)
BASE_PALETTE = (
    (228, 26, 28), (55, 126, 184), (77, 175, 74), (152, 78, 163),
    (255, 127, 0), (166, 86, 40), (247, 129, 191), (153, 153, 153),
    (23, 190, 207), (188, 189, 34),
)


def station_color(i: int) -> tuple[int, int, int]:
    if i < len(BASE_PALETTE):
        return BASE_PALETTE[i]
    # golden-angle hues for large networks; never pure white
    h = (i * 0.618033988749895) % 1.0
    r, g, b = colorsys.hsv_to_rgb(h, 0.75, 0.85)
    return int(r * 255), int(g * 255), int(b * 255)


def palette(n: int) -> np.ndarray:
    return np.array([station_color(i) for i in range(n)] + [WHITE], dtype=np.uint8)


def raster_to_ppm(raster: RasterLabel, n: int) -> bytes:
    pal = palette(n)
    idx = np.where(raster.labels == NONE_LABEL, n, raster.labels)
    pixels = pal[idx]
    header = f"P6\n{raster.width} {raster.height}\n255\n".encode()
    return header + pixels.tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    """Decode a P6 image written by raster_to_ppm into an (h, w, 3) array."""
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = (int(v) for v in parts[1].split())
    if parts[2] != b"255":
        raise ValueError("unsupported maxval")
    body = parts[3]
    if len(body) != w * h * 3:
        raise ValueError("truncated PPM")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
