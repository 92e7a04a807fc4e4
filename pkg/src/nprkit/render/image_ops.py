"""Image-space operators: 3x3 kernels and per-pixel functions."""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..io.ppm import ImageBuffer
from .framebuffer import Framebuffer

IDENTITY = np.array([[0, 0, 0], [0, 1, 0], [0, 0, 0]], dtype=float)
SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=float)
SOBEL_Y = SOBEL_X.T.copy()
LAPLACIAN = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=float)
KERNELS = {"identity": IDENTITY, "sobel-x": SOBEL_X, "sobel-y": SOBEL_Y, "laplacian": LAPLACIAN}


def _filter(channels: np.ndarray, op) -> np.ndarray:
    if callable(op):
        return np.asarray(op(channels), dtype=float)
    k = np.asarray(op, dtype=float)
    if k.shape != (3, 3) or not np.isfinite(k).all():
        raise ValueError("kernel must be a finite 3x3 array")
    out = np.empty_like(channels)
    for c in range(channels.shape[2]):
        # applied as correlation (no kernel flip), borders clamp to the edge
        out[..., c] = ndimage.correlate(channels[..., c], k, mode="nearest")
    return out


def image_operator(image, op, channels: int | None = None):
    """Apply a 3x3 kernel or a per-pixel function to every channel.

    ``op`` may be a ``(3, 3)`` kernel, a name from :data:`KERNELS`, or a
    callable mapping an ``(H, W, C)`` float array to one of the same shape.
    A :class:`Framebuffer` input is filtered in float and returned as a new
    framebuffer (depth copied, alpha untouched unless ``channels=4``); an
    :class:`ImageBuffer` is filtered on its 0-255 values and re-quantized.
    """
    if isinstance(op, str):
        op = KERNELS[op]
    if isinstance(image, Framebuffer):
        n = channels or 3
        out = image.copy()
        out.color[..., :n] = _filter(image.color[..., :n].astype(float), op)
        return out
    if isinstance(image, ImageBuffer):
        vals = image.pixels.astype(float)
        res = _filter(vals, op)
        return ImageBuffer(image.width, image.height, image.channels,
                           np.clip(np.floor(res + 0.5), 0, 255).astype(np.uint8))
    arr = np.asarray(image, dtype=float)
    squeeze = arr.ndim == 2
    res = _filter(arr[..., None] if squeeze else arr, op)
    return res[..., 0] if squeeze else res


def gradient_magnitude(color: np.ndarray) -> np.ndarray:
    """Per-pixel Sobel gradient magnitude summed over channels, as gray RGB."""
    gx = _filter(color, SOBEL_X)
    gy = _filter(color, SOBEL_Y)
    m = np.sqrt((gx ** 2 + gy ** 2).sum(axis=2, keepdims=True))
    return np.repeat(m, color.shape[2], axis=2)
