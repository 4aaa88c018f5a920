"""Small image kernels: separable Gaussian, 3x3 Sobel, 4-neighbour Laplacian.

All filters use reflected borders (scipy's ``reflect`` mode, d c b a | a b c d)
and act on single-channel 2-D arrays.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]]) / 8.0
SOBEL_Y = SOBEL_X.T.copy()
LAPLACIAN = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3 sigma)."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return np.ones(1)
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_smooth(channel: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 0:
        return np.asarray(channel, dtype=np.float64)
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(channel, k, axis=0, mode="reflect")
    return ndimage.correlate1d(out, k, axis=1, mode="reflect")


def sobel_magnitude(channel: np.ndarray) -> np.ndarray:
    gx = ndimage.correlate(channel, SOBEL_X, mode="reflect")
    gy = ndimage.correlate(channel, SOBEL_Y, mode="reflect")
    return np.hypot(gx, gy)


def laplacian(channel: np.ndarray) -> np.ndarray:
    return ndimage.correlate(channel, LAPLACIAN, mode="reflect")
