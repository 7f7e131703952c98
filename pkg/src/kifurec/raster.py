"""Image model, preprocessing filters, and the coordinate conventions shared repo-wide.

A photo is stored as an ``(H, W, 3)`` uint8 array. Grayscale rasters and edge
masks are plain numpy arrays (float64 / bool) with the same dimensions as the
photo they came from. The polar frame puts the pole at the image centre; the
radial unit is half of the photo height, so a 3:2 full frame has its corners
at radius sqrt(1 + 1.5^2) and a full diagonal of sqrt(13) units.

Axis conventions, fixed for every module: image x grows rightward, image y
grows downward, angles are measured counterclockwise in the mathematical sense
(so the bottom edge midpoint sits at azimuth -pi/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

# Single luminance definition used everywhere (filters, features, renderer).
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class Photo:
    """One photograph of the game series.

    ``pixels`` is an (H, W, 3) uint8 RGB array; ``index`` is the ordinal
    position in the shooting order.
    """

    pixels: np.ndarray
    index: int = 0

    def __post_init__(self) -> None:
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"photo pixels must be (H, W, 3), got {px.shape}")
        if px.shape[0] < 2 or px.shape[1] < 2:
            raise ValueError("photo must be at least 2x2 pixels")
        if px.dtype != np.uint8:
            raise ValueError("photo pixels must be uint8")

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


@dataclass(frozen=True)
class PolarFrame:
    """Polar coordinate frame with the pole at the image centre.

    ``unit`` is the radial unit of measure in pixels (half the photo height).
    """

    pole: tuple[float, float]
    unit: float

    def __post_init__(self) -> None:
        if self.unit <= 0:
            raise ValueError("polar frame unit must be positive")

    @classmethod
    def for_photo(cls, photo: Photo) -> "PolarFrame":
        return cls.for_size(photo.width, photo.height)

    @classmethod
    def for_size(cls, width: int, height: int) -> "PolarFrame":
        return cls(pole=(width / 2.0, height / 2.0), unit=height / 2.0)


def luma(pixels: np.ndarray) -> np.ndarray:
    """Luminance raster of an RGB array, 0.299 R + 0.587 G + 0.114 B."""
    rgb = np.asarray(pixels, dtype=np.float64)
    r, g, b = LUMA_WEIGHTS
    return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]


def difference_of_gaussians(
    photo: Photo | np.ndarray,
    sigma_narrow: float,
    sigma_wide: float,
) -> np.ndarray:
    """Difference of two Gaussian blurs of the luminance image.

    Edges (grid lines, stone rims) come out with large magnitude of either
    sign; flat regions go to zero. Returns a float64 raster with the photo's
    dimensions.
    """
    if not 0 < sigma_narrow < sigma_wide:
        raise ValueError("require 0 < sigma_narrow < sigma_wide")
    pixels = photo.pixels if isinstance(photo, Photo) else np.asarray(photo)
    gray = luma(pixels) if pixels.ndim == 3 else np.asarray(pixels, dtype=np.float64)
    # Reject inputs smaller than the wide kernel's support.
    support = int(2 * np.ceil(3 * sigma_wide) + 1)
    if min(gray.shape) < min(support, 3):
        raise ValueError("image smaller than filter support")
    return gaussian_filter(gray, sigma_narrow) - gaussian_filter(gray, sigma_wide)


def otsu_threshold(values: np.ndarray, bins: int = 256) -> float:
    """Otsu's criterion over a histogram of nonnegative values."""
    values = np.asarray(values, dtype=np.float64).ravel()
    vmax = float(values.max(initial=0.0))
    if vmax <= 0:
        return 0.0
    hist, edges = np.histogram(values, bins=bins, range=(0.0, vmax))
    hist = hist.astype(np.float64)
    total = hist.sum()
    centers = (edges[:-1] + edges[1:]) / 2.0
    w0 = np.cumsum(hist)
    w1 = total - w0
    sum0 = np.cumsum(hist * centers)
    mu0 = np.divide(sum0, w0, out=np.zeros_like(sum0), where=w0 > 0)
    mu1 = np.divide(sum0[-1] - sum0, w1, out=np.zeros_like(sum0), where=w1 > 0)
    between = w0 * w1 * (mu0 - mu1) ** 2
    return float(centers[int(np.argmax(between))])


def binarize(gray: np.ndarray, threshold: float | None = None) -> np.ndarray:
    """Edge mask of a filtered raster: bit set iff |value| exceeds the threshold.

    With ``threshold=None`` the cut is chosen by Otsu's criterion over the
    magnitude histogram.
    """
    gray = np.asarray(gray, dtype=np.float64)
    if gray.size == 0:
        raise ValueError("empty raster")
    mag = np.abs(gray)
    if threshold is None:
        threshold = otsu_threshold(mag)
    return mag > threshold


def polar_of(frame: PolarFrame, p: tuple[float, float]) -> tuple[float, float]:
    """Polar coordinates (radius in units, azimuth in radians) of a pixel point.

    Azimuth follows the repo convention: x rightward, y downward, angles
    counterclockwise, so points below the pole have negative azimuth.
    """
    dx = p[0] - frame.pole[0]
    dy = p[1] - frame.pole[1]
    radius = float(np.hypot(dx, dy)) / frame.unit
    # y grows downward; negate to keep the mathematical ccw convention.
    azimuth = float(np.arctan2(-dy, dx))
    return radius, azimuth


def point_of(frame: PolarFrame, radius: float, azimuth: float) -> tuple[float, float]:
    """Inverse of :func:`polar_of`."""
    r = radius * frame.unit
    return (frame.pole[0] + r * np.cos(azimuth), frame.pole[1] - r * np.sin(azimuth))
