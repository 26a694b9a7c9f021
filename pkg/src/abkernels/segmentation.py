"""Two-class image segmentation by thresholding a pixel divergence.

Walks the raster once; at each position (i, j) with i, j >= 1 a divergence
between two neighboring pixels is compared against a threshold ``k``:
below-threshold pixels become foreground, the rest (and the top row /
leftmost column, which the single pass never visits) stay background.

Channel values are mapped to strictly positive numbers first, either on the
raw 0..255 scale or rescaled to the unit interval, with a floor ``epsilon``
so that log- and negative-exponent divergences stay finite on black pixels.
"""

from dataclasses import dataclass, replace

import numpy as np

from .divergences import DivergenceSpec
from .measures import ValidationError

NEIGHBOR_MODES = ("literal", "current")
NORMALIZATIONS = ("raw-255", "unit-interval")
DEFAULT_EPSILON = {"raw-255": 1.0, "unit-interval": 1e-3}


@dataclass(frozen=True)
class RgbImage:
    """8-bit three-channel raster; pixels indexed [row, column, channel]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValidationError("pixels must have shape (height, width, 3)")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255):
                raise ValidationError("channel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class SegmentationConfig:
    """Divergence, threshold and mapping choices for one segmentation run.

    ``neighbor_mode="literal"`` compares the left neighbor against the top
    neighbor; ``"current"`` compares the current pixel against each of them
    and takes the larger divergence.  ``epsilon`` defaults to 1 on the raw
    scale and 1e-3 on the unit scale.
    """

    spec: DivergenceSpec
    k: float
    normalization: str
    epsilon: float | None = None
    neighbor_mode: str = "literal"
    foreground: tuple = (255, 255, 255)
    background: tuple = (0, 0, 0)

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise ValidationError(
                f"unknown normalization {self.normalization!r}")
        if self.neighbor_mode not in NEIGHBOR_MODES:
            raise ValidationError(
                f"unknown neighbor mode {self.neighbor_mode!r}")
        if not (self.k > 0):
            raise ValidationError("threshold k must be positive")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon",
                               DEFAULT_EPSILON[self.normalization])
        if not (self.epsilon > 0):
            raise ValidationError("epsilon must be positive")
        for name in ("foreground", "background"):
            value = tuple(int(v) for v in getattr(self, name))
            if len(value) != 3 or any(v < 0 or v > 255 for v in value):
                raise ValidationError(f"{name} must be an RGB triple in 0..255")
            object.__setattr__(self, name, value)


def _map_channels(config: SegmentationConfig, values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if config.normalization == "unit-interval":
        return np.maximum(v / 255.0, config.epsilon)
    return np.maximum(v, config.epsilon)


def pixel_divergence(config: SegmentationConfig, p1, p2) -> float:
    """Channel-summed divergence between two pixels under the config map."""
    a = _map_channels(config, p1)
    b = _map_channels(config, p2)
    return float(np.sum(config.spec.evaluate(a, b)))


def _divergence_field(config: SegmentationConfig, image: RgbImage) -> np.ndarray:
    """Per-position divergence for all (i, j) with i, j >= 1."""
    px = _map_channels(config, image.pixels)
    left = px[1:, :-1]
    top = px[:-1, 1:]
    if config.neighbor_mode == "literal":
        return np.sum(config.spec.evaluate(left, top), axis=-1)
    cur = px[1:, 1:]
    d_left = np.sum(config.spec.evaluate(cur, left), axis=-1)
    d_top = np.sum(config.spec.evaluate(cur, top), axis=-1)
    return np.maximum(d_left, d_top)


def segment(image: RgbImage, config: SegmentationConfig) -> RgbImage:
    """Threshold the neighbor divergence into a two-valued image.

    Positions with divergence strictly below ``k`` get the foreground
    color; everything else, including the never-visited first row and
    column, gets the background color.
    """
    if image.height < 2 or image.width < 2:
        raise ValidationError("image must be at least 2x2")
    div = _divergence_field(config, image)
    out = np.empty_like(image.pixels)
    out[:, :] = np.array(config.background, dtype=np.uint8)
    fg = np.array(config.foreground, dtype=np.uint8)
    bg = np.array(config.background, dtype=np.uint8)
    out[1:, 1:] = np.where((div < config.k)[:, :, None], fg, bg)
    return RgbImage(out)


def threshold_sweep(image: RgbImage, config: SegmentationConfig, ks):
    """Segment the same image at each threshold; foreground grows with k."""
    ks = list(ks)
    if not ks:
        raise ValidationError("need at least one threshold")
    return [segment(image, replace(config, k=float(k))) for k in ks]
