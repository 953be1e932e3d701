"""Pixel-level primitives: 8-bit RGB images, intensity, gamma, and PSNR.

Images are numpy arrays of shape (height, width, 3). Two flavors are used
throughout the package:

* ``Image8`` -- dtype uint8, channels in [0, 255]; the interchange unit.
* ``ImageF`` -- dtype float64, unclamped working precision between
  pipeline stages.

All functions here are pure; none mutate their inputs.
"""

from __future__ import annotations

import math

import numpy as np

# Rec. BT.709 OETF reference parameters.
BT709_THRESHOLD = 0.018
BT709_GAIN = 4.5
BT709_EXPONENT = 0.45
BT709_OFFSET = 0.099

PEAK = 255.0


def as_image8(pixels) -> np.ndarray:
    """Validate and return an (H, W, 3) uint8 image array.

    Accepts any array-like; integer values must already lie in [0, 255].
    """
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("image must have at least one pixel")
    if arr.dtype != np.uint8:
        if np.issubdtype(arr.dtype, np.floating):
            raise ValueError("float pixels must be quantized before as_image8")
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError("channel values out of [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_imagef(pixels) -> np.ndarray:
    """Validate and return an (H, W, 3) float64 image array (finite values)."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite channel values")
    return arr


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, halves away from zero.

    The single quantization rule used everywhere a real becomes an 8-bit
    value (numpy's default rounding is half-to-even, which is not wanted
    here).
    """
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def intensity_of(pixel) -> int:
    """Intensity of one (r, g, b) pixel: the channel mean, rounded.

    Exact in integer arithmetic; thirds never land on .5, so the result
    is plain round-to-nearest.
    """
    r, g, b = (int(c) for c in pixel)
    for c in (r, g, b):
        if c < 0 or c > 255:
            raise ValueError(f"channel {c} out of [0, 255]")
    return (2 * (r + g + b) + 3) // 6


def intensities(img: np.ndarray) -> np.ndarray:
    """Per-pixel intensities in raster order, shape (H*W,), dtype int64."""
    img = as_image8(img)
    s = img.reshape(-1, 3).astype(np.int64).sum(axis=1)
    return (2 * s + 3) // 6


def intensity_image(img: np.ndarray) -> np.ndarray:
    """Like :func:`intensities` but keeps the (H, W) shape."""
    img = as_image8(img)
    s = img.astype(np.int64).sum(axis=2)
    return (2 * s + 3) // 6


def _bt709_encode_real(l: np.ndarray) -> np.ndarray:
    l = np.asarray(l, dtype=np.float64)
    return np.where(
        l < BT709_THRESHOLD,
        BT709_GAIN * l,
        (1.0 + BT709_OFFSET) * np.power(np.maximum(l, 0.0), BT709_EXPONENT) - BT709_OFFSET,
    )


def _bt709_decode_real(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return np.where(
        v < BT709_GAIN * BT709_THRESHOLD,
        v / BT709_GAIN,
        np.power((v + BT709_OFFSET) / (1.0 + BT709_OFFSET), 1.0 / BT709_EXPONENT),
    )


def _bt709_lut(direction: str) -> np.ndarray:
    levels = np.arange(256, dtype=np.float64) / PEAK
    if direction == "encode":
        out = _bt709_encode_real(levels)
    elif direction == "decode":
        out = _bt709_decode_real(levels)
    else:
        raise ValueError(f"direction must be 'encode' or 'decode', got {direction!r}")
    q = round_half_away(out * PEAK)
    return np.clip(q, 0, 255).astype(np.uint8)


_BT709_LUTS = {d: _bt709_lut(d) for d in ("encode", "decode")}


def gamma_bt709(img: np.ndarray, direction: str = "encode") -> np.ndarray:
    """Apply the BT.709 opto-electronic transfer curve per channel.

    ``encode`` maps linear light to gamma-coded values
    (V = 4.5 L below 0.018, else 1.099 L^0.45 - 0.099 on [0, 1]);
    ``decode`` applies the inverse. Channels are normalized to [0, 1],
    transformed, and re-quantized.
    """
    img = as_image8(img)
    if direction not in _BT709_LUTS:
        raise ValueError(f"direction must be 'encode' or 'decode', got {direction!r}")
    return _BT709_LUTS[direction][img]


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB between two same-sized images.

    MSE is averaged over all 3N channel values in double precision.
    Identical images give ``math.inf``.
    """
    a = as_image8(a)
    b = as_image8(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)
