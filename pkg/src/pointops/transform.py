"""The forward two-step enhancement.

Step one applies a 256-entry monotone tone curve to pixel intensity and
rescales the RGB channels by the common intensity ratio, so hue is
preserved. Step two multiplies each pixel by a 3x3 color matrix whose
rows sum to one (grays map to grays). Intermediate values stay in
unclamped float64; quantization back to 8 bits happens once, at the end.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .image import as_image8, as_imagef, intensity_image, round_half_away

CURVE_SIZE = 256
ROW_SUM_TOL = 1e-9


def as_tone_curve(values) -> np.ndarray:
    """Validate shape/finiteness of a 256-entry curve; returns float64."""
    curve = np.asarray(values, dtype=np.float64)
    if curve.shape != (CURVE_SIZE,):
        raise ValueError(f"tone curve must have {CURVE_SIZE} entries, got {curve.shape}")
    if not np.all(np.isfinite(curve)):
        raise ValueError("tone curve contains non-finite values")
    return curve


def identity_curve() -> np.ndarray:
    return np.arange(CURVE_SIZE, dtype=np.float64)


def is_monotone_curve(curve: np.ndarray) -> bool:
    curve = as_tone_curve(curve)
    return bool(
        curve[0] >= 0.0 and curve[-1] <= 255.0 and np.all(np.diff(curve) >= 0.0)
    )


def monotonize(values) -> np.ndarray:
    """Make a raw curve feasible: forward max sweep, then clamp to [0, 255].

    Each entry that drops below its predecessor is raised to match it;
    the sweep is idempotent and leaves already-monotone curves untouched.
    """
    curve = as_tone_curve(values)
    return np.clip(np.maximum.accumulate(curve), 0.0, 255.0)


def as_color_matrix(entries) -> np.ndarray:
    """Validate a 3x3 matrix with unit row sums (entries may be negative)."""
    ccm = np.asarray(entries, dtype=np.float64)
    if ccm.shape == (9,):
        ccm = ccm.reshape(3, 3)
    if ccm.shape != (3, 3):
        raise ValueError(f"color matrix must be 3x3, got {ccm.shape}")
    if not np.all(np.isfinite(ccm)):
        raise ValueError("color matrix contains non-finite values")
    sums = ccm.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
        raise ValueError(f"color matrix row sums {sums} deviate from 1")
    return ccm


def identity_matrix() -> np.ndarray:
    return np.eye(3, dtype=np.float64)


def apply_tone_curve(img: np.ndarray, curve) -> np.ndarray:
    """Map intensity through the curve and scale RGB by the same ratio.

    A pixel with intensity y becomes (curve[y] / y) * (r, g, b); pixels
    with zero intensity go to the curve's black level (x0, x0, x0).
    Output is unclamped float64.
    """
    img = as_image8(img)
    curve = as_tone_curve(curve)
    y = intensity_image(img)
    ratio = curve[y] / np.where(y > 0, y, 1)
    out = img.astype(np.float64) * ratio[..., None]
    out[y == 0] = curve[0]
    return out


def apply_color_matrix(img: np.ndarray, ccm) -> np.ndarray:
    """Per-pixel matrix product ccm @ (r, g, b); unclamped float64."""
    img = as_imagef(img)
    ccm = as_color_matrix(ccm)
    return img @ ccm.T


def quantize(img: np.ndarray) -> np.ndarray:
    """Round half-away-from-zero, clamp to [0, 255], return uint8."""
    img = as_imagef(img)
    return np.clip(round_half_away(img), 0.0, 255.0).astype(np.uint8)


def enhance(img: np.ndarray, curve, ccm) -> np.ndarray:
    """Full pipeline: monotonize, tone curve, color matrix, quantize."""
    return quantize(apply_color_matrix(apply_tone_curve(img, monotonize(curve)), ccm))


# ---------------------------------------------------------------------------
# Text serialization: curves are 256 whitespace-separated reals, matrices
# 9 reals in row-major order. %.17g round-trips float64 exactly.


def curve_to_text(curve) -> str:
    return "\n".join(format(v, ".17g") for v in as_tone_curve(curve)) + "\n"


def curve_from_text(text: str) -> np.ndarray:
    parts = text.split()
    if len(parts) != CURVE_SIZE:
        raise ValueError(f"expected {CURVE_SIZE} values, got {len(parts)}")
    return as_tone_curve([float(p) for p in parts])


def matrix_to_text(ccm) -> str:
    return "\n".join(
        " ".join(format(v, ".17g") for v in row) for row in as_color_matrix(ccm)
    ) + "\n"


def matrix_from_text(text: str) -> np.ndarray:
    parts = text.split()
    if len(parts) != 9:
        raise ValueError(f"expected 9 values, got {len(parts)}")
    return as_color_matrix(np.array([float(p) for p in parts]).reshape(3, 3))


def save_tone_curve(curve, path) -> None:
    Path(path).write_text(curve_to_text(curve))


def load_tone_curve(path) -> np.ndarray:
    return curve_from_text(Path(path).read_text())


def save_color_matrix(ccm, path) -> None:
    Path(path).write_text(matrix_to_text(ccm))


def load_color_matrix(path) -> np.ndarray:
    return matrix_from_text(Path(path).read_text())
