"""Paired-dataset ingestion and the synthetic pair generator.

Real datasets arrive either as a JSON-lines manifest of
``{"input": ..., "gt": ...}`` records or as two directories matched by
filename. Because the paper-scale corpora cannot ship with the package,
a seeded generator fabricates style-consistent pairs: random full-range
images pushed through one shared (curve, matrix) per dataset, optionally
with observation noise on the ground truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fileio
from .transform import as_color_matrix, as_tone_curve, enhance, quantize

SUPPORTED_SUFFIXES = (".ppm", ".png")


class DatasetError(Exception):
    """Base class for dataset loading problems."""


class MissingFileError(DatasetError):
    pass


class DimensionMismatchError(DatasetError):
    pass


class EmptyDatasetError(DatasetError):
    pass


@dataclass(frozen=True)
class PairedDataset:
    """Validated list of (input path, gt path) pairs, input-lexicographic."""

    name: str
    pairs: list

    def __len__(self) -> int:
        return len(self.pairs)

    def load_pair(self, index: int):
        inp_path, gt_path = self.pairs[index]
        return fileio.read_image(inp_path), fileio.read_image(gt_path)


def _check_pair(inp_path: Path, gt_path: Path) -> None:
    for p in (inp_path, gt_path):
        if not p.is_file():
            raise MissingFileError(f"missing file: {p}")
    inp = fileio.read_image(inp_path)
    gt = fileio.read_image(gt_path)
    if inp.shape != gt.shape:
        raise DimensionMismatchError(
            f"dimension mismatch: {inp_path} is {inp.shape[:2]}, {gt_path} is {gt.shape[:2]}"
        )


def load_manifest(path, name: str | None = None) -> PairedDataset:
    """Load pairs from a JSON-lines manifest; paths resolve relative to it."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"missing manifest: {path}")
    base = path.parent
    pairs = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            inp, gt = record["input"], record["gt"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DatasetError(f"{path}:{lineno}: bad manifest line: {exc}") from None
        pairs.append(((base / inp).resolve(), (base / gt).resolve()))
    pairs.sort(key=lambda pair: str(pair[0]))
    if not pairs:
        raise EmptyDatasetError(f"manifest {path} lists no pairs")
    for inp_path, gt_path in pairs:
        _check_pair(inp_path, gt_path)
    return PairedDataset(name=name or path.stem, pairs=pairs)


def load_dir_pair(input_dir, gt_dir, name: str | None = None) -> PairedDataset:
    """Pair images from two directories by identical filename."""
    input_dir, gt_dir = Path(input_dir), Path(gt_dir)
    for d in (input_dir, gt_dir):
        if not d.is_dir():
            raise MissingFileError(f"missing directory: {d}")
    names = sorted(
        p.name for p in input_dir.iterdir() if p.suffix.lower() in SUPPORTED_SUFFIXES
    )
    if not names:
        raise EmptyDatasetError(f"no {'/'.join(SUPPORTED_SUFFIXES)} images in {input_dir}")
    pairs = []
    for fname in names:
        gt_path = gt_dir / fname
        if not gt_path.is_file():
            raise MissingFileError(f"missing file: {gt_path}")
        pairs.append((input_dir / fname, gt_path))
    for inp_path, gt_path in pairs:
        _check_pair(inp_path, gt_path)
    return PairedDataset(name=name or input_dir.parent.name or input_dir.name, pairs=pairs)


# ---------------------------------------------------------------------------
# Synthetic generation


def random_monotone_curve(rng: np.random.Generator, low_max: float = 10.0,
                          high_range: tuple[float, float] = (195.0, 220.0)) -> np.ndarray:
    """Strictly increasing random curve from a small black level to ~high.

    The moderate ceiling keeps curve/intensity ratios tame so generated
    pairs rarely saturate, which in turn keeps round trips through the
    fitting pipeline quantization-limited.
    """
    low = rng.uniform(0.0, low_max)
    high = rng.uniform(*high_range)
    steps = rng.uniform(0.2, 1.0, size=255)
    curve = np.concatenate([[0.0], np.cumsum(steps)])
    curve = low + (high - low) * curve / curve[-1]
    return as_tone_curve(curve)


def random_color_matrix(rng: np.random.Generator, spread: float = 0.12) -> np.ndarray:
    """Near-identity matrix whose rows AND columns sum to one.

    Unit column sums preserve pixel intensity exactly, so a pair built
    from this matrix stays consistent with intensity-first fitting.
    """
    t00, t01, t10, t11 = rng.uniform(-spread, spread, size=4)
    z = np.array(
        [
            [t00, t01, -(t00 + t01)],
            [t10, t11, -(t10 + t11)],
            [-(t00 + t10), -(t01 + t11), (t00 + t10) + (t01 + t11)],
        ]
    )
    return as_color_matrix(np.eye(3) + z)


def random_input_image(rng: np.random.Generator, width: int, height: int,
                       chroma: float = 0.45, cast: float = 0.12) -> np.ndarray:
    """Full-intensity-range noise image with a per-image color cast.

    Chroma scales with the distance to the gamut ends, the way real
    photographs desaturate toward black and white. That keeps pixels far
    enough inside the gamut that a near-identity color matrix cannot
    push them out, so synthesized pairs stay clamp-free.
    """
    base = rng.uniform(2.0, 253.0, size=(height, width, 1))
    headroom = np.minimum(base, 255.0 - base)
    dev = rng.uniform(-chroma, chroma, size=(height, width, 3))
    tint = rng.uniform(-cast, cast, size=3)
    return quantize(np.clip(base + (dev + tint) * headroom, 0.0, 255.0))


def synth_pair(rng: np.random.Generator, width: int, height: int,
               curve, ccm, noise_sigma: float = 0.0):
    """One (input, gt) pair from a fixed generator (curve, matrix)."""
    inp = random_input_image(rng, width, height)
    gt = enhance(inp, curve, ccm)
    if noise_sigma > 0.0:
        noisy = gt.astype(np.float64) + rng.normal(0.0, noise_sigma, size=gt.shape)
        gt = quantize(noisy)
    return inp, gt


def generate_dataset(out_dir, count: int, width: int = 128, height: int = 128,
                     seed: int = 0, noise_sigma: float = 0.0, fmt: str = "ppm",
                     name: str | None = None) -> PairedDataset:
    """Write a style-consistent synthetic dataset to disk.

    Creates ``input/`` and ``gt/`` subdirectories plus a
    ``generator.json`` sidecar recording the seed and the shared
    (curve, matrix) that defines the style.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if fmt not in ("ppm", "png"):
        raise ValueError(f"format must be ppm or png, got {fmt!r}")
    out_dir = Path(out_dir)
    input_dir = out_dir / "input"
    gt_dir = out_dir / "gt"
    input_dir.mkdir(parents=True, exist_ok=True)
    gt_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    curve = random_monotone_curve(rng)
    ccm = random_color_matrix(rng)
    pairs = []
    for i in range(count):
        inp, gt = synth_pair(rng, width, height, curve, ccm, noise_sigma)
        fname = f"pair_{i:04d}.{fmt}"
        fileio.write_image(inp, input_dir / fname)
        fileio.write_image(gt, gt_dir / fname)
        pairs.append((input_dir / fname, gt_dir / fname))
    sidecar = {
        "seed": seed,
        "count": count,
        "width": width,
        "height": height,
        "noise_sigma": noise_sigma,
        "curve": [float(v) for v in curve],
        "ccm": [float(v) for v in np.asarray(ccm).ravel()],
    }
    (out_dir / "generator.json").write_text(json.dumps(sidecar))
    return PairedDataset(name=name or out_dir.name, pairs=pairs)


def in_memory_pairs(count: int, width: int = 64, height: int = 64, seed: int = 0,
                    noise_sigma: float = 0.0):
    """Synthetic pairs without touching disk; returns (pairs, curve, ccm)."""
    rng = np.random.default_rng(seed)
    curve = random_monotone_curve(rng)
    ccm = random_color_matrix(rng)
    pairs = [synth_pair(rng, width, height, curve, ccm, noise_sigma) for _ in range(count)]
    return pairs, curve, ccm
