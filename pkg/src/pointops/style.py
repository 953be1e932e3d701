"""Named style profiles: lightweight predictors of enhancement parameters.

A profile is fit from example (input, ground-truth) pairs of a single
style. For every pair the per-pair optimal curve and matrix are
computed, the curve is compressed to basis coefficients, and a ridge
regression maps global image statistics to those targets. At inference
time the profile predicts a feasible (curve, matrix) pair for an unseen
image; profiles can be switched, interpolated in weight space, or
chained in series.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .basis import CurveBasis, basis_from_json, basis_id, basis_to_json, project, reconstruct
from .image import as_image8, intensities
from .oracle import bin_stats, ccm_design, optimal_ccm, optimal_tone_curve
from .transform import apply_tone_curve, as_color_matrix, enhance, monotonize

FEATURE_SIZE = 48
HIST_BINS = 32
DEFAULT_RIDGE = 1e-3

# Row-major order of the six free (off-diagonal) color-matrix entries;
# the diagonal follows from the unit row sums.
OFF_DIAGONAL = ((0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1))


def _nearest_rank(sorted_vals: np.ndarray, q: float) -> float:
    rank = max(1, math.ceil(q / 100.0 * sorted_vals.size))
    return float(sorted_vals[rank - 1])


def features(img: np.ndarray) -> np.ndarray:
    """48 global statistics of an image.

    Layout: 32-bin normalized intensity histogram, per-channel means,
    per-channel standard deviations, per-channel 5th and 95th
    percentiles (nearest rank), then 4 reserved zeros.
    """
    img = as_image8(img)
    y = intensities(img)
    hist = np.bincount(y // (256 // HIST_BINS), minlength=HIST_BINS).astype(np.float64)
    hist /= y.size
    flat = img.reshape(-1, 3).astype(np.float64)
    means = flat.mean(axis=0)
    stds = flat.std(axis=0)
    lo = np.empty(3)
    hi = np.empty(3)
    for ch in range(3):
        ordered = np.sort(flat[:, ch])
        lo[ch] = _nearest_rank(ordered, 5.0)
        hi[ch] = _nearest_rank(ordered, 95.0)
    return np.concatenate([hist, means, stds, lo, hi, np.zeros(4)])


def ccm_free_params(ccm) -> np.ndarray:
    """The six off-diagonal entries, row-major."""
    ccm = as_color_matrix(ccm)
    return np.array([ccm[i, j] for i, j in OFF_DIAGONAL])


def ccm_from_free_params(params) -> np.ndarray:
    """Expand six off-diagonals to a full matrix with exact unit row sums."""
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (6,):
        raise ValueError(f"expected 6 parameters, got shape {params.shape}")
    ccm = np.zeros((3, 3))
    for (i, j), v in zip(OFF_DIAGONAL, params):
        ccm[i, j] = v
    for i in range(3):
        ccm[i, i] = 1.0 - (ccm[i].sum() - ccm[i, i])
    return ccm


@dataclass(frozen=True)
class StyleProfile:
    """Weights of one style's parameter predictor.

    ``coeff_weights`` maps the 48 features plus a bias to basis
    coefficients; ``ccm_weights`` maps the same inputs to the 6 free
    matrix entries.
    """

    name: str
    basis: CurveBasis
    coeff_weights: np.ndarray  # (49, M)
    ccm_weights: np.ndarray  # (49, 6)
    pair_count: int = 0
    ridge: float = 0.0
    fit_rmse: float | None = None


def same_basis(a: CurveBasis, b: CurveBasis) -> bool:
    return np.array_equal(a.vectors, b.vectors) and np.array_equal(a.sigma, b.sigma)


def fit_style(pairs, basis: CurveBasis, ridge: float = DEFAULT_RIDGE, name: str = "style") -> StyleProfile:
    """Fit a profile from (input, ground-truth) image pairs.

    Targets come from the per-pair oracle; the regression is ridge least
    squares with an unpenalized bias, so a very large ridge collapses to
    predicting the mean target.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one training pair")
    if ridge < 0.0:
        raise ValueError("ridge must be nonnegative")
    rows = []
    targets = []
    for inp, gt in pairs:
        curve = optimal_tone_curve(bin_stats(inp, gt))
        mid = apply_tone_curve(inp, curve)
        ccm = optimal_ccm(ccm_design(mid, gt))
        rows.append(np.append(features(inp), 1.0))
        targets.append(np.concatenate([project(basis, curve), ccm_free_params(ccm)]))
    design = np.asarray(rows)
    y = np.asarray(targets)
    if ridge > 0.0:
        # penalize every weight except the bias column
        penalty = math.sqrt(ridge) * np.eye(FEATURE_SIZE + 1)[:FEATURE_SIZE]
        design_aug = np.vstack([design, penalty])
        y_aug = np.vstack([y, np.zeros((FEATURE_SIZE, y.shape[1]))])
    else:
        design_aug, y_aug = design, y
    weights = np.linalg.lstsq(design_aug, y_aug, rcond=None)[0]
    resid = design @ weights - y
    rmse = float(np.sqrt(np.mean(resid * resid)))
    return StyleProfile(
        name=name,
        basis=basis,
        coeff_weights=weights[:, : basis.m],
        ccm_weights=weights[:, basis.m :],
        pair_count=len(pairs),
        ridge=ridge,
        fit_rmse=rmse,
    )


def constant_profile(name: str, basis: CurveBasis, curve, ccm) -> StyleProfile:
    """Bias-only profile that predicts the same (curve, matrix) everywhere.

    The curve is represented through the basis, so it reproduces exactly
    only when it lies in the basis span.
    """
    w_c = np.zeros((FEATURE_SIZE + 1, basis.m))
    w_c[-1] = project(basis, curve)
    w_k = np.zeros((FEATURE_SIZE + 1, 6))
    w_k[-1] = ccm_free_params(ccm)
    return StyleProfile(name=name, basis=basis, coeff_weights=w_c, ccm_weights=w_k)


def predict_params(profile: StyleProfile, img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw regression outputs: (basis coefficients, 6 free matrix entries)."""
    f = np.append(features(img), 1.0)
    return profile.coeff_weights.T @ f, profile.ccm_weights.T @ f


def predict(profile: StyleProfile, img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Predicted feasible (tone curve, color matrix) for an image."""
    coeffs, free = predict_params(profile, img)
    curve = monotonize(reconstruct(profile.basis, coeffs))
    return curve, ccm_from_free_params(free)


def enhance_with_style(img: np.ndarray, profile: StyleProfile) -> np.ndarray:
    curve, ccm = predict(profile, img)
    return enhance(img, curve, ccm)


def interpolate_styles(a: StyleProfile, b: StyleProfile, t: float, name: str | None = None) -> StyleProfile:
    """Blend two profiles in weight space; t=0 gives a, t=1 gives b."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    if not same_basis(a.basis, b.basis):
        raise ValueError("profiles were fit against different bases")
    return StyleProfile(
        name=name if name is not None else f"{a.name}~{b.name}@{t:g}",
        basis=a.basis,
        coeff_weights=(1.0 - t) * a.coeff_weights + t * b.coeff_weights,
        ccm_weights=(1.0 - t) * a.ccm_weights + t * b.ccm_weights,
        pair_count=0,
        ridge=(1.0 - t) * a.ridge + t * b.ridge,
        fit_rmse=None,
    )


def chain_styles(img: np.ndarray, profiles) -> np.ndarray:
    """Apply profiles in series, re-reading features after each stage."""
    profiles = list(profiles)
    if not profiles:
        raise ValueError("chain needs at least one profile")
    out = img
    for profile in profiles:
        out = enhance_with_style(out, profile)
    return out


# ---------------------------------------------------------------------------
# Style sets: a named map of profiles sharing one basis


class StyleSet:
    """Profiles of several styles over one shared basis."""

    def __init__(self, basis: CurveBasis):
        self.basis = basis
        self.profiles: dict[str, StyleProfile] = {}

    def add(self, profile: StyleProfile) -> None:
        if not same_basis(profile.basis, self.basis):
            raise ValueError(f"profile {profile.name!r} uses a different basis")
        self.profiles[profile.name] = profile

    def get(self, name: str) -> StyleProfile:
        if name not in self.profiles:
            raise KeyError(f"unknown style {name!r}")
        return self.profiles[name]

    def names(self) -> list[str]:
        return list(self.profiles)


def _profile_to_json(profile: StyleProfile) -> dict:
    return {
        "name": profile.name,
        "basis_id": basis_id(profile.basis),
        "w_coeff": profile.coeff_weights.tolist(),
        "w_ccm": profile.ccm_weights.tolist(),
        "pairs": profile.pair_count,
        "ridge": profile.ridge,
        "fit_rmse": profile.fit_rmse,
    }


def _profile_from_json(obj: dict, basis: CurveBasis) -> StyleProfile:
    profile = StyleProfile(
        name=str(obj["name"]),
        basis=basis,
        coeff_weights=np.asarray(obj["w_coeff"], dtype=np.float64),
        ccm_weights=np.asarray(obj["w_ccm"], dtype=np.float64),
        pair_count=int(obj["pairs"]),
        ridge=float(obj["ridge"]),
        fit_rmse=None if obj.get("fit_rmse") is None else float(obj["fit_rmse"]),
    )
    if profile.coeff_weights.shape != (FEATURE_SIZE + 1, basis.m):
        raise ValueError(f"profile {profile.name!r} does not match basis size")
    if obj.get("basis_id") != basis_id(basis):
        raise ValueError(f"profile {profile.name!r} references a different basis")
    return profile


def style_set_to_json(styles: StyleSet) -> dict:
    return {
        "basis": basis_to_json(styles.basis),
        "profiles": {name: _profile_to_json(p) for name, p in styles.profiles.items()},
    }


def style_set_from_json(obj: dict) -> StyleSet:
    styles = StyleSet(basis_from_json(obj["basis"]))
    for name, pobj in obj["profiles"].items():
        profile = _profile_from_json(pobj, styles.basis)
        profile = replace(profile, name=name)
        styles.add(profile)
    return styles


def save_style_set(styles: StyleSet, path) -> None:
    Path(path).write_text(json.dumps(style_set_to_json(styles)))


def load_style_set(path) -> StyleSet:
    return style_set_from_json(json.loads(Path(path).read_text()))
