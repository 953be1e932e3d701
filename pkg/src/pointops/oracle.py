"""Per-pair optimal tone curves and color matrices.

Given an input/ground-truth pair, the best monotone tone curve is a
weighted isotonic regression of per-intensity-bin mean targets (solved
exactly by pool-adjacent-violators), and the best row-sum-constrained
color matrix solves three decoupled equality-constrained least-squares
problems (solved through their KKT systems). Composing the two gives
the performance ceiling of the whole enhancement model on that pair.

Each solver has a deliberately independent brute-force twin used by the
test suite: an accelerated projected-gradient solver for the curve and a
conjugate-direction descent for the matrix. The twins share no solver
code with the production paths.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .image import as_image8, as_imagef, intensities, psnr
from .transform import (
    CURVE_SIZE,
    apply_color_matrix,
    apply_tone_curve,
    as_color_matrix,
    as_tone_curve,
    quantize,
)

MAX_BRUTE_FORCE_BINS = 12


# ---------------------------------------------------------------------------
# Tone-curve problem


@dataclass(frozen=True)
class BinStats:
    """Sufficient statistics of the curve fit, per intensity bin.

    ``weight[k]`` counts input pixels with intensity k; ``target[k]`` is
    the mean ground-truth intensity over those pixels (meaningless where
    the weight is zero).
    """

    weight: np.ndarray  # (256,) int64
    target: np.ndarray  # (256,) float64

    def populated(self) -> np.ndarray:
        """Indices of bins with at least one pixel."""
        return np.flatnonzero(self.weight > 0)

    def merge(self, other: "BinStats") -> "BinStats":
        """Combine statistics from two pixel partitions of one pair."""
        w = self.weight + other.weight
        num = self.weight * self.target + other.weight * other.target
        t = np.divide(num, w, out=np.zeros(CURVE_SIZE), where=w > 0)
        return BinStats(weight=w, target=t)


def bin_stats(inp: np.ndarray, gt: np.ndarray) -> BinStats:
    """Histogram input intensities and average GT intensities per bin."""
    inp = as_image8(inp)
    gt = as_image8(gt)
    if inp.shape != gt.shape:
        raise ValueError(f"dimension mismatch: {inp.shape} vs {gt.shape}")
    y_in = intensities(inp)
    y_gt = intensities(gt).astype(np.float64)
    w = np.bincount(y_in, minlength=CURVE_SIZE).astype(np.int64)
    sums = np.bincount(y_in, weights=y_gt, minlength=CURVE_SIZE)
    t = np.divide(sums, w, out=np.zeros(CURVE_SIZE), where=w > 0)
    return BinStats(weight=w, target=t)


def _weighted_pava(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted L2 isotonic regression by pool-adjacent-violators.

    Single left-to-right pass with a block stack; exact minimizer of
    sum w_i (x_i - v_i)^2 over nondecreasing x.
    """
    block_val: list[float] = []
    block_wt: list[float] = []
    block_len: list[int] = []
    for v, w in zip(values, weights):
        block_val.append(float(v))
        block_wt.append(float(w))
        block_len.append(1)
        while len(block_val) > 1 and block_val[-2] > block_val[-1]:
            v1, w1, n1 = block_val.pop(), block_wt.pop(), block_len.pop()
            v0, w0, n0 = block_val.pop(), block_wt.pop(), block_len.pop()
            w_new = w0 + w1
            block_val.append((v0 * w0 + v1 * w1) / w_new)
            block_wt.append(w_new)
            block_len.append(n0 + n1)
    return np.repeat(block_val, block_len)


def optimal_tone_curve(stats: BinStats) -> np.ndarray:
    """Best monotone curve in [0, 255] for the given bin statistics.

    On populated bins this is the clamped weighted isotonic fit of the
    targets (clamping an isotonic fit to a common interval preserves
    optimality). Unpopulated bins carry no objective weight and are
    filled by linear interpolation between populated neighbors, held
    flat past the ends.
    """
    bins = stats.populated()
    if bins.size == 0:
        raise ValueError("empty image pair: no populated intensity bins")
    fitted = _weighted_pava(stats.target[bins], stats.weight[bins])
    fitted = np.clip(fitted, 0.0, 255.0)
    return np.interp(np.arange(CURVE_SIZE, dtype=np.float64), bins, fitted)


def tf_objective(stats: BinStats, bin_values: np.ndarray) -> float:
    """Weighted squared error of curve values on the populated bins."""
    bins = stats.populated()
    d = np.asarray(bin_values, dtype=np.float64) - stats.target[bins]
    return float(np.sum(stats.weight[bins] * d * d))


def _project_monotone_box(v) -> list[float]:
    # Euclidean projection onto {nondecreasing} intersected with [0,255]^n:
    # unweighted isotonic fit, then clamp. Kept quadratic-time, list-based
    # and simple on purpose; this is the test-side twin, not the
    # production solver.
    vals = [float(x) for x in v]
    lens = [1] * len(vals)
    i = 0
    while i < len(vals) - 1:
        if vals[i] > vals[i + 1]:
            merged = (vals[i] * lens[i] + vals[i + 1] * lens[i + 1]) / (
                lens[i] + lens[i + 1]
            )
            vals[i : i + 2] = [merged]
            lens[i : i + 2] = [lens[i] + lens[i + 1]]
            i = max(i - 1, 0)
        else:
            i += 1
    out: list[float] = []
    for val, length in zip(vals, lens):
        out.extend([min(255.0, max(0.0, val))] * length)
    return out


def brute_force_tone_curve(
    stats: BinStats, tol: float = 1e-10, max_iter: int = 100_000
) -> np.ndarray:
    """Reference solver for the curve QP; returns values on populated bins.

    Accelerated projected-gradient descent (Nesterov momentum, restarted
    with a plain descent step whenever acceleration overshoots) on the
    monotone-box feasible set. Only intended for small instances;
    refuses more than 12 populated bins.
    """
    bins = stats.populated()
    if bins.size == 0:
        raise ValueError("empty image pair: no populated intensity bins")
    if bins.size > MAX_BRUTE_FORCE_BINS:
        raise ValueError(f"too many populated bins ({bins.size} > {MAX_BRUTE_FORCE_BINS})")
    w = [float(v) for v in stats.weight[bins]]
    t = [float(v) for v in stats.target[bins]]
    n = len(w)
    lip = 2.0 * max(w)

    def objective(vec):
        return sum(wi * (vi - ti) ** 2 for wi, vi, ti in zip(w, vec, t))

    def descend(base):
        return _project_monotone_box(
            [base[i] - 2.0 * w[i] * (base[i] - t[i]) / lip for i in range(n)]
        )

    x = _project_monotone_box(t)
    f_x = objective(x)
    y = list(x)
    momentum = 1.0
    for _ in range(max_iter):
        cand = descend(y)
        f_cand = objective(cand)
        if f_cand > f_x:  # overshoot: restart from the last accepted point
            y = list(x)
            momentum = 1.0
            cand = descend(x)  # plain step, cannot increase the objective
            f_cand = objective(cand)
        step = max(abs(ci - xi) for ci, xi in zip(cand, x))
        momentum_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum * momentum))
        coef = (momentum - 1.0) / momentum_new
        y = [ci + coef * (ci - xi) for ci, xi in zip(cand, x)]
        x, f_x, momentum = cand, f_cand, momentum_new
        if step <= tol:
            break
    return np.array(x)


# ---------------------------------------------------------------------------
# Color-matrix problem


@dataclass(frozen=True)
class CcmDesign:
    """Normal-equation accumulators of the color-matrix least squares.

    ``gram`` is sum of p p^T over intermediate pixels p; ``cross[i, j]``
    is sum of z_i p_j with z the ground-truth pixel. Both accumulate in
    float64 and add across pixel partitions.
    """

    gram: np.ndarray  # (3, 3)
    cross: np.ndarray  # (3, 3)

    def merge(self, other: "CcmDesign") -> "CcmDesign":
        return CcmDesign(gram=self.gram + other.gram, cross=self.cross + other.cross)


def ccm_design(mid: np.ndarray, gt: np.ndarray) -> CcmDesign:
    mid = as_imagef(mid)
    gt = as_image8(gt)
    if mid.shape != gt.shape:
        raise ValueError(f"dimension mismatch: {mid.shape} vs {gt.shape}")
    p = mid.reshape(-1, 3)
    z = gt.reshape(-1, 3).astype(np.float64)
    return CcmDesign(gram=p.T @ p, cross=z.T @ p)


def optimal_ccm(design: CcmDesign) -> np.ndarray:
    """Row-wise KKT solution of the constrained color-matrix fit.

    Rows decouple, so each solves min k^T G k - 2 c^T k subject to
    sum(k) = 1 through the bordered system [[G, 1], [1^T, 0]]. A
    rank-deficient system (gray or empty images) falls back to the
    pseudo-inverse, which picks the minimum-norm stationary point.
    """
    # Scale the Gram block down to the constraint row's magnitude (an
    # exact reformulation with mu rescaled); the raw system mixes ~N*255^2
    # entries with ones and solves to far too few digits otherwise.
    scale = max(float(np.abs(design.gram).max()), 1.0)
    kkt = np.zeros((4, 4))
    kkt[:3, :3] = design.gram / scale
    kkt[:3, 3] = 1.0
    kkt[3, :3] = 1.0
    singular = np.linalg.matrix_rank(kkt) < 4
    rows = []
    for i in range(3):
        rhs = np.append(design.cross[i] / scale, 1.0)
        if singular:
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        else:
            sol = np.linalg.solve(kkt, rhs)
        rows.append(sol[:3])
    return as_color_matrix(np.array(rows))


def ccm_objective(design: CcmDesign, ccm) -> float:
    """Variable part of the matrix fit objective (constant ||z||^2 dropped)."""
    ccm = as_color_matrix(ccm)
    total = 0.0
    for i in range(3):
        k = ccm[i]
        total += float(k @ design.gram @ k - 2.0 * design.cross[i] @ k)
    return total


def _minimize_row_quadratic(hess: np.ndarray, lin: np.ndarray, tol: float) -> np.ndarray:
    # Conjugate-direction descent for ½ th^T H th - b^T th from th = 0.
    # Restarted once to polish; exact termination in two steps for a
    # nonsingular 2x2 Hessian, and flat directions are simply skipped.
    theta = np.zeros(2)
    for _ in range(2):
        r = lin - hess @ theta
        d = r.copy()
        for _ in range(8):
            rr = float(r @ r)
            if math.sqrt(rr) <= tol:
                break
            hd = hess @ d
            dhd = float(d @ hd)
            if dhd <= 0.0:
                break  # flat or null direction: objective constant along it
            alpha = rr / dhd
            theta = theta + alpha * d
            r = r - alpha * hd
            beta = float(r @ r) / rr
            d = r + beta * d
    return theta


def brute_force_ccm(design: CcmDesign, tol: float = 1e-10) -> np.ndarray:
    """Reference solver for the matrix QP over the 6 free parameters.

    The diagonal is eliminated through the row-sum constraint and each
    row's two free off-diagonals are driven to a stationary point by
    first-order conjugate-direction descent.
    """
    rows = []
    for i in range(3):
        others = [j for j in range(3) if j != i]
        basis = np.zeros((3, 2))
        for col, j in enumerate(others):
            basis[j, col] = 1.0
            basis[i, col] = -1.0
        e = np.zeros(3)
        e[i] = 1.0
        hess = 2.0 * basis.T @ design.gram @ basis
        lin = 2.0 * basis.T @ (design.cross[i] - design.gram @ e)
        scale = 1.0 + float(np.abs(lin).max())
        theta = _minimize_row_quadratic(hess, lin, tol * scale)
        rows.append(e + basis @ theta)
    return as_color_matrix(np.array(rows))


# ---------------------------------------------------------------------------
# End-to-end ceiling


@dataclass(frozen=True)
class UpperBoundReport:
    """Per-pair optimum and the PSNRs of every pipeline stage."""

    curve: np.ndarray
    ccm: np.ndarray
    psnr_in: float
    psnr_mid: float
    psnr_out: float
    millis: float


def upper_bound(inp: np.ndarray, gt: np.ndarray) -> UpperBoundReport:
    """Fit the per-pair optimal curve and matrix; report stage PSNRs.

    The intermediate image is kept unclamped between the two fits so the
    matrix optimum is not biased by premature saturation.
    """
    inp = as_image8(inp)
    gt = as_image8(gt)
    if inp.shape != gt.shape:
        raise ValueError(f"dimension mismatch: {inp.shape} vs {gt.shape}")
    start = time.perf_counter()
    curve = optimal_tone_curve(bin_stats(inp, gt))
    mid = apply_tone_curve(inp, curve)
    ccm = optimal_ccm(ccm_design(mid, gt))
    out = quantize(apply_color_matrix(mid, ccm))
    millis = (time.perf_counter() - start) * 1000.0
    return UpperBoundReport(
        curve=curve,
        ccm=ccm,
        psnr_in=psnr(inp, gt),
        psnr_mid=psnr(quantize(mid), gt),
        psnr_out=psnr(out, gt),
        millis=millis,
    )


def enhance_with(inp: np.ndarray, report: UpperBoundReport) -> np.ndarray:
    """Re-apply a fitted optimum to an image (curve is already feasible)."""
    return quantize(apply_color_matrix(apply_tone_curve(inp, as_tone_curve(report.curve)), report.ccm))
