"""Compact curve bases: SVD of a corpus of optimal tone curves.

Stacking L fitted curves as columns of a 256 x L matrix X and taking the
top-M left singular vectors gives the best rank-M subspace for
representing curves of that population. A curve is then carried around
as M coefficients instead of 256 samples.

The decomposition runs on the 256 x 256 symmetric matrix X X^T with a
cyclic Jacobi eigensolver; no linear-algebra backend is involved, which
keeps the result bit-reproducible across platforms.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .transform import CURVE_SIZE, as_tone_curve

# Coefficient count at which reconstruction quality saturates for tone
# curve corpora; callers can always ask for more.
DEFAULT_NUM_COMPONENTS = 10


def as_corpus(curves) -> np.ndarray:
    """Stack curves (one per row or an iterable of 256-vectors) into 256 x L."""
    arr = np.asarray(curves, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != CURVE_SIZE:
        raise ValueError(f"corpus must be L x {CURVE_SIZE} curves, got {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("corpus is empty")
    if np.any(arr < -1e-9) or np.any(arr > 255.0 + 1e-9):
        raise ValueError("corpus curves must lie in [0, 255]")
    if np.any(np.diff(arr, axis=1) < -1e-9):
        raise ValueError("corpus curves must be nondecreasing")
    return arr.T.copy()


def _off_norm(a: np.ndarray) -> float:
    # computed from the off-diagonal entries directly; the textbook
    # ||A||^2 - ||diag||^2 form cancels catastrophically near convergence
    hollow = a - np.diag(np.diag(a))
    return float(np.linalg.norm(hollow))


def jacobi_eigh(sym: np.ndarray, rel_tol: float = 1e-14, max_sweeps: int = 60):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm falls below ``rel_tol``
    times the matrix norm (or stops shrinking at the floating floor).
    Returns eigenvalues in descending order and the matching orthonormal
    eigenvector columns.
    """
    a = np.array(sym, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    vecs = np.eye(n)
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n), vecs
    skip_tol = rel_tol * scale / max(n, 1)
    prev_off = math.inf
    for sweep in range(max_sweeps):
        off = _off_norm(a)
        if off <= rel_tol * scale or off >= prev_off:
            break
        prev_off = off
        # early sweeps skip entries too small to matter yet
        thresh = max(0.2 * off / (n * n) if sweep < 3 else 0.0, skip_tol)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= thresh:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                v_p = vecs[:, p].copy()
                v_q = vecs[:, q].copy()
                vecs[:, p] = c * v_p - s * v_q
                vecs[:, q] = s * v_p + c * v_q
    eigvals = np.diag(a).copy()
    order = np.argsort(-eigvals, kind="stable")
    return eigvals[order], vecs[:, order]


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # Sign convention: largest-magnitude entry of each column is positive;
    # argmax picks the lowest index on ties.
    out = vectors.copy()
    for j in range(out.shape[1]):
        k = int(np.argmax(np.abs(out[:, j])))
        if out[k, j] < 0.0:
            out[:, j] = -out[:, j]
    return out


@dataclass(frozen=True)
class CurveBasis:
    """Top-M singular directions of a curve corpus.

    ``vectors`` is 256 x M with orthonormal columns; ``sigma`` holds the
    matching nonincreasing singular values.
    """

    vectors: np.ndarray
    sigma: np.ndarray

    @property
    def m(self) -> int:
        return self.vectors.shape[1]


def build_basis(curves, m: int) -> CurveBasis:
    """Top-``m`` basis of a corpus (rows of ``curves`` are 256-entry curves)."""
    corpus = as_corpus(curves)
    count = corpus.shape[1]
    if not 1 <= m <= min(CURVE_SIZE, count):
        raise ValueError(f"m={m} out of range 1..{min(CURVE_SIZE, count)}")
    eigvals, eigvecs = jacobi_eigh(corpus @ corpus.T)
    sigma = np.sqrt(np.clip(eigvals[:m], 0.0, None))
    return CurveBasis(vectors=_fix_signs(eigvecs[:, :m]), sigma=sigma)


def singular_spectrum(curves) -> np.ndarray:
    """All 256 singular values of the corpus matrix, descending."""
    corpus = as_corpus(curves)
    eigvals, _ = jacobi_eigh(corpus @ corpus.T)
    return np.sqrt(np.clip(eigvals, 0.0, None))


def project(basis: CurveBasis, curve) -> np.ndarray:
    """Coefficients of a curve in the basis: U^T x."""
    return basis.vectors.T @ as_tone_curve(curve)


def reconstruct(basis: CurveBasis, coeffs) -> np.ndarray:
    """Raw curve U c from coefficients; monotonize before applying."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.shape != (basis.m,):
        raise ValueError(f"expected {basis.m} coefficients, got shape {c.shape}")
    return basis.vectors @ c


def rank_error_curve(curves, m_max: int) -> list[tuple[int, float]]:
    """Mean curve RMSE of rank-M reconstruction for M = 1..m_max."""
    corpus = as_corpus(curves)
    basis = build_basis(curves, m_max)
    coeffs = basis.vectors.T @ corpus  # (m_max, L)
    out = []
    for m in range(1, m_max + 1):
        approx = basis.vectors[:, :m] @ coeffs[:m]
        rmse = np.sqrt(np.mean((corpus - approx) ** 2, axis=0))
        out.append((m, float(np.mean(rmse))))
    return out


# ---------------------------------------------------------------------------
# Serialization: {"m": M, "sigma": [...], "u": [M arrays of 256 reals]}


def basis_to_json(basis: CurveBasis) -> dict:
    return {
        "m": basis.m,
        "sigma": [float(s) for s in basis.sigma],
        "u": [[float(v) for v in basis.vectors[:, j]] for j in range(basis.m)],
    }


def basis_from_json(obj: dict) -> CurveBasis:
    m = int(obj["m"])
    sigma = np.asarray(obj["sigma"], dtype=np.float64)
    # contiguous copy: a transposed view would take different BLAS paths
    # than the freshly built basis and break bit-identical predictions
    u = np.ascontiguousarray(np.asarray(obj["u"], dtype=np.float64).T)
    if u.shape != (CURVE_SIZE, m) or sigma.shape != (m,):
        raise ValueError("inconsistent basis file")
    return CurveBasis(vectors=u, sigma=sigma)


def save_basis(basis: CurveBasis, path) -> None:
    Path(path).write_text(json.dumps(basis_to_json(basis)))


def load_basis(path) -> CurveBasis:
    return basis_from_json(json.loads(Path(path).read_text()))


def basis_id(basis: CurveBasis) -> str:
    """Stable content hash used to detect mismatched basis references."""
    payload = json.dumps(basis_to_json(basis), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]
