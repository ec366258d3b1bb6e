"""Dense complex Hermitian matrix utilities used by every solver.

All matrices here are small (<= ~50 x 50) and dense.  The eigensolver is a
cyclic Jacobi iteration with complex Givens rotations: unconditionally
stable at these sizes and free of external dependencies, which keeps it
usable as an independent cross-check against library routines in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPSDError, ValidationError

HERMITIAN_ATOL = 1e-12


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError("expected a non-empty 1-D complex vector")
    if not np.all(np.isfinite(v)):
        raise ValidationError("vector entries must be finite")
    return v


def as_hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError("expected a square complex matrix")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix entries must be finite")
    if np.max(np.abs(a - a.conj().T)) > atol:
        raise ValidationError("matrix is not Hermitian within tolerance")
    return a


def hermitianize(m) -> np.ndarray:
    """Average with the conjugate transpose; guards symmetry drift."""
    a = np.asarray(m, dtype=complex)
    return (a + a.conj().T) / 2.0


def phase_align(v: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the largest-magnitude entry is real >= 0."""
    k = int(np.argmax(np.abs(v)))
    mag = abs(v[k])
    if mag == 0.0:
        return v.copy()
    return v * (v[k].conj() / mag)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray   # real, sorted descending
    eigenvectors: np.ndarray  # orthonormal columns, eigenvectors[:, k] <-> eigenvalues[k]


def herm_eig(m, atol: float = HERMITIAN_ATOL) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix via cyclic Jacobi."""
    a = hermitianize(as_hermitian(m, atol))
    n = a.shape[0]
    u = np.eye(n, dtype=complex)
    scale = max(float(np.linalg.norm(a)), 1.0)
    stop = 1e-14 * scale
    for _ in range(100):
        off = a - np.diag(np.diag(a))
        if np.max(np.abs(off)) <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r <= stop * 1e-2:
                    continue
                phase = a[p, q] / r
                diff = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if diff == 0.0:
                    t = 1.0
                else:
                    t = np.sign(diff) / (abs(diff) + np.hypot(1.0, diff))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s * phase
                rot[q, p] = -s * np.conj(phase)
                a = rot.conj().T @ a @ rot
                u = u @ rot
        a = hermitianize(a)
    vals = np.real(np.diag(a))
    order = np.argsort(vals)[::-1]
    vecs = u[:, order]
    for k in range(n):
        vecs[:, k] = phase_align(vecs[:, k])
    return EigenDecomposition(eigenvalues=vals[order], eigenvectors=vecs)


def cholesky_psd(m, shift_tol: float = 0.0) -> np.ndarray:
    """Lower-triangular L with L L^H = m, allowing pivots down to -shift_tol.

    Pivots in [-shift_tol, 0) are clamped to zero (semidefinite reading);
    anything below raises NotPSDError carrying the failing pivot index.
    """
    a = hermitianize(as_hermitian(m))
    n = a.shape[0]
    low = np.zeros_like(a)
    for j in range(n):
        d = a[j, j].real - float(np.sum(np.abs(low[j, :j]) ** 2))
        if d < -shift_tol:
            raise NotPSDError(j, d)
        d = max(d, 0.0)
        low[j, j] = np.sqrt(d)
        if j + 1 < n:
            if d > 0.0:
                low[j + 1:, j] = (a[j + 1:, j] - low[j + 1:, :j] @ low[j, :j].conj()) / low[j, j]
            else:
                low[j + 1:, j] = 0.0
    return low


def quad_form(m, x) -> float:
    """Real part of x^H m x; the tiny imaginary residue is discarded."""
    a = as_hermitian(m)
    v = as_vector(x)
    if a.shape[0] != v.size:
        raise ValidationError("dimension mismatch between matrix and vector")
    return float(np.real(np.vdot(v, a @ v)))


def outer_product(v) -> np.ndarray:
    """Rank-one lift v v^H (Hermitian, PSD, trace = ||v||^2)."""
    x = as_vector(v)
    return np.outer(x, x.conj())


def principal_rank_one(m) -> tuple[np.ndarray, float]:
    """Principal component sqrt(lam1) * u1 of a PSD matrix.

    Returns the extracted vector (phase-aligned) and the residual ratio
    lam2/lam1 (zero for 1x1 input); the caller decides what ratio is
    acceptable for treating m as rank one.
    """
    dec = herm_eig(m)
    lam1 = dec.eigenvalues[0]
    if lam1 <= 0.0:
        raise ValidationError("matrix has no positive principal direction")
    if dec.eigenvalues[-1] < -1e-8 * lam1:
        raise ValidationError("matrix is not PSD within tolerance")
    v = np.sqrt(lam1) * dec.eigenvectors[:, 0]
    ratio = 0.0
    if dec.eigenvalues.size > 1:
        ratio = float(max(dec.eigenvalues[1], 0.0) / lam1)
    return phase_align(v), ratio
