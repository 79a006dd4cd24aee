"""Small complex-matrix helpers: Gram spectra, Frobenius norms, signed
log-determinants.

All matrices here are tiny (at most 8x8 Hermitian), so plain LAPACK calls via
numpy are both the simplest and the fastest option.
"""

from __future__ import annotations

import math

import numpy as np

from .specfun import SignedLogValue

# Gram eigenvalues closer than GAP_TOL_COEFF * max(1, d_max) make the
# Vandermonde division in the output density unreliable.
GAP_TOL_COEFF = 1e-9


def frobenius_sq(m) -> float:
    """Sum of squared entry magnitudes."""
    m = np.asarray(m)
    return float(np.sum(np.abs(m) ** 2))


def gram_eigenvalues(y) -> np.ndarray:
    """Ascending eigenvalues of y @ y^H for an n_r x n_b matrix y.

    These are the n_r nonzero eigenvalues of the (larger) Gram matrix
    y^H @ y.  Requires n_r <= n_b.
    """
    y = np.asarray(y)
    if y.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {y.shape}")
    n_r, n_b = y.shape
    if n_r > n_b:
        raise ValueError(f"requires rows <= cols, got {n_r}x{n_b}")
    d = np.linalg.eigvalsh(y @ y.conj().T)
    # rounding can push the smallest eigenvalue slightly negative
    return np.maximum(d, 0.0)


def spectrum_gap_tol(d) -> float:
    """Degeneracy threshold for a sorted Gram spectrum."""
    d = np.asarray(d)
    return GAP_TOL_COEFF * max(1.0, float(d[-1]))


def signed_log_det(m) -> SignedLogValue:
    """Sign and ln|det| of a real square matrix via pivoted LU.

    Singular input returns sign 0 (never raises).
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    sign, logabs = np.linalg.slogdet(m)
    if sign == 0.0:
        return SignedLogValue(0, -math.inf)
    return SignedLogValue(int(sign), float(logabs))
