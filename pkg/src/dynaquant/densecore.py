"""Dense complex linear-algebra kernels.

All matrices are ``numpy.ndarray`` of dtype ``complex128``.  Operator space is
identified with C^(N*N) by column stacking, so that

    vec(A @ X @ B) == kron(B.T, A) @ vec(X)

Every superoperator matrix in the package is built against this convention.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "RankDeficientError",
    "as_complex_matrix",
    "kron",
    "expm",
    "vec",
    "unvec",
    "lstsq",
]


class RankDeficientError(np.linalg.LinAlgError):
    """Raised by :func:`lstsq` when the design matrix lacks full column rank."""

    def __init__(self, rank: int, cols: int):
        self.rank = rank
        self.cols = cols
        super().__init__(f"matrix is rank deficient: numerical rank {rank} < {cols} columns")


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D complex128 array, raising on bad input."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``a[i, j] * b``."""
    return np.kron(as_complex_matrix(a, "A"), as_complex_matrix(b, "B"))


def expm(a, tol: float = 1e-13) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Pade approximant.

    Delegates to :func:`scipy.linalg.expm` (Al-Mohy & Higham 2009), whose
    degree and scaling selection bounds the relative backward error by unit
    roundoff; any ``tol`` at or above ``1e-15`` is therefore met.
    """
    m = as_complex_matrix(a, "A")
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expm requires a square matrix, got shape {m.shape}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if tol < 1e-15:
        raise ValueError("tol below 1e-15 is not attainable in double precision")
    out = scipy.linalg.expm(m)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("matrix exponential overflowed")
    return out


def vec(a) -> np.ndarray:
    """Stack the columns of ``a`` top to bottom into a 1-D vector."""
    return as_complex_matrix(a).reshape(-1, order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.size != rows * cols:
        raise ValueError(f"cannot unvec length {v.size} into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def lstsq(m, y, rcond: float | None = None) -> np.ndarray:
    """Least-squares solution of ``m @ c ~ y`` for a full-column-rank ``m``.

    Raises :class:`RankDeficientError` carrying the numerical rank when the
    columns of ``m`` are (numerically) dependent.
    """
    m = as_complex_matrix(m, "M")
    y = np.asarray(y, dtype=np.complex128)
    if m.shape[0] < m.shape[1]:
        raise ValueError("lstsq needs rows >= cols")
    if y.shape[0] != m.shape[0]:
        raise ValueError(f"rhs length {y.shape[0]} does not match {m.shape[0]} rows")
    coef, _, rank, _ = np.linalg.lstsq(m, y, rcond=rcond)
    if rank < m.shape[1]:
        raise RankDeficientError(int(rank), m.shape[1])
    return coef
