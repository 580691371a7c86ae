"""Dense complex linear algebra and stable combinatorics.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; every public
function validates shape and finiteness before doing any work.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError

HERMITIAN_TOL = 1e-10

# Exact big-integer binomials are cheap below this size.
_EXACT_BINOMIAL_MAX_N = 1000


def as_cmatrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D complex array or raise InvalidInputError."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def operator_norm(m) -> float:
    """Largest singular value of ``m``."""
    arr = as_cmatrix(m)
    return float(np.linalg.norm(arr, ord=2))


def check_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
        raise InvalidInputError(f"expected square matrices, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("matrix has non-finite entries")
    dev = np.max(np.abs(arr - np.conj(np.swapaxes(arr, -1, -2)))) if arr.size else 0.0
    if dev > tol:
        raise InvalidInputError(f"matrix is not Hermitian (max |m - m^H| = {dev:.3e} > {tol:.0e})")
    return arr


def max_eigenvalue_hermitian(m):
    """Largest eigenvalue of a Hermitian matrix.

    Accepts a stack of matrices with shape ``(..., n, n)``, in which case an
    array of per-matrix maxima is returned.
    """
    arr = check_hermitian(m)
    top = np.linalg.eigvalsh(arr)[..., -1]
    if arr.ndim == 2:
        return float(top)
    return top


def kron(a, b) -> np.ndarray:
    return np.kron(as_cmatrix(a, "a"), as_cmatrix(b, "b"))


def partial_trace_first(m, dim_a: int, dim_b: int) -> np.ndarray:
    """Trace out the first tensor factor of a ``(dim_a*dim_b)``-square matrix."""
    arr = as_cmatrix(m)
    if dim_a < 1 or dim_b < 1:
        raise InvalidInputError("subsystem dimensions must be positive")
    n = dim_a * dim_b
    if arr.shape != (n, n):
        raise InvalidInputError(f"matrix shape {arr.shape} does not match {dim_a}x{dim_b} subsystems")
    return np.einsum("ijik->jk", arr.reshape(dim_a, dim_b, dim_a, dim_b))


def _stirling_correction(m: int) -> float:
    """ln(m!) minus its leading Stirling approximation."""
    if m <= 15:
        return math.lgamma(m + 1) - (m * math.log(m) - m + 0.5 * math.log(2 * math.pi * m))
    m2 = m * m
    return (1 / 12 - (1 / 360 - (1 / 1260 - (1 / 1680 - 1 / (1188 * m2)) / m2) / m2) / m2) / m


def log_binomial(n: int, k: int) -> float:
    """Natural log of ``binomial(n, k)``.

    Small ``n`` use the exact integer coefficient. Larger ``n`` use the
    Stirling form with the two dominant entropy terms accumulated in extended
    precision, which keeps the absolute error within one ulp of the result.
    """
    if int(n) != n or int(k) != k:
        raise InvalidInputError("log_binomial needs integer arguments")
    n, k = int(n), int(k)
    if n < 0 or k < 0 or k > n:
        raise InvalidInputError(f"need 0 <= k <= n, got n={n}, k={k}")
    if k == 0 or k == n:
        return 0.0
    if n <= _EXACT_BINOMIAL_MAX_N:
        return math.log(math.comb(n, k))
    j = n - k
    ld = np.longdouble
    nl, kl, jl = ld(n), ld(k), ld(j)
    entropy = -kl * np.log(kl / nl) - jl * np.log1p(-kl / nl)
    corr = (
        _stirling_correction(n)
        - _stirling_correction(k)
        - _stirling_correction(j)
        + 0.5 * math.log(n / (2 * math.pi * k * j))
    )
    return float(entropy + ld(corr))
