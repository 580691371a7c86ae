"""Measurement-basis sets and their complementarity structure.

Indices are zero-based throughout: ``vectors[x, a]`` is outcome ``a`` of
setting ``x``, and ``c_diag[i - 1]`` holds the maximum of ``C[x, (x - i) % N]``
over ``x`` for the wrap-around diagonal ``i = 1 .. N-1``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidInputError, UnsupportedDimensionError

ORTHONORMAL_TOL = 1e-10
FILE_ORTHONORMAL_TOL = 1e-8
DENSITY_TOL = 1e-9


class BasisValidationError(InvalidInputError):
    """Orthonormality failure, carrying the offending (x, a, b) indices."""

    def __init__(self, message: str, x: int, a: int, b: int, deviation: float):
        super().__init__(message)
        self.x, self.a, self.b = x, a, b
        self.deviation = deviation


def _orthonormality_violation(vectors: np.ndarray):
    """Return (x, a, b, deviation) of the worst <v_x^a|v_x^b> - delta_ab."""
    gram = np.einsum("xai,xbi->xab", vectors.conj(), vectors)
    dev = np.abs(gram - np.eye(vectors.shape[1]))
    x, a, b = np.unravel_index(int(np.argmax(dev)), dev.shape)
    return int(x), int(a), int(b), float(dev[x, a, b])


@dataclass(frozen=True, eq=False)
class BasisSet:
    """``N`` orthonormal bases of a ``d``-dimensional space.

    ``vectors`` has shape ``(N, d, d)``; ``vectors[x, a]`` is the vector for
    outcome ``a`` of setting ``x``.
    """

    vectors: np.ndarray

    def __post_init__(self):
        self.validate(ORTHONORMAL_TOL)

    def validate(self, tol: float) -> None:
        v = np.array(self.vectors, dtype=np.complex128)
        if v.ndim != 3 or v.shape[1] != v.shape[2] or v.shape[0] < 1 or v.shape[1] < 1:
            raise InvalidInputError(f"vectors must have shape (N, d, d), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("basis vectors have non-finite entries")
        x, a, b, dev = _orthonormality_violation(v)
        if dev > tol:
            raise BasisValidationError(
                f"setting {x}: <phi^{a}|phi^{b}> deviates from delta by {dev:.3e} (tol {tol:.0e})",
                x, a, b, dev,
            )
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def settings(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def from_unitaries(cls, unitaries) -> "BasisSet":
        """Build from matrices whose columns are the basis vectors."""
        u = np.asarray(unitaries, dtype=np.complex128)
        return cls(np.swapaxes(u, -1, -2).copy())

    def conj(self) -> "BasisSet":
        return BasisSet(self.vectors.conj())

    def overlaps(self) -> np.ndarray:
        """Array ``O[x, y, a, b] = <phi_x^a|phi_y^b>``."""
        return np.einsum("xai,ybi->xyab", self.vectors.conj(), self.vectors)

    # JSON: {"dim": d, "settings": N, "vectors": [x][a][component] = [re, im]}
    def to_json_dict(self) -> dict:
        v = self.vectors
        return {
            "dim": self.dim,
            "settings": self.settings,
            "vectors": np.stack([v.real, v.imag], axis=-1).tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict, tol: float = FILE_ORTHONORMAL_TOL) -> "BasisSet":
        try:
            d, n = int(data["dim"]), int(data["settings"])
            raw = np.asarray(data["vectors"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed basis document: {exc}") from exc
        if raw.shape != (n, d, d, 2):
            raise InvalidInputError(
                f"vectors array has shape {raw.shape}, expected {(n, d, d, 2)} from dim/settings"
            )
        obj = object.__new__(cls)
        object.__setattr__(obj, "vectors", raw[..., 0] + 1j * raw[..., 1])
        obj.validate(tol)
        return obj


def load_basis_set(path) -> BasisSet:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return BasisSet.from_json_dict(data)


def dump_basis_set(b: BasisSet, path) -> None:
    Path(path).write_text(json.dumps(b.to_json_dict()) + "\n")


@dataclass(frozen=True, eq=False)
class OverlapSummary:
    c_matrix: np.ndarray
    c_diag: np.ndarray
    c_max: Optional[float]

    @property
    def n_settings(self) -> int:
        return self.c_matrix.shape[0]


def overlap_summary(b: BasisSet) -> OverlapSummary:
    n = b.settings
    c = np.abs(b.overlaps()).max(axis=(2, 3))
    c = 0.5 * (c + c.T)
    xs = np.arange(n)
    c_diag = np.array([c[xs, (xs - i) % n].max() for i in range(1, n)])
    c_max = float(c_diag.max()) if n > 1 else None
    c.setflags(write=False)
    c_diag.setflags(write=False)
    return OverlapSummary(c_matrix=c, c_diag=c_diag, c_max=c_max)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, math.isqrt(n) + 1))


def generate_mub_prime(d: int) -> BasisSet:
    """Complete set of ``d + 1`` mutually unbiased bases for prime ``d``.

    Computational basis plus the quadratic-phase bases
    ``|v_{k,l}>_j = w^(k j^2 + l j) / sqrt(d)``; for ``d = 2`` the phase root is
    ``i`` so that the three Pauli eigenbases come out.
    """
    if not is_prime(d):
        raise UnsupportedDimensionError(
            f"dimension {d} is not prime; MUB generation supports prime dimensions (2, 3, 5, 7, ...)"
        )
    j = np.arange(d)
    vectors = [np.eye(d, dtype=np.complex128)]
    for k in range(d):
        if d == 2:
            phase = (1j) ** (k * j)[None, :] * (-1.0) ** np.outer(j, j)
        else:
            w = np.exp(2j * np.pi / d)
            phase = w ** ((k * j**2)[None, :] + np.outer(j, j))
        vectors.append(phase / math.sqrt(d))
    return BasisSet(np.array(vectors))


def _lowdin(basis_rows: np.ndarray) -> np.ndarray:
    # rows are vectors; symmetric orthonormalisation R -> (R R^H)^(-1/2) R
    s = basis_rows @ basis_rows.conj().T
    w, u = np.linalg.eigh(s)
    return (u * (1 / np.sqrt(w))) @ u.conj().T @ basis_rows


def perturb_bases(b: BasisSet, delta: float, seed: int) -> BasisSet:
    """Rotate each basis by ``exp(i delta H_x)``, ``H_x`` random Hermitian with unit norm."""
    if not 0 <= delta <= 1:
        raise InvalidInputError(f"delta must lie in [0, 1], got {delta}")
    if delta == 0:
        return BasisSet(b.vectors.copy())
    rng = np.random.default_rng(seed)
    d = b.dim
    out = []
    for x in range(b.settings):
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = 0.5 * (a + a.conj().T)
        w, u = np.linalg.eigh(h)
        w = w / np.max(np.abs(w))
        unitary = (u * np.exp(1j * delta * w)) @ u.conj().T
        rotated = b.vectors[x] @ unitary.T  # row a -> U |phi_x^a>
        out.append(_lowdin(rotated))
    return BasisSet(np.array(out))


def epsilon_of_overlap(c: float, d: int) -> float:
    """Relaxation exponent eps with ``c = sqrt(d**(eps - 1))``."""
    if d < 2:
        raise InvalidInputError(f"need d >= 2, got {d}")
    lo = 1 / math.sqrt(d)
    if not (lo - 1e-12 <= c <= 1 + 1e-12):
        raise InvalidInputError(f"overlap {c} outside [1/sqrt({d}), 1]")
    c = min(max(c, lo), 1.0)
    return 1 + 2 * math.log(c) / math.log(d)


def check_density_matrix(sigma, dim: int, tol: float = DENSITY_TOL) -> np.ndarray:
    s = np.asarray(sigma, dtype=np.complex128)
    if s.shape != (dim, dim):
        raise InvalidInputError(f"density matrix must be {dim}x{dim}, got {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InvalidInputError("density matrix has non-finite entries")
    if np.max(np.abs(s - s.conj().T)) > tol:
        raise InvalidInputError("density matrix is not Hermitian")
    if abs(np.trace(s).real - 1) > tol:
        raise InvalidInputError(f"density matrix trace {np.trace(s).real} != 1")
    if np.linalg.eigvalsh(s)[0] < -tol:
        raise InvalidInputError("density matrix is not positive semidefinite")
    return s


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


class DMUResult(NamedTuple):
    entropy_sum: float
    bound: float
    holds: bool


def dmu_check(b: BasisSet, x: int, y: int, sigma) -> DMUResult:
    """Entropic uncertainty check for settings ``x`` and ``y`` on state ``sigma``."""
    n = b.settings
    if not (0 <= x < n and 0 <= y < n):
        raise InvalidInputError(f"settings ({x}, {y}) out of range for N={n}")
    if x == y:
        raise InvalidInputError("dmu_check needs two distinct settings")
    s = check_density_matrix(sigma, b.dim)
    vx, vy = b.vectors[x], b.vectors[y]
    p = np.einsum("ai,ij,aj->a", vx.conj(), s, vx).real
    q = np.einsum("ai,ij,aj->a", vy.conj(), s, vy).real
    c_xy = np.abs(vx.conj() @ vy.T).max()
    entropy_sum = shannon_entropy(np.clip(p, 0, None)) + shannon_entropy(np.clip(q, 0, None))
    bound = -2 * math.log(c_xy)
    return DMUResult(entropy_sum, bound, entropy_sum >= bound - 1e-9)
