"""Experimental models: k-copy singlets and the photonic multi-particle singlet."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, partial
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError
from .numerics import log_binomial
from .parallel import ordered_map

LOG_DOMAIN_K = 50
DEFAULT_N_MAX = 400
_LD = np.longdouble
_LN2 = math.log(2.0)


# --------------------------------------------------------------------------
# k copies of a two-qubit singlet
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiSingletParams:
    k: int
    eta: float
    fidelity: float
    epsilon: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidInputError(f"k must be a positive integer, got {self.k}")
        if not 0 < self.eta <= 1:
            raise InvalidInputError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0 < self.fidelity <= 1:
            raise InvalidInputError(f"fidelity must lie in (0, 1], got {self.fidelity}")
        if not 0 <= self.epsilon < 1:
            raise InvalidInputError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not 0 <= self.sigma < 1:
            raise InvalidInputError(f"sigma must lie in [0, 1), got {self.sigma}")


def _log_denominator(k: int, epsilon: float) -> float:
    # ln(1 + (2^k - 1) 2^((eps - 1) k / 2))
    log_cross = k * _LN2 + math.log1p(-(2.0**-k)) + 0.5 * (epsilon - 1) * k * _LN2
    return float(np.logaddexp(0.0, log_cross))


def log_multisinglet_violation(p: MultiSingletParams) -> float:
    base = 2.0 ** (1 - p.sigma) * p.eta * p.fidelity
    return p.k * math.log(base) - _log_denominator(p.k, p.epsilon)


def multisinglet_violation(p: MultiSingletParams) -> float:
    """Lossy violation ratio for ``k`` singlet copies with relaxed MUBs."""
    if p.k > LOG_DOMAIN_K:
        return math.exp(log_multisinglet_violation(p))
    num = (2.0 ** (1 - p.sigma) * p.eta * p.fidelity) ** p.k
    den = 1 + (2.0**p.k - 1) * 2.0 ** ((p.epsilon - 1) * p.k / 2)
    return num / den


def multisinglet_growth_condition(eta: float, fidelity: float, epsilon: float, sigma: float) -> bool:
    """Whether the violation grows exponentially with ``k``.

    The strict inequality is evaluated with a 1e-12 margin so that the exact
    boundary (e.g. ``eta * F = 2**-0.5`` at ``epsilon = sigma = 0``) is not
    flipped by rounding in ``log2``.
    """
    return epsilon + 2 * sigma < 2 * math.log2(eta * fidelity) + 1 - 1e-12


def multisinglet_threshold_eta(k: int, fidelity: float, epsilon: float, sigma: float = 0.0) -> float:
    """Efficiency at which the lossy ratio equals one; may exceed 1 (no violation)."""
    if k < 1:
        raise InvalidInputError(f"k must be positive, got {k}")
    return math.exp(_log_denominator(k, epsilon) / k) / (2.0 ** (1 - sigma) * fidelity)


# --------------------------------------------------------------------------
# photonic multi-particle singlet with polarisation-rotated Fock bases
# --------------------------------------------------------------------------


def _check_overlap_args(d: int, theta: float) -> None:
    if int(d) != d or d < 0:
        raise InvalidInputError(f"d must be a non-negative integer, got {d}")
    if not 0 <= theta < math.pi / 2:
        raise InvalidInputError(f"theta must lie in [0, pi/2), got {theta}")


@lru_cache(maxsize=16)
def _overlap_tables(d: int):
    """Coefficients and trig exponents of the stride-2 sum, padded to a dense (n, m, j) grid.

    Term j of entry (n, m) is
    ``pref * C(d-m, d-n-j) C(m, j) (-1)^j cos^(m+d-n-2j) sin^(n-m+2j)``
    with ``pref = sqrt(C(d, m) / C(d, n))``; ``j`` runs over ``max(0, m-n) .. min(m, d-n)``.
    """
    size = d + 1
    coef = np.zeros((size, size, size), dtype=_LD)
    e_cos = np.zeros((size, size, size), dtype=np.intp)
    e_sin = np.zeros((size, size, size), dtype=np.intp)
    binom_d = [_LD(math.comb(d, i)) for i in range(size)]
    for n in range(size):
        for m in range(size):
            pref = np.sqrt(binom_d[m] / binom_d[n])
            for j in range(max(0, m - n), min(m, d - n) + 1):
                c = pref * _LD(math.comb(d - m, d - n - j)) * _LD(math.comb(m, j))
                coef[n, m, j] = -c if j % 2 else c
                e_cos[n, m, j] = m + d - n - 2 * j
                e_sin[n, m, j] = n - m + 2 * j
    for arr in (coef, e_cos, e_sin):
        arr.setflags(write=False)
    return coef, e_cos, e_sin


def overlap_matrix(d: int, theta: float) -> np.ndarray:
    """Signed overlaps ``O[n, m] = <(d-n)_H, n_V | (d-m)_{H+theta}, m_{V+theta}>``.

    The alternating sum is accumulated in extended precision from exact
    integer binomials; in double precision the cancellation near
    ``theta = pi/4`` already costs about seven digits at ``d = 60``.
    Interior entries remain accurate to ~1e-11 up to ``d = 60`` and degrade
    beyond that.
    """
    _check_overlap_args(d, theta)
    coef, e_cos, e_sin = _overlap_tables(int(d))
    t = _LD(theta)
    powers = np.arange(2 * int(d) + 1, dtype=_LD)
    cos_pow, sin_pow = np.power(np.cos(t), powers), np.power(np.sin(t), powers)
    terms = coef * cos_pow[e_cos] * sin_pow[e_sin]
    return terms.sum(axis=2).astype(np.float64)


def photonic_overlap(d: int, n: int, m: int, theta: float) -> float:
    _check_overlap_args(d, theta)
    if not (0 <= n <= d and 0 <= m <= d):
        raise InvalidInputError(f"indices (n={n}, m={m}) out of range for d={d}")
    t = _LD(theta)
    c, s = np.cos(t), np.sin(t)
    pref = np.sqrt(_LD(math.comb(d, m)) / _LD(math.comb(d, n)))
    total = _LD(0)
    for j in range(max(0, m - n), min(m, d - n) + 1):
        term = pref * _LD(math.comb(d - m, d - n - j)) * _LD(math.comb(m, j))
        term *= c ** (m + d - n - 2 * j) * s ** (n - m + 2 * j)
        total += -term if j % 2 else term
    return float(total)


def photonic_distribution(d: int, theta: float) -> np.ndarray:
    """``p[m, n] = |O[n, m]|^2``; doubly stochastic."""
    return overlap_matrix(d, theta).T ** 2


def _check_open_angle(theta: float, d: int) -> None:
    if not 0 < theta < math.pi / 2:
        raise InvalidInputError(f"theta must lie in the open interval (0, pi/2), got {theta}")
    if int(d) != d or d < 1:
        raise InvalidInputError(f"d must be a positive integer, got {d}")


def photonic_q(theta: float, d: int) -> int:
    """Index of the largest boundary overlap, ``floor(d sin^2 - cos^2) + 1`` clamped to [0, d].

    Arguments within 1e-9 of an integer are snapped to it before the floor.
    """
    x = d * math.sin(theta) ** 2 - math.cos(theta) ** 2
    if abs(x - round(x)) < 1e-9:
        x = round(x)
    q = math.floor(x) + 1
    return min(max(q, 0), d)


def _log_boundary_overlap(theta: float, d: int, q: int) -> float:
    return 0.5 * log_binomial(d, q) + d * math.log(math.cos(theta)) + q * math.log(math.tan(theta))


def photonic_C(theta: float, d: int) -> float:
    """Largest overlap modulus between the unrotated and ``theta``-rotated bases."""
    _check_open_angle(theta, d)
    q = photonic_q(theta, d)
    # neighbours guard against the floor flipping on rounding noise
    candidates = [c for c in (q - 1, q, q + 1) if 0 <= c <= d]
    return math.exp(max(_log_boundary_overlap(theta, d, c) for c in candidates))


def photonic_asymptotic_C(theta: float, d: int) -> float:
    """Large-``d`` law ``1 / ((pi d / 2)^(1/4) sqrt(sin 2 theta))``."""
    _check_open_angle(theta, d)
    return 1.0 / ((math.pi * d / 2) ** 0.25 * math.sqrt(math.sin(2 * theta)))


@dataclass(frozen=True)
class PhotonicScanRow:
    d: int
    n_opt: int
    theta: float
    v_q: float
    eta: float
    v_q_eta: float


def violation_curve(d: int, n_max: int = DEFAULT_N_MAX) -> np.ndarray:
    """``V_Q(N) = N / (1 + (N - 1) C(pi / 2N, d))`` for ``N = 2 .. n_max``."""
    if n_max < 2:
        raise InvalidInputError(f"n_max must be at least 2, got {n_max}")
    if int(d) != d or d < 1:
        raise InvalidInputError(f"d must be a positive integer, got {d}")
    ns = np.arange(2, n_max + 1)
    c = np.array([photonic_C(math.pi / (2 * n), d) for n in ns])
    return ns / (1 + (ns - 1) * c)


def optimal_settings_scan(d: int, n_max: int = DEFAULT_N_MAX, eta: float = 1.0) -> PhotonicScanRow:
    if not 0 < eta <= 1:
        raise InvalidInputError(f"eta must lie in (0, 1], got {eta}")
    return _row_from_curve(d, violation_curve(d, n_max), eta)


def _row_from_curve(d: int, curve: np.ndarray, eta: float) -> PhotonicScanRow:
    i = int(np.argmax(curve))  # first maximum, i.e. smallest N on ties
    n_opt = i + 2
    v_q = float(curve[i])
    return PhotonicScanRow(d, n_opt, math.pi / (2 * n_opt), v_q, eta, eta**d * v_q)


def critical_efficiency(d: int, n_max: int = DEFAULT_N_MAX) -> float:
    """Detector efficiency at which ``eta^d V_Q`` reaches one."""
    v_q = optimal_settings_scan(d, n_max).v_q
    return v_q ** (-1.0 / d)


def photonic_scan(
    d_values: Iterable[int],
    etas: Sequence[float],
    n_max: int = DEFAULT_N_MAX,
    workers: Optional[int] = None,
) -> Tuple[List[PhotonicScanRow], dict]:
    """Optimal-settings rows for every (d, eta) pair, sorted by (d, eta).

    Also returns the full ``V_Q(N)`` curve per ``d`` so callers can report the
    spread over non-optimal ``N``.
    """
    ds = sorted(set(int(d) for d in d_values))
    etas = sorted(set(float(e) for e in etas))
    for e in etas:
        if not 0 < e <= 1:
            raise InvalidInputError(f"eta must lie in (0, 1], got {e}")
    curves = ordered_map(partial(violation_curve, n_max=n_max), ds, workers)
    rows = [_row_from_curve(d, curve, e) for d, curve in zip(ds, curves) for e in etas]
    return rows, dict(zip(ds, curves))
