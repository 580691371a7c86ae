"""Steering functional, its quantum value and the LHS upper bounds."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import partial
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .bases import BasisSet, OverlapSummary, check_density_matrix, overlap_summary
from .errors import CapacityError, InvalidInputError
from .numerics import max_eigenvalue_hermitian
from .parallel import ordered_map

DEFAULT_ENUMERATION_LIMIT = 10**6
DEFAULT_TOEPLITZ_TOL = 1e-9
_CHUNK = 1 << 14


def _split_state(rho, d_a: int):
    r = np.asarray(rho, dtype=np.complex128)
    if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] % d_a:
        raise InvalidInputError(f"state of shape {r.shape} is not compatible with d_A = {d_a}")
    d_b = r.shape[0] // d_a
    check_density_matrix(r, d_a * d_b)
    return r, d_b


def conditional_states(rho, alice_bases: BasisSet) -> np.ndarray:
    """Bob's unnormalised states ``sigma[x, a]`` after Alice obtains ``a`` in setting ``x``."""
    d_a = alice_bases.dim
    r, d_b = _split_state(rho, d_a)
    v = alice_bases.vectors
    return np.einsum("xai,ijkl,xak->xajl", v.conj(), r.reshape(d_a, d_b, d_a, d_b), v)


def steering_value(rho, alice_bases: BasisSet, bob_bases: BasisSet) -> float:
    """Value of the steering functional for a concrete state (no supremum)."""
    if alice_bases.settings != bob_bases.settings:
        raise InvalidInputError(
            f"setting counts differ: Alice has {alice_bases.settings}, Bob has {bob_bases.settings}"
        )
    sigma = conditional_states(rho, alice_bases)
    if sigma.shape[-1] != bob_bases.dim:
        raise InvalidInputError(f"Bob's bases have dim {bob_bases.dim}, state gives {sigma.shape[-1]}")
    w = bob_bases.vectors
    return float(np.einsum("xaj,xajl,xal->", w.conj(), sigma, w).real)


def max_entangled_state(d: int) -> np.ndarray:
    if d < 2:
        raise InvalidInputError(f"need d >= 2, got {d}")
    psi = np.zeros(d * d, dtype=np.complex128)
    psi[np.arange(d) * (d + 1)] = 1 / math.sqrt(d)
    return np.outer(psi, psi.conj())


def bound_theorem(o: OverlapSummary) -> float:
    """``1 + sum_i C_i`` over the wrap-around diagonals."""
    return 1.0 + float(np.sum(o.c_diag))


def bound_weak(o: OverlapSummary) -> float:
    """``1 + (N - 1) C`` with ``C`` the largest cross-setting overlap."""
    if o.c_max is None:
        raise InvalidInputError("weak bound needs at least two settings")
    return 1.0 + (o.n_settings - 1) * o.c_max


class ToeplitzResult(NamedTuple):
    """Outcome of the block-Toeplitz test.

    ``bound`` is None when the overlap blocks are not Toeplitz; ``worst_block``
    is the (x, y) pair maximising ``|O[x, y] - O[x+1, y+1]|``.
    """

    bound: Optional[float]
    worst_block: Optional[tuple]
    max_deviation: float


def bound_toeplitz(b: BasisSet, tol: float = DEFAULT_TOEPLITZ_TOL) -> ToeplitzResult:
    n = b.settings
    worst, dev = None, 0.0
    if n > 1:
        o = b.overlaps()
        diffs = np.abs(o[:-1, :-1] - o[1:, 1:]).max(axis=(2, 3))
        x, y = np.unravel_index(int(np.argmax(diffs)), diffs.shape)
        worst, dev = (int(x), int(y)), float(diffs[x, y])
    if dev > tol:
        return ToeplitzResult(None, worst, dev)
    c = overlap_summary(b).c_diag
    half, odd_gap = divmod(n - 1, 2)
    bound = 1.0 + 2.0 * float(np.sum(c[:half]))
    if odd_gap:
        bound += float(c[half])
    return ToeplitzResult(bound, worst, dev)


def _projectors(b: BasisSet) -> np.ndarray:
    v = b.vectors
    return np.einsum("xai,xaj->xaij", v, v.conj())


def strategy_value(bob_bases: BasisSet, assignment: Sequence[int]) -> float:
    """Top eigenvalue of ``sum_x |phi_x^{a(x)}><phi_x^{a(x)}|`` for one deterministic strategy."""
    p = _projectors(bob_bases)
    a = np.asarray(assignment, dtype=int)
    if a.shape != (bob_bases.settings,) or a.min() < 0 or a.max() >= bob_bases.dim:
        raise InvalidInputError(f"assignment {assignment!r} does not fit N={bob_bases.settings}, d={bob_bases.dim}")
    return max_eigenvalue_hermitian(p[np.arange(len(a)), a].sum(axis=0))


def _lhs_chunk(span, projectors: np.ndarray) -> float:
    start, stop = span
    n, d = projectors.shape[:2]
    idx = np.arange(start, stop)
    digits = (idx[:, None] // d ** np.arange(n)[None, :]) % d
    sums = projectors[np.arange(n)[None, :], digits].sum(axis=1)
    return float(np.max(max_eigenvalue_hermitian(sums)))


def lhs_exact(
    bob_bases: BasisSet, limit: int = DEFAULT_ENUMERATION_LIMIT, workers: Optional[int] = None
) -> float:
    """Exact LHS value by enumerating every deterministic strategy.

    Pure hidden states and deterministic response functions attain the
    supremum, so the value is the largest top eigenvalue of a projector sum
    with one projector per setting.
    """
    d, n = bob_bases.dim, bob_bases.settings
    total = d**n
    if total > limit:
        raise CapacityError(
            f"exact LHS enumeration needs d^N = {d}^{n} = {total} strategies, above the cap of {limit}",
            required=total,
            limit=limit,
        )
    spans = [(s, min(s + _CHUNK, total)) for s in range(0, total, _CHUNK)]
    values = ordered_map(partial(_lhs_chunk, projectors=_projectors(bob_bases)), spans, workers)
    return max(values)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray
    probs: np.ndarray


def check_probability_table(probs, n: int, d: int) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.shape != (n, d):
        raise InvalidInputError(f"probability table must have shape {(n, d)}, got {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidInputError("probabilities must be finite and non-negative")
    worst = np.max(np.abs(p.sum(axis=1) - 1))
    if worst > 1e-12:
        raise InvalidInputError(f"p(.|x) does not sum to one (max deviation {worst:.3e})")
    return p


def gram_matrix(bob_bases: BasisSet, probs) -> GramMatrix:
    """``G[x*d + a, y*d + b] = sqrt(p(a|x) p(b|y)) <phi_x^a|phi_y^b>``."""
    n, d = bob_bases.settings, bob_bases.dim
    p = check_probability_table(probs, n, d)
    scaled = np.sqrt(p)[:, :, None] * bob_bases.vectors
    flat = scaled.reshape(n * d, d)
    return GramMatrix(entries=flat.conj() @ flat.T, probs=p)


def violation_ratio(s_q: float, bound: float) -> float:
    if not bound > 0:
        raise InvalidInputError(f"bound must be positive, got {bound}")
    return s_q / bound


@dataclass(frozen=True)
class SteeringBounds:
    n_settings: int
    s_q: float
    bound_theorem: float
    bound_weak: float
    v_q_theorem: float
    v_q_weak: float
    bound_toeplitz: Optional[float] = None
    lhs_exact: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def compute_bounds(
    bob_bases: BasisSet,
    rho=None,
    alice_bases: Optional[BasisSet] = None,
    exact_lhs: bool = False,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
    toeplitz_tol: float = DEFAULT_TOEPLITZ_TOL,
    workers: Optional[int] = None,
) -> SteeringBounds:
    """All bounds for one basis set.

    Without ``rho`` the quantum value is the ideal ``N``; with ``rho`` and no
    ``alice_bases`` Alice measures the complex conjugates of Bob's bases.
    """
    o = overlap_summary(bob_bases)
    n = bob_bases.settings
    if rho is None:
        s_q = float(n)
    else:
        alice = bob_bases.conj() if alice_bases is None else alice_bases
        s_q = steering_value(rho, alice, bob_bases)
    b_thm, b_weak = bound_theorem(o), bound_weak(o)
    return SteeringBounds(
        n_settings=n,
        s_q=s_q,
        bound_theorem=b_thm,
        bound_weak=b_weak,
        v_q_theorem=violation_ratio(s_q, b_thm),
        v_q_weak=violation_ratio(s_q, b_weak),
        bound_toeplitz=bound_toeplitz(bob_bases, toeplitz_tol).bound,
        lhs_exact=lhs_exact(bob_bases, limit, workers) if exact_lhs else None,
    )
