"""Random instances and independent oracles shared by the test modules."""
import itertools
import math

import mpmath
import numpy as np

from steerbound.bases import BasisSet


def haar_unitary(rng, d):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_basis_set(rng, d, n):
    return BasisSet.from_unitaries([haar_unitary(rng, d) for _ in range(n)])


def random_density_matrix(rng, d, rank=None):
    rank = d if rank is None else rank
    a = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_probs(rng, n, d):
    p = rng.random((n, d))
    return p / p.sum(axis=1, keepdims=True)


def power_iteration_norm(m, iters=5000, seed=0):
    """sqrt of the top eigenvalue of m^H m by power iteration."""
    a = m.conj().T @ m
    v = np.random.default_rng(seed).standard_normal(a.shape[0]) + 0j
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = a @ v
        lam_new = np.linalg.norm(w)
        v = w / lam_new
        if abs(lam_new - lam) < 1e-15 * lam_new:
            break
        lam = lam_new
    return math.sqrt(lam_new)


def brute_force_c_matrix(b):
    n, d = b.settings, b.dim
    c = np.zeros((n, n))
    for x in range(n):
        for y in range(n):
            c[x, y] = max(
                abs(sum(b.vectors[x, a, i].conjugate() * b.vectors[y, bb, i] for i in range(d)))
                for a in range(d) for bb in range(d)
            )
    return c


def brute_force_lhs(b):
    """Max over deterministic strategies via the N x N Gram matrix of chosen vectors."""
    best = 0.0
    for choice in itertools.product(range(b.dim), repeat=b.settings):
        vs = np.array([b.vectors[x, a] for x, a in enumerate(choice)])
        best = max(best, np.linalg.eigvalsh(vs.conj() @ vs.T)[-1])
    return best


def rotated_fock_overlaps(d, theta, dps=40):
    """O[n, m] by expanding (c x + s y)^(d-m) (-s x + c y)^m in mpmath.

    x is one H photon, y one V photon; the amplitude on |p_H, (d-p)_V> is the
    coefficient of x^p y^(d-p) times sqrt(p! (d-p)!) / sqrt((d-m)! m!).
    """
    with mpmath.workdps(dps):
        c, s = mpmath.cos(theta), mpmath.sin(theta)
        out = np.zeros((d + 1, d + 1))
        for m in range(d + 1):
            # polynomial in x with y implicit: list index = power of x
            poly = [mpmath.mpf(1)]
            for factor in [(s, c)] * (d - m) + [(c, -s)] * m:
                y_coef, x_coef = factor
                new = [mpmath.mpf(0)] * (len(poly) + 1)
                for i, a in enumerate(poly):
                    new[i] += a * y_coef
                    new[i + 1] += a * x_coef
                poly = new
            norm = mpmath.sqrt(mpmath.factorial(d - m) * mpmath.factorial(m))
            for n in range(d + 1):
                p = d - n  # H photons of |(d-n)_H, n_V>
                amp = poly[p] * mpmath.sqrt(mpmath.factorial(p) * mpmath.factorial(d - p)) / norm
                out[n, m] = float(amp)
        return out
