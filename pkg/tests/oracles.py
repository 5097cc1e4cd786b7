"""Independent reference computations used by the test-suite.

None of these touch the relaxation code: they work directly with explicit
matrices or exhaustive enumeration.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def chsh_operator_norm() -> float:
    """Largest eigenvalue of the CHSH operator with optimal qubit observables.

    A0 = Z, A1 = X on Alice; B0 = (Z + X)/sqrt2, B1 = (Z - X)/sqrt2 on Bob.  The
    square of the operator equals 4 + [A0, A1] x [B0, B1] (up to sign), whose
    spectral norm bound is 8, so the top eigenvalue found here is the exact
    quantum maximum.
    """
    Z = np.diag([1.0, -1.0])
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    A = [Z, X]
    B = [(Z + X) / math.sqrt(2), (Z - X) / math.sqrt(2)]
    op = sum((-1) ** (x * y) * np.kron(A[x], B[y]) for x in range(2) for y in range(2))
    return float(np.linalg.eigvalsh(op)[-1])


def chsh_square_bound() -> float:
    """sqrt of the operator-norm bound ||C^2|| <= 4 + ||[A0,A1]|| ||[B0,B1]|| = 8."""
    return math.sqrt(4.0 + 2.0 * 2.0)


def bell_classical_max(coefficients: dict, party_measurements) -> float:
    """Maximum of a Bell expression over deterministic local strategies."""
    pa, pb = party_measurements
    best = -math.inf
    for outs_a in itertools.product(*[range(s) for s in pa]):
        for outs_b in itertools.product(*[range(s) for s in pb]):
            val = 0.0
            for (sa, sb), c in coefficients.items():
                ok_a = sa is None or outs_a[sa[0]] == sa[1]
                ok_b = sb is None or outs_b[sb[0]] == sb[1]
                val += c * (ok_a and ok_b)
            best = max(best, val)
    return best


def chsh_classical_bruteforce() -> float:
    """All 16 deterministic +-1 assignments of (A0, A1, B0, B1)."""
    best = -math.inf
    for a0, a1, b0, b1 in itertools.product((1, -1), repeat=4):
        best = max(best, a0 * b0 + a0 * b1 + a1 * b0 - a1 * b1)
    return float(best)


def fock_operators(m: int):
    """Jordan-Wigner annihilation matrices on the 2^m dimensional Fock space."""
    Z = np.diag([1.0, -1.0])
    I = np.eye(2)
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0>, occupation basis (|0>, |1>)
    ops = []
    for i in range(m):
        factors = [Z] * i + [lower] + [I] * (m - i - 1)
        out = np.array([[1.0]])
        for f in factors:
            out = np.kron(out, f)
        ops.append(out)
    return ops


def fermion_ground_energy(h, n_particles: int, one_body=None) -> float:
    """Lowest eigenvalue of sum h_ijkl a_i^+ a_j^+ a_k a_l (+ t_ij a_i^+ a_j) in the N sector."""
    h = np.asarray(h, dtype=float)
    m = h.shape[0]
    a = fock_operators(m)
    ad = [x.T for x in a]
    H = np.zeros((2 ** m, 2 ** m))
    for i, j, k, l in itertools.product(range(m), repeat=4):
        if h[i, j, k, l]:
            H += h[i, j, k, l] * ad[i] @ ad[j] @ a[k] @ a[l]
    if one_body is not None:
        for i, j in itertools.product(range(m), repeat=2):
            H += one_body[i, j] * ad[i] @ a[j]
    number = sum(ad[i] @ a[i] for i in range(m))
    sector = np.flatnonzero(np.isclose(np.diag(number), n_particles))
    Hs = H[np.ix_(sector, sector)]
    return float(np.linalg.eigvalsh(0.5 * (Hs + Hs.T))[0])


def binary_min(coeffs: dict, n: int) -> float:
    """Minimum over x in {0,1}^n of sum_w c_w prod_{l in w} x_l."""
    best = math.inf
    for bits in itertools.product((0, 1), repeat=n):
        val = sum(c * math.prod(bits[l] for l in w) for w, c in coeffs.items())
        best = min(best, val)
    return float(best)


def commutative_example_optimum() -> float:
    """min 2 x1 x2 with x1 in {0,1}, -x2^2 + x2 + 1/2 >= 0, by hand: x1 = 1, x2 = (1-sqrt3)/2."""
    lo = (1 - math.sqrt(3)) / 2
    return min(0.0, 2 * lo)
