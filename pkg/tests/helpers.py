"""Random feasible operator representations and the moments they induce."""

import math

import numpy as np
from scipy.stats import ortho_group

from ncpoly.certify import optimizer_from_matrices, reproduced_moments
from ncpoly.problems import (FermionSpec, bell_problem, binary_quadratic_problem,
                             chsh_scenario, example_problem, fermion_problem, hermitize_two_body)
from ncpoly.algebra import Polynomial
from ncpoly.relaxation import assemble

from oracles import fock_operators

Q_LO, Q_HI = (1 - math.sqrt(3)) / 2, (1 + math.sqrt(3)) / 2


def random_projector(dim, rng):
    rank = int(rng.integers(0, dim + 1))
    U = ortho_group.rvs(dim, random_state=rng) if dim > 1 else np.eye(1)
    return U[:, :rank] @ U[:, :rank].T


def random_hermitian(dim, rng, lo, hi):
    U = ortho_group.rvs(dim, random_state=rng) if dim > 1 else np.eye(1)
    return U @ np.diag(rng.uniform(lo, hi, dim)) @ U.T


def unit(dim, rng):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def induced_moments(problem, k, X, phi):
    """``y_w = <phi, w(X) phi>`` on the variables of the order-``k`` relaxation."""
    sdp, imap = assemble(problem, k)
    opt = optimizer_from_matrices(X, phi, problem)
    vals = reproduced_moments(opt, imap.var_words)
    return sdp, np.array([vals[w] for w in imap.var_words])


def sample(kind, rng):
    """(problem, order, X, phi) for a random point feasible for ``kind``."""
    dim = int(rng.integers(1, 7))
    if kind == "example":
        X = [random_projector(dim, rng), random_hermitian(dim, rng, Q_LO, Q_HI)]
        return example_problem("basic"), 2, X, unit(dim, rng)
    if kind == "commutative":
        x1 = np.diag(rng.integers(0, 2, dim).astype(float))
        x2 = np.diag(rng.uniform(Q_LO, Q_HI, dim))
        return example_problem("commutative"), 2, [x1, x2], unit(dim, rng)
    if kind == "bell":
        da, db = 2, int(rng.integers(1, 4))
        ia, ib = np.eye(da), np.eye(db)
        A = [np.kron(random_projector(da, rng), ib) for _ in range(2)]
        B = [np.kron(ia, random_projector(db, rng)) for _ in range(2)]
        return bell_problem(chsh_scenario()), 2, A + B, unit(da * db, rng)
    if kind == "binary":
        n = 3
        p = Polynomial({(i, j): rng.normal() for i in range(n) for j in range(n)})
        p = 0.5 * (p + Polynomial({w[::-1]: c for w, c in p.items()}))
        X = [random_projector(dim, rng) for _ in range(n)]
        return binary_quadratic_problem(p, n), 1, X, unit(dim, rng)
    if kind == "fermion":
        m, n = 2, int(rng.integers(0, 3))
        spec = FermionSpec(m, n, h=hermitize_two_body(rng.normal(size=(m,) * 4)))
        a = fock_operators(m)
        number = np.diag(sum(x.T @ x for x in a))
        sector = np.flatnonzero(np.isclose(number, n))
        phi = np.zeros(2 ** m)
        phi[sector] = rng.normal(size=len(sector))
        return fermion_problem(spec), 2, a, phi / np.linalg.norm(phi)
    raise ValueError(kind)


KINDS = ("example", "commutative", "bell", "binary", "fermion")
