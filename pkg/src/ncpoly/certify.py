"""Post-solution analysis: rank test, optimizer extraction and SOS certificates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import ortho_group

from .algebra import Polynomial, max_abs_coeff, poly_mul, reduce_poly
from .relaxation import (NCProblem, build_index_map, build_moment_block, eliminate_equalities,
                         half_degree)
from .sdp import SDPSolution

RANK_TOL = 1e-6
COND_MAX = 1e8


class CertifyError(ValueError):
    """Analysis refused or impossible on the given data."""


def numeric_rank(M, rank_tol: float = RANK_TOL) -> int:
    """Number of eigenvalues above ``rank_tol * max(1, lambda_max)``."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    return int(np.sum(w > rank_tol * max(1.0, w[-1])))


# ---------------------------------------------------------------------------
# Flatness
# ---------------------------------------------------------------------------

@dataclass
class FlatnessReport:
    k: int
    d: int
    rank_k: int
    rank_k_minus_d: int
    rank_tol: float
    flat: bool
    detection_condition_ok: bool = True


def _prepared_map(problem: NCProblem, k: int):
    prepared = eliminate_equalities(problem)
    return prepared, build_index_map(prepared, k)


def localizing_degree(problem: NCProblem) -> int:
    """``d = max_i ceil(deg(q_i)/2)`` over the operator inequalities (ball and +-e included)."""
    prepared = eliminate_equalities(problem)
    return max((half_degree(q) for q in prepared.localizing_constraints()), default=0)


def flatness_check(y, k: int, problem: NCProblem, rank_tol: float = RANK_TOL) -> FlatnessReport:
    """Compare the ranks of ``M_k(y)`` and its order ``k - d`` principal block.

    The test needs ``d >= 1``: with only degree-0 operator constraints there
    is no submatrix to compare and a :class:`CertifyError` is raised.
    """
    prepared, imap = _prepared_map(problem, k)
    d = max((half_degree(q) for q in prepared.localizing_constraints()), default=0)
    if d < 1:
        raise CertifyError("rank test needs an operator inequality of degree >= 1 (d = 0)")
    if k - d < 0:
        raise CertifyError(f"order {k} is below d = {d}")
    M = build_moment_block(k, imap).evaluate(y)
    small = len(imap.basis_upto(k - d))
    rk = numeric_rank(M, rank_tol)
    rkd = numeric_rank(M[:small, :small], rank_tol)
    cond = all(r.degree() - d <= k for r in prepared.state_kernel)
    return FlatnessReport(k, d, rk, rkd, rank_tol, rk == rkd, cond)


# ---------------------------------------------------------------------------
# Optimizers
# ---------------------------------------------------------------------------

@dataclass
class Optimizer:
    """Finite-dimensional point ``(X, phi)``.

    ``X`` holds one matrix per base generator; ``letters`` holds one per
    alphabet letter (adjoints and eliminated generators included) and is
    what polynomial evaluation uses.
    """

    dim: int
    X: list
    phi: np.ndarray
    letters: list
    objective_value: float
    residuals: dict = field(default_factory=dict)
    seed: int | None = None


def eval_word(w, letters, dim: int) -> np.ndarray:
    out = np.eye(dim)
    for l in w:
        out = out @ letters[l]
    return out


def eval_poly(p: Polynomial, letters, dim: int) -> np.ndarray:
    out = np.zeros((dim, dim))
    for w, c in p.items():
        out += c * eval_word(w, letters, dim)
    return out


def _complete_letters(known: dict, problem: NCProblem, dim: int) -> list:
    """Fill letters that the rewrite system expresses through other letters."""
    a, rs = problem.alphabet, problem.rewrite
    letters = [known.get(l) for l in range(a.size)]
    for l in range(a.size):
        if letters[l] is None:
            letters[l] = eval_poly(rs.reduce((l,)), letters, dim)
    for l in range(a.size):
        m = a.adjoint_map[l]
        if m > l:
            sym = 0.5 * (letters[l] + letters[m].T)
            letters[l], letters[m] = sym, sym.T.copy()
        elif m == l:
            letters[l] = 0.5 * (letters[l] + letters[l].T)
    return letters


def optimizer_from_matrices(X, phi, problem: NCProblem) -> Optimizer:
    """Wrap user-supplied base-generator matrices (e.g. a known optimizer)."""
    X = [np.asarray(x, dtype=float) for x in X]
    phi = np.asarray(phi, dtype=float)
    dim = len(phi)
    prepared = eliminate_equalities(problem)
    a = prepared.alphabet
    known = {}
    for i, x in enumerate(X):
        known[i] = x
        if a.adjoint_map[i] != i:
            known[a.adjoint_map[i]] = x.T
    letters = _complete_letters(known, prepared, dim)
    val = float(phi @ eval_poly(prepared.objective, letters, dim) @ phi)
    return Optimizer(dim, [letters[i] for i in range(a.n)], phi, letters, val)


def extract_optimizer(y, k: int, problem: NCProblem, rank_tol: float = RANK_TOL,
                      seed: int | None = None, check_flat: bool = True) -> Optimizer:
    """Build ``(X, phi)`` from a flat moment vector via its Gram decomposition.

    Gram vectors are the columns of ``sqrt(Lambda) U^T`` from the
    eigendecomposition of ``M_k(y)`` truncated to its numerical rank.  A
    seeded random orthogonal rotation of that basis is applied when ``seed``
    is given.  Each letter solves ``X_l w = (x_l w)`` in the least-squares
    sense over the Gram vectors of words of length ``<= k - 1``.
    """
    if check_flat:
        rep = flatness_check(y, k, problem, rank_tol)
        if not rep.flat:
            raise CertifyError(f"moment matrix is not flat (ranks {rep.rank_k}, {rep.rank_k_minus_d})")
    prepared, imap = _prepared_map(problem, k)
    a, rs = prepared.alphabet, prepared.rewrite
    block = build_moment_block(k, imap)
    M = block.evaluate(y)
    M = 0.5 * (M + M.T)
    w, U = np.linalg.eigh(M)
    r = numeric_rank(M, rank_tol)
    if r == 0:
        raise CertifyError("moment matrix is numerically zero")
    w, U = w[::-1][:r], U[:, ::-1][:, :r]
    G = np.sqrt(w)[:, None] * U.T
    if seed is not None and r > 1:
        G = ortho_group.rvs(r, random_state=seed) @ G
    index = {u: i for i, u in enumerate(block.row_basis)}

    cols = [i for i, u in enumerate(block.row_basis) if len(u) <= k - 1]
    GS = G[:, cols]
    sv = np.linalg.svd(GS, compute_uv=False)
    if len(sv) < r or sv[r - 1] <= 0 or sv[0] / sv[r - 1] > COND_MAX:
        raise CertifyError("Gram vectors of the shorter words do not span the rank space")
    pinv = np.linalg.pinv(GS)

    def vec(p: Polynomial):
        out = np.zeros(r)
        for u, c in p.items():
            if u not in index:
                raise CertifyError(f"word {u} outside the order-{k} basis")
            out += c * G[:, index[u]]
        return out

    known = {}
    for l in range(a.size):
        if rs.reduce((l,)) != Polynomial.monomial((l,)):
            continue
        T = np.column_stack([vec(rs.reduce((l,) + block.row_basis[i])) for i in cols])
        known[l] = T @ pinv
    letters = _complete_letters(known, prepared, r)
    phi = G[:, index[()]]
    phi = phi / np.linalg.norm(phi)
    val = float(phi @ eval_poly(prepared.objective, letters, r) @ phi)
    opt = Optimizer(r, [letters[i] for i in range(a.n)], phi, letters, val, seed=seed)
    opt.residuals = verify_optimizer(opt, problem).as_dict()
    return opt


def reproduced_moments(opt: Optimizer, words) -> dict:
    """``<phi, w(X) phi>`` for each word."""
    return {w: float(opt.phi @ eval_word(w, opt.letters, opt.dim) @ opt.phi) for w in words}


def moment_mismatch(opt: Optimizer, y, k: int, problem: NCProblem) -> float:
    """Largest ``|<phi, w(X) phi> - y_w|`` over the order-``k`` moment basis."""
    _, imap = _prepared_map(problem, k)
    rep = reproduced_moments(opt, imap.basis)
    return max(abs(rep[w] - imap.moment(y, w)) for w in imap.basis)


@dataclass
class OptimizerCheck:
    """Residuals of an optimizer against the problem constraints."""

    q_min_eig: list
    equality_norms: list
    kernel_norms: list
    expectations: list
    rule_residuals: float
    objective_mismatch: float
    phi_norm_error: float
    tol: float = 1e-6

    @property
    def max_violation(self) -> float:
        vals = [-e for e in self.q_min_eig] + self.equality_norms + self.kernel_norms
        vals += [-s for s in self.expectations]
        vals += [self.rule_residuals, self.objective_mismatch, self.phi_norm_error]
        return max([0.0] + vals)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def as_dict(self) -> dict:
        return {"q_min_eig": self.q_min_eig, "equality_norms": self.equality_norms,
                "kernel_norms": self.kernel_norms, "expectations": self.expectations,
                "rule_residuals": self.rule_residuals,
                "objective_mismatch": self.objective_mismatch,
                "phi_norm_error": self.phi_norm_error, "max_violation": self.max_violation,
                "passed": self.passed}


def verify_optimizer(opt: Optimizer, problem: NCProblem, tol: float = 1e-6) -> OptimizerCheck:
    """Evaluate every constraint at ``(X, phi)``; passes iff all are within ``tol``."""
    prepared = eliminate_equalities(problem)
    L, n, phi = opt.letters, opt.dim, opt.phi
    ev = lambda p: eval_poly(p, L, n)
    qs = list(prepared.inequalities)
    if prepared.ball is not None:
        qs.append(prepared.ball_polynomial())
    q_min = [float(np.linalg.eigvalsh(0.5 * (ev(q) + ev(q).T))[0]) for q in qs]
    eq_norms = [float(np.linalg.norm(ev(e), 2)) for e in prepared.equalities]
    kern = [float(np.linalg.norm(ev(r) @ phi)) for r in prepared.state_kernel]
    expect = [float(phi @ ev(s) @ phi) for s in prepared.expectation_ineqs]
    rules = 0.0
    for pat, rhs in prepared.rewrite.rules:
        rules = max(rules, float(np.max(np.abs(eval_word(pat, L, n) - ev(rhs)), initial=0.0)))
    obj = float(phi @ ev(prepared.objective) @ phi)
    return OptimizerCheck(q_min, eq_norms, kern, expect, rules,
                          abs(obj - opt.objective_value), abs(np.linalg.norm(phi) - 1.0), tol)


def commuting_eigen_extract(opt: Optimizer, tol: float = 1e-6, seed: int = 0,
                            return_weights: bool = False):
    """Split commuting operators into scalar points by joint diagonalisation.

    Returns one point ``(x_1(j), ..., x_n(j))`` per eigenvector; with
    ``return_weights`` also the weights ``|<e_j, phi>|^2``.
    """
    X = opt.X
    for i in range(len(X)):
        for j in range(i + 1, len(X)):
            if np.max(np.abs(X[i] @ X[j] - X[j] @ X[i]), initial=0.0) > tol:
                raise CertifyError(f"generators {i} and {j} do not commute")
    theta = np.random.default_rng(seed).standard_normal(len(X))
    A = sum(t * 0.5 * (x + x.T) for t, x in zip(theta, X))
    _, V = np.linalg.eigh(A)
    points = [np.array([V[:, j] @ x @ V[:, j] for x in X]) for j in range(opt.dim)]
    if return_weights:
        return points, (V.T @ opt.phi) ** 2
    return points


def projector_optimizer(y, problem: NCProblem) -> Optimizer:
    """Order-1 optimizer for problems over hermitian projectors.

    From a Gram decomposition of ``M_1(y)``, ``phi`` is the vector of the
    empty word and ``X_i`` the orthogonal projector onto the vector of
    ``x_i``; then ``X_i phi`` equals that vector whenever ``y_ii = y_i``.
    """
    prepared, imap = _prepared_map(problem, 1)
    block = build_moment_block(1, imap)
    M = block.evaluate(y)
    w, U = np.linalg.eigh(0.5 * (M + M.T))
    G = np.sqrt(np.clip(w, 0.0, None))[:, None] * U.T
    dim = G.shape[0]
    index = {u: i for i, u in enumerate(block.row_basis)}
    known = {}
    for l in range(prepared.alphabet.size):
        if (l,) not in index:
            continue
        v = G[:, index[(l,)]]
        nv = v @ v
        known[l] = np.outer(v, v) / nv if nv > 1e-14 else np.zeros((dim, dim))
    letters = _complete_letters(known, prepared, dim)
    phi = G[:, index[()]]
    phi = phi / np.linalg.norm(phi)
    val = float(phi @ eval_poly(prepared.objective, letters, dim) @ phi)
    return Optimizer(dim, [letters[i] for i in range(prepared.alphabet.n)], phi, letters, val)


# ---------------------------------------------------------------------------
# SOS certificates
# ---------------------------------------------------------------------------

@dataclass
class SOSCertificate:
    """Decomposition ``p - lambda = sum b*b + sum c* q c + sum (f r + r* f*) + sum g s``.

    ``c`` is a list (one entry per localizing constraint, in block order) of
    lists of polynomials; ``constraints`` holds the matching ``q``.
    """

    lam: float
    b: list
    c: list
    f: list
    g: list
    constraints: list = field(default_factory=list)
    order: int | None = None
    residual_norm: float = float("nan")

    @property
    def term_counts(self) -> dict:
        return {"squares": len(self.b), "localizing": sum(len(ci) for ci in self.c),
                "kernel": sum(not fi.is_zero() for fi in self.f), "expectation": len(self.g)}


def _gram_polys(Z, basis, eig_tol):
    Z = 0.5 * (Z + Z.T)
    w, U = np.linalg.eigh(Z)
    if w.size and w[0] < -1e-6 * max(1.0, abs(w[-1])):
        raise CertifyError(f"dual block has a negative eigenvalue {w[0]:.3e}")
    cut = eig_tol * max(1.0, w[-1] if w.size else 0.0)
    out = []
    for j in np.argsort(-w):
        if w[j] <= cut:
            continue
        vec = math.sqrt(w[j]) * U[:, j]
        i = int(np.argmax(np.abs(vec)))
        if vec[i] < 0:  # deterministic sign
            vec = -vec
        out.append(Polynomial({u: float(c) for u, c in zip(basis, vec)}))
    return out


def extract_sos(sol: SDPSolution, problem: NCProblem, k: int, eig_tol: float = 1e-7) -> SOSCertificate:
    """Read an SOS decomposition off the dual blocks and multipliers of ``sol``.

    The moment-block dual ``V = sum_j mu_j a_j a_j^T`` gives the squares
    ``b_j = sqrt(mu_j) sum_w a_j(w) w``; each localizing dual gives the
    ``c_ij``; the state-kernel row multipliers give ``f_i``; the scalar
    inequality multipliers give ``g_i``; ``lambda`` is the dual objective.
    Gram eigenvalues below ``eig_tol * max(1, largest)`` are treated as
    solver noise and dropped; the loss shows up in ``residual_norm``.
    """
    from .relaxation import assemble
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sdp, imap = assemble(problem, k)
    prepared = imap.problem
    if not sol.dual_blocks or len(sol.dual_blocks) != len(sdp.blocks):
        raise CertifyError("solution carries no dual blocks for this relaxation")
    b = _gram_polys(sol.dual_blocks[0], sdp.blocks[0].symbolic.row_basis, eig_tol)
    c, qs = [], []
    for blk, Z in zip(sdp.blocks[1:], sol.dual_blocks[1:]):
        c.append(_gram_polys(Z, blk.symbolic.row_basis, eig_tol))
        qs.append(blk.symbolic.constraint)
    f_terms = [dict() for _ in prepared.state_kernel]
    for label, mu in zip(sdp.eq_labels, sol.dual_eq):
        if isinstance(label, tuple) and label[0] == "ket0":
            _, i, w = label
            f_terms[i][w] = f_terms[i].get(w, 0.0) + 0.5 * float(mu)
    f = [Polynomial(t) for t in f_terms]
    g = [float(v) for v in sol.dual_ineq]
    cert = SOSCertificate(float(sol.dual_obj), b, c, f, g, qs, k)
    cert.residual_norm = verify_sos(cert, problem)
    return cert


def sos_expansion(cert: SOSCertificate, problem: NCProblem) -> Polynomial:
    """``lambda + sum b*b + ...`` expanded and reduced."""
    prepared = eliminate_equalities(problem)
    rs = prepared.rewrite
    adj = prepared.adjoint
    total = Polynomial.constant(cert.lam)
    for bj in cert.b:
        total = total + poly_mul(adj(bj), bj, rs)
    qs = cert.constraints or prepared.localizing_constraints()
    for q, cs in zip(qs, cert.c):
        q = reduce_poly(q, rs)
        for cij in cs:
            total = total + poly_mul(poly_mul(adj(cij), q, rs), cij, rs)
    for fi, r in zip(cert.f, prepared.state_kernel):
        fr = poly_mul(fi, r, rs)
        total = total + fr + adj(fr)
    for gi, s in zip(cert.g, prepared.expectation_ineqs):
        total = total + s * gi
    return total


def verify_sos(cert: SOSCertificate, problem: NCProblem, k: int | None = None) -> float:
    """Max coefficient of the hermitian part of ``p - expansion``.

    Raises :class:`CertifyError` when a degree bound is violated or a ``g``
    weight is negative.
    """
    prepared = eliminate_equalities(problem)
    k = cert.order if k is None else k
    if k is not None:
        qs = cert.constraints or prepared.localizing_constraints()
        if any(bj.degree() > k for bj in cert.b):
            raise CertifyError("square term exceeds degree k")
        for q, cs in zip(qs, cert.c):
            if any(cij.degree() > k - half_degree(q) for cij in cs):
                raise CertifyError("localizing term exceeds degree k - d_i")
        for fi, r in zip(cert.f, prepared.state_kernel):
            if not fi.is_zero() and fi.degree() > 2 * k - r.degree():
                raise CertifyError("kernel term exceeds degree 2k - d'_i")
    if any(gi < -1e-9 for gi in cert.g):
        raise CertifyError("negative expectation weight")
    diff = prepared.min_objective - sos_expansion(cert, problem)
    herm = (diff + prepared.adjoint(diff)) * 0.5
    return max_abs_coeff(herm)
