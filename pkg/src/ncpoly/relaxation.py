"""Moment relaxations of noncommutative polynomial problems.

The problem is

    minimise   <phi, p(X) phi>
    subject to q_i(X) >= 0         (operator inequalities)
               e_i(X) == 0         (operator equalities)
               r_i(X) phi == 0     (state kernel)
               <phi, s_i(X) phi> >= 0

and the order-k relaxation replaces <phi, w(X) phi> by scalar variables y_w
for canonical words |w| <= 2k.  Moment and localizing matrices become affine
matrix functions of y; state constraints become linear rows.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .algebra import (Alphabet, Polynomial, RewriteSystem, Word, involute, is_hermitian,
                      monomial_basis, poly_adjoint, poly_mul, reduce_poly)


class RelaxationError(ValueError):
    """Invalid problem data or relaxation order."""


@dataclass(frozen=True)
class NCProblem:
    """A noncommutative polynomial optimisation problem.

    All polynomials are kept in canonical form under ``rewrite``.  When
    ``ball`` is set, the constraint ``ball**2 - sum_l x_l* x_l >= 0`` is
    appended to the operator inequalities at assembly.
    """

    alphabet: Alphabet
    objective: Polynomial
    rewrite: RewriteSystem = field(default_factory=RewriteSystem)
    inequalities: tuple = ()
    equalities: tuple = ()
    state_kernel: tuple = ()
    expectation_ineqs: tuple = ()
    ball: float | None = None
    archimedean: bool = False
    name: str = ""
    sense: str = "min"

    def __post_init__(self):
        rs = self.rewrite
        canon = lambda p: reduce_poly(p, rs)
        object.__setattr__(self, "objective", canon(self.objective))
        for attr in ("inequalities", "equalities", "state_kernel", "expectation_ineqs"):
            object.__setattr__(self, attr, tuple(canon(p) for p in getattr(self, attr)))
        if self.ball is not None and not self.ball > 0:
            raise RelaxationError("ball constant must be positive")
        if self.sense not in ("min", "max"):
            raise RelaxationError(f"sense must be 'min' or 'max', got {self.sense!r}")

    @property
    def min_objective(self) -> Polynomial:
        """The objective of the equivalent minimisation (negated for ``sense='max'``)."""
        return self.objective if self.sense == "min" else -self.objective

    def user_value(self, v: float) -> float:
        """Map an optimum of the minimisation form back to the problem's sense."""
        return v if self.sense == "min" else -v

    def adjoint(self, p: Polynomial) -> Polynomial:
        return poly_adjoint(p, self.alphabet, self.rewrite)

    def mul(self, *factors: Polynomial) -> Polynomial:
        out = Polynomial.constant(1.0)
        for f in factors:
            out = poly_mul(out, f, self.rewrite)
        return out

    def is_hermitian(self, p: Polynomial, tol: float = 1e-12) -> bool:
        return is_hermitian(p, self.alphabet, self.rewrite, tol)

    def ball_polynomial(self) -> Polynomial:
        a = self.alphabet
        terms = Polynomial.constant(self.ball ** 2)
        for l in range(a.size):
            terms = terms - reduce_poly(Polynomial.monomial((a.adjoint_map[l], l)), self.rewrite)
        return terms

    def localizing_constraints(self) -> list:
        """Operator inequalities in block order: q_i, the ball, then +-e_i."""
        qs = list(self.inequalities)
        if self.ball is not None:
            qs.append(self.ball_polynomial())
        for e in self.equalities:
            qs.extend([e, -e])
        return qs

    def max_degree(self) -> int:
        polys = [self.objective, *self.inequalities, *self.equalities,
                 *self.state_kernel, *self.expectation_ineqs]
        return max(p.degree() for p in polys)

    def min_order(self) -> int:
        return max(1, math.ceil(self.max_degree() / 2))

    def validate(self) -> None:
        if not self.is_hermitian(self.objective):
            raise RelaxationError("objective is not hermitian")
        for label, group in (("inequality", self.inequalities),
                             ("expectation inequality", self.expectation_ineqs)):
            for p in group:
                if not self.is_hermitian(p):
                    raise RelaxationError(f"{label} {p.to_string(self.alphabet)} is not hermitian")


def half_degree(q: Polynomial) -> int:
    """``ceil(deg(q) / 2)``."""
    return -(-q.degree() // 2)


def has_archimedean_witness(problem: NCProblem) -> bool:
    """Cheap sufficient check that every letter is bounded by the constraints."""
    if problem.archimedean or problem.ball is not None:
        return True
    a, rs = problem.alphabet, problem.rewrite
    for l in range(a.size):
        sq = (a.adjoint_map[l], l)
        sq2 = (l, a.adjoint_map[l])
        if rs.reduce(sq) != Polynomial.monomial(sq) or rs.reduce(sq2) != Polynomial.monomial(sq2):
            continue
        if any(q.degree() <= 2 and (q.coeff(sq) < 0 or q.coeff(sq2) < 0)
               for q in problem.inequalities):
            continue
        return False
    return True


def eliminate_equalities(problem: NCProblem) -> NCProblem:
    """Turn linear equalities with an isolatable hermitian letter into rewrite rules.

    ``sum_l c_l x_l + c_0 == 0`` with a hermitian letter ``x_m`` (the highest
    such index) becomes the substitution ``x_m -> -(e - c_m x_m) / c_m``.  Other
    equalities are left for the paired +-e localizing blocks.
    """
    a = problem.alphabet
    rules, kept = [], []
    eliminated = set()
    for e in problem.equalities:
        letter = None
        if e.degree() == 1 and problem.is_hermitian(e):
            cands = [w[0] for w in e.words() if len(w) == 1 and a.is_hermitian_letter(w[0])
                     and w[0] not in eliminated]
            letter = max(cands) if cands else None
        if letter is None:
            kept.append(e)
            continue
        c = e.coeff((letter,))
        rhs = -(e - Polynomial.monomial((letter,), c)) / c
        rules.append(((letter,), rhs))
        eliminated.add(letter)
    if not rules:
        return problem
    rs = problem.rewrite.extended(rules, front=True)
    return replace(problem, rewrite=rs, equalities=tuple(kept))


# ---------------------------------------------------------------------------
# Moment variables
# ---------------------------------------------------------------------------

@dataclass
class MomentIndexMap:
    """Assignment of SDP variables to canonical words ``|w| <= 2k``.

    A word and its (reduced) adjoint share one variable, possibly with a sign
    when the reduced adjoint is minus a word, so the moment sequence is real
    and symmetric.  ``var_of[()]`` is the normalisation variable 0.
    """

    order: int
    problem: NCProblem
    basis: list
    var_of: dict
    var_words: list
    extra_rows: list = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.var_words)

    @property
    def alphabet(self) -> Alphabet:
        return self.problem.alphabet

    @property
    def rewrite(self) -> RewriteSystem:
        return self.problem.rewrite

    def basis_upto(self, d: int) -> list:
        return [w for w in self.basis if len(w) <= d]

    def linear_form(self, p: Polynomial) -> dict:
        """``L_y(p)`` as a sparse map variable -> coefficient."""
        out: dict = {}
        for w, c in p.items():
            try:
                var, sign = self.var_of[w]
            except KeyError:
                raise RelaxationError(f"word {w} is outside the moment basis of order {self.order}")
            out[var] = out.get(var, 0.0) + sign * c
        return {v: c for v, c in out.items() if c != 0.0}

    def moment(self, y, w: Word) -> float:
        var, sign = self.var_of[w]
        return sign * float(y[var])

    def moments(self, y) -> dict:
        """Word -> value for every word of the basis."""
        return {w: self.moment(y, w) for w in self.basis}


def build_index_map(problem: NCProblem, k: int) -> MomentIndexMap:
    a, rs = problem.alphabet, problem.rewrite
    basis = monomial_basis(2 * k, a, rs)
    var_of: dict = {}
    var_words: list = []
    deferred = []
    for w in basis:
        if w in var_of:
            continue
        adj = rs.reduce(involute(w, a))
        items = list(adj.items())
        if len(items) == 1 and abs(abs(items[0][1]) - 1.0) < 1e-15:
            u, c = items[0]
            var_of[w] = (len(var_words), 1.0)
            if u != w:
                if u in var_of:
                    raise RelaxationError(f"inconsistent adjoint pairing at word {w}")
                var_of[u] = (len(var_words), float(np.sign(c)))
            elif c < 0:
                deferred.append((w, adj))
            var_words.append(w)
        else:
            var_of[w] = (len(var_words), 1.0)
            var_words.append(w)
            deferred.append((w, adj))
    imap = MomentIndexMap(k, problem, basis, var_of, var_words)
    for w, adj in deferred:
        # y_w - L_y(reduce(w*)) = 0 keeps the sequence symmetric
        row = imap.linear_form(Polynomial.monomial(w) - adj)
        if row:
            imap.extra_rows.append(row)
    return imap


def eval_moment_functional(y, p: Polynomial, imap: MomentIndexMap) -> float:
    """``L_y(p) = sum_w p_w y_w`` for solved variable values ``y``."""
    return float(sum(c * y[v] for v, c in imap.linear_form(p).items()))


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------

@dataclass
class SymbolicBlock:
    """Matrix of linear forms; entry (i, j) is ``L_y(row_i* q col_j)``."""

    kind: str
    row_basis: list
    entries: list
    constraint: Polynomial | None = None

    @property
    def size(self) -> int:
        return len(self.row_basis)

    def compile(self, num_vars: int) -> np.ndarray:
        n = self.size
        F = np.zeros((num_vars, n, n))
        for i in range(n):
            for j in range(n):
                for v, c in self.entries[i][j].items():
                    F[v, i, j] += c
        return F

    def evaluate(self, y) -> np.ndarray:
        n = self.size
        M = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                M[i, j] = sum(c * y[v] for v, c in self.entries[i][j].items())
        return M


def _localizing(q: Polynomial, order: int, imap: MomentIndexMap, kind: str) -> SymbolicBlock:
    if order < 0:
        raise RelaxationError(f"negative block order for {kind}")
    problem = imap.problem
    rows = imap.basis_upto(order)
    adj = [problem.adjoint(Polynomial.monomial(v)) for v in rows]
    mons = [Polynomial.monomial(w) for w in rows]
    n = len(rows)
    entries = [[None] * n for _ in range(n)]
    for i in range(n):
        left = poly_mul(adj[i], q, problem.rewrite)
        for j in range(i, n):
            form = imap.linear_form(poly_mul(left, mons[j], problem.rewrite))
            entries[i][j] = form
            entries[j][i] = form
    return SymbolicBlock(kind, rows, entries, q)


def build_moment_block(k: int, problem_or_map, imap: MomentIndexMap | None = None) -> SymbolicBlock:
    """Moment matrix ``M_k(y)`` with entry (v, w) = y_{v* w}."""
    imap = _as_map(problem_or_map, k, imap)
    _check_order(imap.problem, k)
    return _localizing(Polynomial.constant(1.0), k, imap, "moment")


def build_localizing_block(q: Polynomial, k: int, problem_or_map,
                           imap: MomentIndexMap | None = None, kind: str = "localizing"):
    """Localizing matrix ``M_{k-d_q}(q y)`` with entry (v, w) = L_y(v* q w)."""
    imap = _as_map(problem_or_map, k, imap)
    q = reduce_poly(q, imap.rewrite)
    return _localizing(q, k - half_degree(q), imap, kind)


def build_moment_vector_rows(r: Polynomial, k: int, problem_or_map,
                             imap: MomentIndexMap | None = None) -> list:
    """Rows ``L_y(w r) = 0`` for canonical ``|w| <= 2k - deg(r)``, deduplicated."""
    imap = _as_map(problem_or_map, k, imap)
    r = reduce_poly(r, imap.rewrite)
    if r.is_zero():
        return []
    rows, seen = [], set()
    for w in imap.basis_upto(2 * k - r.degree()):
        form = imap.linear_form(poly_mul(Polynomial.monomial(w), r, imap.rewrite))
        if not form:
            continue
        key = tuple(sorted(form.items()))
        if key in seen:
            continue
        seen.add(key)
        rows.append((w, form))
    return rows


def build_expectation_rows(s: Polynomial, problem_or_map, k: int | None = None,
                           imap: MomentIndexMap | None = None) -> dict:
    """The single row ``sum_w s_w y_w >= 0`` as a sparse form."""
    if imap is None:
        imap = _as_map(problem_or_map, k if k is not None else problem_or_map.min_order(), None)
    return imap.linear_form(reduce_poly(s, imap.rewrite))


def _as_map(problem_or_map, k, imap):
    if imap is not None:
        return imap
    if isinstance(problem_or_map, MomentIndexMap):
        return problem_or_map
    return build_index_map(eliminate_equalities(problem_or_map), k)


def _check_order(problem: NCProblem, k: int):
    if 2 * k < problem.max_degree():
        raise RelaxationError(
            f"order {k} too small: polynomials of degree {problem.max_degree()} need 2k >= degree")


# ---------------------------------------------------------------------------
# SDP data
# ---------------------------------------------------------------------------

@dataclass
class SDPBlock:
    """Matrix ``const + sum_i y_i coeffs[i]`` constrained to be PSD.

    ``face``, when set, is an orthonormal basis (columns) of a subspace whose
    complement the linear equalities already force into the kernel of the
    block; the solver then works with ``face^T F face`` instead of ``F``.
    """

    label: str
    coeffs: np.ndarray
    const: np.ndarray
    symbolic: SymbolicBlock | None = None
    face: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.const.shape[0]

    def value(self, y) -> np.ndarray:
        return self.const + np.tensordot(y, self.coeffs, axes=1)


@dataclass
class SDPProblem:
    """``min c.y + c0`` s.t. PSD blocks, ``A_eq y = b_eq`` and ``A_in y >= b_in``."""

    num_vars: int
    objective: np.ndarray
    blocks: list
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray
    objective_const: float = 0.0
    eq_labels: list = field(default_factory=list)
    ineq_labels: list = field(default_factory=list)

    def __post_init__(self):
        m = self.num_vars
        self.objective = np.asarray(self.objective, dtype=float).reshape(m)
        self.eq_matrix = np.asarray(self.eq_matrix, dtype=float).reshape(-1, m)
        self.eq_rhs = np.asarray(self.eq_rhs, dtype=float).reshape(-1)
        self.ineq_matrix = np.asarray(self.ineq_matrix, dtype=float).reshape(-1, m)
        self.ineq_rhs = np.asarray(self.ineq_rhs, dtype=float).reshape(-1)
        if not self.eq_labels:
            self.eq_labels = [f"eq{i}" for i in range(len(self.eq_rhs))]
        if not self.ineq_labels:
            self.ineq_labels = [f"ineq{i}" for i in range(len(self.ineq_rhs))]

    def block(self, label: str) -> SDPBlock:
        for b in self.blocks:
            if b.label == label:
                return b
        raise KeyError(label)


def _kernel_face(sym: SymbolicBlock, order: int, imap: MomentIndexMap):
    """Complement of the block kernel implied by the state-kernel rows.

    For every ``r`` and word ``w`` with ``|w| + deg(r) <= order`` the vector of
    ``w r`` over the row basis is annihilated by the block whenever the rows
    ``L_y(u r) = 0`` hold, so those directions can be projected out.
    """
    problem = imap.problem
    if not problem.state_kernel:
        return None
    index = {u: i for i, u in enumerate(sym.row_basis)}
    vecs = []
    for r in problem.state_kernel:
        if r.degree() > order:
            continue
        for w in imap.basis_upto(order - r.degree()):
            p = poly_mul(Polynomial.monomial(w), r, problem.rewrite)
            if p.is_zero():
                continue
            v = np.zeros(sym.size)
            for u, c in p.items():
                v[index[u]] += c
            vecs.append(v)
    if not vecs:
        return None
    U, s, _ = np.linalg.svd(np.array(vecs).T)
    rank = int(np.sum(s > 1e-12 * s[0]))
    return U[:, rank:]


def _dense_rows(forms, m):
    A = np.zeros((len(forms), m))
    for i, form in enumerate(forms):
        for v, c in form.items():
            A[i, v] += c
    return A


def assemble(problem: NCProblem, k: int):
    """Build the order-``k`` relaxation.

    Returns the :class:`SDPProblem` and the :class:`MomentIndexMap` that ties
    its variables to words.  Blocks come in the order: moment, one per
    localizing constraint (see :meth:`NCProblem.localizing_constraints`).
    Equality rows: normalisation first, then state-kernel rows, then
    symmetry rows.  Inequality rows: one per expectation constraint.
    """
    problem.validate()
    prepared = eliminate_equalities(problem)
    _check_order(prepared, k)
    if not has_archimedean_witness(prepared):
        warnings.warn("no Archimedean witness among the constraints; consider setting a ball "
                      "constant", stacklevel=2)
    imap = build_index_map(prepared, k)
    m = imap.num_vars

    blocks = []
    sym = build_moment_block(k, imap)
    blocks.append(SDPBlock("moment", sym.compile(m), np.zeros((sym.size, sym.size)), sym,
                           _kernel_face(sym, k, imap)))
    for i, q in enumerate(prepared.localizing_constraints()):
        if k - half_degree(q) < 0:
            raise RelaxationError(f"order {k} too small for constraint of degree {q.degree()}")
        sym = build_localizing_block(q, k, imap, kind=f"localizing:{i}")
        blocks.append(SDPBlock(sym.kind, sym.compile(m), np.zeros((sym.size, sym.size)), sym,
                               _kernel_face(sym, k - half_degree(q), imap)))

    eq_forms, eq_rhs, eq_labels = [{0: 1.0}], [1.0], ["normalization"]
    for i, r in enumerate(prepared.state_kernel):
        for w, form in build_moment_vector_rows(r, k, imap):
            eq_forms.append(form)
            eq_rhs.append(0.0)
            eq_labels.append(("ket0", i, w))
    for form in imap.extra_rows:
        eq_forms.append(form)
        eq_rhs.append(0.0)
        eq_labels.append(("symmetry",))

    in_forms, in_labels = [], []
    for i, s in enumerate(prepared.expectation_ineqs):
        in_forms.append(build_expectation_rows(s, imap, imap=imap))
        in_labels.append(("expect", i))

    c = np.zeros(m)
    for v, coef in imap.linear_form(prepared.min_objective).items():
        c[v] += coef
    sdp = SDPProblem(
        num_vars=m,
        objective=c,
        blocks=blocks,
        eq_matrix=_dense_rows(eq_forms, m),
        eq_rhs=np.array(eq_rhs),
        ineq_matrix=_dense_rows(in_forms, m),
        ineq_rhs=np.zeros(len(in_forms)),
        eq_labels=eq_labels,
        ineq_labels=in_labels,
    )
    return sdp, imap
