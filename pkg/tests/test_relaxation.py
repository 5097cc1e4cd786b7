"""Moment variables, symbolic blocks and relaxation assembly."""

import random
import warnings

import numpy as np
import pytest

from ncpoly.algebra import Alphabet, Polynomial, RewriteSystem, poly_mul, reduce
from ncpoly.problems import builtin_corpus, example_problem
from ncpoly.relaxation import (NCProblem, RelaxationError, assemble, build_expectation_rows,
                               build_index_map, build_localizing_block, build_moment_block,
                               build_moment_vector_rows, eliminate_equalities,
                               eval_moment_functional, half_degree)
from ncpoly.sdp import solve

from helpers import KINDS, induced_moments, sample

X1, X2 = Polynomial.monomial((0,)), Polynomial.monomial((1,))
Q = Polynomial({(1, 1): -1.0, (1,): 1.0, (): 0.5})
R = Polynomial({(0,): 3.0, (1,): 2.0, (): -1.0})


def var(imap, w):
    v, s = imap.var_of[tuple(w)]
    return {v: s}


def test_half_degree():
    assert half_degree(Q) == 1
    assert half_degree(Polynomial.constant(2.0)) == 0
    assert half_degree(Polynomial.monomial((0, 1, 0))) == 2


def test_problem_validation():
    a = Alphabet.hermitian(2)
    with pytest.raises(RelaxationError):
        NCProblem(a, Polynomial.monomial((0, 1))).validate()
    with pytest.raises(RelaxationError):
        NCProblem(a, X1, ball=-1.0)
    with pytest.raises(RelaxationError):
        NCProblem(a, X1, sense="sideways")


def test_index_map_pairs_adjoint_words():
    imap = build_index_map(example_problem("basic"), 2)
    assert imap.var_of[()] == (0, 1.0)
    for w in imap.basis:
        assert imap.var_of[w][0] == imap.var_of[w[::-1]][0]


def test_moment_block_entries():
    p = example_problem("basic")
    imap = build_index_map(p, 2)
    M1 = build_moment_block(1, imap)
    assert M1.row_basis == [(), (0,), (1,)]
    assert M1.entries[1][2] == var(imap, (0, 1))
    assert M1.entries[1][1] == var(imap, (0,))
    assert M1.entries[0][0] == {0: 1.0}
    M2 = build_moment_block(2, imap)
    i = M2.row_basis.index((0, 1))
    assert M2.entries[i][i] == var(imap, (1, 0, 1))


def test_localizing_block_entries():
    p = example_problem("basic")
    imap1 = build_index_map(p, 1)
    L1 = build_localizing_block(Q, 1, imap1)
    assert L1.size == 1
    assert L1.entries[0][0] == {imap1.var_of[(1, 1)][0]: -1.0, imap1.var_of[(1,)][0]: 1.0, 0: 0.5}
    imap2 = build_index_map(p, 2)
    L2 = build_localizing_block(Q, 2, imap2)
    j = L2.row_basis.index((0,))
    expect = {imap2.var_of[(1, 1, 0)][0]: -1.0, imap2.var_of[(1, 0)][0]: 1.0,
              imap2.var_of[(0,)][0]: 0.5}
    assert L2.entries[0][j] == expect
    one = build_localizing_block(Polynomial.constant(1.0), 2, imap2)
    assert one.entries == build_moment_block(2, imap2).entries


def test_moment_vector_rows():
    p = example_problem("generalized")
    imap = build_index_map(p, 1)
    rows = dict(build_moment_vector_rows(R, 1, imap))
    y = lambda w: imap.var_of[w][0]
    assert rows[()] == {y((0,)): 3.0, y((1,)): 2.0, 0: -1.0}
    assert rows[(0,)] == {y((0,)): 2.0, y((0, 1)): 2.0}
    assert len(rows) == 3
    assert build_moment_vector_rows(Polynomial.zero(), 1, imap) == []


def test_expectation_rows():
    p = example_problem("generalized")
    imap = build_index_map(p, 1)
    s = Polynomial({(0,): -1.0, (): 1.0 / 3.0})
    assert build_expectation_rows(s, imap, imap=imap) == {imap.var_of[(0,)][0]: -1.0, 0: 1.0 / 3.0}
    assert build_expectation_rows(Polynomial.constant(1.0), imap, imap=imap) == {0: 1.0}
    obj = p.objective - (-0.7)
    row = build_expectation_rows(obj, imap, imap=imap)
    assert row == {imap.var_of[(0, 1)][0]: 2.0, 0: 0.7}


def test_assemble_structure():
    sdp, imap = assemble(example_problem("basic"), 1)
    assert len(imap.basis) == 6 and sdp.num_vars == 5
    assert [b.size for b in sdp.blocks] == [3, 1]
    gsdp, _ = assemble(example_problem("generalized"), 1)
    kernel_rows = [l for l in gsdp.eq_labels if isinstance(l, tuple) and l[0] == "ket0"]
    assert len(kernel_rows) == 3 and len(gsdp.ineq_labels) == 1
    with pytest.raises(RelaxationError):
        assemble(example_problem("basic"), 0)


def test_compiled_blocks_symmetric_and_all_variables_used():
    for entry in builtin_corpus():
        for k in (1, 2):
            sdp, _ = assemble(entry.problem, k)
            used = np.zeros(sdp.num_vars, bool)
            for b in sdp.blocks:
                assert np.array_equal(b.coeffs, b.coeffs.transpose(0, 2, 1))
                used |= np.abs(b.coeffs).reshape(sdp.num_vars, -1).sum(axis=1) > 0
            used |= np.abs(sdp.eq_matrix).sum(axis=0) > 0
            assert used.all()


def test_eval_moment_functional():
    p = example_problem("basic")
    imap = build_index_map(p, 1)
    y = np.zeros(imap.num_vars)
    for w, val in {(): 1, (0,): 0.75, (1,): -0.25, (0, 1): -0.375, (1, 1): 0.25}.items():
        y[imap.var_of[w][0]] = val
    assert eval_moment_functional(y, p.objective, imap) == pytest.approx(-0.75, abs=1e-15)
    assert eval_moment_functional(y, Polynomial.constant(1.0), imap) == 1.0


def test_ball_polynomial_nonnegative_on_representable_moments():
    rng = np.random.default_rng(5)
    base = example_problem("basic")
    p = NCProblem(base.alphabet, base.objective, base.rewrite, base.inequalities, ball=2.0)
    for _ in range(50):
        _, _, X, phi = sample("example", rng)
        sdp, y = induced_moments(p, 1, X, phi)
        _, imap = assemble(p, 1)
        assert eval_moment_functional(y, p.ball_polynomial(), imap) >= -1e-12


def test_archimedean_warning():
    a = Alphabet.hermitian(1)
    with pytest.warns(UserWarning):
        assemble(NCProblem(a, X1), 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assemble(NCProblem(a, X1, ball=1.0), 1)


def test_equality_elimination():
    a = Alphabet.hermitian(2)
    e = X1 + X2 - 1.0
    p = NCProblem(a, Polynomial.monomial((0, 1)) + Polynomial.monomial((1, 0)),
                  RewriteSystem([((0, 0), X1)]), equalities=(e,))
    prepared = eliminate_equalities(p)
    assert prepared.equalities == ()
    assert reduce((1,), prepared.rewrite) == 1.0 - X1
    # 2 x1 (1 - x1) = 0 with x1 a projector
    sol = solve(assemble(p, 1)[0])
    assert sol.primal_obj == pytest.approx(0.0, abs=1e-6)


def test_nonlinear_equality_uses_paired_blocks():
    a = Alphabet.hermitian(1)
    e = Polynomial({(0, 0): 1.0, (): -1.0})
    p = NCProblem(a, X1, equalities=(e,), archimedean=True)
    sdp, _ = assemble(p, 1)
    assert len(sdp.blocks) == 3
    assert solve(sdp).primal_obj == pytest.approx(-1.0, abs=1e-6)


def test_entry_consistency_random():
    p = example_problem("basic")
    imap = build_index_map(p, 2)
    block = build_localizing_block(Q, 2, imap)
    rng = random.Random(1)
    y = np.random.default_rng(1).normal(size=imap.num_vars)
    for _ in range(30):
        i, j = rng.randrange(block.size), rng.randrange(block.size)
        v, w = block.row_basis[i], block.row_basis[j]
        total = 0.0
        for u, c in Q.items():
            word = poly_mul(Polynomial.monomial(v[::-1] + u), Polynomial.monomial(w), p.rewrite)
            total += c * eval_moment_functional(y, word, imap)
        assert block.evaluate(y)[i, j] == pytest.approx(total, abs=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_representability(kind):
    rng = np.random.default_rng(KINDS.index(kind))
    for _ in range(200):
        problem, k, X, phi = sample(kind, rng)
        sdp, y = induced_moments(problem, k, X, phi)
        for b in sdp.blocks:
            assert np.linalg.eigvalsh(b.value(y)).min() >= -1e-10
        assert np.abs(sdp.eq_matrix @ y - sdp.eq_rhs).max(initial=0) <= 1e-10
        assert (sdp.ineq_matrix @ y - sdp.ineq_rhs).min(initial=0) >= -1e-10
