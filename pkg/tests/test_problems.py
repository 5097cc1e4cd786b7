"""Problem builders: Bell scenarios, fermions, commutative and binary problems."""

import itertools
import math

import numpy as np
import pytest

from ncpoly.algebra import Polynomial, RewriteSystem, fermionic_rules, monomial_basis, reduce
from ncpoly.problems import (BellScenario, FermionSpec, bell_problem, binary_quadratic_problem,
                             builtin_corpus, chsh_scenario, commutative_problem,
                             example_problem, fermion_order, fermion_problem,
                             hermitize_two_body)
from ncpoly.relaxation import assemble
from ncpoly.sdp import solve

from oracles import (bell_classical_max, binary_min, chsh_classical_bruteforce,
                     chsh_operator_norm, fermion_ground_energy)

TIGHT = dict(gap_tol=1e-10, feas_tol=1e-10)


def bound(problem, k, **kw):
    sol = solve(assemble(problem, k)[0], **(kw or TIGHT))
    assert sol.ok, sol.message
    return problem.user_value(sol.primal_obj)


# --- oracles -----------------------------------------------------------------

def test_chsh_oracles():
    assert chsh_operator_norm() == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    assert chsh_classical_bruteforce() == 2.0
    sc = chsh_scenario()
    assert bell_classical_max(sc.coefficients, sc.party_measurements) == pytest.approx(2.0)


# --- Bell ----------------------------------------------------------------------

def test_chsh_quantum_bound():
    assert bound(bell_problem(chsh_scenario()), 1) == pytest.approx(chsh_operator_norm(), abs=1e-6)


def test_chsh_classical_override():
    assert bound(bell_problem(chsh_scenario(), classical=True), 2) == pytest.approx(
        chsh_classical_bruteforce(), abs=1e-6)


def test_bell_letter_count():
    sc = BellScenario(((2, 3), (4,)), {((0, 0), (0, 1)): 1.0})
    p = bell_problem(sc)
    assert p.alphabet.size == (2 - 1) + (3 - 1) + (4 - 1)
    with pytest.raises(ValueError):
        BellScenario(((2,), (2,), (2,)))
    with pytest.raises(ValueError):
        BellScenario(((1,), (2,)))


def test_quantum_bound_dominates_classical_on_random_tables():
    rng = np.random.default_rng(8)
    pm = ((2, 2), (2, 2))
    for _ in range(20):
        coeffs = {((x, a), (y, b)): float(rng.normal())
                  for x, a, y, b in itertools.product(range(2), repeat=4)}
        q = bound(bell_problem(BellScenario(pm, coeffs)), 1)
        assert q >= bell_classical_max(coeffs, pm) - 1e-6


# --- fermions ----------------------------------------------------------------

def test_anticommutator_rule():
    rs = RewriteSystem(fermionic_rules(1))
    assert reduce((0, 1), rs) == Polynomial.constant(1.0) - Polynomial.monomial((1, 0))


def test_fermion_trivial_and_one_body():
    assert bound(fermion_problem(FermionSpec(1, 1)), 1) == pytest.approx(0.0, abs=1e-8)
    spec = FermionSpec(2, 1, one_body=np.diag([1.0, 2.0]))
    for k in (1, 2):
        assert bound(fermion_problem(spec), k) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        FermionSpec(2, 3)


@pytest.mark.parametrize("m", [2, 3])
def test_fermions_exact_at_order_n(m):
    rng = np.random.default_rng(100 + m)
    for n in range(m + 1):
        for _ in range(2):
            h = hermitize_two_body(rng.normal(size=(m,) * 4))
            t = rng.normal(size=(m, m))
            spec = FermionSpec(m, n, h=h, one_body=0.5 * (t + t.T))
            exact = fermion_ground_energy(h, n, spec.one_body)
            assert bound(fermion_problem(spec), fermion_order(spec)) == pytest.approx(exact, abs=1e-6)


# --- commutative and binary ----------------------------------------------------

def test_commutative_example():
    p = example_problem("commutative")
    assert bound(p, 1) == pytest.approx(-0.75, abs=1e-6)
    assert bound(p, 2) == pytest.approx(1 - math.sqrt(3), abs=1e-6)
    plain = commutative_problem(Polynomial.monomial((0,)), n=2)
    assert len(monomial_basis(2, plain.alphabet, plain.rewrite)) == 6


def _random_instance(rng, n):
    a = {(i, j): rng.normal() for i in range(n) for j in range(n)}
    p = Polynomial(a)
    p = 0.5 * (p + Polynomial({w[::-1]: c for w, c in p.items()}))
    q = Polynomial({(i, i): -1.0 for i in range(n)}) + 1.0 + Polynomial(
        {(i,): 0.3 * rng.normal() for i in range(n)})
    return p, q


def test_commutative_versus_noncommutative():
    from ncpoly.relaxation import NCProblem
    from ncpoly.algebra import Alphabet
    rng = np.random.default_rng(3)
    for _ in range(5):
        p, q = _random_instance(rng, 2)
        nc = NCProblem(Alphabet.hermitian(2), p, inequalities=(q,))
        comm = commutative_problem(p, [q], n=2)
        assert bound(comm, 1) == pytest.approx(bound(nc, 1), abs=1e-6)
        assert bound(comm, 2) >= bound(nc, 2) - 1e-6


def test_binary_quadratic_examples():
    x1 = Polynomial.monomial((0,))
    assert bound(binary_quadratic_problem(x1), 1) == pytest.approx(0.0, abs=1e-7)
    assert bound(binary_quadratic_problem(-1.0 * x1), 1) == pytest.approx(-1.0, abs=1e-7)
    rng = np.random.default_rng(12)
    for _ in range(5):
        terms = {(i, j): rng.normal() for i in range(3) for j in range(3)}
        terms = {w: 0.5 * (c + terms[w[::-1]]) for w, c in terms.items()}
        p = binary_quadratic_problem(Polynomial(terms), 3)
        assert bound(p, 1) <= binary_min(terms, 3) + 1e-6


# --- corpus --------------------------------------------------------------------

def test_corpus_reference_values():
    corpus = builtin_corpus()
    assert len(corpus) == 3
    basic, _, gen = corpus
    for entry, k in ((basic, 2), (gen, 2)):
        sdp, _ = assemble(entry.problem, k)
        sol = solve(sdp, **TIGHT)
        M = sdp.blocks[0].value(sol.y)
        assert np.abs(M - entry.expected["moment_matrices"][k]).max() < 1e-6
    eig = np.linalg.eigvalsh(gen.expected["moment_matrices"][2])
    assert np.allclose(eig[-2:], [17 / 12, 5 / 3], atol=1e-12)
