"""Problem builders: Bell scenarios, fermions, commutative and binary problems, worked examples."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (Alphabet, Polynomial, RewriteSystem, commutative_rules, fermionic_rules,
                      group_commutation_rules, idempotent_rules, poly_mul, projector_group_rules,
                      reduce_poly)
from .relaxation import NCProblem, RelaxationError

SQRT3 = math.sqrt(3.0)
SQRT2 = math.sqrt(2.0)


def _poly(terms) -> Polynomial:
    return Polynomial({tuple(w): float(c) for w, c in terms.items()})


# ---------------------------------------------------------------------------
# Bell scenarios
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BellScenario:
    """Two-party Bell expression ``sum c_ij P(ij)``.

    Parameters
    ----------
    party_measurements : pair of sequences of int
        Outcome count of every measurement of party A and of party B.
    coefficients : dict
        Maps ``((x, a), (y, b))`` to the weight of ``P(a b | x y)``.  Either
        side may be ``None`` for a single-party marginal term; ``(None, None)``
        is a constant.
    """

    party_measurements: tuple
    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        pm = tuple(tuple(int(s) for s in party) for party in self.party_measurements)
        object.__setattr__(self, "party_measurements", pm)
        if len(pm) != 2:
            raise ValueError("a Bell scenario needs exactly two parties")
        if any(s < 2 for party in pm for s in party):
            raise ValueError("every measurement needs at least two outcomes")


def chsh_scenario() -> BellScenario:
    """CHSH in correlator form, ``sum_xy (-1)^(xy) <A_x B_y>`` with +-1 outcomes."""
    coeffs = {}
    for x, y, a, b in itertools.product(range(2), repeat=4):
        coeffs[((x, a), (y, b))] = float((-1) ** (x * y + a + b))
    return BellScenario(((2, 2), (2, 2)), coeffs)


def bell_problem(sc: BellScenario, classical: bool = False) -> NCProblem:
    """Maximise the Bell expression over quantum (or classical) strategies.

    Each measurement keeps one projector letter per outcome except the last,
    which is replaced by ``1 - sum`` of the others.  Projectors of one
    measurement are orthogonal, and the two parties commute.  With
    ``classical=True`` every pair of letters commutes, which at order >= 2
    bounds local hidden-variable strategies.
    """
    names, letter_of, groups = [], {}, []
    for party, label in zip(sc.party_measurements, "AB"):
        party_letters = []
        for x, outcomes in enumerate(party):
            group = []
            for a in range(outcomes - 1):
                letter_of[(label, x, a)] = len(names)
                group.append(len(names))
                names.append(f"{label}{x}_{a}")
            groups.append(group)
            party_letters.extend(group)
        letter_of[label] = party_letters
    alphabet = Alphabet.hermitian(names)

    rules = []
    for g in groups:
        rules.extend(projector_group_rules(g))
    if classical:
        rules.extend(commutative_rules(alphabet))
    else:
        rules.extend(group_commutation_rules([letter_of["A"], letter_of["B"]]))
    rs = RewriteSystem(rules)

    def projector(label, x, a) -> Polynomial:
        outcomes = sc.party_measurements["AB".index(label)][x]
        if not 0 <= a < outcomes:
            raise ValueError(f"outcome {a} out of range for measurement {label}{x}")
        if a < outcomes - 1:
            return Polynomial.monomial((letter_of[(label, x, a)],))
        out = Polynomial.constant(1.0)
        for o in range(outcomes - 1):
            out = out - Polynomial.monomial((letter_of[(label, x, o)],))
        return out

    obj = Polynomial.zero()
    for (sa, sb), c in sc.coefficients.items():
        pa = projector("A", *sa) if sa is not None else Polynomial.constant(1.0)
        pb = projector("B", *sb) if sb is not None else Polynomial.constant(1.0)
        obj = obj + poly_mul(pa, pb, rs) * c
    kind = "classical" if classical else "quantum"
    return NCProblem(alphabet, obj, rs, archimedean=True, sense="max", name=f"bell-{kind}")


# ---------------------------------------------------------------------------
# Fermions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FermionSpec:
    """``N`` fermions on ``M`` orbitals with two-body tensor ``h`` (and optional one-body ``t``).

    The Hamiltonian is ``sum h_ijkl a_i^+ a_j^+ a_k a_l + sum t_ij a_i^+ a_j``.
    """

    M: int
    N: int
    h: np.ndarray | None = None
    one_body: np.ndarray | None = None

    def __post_init__(self):
        if not 0 <= self.N <= self.M:
            raise ValueError(f"need 0 <= N <= M, got N={self.N}, M={self.M}")


def fermion_alphabet(m: int) -> Alphabet:
    """Letters ``a_i`` (index i) and their adjoints ``a_i'`` (index m + i)."""
    return Alphabet.general([f"a{i + 1}" for i in range(m)])


def fermion_hamiltonian(spec: FermionSpec) -> Polynomial:
    m = spec.M
    rs = RewriteSystem(fermionic_rules(m))
    terms = {}
    if spec.h is not None:
        h = np.asarray(spec.h, dtype=float)
        for i, j, k, l in itertools.product(range(m), repeat=4):
            if h[i, j, k, l] != 0.0:
                w = (m + i, m + j, k, l)
                terms[w] = terms.get(w, 0.0) + h[i, j, k, l]
    if spec.one_body is not None:
        t = np.asarray(spec.one_body, dtype=float)
        for i, j in itertools.product(range(m), repeat=2):
            if t[i, j] != 0.0:
                w = (m + i, j)
                terms[w] = terms.get(w, 0.0) + t[i, j]
    return reduce_poly(Polynomial(terms), rs)


def fermion_problem(spec: FermionSpec) -> NCProblem:
    """Ground-state energy of ``N`` fermions as a state-constrained problem.

    CAR normal ordering lives in the rewrite system and the particle number
    enters as the state constraint ``(sum_i a_i^+ a_i - N) phi = 0``.
    """
    m = spec.M
    a = fermion_alphabet(m)
    rs = RewriteSystem(fermionic_rules(m))
    obj = fermion_hamiltonian(spec)
    number = Polynomial({(m + i, i): 1.0 for i in range(m)}) - float(spec.N)
    return NCProblem(a, obj, rs, state_kernel=(number,), archimedean=True,
                     name=f"fermions-M{m}-N{spec.N}")


def fermion_order(spec: FermionSpec) -> int:
    """Order at which the hierarchy is expected to be exact: ``max(N, ceil(deg/2))``."""
    deg = fermion_hamiltonian(spec).degree()
    return max(spec.N, -(-deg // 2), 1)


def hermitize_two_body(h: np.ndarray) -> np.ndarray:
    """Average ``h`` with its adjoint image ``h_lkji`` so the Hamiltonian is hermitian."""
    h = np.asarray(h, dtype=float)
    return 0.5 * (h + h.transpose(3, 2, 1, 0))


# ---------------------------------------------------------------------------
# Commutative and binary problems
# ---------------------------------------------------------------------------

def _letters_used(polys) -> int:
    top = -1
    for p in polys:
        for w in p.words():
            if w:
                top = max(top, max(w))
    return top + 1


def commutative_problem(p: Polynomial, q_list=(), n: int | None = None, rules=(),
                        **kw) -> NCProblem:
    """Lasserre's setting: hermitian letters that all commute.

    ``rules`` adds problem-specific rewrite rules (e.g. ``x1^2 -> x1``);
    other keyword arguments are passed to :class:`NCProblem`.
    """
    n = _letters_used([p, *q_list]) if n is None else n
    a = Alphabet.hermitian(max(n, 1))
    rs = RewriteSystem(list(rules) + commutative_rules(a))
    return NCProblem(a, p, rs, inequalities=tuple(q_list), **kw)


def binary_quadratic_problem(p: Polynomial, n: int | None = None) -> NCProblem:
    """Minimise ``<phi, p(X) phi>`` over hermitian projectors ``X_i^2 = X_i``."""
    n = _letters_used([p]) if n is None else n
    a = Alphabet.hermitian(max(n, 1))
    rs = RewriteSystem(idempotent_rules(range(a.size)))
    return NCProblem(a, p, rs, archimedean=True, name="binary-quadratic")


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------

def example_problem(kind: str = "basic") -> NCProblem:
    """The two-letter worked example.

    ``kind`` is ``"basic"`` (noncommutative), ``"commutative"`` or
    ``"generalized"`` (adds a state constraint and an expectation bound).
    """
    a = Alphabet.hermitian(2)
    idem = idempotent_rules([0])
    obj = _poly({(0, 1): 1.0, (1, 0): 1.0})
    q = _poly({(1, 1): -1.0, (1,): 1.0, (): 0.5})
    if kind == "basic":
        return NCProblem(a, obj, RewriteSystem(idem), inequalities=(q,), name="example")
    if kind == "commutative":
        return commutative_problem(obj, [q], n=2, rules=idem, name="example-commutative")
    if kind == "generalized":
        r = _poly({(0,): 3.0, (1,): 2.0, (): -1.0})
        s = _poly({(0,): -1.0, (): 1.0 / 3.0})
        return NCProblem(a, obj, RewriteSystem(idem), inequalities=(q,), state_kernel=(r,),
                         expectation_ineqs=(s,), name="example-generalized")
    raise ValueError(f"unknown example {kind!r}")


@dataclass
class CorpusEntry:
    """A reference problem with its documented results.

    ``expected`` keys: ``optima`` (order -> value), ``moment_matrices``
    (order -> matrix over the canonical basis), ``ranks`` (order -> rank),
    ``optimizer`` (dict with ``X`` and ``phi``) or ``point`` (commuting
    case), and ``certificate`` (dict with ``lam``, ``b``, ``c``, ``f``,
    ``g``) when available.
    """

    name: str
    problem: NCProblem
    expected: dict


def builtin_corpus() -> list:
    """The three worked examples with their reference values."""
    basic = example_problem("basic")
    comm = example_problem("commutative")
    gen = example_problem("generalized")
    x1, x2 = Polynomial.monomial((0,)), Polynomial.monomial((1,))
    one = Polynomial.constant(1.0)

    M1 = np.array([[1, 3 / 4, -1 / 4],
                   [3 / 4, 3 / 4, -3 / 8],
                   [-1 / 4, -3 / 8, 1 / 4]])
    M2 = np.array([[1, 3 / 4, -1 / 4, -3 / 8, -3 / 8, 1 / 4],
                   [3 / 4, 3 / 4, -3 / 8, -3 / 8, -3 / 16, 0],
                   [-1 / 4, -3 / 8, 1 / 4, 3 / 16, 0, 1 / 8],
                   [-3 / 8, -3 / 8, 3 / 16, 3 / 16, 3 / 32, 0],
                   [-3 / 8, -3 / 16, 0, 3 / 32, 3 / 16, -3 / 16],
                   [1 / 4, 0, 1 / 8, 0, -3 / 16, 1 / 4]])
    basic_exp = {
        "optima": {1: -0.75, 2: -0.75},
        "moment_matrices": {1: M1, 2: M2},
        "eigenvalues": {1: [0.0, 1 - math.sqrt(37) / 8, 1 + math.sqrt(37) / 8],
                        2: [3 / 32 * (14 - math.sqrt(61)), 3 / 32 * (14 + math.sqrt(61))]},
        "ranks": {2: (2, 2)},
        "optimizer": {"X": [np.array([[3 / 4, SQRT3 / 4], [SQRT3 / 4, 1 / 4]]),
                            np.array([[-1 / 4, -SQRT3 / 4], [-SQRT3 / 4, 5 / 4]])],
                      "phi": np.array([1.0, 0.0])},
        "certificate": {"order": 1, "lam": -0.75, "b": [one * -0.5 + x1 + x2], "c": [[one]],
                        "f": [], "g": []},
    }
    comm_exp = {
        "optima": {1: -0.75, 2: 1 - SQRT3},
        "point": np.array([1.0, (1 - SQRT3) / 2]),
    }
    G1 = np.array([[1, 1 / 3, 0],
                   [1 / 3, 1 / 3, -1 / 3],
                   [0, -1 / 3, 1 / 2]])
    G2 = np.array([[1, 1 / 3, 0, -1 / 3, -1 / 3, 1 / 2],
                   [1 / 3, 1 / 3, -1 / 3, -1 / 3, 0, -1 / 6],
                   [0, -1 / 3, 1 / 2, 1 / 3, -1 / 6, 1 / 2],
                   [-1 / 3, -1 / 3, 1 / 3, 1 / 3, 0, 1 / 6],
                   [-1 / 3, 0, -1 / 6, 0, 1 / 6, -1 / 3],
                   [1 / 2, -1 / 6, 1 / 2, 1 / 6, -1 / 3, 3 / 4]])
    gen_exp = {
        "optima": {1: -2 / 3, 2: -2 / 3},
        "moment_matrices": {1: G1, 2: G2},
        "eigenvalues": {1: [0.0, 2 / 3, 7 / 6], 2: [17 / 12, 5 / 3]},
        "ranks": {2: (2, 2)},
        "optimizer": {"X": [np.array([[1 / 3, SQRT2 / 3], [SQRT2 / 3, 2 / 3]]),
                            np.array([[0, -SQRT2 / 2], [-SQRT2 / 2, 1]])],
                      "phi": np.array([1.0, 0.0])},
        "certificate": {"order": 1, "lam": -2 / 3,
                        "b": [(one * -1.0 + x1 * 3.0 + x2 * 2.0) * (1 / 3)],
                        "c": [[one * (2 / 3)]],
                        "f": [x1 * (1 / 6)], "g": [1.0]},
    }
    return [CorpusEntry("example", basic, basic_exp),
            CorpusEntry("example-commutative", comm, comm_exp),
            CorpusEntry("example-generalized", gen, gen_exp)]


__all__ = ["BellScenario", "FermionSpec", "CorpusEntry", "chsh_scenario", "bell_problem",
           "fermion_problem", "fermion_hamiltonian", "fermion_alphabet", "fermion_order",
           "hermitize_two_body", "commutative_problem", "binary_quadratic_problem",
           "example_problem", "builtin_corpus", "RelaxationError"]
