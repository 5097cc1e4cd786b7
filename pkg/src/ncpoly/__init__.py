"""Moment relaxations for noncommutative polynomial optimisation."""

from .algebra import (Alphabet, Polynomial, RewriteError, RewriteSystem, commutative_rules,
                      fermionic_rules, group_commutation_rules, idempotent_rules,
                      monomial_basis, poly_adjoint, poly_mul, projector_group_rules)
from .certify import (CertifyError, FlatnessReport, Optimizer, SOSCertificate,
                      extract_optimizer, extract_sos, flatness_check, verify_optimizer,
                      verify_sos)
from .problems import (BellScenario, FermionSpec, bell_problem, binary_quadratic_problem,
                       builtin_corpus, chsh_scenario, commutative_problem, example_problem,
                       fermion_order, fermion_problem, hermitize_two_body)
from .relaxation import NCProblem, RelaxationError, SDPProblem, assemble
from .sdp import SDPSolution, SolverError, export_sdpa, parse_sdpa, solve

__version__ = "0.1.0"
