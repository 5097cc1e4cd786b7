"""Walk through the worked example: relaxations, flatness, optimizer, certificate.

Run with ``python demos/worked_example.py``.
"""

import numpy as np

from ncpoly import (assemble, example_problem, extract_optimizer, extract_sos,
                    flatness_check, solve, verify_optimizer)

problem = example_problem("basic")
for k in (1, 2):
    sdp, _ = assemble(problem, k)
    sol = solve(sdp)
    M = sdp.blocks[0].value(sol.y)
    print(f"order {k}: p = {sol.primal_obj:.8f} ({sol.status}), "
          f"moment matrix {M.shape[0]}x{M.shape[0]}, eigenvalues {np.round(np.linalg.eigvalsh(M), 6)}")

rep = flatness_check(sol.y, 2, problem)
print(f"flat at order 2: {rep.flat} (ranks {rep.rank_k}, {rep.rank_k_minus_d})")

opt = extract_optimizer(sol.y, 2, problem, seed=0)
print(f"optimizer of dimension {opt.dim}, value {opt.objective_value:.8f}")
for name, X in zip(problem.alphabet.names, opt.X):
    print(f"  {name} =\n{np.array2string(X, precision=6, suppress_small=True)}")
print("  constraints hold:", verify_optimizer(opt, problem).passed)

sdp, _ = assemble(problem, 1)
cert = extract_sos(solve(sdp, gap_tol=1e-10, feas_tol=1e-10), problem, 1)
print(f"order-1 certificate: lambda = {cert.lam:.8f}, terms {cert.term_counts}, "
      f"residual {cert.residual_norm:.1e}")
for b in cert.b:
    print("  square of", b)
