"""Ground-state energies of random two-body fermionic Hamiltonians.

The relaxation of order N (the particle number) is compared with exact
diagonalization on Fock space.
"""

import numpy as np

from ncpoly import (FermionSpec, assemble, fermion_order, fermion_problem,
                    hermitize_two_body, solve)

rng = np.random.default_rng(1)
for m in (2, 3):
    for n in range(m + 1):
        spec = FermionSpec(m, n, h=hermitize_two_body(rng.normal(size=(m,) * 4)))
        k = fermion_order(spec)
        sol = solve(assemble(fermion_problem(spec), k)[0])
        print(f"M={m} N={n} order {k}: energy {sol.primal_obj:+.8f} ({sol.status})")
