"""CHSH: quantum bound from the order-1 relaxation against the classical bound."""

import math

from ncpoly import assemble, bell_problem, chsh_scenario, solve

for classical, k in ((False, 1), (True, 1), (True, 2)):
    problem = bell_problem(chsh_scenario(), classical=classical)
    sol = solve(assemble(problem, k)[0])
    label = "commuting" if classical else "quantum"
    print(f"{label:9s} order {k}: {problem.user_value(sol.primal_obj):.8f}")
print(f"2 sqrt(2) = {2 * math.sqrt(2):.8f}")
