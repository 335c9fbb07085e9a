"""Central numerical tolerances shared by the solver stack."""

# primal feasibility (residuals on rows and bounds)
FEASIBILITY_TOL = 1e-8
# dual feasibility / reduced-cost threshold
OPTIMALITY_TOL = 1e-7
# distance from an integer at which a value counts as integral
INTEGRALITY_TOL = 1e-6
