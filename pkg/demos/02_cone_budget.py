#!/usr/bin/env python3
"""The cone budget: where does the inward energy inside a ball end up?

Take the backward cone region t >= t0, |x| + t <= t0 + r0.  The inward energy
on its base splits exactly three ways:

    E-(t0; 0, r0) = pi mu([t0, t0+r0])   (through the origin)
                  + Q--                  (out through the cone surface)
                  + M(Omega)             (converted to outward energy en route)

The ledger below reproduces that budget; the residual is the discretization
defect.
"""

import conewave as cw

data = cw.gaussian_data()
problem = cw.ProblemSpec(3.0)
grid = cw.causal_grid(data, t_end=6.0, backend="radial1d", n_r=2048)
trace, _ = cw.evolve(data, problem, cw.SolverConfig(t_end=6.0), grid)

for t0, r0 in ((0.0, 2.0), (0.0, 5.0), (2.0, 3.0)):
    region = cw.cone_region(t0, r0)
    ledger = cw.flux_balance(trace, region, which="inward")
    e_minus = cw.energies(trace.state_at(t0), 0.0, r0)[1]
    q = next(e.value for e in ledger.segments if "BackwardCone" in e.seg_type)
    print(f"\ncone t0={t0:g}, r0={r0:g}")
    print(f"  E-(t0; 0, r0)      = {e_minus:9.5f}")
    print(f"  pi mu              = {ledger.mu_term:9.5f}")
    print(f"  Q-- (cone flux)    = {q:9.5f}")
    print(f"  Morawetz integral  = {ledger.morawetz_term:9.5f}")
    print(f"  residual           = {ledger.residual:+.2e}  ({abs(ledger.residual) / e_minus:.2%} of E-)")
