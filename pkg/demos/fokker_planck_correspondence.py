"""Quantum Fokker-Planck master equation against its classical grid twin.

The constant term h is fixed by demanding trace preservation on the
well-resolved Fock levels.  It comes out as c_qq + c_pp, which also makes the
classical flow conserve mass.  A Gaussian density evolved on a phase-space
grid then reproduces the quantum means and covariances.
"""
import numpy as np

from dynaquant import GridSymbol, PhaseGrid, build_space, coherent_state, evolve_classical, quantize_qp
from dynaquant.simcli.engine import evolve_quantum
from dynaquant.simcli.fokker_planck import FPCoefficients, trace_preservation_scan

coeffs = FPCoefficients()
space = build_space(40)
scan = trace_preservation_scan(space, coeffs)
print("\n".join(scan.report_lines()))

L = coeffs.dynop(scan.h_star)
quantum = evolve_quantum(quantize_qp(space, L), coherent_state(space, 1.0), dt=0.01, steps=200, stride=50)

grid = PhaseGrid.square(6.0, 121)
cov0 = [[quantum.var_qq[0], quantum.cov_qp[0]], [quantum.cov_qp[0], quantum.var_pp[0]]]
f0 = GridSymbol.gaussian(grid, [quantum.mean_q[0], quantum.mean_p[0]], cov0)
classical = evolve_classical(L, f0, dt=0.005, steps=400, stride=100)

print("\n   t   <q> quantum  <q> grid     var_q quantum  var_q grid   trace")
for k, t in enumerate(quantum.times):
    mom = classical.moments[k]
    print(f"{t:4.1f}  {quantum.mean_q[k]: .7f}  {mom.mean_q: .7f}   {quantum.var_qq[k]:.7f}     "
          f"{mom.cov_qq:.7f}   {quantum.trace_re[k]:.12f}")
dm = np.abs(quantum.mean_q - classical.column("mean_q")).max()
print(f"\nlargest mean deviation: {dm:.1e}")
