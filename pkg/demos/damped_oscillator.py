"""Damped harmonic oscillator, classically and as a quantized generator.

The classical observable flow dA/dt = (p/m) dA/dq - (m w^2 q + g p/m) dA/dp is
quantized in QP form.  Its Hamiltonian part becomes (i/hbar)[H, .] and the
friction term becomes a non-Hamiltonian piece.  Quantum means track the
classical ODE to machine precision.  The partner state's purity drifts above
one, which shows that the generator is not completely positive.
"""
import numpy as np

from dynaquant import build_space, coherent_state, damped_oscillator_dynop, quantize_qp
from dynaquant.fockspace import Operator
from dynaquant.simcli.engine import evolve_heisenberg
from dynaquant.simcli.scenarios import damped_oscillator_ode

m, w, g = 1.0, 1.0, 0.1
space = build_space(40, mass=m, omega=w)
L = damped_oscillator_dynop(m, w, g)
print("classical generator terms (coeff, q^a p^b dq^c dp^d):")
for key, c in sorted(L.terms.items()):
    print(f"  {c:+.3f}  {key}")

S = quantize_qp(space, L)
rho0 = coherent_state(space, 1.0)
obs = {"q": Operator(space, space.qmat), "p": Operator(space, space.pmat)}
run = evolve_heisenberg(S, obs, rho0, dt=0.01, steps=500, stride=100, track_state=True)

ode = damped_oscillator_ode(m, w, g, (run["q"][0].real, run["p"][0].real), run.times)
print("\n   t     <q> quantum     <q> ODE        purity")
for t, q, qc, pur in zip(run.times, run["q"].real, ode[:, 0], run.purity):
    print(f"{t:5.1f}  {q: .12f}  {qc: .12f}  {pur:.6f}")
err = np.abs(np.column_stack([run["q"].real, run["p"].real]) - ode).max()
print(f"\nlargest deviation from the ODE: {err:.2e}")
