"""Recover a classical dynamical operator from its quantized superoperator.

A superoperator is projected onto the quantized QP monomials of degree at
most three.  An anharmonic generator with friction and diffusion comes back
with its original coefficients.  The same works for a generator assembled
directly from commutators and anticommutators of q and p, which reveals the
classical flow it quantizes.
"""
import numpy as np

from dynaquant import DynOperator, build_space, dequantize, quantize_qp
from dynaquant.superspace import superop_from_action

space = build_space(16)
L = DynOperator([(1.0, 0, 1, 1, 0), (-1.0, 1, 0, 0, 1), (-0.2, 2, 0, 0, 1), (0.05, 0, 0, 0, 2)])
back = dequantize(space, quantize_qp(space, L), max_degree=3)
print("original   ", dict(sorted(L.terms.items())))
print("recovered  ", {k: round(float(np.real(v)), 12) for k, v in sorted(back.terms.items())})

# generalized Heisenberg equation with friction, written in operator form
q, p, g = space.qmat, space.pmat, 0.3
H = 0.5 * (p @ p) + 0.5 * (q @ q)
direct = superop_from_action(
    space, lambda x: 1j * (H @ x - x @ H) + 0.5j * g * (p @ q @ x - p @ x @ q + q @ x @ p - x @ q @ p))
print("\noperator-form generator read back as a phase-space operator:")
for key, c in sorted(dequantize(space, direct, max_degree=3).terms.items()):
    print(f"  {np.real(c):+.6f}  q^{key[0]} p^{key[1]} dq^{key[2]} dp^{key[3]}")
print(f"friction coefficient expected on p dp: {-g:+.6f}")
