"""Liouville-space layer: superoperators on the truncated operator space.

A superoperator is stored as an N^2 x N^2 matrix acting on column-stacked
operators, so ``left_mult(A).mat == kron(I, A)`` and
``right_mult(B).mat == kron(B.T, I)``.  Right multiplications compose in
reverse order, ``right_mult(A) @ right_mult(B) == right_mult(B @ A)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Number
from typing import Callable, Sequence

import numpy as np

from .densecore import as_complex_matrix, expm, kron, unvec, vec
from .fockspace import FockSpace, Operator, SpaceMismatchError, interior_dim

__all__ = [
    "SuperOperator",
    "SymplecticConstants",
    "SYMPLECTIC",
    "LRSum",
    "identity_super",
    "zero_super",
    "left_mult",
    "right_mult",
    "q_super",
    "p_super",
    "v_super",
    "v_factors",
    "hs_inner",
    "superop_adjoint",
    "dual",
    "transpose_permutation",
    "apply",
    "commutator",
    "superop_from_action",
    "restrict",
    "interior_injection",
]


@dataclass(frozen=True)
class SymplecticConstants:
    """Psi^{km} (Poisson tensor) and its inverse omega_{km} for one mode."""

    Psi: np.ndarray
    omega_form: np.ndarray


SYMPLECTIC = SymplecticConstants(
    Psi=np.array([[0, 1], [-1, 0]]),
    omega_form=np.array([[0, -1], [1, 0]]),
)


class SuperOperator:
    """Linear map on operators, materialized as an N^2 x N^2 matrix."""

    __slots__ = ("space", "mat")
    __array_priority__ = 100

    def __init__(self, space: FockSpace, mat):
        mat = as_complex_matrix(mat, "superoperator")
        side = space.dim**2
        if mat.shape != (side, side):
            raise ValueError(f"superoperator shape {mat.shape} does not match ({side}, {side})")
        self.space = space
        self.mat = mat

    def _check(self, other):
        if not isinstance(other, SuperOperator):
            raise TypeError(f"expected SuperOperator, got {type(other).__name__}")
        if other.space != self.space:
            raise SpaceMismatchError("superoperators belong to different Fock spaces")

    def __add__(self, other):
        self._check(other)
        return SuperOperator(self.space, self.mat + other.mat)

    def __sub__(self, other):
        self._check(other)
        return SuperOperator(self.space, self.mat - other.mat)

    def __neg__(self):
        return SuperOperator(self.space, -self.mat)

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return SuperOperator(self.space, c * self.mat)

    __rmul__ = __mul__

    def __matmul__(self, other):
        """Composition: (S @ T)(A) = S(T(A))."""
        self._check(other)
        return SuperOperator(self.space, self.mat @ other.mat)

    def __call__(self, op: Operator) -> Operator:
        return apply(self, op)

    def dag(self) -> "SuperOperator":
        return superop_adjoint(self)

    def norm(self) -> float:
        return float(np.linalg.norm(self.mat))

    def __repr__(self):
        return f"SuperOperator(dim={self.space.dim})"


def identity_super(space: FockSpace) -> SuperOperator:
    return SuperOperator(space, np.eye(space.dim**2, dtype=np.complex128))


def zero_super(space: FockSpace) -> SuperOperator:
    return SuperOperator(space, np.zeros((space.dim**2,) * 2, dtype=np.complex128))


def left_mult(a: Operator) -> SuperOperator:
    """A^l : X -> A X."""
    return SuperOperator(a.space, kron(np.eye(a.space.dim), a.mat))


def right_mult(a: Operator) -> SuperOperator:
    """A^r : X -> X A."""
    return SuperOperator(a.space, kron(a.mat.T, np.eye(a.space.dim)))


def apply(s: SuperOperator, a: Operator) -> Operator:
    if s.space != a.space:
        raise SpaceMismatchError("superoperator and operator belong to different spaces")
    n = a.space.dim
    return Operator(a.space, unvec(s.mat @ vec(a.mat), n, n))


def hs_inner(a: Operator, b: Operator) -> complex:
    """Hilbert-Schmidt product <A|B> = Tr[A^+ B]."""
    if a.space != b.space:
        raise SpaceMismatchError("operators belong to different Fock spaces")
    return complex(np.vdot(a.mat, b.mat))


def superop_adjoint(s: SuperOperator) -> SuperOperator:
    """HS adjoint; column stacking is unitary, so it is the matrix adjoint."""
    return SuperOperator(s.space, s.mat.conj().T)


def transpose_permutation(n: int) -> np.ndarray:
    """Index map with vec(X.T) = vec(X)[perm]."""
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return (i * n + j).reshape(-1, order="F")


def dual(s: SuperOperator) -> SuperOperator:
    """Schrodinger-picture partner of a Heisenberg generator.

    Tr(dual(S)(rho) A) = Tr(rho S(A)) for all rho, A.
    """
    perm = transpose_permutation(s.space.dim)
    return SuperOperator(s.space, s.mat.T[np.ix_(perm, perm)])


def commutator(s: SuperOperator, t: SuperOperator) -> SuperOperator:
    return s @ t - t @ s


def superop_from_action(space: FockSpace, action: Callable[[np.ndarray], np.ndarray]) -> SuperOperator:
    """Materialize X -> action(X) column by column on matrix units.

    ``action`` receives and returns plain N x N arrays.  Independent of the
    Kronecker construction, hence useful as a cross-check.
    """
    n = space.dim
    cols = np.empty((n * n, n * n), dtype=np.complex128)
    unit = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        for i in range(n):
            unit[i, j] = 1.0
            cols[:, j * n + i] = vec(action(unit))
            unit[i, j] = 0.0
    return SuperOperator(space, cols)


def interior_injection(n: int, m: int) -> np.ndarray:
    """Indices of vec positions whose row and column both lie below ``m``."""
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    return (j * n + i).reshape(-1, order="F")


def restrict(s: SuperOperator, m: int | None = None, side: str = "both") -> np.ndarray:
    """Matrix of ``s`` on operands supported in the top-left m x m block.

    ``side='input'`` keeps the full output; ``side='both'`` also projects the
    output onto the block.
    """
    n = s.space.dim
    m = interior_dim(n) if m is None else m
    idx = interior_injection(n, m)
    if side == "input":
        return s.mat[:, idx]
    if side == "both":
        return s.mat[np.ix_(idx, idx)]
    raise ValueError(f"side must be 'input' or 'both', got {side!r}")


# --- sums of left/right products ------------------------------------------------

class LRSum:
    """Superoperator kept as sum_i c_i A_i^l B_i^r, i.e. X -> sum c_i A_i X B_i.

    Products of left/right multiplications stay in this form without ever
    forming N^2 x N^2 matrices: (A1^l B1^r)(A2^l B2^r) = (A1 A2)^l (B2 B1)^r.
    """

    __slots__ = ("space", "pairs")

    def __init__(self, space: FockSpace, pairs: Sequence[tuple[complex, np.ndarray, np.ndarray]] = ()):
        self.space = space
        self.pairs = list(pairs)

    @classmethod
    def identity(cls, space: FockSpace) -> "LRSum":
        eye = np.eye(space.dim, dtype=np.complex128)
        return cls(space, [(1.0, eye, eye)])

    @classmethod
    def left(cls, a: np.ndarray, space: FockSpace, c: complex = 1.0) -> "LRSum":
        return cls(space, [(c, a, np.eye(space.dim, dtype=np.complex128))])

    @classmethod
    def right(cls, b: np.ndarray, space: FockSpace, c: complex = 1.0) -> "LRSum":
        return cls(space, [(c, np.eye(space.dim, dtype=np.complex128), b)])

    def __add__(self, other: "LRSum") -> "LRSum":
        return LRSum(self.space, self.pairs + other.pairs)

    def __mul__(self, c) -> "LRSum":
        return LRSum(self.space, [(c * k, a, b) for k, a, b in self.pairs])

    __rmul__ = __mul__

    def __matmul__(self, other: "LRSum") -> "LRSum":
        out = []
        for c1, a1, b1 in self.pairs:
            for c2, a2, b2 in other.pairs:
                out.append((c1 * c2, a1 @ a2, b2 @ b1))
        return LRSum(self.space, out).compact()

    def compact(self) -> "LRSum":
        """Merge pairs sharing the same right factor."""
        groups: dict[bytes, list] = {}
        for c, a, b in self.pairs:
            key = b.tobytes()
            if key in groups:
                groups[key][0] = groups[key][0] + c * a
            else:
                groups[key] = [c * a, b]
        return LRSum(self.space, [(1.0, a, b) for a, b in groups.values()])

    def act(self, x: np.ndarray) -> np.ndarray:
        return sum((c * (a @ x @ b) for c, a, b in self.pairs), np.zeros_like(x, dtype=np.complex128))

    def restricted(self, m: int) -> np.ndarray:
        """Same as ``restrict(self.materialize(), m, 'both')`` without the full matrix."""
        out = np.zeros((m * m, m * m), dtype=np.complex128)
        for c, a, b in self.pairs:
            out += c * np.kron(b[:m, :m].T, a[:m, :m])
        return out

    def materialize(self) -> SuperOperator:
        n = self.space.dim
        out = np.zeros((n * n, n * n), dtype=np.complex128)
        for c, a, b in self.pairs:
            out += c * np.kron(b.T, a)
        return SuperOperator(self.space, out)


def _q_lr(space: FockSpace, k: int) -> LRSum:
    x = space.x(k).mat
    return LRSum.left(x, space, 0.5) + LRSum.right(x, space, 0.5)


def _p_lr(space: FockSpace, k: int) -> LRSum:
    # P^k = -(1/hbar) omega_{km} (x^m_l - x^m_r)
    if k not in (1, 2):
        raise ValueError(f"index must be 1 or 2, got {k}")
    out = LRSum(space)
    for m in (1, 2):
        w = SYMPLECTIC.omega_form[k - 1, m - 1]
        if w:
            x = space.x(m).mat
            c = -w / space.hbar
            out = out + LRSum.left(x, space, c) + LRSum.right(x, space, -c)
    return out


def q_super(space: FockSpace, k: int) -> SuperOperator:
    """Q^k = (x^k_l + x^k_r) / 2, i.e. Jordan multiplication by x^k."""
    if k not in (1, 2):
        raise ValueError(f"index must be 1 or 2, got {k}")
    return _q_lr(space, k).materialize()


def p_super(space: FockSpace, k: int) -> SuperOperator:
    """P^k = -(1/hbar) omega_{km} (x^m_l - x^m_r); P^1 = [p, .]/hbar, P^2 = -[q, .]/hbar."""
    return _p_lr(space, k).materialize()


def _lin(space: FockSpace, a) -> np.ndarray:
    return a[0] * space.qmat + a[1] * space.pmat


def v_super(space: FockSpace, a, b, method: str = "factorized") -> SuperOperator:
    """V(a, b) = exp(i (a.Q + b.P)).

    Since left and right multiplications commute, i(a.Q + b.P) splits as
    i(u.x)^l + i(v.x)^r with u = a/2 + c, v = a/2 - c, c_m = -b_k omega_{km}/hbar,
    and V = W(u)^l W(v)^r exactly.  ``method='expm'`` exponentiates the
    N^2 x N^2 generator directly instead.
    """
    a = np.asarray(a, dtype=float).reshape(2)
    b = np.asarray(b, dtype=float).reshape(2)
    if method == "expm":
        gen = sum((a[k] * _q_lr(space, k + 1) + b[k] * _p_lr(space, k + 1) for k in range(2)),
                  LRSum(space)).materialize()
        return SuperOperator(space, expm(1j * gen.mat))
    if method != "factorized":
        raise ValueError(f"unknown method {method!r}")
    return v_factors(space, a, b).materialize()


def v_factors(space: FockSpace, a, b) -> LRSum:
    """V(a, b) as the single left/right pair W(u)^l W(v)^r (see :func:`v_super`)."""
    a = np.asarray(a, dtype=float).reshape(2)
    b = np.asarray(b, dtype=float).reshape(2)
    c = -(b @ SYMPLECTIC.omega_form) / space.hbar
    u = 0.5 * a + c
    v = 0.5 * a - c
    return LRSum(space, [(1.0, expm(1j * _lin(space, u)), expm(1j * _lin(space, v)))])
