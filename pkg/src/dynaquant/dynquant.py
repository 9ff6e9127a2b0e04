"""Quantization of classical dynamical operators into superoperators.

A classical dynamical operator is a polynomial in (q, p, d_q, d_p).  The basis
operators Q^k (multiplication by x^k) and P^k = -i d_k are sent to the
superoperators Q^k and P^k of :mod:`dynaquant.superspace`, so a derivative
d_k becomes i P^k.

Two orderings are supported:

* ``QP`` form: multiplication factors stand left of derivative factors and
  Q-factors are ordered Q^1 before Q^2, i.e. each term maps to
  ``(Q1)^a (Q2)^b (iP1)^c (iP2)^d``.
* ``SYMMETRIC`` form: each term maps to the average over all distinct
  orderings of its Q and iP factors.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache
from numbers import Number

import numpy as np

from .densecore import RankDeficientError, lstsq
from .fockspace import MAX_SYMMETRIZE_DEGREE, FockSpace, PolynomialSymbol, weyl_quantize_poly
from .superspace import LRSum, SuperOperator, _p_lr, _q_lr

__all__ = [
    "DynOperator",
    "QP",
    "SYMMETRIC",
    "QP_FACTOR_ORDER",
    "quantize_qp",
    "quantize_qp_lr",
    "quantize_symmetric",
    "hamiltonian_generator",
    "poisson_generator",
    "multiplication_dynop",
    "qp_monomials",
    "dequantize",
    "dequantize_coefficients",
    "damped_oscillator_dynop",
    "fokker_planck_dynop",
]

QP = "QP"
SYMMETRIC = "SYMMETRIC"
QP_FACTOR_ORDER = "Q1^a Q2^b (iP1)^c (iP2)^d"


class DynOperator:
    """sum coeff * q^a p^b d_q^c d_p^d with an ordering tag.

    ``terms`` maps ``(a, b, c, d)`` to the coefficient; duplicates are merged
    and zeros dropped on construction.
    """

    __slots__ = ("terms", "form")

    def __init__(self, terms=(), form: str = QP):
        if form not in (QP, SYMMETRIC):
            raise ValueError(f"form must be {QP!r} or {SYMMETRIC!r}, got {form!r}")
        acc: dict[tuple[int, int, int, int], complex] = {}
        items = terms.items() if isinstance(terms, dict) else ((tuple(t[1:]), t[0]) for t in terms)
        for key, c in items:
            if len(key) != 4 or any(int(k) != k or k < 0 for k in key):
                raise ValueError(f"term powers must be four non-negative integers, got {key}")
            key = tuple(int(k) for k in key)
            acc[key] = acc.get(key, 0) + c
        self.terms = {k: v for k, v in sorted(acc.items()) if v != 0}
        self.form = form

    def __add__(self, other: "DynOperator") -> "DynOperator":
        if other.form != self.form:
            raise ValueError("cannot add dynamical operators of different forms")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return DynOperator(out, self.form)

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return DynOperator({k: c * v for k, v in self.terms.items()}, self.form)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, DynOperator) and self.form == other.form and self.terms == other.terms

    def __repr__(self):
        body = " + ".join(f"({c:g})q^{a}p^{b}dq^{cq}dp^{dp}" for (a, b, cq, dp), c in self.terms.items())
        return f"DynOperator[{self.form}]({body or '0'})"

    def with_form(self, form: str) -> "DynOperator":
        """Same coefficients read in a different ordering."""
        return DynOperator(self.terms, form)

    def coefficient(self, a: int, b: int, c: int, d: int) -> complex:
        return self.terms.get((a, b, c, d), 0)

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def max_abs_difference(self, other: "DynOperator") -> float:
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.terms.get(k, 0) - other.terms.get(k, 0)) for k in keys), default=0.0)


def _factors(space: FockSpace) -> list[LRSum]:
    # order matches the (a, b, c, d) term key: Q1, Q2, iP1, iP2
    return [_q_lr(space, 1), _q_lr(space, 2), 1j * _p_lr(space, 1), 1j * _p_lr(space, 2)]


def _power(f: LRSum, k: int, space: FockSpace) -> LRSum:
    out = LRSum.identity(space)
    for _ in range(k):
        out = out @ f
    return out


def quantize_qp_lr(space: FockSpace, L: DynOperator) -> LRSum:
    """QP-form quantization kept as a sum of left/right products."""
    if L.form != QP:
        raise ValueError(f"quantize_qp needs a QP-form operator, got {L.form}")
    facs = _factors(space)
    total = LRSum(space)
    for key, coeff in L.terms.items():
        term = LRSum.identity(space)
        for f, k in zip(facs, key):
            if k:
                term = term @ _power(f, k, space)
        total = total + coeff * term
    return total.compact()


def quantize_qp(space: FockSpace, L: DynOperator) -> SuperOperator:
    """coeff q^a p^b d_q^c d_p^d  ->  coeff (Q1)^a (Q2)^b (iP1)^c (iP2)^d."""
    return quantize_qp_lr(space, L).materialize()


def _symmetrized(facs: list[LRSum], counts: tuple[int, ...], space: FockSpace) -> LRSum:
    """Average of the factor product over all distinct orderings of the multiset.

    Uses sum_{words} = sum_k F_k (sum over words of the remaining multiset),
    memoized on the remaining counts.
    """
    memo: dict[tuple[int, ...], LRSum] = {}

    def total(cnt):
        if sum(cnt) == 0:
            return LRSum.identity(space)
        if cnt in memo:
            return memo[cnt]
        acc = LRSum(space)
        for k, c in enumerate(cnt):
            if c:
                rest = cnt[:k] + (c - 1,) + cnt[k + 1:]
                acc = acc + facs[k] @ total(rest)
        memo[cnt] = acc.compact()
        return memo[cnt]

    words = math.factorial(sum(counts))
    for c in counts:
        words //= math.factorial(c)
    return (1.0 / words) * total(tuple(counts))


def quantize_symmetric(space: FockSpace, L: DynOperator) -> SuperOperator:
    """Symmetric-form quantization: each term becomes the fully symmetrized
    product of its Q and iP superoperator factors."""
    if L.form != SYMMETRIC:
        raise ValueError(f"quantize_symmetric needs a SYMMETRIC-form operator, got {L.form}")
    facs = _factors(space)
    total = LRSum(space)
    for key, coeff in L.terms.items():
        if sum(key) > MAX_SYMMETRIZE_DEGREE:
            raise ValueError(f"term degree {sum(key)} exceeds symmetrization guard {MAX_SYMMETRIZE_DEGREE}")
        total = total + coeff * _symmetrized(facs, key, space)
    return total.compact().materialize()


def multiplication_dynop(sym: PolynomialSymbol, form: str = QP) -> DynOperator:
    """Dynamical operator 'multiply by A(q, p)'."""
    return DynOperator({(a, b, 0, 0): c for (a, b), c in sym.terms.items()}, form)


def hamiltonian_generator(space: FockSpace, H: PolynomialSymbol) -> SuperOperator:
    """(i/hbar)(H^l - H^r): A -> (i/hbar)[H, A] with H Weyl-quantized."""
    if not H.is_real():
        raise ValueError("Hamiltonian symbol must have real coefficients")
    h = weyl_quantize_poly(space, H).mat
    n = space.dim
    eye = np.eye(n)
    mat = (1j / space.hbar) * (np.kron(eye, h) - np.kron(h.T, eye))
    return SuperOperator(space, mat)


def poisson_generator(H: PolynomialSymbol) -> DynOperator:
    """L = {. , H} = (dH/dp) d_q - (dH/dq) d_p in QP form."""
    terms = {}
    for (a, b), c in H.diff("p").terms.items():
        terms[(a, b, 1, 0)] = terms.get((a, b, 1, 0), 0) + c
    for (a, b), c in H.diff("q").terms.items():
        terms[(a, b, 0, 1)] = terms.get((a, b, 0, 1), 0) - c
    return DynOperator(terms, QP)


def damped_oscillator_dynop(m: float, omega: float, gamma: float) -> DynOperator:
    """(1/m) p d_q - (m omega^2 q + (gamma/m) p) d_p."""
    if not (m > 0 and omega > 0 and gamma >= 0):
        raise ValueError("need m > 0, omega > 0, gamma >= 0")
    return DynOperator([
        (1.0 / m, 0, 1, 1, 0),
        (-m * omega**2, 1, 0, 0, 1),
        (-gamma / m, 0, 1, 0, 1),
    ])


def fokker_planck_dynop(c_qq: float, c_qp: float, c_pq: float, c_pp: float,
                        d_qq: float, d_qp: float, d_pp: float, h: float) -> DynOperator:
    """Second-order Liouville operator

    d_qq d_q^2 + 2 d_qp d_q d_p + d_pp d_p^2
      + c_qq q d_q + c_qp q d_p + c_pq p d_q + c_pp p d_p + h.
    """
    return DynOperator([
        (d_qq, 0, 0, 2, 0),
        (2 * d_qp, 0, 0, 1, 1),
        (d_pp, 0, 0, 0, 2),
        (c_qq, 1, 0, 1, 0),
        (c_qp, 1, 0, 0, 1),
        (c_pq, 0, 1, 1, 0),
        (c_pp, 0, 1, 0, 1),
        (h, 0, 0, 0, 0),
    ])


# --- dequantization -----------------------------------------------------------

MAX_DEQUANTIZE_DEGREE = 4
_DIRECT_LIMIT = 3e7  # complex entries in the dense design matrix


def qp_monomials(max_degree: int) -> list[tuple[int, int, int, int]]:
    """All (a, b, c, d) with a + b + c + d <= max_degree, graded then lexicographic."""
    out = []
    for total in range(max_degree + 1):
        for key in itertools.product(range(total + 1), repeat=4):
            if sum(key) == total:
                out.append(key)
    return out


@lru_cache(maxsize=8)
def _basis(space: FockSpace, max_degree: int) -> tuple[list, list[LRSum]]:
    keys = qp_monomials(max_degree)
    return keys, [quantize_qp_lr(space, DynOperator({k: 1.0})) for k in keys]


def _lr_inner(x: LRSum, y: LRSum) -> complex:
    # <kron(B1^T, A1), kron(B2^T, A2)>_HS = Tr(B1^* B2^T...) factorizes per pair
    total = 0j
    for c1, a1, b1 in x.pairs:
        for c2, a2, b2 in y.pairs:
            total += np.conj(c1) * c2 * np.vdot(a1, a2) * np.vdot(b1, b2)
    return total


def _lr_inner_dense(x: LRSum, s: np.ndarray) -> complex:
    n = x.space.dim
    s4 = s.reshape(n, n, n, n, order="F")  # s4[i, j, k, l]: row i + n j, col k + n l
    total = 0j
    for c, a, b in x.pairs:
        total += np.conj(c) * np.einsum("ik,lj,ijkl->", a.conj(), b.conj(), s4, optimize=True)
    return total


def dequantize_coefficients(space: FockSpace, S: SuperOperator, max_degree: int = 3):
    """Least-squares coefficients of ``S`` in the quantized QP monomial basis.

    Returns ``(keys, coeffs, residual)`` where ``residual`` is the HS norm of
    ``S`` minus its projection.
    """
    if not 0 <= max_degree <= MAX_DEQUANTIZE_DEGREE:
        raise ValueError(f"max_degree must be in 0..{MAX_DEQUANTIZE_DEGREE}")
    if S.space != space:
        raise ValueError("superoperator belongs to a different space")
    keys, basis = _basis(space, max_degree)
    n2 = space.dim**2
    if n2 * n2 < len(keys):
        design = np.column_stack([b.materialize().mat.reshape(-1) for b in basis])
        raise RankDeficientError(int(np.linalg.matrix_rank(design)), len(keys))
    if n2 * n2 * len(keys) <= _DIRECT_LIMIT:
        design = np.column_stack([b.materialize().mat.reshape(-1) for b in basis])
        target = S.mat.reshape(-1)
        coeffs = lstsq(design, target)
        residual = float(np.linalg.norm(design @ coeffs - target))
    else:
        # normal equations assembled without forming N^4-sized columns
        gram = np.array([[_lr_inner(bi, bj) for bj in basis] for bi in basis])
        rhs = np.array([_lr_inner_dense(bi, S.mat) for bi in basis])
        coeffs = lstsq(gram, rhs)
        proj = sum((c * b for c, b in zip(coeffs, basis)), LRSum(space)).materialize()
        residual = float(np.linalg.norm(proj.mat - S.mat))
    return keys, coeffs, residual


def dequantize(space: FockSpace, S: SuperOperator, max_degree: int = 3,
               cutoff: float = 1e-10) -> DynOperator:
    """Recover a QP-form dynamical operator whose quantization best matches ``S``.

    Coefficients with magnitude below ``cutoff`` are dropped; real parts are
    kept alone when the imaginary part is below ``cutoff``.
    """
    keys, coeffs, _ = dequantize_coefficients(space, S, max_degree)
    terms = {}
    for k, c in zip(keys, coeffs):
        if abs(c) < cutoff:
            continue
        terms[k] = c.real if abs(c.imag) < cutoff else complex(c)
    return DynOperator(terms, QP)
