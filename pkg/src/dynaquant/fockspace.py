"""Truncated Fock-space realization of the canonical operators.

A :class:`FockSpace` holds position and momentum matrices built from the
ladder operators of a reference oscillator with mass ``m`` and frequency
``omega``.  Truncation at ``N`` levels leaves ``[q, p] = i hbar`` exact except
in the last diagonal entry; truncation-sensitive identities are therefore
checked on an interior block of low Fock levels (see :func:`interior_dim`).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from numbers import Number

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .classical import GridSymbol, PhaseGrid
from .densecore import as_complex_matrix, expm

__all__ = [
    "SpaceMismatchError",
    "FockSpace",
    "Operator",
    "PolynomialSymbol",
    "build_space",
    "lowering",
    "interior_dim",
    "weyl_interior_dim",
    "interior_projector",
    "weyl_operator",
    "weyl_quantize_poly",
    "symmetrize_bruteforce",
    "weyl_symbol",
    "characteristic_function",
    "truncation_radius",
    "symbol_interior_mask",
    "jordan",
    "lie",
    "coherent_state",
    "fock_state",
    "MAX_SYMMETRIZE_DEGREE",
]

MAX_SYMMETRIZE_DEGREE = 8


class SpaceMismatchError(ValueError):
    """Operands live on different truncated spaces."""


@dataclass(frozen=True)
class FockSpace:
    """Truncated single-mode Fock space with canonical pair (q, p)."""

    dim: int
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0
    qmat: np.ndarray = field(default=None, repr=False, compare=False)
    pmat: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def qop(self) -> "Operator":
        return Operator(self, self.qmat)

    @property
    def pop(self) -> "Operator":
        return Operator(self, self.pmat)

    @property
    def identity(self) -> "Operator":
        return Operator(self, np.eye(self.dim, dtype=np.complex128))

    def x(self, k: int) -> "Operator":
        """Canonical operator x^k with x^1 = q, x^2 = p."""
        if k == 1:
            return self.qop
        if k == 2:
            return self.pop
        raise ValueError(f"canonical index must be 1 or 2, got {k}")

    @property
    def q_scale(self) -> float:
        """Oscillator length sqrt(hbar / (m omega))."""
        return math.sqrt(self.hbar / (self.mass * self.omega))

    @property
    def p_scale(self) -> float:
        return math.sqrt(self.hbar * self.mass * self.omega)

    def operator(self, mat) -> "Operator":
        return Operator(self, mat)


class Operator:
    """An N x N matrix tied to a :class:`FockSpace`."""

    __slots__ = ("space", "mat")
    __array_priority__ = 100

    def __init__(self, space: FockSpace, mat):
        mat = as_complex_matrix(mat, "operator")
        if mat.shape != (space.dim, space.dim):
            raise ValueError(f"operator shape {mat.shape} does not match space dim {space.dim}")
        self.space = space
        self.mat = mat

    def _check(self, other: "Operator") -> None:
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.space != self.space:
            raise SpaceMismatchError("operators belong to different Fock spaces")

    def __add__(self, other):
        self._check(other)
        return Operator(self.space, self.mat + other.mat)

    def __sub__(self, other):
        self._check(other)
        return Operator(self.space, self.mat - other.mat)

    def __neg__(self):
        return Operator(self.space, -self.mat)

    def __mul__(self, c):
        if not isinstance(c, Number):
            return NotImplemented
        return Operator(self.space, c * self.mat)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return Operator(self.space, self.mat / c)

    def __matmul__(self, other):
        self._check(other)
        return Operator(self.space, self.mat @ other.mat)

    def dag(self) -> "Operator":
        return Operator(self.space, self.mat.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def expect(self, rho: "Operator") -> complex:
        """Tr[rho @ self]."""
        self._check(rho)
        return complex(np.sum(rho.mat.T * self.mat))

    def interior(self, m: int | None = None) -> np.ndarray:
        """Top-left m x m block (default: :func:`interior_dim`)."""
        m = interior_dim(self.space.dim) if m is None else m
        return self.mat[:m, :m]

    def __repr__(self):
        return f"Operator(dim={self.space.dim})"


def lowering(n: int) -> np.ndarray:
    """Truncated annihilation matrix with a[k-1, k] = sqrt(k)."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(np.complex128)


def build_space(n: int, hbar: float = 1.0, mass: float = 1.0, omega: float = 1.0) -> FockSpace:
    """Build the truncated space with q = s_q (a + a^+), p = i s_p (a^+ - a)."""
    if int(n) != n or n < 2:
        raise ValueError(f"truncation N must be an integer >= 2, got {n}")
    for name, val in (("hbar", hbar), ("mass", mass), ("omega", omega)):
        if not (val > 0 and math.isfinite(val)):
            raise ValueError(f"{name} must be positive and finite, got {val}")
    n = int(n)
    a = lowering(n)
    ad = a.conj().T
    q = math.sqrt(hbar / (2 * mass * omega)) * (a + ad)
    p = 1j * math.sqrt(hbar * mass * omega / 2) * (ad - a)
    # exact Hermitian symmetry, not just up to rounding
    q = 0.5 * (q + q.conj().T)
    p = 0.5 * (p + p.conj().T)
    return FockSpace(n, float(hbar), float(mass), float(omega), q, p)


def interior_dim(n: int) -> int:
    """Size of the block on which [q, p] = i hbar holds exactly."""
    return max(n - 2, 1)


def weyl_interior_dim(n: int) -> int:
    """Block size used for identities involving exponentials of q and p.

    Powers of the tridiagonal q and p carry the boundary defect down the
    ladder, so exponentials need a wider margin than polynomial identities.
    """
    return max((3 * n) // 4, 1)


def interior_projector(space: FockSpace, m: int | None = None) -> Operator:
    m = interior_dim(space.dim) if m is None else m
    d = np.zeros(space.dim)
    d[:m] = 1.0
    return Operator(space, np.diag(d))


def _same_space(a: Operator, b: Operator) -> None:
    if a.space != b.space:
        raise SpaceMismatchError("operators belong to different Fock spaces")


# --- Weyl operators and ordering -------------------------------------------

def weyl_operator(space: FockSpace, a) -> Operator:
    """W(a) = exp(i (a_1 q + a_2 p))."""
    a1, a2 = (float(v) for v in np.asarray(a, dtype=float).reshape(2))
    return Operator(space, expm(1j * (a1 * space.qmat + a2 * space.pmat)))


class PolynomialSymbol:
    """Phase-space polynomial sum_k c_k q^a_k p^b_k.

    Terms are kept in a dict keyed by ``(qexp, pexp)``; zero coefficients are
    dropped on construction.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        acc: dict[tuple[int, int], complex] = {}
        items = terms.items() if isinstance(terms, dict) else (((a, b), c) for c, a, b in terms)
        for (a, b), c in items:
            if int(a) != a or int(b) != b or a < 0 or b < 0:
                raise ValueError(f"exponents must be non-negative integers, got ({a}, {b})")
            key = (int(a), int(b))
            acc[key] = acc.get(key, 0) + complex(c)
        self.terms = {k: v for k, v in sorted(acc.items()) if v != 0}

    @classmethod
    def constant(cls, c) -> "PolynomialSymbol":
        return cls([(c, 0, 0)])

    @classmethod
    def monomial(cls, qexp: int, pexp: int, coeff=1.0) -> "PolynomialSymbol":
        return cls([(coeff, qexp, pexp)])

    @classmethod
    def harmonic(cls, mass: float = 1.0, omega: float = 1.0) -> "PolynomialSymbol":
        """H = p^2 / 2m + m omega^2 q^2 / 2."""
        return cls([(0.5 / mass, 0, 2), (0.5 * mass * omega**2, 2, 0)])

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return PolynomialSymbol(out)

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, c):
        if isinstance(c, PolynomialSymbol):
            out: dict[tuple[int, int], complex] = {}
            for (a1, b1), c1 in self.terms.items():
                for (a2, b2), c2 in c.terms.items():
                    k = (a1 + a2, b1 + b2)
                    out[k] = out.get(k, 0) + c1 * c2
            return PolynomialSymbol(out)
        if not isinstance(c, Number):
            return NotImplemented
        return PolynomialSymbol({k: c * v for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, PolynomialSymbol) and self.terms == other.terms

    def __repr__(self):
        body = " + ".join(f"({c:g})q^{a}p^{b}" for (a, b), c in self.terms.items()) or "0"
        return f"PolynomialSymbol({body})"

    @property
    def degree(self) -> int:
        return max((a + b for a, b in self.terms), default=0)

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def diff(self, var: str) -> "PolynomialSymbol":
        """Exact partial derivative with respect to ``'q'`` or ``'p'``."""
        out = {}
        for (a, b), c in self.terms.items():
            if var == "q" and a > 0:
                out[(a - 1, b)] = c * a
            elif var == "p" and b > 0:
                out[(a, b - 1)] = c * b
            elif var not in ("q", "p"):
                raise ValueError(f"unknown variable {var!r}")
        return PolynomialSymbol(out)

    def __call__(self, q, p):
        q = np.asarray(q)
        p = np.asarray(p)
        total = np.zeros(np.broadcast(q, p).shape, dtype=np.complex128)
        for (a, b), c in self.terms.items():
            total = total + c * q**a * p**b
        return total


def _weyl_monomials(space: FockSpace, degree: int) -> list[np.ndarray]:
    """Weyl-ordered products Sym(q^a p^(n-a)) for a = 0..n, n = degree.

    Expands (s q + p)^n by repeated left multiplication, tracking the
    coefficient matrix of each power of s; the s^a coefficient is the sum of
    all C(n, a) distinct orderings.
    """
    q, p = space.qmat, space.pmat
    coeffs = [np.eye(space.dim, dtype=np.complex128)]
    for _ in range(degree):
        nxt = [p @ coeffs[0]]
        for j in range(1, len(coeffs)):
            nxt.append(q @ coeffs[j - 1] + p @ coeffs[j])
        nxt.append(q @ coeffs[-1])
        coeffs = nxt
    return [coeffs[a] / math.comb(degree, a) for a in range(degree + 1)]


def weyl_quantize_poly(space: FockSpace, sym: PolynomialSymbol) -> Operator:
    """Weyl (fully symmetric) quantization of a polynomial symbol."""
    out = np.zeros((space.dim, space.dim), dtype=np.complex128)
    cache: dict[int, list[np.ndarray]] = {}
    for (a, b), c in sym.terms.items():
        n = a + b
        if n not in cache:
            cache[n] = _weyl_monomials(space, n)
        out += c * cache[n][a]
    return Operator(space, out)


def _distinct_permutations(counts: dict) -> "itertools.Iterator[tuple]":
    items = sorted(counts)
    total = sum(counts.values())

    def rec(prefix, remaining):
        if len(prefix) == total:
            yield tuple(prefix)
            return
        for it in items:
            if remaining[it]:
                remaining[it] -= 1
                prefix.append(it)
                yield from rec(prefix, remaining)
                prefix.pop()
                remaining[it] += 1

    yield from rec([], dict(counts))


def symmetrize_bruteforce(space: FockSpace, qexp: int, pexp: int) -> Operator:
    """Average of the operator product over every distinct ordering of the
    multiset {q x qexp, p x pexp}.  Reference implementation for Weyl ordering.
    """
    if qexp + pexp > MAX_SYMMETRIZE_DEGREE:
        raise ValueError(f"degree {qexp + pexp} exceeds symmetrization guard {MAX_SYMMETRIZE_DEGREE}")
    mats = {"q": space.qmat, "p": space.pmat}
    acc = np.zeros((space.dim, space.dim), dtype=np.complex128)
    count = 0
    for word in _distinct_permutations({"q": qexp, "p": pexp}):
        prod = np.eye(space.dim, dtype=np.complex128)
        for letter in word:
            prod = prod @ mats[letter]
        acc += prod
        count += 1
    return Operator(space, acc / count)


# --- symbols ----------------------------------------------------------------

def truncation_radius(space: FockSpace) -> float:
    """Radius sqrt(2N) of the phase-space disk (in oscillator units) covered
    by the first N Fock levels."""
    return math.sqrt(2.0 * space.dim)


def characteristic_function(op: Operator, a1, a2) -> np.ndarray:
    """chi(a) = Tr[A D(a)] with D(a) = exp(i (a_1 q + a_2 p)) the untruncated
    displacement operator, restricted to the span of the first N levels.

    Matrix elements of D come from the closed Laguerre form
    <m|D(beta)|n> = sqrt(n!/m!) beta^(m-n) exp(-|beta|^2/2) L_n^(m-n)(|beta|^2),
    with beta = i s_q a_1 - s_p a_2.
    """
    space = op.space
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    shape = np.broadcast(a1, a2).shape
    a1 = np.broadcast_to(a1, shape).ravel()
    a2 = np.broadcast_to(a2, shape).ravel()
    s_q = math.sqrt(space.hbar / (2 * space.mass * space.omega))
    s_p = math.sqrt(space.hbar * space.mass * space.omega / 2)
    beta = 1j * s_q * a1 - s_p * a2
    x = np.abs(beta) ** 2
    n = space.dim
    out = np.zeros(x.shape, dtype=np.complex128)
    for d in range(n):
        k = np.arange(n - d)
        norm = np.exp(0.5 * (gammaln(k + 1) - gammaln(k + d + 1)))
        lag = eval_genlaguerre(k[None, :], d, x[:, None])
        # Tr[A D] picks A[k, k+d] D[k+d, k] and A[k+d, k] D[k, k+d]
        out += beta**d * (lag @ (np.diagonal(op.mat, d) * norm))
        if d:
            out += (-np.conj(beta)) ** d * (lag @ (np.diagonal(op.mat, -d) * norm))
    return (out * np.exp(-0.5 * x)).reshape(shape)


def weyl_symbol(op: Operator, grid: PhaseGrid, window: bool = True, points: int = 64) -> GridSymbol:
    """Weyl symbol A(q, p) of ``op`` sampled on ``grid``.

    Evaluates A(x) = (hbar / 2 pi) int da Tr[A W(a, x - x I)] as a midpoint
    sum over a ``points`` x ``points`` lattice in oscillator units reaching
    1.1 times the truncation radius.  With ``window`` the characteristic
    function is tapered by exp(-(|a| / rho_c)^4), rho_c = R / 2; the taper is
    flat to third order at a = 0, so polynomial symbols up to degree 3 are
    reproduced exactly, while the ringing of the truncated identity near the
    disk edge is suppressed.  Disable it for states, whose characteristic
    function already decays well inside the lattice.

    The result is trustworthy within half the truncation radius; see
    :func:`symbol_interior_mask`.
    """
    space = op.space
    radius = truncation_radius(space)
    amax = 1.1 * radius
    step = 2 * amax / points
    lat = -amax + step * (np.arange(points) + 0.5)
    # lattice in oscillator units: a_1 = u / s_q, a_2 = v / s_p with s = oscillator scales
    u, v = np.meshgrid(lat, lat, indexing="ij")
    chi = characteristic_function(op, u / space.q_scale, v / space.p_scale)
    if window:
        chi = chi * np.exp(-((np.hypot(u, v) / (0.5 * radius)) ** 4))
    qs = grid.q / space.q_scale
    ps = grid.p / space.p_scale
    eq = np.exp(-1j * np.outer(qs, lat))
    ep = np.exp(-1j * np.outer(ps, lat))
    values = eq @ chi @ ep.T * (step * step / (2 * np.pi))
    return GridSymbol(grid, values)


def symbol_interior_mask(space: FockSpace, grid: PhaseGrid, fraction: float = 0.5) -> np.ndarray:
    """Grid points within ``fraction`` of the truncation radius."""
    qq, pp = grid.mesh()
    r = np.hypot(qq / space.q_scale, pp / space.p_scale)
    return r <= fraction * truncation_radius(space)


# --- Jordan / Lie products ----------------------------------------------------

def jordan(a: Operator, b: Operator) -> Operator:
    """A o B = (AB + BA) / 2."""
    _same_space(a, b)
    return Operator(a.space, 0.5 * (a.mat @ b.mat + b.mat @ a.mat))


def lie(a: Operator, b: Operator) -> Operator:
    """(AB - BA) / (i hbar)."""
    _same_space(a, b)
    return Operator(a.space, (a.mat @ b.mat - b.mat @ a.mat) / (1j * a.space.hbar))


# --- states -------------------------------------------------------------------

def coherent_state(space: FockSpace, alpha: complex) -> Operator:
    """|alpha><alpha| from the truncated, renormalized Fock expansion."""
    alpha = complex(alpha)
    if abs(alpha) ** 2 > space.dim / 4:
        raise ValueError(f"|alpha|^2 = {abs(alpha)**2:g} exceeds N/4 = {space.dim / 4:g}")
    k = np.arange(space.dim)
    if alpha == 0:
        psi = (k == 0).astype(np.complex128)
    else:
        logamp = k * math.log(abs(alpha)) - 0.5 * gammaln(k + 1)
        psi = np.exp(logamp - logamp.max() + 1j * k * np.angle(alpha))
    psi /= np.linalg.norm(psi)
    return Operator(space, np.outer(psi, psi.conj()))


def fock_state(space: FockSpace, k: int) -> Operator:
    if not 0 <= k < space.dim:
        raise ValueError(f"Fock level {k} outside 0..{space.dim - 1}")
    m = np.zeros((space.dim, space.dim), dtype=np.complex128)
    m[k, k] = 1.0
    return Operator(space, m)
