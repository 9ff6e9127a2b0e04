"""Classical phase-space side: grids, finite-difference dynamical operators,
Poisson brackets and RK4 evolution of grid functions.

Derivatives use fourth-order central differences.  For evaluating operators
on grid functions the two rows nearest each edge use fourth-order one-sided
stencils, so polynomials up to degree four are differentiated exactly
everywhere.  Time evolution instead treats the function as zero beyond the
grid: one-sided closures make RK4 advection unstable, while the zero-padded
central first-derivative matrix is skew-symmetric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from numbers import Number
from typing import TYPE_CHECKING, Callable, NamedTuple

import numpy as np
from scipy.integrate import trapezoid

if TYPE_CHECKING:
    from .dynquant import DynOperator

__all__ = [
    "PhaseGrid",
    "GridSymbol",
    "Moments",
    "ClassicalResult",
    "StabilityError",
    "GridMismatchError",
    "ONE_SIDED",
    "ZERO",
    "fd_weights",
    "diff_matrix",
    "apply_dynop_grid",
    "poisson_bracket_grid",
    "grid_moments",
    "evolve_classical",
]


class StabilityError(ValueError):
    """Time step violates the explicit-scheme stability guard."""


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform tensor grid over [q_min, q_max] x [p_min, p_max]."""

    q_min: float
    q_max: float
    p_min: float
    p_max: float
    nq: int
    np: int

    def __post_init__(self):
        if not (self.q_max > self.q_min and self.p_max > self.p_min):
            raise ValueError("grid bounds must satisfy max > min")
        if self.nq < 8 or self.np < 8:
            raise ValueError(f"need at least 8 points per axis, got {self.nq}x{self.np}")

    @classmethod
    def square(cls, half_width: float, n: int) -> "PhaseGrid":
        return cls(-half_width, half_width, -half_width, half_width, n, n)

    @property
    def q(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.nq)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np)

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / (self.nq - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.np - 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(Q, P) arrays of shape (nq, np), q along axis 0."""
        return np.meshgrid(self.q, self.p, indexing="ij")


@dataclass(frozen=True, eq=False)
class GridSymbol:
    """Samples of a phase-space function; ``values[i, j] = f(q_i, p_j)``."""

    grid: PhaseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.grid.nq, self.grid.np):
            raise ValueError(f"values shape {vals.shape} does not match grid {(self.grid.nq, self.grid.np)}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: PhaseGrid, fn: Callable) -> "GridSymbol":
        qq, pp = grid.mesh()
        return cls(grid, np.broadcast_to(fn(qq, pp), qq.shape))

    @classmethod
    def gaussian(cls, grid: PhaseGrid, mean, cov) -> "GridSymbol":
        """Normalized bivariate Gaussian density."""
        mean = np.asarray(mean, dtype=float)
        cov = np.asarray(cov, dtype=float)
        inv = np.linalg.inv(cov)
        qq, pp = grid.mesh()
        dq, dp = qq - mean[0], pp - mean[1]
        quad = inv[0, 0] * dq**2 + 2 * inv[0, 1] * dq * dp + inv[1, 1] * dp**2
        norm = 1.0 / (2 * np.pi * math.sqrt(np.linalg.det(cov)))
        return cls(grid, norm * np.exp(-0.5 * quad))

    def _check(self, other):
        if other.grid != self.grid:
            raise GridMismatchError("grid symbols live on different grids")

    def __add__(self, other):
        self._check(other)
        return GridSymbol(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return GridSymbol(self.grid, self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, GridSymbol):
            self._check(c)
            return GridSymbol(self.grid, self.values * c.values)
        if not isinstance(c, Number):
            return NotImplemented
        return GridSymbol(self.grid, c * self.values)

    __rmul__ = __mul__


# --- finite differences -------------------------------------------------------

def fd_weights(offsets, deriv: int) -> np.ndarray:
    """Weights w with sum_j w_j f(x + s_j h) = h^deriv f^(deriv)(x) + O(h^len)."""
    s = np.asarray(offsets, dtype=float)
    k = np.arange(len(s))
    vander = s[None, :] ** k[:, None] / np.array([math.factorial(i) for i in k])[:, None]
    rhs = (k == deriv).astype(float)
    return np.linalg.solve(vander, rhs)


ONE_SIDED = "one-sided"
ZERO = "zero"


@lru_cache(maxsize=64)
def diff_matrix(n: int, h: float, deriv: int, closure: str = ONE_SIDED) -> np.ndarray:
    """Dense n x n fourth-order differentiation matrix (deriv 1 or 2).

    ``closure`` selects one-sided edge stencils or zero padding beyond the grid.
    """
    if closure not in (ONE_SIDED, ZERO):
        raise ValueError(f"unknown closure {closure!r}")
    if deriv not in (1, 2):
        raise ValueError("only first and second derivatives are supported")
    width = 5 if deriv == 1 else 6
    if n < width:
        raise ValueError(f"grid too small for stencil: need >= {width} points, got {n}")
    d = np.zeros((n, n))
    central = fd_weights(range(-2, 3), deriv)
    for i in range(n):
        if closure == ZERO:
            lo, hi = max(i - 2, 0), min(i + 3, n)
            d[i, lo:hi] = central[lo - (i - 2):hi - (i - 2)]
        elif 2 <= i <= n - 3:
            d[i, i - 2:i + 3] = central
        elif i < 2:
            d[i, :width] = fd_weights(np.arange(width) - i, deriv)
        else:
            start = n - width
            d[i, start:] = fd_weights(np.arange(start, n) - i, deriv)
    d.setflags(write=False)
    return d / h**deriv


def _derivative(values: np.ndarray, grid: PhaseGrid, cq: int, cp: int,
                closure: str = ONE_SIDED) -> np.ndarray:
    out = values
    if cq:
        out = diff_matrix(grid.nq, grid.dq, cq, closure) @ out
    if cp:
        out = out @ diff_matrix(grid.np, grid.dp, cp, closure).T
    return out


def _check_orders(L: "DynOperator") -> None:
    for (_, _, c, d) in L.terms:
        if c > 2 or d > 2:
            raise ValueError(f"derivative order ({c}, {d}) exceeds 2 per variable")


def apply_dynop_grid(L: "DynOperator", f: GridSymbol, closure: str = ONE_SIDED) -> GridSymbol:
    """Apply sum coeff q^a p^b d_q^c d_p^d to ``f`` (derivatives act first)."""
    _check_orders(L)
    grid = f.grid
    qq, pp = grid.mesh()
    derivs: dict[tuple[int, int], np.ndarray] = {}
    out = np.zeros_like(f.values)
    for (a, b, c, d), coeff in L.terms.items():
        if (c, d) not in derivs:
            derivs[(c, d)] = _derivative(f.values, grid, c, d, closure)
        out += coeff * qq**a * pp**b * derivs[(c, d)]
    return GridSymbol(grid, out)


def poisson_bracket_grid(a: GridSymbol, b: GridSymbol) -> GridSymbol:
    """{A, B} = dA/dq dB/dp - dA/dp dB/dq."""
    a._check(b)
    g = a.grid
    aq, ap = _derivative(a.values, g, 1, 0), _derivative(a.values, g, 0, 1)
    bq, bp = _derivative(b.values, g, 1, 0), _derivative(b.values, g, 0, 1)
    return GridSymbol(g, aq * bp - ap * bq)


# --- moments and evolution ------------------------------------------------------

class Moments(NamedTuple):
    mass: float
    mean_q: float
    mean_p: float
    cov_qq: float
    cov_qp: float
    cov_pp: float


def grid_moments(f: GridSymbol) -> Moments:
    """Mass, means and covariances of a grid density by trapezoidal quadrature."""
    g = f.grid
    qq, pp = g.mesh()
    vals = f.values.real

    def integral(arr):
        return float(trapezoid(trapezoid(arr, dx=g.dp, axis=1), dx=g.dq))

    mass = integral(vals)
    if mass == 0.0:
        return Moments(0.0, *([math.nan] * 5))
    mq = integral(qq * vals) / mass
    mp = integral(pp * vals) / mass
    cqq = integral((qq - mq) ** 2 * vals) / mass
    cqp = integral((qq - mq) * (pp - mp) * vals) / mass
    cpp = integral((pp - mp) ** 2 * vals) / mass
    return Moments(mass, mq, mp, cqq, cqp, cpp)


@dataclass
class ClassicalResult:
    times: np.ndarray
    snapshots: list[GridSymbol]
    moments: list[Moments]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(m, name) for m in self.moments])


def _stability_limit(L: "DynOperator", grid: PhaseGrid) -> float:
    qq, pp = grid.mesh()
    diff = np.zeros(qq.shape)
    drift_q = np.zeros(qq.shape, dtype=np.complex128)
    drift_p = np.zeros(qq.shape, dtype=np.complex128)
    for (a, b, c, d), coeff in L.terms.items():
        field_ = coeff * qq**a * pp**b
        if (c, d) == (1, 0):
            drift_q += field_
        elif (c, d) == (0, 1):
            drift_p += field_
        elif c + d >= 2:
            diff = np.maximum(diff, np.abs(field_))
    speed = np.maximum(np.abs(drift_q), np.abs(drift_p))
    h = min(grid.dq, grid.dp)
    limit = math.inf
    if speed.max() > 0:
        limit = min(limit, 0.5 * h / speed.max())
    if diff.max() > 0:
        limit = min(limit, 0.25 * h * h / diff.max())
    return limit


def evolve_classical(L: "DynOperator", f0: GridSymbol, dt: float, steps: int,
                     stride: int = 1) -> ClassicalResult:
    """Integrate df/dt = L f with fixed-step classical RK4.

    ``f`` is taken to vanish outside the grid, so the domain should be wide
    enough for the density to stay negligible at the edges.

    Snapshots and moments are recorded at t = 0 and every ``stride`` steps.
    """
    _check_orders(L)
    if dt <= 0 or steps < 0 or stride < 1:
        raise ValueError("need dt > 0, steps >= 0, stride >= 1")
    limit = _stability_limit(L, f0.grid)
    if dt > limit:
        raise StabilityError(f"dt = {dt:g} exceeds stability limit {limit:g}")

    def rhs(v):
        return apply_dynop_grid(L, GridSymbol(f0.grid, v), ZERO).values

    f = f0.values.copy()
    times, snaps, moms = [0.0], [f0], [grid_moments(f0)]
    for n in range(1, steps + 1):
        k1 = rhs(f)
        k2 = rhs(f + 0.5 * dt * k1)
        k3 = rhs(f + 0.5 * dt * k2)
        k4 = rhs(f + dt * k3)
        f = f + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if n % stride == 0 or n == steps:
            snap = GridSymbol(f0.grid, f)
            times.append(n * dt)
            snaps.append(snap)
            moms.append(grid_moments(snap))
    return ClassicalResult(np.array(times), snaps, moms)
