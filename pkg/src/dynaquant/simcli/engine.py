"""Time stepping of superoperator generators: dX/dt = S X.

Two propagators are offered.  ``EXPM`` forms expm(S dt) once and multiplies;
``RK4`` takes classical Runge-Kutta stages with a sparse copy of S.  RK4 keeps
every internal step inside ||S||_1 h <= 0.1: with ``substeps=None`` the step
is split automatically, an explicit ``substeps`` that violates the bound is
an error.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps

from ..densecore import expm
from ..fockspace import Operator
from ..superspace import SuperOperator, transpose_permutation

__all__ = [
    "EXPM",
    "RK4",
    "RK4_GUARD",
    "StepSizeError",
    "Propagator",
    "EvolutionResult",
    "HeisenbergResult",
    "TIMESERIES_COLUMNS",
    "evolve_quantum",
    "evolve_heisenberg",
]

EXPM = "EXPM"
RK4 = "RK4"
RK4_GUARD = 0.1

TIMESERIES_COLUMNS = ("t", "trace_re", "herm_defect", "mean_q", "mean_p",
                      "var_qq", "var_pp", "cov_qp", "energy", "purity")


class StepSizeError(ValueError):
    """RK4 step violates the ||S|| dt guard."""


class Propagator:
    """Advances a block of column-stacked operators by one step dt."""

    def __init__(self, s: SuperOperator, dt: float, method: str = EXPM, substeps: int | None = None):
        if not dt > 0:
            raise ValueError("dt must be positive")
        method = method.upper()
        self.dt = dt
        self.method = method
        if method == EXPM:
            self.substeps = 1
            self._step = expm(s.mat * dt)
        elif method == RK4:
            norm = float(np.abs(s.mat).sum(axis=0).max())
            need = max(1, math.ceil(norm * dt / RK4_GUARD - 1e-12))
            if substeps is None:
                substeps = need
            elif substeps < need:
                raise StepSizeError(
                    f"RK4 guard ||S||*h <= {RK4_GUARD} needs at least {need} substeps, got {substeps}")
            self.substeps = int(substeps)
            self._sparse = sps.csr_matrix(s.mat)
        else:
            raise ValueError(f"method must be {EXPM} or {RK4}, got {method!r}")

    def dual(self, n: int) -> "Propagator":
        """Propagator of the Schrodinger-picture partner generator, built
        from the data already held (no second exponential)."""
        perm = transpose_permutation(n)
        out = object.__new__(Propagator)
        out.dt, out.method, out.substeps = self.dt, self.method, self.substeps
        if self.method == EXPM:
            out._step = np.ascontiguousarray(self._step.T[np.ix_(perm, perm)])
        else:
            out._sparse = sps.csr_matrix(self._sparse.T)[perm][:, perm]
        return out

    def step(self, v: np.ndarray) -> np.ndarray:
        if self.method == EXPM:
            return self._step @ v
        h = self.dt / self.substeps
        s = self._sparse
        for _ in range(self.substeps):
            k1 = s @ v
            k2 = s @ (v + 0.5 * h * k1)
            k3 = s @ (v + 0.5 * h * k2)
            k4 = s @ (v + h * k3)
            v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return v


@dataclass
class EvolutionResult:
    """Diagnostics of a state trajectory rho_t sampled at snapshot times.

    Second moments are stored raw (<q^2>, <p^2>, <(qp+pq)/2>); the
    ``var_*``/``cov_qp`` properties subtract the mean products.  Expectations
    are Tr(rho A) without dividing by the trace.
    """

    times: np.ndarray
    trace_re: np.ndarray
    herm_defect: np.ndarray
    mean_q: np.ndarray
    mean_p: np.ndarray
    second_qq: np.ndarray
    second_pp: np.ndarray
    second_qp: np.ndarray
    energy: np.ndarray
    purity: np.ndarray
    method: str = EXPM
    substeps: int = 1
    snapshots: list = field(default_factory=list)

    @property
    def var_qq(self):
        return self.second_qq - self.mean_q**2

    @property
    def var_pp(self):
        return self.second_pp - self.mean_p**2

    @property
    def cov_qp(self):
        return self.second_qp - self.mean_q * self.mean_p

    def column(self, name: str) -> np.ndarray:
        return self.times if name == "t" else np.asarray(getattr(self, name))

    def rows(self):
        cols = [self.column(c) for c in TIMESERIES_COLUMNS]
        return zip(*cols)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TIMESERIES_COLUMNS)
            for row in self.rows():
                w.writerow([format(float(x), ".17g") for x in row])


@dataclass
class HeisenbergResult:
    """Expectations Tr(rho0 A_t) of evolved observables, keyed by name.

    ``purity`` and ``states`` describe the partner state rho_t defined by
    Tr(rho_t A) = Tr(rho0 A_t); ``purity`` is filled when requested.
    """

    times: np.ndarray
    expectations: dict
    herm_defect: np.ndarray
    method: str = EXPM
    substeps: int = 1
    purity: np.ndarray | None = None
    states: list = field(default_factory=list)

    def __getitem__(self, name):
        return self.expectations[name]


def _times(dt, steps, stride):
    if steps < 1 or stride < 1:
        raise ValueError("steps and stride must be positive")
    idx = list(range(0, steps + 1, stride))
    if idx[-1] != steps:
        idx.append(steps)
    return idx


def _default_hamiltonian(space):
    q, p = space.qmat, space.pmat
    return 0.5 * (p @ p) / space.mass + 0.5 * space.mass * space.omega**2 * (q @ q)


def evolve_quantum(s: SuperOperator, x0: Operator, dt: float, steps: int, method: str = EXPM,
                   stride: int = 1, hamiltonian: Operator | None = None, keep_snapshots: bool = False,
                   substeps: int | None = None) -> EvolutionResult:
    """Schrodinger-picture run: rho_{t+dt} = step(rho_t), diagnostics at every
    ``stride``-th step (and at the last one)."""
    space = s.space
    if x0.space != space:
        raise ValueError("initial operator belongs to a different space")
    n = space.dim
    prop = Propagator(s, dt, method, substeps)
    q, p = space.qmat, space.pmat
    h = _default_hamiltonian(space) if hamiltonian is None else hamiltonian.mat
    sym_qp = 0.5 * (q @ p + p @ q)
    # Tr(rho A) = vec(A^T) . vec(rho)
    obs = np.stack([m.T.reshape(-1, order="F") for m in (q, p, q @ q, p @ p, sym_qp, h)])
    record = set(_times(dt, steps, stride))
    rows = []
    snaps = []
    v = x0.mat.reshape(-1, order="F").astype(np.complex128)
    for k in range(steps + 1):
        if k:
            v = prop.step(v)
        if k in record:
            rho = v.reshape(n, n, order="F")
            ex = (obs @ v).real
            rows.append((k * dt, np.trace(rho).real, np.linalg.norm(rho - rho.conj().T),
                         *ex, np.vdot(rho, rho).real))
            if keep_snapshots:
                snaps.append(Operator(space, rho.copy()))
    arr = np.array(rows).T
    return EvolutionResult(*arr, method=prop.method, substeps=prop.substeps, snapshots=snaps)


def evolve_heisenberg(s: SuperOperator, observables: dict, rho0: Operator, dt: float, steps: int,
                      method: str = EXPM, stride: int = 1, substeps: int | None = None,
                      track_state: bool = False, keep_snapshots: bool = False) -> HeisenbergResult:
    """Heisenberg-picture run: each observable obeys dA/dt = S A; records
    Tr(rho0 A_t) and the largest anti-Hermitian part among the observables.

    With ``track_state`` the partner state is stepped alongside to report its
    purity (and snapshots with ``keep_snapshots``).
    """
    space = s.space
    n = space.dim
    names = list(observables)
    block = np.column_stack([observables[k].mat.reshape(-1, order="F") for k in names]).astype(np.complex128)
    prop = Propagator(s, dt, method, substeps)
    weights = rho0.mat.T.reshape(-1, order="F")
    record = set(_times(dt, steps, stride))
    track_state = track_state or keep_snapshots
    dprop = prop.dual(n) if track_state else None
    state = rho0.mat.reshape(-1, order="F").astype(np.complex128)
    times, vals, herm, pur, snaps = [], [], [], [], []
    for k in range(steps + 1):
        if k:
            block = prop.step(block)
            if track_state:
                state = dprop.step(state)
        if k in record:
            if track_state:
                rho = state.reshape(n, n, order="F")
                pur.append(np.vdot(rho, rho).real)
                if keep_snapshots:
                    snaps.append(Operator(space, rho.copy()))
            times.append(k * dt)
            vals.append(weights @ block)
            mats = block.reshape(n, n, -1, order="F")
            herm.append(max(np.linalg.norm(mats[:, :, j] - mats[:, :, j].conj().T) for j in range(len(names))))
    vals = np.array(vals)
    return HeisenbergResult(np.array(times), {k: vals[:, j] for j, k in enumerate(names)},
                            np.array(herm), prop.method, prop.substeps,
                            np.array(pur) if track_state else None, snaps)
