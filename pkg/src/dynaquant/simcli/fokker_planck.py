"""Quantum Fokker-Planck-type master equation: direct construction from
commutators and the trace-preservation scan for the constant term h."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..dynquant import DynOperator, fokker_planck_dynop, quantize_qp
from ..fockspace import FockSpace, interior_dim
from ..superspace import SuperOperator, superop_from_action

__all__ = ["FPCoefficients", "build_fp_master_direct", "fp_hamiltonian", "trace_preservation_scan", "TraceScan"]


@dataclass(frozen=True)
class FPCoefficients:
    """Drift (c_*) and diffusion (d_*) coefficients of the Liouville operator.

    ``d_qp`` multiplies the mixed derivative (as 2 d_qp d_q d_p) and doubles
    as d_pq of the master equation.
    """

    c_qq: float = -0.05
    c_qp: float = 1.0
    c_pq: float = -1.0
    c_pp: float = -0.05
    d_qq: float = 0.025
    d_qp: float = 0.0
    d_pp: float = 0.025

    def _need_cpq(self):
        if self.c_pq == 0:
            raise ValueError("c_pq must be nonzero: the mass m = -1/c_pq is undefined")

    @property
    def mass(self) -> float:
        self._need_cpq()
        return -1.0 / self.c_pq

    @property
    def omega2(self) -> float:
        return -self.c_qp * self.c_pq

    @property
    def lam(self) -> float:
        return 0.5 * (self.c_pp + self.c_qq)

    @property
    def mu(self) -> float:
        return 0.5 * (self.c_pp - self.c_qq)

    @property
    def quoted_h(self) -> float:
        """Closed-form constant term -2(c_pp + c_qq) commonly quoted with this master equation."""
        return -2.0 * (self.c_pp + self.c_qq)

    @property
    def mass_conserving_h(self) -> float:
        """Constant term that makes the classical flow conserve total mass."""
        return self.c_pp + self.c_qq

    def dynop(self, h: float = 0.0) -> DynOperator:
        return fokker_planck_dynop(self.c_qq, self.c_qp, self.c_pq, self.c_pp,
                                   self.d_qq, self.d_qp, self.d_pp, h)

    def as_dict(self) -> dict:
        return asdict(self)


def fp_hamiltonian(space: FockSpace, coeffs: FPCoefficients) -> np.ndarray:
    """H = p^2/2m + m omega^2 q^2 / 2 under the coefficient map."""
    m = coeffs.mass
    q, p = space.qmat, space.pmat
    return p @ p / (2 * m) + 0.5 * m * coeffs.omega2 * (q @ q)


def build_fp_master_direct(space: FockSpace, coeffs: FPCoefficients) -> SuperOperator:
    """Master-equation generator assembled from commutators and Jordan products:

    -(i/hbar)[H, r] + (i(lam-mu)/hbar)[p, q o r] - (i(lam+mu)/hbar)[q, p o r]
      - (d_pp/hbar^2)[q,[q,r]] - (d_qq/hbar^2)[p,[p,r]] + (2 d_pq/hbar^2)[p,[q,r]]
    """
    hb = space.hbar
    q, p = space.qmat, space.pmat
    H = fp_hamiltonian(space, coeffs)
    lam, mu = coeffs.lam, coeffs.mu

    def comm(a, b):
        return a @ b - b @ a

    def jor(a, b):
        return 0.5 * (a @ b + b @ a)

    def action(r):
        return (-1j / hb * comm(H, r)
                + 1j * (lam - mu) / hb * comm(p, jor(q, r))
                - 1j * (lam + mu) / hb * comm(q, jor(p, r))
                - coeffs.d_pp / hb**2 * comm(q, comm(q, r))
                - coeffs.d_qq / hb**2 * comm(p, comm(p, r))
                + 2 * coeffs.d_qp / hb**2 * comm(p, comm(q, r)))

    return superop_from_action(space, action)


@dataclass(frozen=True)
class TraceScan:
    h_star: float
    residual: float
    quoted_h: float
    discrepancy: bool

    def report_lines(self) -> list[str]:
        return [
            f"h_star {self.h_star:.17g}",
            f"interior_trace_derivative_residual {self.residual:.3e}",
            f"reference_h_minus2_sum {self.quoted_h:.17g}",
            f"discrepancy {'YES' if self.discrepancy else 'NO'}",
        ]


def trace_preservation_scan(space: FockSpace, coeffs: FPCoefficients, m: int | None = None,
                            flag_tol: float = 1e-8) -> TraceScan:
    """Constant h making d/dt Tr(rho) = 0 for states supported on the interior.

    Tr(S rho) = <S^dagger I, rho>, and S^dagger I is a scalar multiple of the
    identity on the interior block, so h_star is read off from that block and
    the residual measures how far it is from scalar after the shift.
    """
    n = space.dim
    m = interior_dim(n) if m is None else m
    s0 = quantize_qp(space, coeffs.dynop(0.0))
    eye = np.eye(n, dtype=np.complex128).reshape(-1, order="F")
    g = (s0.mat.conj().T @ eye).reshape(n, n, order="F")[:m, :m]
    # S^dagger I for S = S0 + h Id is g + h I on the block
    h_star = float(-np.real(np.trace(g)) / m)
    residual = float(np.linalg.norm(g + h_star * np.eye(m)))
    return TraceScan(h_star, residual, coeffs.quoted_h, abs(h_star - coeffs.quoted_h) > flag_tol)
