"""Verification suite for the operator and superoperator identities.

Each check returns a residual; the report compares it with a tolerance.
Items come in two kinds: ``exact`` identities hold for any matrices and any
truncation, ``interior`` identities rely on [q, p] = i hbar and are measured
on operands supported in the low Fock levels.  The ``strict`` profile drops
the interior restriction and tightens every tolerance to 1e-12, which
exposes the truncation boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dynquant import (
    DynOperator, SYMMETRIC, damped_oscillator_dynop, hamiltonian_generator,
    multiplication_dynop, poisson_generator, quantize_qp, quantize_symmetric,
)
from ..fockspace import (
    PolynomialSymbol, build_space, interior_dim, jordan, lie, weyl_interior_dim,
    weyl_operator, weyl_quantize_poly,
)
from ..superspace import (
    SYMPLECTIC, LRSum, SuperOperator, _p_lr, _q_lr, apply, interior_injection,
    left_mult, p_super, q_super, right_mult, superop_from_action, v_factors,
)
from .fokker_planck import FPCoefficients, build_fp_master_direct

__all__ = ["CheckLine", "AlgebraReport", "check_algebra", "PROFILES",
           "weyl_composition_residual", "superweyl_composition_residual"]

PROFILES = ("default", "strict")


@dataclass(frozen=True)
class CheckLine:
    name: str
    kind: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tol)

    def format(self) -> str:
        return (f"{self.name:<34} {self.kind:<8} residual={self.residual:.3e} "
                f"tol={self.tol:.0e} {'PASS' if self.passed else 'FAIL'}")


@dataclass
class AlgebraReport:
    n: int
    profile: str
    seed: int
    lines: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(l.passed for l in self.lines)

    def __getitem__(self, name) -> CheckLine:
        for line in self.lines:
            if line.name == name:
                return line
        raise KeyError(name)

    def text(self) -> str:
        head = [f"# algebra check N={self.n} profile={self.profile} seed={self.seed}"]
        return "\n".join(head + [l.format() for l in self.lines]) + "\n"


def _rand(rng, n, hermitian=False):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T) if hermitian else a


def _block(mat, n, m, side):
    """Superoperator matrix seen by operands in the top-left m x m block."""
    idx = interior_injection(n, m)
    return mat[:, idx] if side == "input" else mat[np.ix_(idx, idx)]


def _lr_commutator(x: LRSum, y: LRSum) -> LRSum:
    return (x @ y + (-1) * (y @ x)).compact()


def weyl_composition_residual(space, a=(0.3, 0.0), b=(0.0, 0.3), m: int | None = None) -> float:
    """|| W(a) W(b) - W(a + b) exp(-(i hbar / 2) a.Psi.b) || on the top-left m x m block."""
    m = weyl_interior_dim(space.dim) if m is None else m
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    phase = np.exp(-0.5j * space.hbar * (a @ SYMPLECTIC.Psi @ b))
    d = weyl_operator(space, a).mat @ weyl_operator(space, b).mat - phase * weyl_operator(space, a + b).mat
    return float(np.linalg.norm(d[:m, :m]))


def superweyl_composition_residual(space, a1=(0.3, 0.0), b1=(0.0, 0.3), a2=(0.0, 0.3), b2=(0.3, 0.0),
                                   m: int | None = None) -> float:
    """|| V(a1,b1) V(a2,b2) - V(a1+a2, b1+b2) exp(-(i/2)(a1.b2 - a2.b1)) || on
    operands and outputs in the top-left m x m block."""
    m = weyl_interior_dim(space.dim) if m is None else m
    a1, b1, a2, b2 = (np.asarray(x, dtype=float) for x in (a1, b1, a2, b2))
    prod = v_factors(space, a1, b1) @ v_factors(space, a2, b2)
    phase = np.exp(-0.5j * (a1 @ b2 - a2 @ b1))
    d = prod.restricted(m) - phase * v_factors(space, a1 + a2, b1 + b2).restricted(m)
    return float(np.linalg.norm(d))


def check_algebra(n: int = 32, profile: str = "default", seed: int = 0) -> AlgebraReport:
    if n < 8:
        raise ValueError("check_algebra needs N >= 8")
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}, got {profile!r}")
    strict = profile == "strict"
    rng = np.random.default_rng(seed)
    sp = build_space(n)
    hb = sp.hbar
    n2 = n * n
    m = n if strict else interior_dim(n)
    mw = n if strict else weyl_interior_dim(n)
    tol_exact = 1e-12
    tol_int = 1e-12 if strict else 1e-10
    tol_weyl = 1e-12 if strict else 1e-6
    report = AlgebraReport(n, profile, seed)

    def add(name, kind, residual, tol):
        report.lines.append(CheckLine(name, kind, float(residual), tol))

    # exact: any matrices, any truncation
    worst = 0.0
    small = build_space(8)
    for _ in range(100):
        a, b, c = (small.operator(_rand(rng, 8, True)) for _ in range(3))
        lhs = jordan(jordan(a, b), c) - jordan(a, jordan(b, c))
        # sign: (A o B) o C - A o (B o C) = [B, [A, C]] / 4 = -(hbar^2/4) lie(B, lie(A, C))
        rhs = -(small.hbar**2 / 4) * lie(b, lie(a, c))
        worst = max(worst, np.linalg.norm((lhs - rhs).mat))
    add("jordan_associator", "exact", worst, tol_exact)

    a, b, c = (sp.operator(x / np.linalg.norm(x)) for x in (_rand(rng, n) for _ in range(3)))
    la, rb = left_mult(a).mat, right_mult(b).mat
    add("left_right_commute", "exact", np.linalg.norm(la @ rb - rb @ la), 1e-13)
    add("right_mult_order_reversal", "exact",
        np.linalg.norm(right_mult(a).mat @ right_mult(b).mat - right_mult(b @ a).mat), 1e-13)

    eye = sp.identity
    qs = [q_super(sp, k) for k in (1, 2)]
    ps = [p_super(sp, k) for k in (1, 2)]
    add("P_on_identity", "exact", max(np.linalg.norm(apply(s, eye).mat) for s in ps), 1e-13)
    add("Q_on_identity", "exact",
        max(np.linalg.norm(apply(qs[k], eye).mat - sp.x(k + 1).mat) for k in range(2)), 1e-13)
    conj = 0.0
    for k in range(2):
        conj = max(conj,
                   np.linalg.norm(apply(qs[k], a).dag().mat - apply(qs[k], a.dag()).mat),
                   np.linalg.norm(apply(ps[k], a).dag().mat + apply(ps[k], a.dag()).mat))
    add("conjugation_rules", "exact", conj, 1e-13)
    hs = max(np.linalg.norm(s.mat - s.mat.conj().T) for s in qs + ps)
    add("QP_hs_self_adjoint", "exact", hs, 1e-13)

    ah, bh, ch = (sp.operator(_rand(rng, n, True) / n) for _ in range(3))
    jac = lie(ah, lie(bh, ch)) + lie(bh, lie(ch, ah)) + lie(ch, lie(ah, bh))
    anti = lie(ah, bh) + lie(bh, ah)
    add("lie_antisymmetry_jacobi", "exact",
        max(np.linalg.norm(jac.mat), np.linalg.norm(anti.mat)), tol_exact)

    w = 0.0
    for _ in range(5):
        vec_a = rng.uniform(-1, 1, 2)
        vec_a *= min(1.0, 1.0 / np.linalg.norm(vec_a))
        wa = weyl_operator(sp, vec_a).mat
        w = max(w, np.linalg.norm(wa.conj().T @ wa - np.eye(n)))
    add("weyl_unitarity_W3", "exact", w, tol_exact)
    v = 0.0
    for _ in range(3):
        vf = v_factors(sp, rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 2))
        (_, wl, wr), = vf.pairs
        # V^dagger V = (W_l^dag W_l)^l (W_r W_r^dag)^r
        dl = wl.conj().T @ wl
        dr = wr @ wr.conj().T
        v = max(v, np.linalg.norm(np.kron(dr.T, dl) - np.eye(n2)))
    add("superweyl_unitarity_V31", "exact", v, 1e-10)

    L = DynOperator({(1, 0, 1, 0): rng.normal(), (0, 1, 0, 1): rng.normal(),
                     (2, 1, 0, 2): rng.normal(), (0, 0, 1, 1): rng.normal()})
    s_l = quantize_qp(sp, L)
    add("derivative_terms_kill_identity", "exact",
        np.linalg.norm(apply(s_l, eye).mat) / np.linalg.norm(s_l.mat), 1e-14)

    mass, omega, gamma = 1.0, 1.0, 0.1
    q, p = sp.qmat, sp.pmat
    H = PolynomialSymbol([(0.5 / mass, 0, 2), (0.5 * mass * omega**2, 2, 0)])
    s_fric = superop_from_action(
        sp, lambda x: (1j * gamma / (2 * mass * hb)) * (p @ q @ x - p @ x @ q + q @ x @ p - x @ q @ p))
    gen = quantize_qp(sp, damped_oscillator_dynop(mass, omega, gamma))
    add("damped_generator_equality", "exact",
        np.linalg.norm(gen.mat - hamiltonian_generator(sp, H).mat - s_fric.mat), tol_exact)

    fp = FPCoefficients(c_qq=rng.uniform(-0.3, 0.3), c_qp=rng.uniform(0.5, 1.5), c_pq=-rng.uniform(0.5, 1.5),
                        c_pp=rng.uniform(-0.3, 0.3), d_qq=rng.uniform(0, 0.2), d_qp=rng.uniform(-0.05, 0.05),
                        d_pp=rng.uniform(0, 0.2))
    h_star = fp.mass_conserving_h
    top = np.zeros((n, n))
    top[-1, -1] = 1.0
    boundary = -h_star * (n / 2) * (np.kron(np.eye(n), top) + np.kron(top, np.eye(n)))
    fp_diff = build_fp_master_direct(sp, fp).mat - quantize_qp(sp, fp.dynop(0.0)).mat - h_star * np.eye(n2)
    add("fp_generator_equality_full", "exact", np.linalg.norm(fp_diff - boundary), tol_exact)

    # interior: truncation-sensitive
    ccr = (q @ p - p @ q - 1j * hb * np.eye(n))[:m, :m]
    add("ccr2", "interior", np.linalg.norm(ccr), tol_int)
    add("lie_qp_identity", "interior", np.linalg.norm((lie(sp.qop, sp.pop).mat - np.eye(n))[:m, :m]), tol_int)

    side = "both" if strict else "input"
    eye2 = np.eye(n2)
    qp_worst = 0.0
    for k in range(2):
        for j in range(2):
            cm = qs[k].mat @ ps[j].mat - ps[j].mat @ qs[k].mat - (1j if k == j else 0) * eye2
            qp_worst = max(qp_worst, np.linalg.norm(_block(cm, n, m, side)))
    qq = qs[0].mat @ qs[1].mat - qs[1].mat @ qs[0].mat
    pp = _lr_commutator(_p_lr(sp, 1), _p_lr(sp, 2)).materialize().mat
    add("QP_cr_QP", "interior", qp_worst, tol_int)
    add("QP_cr_QQ", "interior", np.linalg.norm(_block(qq, n, m, side)), tol_int)
    add("QP_cr_PP", "interior", np.linalg.norm(_block(pp, n, m, side)), tol_int)

    ff1 = 0.0
    xs = [sp.x(1), sp.x(2)]
    for k in range(2):
        for j in range(2):
            psi = SYMPLECTIC.Psi[k, j]
            lk, lj = left_mult(xs[k]).mat, left_mult(xs[j]).mat
            rk, rj = right_mult(xs[k]).mat, right_mult(xs[j]).mat
            ff1 = max(ff1,
                      np.linalg.norm(_block(lk @ lj - lj @ lk - 1j * hb * psi * eye2, n, m, side)),
                      np.linalg.norm(_block(rk @ rj - rj @ rk + 1j * hb * psi * eye2, n, m, side)))
    add("ff1_left_right", "interior", ff1, tol_int)

    add("weyl_composition_W2", "interior", weyl_composition_residual(sp, m=mw), tol_weyl)
    add("superweyl_composition_V21", "interior", superweyl_composition_residual(sp, m=mw), tol_weyl)

    hq = quantize_qp(sp, poisson_generator(H)).mat - hamiltonian_generator(sp, H).mat
    add("poisson_vs_hamiltonian_route", "interior", np.linalg.norm(_block(hq, n, m, side)), tol_int)

    fp_int = _block(fp_diff, n, m, side)
    add("fp_generator_equality_interior", "interior", np.linalg.norm(fp_int), tol_int)

    emb = 0.0
    for deg in range(5):
        for qa in range(deg + 1):
            sym = PolynomialSymbol([(1.0, qa, deg - qa)])
            out = apply(quantize_symmetric(sp, multiplication_dynop(sym, SYMMETRIC)), eye).mat
            emb = max(emb, np.linalg.norm((out - weyl_quantize_poly(sp, sym).mat)[:m, :m]))
    add("canonical_embedding_deg4", "interior", emb, tol_int)
    return report
