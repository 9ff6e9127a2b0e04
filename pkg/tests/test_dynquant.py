import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dynaquant.densecore import RankDeficientError
from dynaquant.dynquant import (
    QP, SYMMETRIC, DynOperator, damped_oscillator_dynop, dequantize, dequantize_coefficients,
    fokker_planck_dynop, hamiltonian_generator, multiplication_dynop, poisson_generator, qp_monomials,
    quantize_qp, quantize_symmetric,
)
from dynaquant.fockspace import PolynomialSymbol, build_space, interior_dim, weyl_quantize_poly
from dynaquant.superspace import (
    apply, identity_super, interior_injection, p_super, q_super, superop_from_action, zero_super,
)

from conftest import random_matrix


def interior_cols(s, m=None):
    n = s.space.dim
    return s.mat[:, interior_injection(n, interior_dim(n) if m is None else m)]


class TestDynOperator:
    def test_normalization(self):
        L = DynOperator([(1.0, 1, 0, 1, 0), (2.0, 1, 0, 1, 0), (0.0, 0, 0, 0, 1), (1.0, 0, 1, 0, 0)])
        assert L.terms == {(0, 1, 0, 0): 1.0, (1, 0, 1, 0): 3.0}

    def test_form_tag(self):
        with pytest.raises(ValueError):
            DynOperator([], form="WEIRD")
        with pytest.raises(ValueError):
            DynOperator([(1.0, 1, 0, 0, 0)]) + DynOperator([(1.0, 1, 0, 0, 0)], SYMMETRIC)

    def test_bad_powers(self):
        with pytest.raises(ValueError):
            DynOperator([(1.0, -1, 0, 0, 0)])

    def test_arithmetic(self):
        a = DynOperator([(1.0, 1, 0, 0, 0)])
        b = DynOperator([(2.0, 0, 0, 1, 0)])
        assert (2 * a + b - b) == 2 * a
        assert (a + b).degree == 1


class TestQuantizeQP:
    def test_multiplication_by_q(self, space16):
        s = quantize_qp(space16, DynOperator([(1.0, 1, 0, 0, 0)]))
        np.testing.assert_array_equal(s.mat, q_super(space16, 1).mat)
        np.testing.assert_array_equal(apply(s, space16.identity).mat, space16.qmat)

    @pytest.mark.parametrize("hbar", [1.0, 0.5])
    def test_derivative_q(self, rng, hbar):
        sp = build_space(10, hbar=hbar)
        s = quantize_qp(sp, DynOperator([(1.0, 0, 0, 1, 0)]))
        a = random_matrix(rng, 10)
        p = sp.pmat
        np.testing.assert_allclose(apply(s, sp.operator(a)).mat, (1j / hbar) * (p @ a - a @ p), atol=1e-12)

    def test_wrong_form(self, space16):
        with pytest.raises(ValueError):
            quantize_qp(space16, DynOperator([(1.0, 1, 0, 0, 0)], SYMMETRIC))

    @pytest.mark.parametrize("n", [8, 16, 40])
    def test_damped_generator_equality(self, n):
        m, w, g = 1.3, 0.7, 0.2
        sp = build_space(n, hbar=0.9, mass=m, omega=w)
        q, p = sp.qmat, sp.pmat
        s = quantize_qp(sp, damped_oscillator_dynop(m, w, g))
        sh = hamiltonian_generator(sp, PolynomialSymbol.harmonic(m, w))
        sf = superop_from_action(sp, lambda a: (1j * g / (2 * m * sp.hbar)) * (p @ q @ a - p @ a @ q
                                                                               + q @ a @ p - a @ q @ p))
        assert np.linalg.norm(s.mat - sh.mat - sf.mat) < 1e-12

    def test_lqp_form(self, space16):
        m, w, g = 1.0, 1.2, 0.3
        Q1, Q2 = q_super(space16, 1).mat, q_super(space16, 2).mat
        P1, P2 = p_super(space16, 1).mat, p_super(space16, 2).mat
        expected = (1j / m) * Q2 @ P1 - 1j * (m * w**2 * Q1 + (g / m) * Q2) @ P2
        got = quantize_qp(space16, damped_oscillator_dynop(m, w, g)).mat
        assert np.linalg.norm(got - expected) < 1e-12

    @given(st.lists(st.tuples(st.floats(-2, 2), st.integers(0, 2), st.integers(0, 2),
                              st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=5))
    @settings(max_examples=20, deadline=None)
    def test_derivative_terms_annihilate_identity(self, terms):
        sp = build_space(9)
        terms = [(c, a, b, cq, max(dp, 1 - cq)) for c, a, b, cq, dp in terms]
        s = quantize_qp(sp, DynOperator(terms))
        out = apply(s, sp.identity).mat
        assert np.linalg.norm(out) <= 1e-14 * max(1.0, np.linalg.norm(s.mat))

    def test_linear(self, space16, rng):
        a = DynOperator({k: rng.normal() for k in qp_monomials(2)})
        b = DynOperator({k: rng.normal() for k in qp_monomials(2)})
        lhs = quantize_qp(space16, 2.0 * a + (-0.5) * b).mat
        rhs = 2.0 * quantize_qp(space16, a).mat - 0.5 * quantize_qp(space16, b).mat
        assert np.linalg.norm(lhs - rhs) <= 1e-13 * np.linalg.norm(lhs)

    def test_pure_diffusion(self, rng):
        sp = build_space(10, hbar=0.7)
        d = 0.3
        s = quantize_qp(sp, fokker_planck_dynop(0, 0, 0, 0, 0, 0, d, 0))
        a = random_matrix(rng, 10)
        q = sp.qmat
        inner = q @ a - a @ q
        np.testing.assert_allclose(apply(s, sp.operator(a)).mat, -(d / sp.hbar**2) * (q @ inner - inner @ q),
                                   atol=1e-12)

    def test_constant_term(self, space16):
        s = quantize_qp(space16, fokker_planck_dynop(0, 0, 0, 0, 0, 0, 0, 1.0))
        np.testing.assert_array_equal(s.mat, identity_super(space16).mat)

    def test_degree4_embedding_measured(self, space16):
        # ordering of Q factors matters only near the truncation boundary
        m = interior_dim(16)
        worst = 0.0
        for a in range(5):
            sym = PolynomialSymbol.monomial(a, 4 - a)
            out = apply(quantize_qp(space16, multiplication_dynop(sym)), space16.identity).mat
            worst = max(worst, np.linalg.norm((out - weyl_quantize_poly(space16, sym).mat)[:m, :m]))
        print(f"QP-form degree-4 embedding interior deviation at N=16: {worst:.3e}")
        assert np.isfinite(worst)

    def test_degree3_embedding(self, space16):
        m = interior_dim(16)
        for total in range(4):
            for a in range(total + 1):
                sym = PolynomialSymbol.monomial(a, total - a)
                out = apply(quantize_qp(space16, multiplication_dynop(sym)), space16.identity).mat
                assert np.linalg.norm((out - weyl_quantize_poly(space16, sym).mat)[:m, :m]) < 1e-12


class TestQuantizeSymmetric:
    @pytest.mark.parametrize("n", [16, 32])
    def test_canonical_embedding(self, n):
        sp = build_space(n)
        m = interior_dim(n)
        for total in range(5):
            for a in range(total + 1):
                sym = PolynomialSymbol.monomial(a, total - a, 0.7)
                out = apply(quantize_symmetric(sp, multiplication_dynop(sym, SYMMETRIC)), sp.identity).mat
                assert np.linalg.norm((out - weyl_quantize_poly(sp, sym).mat)[:m, :m]) < 1e-12

    def test_pure_derivatives_agree(self, space16):
        terms = [(0.4, 0, 0, 2, 0), (-0.3, 0, 0, 0, 3), (0.2, 0, 0, 4, 0)]
        a = quantize_symmetric(space16, DynOperator(terms, SYMMETRIC)).mat
        b = quantize_qp(space16, DynOperator(terms, QP)).mat
        assert np.linalg.norm(a - b) < 1e-12

    def test_mixed_derivative_agrees_on_interior(self, space16):
        # the two orderings differ by [P1, P2] / 2, a truncation-boundary term
        terms = [(1.1, 0, 0, 1, 1)]
        a = quantize_symmetric(space16, DynOperator(terms, SYMMETRIC))
        b = quantize_qp(space16, DynOperator(terms, QP))
        assert np.linalg.norm(interior_cols(a - b)) < 1e-12

    def test_q_dq_ordering_difference(self, space16):
        # (Q(iP) + (iP)Q)/2 - Q(iP) = (i/2)[P, Q] = (i/2)(-i) Id = Id / 2 on interior operands
        L = {(1, 0, 1, 0): 1.0}
        diff = (quantize_symmetric(space16, DynOperator(L, SYMMETRIC))
                - quantize_qp(space16, DynOperator(L, QP)))
        block = interior_cols(diff)
        ref = interior_cols(0.5 * identity_super(space16))
        assert np.linalg.norm(block - ref) < 1e-12

    def test_degree_guard(self, space16):
        with pytest.raises(ValueError):
            quantize_symmetric(space16, DynOperator([(1.0, 3, 3, 2, 1)], SYMMETRIC))

    def test_wrong_form(self, space16):
        with pytest.raises(ValueError):
            quantize_symmetric(space16, DynOperator([(1.0, 1, 0, 0, 0)]))


class TestHamiltonianGenerator:
    def test_constant(self, space16):
        np.testing.assert_array_equal(hamiltonian_generator(space16, PolynomialSymbol.constant(3.0)).mat,
                                      zero_super(space16).mat)

    def test_heisenberg_q(self, space32):
        m = interior_dim(32)
        s = hamiltonian_generator(space32, PolynomialSymbol.harmonic(1.0, 1.0))
        out = apply(s, space32.qop).mat
        assert np.linalg.norm((out - space32.pmat / space32.mass)[:m, :m]) < 1e-12

    def test_matches_poisson_route(self, space32):
        H = PolynomialSymbol([(0.5, 0, 2), (0.8, 2, 0), (0.3, 1, 1)])
        a = quantize_qp(space32, poisson_generator(H))
        b = hamiltonian_generator(space32, H)
        assert np.linalg.norm(interior_cols(a - b)) < 1e-10

    def test_complex_rejected(self, space16):
        with pytest.raises(ValueError):
            hamiltonian_generator(space16, PolynomialSymbol([(1j, 2, 0)]))


class TestPoissonGenerator:
    def test_kinetic(self):
        assert poisson_generator(PolynomialSymbol([(0.25, 0, 2)])) == DynOperator([(0.5, 0, 1, 1, 0)])

    def test_qp(self):
        assert poisson_generator(PolynomialSymbol.monomial(1, 1)) == DynOperator(
            [(1.0, 1, 0, 1, 0), (-1.0, 0, 1, 0, 1)])

    def test_frictionless_damped(self):
        assert damped_oscillator_dynop(2.0, 0.5, 0.0) == poisson_generator(PolynomialSymbol.harmonic(2.0, 0.5))


class TestDamped:
    def test_three_terms(self):
        assert len(damped_oscillator_dynop(1.0, 1.0, 0.1).terms) == 3

    @pytest.mark.parametrize("args", [(0, 1, 0), (1, -1, 0), (1, 1, -0.1)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            damped_oscillator_dynop(*args)


class TestDequantize:
    def test_identity(self, space16):
        L = dequantize(space16, identity_super(space16), 3)
        assert L.terms.keys() == {(0, 0, 0, 0)}
        assert L.terms[(0, 0, 0, 0)] == pytest.approx(1.0, abs=1e-10)

    def test_round_trip(self, space16, rng):
        keys = qp_monomials(3)
        L = DynOperator({k: complex(rng.normal(), rng.normal()) for k in keys})
        k2, c, residual = dequantize_coefficients(space16, quantize_qp(space16, L), 3)
        assert max(abs(ci - L.coefficient(*k)) for k, ci in zip(k2, c)) < 1e-8
        assert residual < 1e-9

    def test_hamiltonian(self, space16):
        H = PolynomialSymbol.harmonic(1.0, 1.0)
        L = dequantize(space16, hamiltonian_generator(space16, H), 3)
        assert L.max_abs_difference(poisson_generator(H)) < 1e-6

    def test_degree_guard(self, space16):
        with pytest.raises(ValueError):
            dequantize(space16, identity_super(space16), 5)

    def test_rank_deficient_basis(self):
        # two levels cannot separate the 35 cubic basis superoperators
        sp = build_space(2)
        with pytest.raises(RankDeficientError):
            dequantize(sp, identity_super(sp), 3)

    def test_large_space_gram_route(self):
        sp = build_space(32)
        L = damped_oscillator_dynop(1.0, 1.0, 0.1)
        got = dequantize(sp, quantize_qp(sp, L), 2)
        assert got.max_abs_difference(L) < 1e-8
