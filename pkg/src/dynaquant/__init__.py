"""Quantization of classical phase-space dynamics into superoperators on a
truncated Fock space, with classical grid counterparts and a simulation CLI."""
from .densecore import RankDeficientError, expm, kron, lstsq, unvec, vec
from .fockspace import (
    FockSpace,
    Operator,
    PolynomialSymbol,
    build_space,
    coherent_state,
    fock_state,
    interior_dim,
    jordan,
    lie,
    symmetrize_bruteforce,
    weyl_interior_dim,
    weyl_operator,
    weyl_quantize_poly,
    weyl_symbol,
)
from .superspace import (
    SYMPLECTIC,
    SuperOperator,
    hs_inner,
    identity_super,
    left_mult,
    p_super,
    q_super,
    restrict,
    right_mult,
    superop_adjoint,
    v_super,
)
from .dynquant import (
    QP,
    SYMMETRIC,
    DynOperator,
    damped_oscillator_dynop,
    dequantize,
    fokker_planck_dynop,
    hamiltonian_generator,
    poisson_generator,
    quantize_qp,
    quantize_symmetric,
)
from .classical import GridSymbol, PhaseGrid, apply_dynop_grid, evolve_classical, poisson_bracket_grid

__version__ = "0.1.0"
