"""Spectral certificate checks.

The two-coordinate reference model has closed-form certificates worked
out by hand at the top of the file; they pin down every code path before
the randomized properties run.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from lsicert.criteria import (
    CertificateError,
    CriteriaReport,
    block_lsi_constants,
    build_A_rho,
    criteria_report,
    cross_block_norms,
    op_norm,
    otto_reznikoff,
    solve_rho_marton,
    sup_interaction_norm,
    toeplitz_spectrum_report,
)
from lsicert.instances import (
    model_2d,
    random_attractive_chain,
    random_certified_model,
    random_quartic_model,
)
from lsicert.model import BlockPartition, GibbsModel, toeplitz_matrix

RHO_2D = 0.5   # hand derivation: ||A^rho|| = 0.5 / (1 - rho) hits 1 at 0.5


def product_model():
    prec = np.diag([1.0, 2.0, 3.0])
    part = BlockPartition(((0,), (1,), (2,)))
    return GibbsModel(partition=part, precision=prec, mean=np.zeros(3),
                      quartic=np.zeros(3))


def coupled_pair(c):
    prec = np.array([[1.0, c], [c, 1.0]])
    part = BlockPartition(((0,), (1,)))
    return GibbsModel(partition=part, precision=prec, mean=np.zeros(2),
                      quartic=np.zeros(2))


def frustrated_triple(a):
    prec = np.full((3, 3), a)
    np.fill_diagonal(prec, 1.0)
    part = BlockPartition(((0,), (1,), (2,)))
    return GibbsModel(partition=part, precision=prec, mean=np.zeros(3),
                      quartic=np.zeros(3))


def banded_model(m, diag, quartic=0.0):
    prec = toeplitz_matrix(m, diag, {1: 1.0, 2: -1.0})
    part = BlockPartition(tuple((i,) for i in range(m)))
    return GibbsModel(partition=part, precision=prec, mean=np.zeros(m),
                      quartic=np.full(m, float(quartic)))


# ---- building blocks ----

def test_block_constants_reference(model2d):
    assert_allclose(block_lsi_constants(model2d), [1.0, 1.0])


def test_block_constants_vector_blocks():
    prec = np.array([[2.0, 0.5, 0.0],
                     [0.5, 2.0, 0.0],
                     [0.0, 0.0, 4.0]])
    part = BlockPartition(((0, 1), (2,)))
    model = GibbsModel(partition=part, precision=prec, mean=np.zeros(3),
                       quartic=np.zeros(3))
    assert_allclose(block_lsi_constants(model), [1.5, 4.0])


def test_block_constants_banded():
    model = banded_model(4, 3.0, quartic=1e-6)
    assert_allclose(block_lsi_constants(model), np.full(4, 3.0))


def test_op_norm_cases():
    assert op_norm(np.zeros((2, 2))) == 0.0
    assert op_norm(np.array([[3.0, 0.0], [0.0, -4.0]])) == pytest.approx(4.0)
    assert op_norm(np.array([[0.0, 2.0]])) == pytest.approx(2.0)
    assert op_norm(np.zeros((0, 0))) == 0.0


def test_build_A_rho_reference(model2d):
    a0 = build_A_rho(model2d, 0.0)
    assert_allclose(a0, [[0.0, -0.5], [-0.5, 0.0]], atol=1e-15)
    a_half = build_A_rho(model2d, RHO_2D)
    assert_allclose(a_half, [[0.0, -1.0], [-1.0, 0.0]], atol=1e-12)
    assert sup_interaction_norm(model2d, RHO_2D) == pytest.approx(1.0,
                                                                  abs=1e-12)


def test_build_A_rho_rejects_rho_at_block_constant(model2d):
    with pytest.raises(CertificateError):
        build_A_rho(model2d, 1.0)


def test_build_A_rho_quartic_needs_probe(rng):
    model = random_quartic_model(rng, dim=3)
    with pytest.raises(ValueError):
        build_A_rho(model, 0.0)
    probe = (np.zeros(3), np.ones(3))
    a0 = build_A_rho(model, 0.0, probe=probe)
    assert a0.shape == (3, 3)


def test_cross_matrix_constant_in_probe_for_quartic(rng):
    # the quartic Hessian contribution is diagonal, so the cross-block
    # part never depends on where it is probed
    model = random_quartic_model(rng, dim=4)
    lo = sup_interaction_norm(model, 0.0,
                              probes=np.zeros((1, 4)))
    hi = sup_interaction_norm(model, 0.0,
                              probes=rng.normal(size=(3, 4)))
    assert lo == pytest.approx(hi, rel=1e-12)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25)
def test_interaction_norm_monotone_in_rho(seed):
    rng = np.random.default_rng(seed)
    model = random_certified_model(rng)
    rho_min = float(block_lsi_constants(model).min())
    rhos = np.linspace(0.0, 0.9 * rho_min, 5)
    norms = [sup_interaction_norm(model, float(r)) for r in rhos]
    assert all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))


# ---- interaction-matrix certificate ----

def test_solve_rho_marton_reference(model2d):
    assert solve_rho_marton(model2d) == pytest.approx(RHO_2D, abs=1e-9)


def test_solve_rho_marton_product_model():
    assert solve_rho_marton(product_model()) == pytest.approx(1.0, abs=0)


def test_solve_rho_marton_strong_coupling():
    for c in (0.9, -0.9):
        assert solve_rho_marton(coupled_pair(c)) == pytest.approx(0.1,
                                                                  abs=1e-9)


def test_solve_rho_marton_no_margin():
    with pytest.raises(CertificateError):
        solve_rho_marton(frustrated_triple(0.55))


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25)
def test_marton_tight_on_attractive_chains(seed):
    # non-positive couplings admit a sign-flip similarity to the
    # attractive ordering, making the certificate exactly lambda_min
    rng = np.random.default_rng(seed)
    model = random_attractive_chain(rng)
    lam_min = float(np.linalg.eigvalsh(model.precision)[0])
    assert solve_rho_marton(model) == pytest.approx(lam_min, abs=1e-8)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25)
def test_marton_sound_below_lambda_min(seed):
    rng = np.random.default_rng(seed)
    model = random_certified_model(rng)
    lam_min = float(np.linalg.eigvalsh(model.precision)[0])
    assert solve_rho_marton(model) <= lam_min * (1 + 1e-10) + 1e-12


# ---- block-matrix certificate ----

def test_otto_reznikoff_reference(model2d):
    assert otto_reznikoff(model2d) == pytest.approx(RHO_2D, abs=1e-9)


def test_otto_reznikoff_product_model():
    assert otto_reznikoff(product_model()) == pytest.approx(1.0, abs=0)


def test_otto_reznikoff_infeasible():
    with pytest.raises(CertificateError):
        otto_reznikoff(frustrated_triple(0.55))


def test_otto_reznikoff_closed_form_banded():
    # singleton blocks: largest feasible rho is the smallest eigenvalue
    # of diag(rho_k) - kappa, computable directly
    for m in (16, 64):
        model = banded_model(m, 4.5)
        kappa = np.abs(model.precision) - 4.5 * np.eye(m)
        expected = 4.5 - float(np.linalg.eigvalsh(kappa)[-1])
        assert otto_reznikoff(model) == pytest.approx(expected, abs=1e-8)


def test_marton_matches_or_banded():
    # flipping the sign of every odd coordinate maps this band pattern
    # onto its entrywise absolute value, so both certificates coincide
    model = banded_model(16, 4.5)
    assert solve_rho_marton(model) == pytest.approx(otto_reznikoff(model),
                                                    abs=1e-8)


def test_otto_reznikoff_banded_quartic_infeasible():
    model = banded_model(64, 3.0, quartic=1e-4)
    probes = np.zeros((1, 64))
    with pytest.raises(CertificateError):
        otto_reznikoff(model, probes=probes)
    with pytest.raises(CertificateError):
        solve_rho_marton(model, probes=probes)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25)
def test_or_never_exceeds_marton(seed):
    rng = np.random.default_rng(seed)
    model = random_certified_model(rng)
    try:
        rho_or = otto_reznikoff(model)
    except CertificateError:
        return
    assert rho_or <= solve_rho_marton(model) * (1 + 1e-8) + 1e-10


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25)
def test_or_matches_direct_eigensolve(seed):
    # for the bisection route vs the free closed form
    rng = np.random.default_rng(seed)
    model = random_certified_model(rng)
    rho_k = block_lsi_constants(model)
    kappa = cross_block_norms(model)
    direct = float(np.linalg.eigvalsh(np.diag(rho_k) - kappa)[0])
    try:
        rho_or = otto_reznikoff(model)
    except CertificateError:
        assert direct <= 1e-10
        return
    assert rho_or == pytest.approx(min(direct, float(rho_k.min())), abs=1e-8)


def test_cross_block_norms_reference(model2d):
    assert_allclose(cross_block_norms(model2d), [[0.0, 0.5], [0.5, 0.0]])


# ---- combined report ----

def test_criteria_report_reference(model2d):
    rep = criteria_report(model2d)
    assert rep.rho_k == (1.0, 1.0)
    assert rep.delta == pytest.approx(0.5, abs=1e-12)
    assert rep.norm_A0 == pytest.approx(0.5, abs=1e-12)
    assert rep.lambda_max_A0 == pytest.approx(0.5, abs=1e-12)
    assert rep.rho_marton == pytest.approx(RHO_2D, abs=1e-9)
    assert rep.rho_or == pytest.approx(RHO_2D, abs=1e-9)
    assert rep.certified
    assert rep.flags == ()


def test_criteria_report_product_flags():
    rep = criteria_report(product_model())
    assert rep.delta == 1.0
    assert "rho_marton_supremum" in rep.flags
    assert "rho_or_supremum" in rep.flags
    assert rep.rho_marton == pytest.approx(1.0, abs=0)


def test_criteria_report_no_certificate():
    rep = criteria_report(frustrated_triple(0.55))
    assert rep.delta == pytest.approx(-0.1, abs=1e-12)
    assert rep.rho_marton is None
    assert rep.rho_or is None
    assert not rep.certified
    assert "no_certificate" in rep.flags
    assert "or_infeasible" in rep.flags


def test_criteria_report_quartic_not_certified(rng):
    model = random_quartic_model(rng, dim=3)
    rep = criteria_report(model)
    assert "sampled_bounds" in rep.flags
    assert not rep.certified
    assert rep.lambda_max_A0 is None


def test_criteria_report_rejects_indefinite_block():
    prec = np.array([[1.0, 0.0, 0.0],
                     [0.0, 1.0, 3.0],
                     [0.0, 3.0, 1.0]])
    part = BlockPartition(((0,), (1, 2)))
    model = GibbsModel(partition=part, precision=prec, mean=np.zeros(3),
                       quartic=np.full(3, 0.5))
    with pytest.raises(CertificateError):
        criteria_report(model)


def test_report_invariant_violation_raises():
    with pytest.raises(ValueError):
        CriteriaReport(rho_k=(1.0,), delta=0.5, norm_A0=0.9,
                       rho_marton=None, rho_or=None, lambda_max_A0=None,
                       certified=False, flags=())
    with pytest.raises(ValueError):
        CriteriaReport(rho_k=(1.0,), delta=0.5, norm_A0=0.5,
                       rho_marton=2.0, rho_or=None, lambda_max_A0=None,
                       certified=True, flags=())


# ---- banded spectra ----

def test_toeplitz_report_reference_values():
    rep = toeplitz_spectrum_report(64, 0.0, {1: 1.0, 2: -1.0},
                                   grid_points=200_001)
    assert rep.max_symbol == pytest.approx(2.25, abs=1e-8)
    assert rep.min_symbol == pytest.approx(-4.0, abs=1e-12)
    assert rep.sup_abs_symbol == pytest.approx(4.0, abs=1e-12)
    assert rep.abs_max_symbol == pytest.approx(4.0, abs=1e-12)
    assert rep.note != ""

    # eigenvalue fields against a direct solve
    mat = toeplitz_matrix(64, 0.0, {1: 1.0, 2: -1.0})
    evals = np.linalg.eigvalsh(mat)
    assert rep.lambda_max_bm == pytest.approx(float(evals[-1]), abs=1e-12)
    assert rep.lambda_min_bm == pytest.approx(float(evals[0]), abs=1e-12)
    assert rep.svd_norm_bm == pytest.approx(float(np.abs(evals).max()),
                                            abs=1e-12)
    aevals = np.linalg.eigvalsh(np.abs(mat))
    assert rep.abs_lambda_max_bm == pytest.approx(float(aevals[-1]),
                                                  abs=1e-12)


def test_toeplitz_report_interlacing_and_monotone():
    band = {1: 1.0, 2: -1.0}
    prev = -np.inf
    for m in (8, 16, 32, 64):
        rep = toeplitz_spectrum_report(m, 0.0, band, grid_points=50_001)
        assert rep.min_symbol - 1e-9 <= rep.lambda_min_bm
        assert rep.lambda_max_bm <= rep.max_symbol + 1e-9
        assert rep.lambda_max_bm >= prev - 1e-12
        prev = rep.lambda_max_bm


def test_toeplitz_report_no_note_when_positive():
    rep = toeplitz_spectrum_report(16, 3.0, {1: -1.0}, grid_points=50_001)
    assert rep.min_symbol == pytest.approx(1.0, abs=1e-12)
    assert rep.max_symbol == pytest.approx(5.0, abs=1e-12)
    assert rep.note == ""


def test_toeplitz_report_rejects_tiny_sections():
    with pytest.raises(ValueError):
        toeplitz_spectrum_report(3, 0.0, {1: 1.0})
