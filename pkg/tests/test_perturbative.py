import math

import numpy as np
import pytest

from tpa import oracle
from tpa import perturbative as pt
from tpa.core import NormalizedParams, ParameterError, per_velocity_context

from conftest import build_pair, even_part, odd_part, rel_err, solve_pair


def _setup(delta=0.0, a=1.0, mu=1.0, phi=1.0, dbig=100.0, omega=0.0):
    p = NormalizedParams.build(delta_tilde=delta, a_ratio=a, mu=mu,
                               phi_tilde=phi, delta_big_tilde=dbig)
    return p, per_velocity_context(p, omega)


def _identity_rate(params, comps):
    """dc feeding rate implied by a rho20 harmonic pair."""
    combo = (params.phi1 * comps.term(2, 0, +1)
             - params.phi2 * comps.term(2, 0, -1))
    return 2.0 * params.mu * combo.imag


@pytest.fixture(scope="module")
def extraction_pair():
    pair = build_pair(delta=0.8, a=0.7, mu=1.3, phi=1.0, dbig=2e3)
    rho_plus, rho_minus = solve_pair(pair, 1.7)
    return pair[0], 1.7, rho_plus, rho_minus


def test_components_fill_hermitian_partners():
    p, ctx = _setup()
    comps = pt.order1_coherences(ctx, p)
    assert comps.term(0, 1, +1) == pytest.approx(-0.02)
    assert comps.term(0, 1, -1) == pytest.approx(+0.02)
    assert comps.term(1, 0, -1) == pytest.approx(-0.02)
    assert comps.term(2, 0, 1) == 0.0
    assert comps.term(0, 1, 2) == 0.0


def test_first_order_two_photon_coherence():
    p, ctx = _setup()
    comps = pt.order1_twophoton(ctx, p)
    assert comps.term(2, 1, 0) == pytest.approx(0.04j)
    assert comps.term(2, 1, +2) == pytest.approx(-0.02j)
    assert comps.term(1, 2, -2) == pytest.approx(+0.02j)


def test_second_order_dc_populations():
    p, ctx = _setup()
    comps = pt.order2_components(ctx, p)
    assert comps.term(2, 2, 0) == pytest.approx(4.8e-3)
    assert comps.term(0, 0, 0) == pytest.approx(1.6e-3)
    assert pt.upper_dc_series(p, 0.0, order=2) == pytest.approx(4.8e-3)


def test_third_order_dc_value_and_zeros():
    p, ctx = _setup(delta=1.0, a=0.0, mu=math.sqrt(2.0))
    assert pt.order3_upper_dc(ctx, p) == pytest.approx(1.6e-5)
    # the light shift needs unequal dipole moments and a drive
    p1, ctx1 = _setup(delta=1.0, a=0.5, mu=1.0, omega=0.9)
    assert pt.order3_upper_dc(ctx1, p1) == 0.0
    p0, ctx0 = _setup(delta=1.0, a=0.5, mu=1.4, phi=0.0, omega=0.9)
    assert pt.order3_upper_dc(ctx0, p0) == 0.0


def test_third_order_dc_is_odd_in_detuning():
    p, ctx = _setup(delta=0.7, a=0.6, mu=1.4, omega=1.3)
    p_r, ctx_r = _setup(delta=-0.7, a=0.6, mu=1.4, omega=-1.3)
    assert pt.order3_upper_dc(ctx_r, p_r) == pytest.approx(
        -pt.order3_upper_dc(ctx, p), rel=1e-12)


def test_series_shapes_and_order_guard():
    p, _ = _setup(delta=0.4, a=0.5)
    val = pt.upper_dc_series(p, 0.3)
    assert isinstance(val, float)
    arr = pt.upper_dc_series(p, np.array([0.0, 0.3, 1.0]))
    assert arr.shape == (3,)
    assert arr[1] == pytest.approx(val)
    for bad in (1, 4):
        with pytest.raises(ParameterError):
            pt.upper_dc_series(p, 0.3, order=bad)


def test_series_scales_exactly_by_order():
    base = dict(delta_tilde=1.0, a_ratio=0.6, mu=1.4, phi_tilde=1.0)
    near = NormalizedParams.build(delta_big_tilde=200.0, **base)
    far = NormalizedParams.build(delta_big_tilde=400.0, **base)
    om = 0.9
    d2_near = pt.upper_dc_series(near, om, order=2)
    d2_far = pt.upper_dc_series(far, om, order=2)
    assert rel_err(d2_far, d2_near / 4.0) < 1e-13
    t3_near = pt.upper_dc_series(near, om, order=3) - d2_near
    t3_far = pt.upper_dc_series(far, om, order=3) - d2_far
    assert rel_err(t3_far, t3_near / 8.0) < 1e-12


def test_second_order_even_in_inverted_ladder():
    base = dict(delta_tilde=0.8, a_ratio=0.7, mu=1.3, phi_tilde=1.0)
    plus = NormalizedParams.build(delta_big_tilde=150.0, **base)
    minus = NormalizedParams.build(delta_big_tilde=-150.0, **base)
    assert pt.upper_dc_series(plus, 1.1, order=2) == pytest.approx(
        pt.upper_dc_series(minus, 1.1, order=2), rel=1e-14)


def test_second_order_identity_between_coherence_and_dc():
    p, ctx = _setup(delta=0.8, a=0.7, mu=1.3, phi=1.1, dbig=2e3, omega=1.7)
    comps = pt.order2_components(ctx, p)
    rate = _identity_rate(p, comps)
    dc22 = pt.order2_components(ctx, p).term(2, 2, 0).real
    assert rel_err(rate, dc22) < 1e-12


def test_third_order_identity_vanishes_at_unit_mu():
    p, ctx = _setup(delta=0.8, a=0.7, mu=1.0, phi=1.0, dbig=2e3, omega=1.7)
    comps = pt.order3_coherences(ctx, p)
    assert abs(_identity_rate(p, comps)) < 1e-18


def test_third_order_identity_single_beam_closed_form():
    p, ctx = _setup(delta=0.9, a=0.0, mu=math.sqrt(2.0), dbig=2e3, omega=1.3)
    comps = pt.order3_coherences(ctx, p)
    assert rel_err(_identity_rate(p, comps), pt.order3_upper_dc(ctx, p)) < 1e-12


def test_solver_extraction_matches_low_orders(extraction_pair):
    p, omega, rho_plus, rho_minus = extraction_pair
    ctx = per_velocity_context(p, omega)
    c1 = pt.order1_coherences(ctx, p)
    t1 = pt.order1_twophoton(ctx, p)
    c2 = pt.order2_components(ctx, p)
    odd_targets = [(0, 1, +1, c1), (0, 1, -1, c1),
                   (2, 1, +2, t1), (2, 1, 0, t1), (2, 1, -2, t1)]
    for i, j, n, comps in odd_targets:
        got = odd_part(rho_plus, rho_minus, i, j, n)
        assert rel_err(got, comps.term(i, j, n)) < 1e-3, (i, j, n)
    even_targets = [(2, 0, +1), (2, 0, -1), (2, 0, +3), (2, 0, -3),
                    (0, 1, +1), (0, 1, -1), (0, 1, +3), (0, 1, -3),
                    (2, 2, 0), (0, 0, 0), (0, 0, +2), (0, 0, -2), (2, 1, 0)]
    for i, j, n in even_targets:
        got = even_part(rho_plus, rho_minus, i, j, n)
        assert rel_err(got, c2.term(i, j, n)) < 1e-3, (i, j, n)


def test_third_order_identity_matches_solver(extraction_pair):
    p, omega, rho_plus, rho_minus = extraction_pair
    ctx = per_velocity_context(p, omega)
    got = odd_part(rho_plus, rho_minus, 2, 2, 0).real
    want = _identity_rate(p, pt.order3_coherences(ctx, p))
    assert rel_err(got, want) < 1e-3


def test_third_order_dc_extraction_single_beam():
    pair = build_pair(delta=0.9, a=0.0, mu=math.sqrt(2.0), phi=1.0, dbig=2e3)
    rho_plus, rho_minus = solve_pair(pair, 1.3)
    p = pair[0]
    ctx = per_velocity_context(p, 1.3)
    got = odd_part(rho_plus, rho_minus, 2, 2, 0).real
    assert rel_err(got, pt.order3_upper_dc(ctx, p)) < 1e-3


def test_series_error_falls_two_orders_per_decade():
    for a in (0.0, 1.0):
        for delta in (0.0, 1.0):
            for omega in (0.0, 1.0):
                rels = []
                for dbig in (1e2, 1e3, 1e4):
                    p = NormalizedParams.build(
                        delta_tilde=delta, a_ratio=a, mu=1.0, phi_tilde=1.0,
                        delta_big_tilde=dbig)
                    rho = oracle.solve_steady_state(
                        oracle.SteadyStateProblem(p, omega, 9))
                    rels.append(rel_err(rho.dc(2, 2),
                                        pt.upper_dc_series(p, omega)))
                cell = (a, delta, omega)
                assert 20.0 < rels[0] / rels[1] < 500.0, cell
                assert 20.0 < rels[1] / rels[2] < 500.0, cell


def test_series_third_order_improves_single_beam():
    rels2, rels3 = [], []
    for dbig in (1e2, 1e3, 1e4):
        p = NormalizedParams.build(delta_tilde=1.0, a_ratio=0.0,
                                   mu=math.sqrt(2.0), phi_tilde=1.0,
                                   delta_big_tilde=dbig)
        rho = oracle.solve_steady_state(oracle.SteadyStateProblem(p, 0.7, 9))
        want = rho.dc(2, 2)
        rels2.append(rel_err(pt.upper_dc_series(p, 0.7, order=2), want))
        rels3.append(rel_err(pt.upper_dc_series(p, 0.7, order=3), want))
    # once the next order is negligible the light-shift term must dominate
    # the order-2 truncation error; at the tightest rung both are comparable
    assert all(r3 < 0.2 * r2 for r2, r3 in zip(rels2[1:], rels3[1:]))
    assert 20.0 < rels3[0] / rels3[1] < 500.0
    assert 20.0 < rels3[1] / rels3[2] < 500.0
