"""Center-manifold reduction and transition classification."""

import numpy as np
import pytest

import turinglab as tl
from turinglab import DomainSpec, SchnakenbergParams, custom_model
from turinglab.errors import InvalidParameterError, SingularModeMatrixError
from turinglab.spectrum import square_norm

# The interval length 5.58 puts the fundamental mode exactly in the critical
# window of the (a, b) = (0.2, 1.3) kinetics; 9.8042... makes modes 1 and 2
# of the (0.2, 0.7) kinetics cross together (a resonant 1:2 pair).
PAIR_LENGTH = 9.8042230199321505


@pytest.fixture(scope="module")
def scalar_cubic(model_main, interval):
    return tl.reduce_at_criticality(model_main, interval, 1.0)


@pytest.fixture(scope="module")
def scalar_quadratic(model_main):
    domain = DomainSpec.interval(6.0, bc="dirichlet")
    return domain, tl.reduce_at_criticality(model_main, domain, 1.0)


@pytest.fixture(scope="module")
def resonant_pair():
    model = tl.schnakenberg_model(SchnakenbergParams(0.2, 0.7, 1.0))
    domain = DomainSpec.interval(PAIR_LENGTH)
    return model, domain, tl.reduce_at_criticality(model, domain, 1.0)


@pytest.fixture(scope="module")
def jump_system():
    # Zero quadratic, destabilizing u^3 feedback: the cubic drives escape.
    zero2 = np.zeros((2, 2))
    cubic1 = np.zeros((2, 2, 2))
    cubic1[0, 0, 0] = 6.0
    model = custom_model(
        (1.0, 1.0),
        [[1.0, 2.0], [-3.0, -2.0]],
        (zero2, zero2),
        (cubic1, np.zeros((2, 2, 2))),
        label="cubic-feedback",
    )
    domain = DomainSpec.interval(4.685867238194804)
    return model, domain, tl.reduce_at_criticality(model, domain, 1.0)


# ---------------------------------------------------------------------------
# Eigendata at the crossing.


def test_eigendata_vectors_and_normalization(model_main, interval):
    crit = tl.critical_dv(model_main, interval, 1.0, 64)
    (data,) = tl.critical_eigendata(model_main, interval, 1.0, crit)
    assert data.mode.indices == (1,)
    assert data.dv_star == crit.dv_star
    np.testing.assert_allclose(
        data.xi, [1.5, -0.2775691387767081], rtol=1e-13, atol=0.0
    )
    np.testing.assert_allclose(
        data.xi_star, [6.2446903894734564, 1.5], rtol=1e-13, atol=0.0
    )
    assert data.pairing == pytest.approx(float(data.xi @ data.xi_star), abs=0.0)
    assert data.norm_h == pytest.approx(24.972402434165897, rel=1e-13)
    assert data.norm_h == pytest.approx(
        data.pairing * square_norm(interval, data.mode), rel=1e-13
    )
    assert data.residual <= 1e-10


def test_eigendata_growth_rate_vanishes_at_threshold(scalar_cubic):
    data = scalar_cubic.data[0]
    assert abs(data.beta_of(data.dv_star)) <= 1e-12
    # Away from the crossing beta matches the mode matrix eigenvalue.
    dv = data.dv_star + 0.5
    assert data.beta_of(dv) == pytest.approx(0.00723835598145417, rel=1e-12)
    mm = tl.mode_matrix(data.model, 1.0, dv, data.mode.lam)
    assert data.beta_of(dv) == mm.beta2.real


# ---------------------------------------------------------------------------
# Scalar cubic normal form (symmetric interval mode).


def test_scalar_cubic_shape(scalar_cubic):
    assert scalar_cubic.kind == "scalar-cubic"
    assert scalar_cubic.P == 0.0
    q = scalar_cubic.Q
    assert q.total == pytest.approx(-0.2701697485041576, rel=1e-12)
    assert q.q_cross == pytest.approx(-0.021875467884117192, rel=1e-12)
    assert q.q_direct == pytest.approx(-0.2482942806200404, rel=1e-12)
    assert q.total == pytest.approx(q.q_cross + q.q_direct, rel=1e-14)


def test_scalar_cubic_slaved_modes_are_even(scalar_cubic):
    # The fundamental cosine couples only into modes 0 and 2.
    assert [mode.indices for mode, _ in scalar_cubic.Q.psi] == [(0,), (2,)]


def test_direct_cubic_term_closed_form(scalar_cubic, interval):
    # For these kinetics the only cubic monomial is u^2 v, so the direct
    # contribution is (xi_star . (1, -1)) xi0^2 xi1 * int(e^4) / norm_h
    # with int(e^4) = 3 s / 8 on the interval.
    data = scalar_cubic.data[0]
    s = interval.extents[0]
    g3 = data.xi[0] ** 2 * data.xi[1] * np.array([1.0, -1.0])
    expected = float(data.xi_star @ g3) * (3.0 * s / 8.0) / data.norm_h
    assert scalar_cubic.Q.q_direct == pytest.approx(expected, rel=1e-12)


def test_cubic_coefficient_truncation_invariant(model_main, interval):
    # The quadratic couples the critical mode into finitely many others,
    # so widening the slaved basis must not move the result.
    q32 = tl.reduce_at_criticality(model_main, interval, 1.0, n_modes=32).Q.total
    q64 = tl.reduce_at_criticality(model_main, interval, 1.0, n_modes=64).Q.total
    assert q32 == pytest.approx(q64, rel=1e-12)


def test_continuous_classification_and_branch_pair(scalar_cubic):
    beta = 0.00723835598145417
    cls = tl.classify_transition(scalar_cubic, (beta,))
    assert cls.transition_type == "continuous"
    amps = sorted(b.amplitude for b in cls.branches)
    expected = float(np.sqrt(-beta / scalar_cubic.Q.total))
    np.testing.assert_allclose(amps, [-expected, expected], rtol=1e-12)
    assert all(b.attractor for b in cls.branches)
    assert not cls.origin_attractor


def test_continuous_branch_loses_stability_below_threshold(scalar_cubic):
    cls = tl.classify_transition(scalar_cubic, (-0.004,))
    assert cls.transition_type == "continuous"
    assert cls.branches == ()
    assert cls.origin_attractor


def test_bifurcated_state_scalar(scalar_cubic, interval):
    state = tl.bifurcated_state(scalar_cubic, 0.5)
    assert state.kind == "scalar-cubic"
    assert state.transition_type == "continuous"
    assert state.dv == pytest.approx(scalar_cubic.data[0].dv_star + 0.5)
    assert state.betas[0] == pytest.approx(0.00723835598145417, rel=1e-12)
    assert state.amplitudes[0] == pytest.approx(0.16368225881359413, rel=1e-12)
    assert state.attractor

    # sample() reconstructs amp * xi * cos(pi x / s) on the grid.
    x = np.linspace(0.0, interval.extents[0], 101)
    u, v = state.sample(interval, (x,))
    profile = np.cos(np.pi * x / interval.extents[0])
    amp = state.amplitudes[0]
    xi = scalar_cubic.data[0].xi
    np.testing.assert_allclose(u, amp * xi[0] * profile, rtol=0.0, atol=1e-14)
    np.testing.assert_allclose(v, amp * xi[1] * profile, rtol=0.0, atol=1e-14)

    norm = state.l2_norm(interval)
    expected = abs(amp) * float(np.sqrt(xi @ xi)) * np.sqrt(interval.extents[0] / 2.0)
    assert norm == pytest.approx(expected, rel=1e-12)


def test_bifurcated_state_at_criticality_is_zero(scalar_cubic):
    state = tl.bifurcated_state(scalar_cubic, 0.0)
    assert state.amplitudes == (0.0,)
    assert not state.attractor


def test_bifurcated_state_rejects_nonpositive_dv(scalar_cubic):
    delta = -scalar_cubic.data[0].dv_star - 1.0
    with pytest.raises(InvalidParameterError):
        tl.bifurcated_state(scalar_cubic, delta)


# ---------------------------------------------------------------------------
# Scalar quadratic normal form (Dirichlet fundamental mode).


def test_scalar_quadratic_shape(scalar_quadratic):
    _, red = scalar_quadratic
    assert red.kind == "scalar-quadratic"
    assert red.Q is None
    assert red.data[0].dv_star == pytest.approx(22.773355256293154, rel=1e-12)
    assert red.P == pytest.approx(-0.03409510306571553, rel=1e-12)


def test_scalar_quadratic_matches_projection_quadrature(model_main, scalar_quadratic):
    # Independent route: project the full nonlinear residual of a small
    # multiple of the critical eigenfunction onto the adjoint mode and
    # Richardson-extrapolate the quadratic coefficient.
    domain, red = scalar_quadratic
    data = red.data[0]
    x = np.linspace(0.0, domain.extents[0], 40001)
    e = tl.eigenfunction(domain, data.mode, (x,))
    base = np.stack([data.xi[0] * e, data.xi[1] * e])

    def projected(eps):
        w = eps * base
        resid = tl.evaluate_kinetics(model_main, w) - model_main.jacobian @ w
        integrand = (data.xi_star[0] * resid[0] + data.xi_star[1] * resid[1]) * e
        return np.trapezoid(integrand, x) / eps**2

    p1, p2 = projected(1e-3), projected(5e-4)
    oracle = (4.0 * p2 - p1) / 3.0 / data.norm_h
    assert red.P == pytest.approx(oracle, rel=1e-2)


def test_transcritical_branch_swaps_stability(scalar_quadratic):
    _, red = scalar_quadratic
    above = tl.classify_transition(red, (0.01,))
    assert above.transition_type == "mixed"
    (branch,) = above.branches
    assert branch.amplitude == pytest.approx(-0.01 / red.P, rel=1e-12)
    assert branch.attractor
    assert not above.origin_attractor

    below = tl.classify_transition(red, (-0.01,))
    (branch,) = below.branches
    assert branch.amplitude == pytest.approx(0.01 / red.P, rel=1e-12)
    assert not branch.attractor
    assert below.origin_attractor


def test_bifurcated_state_transcritical(scalar_quadratic):
    _, red = scalar_quadratic
    state = tl.bifurcated_state(red, 0.5)
    assert state.transition_type == "mixed"
    assert state.betas[0] == pytest.approx(0.007695655841808424, rel=1e-12)
    assert state.amplitudes[0] == pytest.approx(0.2257114702652658, rel=1e-12)
    assert state.attractor


def test_cubic_requires_vanishing_self_interaction(model_main, scalar_quadratic):
    # The Dirichlet fundamental has a nonzero self-triple integral, so the
    # cubic solve is ill-posed for it.
    domain, red = scalar_quadratic
    with pytest.raises(InvalidParameterError, match="self-interaction"):
        tl.cubic_coefficient_Q(model_main, domain, red.data[0], 32)


# ---------------------------------------------------------------------------
# Resonant mode pair (planar normal form).


def test_pair_quadratic_sets(resonant_pair):
    _, domain, red = resonant_pair
    assert red.kind == "planar"
    assert [d.mode.indices for d in red.data] == [(1,), (2,)]
    coeffs = red.planar

    # Only the 1-1-2 triple survives on the interval, and it equals s/4.
    assert coeffs.i111 == 0.0
    assert coeffs.i222 == 0.0
    assert coeffs.i122 == 0.0
    assert coeffs.i112 == pytest.approx(domain.extents[0] / 4.0, rel=1e-14)

    np.testing.assert_allclose(
        coeffs.tabulated.as_tuple(),
        [0.0, 0.15244717234327812, 0.0, 0.0, 0.0, 0.22506496844817278],
        rtol=1e-12,
        atol=0.0,
    )
    np.testing.assert_allclose(
        coeffs.direct.as_tuple(),
        [0.0, 0.15244717234327812, 0.0, -0.05901381180992353, 0.0, 0.0],
        rtol=1e-12,
        atol=0.0,
    )


def test_pair_tabulated_and_direct_differ_in_second_row(resonant_pair):
    # The two constructions agree on the first equation but place the
    # second-row coupling on different monomials; they are not equivalent
    # and the dynamics below distinguishes them.
    _, _, red = resonant_pair
    tab, direct = red.planar.tabulated, red.planar.direct
    assert tab.a11 == direct.a11
    assert tab.b02 != 0.0 and direct.b02 == 0.0
    assert tab.b20 == 0.0 and direct.b20 != 0.0


def test_pair_escalates_resonant_axis_to_cubic(resonant_pair):
    _, _, red = resonant_pair
    # Mode 1 feeds mode 2 quadratically, so the x axis is not invariant and
    # gets no cubic; the even axis is invariant and needs one.
    assert red.axis_cubic_x is None
    assert red.axis_cubic_y is not None
    assert red.axis_cubic_y.total == pytest.approx(-0.44021471843951776, rel=1e-12)


def test_pair_classification_at_criticality(resonant_pair):
    _, _, red = resonant_pair
    cls = tl.classify_transition(red)
    assert cls.transition_type == "none"
    assert cls.branches == ()
    assert not cls.origin_attractor


def test_pair_attractor_on_even_axis(resonant_pair):
    _, _, red = resonant_pair
    state = tl.bifurcated_state(red, 0.3)
    assert state.transition_type == "continuous"
    np.testing.assert_allclose(
        state.betas,
        [0.005895996903241496, 0.0020562873589353714],
        rtol=1e-12,
    )
    assert state.amplitudes[0] == 0.0
    assert state.amplitudes[1] == pytest.approx(-0.06834545252285143, rel=1e-12)
    assert state.attractor

    # The attracting point sits on the even axis with a stable diagonal
    # linearization; its mirror image is a saddle.
    cls = state.classification
    on_axis = [b for b in cls.branches if b.x == 0.0 and b.y != 0.0]
    assert len(on_axis) == 2
    stable = [b for b in on_axis if b.attractor]
    assert len(stable) == 1
    np.testing.assert_allclose(
        stable[0].jac,
        [-0.004523074076388968, 0.0, 0.0, -0.004112574717870743],
        rtol=1e-12,
        atol=1e-18,
    )
    assert stable[0].y == pytest.approx(
        -np.sqrt(-state.betas[1] / red.axis_cubic_y.total), rel=1e-12
    )


def test_pair_cubic_solve_rejects_singular_slaved_mode(resonant_pair):
    # A cubic for mode 1 alone would have to slave mode 2, which is itself
    # singular at the shared threshold.
    model, domain, red = resonant_pair
    with pytest.raises(SingularModeMatrixError, match="singular"):
        tl.cubic_coefficient_Q(model, domain, red.data[0], 32)


def test_rectangle_double_crossing_is_degenerate(model_main, rect):
    # On the rectangle the two crossing modes have no quadratic overlap at
    # all, so the pair reduction cannot decide anything at second order.
    red = tl.reduce_at_criticality(model_main, rect, 1.0)
    assert red.kind == "degenerate"
    assert red.axis_cubic_x is None and red.axis_cubic_y is None
    assert all(c == 0.0 for c in red.planar.tabulated.as_tuple())
    assert all(c == 0.0 for c in red.planar.direct.as_tuple())
    state = tl.bifurcated_state(red, 0.4)
    assert state.transition_type == "none"
    assert state.amplitudes == (0.0, 0.0)
    assert not state.attractor


# ---------------------------------------------------------------------------
# Jump transitions.


def test_jump_classification(jump_system):
    _, _, red = jump_system
    assert red.kind == "scalar-cubic"
    assert red.P == 0.0
    assert red.Q.q_cross == 0.0
    assert red.Q.total == pytest.approx(0.7898979485566355, rel=1e-12)

    above = tl.classify_transition(red, (0.022867819502484288,))
    assert above.transition_type == "jump"
    assert above.branches == ()
    assert not above.origin_attractor

    below = tl.classify_transition(red, (-0.02,))
    assert below.transition_type == "jump"
    amps = sorted(b.amplitude for b in below.branches)
    assert amps[0] == pytest.approx(-amps[1], rel=1e-14)
    assert not any(b.attractor for b in below.branches)
    assert below.origin_attractor


def test_jump_threshold_location(jump_system):
    model, domain, red = jump_system
    crit = tl.critical_dv(model, domain, 1.0, 64)
    assert crit.dv_star == pytest.approx(19.79795897113271, rel=1e-12)
    assert crit.transition_class == "single"
    assert red.data[0].beta_of(crit.dv_star + 1.0) == pytest.approx(
        0.022867819502484288, rel=1e-12
    )


# ---------------------------------------------------------------------------
# Input validation.


def test_betas_length_must_match_mode_count(scalar_cubic):
    with pytest.raises(InvalidParameterError, match="betas"):
        tl.classify_transition(scalar_cubic, (0.01, 0.02))
