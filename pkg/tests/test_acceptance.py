"""End-to-end checks of the full analysis chain against independent oracles.

Every test here re-derives its target with test-local machinery (dense-grid
minimization, bisection, brute-force mode scans, a cosine Galerkin
integrator, long finite-difference runs) and pins the library result against
it with an explicit tolerance. Expected literals are frozen from audited
runs; a change in any of them is a behavior change, not noise.
"""
import time

import numpy as np
import pytest

import turinglab as tl
from turinglab import (
    DomainSpec,
    SchnakenbergParams,
    SimulationConfig,
    custom_model,
    schnakenberg_model,
)
from turinglab.simulator import amplitude_fit, growth_rate_probe, run


def _bisect(func, lo, hi, iters=80):
    """Sign-change bisection; func(lo) and func(hi) must differ in sign."""
    flo = func(lo)
    assert flo * func(hi) < 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if flo * func(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
            flo = func(lo)
    return 0.5 * (lo + hi)


def _rel_l2(domain, axes, fields, reference):
    """Relative L2 distance between two (u, v) deviation pairs on a grid."""
    (x,) = axes
    num = den = 0.0
    for got, want in zip(fields, reference):
        num += np.trapezoid((got - want) ** 2, x)
        den += np.trapezoid(want**2, x)
    return float(np.sqrt(num / den))


# ---------------------------------------------------------------------------
# 1. Worked-example window coefficients for the non-Turing Schnakenberg case.


def test_c01_reference_window_coefficients(model_case_b, rect):
    start = time.time()
    report = tl.turing_verdict(model_case_b, rect, 1.0, 1.0)
    assert report.d_coeff == pytest.approx(-2.5833, abs=5e-4)
    assert report.l_coeff == pytest.approx(-0.5816, abs=5e-4)
    assert report.verdict == "turing-stable"
    assert report.window is None
    assert time.time() - start < 1.0


# ---------------------------------------------------------------------------
# 2. Rectangle eigenvalue table against the quoted four-digit values.


def test_c02_rectangle_eigenvalue_table(rect):
    start = time.time()
    quoted = {
        (1, 0): 0.0987,
        (0, 1): 0.3948,
        (2, 0): 0.3948,
        (1, 1): 0.4935,
        (0, 2): 1.5791,
        (1, 2): 1.6778,
    }
    modes = {m.indices: m for m in tl.eigenpairs(rect, 64)}
    for indices, lam in quoted.items():
        assert modes[indices].lam == pytest.approx(lam, abs=5e-5)
    # The degenerate value 0.3948 must be reported as a multiplicity-2 group.
    assert modes[(0, 1)].multiplicity == 2
    assert modes[(2, 0)].multiplicity == 2
    assert modes[(0, 1)].lam == modes[(2, 0)].lam
    assert time.time() - start < 1.0


# ---------------------------------------------------------------------------
# 3. The published critical values for (a=0.1, b=0.5) fail recomputation;
#    the audit must agree with a dense-grid tangency oracle and flag the
#    positive kinetics trace.


def test_c03_published_critical_values_audit():
    start = time.time()
    params = SchnakenbergParams(a=0.1, b=0.5, r=1.0)
    model = schnakenberg_model(params)
    a = model.jacobian
    du = 1.0

    # Oracle: bisect Dv on the grid minimum of the dispersion polynomial.
    lams = np.linspace(1e-6, a[0, 0] / du, 40001)

    def min_h(dv):
        h = (a[0, 0] - du * lams) * (a[1, 1] - dv * lams) - a[0, 1] * a[1, 0]
        return float(h.min())

    dv0_oracle = _bisect(min_h, 1.0, 1000.0)
    h_at = (a[0, 0] - du * lams) * (a[1, 1] - dv0_oracle * lams) - a[0, 1] * a[1, 0]
    kc0_oracle = float(lams[np.argmin(h_at)])

    audit = tl.schnakenberg_reference_audit(params, du=du)
    assert audit.dv0 == pytest.approx(dv0_oracle, abs=1e-3)
    assert audit.kc0 == pytest.approx(kc0_oracle, abs=1e-3)
    assert audit.dv0 == pytest.approx(4.2514, abs=1e-3)
    assert audit.kc0 == pytest.approx(0.2910, abs=1e-3)
    assert audit.tangency_defect == pytest.approx(0.0, abs=1e-9)

    # Both sets of numbers are reported, and they disagree far beyond the
    # oracle tolerance: the quoted closed form is not the tangency solution.
    assert audit.dv0_quoted == pytest.approx(5.1648, abs=1e-4)
    assert audit.kc0_quoted == pytest.approx(0.2985, abs=1e-4)
    assert abs(audit.dv0 - audit.dv0_quoted) > 0.5
    assert abs(audit.kc0 - audit.kc0_quoted) > 5e-3
    assert abs(audit.tangency_defect_quoted) > 0.05

    # The standing hypothesis (stable kinetics) is violated at these values.
    assert audit.trace_a == pytest.approx(0.3067, abs=1e-3)
    assert not audit.hypothesis_ok
    assert time.time() - start < 5.0


# ---------------------------------------------------------------------------
# 4. Verdicts agree exactly with a brute-force dispersion sign scan.


def test_c04_verdict_matches_brute_force_scan(rect):
    start = time.time()
    rng = np.random.Generator(np.random.Philox(20260822))
    zero2 = np.zeros((2, 2))
    zero3 = np.zeros((2, 2, 2))
    lams = np.array([m.lam for m in tl.eigenpairs(rect, 200)])

    n_unstable = 0
    for _ in range(1000):
        while True:
            a = rng.uniform(-2.0, 2.0, size=(2, 2))
            trace = a[0, 0] + a[1, 1]
            det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
            if trace < -1e-3 and det > 1e-3:
                break
        du = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
        dv = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
        model = custom_model((0.0, 0.0), a, (zero2, zero2), (zero3, zero3))

        dets = (a[0, 0] - du * lams) * (a[1, 1] - dv * lams) - a[0, 1] * a[1, 0]
        brute = "turing-unstable" if np.any(dets < 0.0) else "turing-stable"
        verdict = tl.turing_verdict(model, rect, du, dv).verdict
        assert verdict == brute, (a.tolist(), du, dv, verdict, brute)
        n_unstable += verdict == "turing-unstable"

    # Both branches must actually be exercised by the seeded draw.
    assert n_unstable == 18
    assert time.time() - start < 30.0


# ---------------------------------------------------------------------------
# 5. Closed-form threshold equals a per-mode bisection oracle; the verdict
#    flips across it.


def test_c05_threshold_matches_bisection_and_flips(model_main, rect):
    start = time.time()
    a = model_main.jacobian
    du = 1.0
    crit = tl.critical_dv(model_main, rect, du, 64)

    def h_at(lam):
        return lambda dv: (a[0, 0] - du * lam) * (a[1, 1] - dv * lam) - a[0, 1] * a[1, 0]

    oracle = [_bisect(h_at(lam), 1.0, 1000.0) for lam in crit.bracket]
    for got, want in zip(crit.thresholds, oracle):
        assert got == pytest.approx(want, rel=1e-8)
    assert crit.dv_star == pytest.approx(min(oracle), rel=1e-6)
    assert crit.dv_star == pytest.approx(23.480538671309706, rel=1e-9)
    assert crit.transition_class == "double"
    assert {m.indices for m in crit.critical_modes} == {(0, 1), (2, 0)}

    below = tl.turing_verdict(model_main, rect, du, crit.dv_star * (1.0 - 1e-3))
    above = tl.turing_verdict(model_main, rect, du, crit.dv_star * (1.0 + 1e-3))
    assert below.verdict == "turing-stable"
    assert above.verdict == "turing-unstable"
    assert time.time() - start < 5.0


# ---------------------------------------------------------------------------
# 6. Exchange of stabilities: exactly the multiplicity-2 family crosses.


def test_c06_exchange_of_stabilities(model_main, rect):
    start = time.time()
    crit = tl.critical_dv(model_main, rect, 1.0, 64)
    cert = tl.check_pes(model_main, rect, 1.0, np.linspace(23.0, 24.0, 5))
    assert cert.status == "certified"
    assert cert.crossing_bracket[0] < crit.dv_star < cert.crossing_bracket[1]
    assert {m.indices for m in cert.critical_modes} == {(0, 1), (2, 0)}
    assert cert.second_max_re_beta == pytest.approx(-0.042872171331711506, rel=1e-9)
    assert cert.second_max_re_beta < -1e-3
    assert cert.runner_up.indices == (1, 1)

    # Direct scan at the threshold: the critical family sits at zero, every
    # other enumerated mode keeps a strictly negative leading eigenvalue.
    critical = {m.indices for m in crit.critical_modes}
    for mode in tl.eigenpairs(rect, 64):
        re_beta = tl.mode_matrix(model_main, 1.0, crit.dv_star, mode.lam).beta2.real
        if mode.indices in critical:
            assert abs(re_beta) <= 1e-8
        else:
            assert re_beta < -1e-3
    assert time.time() - start < 5.0


# ---------------------------------------------------------------------------
# 7. Measured growth rates track the linear eigenvalues across ten modes.


def test_c07_growth_rate_probe_matches_linear_theory(model_main):
    start = time.time()
    domain = DomainSpec.interval(20.0)
    du, dv = 1.0, 30.0

    checked = 0
    signs = set()
    for m in range(2, 12):
        lam = (m * np.pi / 20.0) ** 2
        beta = tl.mode_matrix(model_main, du, dv, lam).beta2
        assert beta.imag == 0.0
        beta = beta.real
        assert 0.004 <= abs(beta) <= 3.0
        window = 40.0 if beta > 0.0 else float(np.clip(4.0 / abs(beta), 2.0, 40.0))
        measured = growth_rate_probe(
            model_main, domain, du, dv, (m,), t_window=window, nx=128
        )
        assert measured == pytest.approx(beta, rel=0.05)
        checked += 1
        signs.add(beta > 0.0)

    assert checked == 10
    assert signs == {True, False}  # both stable and unstable modes probed
    assert time.time() - start < 120.0


# ---------------------------------------------------------------------------
# 8. Reduced cubic flow against an independent cosine-Galerkin integrator.


def _galerkin_flow(model, s, du, dv, kmax=32, nq=513, dt=2e-3):
    """Strang-split spectral integrator returning (advance, rhs, projectors).

    Linear parts advance exactly per mode via the 2x2 matrix exponential;
    the nonlinearity is projected by trapezoid quadrature and stepped with
    Heun's method.
    """
    a = model.jacobian
    ks = np.arange(kmax + 1)
    lams = (ks * np.pi / s) ** 2
    xq = np.linspace(0.0, s, nq)
    wq = np.full(nq, s / (nq - 1))
    wq[0] *= 0.5
    wq[-1] *= 0.5
    emat = np.cos(np.outer(ks, np.pi * xq / s))
    norms = np.where(ks == 0, s, s / 2.0)

    mats = np.array([a - lam * np.diag([du, dv]) for lam in lams])
    half = np.empty_like(mats)
    for i, mat in enumerate(mats):
        vals, vecs = np.linalg.eig(mat)
        half[i] = (vecs @ np.diag(np.exp(vals * 0.5 * dt)) @ np.linalg.inv(vecs)).real

    def g_proj(coef):
        w = coef @ emat
        g = tl.evaluate_kinetics(model, w) - a @ w
        return (g * wq) @ emat.T / norms

    def advance(coef, t_final):
        for _ in range(int(round(t_final / dt))):
            coef = np.einsum("kij,jk->ik", half, coef)
            k1 = g_proj(coef)
            k2 = g_proj(coef + dt * k1)
            coef = coef + 0.5 * dt * (k1 + k2)
            coef = np.einsum("kij,jk->ik", half, coef)
        return coef

    def rhs(coef):
        return np.einsum("kij,jk->ik", mats, coef) + g_proj(coef)

    return advance, rhs


def test_c08_reduction_matches_galerkin_flow(model_main, interval):
    start = time.time()
    crit = tl.critical_dv(model_main, interval, 1.0, 64)
    red32 = tl.reduce_at_criticality(model_main, interval, 1.0, critical=crit,
                                     n_modes=32)
    red64 = tl.reduce_at_criticality(model_main, interval, 1.0, critical=crit,
                                     n_modes=64)
    assert red32.Q.total == pytest.approx(red64.Q.total, rel=1e-6)

    data = red32.data[0]
    q_cubic = red32.Q.total
    advance, rhs = _galerkin_flow(model_main, 5.58, 1.0, crit.dv_star)
    for x0 in (0.002, 0.005, 0.01):
        coef = np.zeros((2, 33))
        coef[:, 1] = x0 * data.xi
        coef = advance(coef, 30.0)
        x = float(data.xi_star @ coef[:, 1]) / data.pairing
        dxdt = float(data.xi_star @ rhs(coef)[:, 1]) / data.pairing
        assert abs(dxdt - q_cubic * x**3) <= 0.01 * abs(q_cubic * x**3)
    assert time.time() - start < 60.0


# ---------------------------------------------------------------------------
# 9. Transition types against long runs: square-root saturation when the
#    cubic coefficient is negative, escape when it is positive.


def test_c09_continuous_transition_scaling(model_main, interval):
    start = time.time()
    crit = tl.critical_dv(model_main, interval, 1.0, 64)
    red = tl.reduce_at_criticality(model_main, interval, 1.0, critical=crit)
    assert red.kind == "scalar-cubic"
    q_cubic = red.Q.total
    assert q_cubic < 0.0

    deltas = np.geomspace(0.2245, 2.245, 8)  # one decade past threshold
    betas = np.array([red.data[0].beta_of(crit.dv_star + d) for d in deltas])
    predicted = np.sqrt(-betas / q_cubic)
    fit = amplitude_fit(
        model_main, interval, 1.0, crit.dv_star + deltas, crit.dv_star, (1,),
        amplitude0=0.6 * predicted, t_end=np.minimum(16.0 / betas, 3600.0),
        nx=32, dt=5e-4,
    )
    np.testing.assert_allclose(np.abs(fit.amplitudes), predicted, rtol=0.15)
    assert fit.exponent == pytest.approx(0.5, abs=0.1)
    assert fit.exponent == pytest.approx(0.46988656056014505, rel=1e-9)
    assert time.time() - start < 600.0


def test_c09_jump_escapes_origin_neighborhood():
    start = time.time()
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
    crit = tl.critical_dv(model, domain, 1.0, 64)
    red = tl.reduce_at_criticality(model, domain, 1.0, critical=crit)
    assert red.Q.total == pytest.approx(0.7898979485566355, rel=1e-12)
    assert red.Q.total > 0.0

    result = run(SimulationConfig(
        model=model, domain=domain, du=1.0, dv=crit.dv_star + 5.0,
        nx=48, dt=2e-4, t_end=120.0,
        init="mode", mode_indices=(1,), mode_amplitude=5e-3,
    ))
    l2dev = result.diagnostics[:, 1]
    assert l2dev[0] < 1e-2  # starts inside the small neighborhood
    escaped = result.manifest["termination"] == "blow-up" or np.nanmax(l2dev) > 0.25
    assert escaped
    assert np.nanmax(l2dev) > 0.25
    assert time.time() - start < 600.0


# ---------------------------------------------------------------------------
# 10. Resonant interval pair: quadratic zero-pattern and the two-mode
#     bifurcated state against the long-time field.


def test_c10_resonant_pair_state_matches_simulation():
    start = time.time()
    model = schnakenberg_model(SchnakenbergParams(a=0.2, b=0.7, r=1.0))
    length = 9.8042230199321505  # tuned so modes (1,) and (2,) cross together
    domain = DomainSpec.interval(length)
    crit = tl.critical_dv(model, domain, 1.0, 64)
    red = tl.reduce_at_criticality(model, domain, 1.0, critical=crit)
    assert red.kind == "planar"
    assert crit.transition_class == "double"

    tab = red.planar.tabulated
    assert (tab.a20, tab.a02, tab.b20, tab.b11) == (0.0, 0.0, 0.0, 0.0)
    assert tab.a11 != 0.0

    state = tl.bifurcated_state(red, 0.3)
    attracting = [b for b in state.classification.branches if b.attractor]
    assert len(attracting) == 1
    a1, a2, a3, a4 = attracting[0].jac
    assert a1 + a4 < 0.0
    assert a1 * a4 - a2 * a3 > 0.0

    y0 = state.amplitudes[1]
    eta = red.data[1].xi
    result = run(SimulationConfig(
        model=model, domain=domain, du=1.0, dv=crit.dv_star + 0.3,
        nx=96, dt=3e-4, t_end=1400.0,
        init="mode", mode_indices=(2,), mode_amplitude=0.5 * y0 * eta[0],
    ))
    assert result.manifest["termination"] == "completed"

    x = np.linspace(0.0, length, 96)
    final = result.snapshots[-1]
    fields = (final.u - model.steady_state[0], final.v - model.steady_state[1])
    rel = _rel_l2(domain, (x,), fields, state.sample(domain, (x,)))
    assert rel <= 0.15
    assert rel == pytest.approx(0.0391, abs=5e-3)
    assert time.time() - start < 600.0


# ---------------------------------------------------------------------------
# 11. Integrator guarantees: discrete mass conservation and second-order
#     spatial convergence.


def test_c11_mass_conservation_per_thousand_steps(zero_kinetics, rect):
    start = time.time()
    result = run(SimulationConfig(
        model=zero_kinetics, domain=rect, du=1.0, dv=2.0,
        nx=48, ny=24, dt=1e-3, t_end=2.0,
        init="noise", epsilon=0.01, seed=7,
    ))
    n_steps = result.manifest["n_steps"]
    assert n_steps >= 2000
    for col in (2, 3):  # total u mass, total v mass
        mass = result.diagnostics[:, col]
        drift = np.max(np.abs(mass - mass[0])) / abs(mass[0])
        assert drift <= 1e-10 * (n_steps / 1000.0)
    assert time.time() - start < 120.0


def test_c11_grid_refinement_convergence_order(zero_kinetics):
    start = time.time()
    length = 5.58
    domain = DomainSpec.interval(length)
    lam = (np.pi / length) ** 2
    amp, t_final = 0.01, 2.0

    errors = {}
    for nx in (33, 65):
        result = run(SimulationConfig(
            model=zero_kinetics, domain=domain, du=1.0, dv=2.0,
            nx=nx, dt=2e-5, t_end=t_final,
            init="mode", mode_indices=(1,), mode_amplitude=amp,
        ))
        x = np.linspace(0.0, length, nx)
        exact = 1.0 + amp * np.cos(np.pi * x / length) * np.exp(-lam * t_final)
        errors[nx] = float(np.max(np.abs(result.snapshots[-1].u - exact)))

    order = np.log2(errors[33] / errors[65])
    assert order >= 1.9
    assert order == pytest.approx(2.0, abs=0.05)
    assert time.time() - start < 120.0
