"""Center-manifold reduction at a diffusion-driven stability crossing.

Near the critical diffusion value the dynamics collapse onto the span of the
critical mode(s). Projecting the Taylor expansion of the kinetics onto that
span gives a scalar normal form

    x' = beta x + P x^2 + Q x^3

for a simple crossing, or a planar quadratic system

    x' = beta1 x + a20 x^2 + a11 x y + a02 y^2
    y' = beta2 y + b20 x^2 + b11 x y + b02 y^2

when two modes cross together. P comes from the quadratic self-interaction
of the critical mode; Q combines the slaved second-order response (solved
mode by mode) with the direct cubic term. The planar coefficients are
computed in two bookkeeping conventions that differ in which eigenfunction
integral multiplies the y-equation's quadratic terms; both are reported and
classification uses the tabulated set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    ConvergenceError,
    DegeneratePairingError,
    FixedPointSearchError,
    InvalidParameterError,
    SingularModeMatrixError,
)
from .kinetics import KineticModel
from .spectrum import (
    DomainSpec,
    SpectralMode,
    critical_vectors,
    eigenfunction,
    eigenpairs,
    mode_matrix,
    product_integral,
    square_norm,
)
from .stability import CriticalParams, critical_dv

__all__ = [
    "CriticalModeData",
    "CubicResult",
    "PlanarSet",
    "PlanarCoefficients",
    "ReducedSystem",
    "Branch",
    "PlanarFixedPoint",
    "Classification",
    "BifurcatedState",
    "critical_eigendata",
    "quadratic_coefficient_P",
    "cubic_coefficient_Q",
    "planar_coefficients",
    "reduce_at_criticality",
    "classify_transition",
    "bifurcated_state",
]

# Relative cutoff below which a projected coefficient counts as zero; the
# comparison scale is the sum of absolute contributions before cancellation.
_COEFF_RTOL = 1e-9


def _quad_vec(model: KineticModel, p, q) -> np.ndarray:
    """Componentwise p^T Q_c q; equals twice the symmetric form B(p, q)."""
    return np.array([p @ model.quad[0] @ q, p @ model.quad[1] @ q])


def _g2(model: KineticModel, p) -> np.ndarray:
    return 0.5 * _quad_vec(model, p, p)


def _g3(model: KineticModel, p) -> np.ndarray:
    return np.array(
        [np.einsum("ijk,i,j,k->", model.cubic[0], p, p, p) / 6.0,
         np.einsum("ijk,i,j,k->", model.cubic[1], p, p, p) / 6.0]
    )


def _quad_vec_abs(model: KineticModel, p, q) -> np.ndarray:
    """Entrywise-absolute bound on _quad_vec, immune to cancellation."""
    pa, qa = np.abs(p), np.abs(q)
    return np.array(
        [pa @ np.abs(model.quad[0]) @ qa, pa @ np.abs(model.quad[1]) @ qa]
    )


def _g3_abs(model: KineticModel, p) -> np.ndarray:
    pa = np.abs(p)
    return np.array(
        [np.einsum("ijk,i,j,k->", np.abs(model.cubic[0]), pa, pa, pa) / 6.0,
         np.einsum("ijk,i,j,k->", np.abs(model.cubic[1]), pa, pa, pa) / 6.0]
    )


@dataclass(frozen=True)
class CriticalModeData:
    """Eigendata of one critical mode at the crossing.

    xi spans the kernel of the mode matrix, xi_star the kernel of its
    transpose; norm_h = <xi, xi_star> * integral(e^2) normalizes every
    projection. residual records |M xi| relative to |M| as a singularity
    check.
    """

    model: KineticModel
    du: float
    dv_star: float
    mode: SpectralMode
    xi: np.ndarray
    xi_star: np.ndarray
    pairing: float
    norm_h: float
    residual: float

    def beta_of(self, dv: float) -> float:
        """Re of the leading eigenvalue of this mode's matrix at dv."""
        return mode_matrix(self.model, self.du, dv, self.mode.lam).beta2.real


def critical_eigendata(
    model: KineticModel,
    domain: DomainSpec,
    du: float,
    critical: CriticalParams,
) -> list[CriticalModeData]:
    """Eigenvectors, adjoint vectors and normalizations for each critical mode."""
    out = []
    for mode in critical.critical_modes:
        mm = mode_matrix(model, du, critical.dv_star, mode.lam)
        xi, xi_star = critical_vectors(model, du, critical.dv_star, mode.lam)
        pairing = float(xi @ xi_star)
        e2 = square_norm(domain, mode)
        scale = float(np.linalg.norm(xi) * np.linalg.norm(xi_star)) * e2
        if abs(pairing) * e2 <= 1e-12 * scale:
            raise DegeneratePairingError(
                f"eigenvector pairing collapsed for mode {mode.indices}"
            )
        mnorm = np.abs(mm.matrix).max()
        residual = float(np.abs(mm.matrix @ xi).max() / (mnorm * np.abs(xi).max()))
        out.append(
            CriticalModeData(
                model=model,
                du=float(du),
                dv_star=critical.dv_star,
                mode=mode,
                xi=xi,
                xi_star=xi_star,
                pairing=pairing,
                norm_h=pairing * e2,
                residual=residual,
            )
        )
    return out


def quadratic_coefficient_P(
    model: KineticModel, domain: DomainSpec, data: CriticalModeData
) -> float:
    """Coefficient of x^2 in the scalar reduced equation.

    Vanishes identically whenever the critical eigenfunction integrates its
    own square to zero over the domain (every symmetric mode).
    """
    e3 = product_integral(domain, (data.mode,) * 3)
    proj = float(data.xi_star @ _g2(model, data.xi))
    return proj * e3 / data.norm_h


@dataclass(frozen=True)
class CubicResult:
    """Cubic coefficient with its two contributions.

    q_cross is the slaved second-order response term alone; q_direct the
    projection of the model's own cubic tensor. total = q_cross + q_direct
    is what classification uses. psi maps each coupled mode to its response
    vector; scale is the cancellation-free magnitude used for zero tests.
    """

    total: float
    q_cross: float
    q_direct: float
    psi: tuple[tuple[SpectralMode, np.ndarray], ...]
    scale: float


def cubic_coefficient_Q(
    model: KineticModel,
    domain: DomainSpec,
    data: CriticalModeData,
    n_modes: int = 32,
) -> CubicResult:
    """Coefficient of x^3 in the scalar reduced equation.

    Requires the quadratic self-interaction integral of the critical mode to
    vanish (otherwise the x^2 term dominates and the cubic normal form does
    not apply). The slaved response is solved mode by mode; because the
    kinetics are polynomial and the basis trigonometric, only finitely many
    modes couple, and the result is checked against a doubled enumeration.
    """
    if n_modes < 8:
        raise InvalidParameterError("n_modes must be >= 8")
    e3 = product_integral(domain, (data.mode,) * 3)
    e2 = square_norm(domain, data.mode)
    if abs(e3) > 1e-12 * e2 * np.sqrt(e2):
        raise InvalidParameterError(
            "cubic reduction needs a vanishing quadratic self-interaction integral"
        )

    def assemble(count: int):
        modes = eigenpairs(domain, count)
        q_src = _g2(model, data.xi)
        cross = 0.0
        scale = 0.0
        psi_list = []
        for mode in modes:
            if mode.indices == data.mode.indices:
                continue
            overlap = product_integral(domain, (data.mode, data.mode, mode))
            if overlap == 0.0:
                continue
            mj = mode_matrix(model, data.du, data.dv_star, mode.lam)
            mnorm = np.abs(mj.matrix).max()
            if abs(mj.det) <= 1e-12 * mnorm**2:
                raise SingularModeMatrixError(
                    f"mode {mode.indices} is singular at dv_star; cannot slave it"
                )
            c_j = overlap / square_norm(domain, mode)
            psi = np.linalg.solve(mj.matrix, -c_j * q_src)
            psi_list.append((mode, psi))
            term = float(data.xi_star @ _quad_vec(model, data.xi, psi)) * overlap
            cross += term
            scale += (
                float(np.abs(data.xi_star) @ _quad_vec_abs(model, data.xi, psi))
                * abs(overlap)
            )
        e4 = product_integral(domain, (data.mode,) * 4)
        direct = float(data.xi_star @ _g3(model, data.xi)) * e4
        scale += float(np.abs(data.xi_star) @ _g3_abs(model, data.xi)) * e4
        h = data.norm_h
        return cross / h, direct / h, tuple(psi_list), scale / abs(h)

    q_cross, q_direct, psi, scale = assemble(n_modes)
    q_cross2, q_direct2, _, _ = assemble(2 * n_modes)
    total = q_cross + q_direct
    total2 = q_cross2 + q_direct2
    if abs(total - total2) > 1e-6 * max(abs(total2), 1e-300):
        raise ConvergenceError(
            f"cubic coefficient not converged: {total:g} at {n_modes} modes vs "
            f"{total2:g} at {2 * n_modes}"
        )
    return CubicResult(total, q_cross, q_direct, psi, scale)


@dataclass(frozen=True)
class PlanarSet:
    """One convention's six planar quadratic coefficients."""

    a20: float
    a11: float
    a02: float
    b20: float
    b11: float
    b02: float

    def as_tuple(self):
        return (self.a20, self.a11, self.a02, self.b20, self.b11, self.b02)


@dataclass(frozen=True)
class PlanarCoefficients:
    """Planar reduction data for a double crossing.

    tabulated follows the coefficient table convention in which the
    y-equation's x^2 and y^2 terms carry the integrals of e2^3 and e1^2 e2
    respectively; direct is the plain Galerkin projection (those two
    integrals swapped). s1, s2, s3 are the first-component quadratic
    interaction scalars; h1, h2 the projection normalizations.
    """

    tabulated: PlanarSet
    direct: PlanarSet
    s1: float
    s2: float
    s3: float
    h1: float
    h2: float
    i111: float
    i112: float
    i122: float
    i222: float
    scale: float


def planar_coefficients(
    model: KineticModel,
    domain: DomainSpec,
    data1: CriticalModeData,
    data2: CriticalModeData,
) -> PlanarCoefficients:
    """Quadratic coefficients of the two-mode reduced system."""
    xi, eta = data1.xi, data2.xi
    m1, m2 = data1.mode, data2.mode
    i111 = product_integral(domain, (m1, m1, m1))
    i112 = product_integral(domain, (m1, m1, m2))
    i122 = product_integral(domain, (m1, m2, m2))
    i222 = product_integral(domain, (m2, m2, m2))
    g2_xi = _g2(model, xi)
    g2_eta = _g2(model, eta)
    mix = _quad_vec(model, xi, eta)

    p1_ss = float(data1.xi_star @ g2_xi)
    p1_mix = float(data1.xi_star @ mix)
    p1_tt = float(data1.xi_star @ g2_eta)
    p2_ss = float(data2.xi_star @ g2_xi)
    p2_mix = float(data2.xi_star @ mix)
    p2_tt = float(data2.xi_star @ g2_eta)
    h1, h2 = data1.norm_h, data2.norm_h

    tabulated = PlanarSet(
        a20=p1_ss * i111 / h1,
        a11=p1_mix * i112 / h1,
        a02=p1_tt * i122 / h1,
        b20=p2_ss * i222 / h2,
        b11=p2_mix * i122 / h2,
        b02=p2_tt * i112 / h2,
    )
    direct = PlanarSet(
        a20=tabulated.a20,
        a11=tabulated.a11,
        a02=tabulated.a02,
        b20=p2_ss * i112 / h2,
        b11=p2_mix * i122 / h2,
        b02=p2_tt * i222 / h2,
    )
    # Cancellation-free magnitude for degeneracy decisions.
    imax = max(abs(i111), abs(i112), abs(i122), abs(i222))
    pscale = max(
        float(np.abs(data1.xi_star) @ _quad_vec_abs(model, xi, xi)) * 0.5,
        float(np.abs(data1.xi_star) @ _quad_vec_abs(model, xi, eta)),
        float(np.abs(data2.xi_star) @ _quad_vec_abs(model, eta, eta)) * 0.5,
    )
    scale = pscale * imax / min(abs(h1), abs(h2))
    return PlanarCoefficients(
        tabulated=tabulated,
        direct=direct,
        s1=float(g2_xi[0]),
        s2=float(mix[0]),
        s3=float(g2_eta[0]),
        h1=h1,
        h2=h2,
        i111=i111,
        i112=i112,
        i122=i122,
        i222=i222,
        scale=scale,
    )


@dataclass(frozen=True)
class ReducedSystem:
    """Normal form on the center manifold at the crossing.

    kind is "scalar-quadratic", "scalar-cubic", "planar" or "degenerate".
    Scalar kinds populate P (and Q for the cubic case); planar populates
    planar. When a coordinate axis of the planar system is invariant and
    its restricted quadratic term vanishes identically (the resonant
    mode-pair layout), the corresponding axis cubic is computed as well;
    without it the quadratic truncation cannot decide stability along that
    axis. data holds the per-mode eigendata needed to evaluate beta away
    from criticality.
    """

    kind: str
    data: tuple[CriticalModeData, ...]
    P: Optional[float] = None
    Q: Optional[CubicResult] = None
    planar: Optional[PlanarCoefficients] = None
    axis_cubic_x: Optional[CubicResult] = None
    axis_cubic_y: Optional[CubicResult] = None
    n_modes: int = 0


def reduce_at_criticality(
    model: KineticModel,
    domain: DomainSpec,
    du: float,
    critical: Optional[CriticalParams] = None,
    mode_count: int = 64,
    n_modes: int = 32,
) -> ReducedSystem:
    """Compute the reduced normal form at the critical diffusion value."""
    if critical is None:
        critical = critical_dv(model, domain, du, mode_count)
    data = critical_eigendata(model, domain, du, critical)

    if len(data) >= 2:
        if len(data) > 2:
            raise InvalidParameterError(
                f"{len(data)} modes cross together; only simple and double "
                "crossings are supported"
            )
        coeffs = planar_coefficients(model, domain, data[0], data[1])
        tol = _COEFF_RTOL * max(coeffs.scale, 1e-300)
        degenerate = all(abs(c) <= tol for c in coeffs.tabulated.as_tuple() + coeffs.direct.as_tuple())
        ax_x = ax_y = None
        if not degenerate:
            # e1^3 and e1^2 e2 both zero: the x axis is flow-invariant with
            # no quadratic term on it, so its stability needs the cubic.
            if coeffs.i111 == 0.0 and coeffs.i112 == 0.0:
                ax_x = cubic_coefficient_Q(model, domain, data[0], n_modes)
            if coeffs.i222 == 0.0 and coeffs.i122 == 0.0:
                ax_y = cubic_coefficient_Q(model, domain, data[1], n_modes)
        return ReducedSystem(
            kind="degenerate" if degenerate else "planar",
            data=tuple(data),
            planar=coeffs,
            axis_cubic_x=ax_x,
            axis_cubic_y=ax_y,
            n_modes=n_modes,
        )

    d = data[0]
    e3 = product_integral(domain, (d.mode,) * 3)
    p_val = quadratic_coefficient_P(model, domain, d)
    p_scale = (
        0.5
        * float(np.abs(d.xi_star) @ _quad_vec_abs(model, d.xi, d.xi))
        * abs(e3)
        / abs(d.norm_h)
    )
    if abs(p_val) > _COEFF_RTOL * max(p_scale, 1e-300):
        return ReducedSystem(kind="scalar-quadratic", data=(d,), P=p_val, n_modes=n_modes)
    if p_scale > 0.0:
        # Nonzero self-interaction integral with a cancelling projection:
        # the quadratic term is absent but the cubic solve would need a
        # generalized inverse at the critical mode; treat as degenerate.
        return ReducedSystem(kind="degenerate", data=(d,), P=p_val, n_modes=n_modes)
    q_res = cubic_coefficient_Q(model, domain, d, n_modes)
    if abs(q_res.total) <= _COEFF_RTOL * max(q_res.scale, 1e-300):
        return ReducedSystem(kind="degenerate", data=(d,), P=p_val, Q=q_res, n_modes=n_modes)
    return ReducedSystem(kind="scalar-cubic", data=(d,), P=p_val, Q=q_res, n_modes=n_modes)


# ---------------------------------------------------------------------------
# Classification and bifurcated states.


@dataclass(frozen=True)
class Branch:
    """A nonzero fixed point of the scalar normal form."""

    amplitude: float
    attractor: bool


@dataclass(frozen=True)
class PlanarFixedPoint:
    """Fixed point of the planar system with its linearization."""

    x: float
    y: float
    jac: tuple[float, float, float, float]  # (A1, A2, A3, A4) row-major
    attractor: bool


@dataclass(frozen=True)
class Classification:
    """Transition type plus the fixed-point structure at given betas.

    transition_type: "continuous" (supercritical pitchfork), "jump"
    (subcritical), "mixed" (one-sided/transcritical structure), or "none".
    branches holds Branch entries for scalar kinds and PlanarFixedPoint
    entries for the planar kind; planar branches include the cubic pair on
    a resonant axis when the reduction carries one, and an attracting axis
    branch classifies as "continuous".
    """

    transition_type: str
    betas: tuple[float, ...]
    branches: tuple
    origin_attractor: bool


def classify_transition(reduced: ReducedSystem, betas=None) -> Classification:
    """Classify the transition and enumerate normal-form fixed points.

    betas defaults to criticality (all zero), where every amplitude
    vanishes; pass the values at an offset parameter to get the local
    branch structure there.
    """
    if betas is None:
        betas = (0.0,) * len(reduced.data)
    betas = tuple(float(b) for b in betas)
    if len(betas) != len(reduced.data):
        raise InvalidParameterError("betas length does not match critical mode count")

    if reduced.kind == "degenerate":
        return Classification("none", betas, (), all(b < 0 for b in betas))

    if reduced.kind == "scalar-quadratic":
        (beta,) = betas
        branches = ()
        if beta != 0.0:
            x0 = -beta / reduced.P
            # d/dx (beta x + P x^2) at x0 is -beta.
            branches = (Branch(x0, beta > 0.0),)
        return Classification("mixed", betas, branches, beta < 0.0)

    if reduced.kind == "scalar-cubic":
        (beta,) = betas
        q = reduced.Q.total
        kind = "continuous" if q < 0.0 else "jump"
        branches = ()
        if beta != 0.0 and beta * q < 0.0:
            x0 = float(np.sqrt(-beta / q))
            # d/dx (beta x + Q x^3) at +-x0 is -2 beta.
            stable = beta > 0.0
            branches = (Branch(x0, stable), Branch(-x0, stable))
        return Classification(kind, betas, branches, beta < 0.0)

    # Planar: quadratic vector field at the given betas, plus cubic branches
    # on any resonant axis where the quadratic truncation is blind.
    c = reduced.planar.direct
    fps = _planar_fixed_points(betas[0], betas[1], c)
    axis_fps: list[PlanarFixedPoint] = []
    if reduced.axis_cubic_x is not None:
        axis_fps.extend(_axis_fixed_points(0, betas, c, reduced.axis_cubic_x.total))
    if reduced.axis_cubic_y is not None:
        axis_fps.extend(_axis_fixed_points(1, betas, c, reduced.axis_cubic_y.total))
    nonzero = tuple(p for p in fps if (p.x, p.y) != (0.0, 0.0)) + tuple(axis_fps)
    origin = next(p for p in fps if (p.x, p.y) == (0.0, 0.0))
    if any(p.attractor for p in fps if (p.x, p.y) != (0.0, 0.0)):
        kind = "mixed"
    elif any(p.attractor for p in axis_fps):
        # Attractor on a resonant axis: amplitude grows like sqrt(beta).
        kind = "continuous"
    elif nonzero:
        kind = "jump"
    else:
        kind = "none"
    return Classification(kind, betas, nonzero, origin.attractor)


def _planar_rhs(x, y, b1, b2, c: PlanarSet):
    return (
        b1 * x + c.a20 * x * x + c.a11 * x * y + c.a02 * y * y,
        b2 * y + c.b20 * x * x + c.b11 * x * y + c.b02 * y * y,
    )


def _planar_jac(x, y, b1, b2, c: PlanarSet):
    return (
        b1 + 2.0 * c.a20 * x + c.a11 * y,
        c.a11 * x + 2.0 * c.a02 * y,
        2.0 * c.b20 * x + c.b11 * y,
        b2 + c.b11 * x + 2.0 * c.b02 * y,
    )


def _planar_fixed_points(b1: float, b2: float, c: PlanarSet) -> tuple[PlanarFixedPoint, ...]:
    """All fixed points found by seeded damped Newton, origin included."""
    coef_max = max(abs(v) for v in c.as_tuple())
    beta_max = max(abs(b1), abs(b2))
    points: list[tuple[float, float]] = [(0.0, 0.0)]
    if beta_max > 0.0 and coef_max > 0.0:
        radius = 10.0 * beta_max / coef_max
        seeds = []
        # Closed-form axis branches where they exist.
        if c.a20 != 0.0:
            seeds.append((-b1 / c.a20, 0.0))
        if c.b02 != 0.0:
            seeds.append((0.0, -b2 / c.b02))
        grid = np.linspace(-radius, radius, 7)
        seeds.extend((x, y) for x in grid for y in grid if (x, y) != (0.0, 0.0))
        ftol = 1e-13 * max(beta_max * radius, coef_max * radius**2)
        for seed in seeds:
            z = _newton_2d(seed, b1, b2, c, ftol, 4.0 * radius)
            if z is None:
                continue
            if all(abs(z[0] - p[0]) + abs(z[1] - p[1]) > 1e-8 * radius for p in points):
                points.append(z)
    out = []
    for x, y in points:
        jac = _planar_jac(x, y, b1, b2, c)
        a1, a2, a3, a4 = jac
        attract = (a1 + a4 < 0.0) and (a1 * a4 - a2 * a3 > 0.0)
        out.append(PlanarFixedPoint(x, y, jac, attract))
    return tuple(out)


def _axis_fixed_points(
    axis: int, betas, c: PlanarSet, q: float
) -> tuple[PlanarFixedPoint, ...]:
    """Cubic branch pair on an invariant axis with no quadratic term.

    Exists when the on-axis growth rate and the axis cubic have opposite
    signs. The linearization mixes the restricted cubic rate with the
    transverse quadratic couplings, which is exactly what the escalated
    reduction provides.
    """
    b_on = betas[axis]
    if q == 0.0 or b_on * q >= 0.0:
        return ()
    amp = float(np.sqrt(-b_on / q))
    out = []
    for s in (amp, -amp):
        # On-axis rate d/ds (b s + q s^3) at s is b + 3 q s^2 = -2 b.
        if axis == 0:
            x, y = s, 0.0
            jac = (-2.0 * b_on, c.a11 * s, 2.0 * c.b20 * s, betas[1] + c.b11 * s)
        else:
            x, y = 0.0, s
            jac = (betas[0] + c.a11 * s, 2.0 * c.a02 * s, c.b11 * s, -2.0 * b_on)
        a1, a2, a3, a4 = jac
        attract = (a1 + a4 < 0.0) and (a1 * a4 - a2 * a3 > 0.0)
        out.append(PlanarFixedPoint(x, y, jac, attract))
    return tuple(out)


def _newton_2d(seed, b1, b2, c, ftol, bound):
    x, y = seed
    fx, fy = _planar_rhs(x, y, b1, b2, c)
    fnorm = max(abs(fx), abs(fy))
    for _ in range(60):
        if fnorm <= ftol:
            return (x, y)
        a1, a2, a3, a4 = _planar_jac(x, y, b1, b2, c)
        det = a1 * a4 - a2 * a3
        if det == 0.0 or not np.isfinite(det):
            return None
        dx = (-fx * a4 + fy * a2) / det
        dy = (-fy * a1 + fx * a3) / det
        step = 1.0
        while step > 1e-5:
            xn, yn = x + step * dx, y + step * dy
            gx, gy = _planar_rhs(xn, yn, b1, b2, c)
            gnorm = max(abs(gx), abs(gy))
            if gnorm < fnorm:
                x, y, fx, fy, fnorm = xn, yn, gx, gy, gnorm
                break
            step *= 0.5
        else:
            return None
        if max(abs(x), abs(y)) > bound:
            return None
    return (x, y) if fnorm <= ftol else None


@dataclass(frozen=True)
class BifurcatedState:
    """Leading-order bifurcated solution at an offset from criticality.

    components pairs each critical mode with its eigenvector and normal-form
    amplitude; sample() reconstructs the deviation fields. For a continuous
    transition the reported amplitude is the positive branch; its mirror
    image is also a solution.
    """

    kind: str
    transition_type: str
    delta: float
    dv: float
    betas: tuple[float, ...]
    amplitudes: tuple[float, ...]
    attractor: bool
    classification: Classification
    components: tuple[tuple[SpectralMode, np.ndarray, float], ...]

    def sample(self, domain: DomainSpec, axes):
        """Deviation fields (u1, v1) on a tensor grid."""
        shape = tuple(len(np.asarray(ax)) for ax in axes)
        u = np.zeros(shape if len(shape) > 1 else shape[0])
        v = np.zeros_like(u)
        for mode, xi, amp in self.components:
            e = eigenfunction(domain, mode, axes)
            u = u + amp * xi[0] * e
            v = v + amp * xi[1] * e
        return u, v

    def l2_norm(self, domain: DomainSpec) -> float:
        """L2 norm of the reconstructed deviation over the domain."""
        total = 0.0
        for mode, xi, amp in self.components:
            total += amp**2 * float(xi @ xi) * square_norm(domain, mode)
        return float(np.sqrt(total))


def bifurcated_state(reduced: ReducedSystem, delta: float) -> BifurcatedState:
    """Leading-order solution branch at dv = dv_star + delta.

    delta = 0 returns the zero state. For scalar kinds the branch amplitude
    follows the normal form; for the planar kind the attracting fixed point
    is selected (falling back to the largest-amplitude branch if none
    attracts).
    """
    data = reduced.data
    dv = data[0].dv_star + delta
    if dv <= 0.0:
        raise InvalidParameterError(f"dv = dv_star + delta = {dv:g} must be positive")
    betas = tuple(d.beta_of(dv) for d in data)
    cls = classify_transition(reduced, betas)

    if reduced.kind in ("degenerate",) or not cls.branches:
        amplitudes = (0.0,) * len(data)
        attractor = False
        chosen = None
    elif reduced.kind == "planar":
        attracting = [p for p in cls.branches if p.attractor]
        pool = attracting or list(cls.branches)
        chosen = max(pool, key=lambda p: p.x * p.x + p.y * p.y)
        amplitudes = (chosen.x, chosen.y)
        attractor = chosen.attractor
    else:
        positive = [b for b in cls.branches if b.amplitude > 0.0]
        chosen = positive[0] if positive else cls.branches[0]
        amplitudes = (chosen.amplitude,)
        attractor = chosen.attractor
    components = tuple(
        (d.mode, d.xi, amp) for d, amp in zip(data, amplitudes)
    )
    return BifurcatedState(
        kind=reduced.kind,
        transition_type=cls.transition_type,
        delta=float(delta),
        dv=float(dv),
        betas=betas,
        amplitudes=amplitudes,
        attractor=attractor,
        classification=cls,
        components=components,
    )
