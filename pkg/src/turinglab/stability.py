"""Diffusion-driven instability analysis.

Everything here works off the dispersion polynomial of the two-component
system: for a spatial mode with Laplacian eigenvalue lam, the mode matrix is
A - lam diag(Du, Dv) and its determinant

    h(lam) = Du Dv lam^2 - D lam + det A,   D = Dv a11 + Du a22,

is negative exactly on the band of unstable wavenumbers. The critical value
of Dv (all else fixed) is where h first touches zero on the available
spectrum; on a bounded domain that happens at one of the two eigenvalues
bracketing the continuum minimizer, because the per-mode threshold is
U-shaped in lam.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    BracketFailureError,
    CrossingNotBracketedError,
    InvalidParameterError,
    KineticsUnstableError,
    NoCriticalValueError,
    PesViolationError,
)
from .kinetics import KineticModel, SchnakenbergParams, schnakenberg_model
from .spectrum import DomainSpec, SpectralMode, eigenpairs, mode_matrix

__all__ = [
    "StabilityReport",
    "CriticalParams",
    "PesCertificate",
    "ReferenceAudit",
    "REFERENCE_CASES",
    "dispersion",
    "instability_window",
    "turing_verdict",
    "per_mode_threshold",
    "critical_dv",
    "schnakenberg_critical_d",
    "check_pes",
    "h_profile",
    "schnakenberg_reference_audit",
]

# Relative tolerance for declaring two per-mode thresholds equal.
_THRESHOLD_RTOL = 1e-9

# Hard ceiling on spectrum auto-extension; generously above any physical case.
_MAX_MODES = 1 << 20


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of a fixed-parameter stability classification."""

    verdict: str  # "kinetics-unstable" | "turing-stable" | "turing-unstable"
    trace_a: float
    det_a: float
    d_coeff: float
    l_coeff: float
    kc: float
    window: Optional[tuple[float, float]]
    unstable: tuple[tuple[SpectralMode, float], ...]  # (mode, beta2)
    du: float
    dv: float
    modes_enumerated: int


@dataclass(frozen=True)
class CriticalParams:
    """Critical diffusion data for varying Dv with Du fixed.

    dv0/kc0 are the continuum tangency values; bracket holds the two
    eigenvalues surrounding kc0, thresholds their per-mode critical Dv
    (inf when a mode can never destabilize), dv_star the attained minimum.
    transition_class is "double" when two modes cross together, else
    "single".
    """

    dv0: float
    kc0: float
    bracket: tuple[float, float]
    thresholds: tuple[float, float]
    dv_star: float
    transition_class: str
    critical_modes: tuple[SpectralMode, ...]


@dataclass(frozen=True)
class PesCertificate:
    """Exchange-of-stabilities evidence on a Dv sampling grid."""

    status: str  # "certified" | "no-crossing"
    dv_star: Optional[float]
    crossing_bracket: Optional[tuple[float, float]]
    critical_modes: tuple[SpectralMode, ...]
    second_max_re_beta: Optional[float]
    runner_up: Optional[SpectralMode]


@dataclass(frozen=True)
class ReferenceAudit:
    """Recomputed Schnakenberg critical values next to the closed-form
    expression quoted in the literature, with tangency defects for both."""

    trace_a: float
    det_a: float
    hypothesis_ok: bool  # trace < 0 and det > 0
    dv0: Optional[float]
    kc0: Optional[float]
    tangency_defect: Optional[float]
    dv0_quoted: Optional[float]
    kc0_quoted: Optional[float]
    tangency_defect_quoted: Optional[float]


# Published figures for the standard worked examples, keyed by (a, b, r).
# Quoted as printed; the audit recomputes each from the definitions.
REFERENCE_CASES = {
    (0.1, 0.5, 1.0): {"dv0": 5.1648, "kc0": 0.2985},
    (1.0, 0.5, 1.0): {"d_coeff": -2.5833, "l_coeff": -0.5816, "du": 1.0, "dv": 1.0},
}


def _window_coeffs(model: KineticModel, du: float, dv: float):
    a = model.jacobian
    d_coeff = dv * a[0, 0] + du * a[1, 1]
    l_coeff = -model.det / (du * dv) + d_coeff**2 / (4.0 * du**2 * dv**2)
    kc = d_coeff / (2.0 * du * dv)
    return float(d_coeff), float(l_coeff), float(kc)


def dispersion(model: KineticModel, du: float, dv: float, lam) -> np.ndarray:
    """h(lam) = det of the mode matrix; negative on the unstable band."""
    lam = np.asarray(lam, dtype=float)
    d_coeff, _, _ = _window_coeffs(model, du, dv)
    return du * dv * lam**2 - d_coeff * lam + model.det


def instability_window(model: KineticModel, du: float, dv: float):
    """Open band (k-, k+) of unstable Laplacian eigenvalues, or None.

    None when the dispersion never goes negative (D <= 0 or the discriminant
    proxy L <= 0).
    """
    if not (du > 0.0 and dv > 0.0):
        raise InvalidParameterError("diffusion coefficients must be positive")
    d_coeff, l_coeff, kc = _window_coeffs(model, du, dv)
    if d_coeff <= 0.0 or l_coeff <= 0.0:
        return None
    half = np.sqrt(l_coeff)
    return (kc - half, kc + half)


def turing_verdict(
    model: KineticModel,
    domain: DomainSpec,
    du: float,
    dv: float,
    mode_count: int = 64,
) -> StabilityReport:
    """Classify (model, domain, Du, Dv) against diffusion-driven instability.

    The verdict is "turing-unstable" only when the kinetics are stable
    without diffusion and at least one domain eigenvalue falls inside the
    unstable band. The enumeration is extended automatically until it covers
    the band.
    """
    if mode_count < 1:
        raise InvalidParameterError("mode_count must be >= 1")
    d_coeff, l_coeff, kc = _window_coeffs(model, du, dv)
    window = instability_window(model, du, dv)
    kinetics_stable = model.trace < 0.0 and model.det > 0.0

    count = mode_count
    modes = eigenpairs(domain, count)
    if window is not None:
        while modes[-1].lam < window[1] and count < _MAX_MODES:
            count *= 2
            modes = eigenpairs(domain, count)

    unstable: list[tuple[SpectralMode, float]] = []
    if kinetics_stable and window is not None:
        for mode in modes:
            h = float(dispersion(model, du, dv, mode.lam))
            if h < 0.0:
                mm = mode_matrix(model, du, dv, mode.lam)
                unstable.append((mode, mm.beta2.real))
    if not kinetics_stable:
        verdict = "kinetics-unstable"
    elif unstable:
        verdict = "turing-unstable"
    else:
        verdict = "turing-stable"
    return StabilityReport(
        verdict=verdict,
        trace_a=model.trace,
        det_a=model.det,
        d_coeff=d_coeff,
        l_coeff=l_coeff,
        kc=kc,
        window=window,
        unstable=tuple(unstable),
        du=float(du),
        dv=float(dv),
        modes_enumerated=len(modes),
    )


def per_mode_threshold(model: KineticModel, du: float, lam: float) -> float:
    """Critical Dv at which mode lam becomes neutral, +inf if it never does.

    Finite exactly for 0 < lam < a11/Du; solves h(lam) = 0 for Dv.
    """
    a = model.jacobian
    a11 = float(a[0, 0])
    if lam <= 0.0 or du * lam >= a11:
        return float("inf")
    return (a[1, 1] * du * lam - model.det) / (du * lam * lam - a11 * lam)


def _tangency_point(model: KineticModel, du: float):
    """Continuum critical pair (Dv0, kc0) from the tangency quadratic
    a11^2 Dv^2 - q Dv + a22^2 Du^2 = 0, q = 4 Du det A - 2 a11 a22 Du."""
    a = model.jacobian
    a11, a22 = float(a[0, 0]), float(a[1, 1])
    det = model.det
    q = 4.0 * du * det - 2.0 * a11 * a22 * du
    disc = q * q - 4.0 * a11**2 * a22**2 * du**2
    if disc < 0.0:
        raise NoCriticalValueError("tangency quadratic has no real root")
    dv0 = (q + np.sqrt(disc)) / (2.0 * a11**2)
    kc0 = (a11 * dv0 + a22 * du) / (2.0 * du * dv0)
    return float(dv0), float(kc0)


def critical_dv(
    model: KineticModel,
    domain: DomainSpec,
    du: float,
    mode_count: int = 64,
) -> CriticalParams:
    """Smallest Dv at which some domain mode loses stability.

    Requires kinetics stable without diffusion and a11 > 0 (an activator).
    The minimum of the per-mode threshold over the spectrum is attained at
    one of the two eigenvalues bracketing kc0, by unimodality of the
    threshold on (0, a11/Du).
    """
    if not (du > 0.0):
        raise InvalidParameterError("du must be positive")
    if not (model.trace < 0.0 and model.det > 0.0):
        raise KineticsUnstableError(
            f"steady state not stable without diffusion: trace={model.trace:g}, det={model.det:g}"
        )
    a11 = float(model.jacobian[0, 0])
    if a11 <= 0.0:
        raise NoCriticalValueError(f"a11={a11:g} <= 0: no finite diffusion threshold")
    dv0, kc0 = _tangency_point(model, du)

    count = max(mode_count, 2)
    modes = eigenpairs(domain, count)
    while modes[-1].lam < kc0 and count < _MAX_MODES:
        count *= 2
        modes = eigenpairs(domain, count)
    if modes[-1].lam < kc0:
        raise BracketFailureError("spectrum enumeration could not reach kc0")

    # Distinct eigenvalue ladder (group representatives, ascending).
    ladder: list[float] = []
    for mode in modes:
        if not ladder or mode.lam - ladder[-1] > 1e-9 * max(1.0, ladder[-1]):
            ladder.append(mode.lam)
    j = next(i for i, lam in enumerate(ladder) if lam >= kc0)
    if j == 0:
        raise BracketFailureError(
            f"smallest eigenvalue {ladder[0]:g} already exceeds kc0={kc0:g}"
        )
    lam_lo, lam_hi = ladder[j - 1], ladder[j]
    thr_lo = per_mode_threshold(model, du, lam_lo)
    thr_hi = per_mode_threshold(model, du, lam_hi)
    if not (np.isfinite(thr_lo) or np.isfinite(thr_hi)):
        raise BracketFailureError(
            f"neither bracketing mode (lam={lam_lo:g}, {lam_hi:g}) admits a finite threshold"
        )
    dv_star = min(thr_lo, thr_hi)

    both = np.isfinite(thr_lo) and np.isfinite(thr_hi)
    equal_thresholds = both and abs(thr_lo - thr_hi) <= _THRESHOLD_RTOL * dv_star
    if equal_thresholds:
        critical_lams = [lam_lo, lam_hi]
    else:
        critical_lams = [lam_lo if thr_lo <= thr_hi else lam_hi]
    critical_modes = tuple(
        m
        for m in modes
        if any(abs(m.lam - lam) <= 1e-9 * max(1.0, lam) for lam in critical_lams)
    )
    double = equal_thresholds or any(m.multiplicity >= 2 for m in critical_modes)
    return CriticalParams(
        dv0=dv0,
        kc0=kc0,
        bracket=(lam_lo, lam_hi),
        thresholds=(thr_lo, thr_hi),
        dv_star=float(dv_star),
        transition_class="double" if double else "single",
        critical_modes=critical_modes,
    )


def schnakenberg_critical_d(
    params: SchnakenbergParams,
    domain: DomainSpec,
    mode_count: int = 64,
    du: float = 1.0,
) -> CriticalParams:
    """Critical Dv for the Schnakenberg kinetics (Du fixed, default 1)."""
    return critical_dv(schnakenberg_model(params), domain, du, mode_count)


def check_pes(
    model: KineticModel,
    domain: DomainSpec,
    du: float,
    dv_grid,
    mode_count: int = 64,
) -> PesCertificate:
    """Certify exchange of stabilities along a Dv grid.

    With a critical value Dv*: every critical mode's leading eigenvalue must
    change sign exactly once over the grid, inside the cell containing Dv*,
    while every other enumerated mode stays strictly stable at Dv*. Without
    one: every mode must stay stable at every grid point, yielding a
    no-crossing certificate.
    """
    grid = np.asarray(dv_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or not np.all(np.diff(grid) > 0):
        raise InvalidParameterError("dv_grid must be a strictly increasing 1-D array")
    if not np.all(grid > 0):
        raise InvalidParameterError("dv_grid values must be positive")
    modes = eigenpairs(domain, mode_count)

    try:
        crit = critical_dv(model, domain, du, mode_count)
    except NoCriticalValueError:
        crit = None
    if crit is None:
        for dv in grid:
            for mode in modes:
                beta = mode_matrix(model, du, dv, mode.lam).beta2.real
                if beta >= 0.0:
                    raise PesViolationError(
                        f"mode {mode.indices} has Re beta = {beta:g} >= 0 at dv={dv:g}"
                    )
        return PesCertificate("no-crossing", None, None, (), None, None)

    dv_star = crit.dv_star
    if not (grid[0] < dv_star < grid[-1]):
        raise CrossingNotBracketedError(
            f"dv_star={dv_star:g} outside grid [{grid[0]:g}, {grid[-1]:g}]"
        )
    cell = int(np.searchsorted(grid, dv_star) - 1)
    crit_lams = {m.lam for m in crit.critical_modes}

    second_max = -np.inf
    runner_up = None
    for mode in modes:
        is_critical = any(abs(mode.lam - cl) <= 1e-9 * max(1.0, cl) for cl in crit_lams)
        if is_critical:
            betas = np.array(
                [mode_matrix(model, du, dv, mode.lam).beta2.real for dv in grid]
            )
            signs = np.sign(betas)
            signs[signs == 0] = 1.0
            flips = np.nonzero(np.diff(signs))[0]
            if len(flips) != 1 or flips[0] != cell:
                raise PesViolationError(
                    f"critical mode {mode.indices}: expected one sign change in the "
                    f"cell containing dv_star, found flips at cells {flips.tolist()}"
                )
            if not (signs[0] < 0 < signs[-1]):
                raise PesViolationError(
                    f"critical mode {mode.indices} does not destabilize with increasing dv"
                )
        else:
            beta = mode_matrix(model, du, dv_star, mode.lam).beta2.real
            if beta >= 0.0:
                raise PesViolationError(
                    f"non-critical mode {mode.indices} has Re beta = {beta:g} >= 0 at dv_star"
                )
            if beta > second_max:
                second_max = beta
                runner_up = mode
    return PesCertificate(
        status="certified",
        dv_star=dv_star,
        crossing_bracket=(float(grid[cell]), float(grid[cell + 1])),
        critical_modes=crit.critical_modes,
        second_max_re_beta=float(second_max),
        runner_up=runner_up,
    )


def h_profile(
    model: KineticModel, du: float, dv: float, lambda_max: float, samples: int = 200
) -> np.ndarray:
    """Sampled dispersion curve, shape (samples, 2) with columns (lam, h)."""
    if not (lambda_max > 0.0):
        raise InvalidParameterError("lambda_max must be positive")
    if samples < 2:
        raise InvalidParameterError("samples must be >= 2")
    lam = np.linspace(0.0, lambda_max, samples)
    return np.column_stack([lam, dispersion(model, du, dv, lam)])


def _min_dispersion(model: KineticModel, du: float, dv: float) -> float:
    """Minimum of h over lam >= 0 (vertex value, or h(0) if the vertex is
    at negative lam)."""
    d_coeff, _, kc = _window_coeffs(model, du, dv)
    if d_coeff <= 0.0:
        return float(model.det)
    return float(model.det - d_coeff**2 / (4.0 * du * dv))


def schnakenberg_reference_audit(params: SchnakenbergParams, du: float = 1.0) -> ReferenceAudit:
    """Recompute Schnakenberg critical values and audit the quoted formula.

    The closed-form expression for the critical Dv that circulates in the
    literature,

        Dv0 = [(4b^2+4ab)(a+b)^2 + (a+b)^2 sqrt((4b^2+4ab)^2 + a^2 - b^2)] / (b-a)^2,

    does not satisfy the tangency condition min_lam h(lam, Dv0) = 0 that
    defines the critical value; the audit reports the defect for both that
    expression and the value recomputed from the tangency quadratic, along
    with whether the stability hypothesis (trace < 0, det > 0) even holds at
    these parameters.
    """
    model = schnakenberg_model(params)
    a, b, r = params.a, params.b, params.r
    hypothesis_ok = model.trace < 0.0 and model.det > 0.0

    dv0 = kc0 = defect = None
    if float(model.jacobian[0, 0]) > 0.0:
        dv0, kc0 = _tangency_point(model, du)
        defect = _min_dispersion(model, du, dv0)

    dv0_q = kc0_q = defect_q = None
    if b != a:
        s = a + b
        rad = (4.0 * b**2 + 4.0 * a * b) ** 2 + a**2 - b**2
        if rad >= 0.0:
            dv0_q = ((4.0 * b**2 + 4.0 * a * b) * s**2 + s**2 * np.sqrt(rad)) / (b - a) ** 2
            kc0_q = r * ((b - a) * dv0_q - s**3) / (2.0 * dv0_q * s)
            if dv0_q > 0.0:
                defect_q = _min_dispersion(model, du, dv0_q)
    return ReferenceAudit(
        trace_a=model.trace,
        det_a=model.det,
        hypothesis_ok=hypothesis_ok,
        dv0=dv0,
        kc0=kc0,
        tangency_defect=defect,
        dv0_quoted=None if dv0_q is None else float(dv0_q),
        kc0_quoted=None if kc0_q is None else float(kc0_q),
        tangency_defect_quoted=None if defect_q is None else float(defect_q),
    )
