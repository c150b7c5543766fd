"""Finite-difference validation solver.

Method of lines on a node-centered grid that includes the boundary nodes:
second-order central Laplacian with mirror ghosts for zero-flux boundaries
(which makes trapezoid-weighted mass exactly conserved by diffusion, up to
roundoff) or pinned boundary nodes for Dirichlet runs, classical RK4 in
time. The state advanced internally is the deviation from the steady state,
so the reaction terms are exactly the polynomial deviation form shared with
the analysis modules.

Kernels are compiled with numba when it is importable and fall back to
vectorized numpy otherwise; both advance the same discretization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    InvalidParameterError,
    NonlinearContaminationError,
    NotSaturatedError,
)
from .kinetics import KineticModel
from .spectrum import (
    DomainSpec,
    SpectralMode,
    critical_vectors,
    eigenfunction,
    growth_eigenvector,
    mode_for_indices,
)

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

__all__ = [
    "SimulationConfig",
    "FieldSnapshot",
    "RunResult",
    "AmplitudeFit",
    "run",
    "growth_rate_probe",
    "amplitude_fit",
]

# Any concentration beyond this magnitude terminates the run as a blow-up.
_BLOWUP_LIMIT = 1.0e6

# Relative l2 change over the trailing tenth of a run that still counts as
# saturated.
_SATURATION_RTOL = 1.0e-4


@dataclass(frozen=True)
class SimulationConfig:
    """Resolved description of one simulation run.

    init is "noise" (uniform perturbation of both components, amplitude
    epsilon, seeded) or "mode" (a single eigenmode scaled by
    mode_amplitude along the growth eigenvector). dt None picks a safe
    explicit step from the diffusion stability limit. snapshot_interval
    None keeps only the first and last snapshots.
    """

    model: KineticModel
    domain: DomainSpec
    du: float
    dv: float
    nx: int
    ny: Optional[int] = None
    dt: Optional[float] = None
    t_end: float = 100.0
    init: str = "noise"
    epsilon: float = 1.0e-3
    mode_indices: Optional[tuple[int, ...]] = None
    mode_amplitude: float = 1.0e-3
    seed: int = 0
    snapshot_interval: Optional[float] = None

    def __post_init__(self):
        if not (self.du > 0.0 and self.dv > 0.0):
            raise InvalidParameterError("diffusion coefficients must be positive")
        if self.nx < 8:
            raise InvalidParameterError("nx must be >= 8")
        if self.domain.ndim == 2:
            if self.ny is None or self.ny < 8:
                raise InvalidParameterError("rectangle runs need ny >= 8")
        elif self.ny is not None:
            raise InvalidParameterError("ny is only meaningful on a rectangle")
        if self.dt is not None and not (self.dt > 0.0):
            raise InvalidParameterError("dt must be positive when given")
        if not (self.t_end > 0.0):
            raise InvalidParameterError("t_end must be positive")
        if self.init not in ("noise", "mode"):
            raise InvalidParameterError(f"unknown init kind {self.init!r}")
        if self.init == "mode" and self.mode_indices is None:
            raise InvalidParameterError("mode init needs mode_indices")
        if self.epsilon < 0.0:
            raise InvalidParameterError("epsilon must be >= 0")
        if self.snapshot_interval is not None and not (self.snapshot_interval > 0.0):
            raise InvalidParameterError("snapshot_interval must be positive when given")
        if self.mode_indices is not None:
            object.__setattr__(self, "mode_indices", tuple(int(i) for i in self.mode_indices))


@dataclass(frozen=True)
class FieldSnapshot:
    """Full concentration fields at one time."""

    t: float
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class RunResult:
    """Snapshots, per-segment diagnostics and the run manifest."""

    config: SimulationConfig
    snapshots: tuple[FieldSnapshot, ...]
    diagnostics: np.ndarray  # columns t, l2dev, mass_u, mass_v
    manifest: dict


def _grid(config: SimulationConfig):
    dom = config.domain
    if dom.ndim == 1:
        (s,) = dom.extents
        x = np.linspace(0.0, s, config.nx)
        h = s / (config.nx - 1)
        return (x,), (h,)
    lx, ly = dom.extents
    x = np.linspace(0.0, lx, config.nx)
    y = np.linspace(0.0, ly, config.ny)
    return (x, y), (lx / (config.nx - 1), ly / (config.ny - 1))


def _trapezoid_weights(config: SimulationConfig, spacings) -> np.ndarray:
    w_axes = []
    for n, h in zip((config.nx, config.ny), spacings):
        w = np.full(n, h)
        w[0] *= 0.5
        w[-1] *= 0.5
        w_axes.append(w)
    if len(w_axes) == 1:
        return w_axes[0]
    return np.outer(w_axes[0], w_axes[1])


def _default_dt(config: SimulationConfig, spacings) -> float:
    dmax = max(config.du, config.dv)
    hmin = min(spacings)
    ndim = len(spacings)
    return 0.2 * hmin * hmin / (2.0 * ndim * dmax)


def _initial_state(config: SimulationConfig, axes):
    shape = (config.nx,) if config.domain.ndim == 1 else (config.nx, config.ny)
    wu = np.zeros(shape)
    wv = np.zeros(shape)
    if config.init == "noise":
        rng = np.random.Generator(np.random.Philox(config.seed))
        wu += rng.uniform(-config.epsilon, config.epsilon, shape)
        wv += rng.uniform(-config.epsilon, config.epsilon, shape)
    else:
        mode = mode_for_indices(config.domain, config.mode_indices)
        lam_h = _discrete_eigenvalue(config, mode)
        vec = growth_eigenvector(config.model, config.du, config.dv, lam_h)
        e = eigenfunction(config.domain, mode, axes)
        wu += config.mode_amplitude * vec[0] * e
        wv += config.mode_amplitude * vec[1] * e
    if config.domain.bc == "dirichlet":
        _pin_boundary(wu)
        _pin_boundary(wv)
    return wu, wv


def _pin_boundary(w: np.ndarray):
    if w.ndim == 1:
        w[0] = w[-1] = 0.0
    else:
        w[0, :] = w[-1, :] = 0.0
        w[:, 0] = w[:, -1] = 0.0


def _discrete_eigenvalue(config: SimulationConfig, mode: SpectralMode) -> float:
    """Eigenvalue of the discrete (mirrored/pinned) Laplacian for a sampled
    eigenfunction; equals (2 - 2 cos(m pi h / L)) / h^2 per axis."""
    _, spacings = _grid(config)
    lam = 0.0
    for idx, h, extent in zip(mode.indices, spacings, config.domain.extents):
        lam += (2.0 - 2.0 * math.cos(idx * math.pi * h / extent)) / (h * h)
    return lam


# ---------------------------------------------------------------------------
# Time-stepping kernels.

if _HAVE_NUMBA:

    @njit(cache=True)
    def _rhs_1d(u, v, out_u, out_v, du_c, dv_c, h2i, p1, p2, pinned):
        n = u.shape[0]
        for i in range(n):
            if i == 0:
                lu = 2.0 * (u[1] - u[0]) * h2i
                lv = 2.0 * (v[1] - v[0]) * h2i
            elif i == n - 1:
                lu = 2.0 * (u[n - 2] - u[n - 1]) * h2i
                lv = 2.0 * (v[n - 2] - v[n - 1]) * h2i
            else:
                lu = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * h2i
                lv = (v[i - 1] - 2.0 * v[i] + v[i + 1]) * h2i
            uu = u[i]
            vv = v[i]
            out_u[i] = du_c * lu + (
                p1[0] * uu + p1[1] * vv + (p1[2] * uu + p1[3] * vv) * uu
                + p1[4] * vv * vv + (p1[5] * uu + p1[6] * vv) * uu * uu
                + (p1[7] * uu + p1[8] * vv) * vv * vv
            )
            out_v[i] = dv_c * lv + (
                p2[0] * uu + p2[1] * vv + (p2[2] * uu + p2[3] * vv) * uu
                + p2[4] * vv * vv + (p2[5] * uu + p2[6] * vv) * uu * uu
                + (p2[7] * uu + p2[8] * vv) * vv * vv
            )
        if pinned:
            out_u[0] = out_u[n - 1] = 0.0
            out_v[0] = out_v[n - 1] = 0.0

    @njit(cache=True)
    def _advance_1d(u, v, du_c, dv_c, h2i, dt, steps, p1, p2, pinned):
        n = u.shape[0]
        k1u = np.empty(n); k1v = np.empty(n)
        k2u = np.empty(n); k2v = np.empty(n)
        k3u = np.empty(n); k3v = np.empty(n)
        k4u = np.empty(n); k4v = np.empty(n)
        tu = np.empty(n); tv = np.empty(n)
        for _ in range(steps):
            _rhs_1d(u, v, k1u, k1v, du_c, dv_c, h2i, p1, p2, pinned)
            for i in range(n):
                tu[i] = u[i] + 0.5 * dt * k1u[i]
                tv[i] = v[i] + 0.5 * dt * k1v[i]
            _rhs_1d(tu, tv, k2u, k2v, du_c, dv_c, h2i, p1, p2, pinned)
            for i in range(n):
                tu[i] = u[i] + 0.5 * dt * k2u[i]
                tv[i] = v[i] + 0.5 * dt * k2v[i]
            _rhs_1d(tu, tv, k3u, k3v, du_c, dv_c, h2i, p1, p2, pinned)
            for i in range(n):
                tu[i] = u[i] + dt * k3u[i]
                tv[i] = v[i] + dt * k3v[i]
            _rhs_1d(tu, tv, k4u, k4v, du_c, dv_c, h2i, p1, p2, pinned)
            sixth = dt / 6.0
            for i in range(n):
                u[i] += sixth * (k1u[i] + 2.0 * (k2u[i] + k3u[i]) + k4u[i])
                v[i] += sixth * (k1v[i] + 2.0 * (k2v[i] + k3v[i]) + k4v[i])

    @njit(cache=True)
    def _rhs_2d(u, v, out_u, out_v, du_c, dv_c, hx2i, hy2i, p1, p2, pinned):
        nx, ny = u.shape
        for i in range(nx):
            for j in range(ny):
                if i == 0:
                    lux = 2.0 * (u[1, j] - u[0, j]) * hx2i
                    lvx = 2.0 * (v[1, j] - v[0, j]) * hx2i
                elif i == nx - 1:
                    lux = 2.0 * (u[nx - 2, j] - u[nx - 1, j]) * hx2i
                    lvx = 2.0 * (v[nx - 2, j] - v[nx - 1, j]) * hx2i
                else:
                    lux = (u[i - 1, j] - 2.0 * u[i, j] + u[i + 1, j]) * hx2i
                    lvx = (v[i - 1, j] - 2.0 * v[i, j] + v[i + 1, j]) * hx2i
                if j == 0:
                    luy = 2.0 * (u[i, 1] - u[i, 0]) * hy2i
                    lvy = 2.0 * (v[i, 1] - v[i, 0]) * hy2i
                elif j == ny - 1:
                    luy = 2.0 * (u[i, ny - 2] - u[i, ny - 1]) * hy2i
                    lvy = 2.0 * (v[i, ny - 2] - v[i, ny - 1]) * hy2i
                else:
                    luy = (u[i, j - 1] - 2.0 * u[i, j] + u[i, j + 1]) * hy2i
                    lvy = (v[i, j - 1] - 2.0 * v[i, j] + v[i, j + 1]) * hy2i
                uu = u[i, j]
                vv = v[i, j]
                out_u[i, j] = du_c * (lux + luy) + (
                    p1[0] * uu + p1[1] * vv + (p1[2] * uu + p1[3] * vv) * uu
                    + p1[4] * vv * vv + (p1[5] * uu + p1[6] * vv) * uu * uu
                    + (p1[7] * uu + p1[8] * vv) * vv * vv
                )
                out_v[i, j] = dv_c * (lvx + lvy) + (
                    p2[0] * uu + p2[1] * vv + (p2[2] * uu + p2[3] * vv) * uu
                    + p2[4] * vv * vv + (p2[5] * uu + p2[6] * vv) * uu * uu
                    + (p2[7] * uu + p2[8] * vv) * vv * vv
                )
        if pinned:
            for j in range(ny):
                out_u[0, j] = out_u[nx - 1, j] = 0.0
                out_v[0, j] = out_v[nx - 1, j] = 0.0
            for i in range(nx):
                out_u[i, 0] = out_u[i, ny - 1] = 0.0
                out_v[i, 0] = out_v[i, ny - 1] = 0.0

    @njit(cache=True)
    def _advance_2d(u, v, du_c, dv_c, hx2i, hy2i, dt, steps, p1, p2, pinned):
        nx, ny = u.shape
        k1u = np.empty((nx, ny)); k1v = np.empty((nx, ny))
        k2u = np.empty((nx, ny)); k2v = np.empty((nx, ny))
        k3u = np.empty((nx, ny)); k3v = np.empty((nx, ny))
        k4u = np.empty((nx, ny)); k4v = np.empty((nx, ny))
        tu = np.empty((nx, ny)); tv = np.empty((nx, ny))
        for _ in range(steps):
            _rhs_2d(u, v, k1u, k1v, du_c, dv_c, hx2i, hy2i, p1, p2, pinned)
            for i in range(nx):
                for j in range(ny):
                    tu[i, j] = u[i, j] + 0.5 * dt * k1u[i, j]
                    tv[i, j] = v[i, j] + 0.5 * dt * k1v[i, j]
            _rhs_2d(tu, tv, k2u, k2v, du_c, dv_c, hx2i, hy2i, p1, p2, pinned)
            for i in range(nx):
                for j in range(ny):
                    tu[i, j] = u[i, j] + 0.5 * dt * k2u[i, j]
                    tv[i, j] = v[i, j] + 0.5 * dt * k2v[i, j]
            _rhs_2d(tu, tv, k3u, k3v, du_c, dv_c, hx2i, hy2i, p1, p2, pinned)
            for i in range(nx):
                for j in range(ny):
                    tu[i, j] = u[i, j] + dt * k3u[i, j]
                    tv[i, j] = v[i, j] + dt * k3v[i, j]
            _rhs_2d(tu, tv, k4u, k4v, du_c, dv_c, hx2i, hy2i, p1, p2, pinned)
            sixth = dt / 6.0
            for i in range(nx):
                for j in range(ny):
                    u[i, j] += sixth * (k1u[i, j] + 2.0 * (k2u[i, j] + k3u[i, j]) + k4u[i, j])
                    v[i, j] += sixth * (k1v[i, j] + 2.0 * (k2v[i, j] + k3v[i, j]) + k4v[i, j])


# Vectorized fallback, always defined; used when numba is unavailable.


def _lap_mirror(w: np.ndarray, axis_h2i, pinned: bool) -> np.ndarray:
    if w.ndim == 1:
        (h2i,) = axis_h2i
        out = np.empty_like(w)
        out[1:-1] = (w[:-2] - 2.0 * w[1:-1] + w[2:]) * h2i
        out[0] = 2.0 * (w[1] - w[0]) * h2i
        out[-1] = 2.0 * (w[-2] - w[-1]) * h2i
        return out
    hx2i, hy2i = axis_h2i
    out = np.empty_like(w)
    out[1:-1, :] = (w[:-2, :] - 2.0 * w[1:-1, :] + w[2:, :]) * hx2i
    out[0, :] = 2.0 * (w[1, :] - w[0, :]) * hx2i
    out[-1, :] = 2.0 * (w[-2, :] - w[-1, :]) * hx2i
    tmp = np.empty_like(w)
    tmp[:, 1:-1] = (w[:, :-2] - 2.0 * w[:, 1:-1] + w[:, 2:]) * hy2i
    tmp[:, 0] = 2.0 * (w[:, 1] - w[:, 0]) * hy2i
    tmp[:, -1] = 2.0 * (w[:, -2] - w[:, -1]) * hy2i
    return out + tmp


def _poly_np(p, u, v):
    return (
        p[0] * u + p[1] * v + (p[2] * u + p[3] * v) * u + p[4] * v * v
        + (p[5] * u + p[6] * v) * u * u + (p[7] * u + p[8] * v) * v * v
    )


def _rhs_np(u, v, du_c, dv_c, axis_h2i, p1, p2, pinned):
    fu = du_c * _lap_mirror(u, axis_h2i, pinned) + _poly_np(p1, u, v)
    fv = dv_c * _lap_mirror(v, axis_h2i, pinned) + _poly_np(p2, u, v)
    if pinned:
        _pin_boundary(fu)
        _pin_boundary(fv)
    return fu, fv


def _advance_np(u, v, du_c, dv_c, axis_h2i, dt, steps, p1, p2, pinned):
    for _ in range(steps):
        k1u, k1v = _rhs_np(u, v, du_c, dv_c, axis_h2i, p1, p2, pinned)
        k2u, k2v = _rhs_np(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v,
                           du_c, dv_c, axis_h2i, p1, p2, pinned)
        k3u, k3v = _rhs_np(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v,
                           du_c, dv_c, axis_h2i, p1, p2, pinned)
        k4u, k4v = _rhs_np(u + dt * k3u, v + dt * k3v,
                           du_c, dv_c, axis_h2i, p1, p2, pinned)
        u += (dt / 6.0) * (k1u + 2.0 * (k2u + k3u) + k4u)
        v += (dt / 6.0) * (k1v + 2.0 * (k2v + k3v) + k4v)


def _advance(wu, wv, config: SimulationConfig, spacings, dt, steps):
    p1 = np.ascontiguousarray(config.model.poly[0])
    p2 = np.ascontiguousarray(config.model.poly[1])
    pinned = config.domain.bc == "dirichlet"
    if config.domain.ndim == 1:
        h2i = 1.0 / (spacings[0] * spacings[0])
        if _HAVE_NUMBA:
            _advance_1d(wu, wv, config.du, config.dv, h2i, dt, steps, p1, p2, pinned)
        else:
            _advance_np(wu, wv, config.du, config.dv, (h2i,), dt, steps, p1, p2, pinned)
    else:
        hx2i = 1.0 / (spacings[0] * spacings[0])
        hy2i = 1.0 / (spacings[1] * spacings[1])
        if _HAVE_NUMBA:
            _advance_2d(wu, wv, config.du, config.dv, hx2i, hy2i, dt, steps, p1, p2, pinned)
        else:
            _advance_np(wu, wv, config.du, config.dv, (hx2i, hy2i), dt, steps, p1, p2, pinned)


# ---------------------------------------------------------------------------
# Run orchestration.


def run(config: SimulationConfig, out_dir=None) -> RunResult:
    """Advance the configured system to t_end.

    Diagnostics (deviation l2 norm and trapezoid masses) are recorded at up
    to ~1000 evenly spaced checkpoints. A field magnitude beyond 1e6
    terminates the run early; the manifest then reports termination
    "blow-up" and the last finite state is kept as the final snapshot.
    Writes snapshots, diagnostics.csv and run.json when out_dir is given.
    """
    axes, spacings = _grid(config)
    weights = _trapezoid_weights(config, spacings)
    u0, v0 = config.model.steady_state
    wu, wv = _initial_state(config, axes)

    dt_req = config.dt if config.dt is not None else _default_dt(config, spacings)
    n_steps = max(1, int(math.ceil(config.t_end / dt_req - 1e-12)))
    dt = config.t_end / n_steps
    n_segments = min(1000, n_steps)
    bounds = [round(k * n_steps / n_segments) for k in range(n_segments + 1)]

    def diag_row(t):
        l2 = math.sqrt(float(np.sum(weights * (wu * wu + wv * wv))))
        mass_u = u0 * float(np.sum(weights)) + float(np.sum(weights * wu))
        mass_v = v0 * float(np.sum(weights)) + float(np.sum(weights * wv))
        return (t, l2, mass_u, mass_v)

    diagnostics = [diag_row(0.0)]
    snapshots = [FieldSnapshot(0.0, u0 + wu.copy(), v0 + wv.copy())]
    next_snap = config.snapshot_interval if config.snapshot_interval is not None else math.inf

    termination = "completed"
    blow_up_time = None
    t = 0.0
    last_u, last_v = wu.copy(), wv.copy()
    for k in range(n_segments):
        steps = bounds[k + 1] - bounds[k]
        if steps == 0:
            continue
        _advance(wu, wv, config, spacings, dt, steps)
        t = bounds[k + 1] * dt
        bad = not (np.all(np.isfinite(wu)) and np.all(np.isfinite(wv)))
        if not bad:
            peak = max(
                np.abs(wu).max() + abs(u0),
                np.abs(wv).max() + abs(v0),
            )
            bad = peak > _BLOWUP_LIMIT
        if bad:
            termination = "blow-up"
            blow_up_time = t
            wu, wv = last_u, last_v
            t = bounds[k] * dt
            break
        diagnostics.append(diag_row(t))
        if t + 1e-12 >= next_snap:
            snapshots.append(FieldSnapshot(t, u0 + wu.copy(), v0 + wv.copy()))
            next_snap += config.snapshot_interval
        last_u[...] = wu
        last_v[...] = wv

    if not snapshots or snapshots[-1].t != t:
        snapshots.append(FieldSnapshot(t, u0 + wu.copy(), v0 + wv.copy()))
    diag = np.array(diagnostics)

    manifest = {
        "termination": termination,
        "t_final": t,
        "blow_up_time": blow_up_time,
        "dt": dt,
        "n_steps": n_steps,
        "seed": config.seed,
        "backend": "numba" if _HAVE_NUMBA else "numpy",
        "saturated": _is_saturated(diag, config.t_end),
    }
    result = RunResult(config, tuple(snapshots), diag, manifest)
    if out_dir is not None:
        _write_outputs(result, Path(out_dir))
    return result


def _is_saturated(diag: np.ndarray, t_end: float) -> bool:
    """Relative l2 change over the trailing tenth of the run below tolerance."""
    if diag.shape[0] < 3:
        return False
    t = diag[:, 0]
    tail = diag[t >= t[-1] - 0.1 * t_end, 1]
    if tail.size < 2:
        return False
    peak = tail.max()
    if peak <= 1e-12 * max(diag[:, 1].max(), 1e-300):
        return True
    return bool(tail.max() - tail.min() <= _SATURATION_RTOL * peak)


def _write_outputs(result: RunResult, out_dir: Path):
    from . import config as cfgmod

    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for k, snap in enumerate(result.snapshots):
        name = f"snap_{k:06d}.csv"
        cfgmod.write_snapshot(out_dir / name, snap)
        names.append(name)
    cfgmod.write_diagnostics(out_dir / "diagnostics.csv", result.diagnostics)
    manifest = dict(result.manifest)
    manifest["snapshots"] = names
    manifest["diagnostics"] = "diagnostics.csv"
    manifest["config"] = cfgmod.simconfig_to_dict(result.config)
    cfgmod.write_json(out_dir / "run.json", manifest)


# ---------------------------------------------------------------------------
# Measurement helpers built on the solver.


def _mode_coefficient(w: np.ndarray, e: np.ndarray, weights: np.ndarray) -> float:
    """Trapezoid-weighted projection of a sampled field onto a sampled
    eigenfunction; exact for fields made of grid-resolved modes."""
    return float(np.sum(weights * w * e) / np.sum(weights * e * e))


def growth_rate_probe(
    model: KineticModel,
    domain: DomainSpec,
    du: float,
    dv: float,
    mode,
    amplitude: float = 1.0e-4,
    t_window: float = 30.0,
    nx: int = 64,
    ny: Optional[int] = None,
    dt: Optional[float] = None,
    samples: int = 48,
) -> float:
    """Measured exponential rate of one eigenmode from a small-amplitude run.

    Seeds the mode along its growth eigenvector, advances to t_window and
    fits ln of the mode's u-coefficient against time. The seed amplitude
    must stay in the linear regime (<= 1e-3 of the steady state scale);
    a fit residual above 5% of the dynamic range raises
    NonlinearContaminationError.
    """
    u0, v0 = model.steady_state
    scale = max(abs(u0), abs(v0), 1.0)
    if not (0.0 < amplitude <= 1.0e-3 * scale):
        raise InvalidParameterError(
            f"amplitude {amplitude:g} outside the linear-probe range (0, {1e-3 * scale:g}]"
        )
    if samples < 8:
        raise InvalidParameterError("samples must be >= 8")
    if domain.ndim == 2 and ny is None:
        ny = max(8, nx // 2)
    mode = mode_for_indices(domain, mode) if not isinstance(mode, SpectralMode) else mode
    config = SimulationConfig(
        model=model, domain=domain, du=du, dv=dv, nx=nx, ny=ny, dt=dt,
        t_end=t_window, init="mode", mode_indices=mode.indices,
        mode_amplitude=amplitude,
    )
    axes, spacings = _grid(config)
    weights = _trapezoid_weights(config, spacings)
    e = eigenfunction(domain, mode, axes)
    wu, wv = _initial_state(config, axes)

    dt_req = config.dt if config.dt is not None else _default_dt(config, spacings)
    n_steps = max(samples, int(math.ceil(t_window / dt_req - 1e-12)))
    dt_use = t_window / n_steps
    bounds = [round(k * n_steps / samples) for k in range(samples + 1)]

    times = [0.0]
    coeffs = [_mode_coefficient(wu, e, weights)]
    for k in range(samples):
        steps = bounds[k + 1] - bounds[k]
        if steps:
            _advance(wu, wv, config, spacings, dt_use, steps)
        times.append(bounds[k + 1] * dt_use)
        coeffs.append(_mode_coefficient(wu, e, weights))
    coeffs = np.array(coeffs)
    times = np.array(times)
    if not np.all(np.isfinite(coeffs)) or np.any(np.abs(coeffs) <= 0.0):
        raise NonlinearContaminationError("mode coefficient vanished or diverged during probe")
    logc = np.log(np.abs(coeffs))
    slope, intercept = np.polyfit(times, logc, 1)
    resid = logc - (slope * times + intercept)
    dyn = logc.max() - logc.min()
    if np.abs(resid).max() > 0.05 * max(dyn, 1e-6):
        raise NonlinearContaminationError(
            f"growth fit residual {np.abs(resid).max():.3g} exceeds 5% of range {dyn:.3g}"
        )
    return float(slope)


@dataclass(frozen=True)
class AmplitudeFit:
    """Saturated amplitudes against distance from the critical value."""

    dv_values: np.ndarray
    deltas: np.ndarray
    amplitudes: np.ndarray  # signed normal-form amplitudes
    exponent: float
    intercept: float


def amplitude_fit(
    model: KineticModel,
    domain: DomainSpec,
    du: float,
    dv_values,
    dv_star: float,
    mode,
    amplitude0,
    t_end,
    nx: int = 32,
    ny: Optional[int] = None,
    dt: Optional[float] = None,
) -> AmplitudeFit:
    """Saturated critical-mode amplitude at each dv, with a power-law fit.

    Each run is seeded on the critical mode and must satisfy the saturation
    criterion (relative l2 change below 1e-4 over the trailing tenth of the
    run), else NotSaturatedError. Amplitudes are reported in normal-form
    units: the u-projection divided by the first component of the critical
    eigenvector at dv_star. The exponent is the slope of ln|amplitude|
    against ln(dv - dv_star).
    """
    dv_values = np.asarray(dv_values, dtype=float)
    if dv_values.ndim != 1 or dv_values.size < 3:
        raise InvalidParameterError("need at least 3 dv values")
    deltas = dv_values - dv_star
    if not np.all(deltas > 0):
        raise InvalidParameterError("all dv values must exceed dv_star")
    mode = mode_for_indices(domain, mode) if not isinstance(mode, SpectralMode) else mode
    amp0 = np.broadcast_to(np.asarray(amplitude0, dtype=float), dv_values.shape)
    tend = np.broadcast_to(np.asarray(t_end, dtype=float), dv_values.shape)
    xi, _ = critical_vectors(model, du, dv_star, mode.lam)

    amplitudes = []
    for dv, a0, te in zip(dv_values, amp0, tend):
        config = SimulationConfig(
            model=model, domain=domain, du=du, dv=float(dv), nx=nx, ny=ny,
            dt=dt, t_end=float(te), init="mode", mode_indices=mode.indices,
            mode_amplitude=float(a0),
        )
        result = run(config)
        if result.manifest["termination"] != "completed":
            raise NotSaturatedError(
                f"run at dv={dv:g} terminated with {result.manifest['termination']}"
            )
        if not result.manifest["saturated"]:
            raise NotSaturatedError(f"run at dv={dv:g} did not saturate by t={te:g}")
        axes, spacings = _grid(config)
        weights = _trapezoid_weights(config, spacings)
        e = eigenfunction(domain, mode, axes)
        final = result.snapshots[-1]
        coef = _mode_coefficient(final.u - model.steady_state[0], e, weights)
        amplitudes.append(coef / xi[0])
    amplitudes = np.array(amplitudes)
    slope, intercept = np.polyfit(np.log(deltas), np.log(np.abs(amplitudes)), 1)
    return AmplitudeFit(dv_values, deltas, amplitudes, float(slope), float(intercept))
