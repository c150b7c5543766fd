"""Two-component reaction kinetics in deviation form.

A model is stored as Taylor data of the reaction terms about a homogeneous
steady state: the Jacobian, symmetric quadratic forms and symmetric cubic
tensors for each component. All downstream analysis (linear stability,
center-manifold reduction, simulation) consumes this representation, so a
model built from closed-form kinetics and one entered coefficient-by-
coefficient behave identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "SchnakenbergParams",
    "KineticModel",
    "schnakenberg_model",
    "custom_model",
    "evaluate_kinetics",
]

# Tolerance for accepting nearly-symmetric input tensors; beyond this the
# asymmetry is treated as a user error rather than roundoff.
_SYM_RTOL = 1e-9


@dataclass(frozen=True)
class SchnakenbergParams:
    """Parameters of the Schnakenberg activator-depleted-substrate kinetics.

    f(u, v) = r (a - u + u^2 v),  g(u, v) = r (b - u^2 v),  with a >= 0,
    b > 0, r > 0.
    """

    a: float
    b: float
    r: float = 1.0

    def __post_init__(self):
        if not (self.a >= 0.0 and np.isfinite(self.a)):
            raise InvalidParameterError(f"require a >= 0, got a={self.a}")
        if not (self.b > 0.0 and np.isfinite(self.b)):
            raise InvalidParameterError(f"require b > 0, got b={self.b}")
        if not (self.r > 0.0 and np.isfinite(self.r)):
            raise InvalidParameterError(f"require r > 0, got r={self.r}")

    @property
    def steady_state(self) -> tuple[float, float]:
        s = self.a + self.b
        return (s, self.b / s**2)


@dataclass(frozen=True)
class KineticModel:
    """Taylor data of the kinetics about a steady state.

    Attributes:
        steady_state: (u0, v0).
        jacobian: 2x2 array A = d(f,g)/d(u,v) at the steady state.
        quad: pair of symmetric 2x2 arrays (Q1, Q2); the quadratic part of
            component c in deviation variables w = (u1, v1) is (1/2) w^T Qc w.
        cubic: pair of symmetric 2x2x2 arrays (C1, C2); the cubic part of
            component c is (1/6) sum_ijk Cc[i,j,k] w_i w_j w_k.
        label: free-form description.
    """

    steady_state: tuple[float, float]
    jacobian: np.ndarray
    quad: tuple[np.ndarray, np.ndarray]
    cubic: tuple[np.ndarray, np.ndarray]
    label: str = "custom"
    # Monomial coefficients (u, v, u^2, uv, v^2, u^3, u^2 v, u v^2, v^3) per
    # component, derived once; the simulator kernels and evaluate_kinetics
    # share these so both routes agree bitwise.
    poly: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        jac = _checked_matrix(self.jacobian, "jacobian")
        quad = tuple(_checked_symmetric(q, f"quad[{c}]") for c, q in enumerate(self.quad))
        cubic = tuple(_checked_cubic(t, f"cubic[{c}]") for c, t in enumerate(self.cubic))
        u0, v0 = self.steady_state
        if not (np.isfinite(u0) and np.isfinite(v0)):
            raise InvalidParameterError("steady state must be finite")
        object.__setattr__(self, "steady_state", (float(u0), float(v0)))
        object.__setattr__(self, "jacobian", jac)
        object.__setattr__(self, "quad", quad)
        object.__setattr__(self, "cubic", cubic)
        object.__setattr__(self, "poly", _poly_table(jac, quad, cubic))

    @property
    def trace(self) -> float:
        return float(self.jacobian[0, 0] + self.jacobian[1, 1])

    @property
    def det(self) -> float:
        a = self.jacobian
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])


def _checked_matrix(m, name: str) -> np.ndarray:
    m = np.array(m, dtype=float)
    if m.shape != (2, 2) or not np.all(np.isfinite(m)):
        raise InvalidParameterError(f"{name} must be a finite 2x2 array")
    m.setflags(write=False)
    return m


def _checked_symmetric(q, name: str) -> np.ndarray:
    q = np.array(q, dtype=float)
    if q.shape != (2, 2) or not np.all(np.isfinite(q)):
        raise InvalidParameterError(f"{name} must be a finite 2x2 array")
    scale = np.abs(q).max() or 1.0
    if abs(q[0, 1] - q[1, 0]) > _SYM_RTOL * scale:
        raise InvalidParameterError(f"{name} must be symmetric")
    q = 0.5 * (q + q.T)
    q.setflags(write=False)
    return q


def _checked_cubic(t, name: str) -> np.ndarray:
    t = np.array(t, dtype=float)
    if t.shape != (2, 2, 2) or not np.all(np.isfinite(t)):
        raise InvalidParameterError(f"{name} must be a finite 2x2x2 array")
    scale = np.abs(t).max() or 1.0
    sym = (
        t
        + t.transpose(0, 2, 1)
        + t.transpose(1, 0, 2)
        + t.transpose(1, 2, 0)
        + t.transpose(2, 0, 1)
        + t.transpose(2, 1, 0)
    ) / 6.0
    if np.abs(t - sym).max() > _SYM_RTOL * scale:
        raise InvalidParameterError(f"{name} must be symmetric under index permutations")
    sym.setflags(write=False)
    return sym


def _poly_table(jac, quad, cubic) -> np.ndarray:
    """Monomial coefficients per component from the tensor storage."""
    table = np.empty((2, 9))
    for c in range(2):
        q, t = quad[c], cubic[c]
        table[c] = (
            jac[c, 0],
            jac[c, 1],
            0.5 * q[0, 0],
            q[0, 1],
            0.5 * q[1, 1],
            t[0, 0, 0] / 6.0,
            0.5 * t[0, 0, 1],
            0.5 * t[0, 1, 1],
            t[1, 1, 1] / 6.0,
        )
    table.setflags(write=False)
    return table


def schnakenberg_model(params: SchnakenbergParams) -> KineticModel:
    """Build the Schnakenberg kinetics in deviation form.

    The steady state is (a+b, b/(a+b)^2). With H = b/(a+b)^2 and
    M = 2(a+b), the first component expands as

        r [ (b-a)/(a+b) u1 + (a+b)^2 v1 + H u1^2 + M u1 v1 + u1^2 v1 ]

    and the second component's nonlinear part is the exact negation. The
    expansion is a finite polynomial, so the deviation form is exact, not
    truncated.
    """
    a, b, r = params.a, params.b, params.r
    s = a + b
    if s <= 0.0:
        raise InvalidParameterError("require a + b > 0")
    big_h = b / s**2
    big_m = 2.0 * s
    jac = [[r * (b - a) / s, r * s**2], [-2.0 * b * r / s, -r * s**2]]
    q1 = np.array([[2.0 * r * big_h, r * big_m], [r * big_m, 0.0]])
    c1 = np.zeros((2, 2, 2))
    c1[0, 0, 1] = c1[0, 1, 0] = c1[1, 0, 0] = 2.0 * r
    return KineticModel(
        steady_state=params.steady_state,
        jacobian=np.array(jac),
        quad=(q1, -q1),
        cubic=(c1, -c1),
        label=f"schnakenberg(a={a:g}, b={b:g}, r={r:g})",
    )


def custom_model(
    steady_state,
    jacobian,
    quad,
    cubic,
    label: str = "custom",
) -> KineticModel:
    """Build a model directly from Taylor data. Tensors must be symmetric."""
    return KineticModel(
        steady_state=tuple(steady_state),
        jacobian=jacobian,
        quad=(quad[0], quad[1]),
        cubic=(cubic[0], cubic[1]),
        label=label,
    )


def evaluate_kinetics(model: KineticModel, w) -> np.ndarray:
    """Evaluate the deviation-form reaction rates.

    Args:
        model: kinetic model.
        w: deviation (u1, v1); either a pair or an array of shape (2, ...).

    Returns:
        Array of the same trailing shape with the two reaction rates.
    """
    w = np.asarray(w, dtype=float)
    if w.shape[:1] != (2,):
        raise InvalidParameterError("w must have leading dimension 2")
    u, v = w[0], w[1]
    out = np.empty_like(w)
    for c in range(2):
        p = model.poly[c]
        out[c] = (
            p[0] * u
            + p[1] * v
            + (p[2] * u + p[3] * v) * u
            + p[4] * v * v
            + (p[5] * u + p[6] * v) * u * u
            + (p[7] * u + p[8] * v) * v * v
        )
    return out
