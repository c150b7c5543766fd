"""Laplacian eigenstructure on intervals and rectangles.

Provides the Neumann/Dirichlet eigenpairs used as the Galerkin basis, the
per-mode linearization matrix, and exact integrals of products of up to four
eigenfunctions. Product integrals are evaluated by folding product-to-sum
identities over integer frequencies, so they are exact up to float roundoff
rather than quadrature-limited.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from .errors import InvalidParameterError
from .kinetics import KineticModel

__all__ = [
    "DomainSpec",
    "SpectralMode",
    "ModeMatrix",
    "eigenpairs",
    "mode_for_indices",
    "mode_matrix",
    "square_norm",
    "triple_product",
    "product_integral",
    "eigenfunction",
    "critical_vectors",
    "growth_eigenvector",
]

_KINDS = ("interval", "rectangle")
_BCS = ("neumann", "dirichlet")

# Relative tolerance for grouping eigenvalues into multiplicity classes.
_GROUP_RTOL = 1e-9


@dataclass(frozen=True)
class DomainSpec:
    """Rectangular domain with a homogeneous boundary condition.

    kind "interval" uses extents (s,); kind "rectangle" uses (lx, ly).
    bc is "neumann" (zero flux) or "dirichlet" (pinned at the steady state).
    """

    kind: str
    extents: tuple[float, ...]
    bc: str = "neumann"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidParameterError(f"unknown domain kind {self.kind!r}")
        if self.bc not in _BCS:
            raise InvalidParameterError(f"unknown boundary condition {self.bc!r}")
        ext = tuple(float(e) for e in self.extents)
        want = 1 if self.kind == "interval" else 2
        if len(ext) != want or any(not (e > 0.0 and np.isfinite(e)) for e in ext):
            raise InvalidParameterError(
                f"{self.kind} domain needs {want} positive extent(s), got {self.extents}"
            )
        object.__setattr__(self, "extents", ext)

    @classmethod
    def interval(cls, s: float, bc: str = "neumann") -> "DomainSpec":
        return cls("interval", (s,), bc)

    @classmethod
    def rectangle(cls, lx: float, ly: float, bc: str = "neumann") -> "DomainSpec":
        return cls("rectangle", (lx, ly), bc)

    @property
    def ndim(self) -> int:
        return len(self.extents)


@dataclass(frozen=True)
class SpectralMode:
    """One Laplacian eigenfunction.

    Attributes:
        lam: eigenvalue of -Laplacian.
        indices: (m,) on an interval, (m, n) on a rectangle.
        multiplicity: number of index tuples sharing lam (within grouping
            tolerance) in the enumerated spectrum.
        kind: eigenfunction family, equal to the boundary condition name.
    """

    lam: float
    indices: tuple[int, ...]
    multiplicity: int
    kind: str


@dataclass(frozen=True)
class ModeMatrix:
    """Linearization restricted to one spatial mode.

    matrix is A - lam * diag(du, dv); beta1/beta2 are its eigenvalues stored
    as complex numbers, ordered so Re beta2 >= Re beta1. For a complex pair
    they are conjugates.
    """

    lam: float
    matrix: np.ndarray
    trace: float
    det: float
    beta1: complex
    beta2: complex

    @property
    def is_real_pair(self) -> bool:
        return self.beta2.imag == 0.0


def _axis_min_index(bc: str) -> int:
    return 0 if bc == "neumann" else 1


def eigenpairs(domain: DomainSpec, count: int) -> list[SpectralMode]:
    """The count smallest eigenpairs, sorted by (lam, indices).

    Ties within relative tolerance 1e-9 are grouped; each member records the
    group size as its multiplicity. Exactly count modes are returned.
    """
    if count < 1:
        raise InvalidParameterError("count must be >= 1")
    m0 = _axis_min_index(domain.bc)
    if domain.kind == "interval":
        (s,) = domain.extents
        items = [((pi * m / s) ** 2, (m,)) for m in range(m0, m0 + count)]
    else:
        lx, ly = domain.extents
        px, py = (pi / lx) ** 2, (pi / ly) ** 2
        hi_x = hi_y = max(2, int(np.ceil(np.sqrt(count))) + 1)
        while True:
            items = [
                (px * m * m + py * n * n, (m, n))
                for m in range(m0, m0 + hi_x + 1)
                for n in range(m0, m0 + hi_y + 1)
            ]
            items.sort()
            lam_cut = items[count - 1][0]
            tol = _GROUP_RTOL * max(1.0, lam_cut)
            # The box is adequate once every index outside it is strictly
            # above the cut, so no member or tie partner is missed.
            next_x = px * (m0 + hi_x + 1) ** 2 + py * m0 * m0
            next_y = px * m0 * m0 + py * (m0 + hi_y + 1) ** 2
            if next_x > lam_cut + tol and next_y > lam_cut + tol:
                break
            if next_x <= lam_cut + tol:
                hi_x *= 2
            if next_y <= lam_cut + tol:
                hi_y *= 2
    items.sort()
    groups = _group_ties(items)
    modes = []
    for lam_rep, members in groups:
        for lam, idx in members:
            modes.append(SpectralMode(lam, idx, len(members), domain.bc))
            if len(modes) == count:
                return modes
    return modes


def mode_for_indices(domain: DomainSpec, indices) -> SpectralMode:
    """Mode record for explicit axis indices.

    Multiplicity is reported as 1; use eigenpairs when the grouping
    matters.
    """
    if isinstance(indices, (int, np.integer)):
        indices = (indices,)
    idx = tuple(int(i) for i in indices)
    if len(idx) != domain.ndim:
        raise InvalidParameterError(
            f"indices {idx} do not match a {domain.ndim}-dimensional domain"
        )
    m0 = _axis_min_index(domain.bc)
    if any(i < m0 for i in idx):
        raise InvalidParameterError(f"indices {idx} below the minimum {m0} for bc={domain.bc}")
    lam = sum((pi * i / ext) ** 2 for i, ext in zip(idx, domain.extents))
    return SpectralMode(float(lam), idx, 1, domain.bc)


def _group_ties(items):
    """Group consecutive sorted (lam, indices) entries within tolerance."""
    groups = []
    current = [items[0]]
    for entry in items[1:]:
        lam_prev = current[0][0]
        if entry[0] - lam_prev <= _GROUP_RTOL * max(1.0, lam_prev):
            current.append(entry)
        else:
            groups.append((current[0][0], current))
            current = [entry]
    groups.append((current[0][0], current))
    return groups


def mode_matrix(model: KineticModel, du: float, dv: float, lam: float) -> ModeMatrix:
    """Linearization A - lam diag(Du, Dv) with its eigenvalue pair."""
    if not (du > 0.0 and dv > 0.0):
        raise InvalidParameterError("diffusion coefficients must be positive")
    if lam < 0.0:
        raise InvalidParameterError("lam must be >= 0")
    m = model.jacobian - lam * np.diag([du, dv])
    tr = float(m[0, 0] + m[1, 1])
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        root = np.sqrt(disc)
        beta2 = complex(0.5 * (tr + root))
        beta1 = complex(0.5 * (tr - root))
    else:
        root = np.sqrt(-disc)
        beta2 = complex(0.5 * tr, 0.5 * root)
        beta1 = complex(0.5 * tr, -0.5 * root)
    m.setflags(write=False)
    return ModeMatrix(float(lam), m, tr, det, beta1, beta2)


# ---------------------------------------------------------------------------
# Exact trigonometric product integrals.
#
# Terms are stored as {(family, k): coeff} with family 'c' for cos(k pi x / s)
# and 's' for sin(k pi x / s), k a nonnegative integer. Folding one factor
# into an accumulated sum uses the product-to-sum identities; halving keeps
# coefficients exact dyadic rationals.


def _fold_factor(acc: dict, fam: str, m: int) -> dict:
    out: dict = {}
    for (f1, k1), coeff in acc.items():
        for f, k, w in _combine(f1, k1, fam, m):
            if f == "s":
                if k < 0:
                    k, w = -k, -w
                if k == 0:
                    continue
            else:
                k = abs(k)
            key = (f, k)
            out[key] = out.get(key, 0.0) + coeff * w
    return out


def _combine(f1, k1, f2, k2):
    if f1 == "c" and f2 == "c":
        return (("c", k1 + k2, 0.5), ("c", k1 - k2, 0.5))
    if f1 == "s" and f2 == "s":
        return (("c", k1 - k2, 0.5), ("c", k1 + k2, -0.5))
    if f1 == "s" and f2 == "c":
        return (("s", k1 + k2, 0.5), ("s", k1 - k2, 0.5))
    # cos * sin
    return (("s", k1 + k2, 0.5), ("s", k2 - k1, 0.5))


def _axis_product_integral(factors, s: float) -> float:
    """Integral over (0, s) of a product of cos/sin factors with integer
    frequencies k pi / s."""
    acc = {("c", 0): 1.0}
    for fam, m in factors:
        acc = _fold_factor(acc, fam, m)
    total = 0.0
    for (fam, k), coeff in acc.items():
        if fam == "c":
            if k == 0:
                total += coeff * s
        else:
            if k % 2 == 1:
                total += coeff * 2.0 * s / (pi * k)
    return total


def product_integral(domain: DomainSpec, modes) -> float:
    """Exact integral of the product of the given modes' eigenfunctions."""
    fam = "c" if domain.bc == "neumann" else "s"
    result = 1.0
    for axis, s in enumerate(domain.extents):
        factors = [(fam, mode.indices[axis]) for mode in modes]
        result *= _axis_product_integral(factors, s)
    return result


def square_norm(domain: DomainSpec, mode: SpectralMode) -> float:
    """Integral of the squared eigenfunction over the domain."""
    return product_integral(domain, (mode, mode))


def triple_product(domain: DomainSpec, a: SpectralMode, b: SpectralMode, c: SpectralMode) -> float:
    """Integral of e_a e_b e_c over the domain."""
    return product_integral(domain, (a, b, c))


def eigenfunction(domain: DomainSpec, mode: SpectralMode, axes) -> np.ndarray:
    """Sample e_mode on a tensor grid.

    Args:
        axes: tuple of 1-D coordinate arrays, (x,) or (x, y).

    Returns:
        Array of shape (len(x),) or (len(x), len(y)).
    """
    if len(axes) != domain.ndim:
        raise InvalidParameterError("axes count does not match domain dimension")
    trig = np.cos if domain.bc == "neumann" else np.sin
    parts = []
    for axis, s in enumerate(domain.extents):
        x = np.asarray(axes[axis], dtype=float)
        parts.append(trig(mode.indices[axis] * pi * x / s))
    if domain.ndim == 1:
        return parts[0]
    return np.outer(parts[0], parts[1])


# ---------------------------------------------------------------------------
# Null/eigenvector conventions shared by the reduction and the simulator.


def _null_vector(m: np.ndarray) -> np.ndarray:
    """Right null vector of a (near-)singular 2x2 matrix, from its larger row."""
    rows = np.abs(m).sum(axis=1)
    r = 0 if rows[0] >= rows[1] else 1
    vec = np.array([m[r, 1], -m[r, 0]])
    if np.abs(vec).max() == 0.0:
        raise InvalidParameterError("matrix has no well-defined null direction")
    return vec


def _anchored_scale(vec: np.ndarray, component: int, u0: float) -> np.ndarray:
    """Rescale so vec[component] = u0 when possible, else unit max-abs."""
    scale = np.abs(vec).max()
    if u0 != 0.0 and abs(vec[component]) > 1e-13 * scale:
        return vec * (u0 / vec[component])
    vec = vec / scale
    lead = vec[np.argmax(np.abs(vec))]
    return vec if lead > 0 else -vec


def critical_vectors(model: KineticModel, du: float, dv: float, lam: float):
    """Null vectors of the mode matrix and its transpose.

    Intended for (du, dv, lam) at or near a stability crossing, where the
    mode matrix is singular. xi is scaled so its first component equals the
    steady-state u0; xi_star so its second component equals u0 (falling back
    to unit max-abs when that entry vanishes or u0 = 0).
    """
    m = mode_matrix(model, du, dv, lam).matrix
    u0 = model.steady_state[0]
    xi = _anchored_scale(_null_vector(m), 0, u0)
    xi_star = _anchored_scale(_null_vector(m.T), 1, u0)
    return xi, xi_star


def growth_eigenvector(model: KineticModel, du: float, dv: float, lam: float) -> np.ndarray:
    """Unit-scaled eigenvector of the mode matrix for its larger eigenvalue.

    Requires a real eigenvalue pair; used to seed single-mode perturbations
    that grow (or decay) at exactly beta2 in the linear regime.
    """
    mm = mode_matrix(model, du, dv, lam)
    if not mm.is_real_pair:
        raise InvalidParameterError(
            f"mode lam={lam:g} has a complex eigenvalue pair; no real growth direction"
        )
    shifted = mm.matrix - mm.beta2.real * np.eye(2)
    vec = _null_vector(shifted)
    vec = vec / np.abs(vec).max()
    if vec[0] < 0 or (vec[0] == 0 and vec[1] < 0):
        vec = -vec
    return vec
