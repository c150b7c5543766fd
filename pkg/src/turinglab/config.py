"""File formats: model files, simulation configs, snapshots, tables.

Plain-text model files hold one key = value pair per line. JSON output is
written by a small custom serializer so every float carries 17 significant
digits (enough to round-trip a double exactly); non-finite values are
serialized as the quoted strings "inf", "-inf", "nan". Absent values are
JSON null in JSON files and the sentinel none in CSV files.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ModelFileError
from .kinetics import KineticModel, SchnakenbergParams, custom_model, schnakenberg_model
from .simulator import FieldSnapshot, SimulationConfig
from .spectrum import DomainSpec

__all__ = [
    "fmt",
    "dumps_json",
    "write_json",
    "read_json",
    "ParsedModel",
    "parse_model_file",
    "write_model_file",
    "model_to_dict",
    "model_from_dict",
    "domain_to_dict",
    "domain_from_dict",
    "simconfig_to_dict",
    "simconfig_from_dict",
    "parse_sim_config",
    "write_snapshot",
    "parse_snapshot",
    "write_diagnostics",
    "write_eigentable",
]


def fmt(x) -> str:
    """Float to 17-significant-digit text; exact double round-trip."""
    return format(float(x), ".17g")


def _json_scalar(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return json.dumps(fmt_nonfinite(x))
        return fmt(x)
    raise TypeError(f"cannot serialize {type(obj)!r}")


def fmt_nonfinite(x: float) -> str:
    if np.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"


def dumps_json(obj, _level: int = 0) -> str:
    pad = "  " * _level
    inner = "  " * (_level + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{inner}{json.dumps(str(k))}: {dumps_json(v, _level + 1)}"
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(np.asarray(obj).tolist()) if isinstance(obj, np.ndarray) else list(obj)
        if not seq:
            return "[]"
        items = [f"{inner}{dumps_json(v, _level + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    return _json_scalar(obj)


def write_json(path, obj):
    Path(path).write_text(dumps_json(obj) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# Model files.

_SCHNAK_KEYS = {"a", "b", "r"}
_CUSTOM_KEYS = {"steady_state", "jacobian", "quad1", "quad2", "cubic1", "cubic2"}
_DOMAIN_KEYS = {"domain.kind", "domain.bc", "domain.s", "domain.lx", "domain.ly"}


@dataclass(frozen=True)
class ParsedModel:
    model: KineticModel
    domain: Optional[DomainSpec]
    params: Optional[SchnakenbergParams]


def _floats(value: str, count: int, key: str) -> list[float]:
    parts = value.replace(",", " ").split()
    if len(parts) != count:
        raise ModelFileError(f"{key} needs {count} numbers, got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ModelFileError(f"{key}: {exc}") from None


def parse_model_file(path) -> ParsedModel:
    """Parse a key = value model file.

    type = schnakenberg takes a, b and optional r; type = custom takes
    jacobian (4 numbers, row-major), quad1/quad2 (coefficients of u^2, uv,
    v^2) and cubic1/cubic2 (u^3, u^2 v, u v^2, v^3), plus optional
    steady_state and label. An optional domain block (domain.kind,
    domain.s or domain.lx/domain.ly, domain.bc) travels with the model.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from None
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ModelFileError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in entries:
            raise ModelFileError(f"{path}:{lineno}: duplicate key {key}")
        entries[key] = value

    mtype = entries.pop("type", None)
    if mtype is None:
        raise ModelFileError(f"{path}: missing type")
    label = entries.pop("label", None)

    domain = _parse_domain_entries(entries, path)

    if mtype == "schnakenberg":
        bad = set(entries) - _SCHNAK_KEYS
        if bad:
            raise ModelFileError(f"{path}: keys {sorted(bad)} not allowed for type=schnakenberg")
        if not {"a", "b"} <= set(entries):
            raise ModelFileError(f"{path}: type=schnakenberg needs a and b")
        params = SchnakenbergParams(
            a=_floats(entries["a"], 1, "a")[0],
            b=_floats(entries["b"], 1, "b")[0],
            r=_floats(entries.get("r", "1"), 1, "r")[0],
        )
        model = schnakenberg_model(params)
        return ParsedModel(model, domain, params)

    if mtype == "custom":
        bad = set(entries) - _CUSTOM_KEYS
        if bad:
            raise ModelFileError(f"{path}: unknown keys {sorted(bad)}")
        missing = {"jacobian", "quad1", "quad2", "cubic1", "cubic2"} - set(entries)
        if missing:
            raise ModelFileError(f"{path}: type=custom needs {sorted(missing)}")
        jac = np.array(_floats(entries["jacobian"], 4, "jacobian")).reshape(2, 2)
        quad = tuple(
            _quad_tensor(_floats(entries[k], 3, k)) for k in ("quad1", "quad2")
        )
        cubic = tuple(
            _cubic_tensor(_floats(entries[k], 4, k)) for k in ("cubic1", "cubic2")
        )
        steady = (
            tuple(_floats(entries["steady_state"], 2, "steady_state"))
            if "steady_state" in entries
            else (0.0, 0.0)
        )
        model = custom_model(steady, jac, quad, cubic, label=label or "custom")
        return ParsedModel(model, domain, None)

    raise ModelFileError(f"{path}: unknown type {mtype!r}")


def _parse_domain_entries(entries: dict, path) -> Optional[DomainSpec]:
    present = {k for k in entries if k.startswith("domain.")}
    if not present:
        return None
    bad = present - _DOMAIN_KEYS
    if bad:
        raise ModelFileError(f"{path}: unknown keys {sorted(bad)}")
    kind = entries.pop("domain.kind", None)
    if kind is None:
        raise ModelFileError(f"{path}: domain block needs domain.kind")
    bc = entries.pop("domain.bc", "neumann")
    if kind == "interval":
        if "domain.s" not in entries:
            raise ModelFileError(f"{path}: interval domain needs domain.s")
        return DomainSpec.interval(_floats(entries.pop("domain.s"), 1, "domain.s")[0], bc)
    if kind == "rectangle":
        if not {"domain.lx", "domain.ly"} <= set(entries):
            raise ModelFileError(f"{path}: rectangle domain needs domain.lx and domain.ly")
        return DomainSpec.rectangle(
            _floats(entries.pop("domain.lx"), 1, "domain.lx")[0],
            _floats(entries.pop("domain.ly"), 1, "domain.ly")[0],
            bc,
        )
    raise ModelFileError(f"{path}: unknown domain.kind {kind!r}")


def _quad_tensor(c) -> np.ndarray:
    c20, c11, c02 = c
    return np.array([[2.0 * c20, c11], [c11, 2.0 * c02]])


def _cubic_tensor(c) -> np.ndarray:
    c30, c21, c12, c03 = c
    t = np.empty((2, 2, 2))
    t[0, 0, 0] = 6.0 * c30
    t[0, 0, 1] = t[0, 1, 0] = t[1, 0, 0] = 2.0 * c21
    t[0, 1, 1] = t[1, 0, 1] = t[1, 1, 0] = 2.0 * c12
    t[1, 1, 1] = 6.0 * c03
    return t


def _quad_coeffs(q: np.ndarray):
    return [0.5 * q[0, 0], q[0, 1], 0.5 * q[1, 1]]


def _cubic_coeffs(t: np.ndarray):
    return [t[0, 0, 0] / 6.0, 0.5 * t[0, 0, 1], 0.5 * t[0, 1, 1], t[1, 1, 1] / 6.0]


def write_model_file(path, model=None, params=None, domain=None):
    """Write a model file; pass params for schnakenberg form, else a model."""
    lines = []
    if params is not None:
        lines += [
            "type = schnakenberg",
            f"a = {fmt(params.a)}",
            f"b = {fmt(params.b)}",
            f"r = {fmt(params.r)}",
        ]
    elif model is not None:
        lines.append("type = custom")
        if model.label != "custom":
            lines.append(f"label = {model.label}")
        lines.append(f"steady_state = {fmt(model.steady_state[0])} {fmt(model.steady_state[1])}")
        lines.append("jacobian = " + " ".join(fmt(x) for x in model.jacobian.ravel()))
        for name, q in zip(("quad1", "quad2"), model.quad):
            lines.append(f"{name} = " + " ".join(fmt(x) for x in _quad_coeffs(q)))
        for name, t in zip(("cubic1", "cubic2"), model.cubic):
            lines.append(f"{name} = " + " ".join(fmt(x) for x in _cubic_coeffs(t)))
    else:
        raise ModelFileError("write_model_file needs a model or params")
    if domain is not None:
        lines.append(f"domain.kind = {domain.kind}")
        if domain.kind == "interval":
            lines.append(f"domain.s = {fmt(domain.extents[0])}")
        else:
            lines.append(f"domain.lx = {fmt(domain.extents[0])}")
            lines.append(f"domain.ly = {fmt(domain.extents[1])}")
        lines.append(f"domain.bc = {domain.bc}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Dict converters (JSON-facing).


def model_to_dict(model: KineticModel) -> dict:
    return {
        "label": model.label,
        "steady_state": list(model.steady_state),
        "jacobian": model.jacobian.tolist(),
        "quad": [_quad_coeffs(q) for q in model.quad],
        "cubic": [_cubic_coeffs(t) for t in model.cubic],
    }


def model_from_dict(d: dict) -> KineticModel:
    try:
        jac = np.array(d["jacobian"], dtype=float)
        quad = tuple(_quad_tensor(c) for c in d["quad"])
        cubic = tuple(_cubic_tensor(c) for c in d["cubic"])
        return custom_model(
            tuple(d["steady_state"]), jac, quad, cubic, label=d.get("label", "custom")
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"bad model dict: {exc}") from None


def domain_to_dict(domain: DomainSpec) -> dict:
    return {"kind": domain.kind, "extents": list(domain.extents), "bc": domain.bc}


def domain_from_dict(d: dict) -> DomainSpec:
    try:
        return DomainSpec(d["kind"], tuple(d["extents"]), d.get("bc", "neumann"))
    except (KeyError, TypeError) as exc:
        raise ModelFileError(f"bad domain dict: {exc}") from None


def simconfig_to_dict(config: SimulationConfig) -> dict:
    return {
        "model": model_to_dict(config.model),
        "domain": domain_to_dict(config.domain),
        "du": config.du,
        "dv": config.dv,
        "nx": config.nx,
        "ny": config.ny,
        "dt": config.dt,
        "t_end": config.t_end,
        "init": config.init,
        "epsilon": config.epsilon,
        "mode_indices": None if config.mode_indices is None else list(config.mode_indices),
        "mode_amplitude": config.mode_amplitude,
        "seed": config.seed,
        "snapshot_interval": config.snapshot_interval,
    }


def simconfig_from_dict(d: dict) -> SimulationConfig:
    try:
        return SimulationConfig(
            model=model_from_dict(d["model"]),
            domain=domain_from_dict(d["domain"]),
            du=float(d["du"]),
            dv=float(d["dv"]),
            nx=int(d["nx"]),
            ny=None if d.get("ny") is None else int(d["ny"]),
            dt=None if d.get("dt") is None else float(d["dt"]),
            t_end=float(d["t_end"]),
            init=d.get("init", "noise"),
            epsilon=float(d.get("epsilon", 1e-3)),
            mode_indices=None if d.get("mode_indices") is None else tuple(d["mode_indices"]),
            mode_amplitude=float(d.get("mode_amplitude", 1e-3)),
            seed=int(d.get("seed", 0)),
            snapshot_interval=(
                None if d.get("snapshot_interval") is None else float(d["snapshot_interval"])
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"bad simulation config: {exc}") from None


def parse_sim_config(path, default_seed: int = 0) -> SimulationConfig:
    """Read a user-facing simulation config JSON.

    The model comes either inline under "model" or from "model_file"
    (resolved relative to the config file); the domain comes from "domain"
    or from the model file's domain block. init is a nested object:
    {"kind": "noise", "epsilon": ...} or {"kind": "mode", "indices": [...],
    "amplitude": ...}. A top-level "seed" overrides default_seed.
    """
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: {exc}") from None
    if not isinstance(d, dict):
        raise ModelFileError(f"{path}: top level must be an object")

    domain = None
    if "model" in d:
        model = model_from_dict(d["model"])
    elif "model_file" in d:
        parsed = parse_model_file(path.parent / d["model_file"])
        model = parsed.model
        domain = parsed.domain
    else:
        raise ModelFileError(f"{path}: needs model or model_file")
    if "domain" in d:
        domain = domain_from_dict(d["domain"])
    if domain is None:
        raise ModelFileError(f"{path}: no domain given here or in the model file")

    init = d.get("init", {"kind": "noise"})
    if not isinstance(init, dict) or "kind" not in init:
        raise ModelFileError(f"{path}: init must be an object with a kind")
    kind = init["kind"]
    epsilon = float(init.get("epsilon", 1e-3))
    mode_indices = init.get("indices")
    mode_amplitude = float(init.get("amplitude", 1e-3))

    try:
        return SimulationConfig(
            model=model,
            domain=domain,
            du=float(d["du"]),
            dv=float(d["dv"]),
            nx=int(d["nx"]),
            ny=None if d.get("ny") is None else int(d["ny"]),
            dt=None if d.get("dt") in (None, "auto") else float(d["dt"]),
            t_end=float(d["t_end"]),
            init=kind,
            epsilon=epsilon,
            mode_indices=None if mode_indices is None else tuple(mode_indices),
            mode_amplitude=mode_amplitude,
            seed=int(d.get("seed", default_seed)),
            snapshot_interval=(
                None if d.get("snapshot_interval") is None else float(d["snapshot_interval"])
            ),
        )
    except KeyError as exc:
        raise ModelFileError(f"{path}: missing {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ModelFileError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# Snapshots and tables.

_SNAP_HEADER = re.compile(r"#\s*t=(?P<t>\S+)\s+nx=(?P<nx>\d+)\s+ny=(?P<ny>\d+)\s*$")


def write_snapshot(path, snap: FieldSnapshot):
    """Snapshot CSV: a header comment, then one i,j,u,v row per node."""
    u = np.atleast_2d(snap.u.T).T  # 1-D fields become (nx, 1)
    v = np.atleast_2d(snap.v.T).T
    nx, ny = u.shape
    lines = [f"# t={fmt(snap.t)} nx={nx} ny={ny}"]
    for i in range(nx):
        for j in range(ny):
            lines.append(f"{i},{j},{fmt(u[i, j])},{fmt(v[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n")


def parse_snapshot(path) -> FieldSnapshot:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ModelFileError(f"{path}: empty snapshot")
    m = _SNAP_HEADER.match(lines[0])
    if m is None:
        raise ModelFileError(f"{path}: bad snapshot header {lines[0]!r}")
    t = float(m["t"])
    nx, ny = int(m["nx"]), int(m["ny"])
    u = np.empty((nx, ny))
    v = np.empty((nx, ny))
    if len(lines) != 1 + nx * ny:
        raise ModelFileError(f"{path}: expected {nx * ny} rows, got {len(lines) - 1}")
    for line in lines[1:]:
        i_s, j_s, u_s, v_s = line.split(",")
        i, j = int(i_s), int(j_s)
        u[i, j] = float(u_s)
        v[i, j] = float(v_s)
    if ny == 1:
        return FieldSnapshot(t, u[:, 0], v[:, 0])
    return FieldSnapshot(t, u, v)


def write_diagnostics(path, diag: np.ndarray):
    lines = ["t,l2dev,mass_u,mass_v"]
    for row in np.asarray(diag):
        lines.append(",".join(fmt(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_eigentable(path, modes):
    """Eigenvalue table CSV. Interval modes leave the n column empty."""
    lines = ["m,n,lambda,multiplicity"]
    for mode in modes:
        if len(mode.indices) == 1:
            lines.append(f"{mode.indices[0]},,{fmt(mode.lam)},{mode.multiplicity}")
        else:
            m, n = mode.indices
            lines.append(f"{m},{n},{fmt(mode.lam)},{mode.multiplicity}")
    Path(path).write_text("\n".join(lines) + "\n")
