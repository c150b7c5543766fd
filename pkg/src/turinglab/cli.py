"""Command-line interface.

Subcommands: analyze (stability verdict at fixed diffusion), critical
(critical Dv and transition class), reduce (center-manifold coefficients
and the bifurcated state), simulate (finite-difference run from a JSON
config), sweep (parameter grids to CSV), hprofile (dispersion curve to
CSV).

Exit codes: 0 success, 2 invalid input, 3 numerical failure. Reports are
JSON with 17-significant-digit floats; the default output directory is
$TURINGLAB_OUT, falling back to the working directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import config as cfg
from .errors import InputError, InvalidParameterError, NumericalError, TuringLabError
from .reduction import bifurcated_state, reduce_at_criticality
from .simulator import run as run_simulation
from .spectrum import eigenpairs
from .stability import (
    REFERENCE_CASES,
    critical_dv,
    h_profile,
    schnakenberg_critical_d,
    schnakenberg_reference_audit,
    turing_verdict,
)

__all__ = ["SweepSpec", "main", "run_command"]

_VALID_AXES = ("a", "b", "r", "dv")


def _out_base() -> Path:
    return Path(os.environ.get("TURINGLAB_OUT", "."))


def _say(args, message: str):
    if not args.quiet:
        print(message)


def _mode_dict(mode) -> dict:
    return {
        "indices": list(mode.indices),
        "lambda": mode.lam,
        "multiplicity": mode.multiplicity,
    }


def _require_domain(parsed, path) -> None:
    if parsed.domain is None:
        raise InvalidParameterError(
            f"{path}: model file has no domain block (domain.kind = ...)"
        )


def _match_reference(params):
    if params is None:
        return None
    for key, quoted in REFERENCE_CASES.items():
        if (
            abs(params.a - key[0]) <= 1e-12
            and abs(params.b - key[1]) <= 1e-12
            and abs(params.r - key[2]) <= 1e-12
        ):
            return dict(quoted)
    return None


# ---------------------------------------------------------------------------
# Subcommands.


def _cmd_analyze(args) -> int:
    parsed = cfg.parse_model_file(args.model_file)
    _require_domain(parsed, args.model_file)
    report = turing_verdict(parsed.model, parsed.domain, args.du, args.dv, args.modes)
    out = {
        "model": cfg.model_to_dict(parsed.model),
        "domain": cfg.domain_to_dict(parsed.domain),
        "du": report.du,
        "dv": report.dv,
        "verdict": report.verdict,
        "trace_a": report.trace_a,
        "det_a": report.det_a,
        "D": report.d_coeff,
        "L": report.l_coeff,
        "kc": report.kc,
        "window": None if report.window is None else list(report.window),
        "unstable": [
            dict(_mode_dict(mode), beta2=beta) for mode, beta in report.unstable
        ],
        "modes_enumerated": report.modes_enumerated,
    }
    quoted = _match_reference(parsed.params)
    if quoted is not None and "d_coeff" in quoted:
        if abs(args.du - quoted["du"]) <= 1e-12 and abs(args.dv - quoted["dv"]) <= 1e-12:
            out["reference_comparison"] = {
                "quoted": {"D": quoted["d_coeff"], "L": quoted["l_coeff"]},
                "computed": {"D": report.d_coeff, "L": report.l_coeff},
            }
    path = Path(args.out) if args.out else _out_base() / "analyze.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    cfg.write_json(path, out)
    if args.eigen_table:
        table = Path(args.eigen_table)
        table.parent.mkdir(parents=True, exist_ok=True)
        cfg.write_eigentable(table, eigenpairs(parsed.domain, args.modes))
    _say(args, f"verdict: {report.verdict} ({len(report.unstable)} unstable modes)")
    _say(args, f"report: {path}")
    return 0


def _cmd_critical(args) -> int:
    parsed = cfg.parse_model_file(args.model_file)
    _require_domain(parsed, args.model_file)
    if parsed.params is not None:
        crit = schnakenberg_critical_d(parsed.params, parsed.domain, args.modes, args.du)
    else:
        crit = critical_dv(parsed.model, parsed.domain, args.du, args.modes)
    out = {
        "model": cfg.model_to_dict(parsed.model),
        "domain": cfg.domain_to_dict(parsed.domain),
        "du": args.du,
        "dv0": crit.dv0,
        "kc0": crit.kc0,
        "bracket": list(crit.bracket),
        "thresholds": list(crit.thresholds),
        "dv_star": crit.dv_star,
        "transition_class": crit.transition_class,
        "critical_modes": [_mode_dict(m) for m in crit.critical_modes],
    }
    if parsed.params is not None:
        audit = schnakenberg_reference_audit(parsed.params, args.du)
        block = {
            "trace_a": audit.trace_a,
            "hypothesis_ok": audit.hypothesis_ok,
            "dv0": audit.dv0,
            "kc0": audit.kc0,
            "tangency_defect": audit.tangency_defect,
            "dv0_quoted_formula": audit.dv0_quoted,
            "kc0_quoted_formula": audit.kc0_quoted,
            "tangency_defect_quoted": audit.tangency_defect_quoted,
        }
        quoted = _match_reference(parsed.params)
        if quoted is not None and "dv0" in quoted:
            block["quoted"] = quoted
        out["reference_audit"] = block
    path = Path(args.out) if args.out else _out_base() / "critical.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    cfg.write_json(path, out)
    _say(
        args,
        f"dv_star = {crit.dv_star:.6g} ({crit.transition_class}), "
        f"modes: {[m.indices for m in crit.critical_modes]}",
    )
    _say(args, f"report: {path}")
    return 0


def _branch_dicts(classification) -> list:
    rows = []
    for b in classification.branches:
        if hasattr(b, "amplitude"):
            rows.append({"amplitude": b.amplitude, "attractor": b.attractor})
        else:
            rows.append(
                {
                    "x": b.x,
                    "y": b.y,
                    "jacobian": list(b.jac),
                    "attractor": b.attractor,
                }
            )
    return rows


def _cmd_reduce(args) -> int:
    parsed = cfg.parse_model_file(args.model_file)
    _require_domain(parsed, args.model_file)
    model, domain = parsed.model, parsed.domain
    crit = critical_dv(model, domain, args.du, args.modes)
    reduced = reduce_at_criticality(
        model, domain, args.du, critical=crit, mode_count=args.modes, n_modes=args.n_modes
    )
    delta = 0.0 if args.dv is None else args.dv - crit.dv_star
    state = bifurcated_state(reduced, delta)
    out = {
        "model": cfg.model_to_dict(model),
        "domain": cfg.domain_to_dict(domain),
        "du": args.du,
        "dv_star": crit.dv_star,
        "transition_class": crit.transition_class,
        "kind": reduced.kind,
        "critical_modes": [_mode_dict(d.mode) for d in reduced.data],
        "eigendata": [
            {
                "indices": list(d.mode.indices),
                "xi": d.xi.tolist(),
                "xi_star": d.xi_star.tolist(),
                "norm_h": d.norm_h,
                "residual": d.residual,
            }
            for d in reduced.data
        ],
        "P": reduced.P,
        "Q": None
        if reduced.Q is None
        else {
            "total": reduced.Q.total,
            "cross": reduced.Q.q_cross,
            "direct": reduced.Q.q_direct,
        },
        "planar": None
        if reduced.planar is None
        else {
            "tabulated": vars(reduced.planar.tabulated).copy(),
            "direct": vars(reduced.planar.direct).copy(),
            "s1": reduced.planar.s1,
            "s2": reduced.planar.s2,
            "s3": reduced.planar.s3,
            "h1": reduced.planar.h1,
            "h2": reduced.planar.h2,
            "integrals": {
                "e1^3": reduced.planar.i111,
                "e1^2 e2": reduced.planar.i112,
                "e1 e2^2": reduced.planar.i122,
                "e2^3": reduced.planar.i222,
            },
            "axis_cubic": {
                "x": None if reduced.axis_cubic_x is None else reduced.axis_cubic_x.total,
                "y": None if reduced.axis_cubic_y is None else reduced.axis_cubic_y.total,
            },
        },
        "state": {
            "dv": state.dv,
            "delta": state.delta,
            "betas": list(state.betas),
            "transition_type": state.transition_type,
            "amplitudes": list(state.amplitudes),
            "attractor": state.attractor,
            "branches": _branch_dicts(state.classification),
        },
    }
    path = Path(args.out) if args.out else _out_base() / "reduce.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    cfg.write_json(path, out)
    if reduced.Q is not None and reduced.Q.psi:
        psi_path = path.with_name(path.stem + "_psi.csv")
        lines = ["m,n,lambda,psi_u,psi_v"]
        for mode, vec in reduced.Q.psi:
            m = mode.indices[0]
            n = mode.indices[1] if len(mode.indices) > 1 else ""
            lines.append(f"{m},{n},{cfg.fmt(mode.lam)},{cfg.fmt(vec[0])},{cfg.fmt(vec[1])}")
        psi_path.write_text("\n".join(lines) + "\n")
    _say(args, f"kind: {reduced.kind}, transition: {state.transition_type}")
    _say(args, f"report: {path}")
    return 0


def _cmd_simulate(args) -> int:
    config = cfg.parse_sim_config(args.config, default_seed=args.seed)
    out_dir = Path(args.out) if args.out else _out_base() / "run"
    result = run_simulation(config, out_dir=out_dir)
    term = result.manifest["termination"]
    _say(args, f"termination: {term} at t={result.manifest['t_final']:g}")
    _say(args, f"outputs: {out_dir}")
    if term != "completed":
        print(
            f"turinglab: numerical failure: blow-up at t={result.manifest['blow_up_time']:g}; "
            f"partial outputs in {out_dir}",
            file=sys.stderr,
        )
        return 3
    return 0


@dataclass(frozen=True)
class SweepSpec:
    """Up to two named parameter axes, row-major cell order."""

    axes: tuple[tuple[str, np.ndarray], ...]

    @classmethod
    def parse(cls, axis_args) -> "SweepSpec":
        if not axis_args:
            raise InvalidParameterError("sweep needs at least one --axis")
        if len(axis_args) > 2:
            raise InvalidParameterError("sweep supports at most two axes")
        axes = []
        seen = set()
        for spec in axis_args:
            parts = spec.split(":")
            if len(parts) != 4:
                raise InvalidParameterError(
                    f"--axis must be name:min:max:steps, got {spec!r}"
                )
            name = parts[0]
            if name not in _VALID_AXES:
                raise InvalidParameterError(
                    f"axis name must be one of {_VALID_AXES}, got {name!r}"
                )
            if name in seen:
                raise InvalidParameterError(f"duplicate axis {name!r}")
            seen.add(name)
            try:
                lo, hi = float(parts[1]), float(parts[2])
                steps = int(parts[3])
            except ValueError as exc:
                raise InvalidParameterError(f"--axis {spec!r}: {exc}") from None
            if steps < 1 or not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise InvalidParameterError(f"--axis {spec!r}: bad range")
            if steps > 1 and lo == hi:
                raise InvalidParameterError(f"--axis {spec!r}: min = max needs steps=1")
            values = np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])
            axes.append((name, values))
        return cls(tuple(axes))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(vals) for _, vals in self.axes)


def _sweep_cell(parsed, spec: SweepSpec, idx, du: float, dv_fixed, mode_count: int) -> dict:
    row: dict = {}
    overrides = {}
    dv = dv_fixed
    for (name, values), i in zip(spec.axes, idx):
        value = float(values[i])
        row[name] = value
        if name == "dv":
            dv = value
        else:
            overrides[name] = value
    row.update({"verdict": None, "d0": None, "transition_class": None, "error": None})
    try:
        if overrides:
            params = replace(parsed.params, **overrides)
            from .kinetics import schnakenberg_model

            model = schnakenberg_model(params)
        else:
            params = parsed.params
            model = parsed.model
        if dv is not None:
            row["verdict"] = turing_verdict(model, parsed.domain, du, dv, mode_count).verdict
        crit = critical_dv(model, parsed.domain, du, mode_count)
        row["d0"] = crit.dv_star
        row["transition_class"] = crit.transition_class
    except TuringLabError as exc:
        row["error"] = str(exc)
    return row


def _cmd_sweep(args) -> int:
    parsed = cfg.parse_model_file(args.model_file)
    _require_domain(parsed, args.model_file)
    spec = SweepSpec.parse(args.axis)
    needs_params = any(name in ("a", "b", "r") for name, _ in spec.axes)
    if needs_params and parsed.params is None:
        raise InvalidParameterError("a/b/r axes require a schnakenberg model file")
    cells = list(np.ndindex(spec.shape))
    worker = lambda idx: _sweep_cell(parsed, spec, idx, args.du, args.dv, args.modes)
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(worker, cells))
    else:
        rows = [worker(idx) for idx in cells]

    axis_names = [name for name, _ in spec.axes]
    header = axis_names + ["verdict", "d0", "transition_class", "error"]
    lines = [",".join(header)]
    for row in rows:
        fields = []
        for name in axis_names:
            fields.append(cfg.fmt(row[name]))
        fields.append(row["verdict"] or "none")
        fields.append("none" if row["d0"] is None else cfg.fmt(row["d0"]))
        fields.append(row["transition_class"] or "none")
        err = row["error"] or "none"
        fields.append('"' + err.replace('"', "'") + '"' if "," in err else err)
        lines.append(",".join(fields))
    path = Path(args.out) if args.out else _out_base() / "sweep.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    _say(args, f"{len(rows)} cells -> {path}")
    return 0


def _cmd_hprofile(args) -> int:
    parsed = cfg.parse_model_file(args.model_file)
    profile = h_profile(parsed.model, args.du, args.dv, args.lambda_max, args.samples)
    lines = ["lambda,h"]
    for lam, h in profile:
        lines.append(f"{cfg.fmt(lam)},{cfg.fmt(h)}")
    path = Path(args.out) if args.out else _out_base() / "hprofile.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    _say(args, f"{profile.shape[0]} samples -> {path}")
    return 0


# ---------------------------------------------------------------------------
# Parser and dispatch.


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="turinglab",
        description="Diffusion-driven instability analysis for two-component systems",
    )
    parser.add_argument("--seed", type=int, default=0, help="default RNG seed")
    parser.add_argument("--threads", type=int, default=1, help="sweep worker threads")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    # The same flags are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering a value parsed at the top level.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="stability verdict at fixed diffusion", parents=[common])
    p.add_argument("--model-file", required=True)
    p.add_argument("--du", type=float, required=True)
    p.add_argument("--dv", type=float, required=True)
    p.add_argument("--modes", type=int, default=64)
    p.add_argument("--out")
    p.add_argument("--eigen-table", help="also write the eigenvalue table CSV here")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("critical", help="critical Dv and transition class", parents=[common])
    p.add_argument("--model-file", required=True)
    p.add_argument("--du", type=float, default=1.0)
    p.add_argument("--modes", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_critical)

    p = sub.add_parser("reduce", help="center-manifold reduction at criticality", parents=[common])
    p.add_argument("--model-file", required=True)
    p.add_argument("--du", type=float, default=1.0)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--at-critical", action="store_true", help="evaluate at dv_star (default)")
    group.add_argument("--dv", type=float, help="evaluate the bifurcated state at this dv")
    p.add_argument("--modes", type=int, default=64)
    p.add_argument("--n-modes", type=int, default=32, help="modes in the slaved solve")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("simulate", help="run the finite-difference solver", parents=[common])
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="parameter sweep to CSV", parents=[common])
    p.add_argument("--model-file", required=True)
    p.add_argument("--du", type=float, default=1.0)
    p.add_argument("--dv", type=float, help="fixed dv for verdicts")
    p.add_argument("--modes", type=int, default=64)
    p.add_argument(
        "--axis",
        action="append",
        default=[],
        help="name:min:max:steps with name in a, b, r, dv; repeat for two axes",
    )
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("hprofile", help="dispersion curve to CSV", parents=[common])
    p.add_argument("--model-file", required=True)
    p.add_argument("--du", type=float, required=True)
    p.add_argument("--dv", type=float, required=True)
    p.add_argument("--lambda-max", type=float, required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_hprofile)
    return parser


def run_command(argv) -> int:
    """Parse argv (without the program name) and execute; returns exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except InputError as exc:
        print(f"turinglab: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"turinglab: numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"turinglab: error: {exc}", file=sys.stderr)
        return 2


def main() -> int:
    return run_command(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
