"""Declarative experiment driver: config in, series/envelopes/verdicts out.

A JSON config selects a flow, a domain and solver settings; ``run`` samples
the rigidity along the flow, attaches every applicable bound envelope and
monotonicity verdict, and writes deterministic CSV/JSON reports (identical
configs produce bit-identical outputs).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import jsonschema
import numpy as np

from . import __version__
from .certificates import (
    BoundEnvelope,
    FunctionalVerdict,
    RigiditySeries,
    functional_checks,
    imcf_envelope,
    ricci_envelope,
    su2_delta_envelope,
    verdicts_pass,
)
from .errors import ConfigError, UsageError
from .fem import DEFAULT_TOL, kernel_backend, solve_exit_time
from .flows import (
    FlowPath,
    curvature_bounds,
    einstein_path,
    flow_identity_residuals,
    imcf_sphere_path,
    nil3_path,
    su2_path,
)
from .meshing import build_box_mesh, build_disk_mesh
from .metrics import (
    NIL3,
    SU2,
    HomogeneousParams3,
    ScalingParams,
    nil3_chart_metric,
    scale_warp,
    scaled_metric,
    sphere_warp,
)
from .radial import radial_rigidity

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["flow", "domain", "solver"],
    "additionalProperties": False,
    "properties": {
        "flow": {
            "type": "object",
            "required": ["kind", "t_grid"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["einstein", "nil3", "su2", "imcf_sphere"]},
                "t_grid": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                "lambda": {"type": "number"},
                "n": {"type": "integer", "minimum": 1},
                "D0": {"type": "number", "exclusiveMinimum": 0},
                "B0": {"type": "number", "exclusiveMinimum": 0},
                "C0": {"type": "number", "exclusiveMinimum": 0},
                "r0": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "domain": {
            "type": "object",
            "required": ["type"],
            "additionalProperties": False,
            "properties": {
                "type": {"enum": ["disk", "box", "cap"]},
                "radius": {"type": "number", "exclusiveMinimum": 0},
                "bounds": {
                    "type": "array",
                    "minItems": 1,
                    "maxItems": 3,
                    "items": {
                        "type": "array",
                        "minItems": 2,
                        "maxItems": 2,
                        "items": {"type": "number"},
                    },
                },
                "cap_radius": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "refinement": {"type": "integer", "minimum": 0},
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"csv": {"type": "string"}, "json": {"type": "string"}},
        },
        "identities": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                "h": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0}},
            },
        },
    },
}

_FLOW_DOMAIN = {"einstein": {"disk", "box"}, "nil3": {"box"}, "su2": {"cap"}, "imcf_sphere": {"cap"}}


def validate_config(config: dict) -> dict:
    """Schema plus semantic validation; raises ConfigError with a JSON pointer."""
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(e.message, e.json_path) from e
    flow = config["flow"]
    kind = flow["kind"]
    t = flow["t_grid"]
    if t[0] != 0:
        raise ConfigError("t_grid must start at 0", "$.flow.t_grid")
    if any(b <= a for a, b in zip(t, t[1:])):
        raise ConfigError("t_grid must be strictly increasing", "$.flow.t_grid")
    dom = config["domain"]
    if dom["type"] not in _FLOW_DOMAIN[kind]:
        raise ConfigError(f"flow {kind!r} requires domain type in {sorted(_FLOW_DOMAIN[kind])}", "$.domain.type")
    if kind == "einstein":
        if "lambda" not in flow:
            raise ConfigError("einstein flow requires lambda", "$.flow")
        n = flow.get("n", 2)
        if dom["type"] == "disk" and n != 2:
            raise ConfigError("disk domains are two-dimensional; set n = 2", "$.flow.n")
        if dom["type"] == "box" and len(dom.get("bounds", [])) != n:
            raise ConfigError("box bounds must match the flow dimension n", "$.domain.bounds")
    if kind in ("nil3", "su2"):
        for key in ("D0", "B0", "C0"):
            if key not in flow:
                raise ConfigError(f"{kind} flow requires {key}", "$.flow")
    if kind == "su2" and not (flow["D0"] == flow["B0"] == flow["C0"]):
        raise ConfigError(
            "measured su2 series require the round case B0 = C0 = D0 "
            "(pinched metrics are certified at ODE level only)",
            "$.flow",
        )
    if kind == "imcf_sphere":
        if "r0" not in flow:
            raise ConfigError("imcf_sphere flow requires r0", "$.flow")
        if flow.get("n", 2) not in (2, 3):
            raise ConfigError("imcf_sphere supports n in {2, 3}", "$.flow.n")
    if dom["type"] == "disk" and "radius" not in dom:
        raise ConfigError("disk domain requires radius", "$.domain")
    if dom["type"] == "box" and "bounds" not in dom:
        raise ConfigError("box domain requires bounds", "$.domain")
    if dom["type"] == "cap" and "cap_radius" not in dom:
        raise ConfigError("cap domain requires cap_radius", "$.domain")
    return config


def build_path(config: dict) -> FlowPath:
    flow = config["flow"]
    kind = flow["kind"]
    if kind == "einstein":
        n = flow.get("n", 2)
        return einstein_path(flow["lambda"], n)
    if kind == "nil3":
        return nil3_path(HomogeneousParams3(group=NIL3, D=flow["D0"], B=flow["B0"], C=flow["C0"]))
    if kind == "su2":
        return su2_path(HomogeneousParams3(group=SU2, D=flow["D0"], B=flow["B0"], C=flow["C0"]))
    return imcf_sphere_path(flow["r0"], flow.get("n", 2))


@dataclass
class RunReport:
    series: RigiditySeries
    envelopes: list[BoundEnvelope]
    verdicts: list[FunctionalVerdict]
    provenance: dict
    T_energy: np.ndarray
    residuals: np.ndarray

    @property
    def passed(self) -> bool:
        return verdicts_pass(self.verdicts)


def _solve_samples(solve_one, t_grid, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(solve_one, t_grid))
    return [solve_one(t) for t in t_grid]


def run(config: dict, threads: int = 1) -> RunReport:
    """Sample rigidity along the configured flow and certify the series."""
    config = validate_config(config)
    flow = config["flow"]
    kind = flow["kind"]
    dom = config["domain"]
    solver = config.get("solver", {})
    tol = solver.get("tol", DEFAULT_TOL)
    refinement = solver.get("refinement", 3)
    t_grid = np.asarray(flow["t_grid"], dtype=float)
    path = build_path(config)
    if not t_grid[-1] < path.t_max:
        raise ConfigError(f"t_grid exceeds the path horizon {path.t_max:g}", "$.flow.t_grid")

    mesh = None
    mesh_h = None
    if dom["type"] == "disk":
        mesh = build_disk_mesh(dom["radius"], refinement)
    elif dom["type"] == "box":
        mesh = build_box_mesh(dom["bounds"], refinement)
    if mesh is not None:
        mesh_h = mesh.h
        n_dim = mesh.dim

        def metric_at_time(t):
            if kind == "einstein":
                return scaled_metric(ScalingParams(path.params0.base, path.eval(t)))
            return nil3_chart_metric(path.eval(t))

        def solve_one(t):
            E, rep = solve_exit_time(mesh, metric_at_time(t), tol=tol)
            return rep.T_integral, rep.V, rep.T_energy, rep.residual

    else:
        n_dim = flow.get("n", 3 if kind == "su2" else 2)
        if kind == "su2":
            warp0 = sphere_warp(3, math.sqrt(flow["B0"]), dom["cap_radius"])
            n_dim = 3

            def scale_at(t):
                return path.eval(t).B / flow["B0"]

        else:
            warp0 = sphere_warp(n_dim, flow["r0"], dom["cap_radius"])

            def scale_at(t):
                return (path.eval(t) / flow["r0"]) ** 2

        def solve_one(t):
            rr = radial_rigidity(scale_warp(warp0, scale_at(t)))
            # the radial solution is exact: energy equals the integral and
            # there is no algebraic residual to report
            return rr.T, rr.V, rr.T, 0.0

    samples = _solve_samples(solve_one, t_grid, threads)
    T = np.array([s[0] for s in samples])
    V = np.array([s[1] for s in samples])
    T_energy = np.array([s[2] for s in samples])
    residuals = np.array([s[3] for s in samples])
    series = RigiditySeries(t=t_grid, T=T, V=V, n=n_dim)

    envelopes = []
    if kind in ("einstein", "nil3", "su2"):
        envelopes.append(ricci_envelope(curvature_bounds(path), series.T0, t_grid))
    if kind == "su2":
        envelopes.append(su2_delta_envelope(flow["B0"], 0.0, series.T0, t_grid))
    if kind == "imcf_sphere":
        envelopes.append(imcf_envelope(series.T0, t_grid))
    # monotonicity needs at least 3 samples; short runs (solve, sweep) skip it
    if len(t_grid) >= 3:
        verdicts = functional_checks(series, "imcf" if kind == "imcf_sphere" else kind)
    else:
        verdicts = []

    provenance = {
        "config": config,
        "version": __version__,
        "kernel_backend": kernel_backend(),
        "mesh_h": mesh_h,
        "solver_residuals": [float(r) for r in residuals],
    }
    return RunReport(
        series=series,
        envelopes=envelopes,
        verdicts=verdicts,
        provenance=provenance,
        T_energy=T_energy,
        residuals=residuals,
    )


@dataclass
class SweepReport:
    levels: list[int]
    h: list[float]
    T: list[float]
    observed_orders: list[float]
    T_extrapolated: float
    provenance: dict


def convergence_sweep(config: dict, levels: int, threads: int = 1) -> SweepReport:
    """Repeat the t = 0 solve at successive refinements and extrapolate.

    Reports the rigidity sequence, the observed convergence orders from
    consecutive triples, and the Richardson limit.
    """
    if levels < 2:
        raise UsageError("sweep needs at least 2 refinement levels")
    config = validate_config(config)
    base = config["solver"].get("refinement", 1) if "solver" in config else 1
    lvls = list(range(base, base + levels))
    Ts, hs = [], []
    for lvl in lvls:
        cfg = json.loads(json.dumps(config))
        cfg["solver"]["refinement"] = lvl
        cfg["flow"]["t_grid"] = [0.0]
        rep = run(cfg, threads=threads)
        Ts.append(float(rep.series.T[0]))
        hs.append(rep.provenance["mesh_h"] if rep.provenance["mesh_h"] is not None else 0.0)
    orders = []
    for i in range(len(Ts) - 2):
        d1 = Ts[i + 1] - Ts[i]
        d2 = Ts[i + 2] - Ts[i + 1]
        orders.append(math.log2(abs(d1 / d2)) if d2 != 0 else float("inf"))
    p = orders[-1] if orders and math.isfinite(orders[-1]) else 2.0
    T_ext = Ts[-1] + (Ts[-1] - Ts[-2]) / (2.0**p - 1.0)
    provenance = {"config": config, "version": __version__, "kernel_backend": kernel_backend()}
    return SweepReport(levels=lvls, h=hs, T=Ts, observed_orders=orders, T_extrapolated=T_ext, provenance=provenance)


def check_identities(config: dict, seed: int = 0) -> list[dict]:
    """Tabulate the four first-variation identity residuals per (t, h)."""
    config = validate_config(config)
    ident = config.get("identities", {})
    t_samples = ident.get("t", [0.5, 1.0])
    h_values = ident.get("h", [0.02, 0.01, 0.005])
    path = build_path(config)
    rows = []
    for t in t_samples:
        for h in h_values:
            r = flow_identity_residuals(path, t, h, seed=seed)
            rows.append(
                {
                    "t": float(t),
                    "h": float(h),
                    "vol_rate": r.vol_rate,
                    "grad_rate": r.grad_rate,
                    "field_rate": r.field_rate,
                    "div_rate": r.div_rate,
                }
            )
    return rows


# ---------------------------------------------------------------------------
# Deterministic report files
# ---------------------------------------------------------------------------


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def report_csv(report: RunReport) -> str:
    tags = [e.tag for e in report.envelopes]
    header = ["t", "T", "V", "T_energy", "residual"]
    for tag in tags:
        header += [f"lower_{tag}", f"upper_{tag}"]
    lines = [",".join(header)]
    s = report.series
    for i in range(len(s.t)):
        row = [_fmt(s.t[i]), _fmt(s.T[i]), _fmt(s.V[i]), _fmt(report.T_energy[i]), _fmt(report.residuals[i])]
        for e in report.envelopes:
            row += [_fmt(e.lower[i]), _fmt(e.upper[i])]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def report_json(report: RunReport) -> str:
    obj = {
        "series": {
            "t": report.series.t.tolist(),
            "T": report.series.T.tolist(),
            "V": report.series.V.tolist(),
            "n": report.series.n,
            "T_energy": report.T_energy.tolist(),
        },
        "envelopes": [
            {"tag": e.tag, "grid": e.grid.tolist(), "lower": e.lower.tolist(), "upper": e.upper.tolist()}
            for e in report.envelopes
        ],
        "verdicts": [
            {
                "functional": v.functional,
                "direction": v.direction,
                "passed": v.passed,
                "worst_pair": list(v.worst_pair) if v.worst_pair else None,
                "worst_violation": v.worst_violation,
                "values": v.values.tolist(),
            }
            for v in report.verdicts
        ],
        "passed": report.passed,
        "provenance": report.provenance,
    }
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_report(report: RunReport, csv_path: Optional[str], json_path: Optional[str]) -> None:
    if csv_path:
        _atomic_write(csv_path, report_csv(report))
    if json_path:
        _atomic_write(json_path, report_json(report))
