"""Metric evolution along the supported geometric flows.

Closed forms for Einstein scaling and Heisenberg (Nil3) Ricci flow, a
fixed-step RK4 integrator for the squashed-SU(2) Ricci flow system, and
round-sphere scaling for inverse mean curvature flow.  Each path exposes
curvature-bound functions of time and can verify the first-variation
identities of its driving tensor by finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BlowUpError, RangeError, UsageError
from .metrics import (
    NIL3,
    SU2,
    HomogeneousParams3,
    MetricField,
    ScalingParams,
    euclidean,
    nil3_chart_metric,
    nil3_ricci_chart,
    scaled_metric,
    sphere_angular_metric,
    su2_ricci_eigenvalues,
)

EINSTEIN_SCALING = "einstein_scaling"
NIL3_CLOSED = "nil3_closed"
SU2_ODE = "su2_ode"
IMCF_SPHERE = "imcf_sphere"

SU2_DEFAULT_STEP_FACTOR = 1e-4  # dt = factor * B0
SU2_MAX_STEP_FACTOR = 1e-3  # hard cap from the interface contract
BLOWUP_FRACTION = 1e-9  # coefficient below this fraction of its start aborts


# ---------------------------------------------------------------------------
# Pointwise flow maps
# ---------------------------------------------------------------------------


def einstein_flow(lmbda: float, n: int, t: float) -> float:
    """Scale factor 1 - 2*lambda*t of the Einstein scaling solution."""
    if t < 0:
        raise RangeError("time must be >= 0")
    if lmbda > 0 and not t < 1.0 / (2.0 * lmbda):
        raise RangeError(f"t={t:g} beyond maximal time {1.0 / (2.0 * lmbda):g}")
    return 1.0 - 2.0 * lmbda * t


def nil3_flow(p0: HomogeneousParams3, t: float) -> HomogeneousParams3:
    """Closed-form Heisenberg Ricci flow coefficients at time t (immortal)."""
    if p0.group != NIL3:
        raise UsageError("nil3_flow requires the nil3 group tag")
    if t < 0:
        raise RangeError("time must be >= 0")
    D0, B0, C0 = p0.D, p0.B, p0.C
    w = 12.0 * t + B0 * C0 / D0
    D = D0 ** (2.0 / 3.0) * B0 ** (1.0 / 3.0) * C0 ** (1.0 / 3.0) * w ** (-1.0 / 3.0)
    B = D0 ** (1.0 / 3.0) * B0 ** (2.0 / 3.0) * C0 ** (-1.0 / 3.0) * w ** (1.0 / 3.0)
    C = D0 ** (1.0 / 3.0) * B0 ** (-1.0 / 3.0) * C0 ** (2.0 / 3.0) * w ** (1.0 / 3.0)
    return HomogeneousParams3(group=NIL3, D=D, B=B, C=C)


def imcf_sphere_flow(r0: float, n: int, t: float) -> float:
    """Radius r0 * exp(t/n) of a round n-sphere under inverse mean curvature flow."""
    if not r0 > 0:
        raise UsageError("initial radius must be positive")
    if n < 1:
        raise UsageError("sphere dimension must be >= 1")
    if t < 0:
        raise RangeError("time must be >= 0")
    return r0 * math.exp(t / n)


def _su2_rhs(D: float, B: float, C: float):
    dB = -8.0 + 4.0 * (C * C + D * D - B * B) / (C * D)
    dC = -8.0 + 4.0 * (B * B + D * D - C * C) / (B * D)
    dD = -8.0 + 4.0 * (B * B + C * C - D * D) / (B * C)
    return dD, dB, dC


def _su2_rk4_step(y, dt):
    k1 = _su2_rhs(*y)
    y2 = tuple(y[i] + 0.5 * dt * k1[i] for i in range(3))
    if min(y2) <= 0:
        return None
    k2 = _su2_rhs(*y2)
    y3 = tuple(y[i] + 0.5 * dt * k2[i] for i in range(3))
    if min(y3) <= 0:
        return None
    k3 = _su2_rhs(*y3)
    y4 = tuple(y[i] + dt * k3[i] for i in range(3))
    if min(y4) <= 0:
        return None
    k4 = _su2_rhs(*y4)
    out = tuple(y[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) for i in range(3))
    if min(out) <= 0:
        return None
    return out


def _su2_integrate(p0: HomogeneousParams3, horizon: float, dt: float):
    """Fixed-step RK4 table up to the horizon or a detected blow-up.

    Returns (steps, blowup) where steps is the list of (D, B, C) states at
    0, dt, 2dt, ... and blowup is the bracketing interval or None.
    """
    y = (p0.D, p0.B, p0.C)
    floor = tuple(BLOWUP_FRACTION * c for c in y)
    steps = [y]
    n_steps = int(math.ceil(horizon / dt - 1e-12))
    for k in range(n_steps):
        nxt = _su2_rk4_step(y, dt)
        if nxt is None or any(nxt[i] <= floor[i] for i in range(3)):
            return steps, (k * dt, (k + 1) * dt)
        steps.append(nxt)
        y = nxt
    return steps, None


def su2_flow(p0: HomogeneousParams3, t: float, dt: Optional[float] = None) -> HomogeneousParams3:
    """SU(2) Ricci flow coefficients at time t via fixed-step RK4."""
    if p0.group != SU2:
        raise UsageError("su2_flow requires the su2 group tag")
    if t < 0:
        raise RangeError("time must be >= 0")
    if dt is None:
        dt = SU2_DEFAULT_STEP_FACTOR * p0.B
    if not 0 < dt <= SU2_MAX_STEP_FACTOR * p0.B:
        raise UsageError(f"step must satisfy 0 < dt <= {SU2_MAX_STEP_FACTOR:g} * B0")
    steps, blowup = _su2_integrate(p0, t, dt)
    if blowup is not None and blowup[1] <= t + dt:
        raise BlowUpError(*blowup)
    k_full = min(int(math.floor(t / dt + 1e-12)), len(steps) - 1)
    y = steps[k_full]
    rem = t - k_full * dt
    if rem > 1e-14 * max(1.0, t):
        y = _su2_rk4_step(y, rem)
        if y is None:
            raise BlowUpError(k_full * dt, t)
    return HomogeneousParams3(group=SU2, D=y[0], B=y[1], C=y[2])


# ---------------------------------------------------------------------------
# Flow paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EinsteinParams:
    lmbda: float
    n: int
    base: MetricField


@dataclass(frozen=True)
class ImcfSphereParams:
    r0: float
    n: int


@dataclass(frozen=True)
class CurvatureBounds:
    """Time-dependent Ricci eigenvalue bounds A <= Ric/g <= B and scalar curvature b."""

    A: Callable[[float], float]
    B: Callable[[float], float]
    b: Callable[[float], float]


class FlowPath:
    """A parametrized family t -> metric parameters for one supported flow.

    ``eval`` accepts t in [0, t_max) and returns the flow's natural
    parameters: a scale factor (Einstein), HomogeneousParams3 (Nil3, SU2) or
    a radius (IMCF sphere).
    """

    def __init__(self, kind, params0, t_max, eval_fn, blowup=None):
        self.kind = kind
        self.params0 = params0
        self.t_max = float(t_max)
        self._eval = eval_fn
        self.blowup = blowup

    def eval(self, t: float):
        if t < 0 or not t < self.t_max:
            raise RangeError(f"t={t:g} outside [0, {self.t_max:g})")
        return self._eval(t)


def einstein_path(lmbda: float, n: int, base: Optional[MetricField] = None) -> FlowPath:
    base = base if base is not None else euclidean(n)
    if base.dim != n:
        raise UsageError("base metric dimension must equal n")
    t_max = 1.0 / (2.0 * lmbda) if lmbda > 0 else math.inf
    params0 = EinsteinParams(lmbda=lmbda, n=n, base=base)
    return FlowPath(EINSTEIN_SCALING, params0, t_max, lambda t: einstein_flow(lmbda, n, t))


def nil3_path(p0: HomogeneousParams3) -> FlowPath:
    if p0.group != NIL3:
        raise UsageError("nil3_path requires the nil3 group tag")
    return FlowPath(NIL3_CLOSED, p0, math.inf, lambda t: nil3_flow(p0, t))


class _Su2Eval:
    """Cached RK4 trajectory; immutable after construction."""

    def __init__(self, p0, dt, table):
        self.p0 = p0
        self.dt = dt
        self.table = table  # (k+1, 3) array of (D, B, C)

    def __call__(self, t):
        dt = self.dt
        k = int(math.floor(t / dt + 1e-12))
        k = min(k, self.table.shape[0] - 1)
        y = tuple(self.table[k])
        rem = t - k * dt
        if rem > 1e-14 * max(1.0, t):
            y = _su2_rk4_step(y, rem)
            if y is None:
                raise BlowUpError(k * dt, t)
        return HomogeneousParams3(group=SU2, D=y[0], B=y[1], C=y[2])


def su2_path(p0: HomogeneousParams3, dt: Optional[float] = None, horizon: Optional[float] = None) -> FlowPath:
    """Integrate the SU(2) system once and cache the trajectory.

    The default horizon B0/4 is an outer bound for ordered data (the largest
    coefficient decays at rate at least 4); integration stops early at a
    detected blow-up, which then defines t_max.
    """
    if p0.group != SU2:
        raise UsageError("su2_path requires the su2 group tag")
    if dt is None:
        dt = SU2_DEFAULT_STEP_FACTOR * p0.B
    if not 0 < dt <= SU2_MAX_STEP_FACTOR * p0.B:
        raise UsageError(f"step must satisfy 0 < dt <= {SU2_MAX_STEP_FACTOR:g} * B0")
    if horizon is None:
        horizon = p0.B / 4.0
    steps, blowup = _su2_integrate(p0, horizon, dt)
    table = np.array(steps)
    t_max = blowup[0] if blowup is not None else (len(steps) - 1) * dt
    # the last stored node is reachable; eval is half-open at t_max
    t_max = t_max + dt * 1e-9 if blowup is None else t_max
    return FlowPath(SU2_ODE, p0, t_max, _Su2Eval(p0, dt, table), blowup=blowup)


def imcf_sphere_path(r0: float, n: int) -> FlowPath:
    params0 = ImcfSphereParams(r0=float(r0), n=int(n))
    return FlowPath(IMCF_SPHERE, params0, math.inf, lambda t: imcf_sphere_flow(r0, n, t))


# ---------------------------------------------------------------------------
# Curvature bounds along a path
# ---------------------------------------------------------------------------


def curvature_bounds(path: FlowPath) -> CurvatureBounds:
    """Ricci eigenvalue envelope A(t) <= Ric/g <= B(t) and scalar curvature b(t).

    Only Ricci-flow paths carry curvature bounds; the IMCF sphere path is
    rejected (its driving tensor is the second fundamental form, not Ricci).
    """
    if path.kind == EINSTEIN_SCALING:
        lam, n = path.params0.lmbda, path.params0.n

        def ab(t):
            return lam / (1.0 - 2.0 * lam * t)

        return CurvatureBounds(A=ab, B=ab, b=lambda t: n * ab(t))
    if path.kind == NIL3_CLOSED:
        p0 = path.params0
        k0 = p0.B * p0.C / p0.D

        def mag(t):
            return 2.0 / (12.0 * t + k0)

        return CurvatureBounds(A=lambda t: -mag(t), B=mag, b=lambda t: -mag(t))
    if path.kind == SU2_ODE:

        def eigs(t):
            return su2_ricci_eigenvalues(path.eval(t))

        return CurvatureBounds(
            A=lambda t: min(eigs(t)),
            B=lambda t: max(eigs(t)),
            b=lambda t: sum(eigs(t)),
        )
    raise UsageError(f"curvature bounds unsupported for path kind {path.kind!r}")


# ---------------------------------------------------------------------------
# Chart realizations and first-variation identity residuals
# ---------------------------------------------------------------------------


def chart_metric(path: FlowPath, t: float) -> MetricField:
    """Chart metric of the path at time t (no chart exists for SU(2))."""
    if path.kind == EINSTEIN_SCALING:
        return scaled_metric(ScalingParams(path.params0.base, path.eval(t)))
    if path.kind == NIL3_CLOSED:
        return nil3_chart_metric(path.eval(t))
    if path.kind == IMCF_SPHERE:
        p = path.params0
        return sphere_angular_metric(p.n, path.eval(t))
    raise UsageError(f"no chart realization for path kind {path.kind!r}")


def flow_rate_matrix(path: FlowPath, t: float) -> Callable[[np.ndarray], np.ndarray]:
    """The driving tensor f = dg/dt as a chart matrix field at time t.

    f = -2 Ric for the Ricci paths and (2/n) g for the IMCF sphere path.
    """
    if path.kind == EINSTEIN_SCALING:
        p = path.params0
        base = p.base

        def f_einstein(x):
            return -2.0 * p.lmbda * base.matrix(x)

        return f_einstein
    if path.kind == NIL3_CLOSED:
        ric = nil3_ricci_chart(path.eval(t))

        def f_nil3(x):
            return -2.0 * ric(x)

        return f_nil3
    if path.kind == IMCF_SPHERE:
        g = chart_metric(path, t)
        n = path.params0.n

        def f_imcf(x):
            return (2.0 / n) * g.matrix(x)

        return f_imcf
    raise UsageError(f"no chart realization for path kind {path.kind!r}")


_SAMPLE_BOX = {
    EINSTEIN_SCALING: (-0.4, 0.4),
    NIL3_CLOSED: (-0.4, 0.4),
}
_IMCF_SAMPLE_BOX = {2: [(0.5, 1.1), (0.5, 5.5)], 3: [(0.5, 1.1), (0.5, 2.6), (0.5, 5.5)]}


def _sample_points(path: FlowPath, n_points: int, rng) -> np.ndarray:
    if path.kind == IMCF_SPHERE:
        box = _IMCF_SAMPLE_BOX[path.params0.n]
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
    else:
        dim = 3 if path.kind == NIL3_CLOSED else path.params0.n
        lo = np.full(dim, _SAMPLE_BOX[path.kind][0])
        hi = np.full(dim, _SAMPLE_BOX[path.kind][1])
        if path.kind == EINSTEIN_SCALING:
            # stay well inside a bounded base chart (warped bases)
            base = path.params0.base
            if base.chart_lo is not None:
                lo = base.chart_lo + 0.25 * (base.chart_hi - base.chart_lo)
                hi = base.chart_lo + 0.75 * (base.chart_hi - base.chart_lo)
    return lo + (hi - lo) * rng.random((n_points, len(lo)))


@dataclass(frozen=True)
class IdentityResiduals:
    """Max-over-samples central-difference residuals of the four rate identities."""

    vol_rate: float
    grad_rate: float
    field_rate: float
    div_rate: float

    def as_tuple(self):
        return (self.vol_rate, self.grad_rate, self.field_rate, self.div_rate)


def _poly_field(coeffs):
    """Deterministic polynomial vector field x -> a + B x + x (.) quadratic."""
    a, lin, quad = coeffs

    def X(x):
        return a + lin @ x + quad @ (x * x)

    return X


def flow_identity_residuals(path: FlowPath, t: float, h: float, n_points: int = 5, seed: int = 0) -> IdentityResiduals:
    """Finite-difference residuals of the four first-variation identities.

    At sampled chart points: the volume-density rate (d/dt sqrt(det g) vs
    tr_g(f)/2 * sqrt(det g)), the gradient-norm rate (vs -f(grad u, grad u)),
    the vector-norm rate (vs f(X, X)) and the divergence rate (vs
    X(tr_g f)/2).  Residuals are O(h^2) for the supported paths.
    """
    if t - h < 0 or not t + h < path.t_max:
        raise RangeError("time stencil [t-h, t+h] leaves the certified range")
    if not h > 0:
        raise UsageError("step must be positive")
    rng = np.random.default_rng(seed)
    pts = _sample_points(path, n_points, rng)
    dim = pts.shape[1]
    covecs = rng.standard_normal((n_points, dim))
    vecs = rng.standard_normal((n_points, dim))
    field = _poly_field(
        (
            rng.standard_normal(dim),
            rng.standard_normal((dim, dim)),
            0.5 * rng.standard_normal((dim, dim)),
        )
    )

    g_m = chart_metric(path, t)
    g_p = chart_metric(path, t + h)
    g_mm = chart_metric(path, t - h)
    f_now = flow_rate_matrix(path, t)
    hx = 1e-3

    def sqrtdet(metric, x):
        return math.sqrt(np.linalg.det(metric.matrix(x)))

    def div(metric, x):
        # (1/sqrt det g) d_j (X^j sqrt det g), spatial central differences
        acc = 0.0
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = hx
            acc += (
                field(x + e)[j] * sqrtdet(metric, x + e)
                - field(x - e)[j] * sqrtdet(metric, x - e)
            ) / (2.0 * hx)
        return acc / sqrtdet(metric, x)

    def trace_rate(metric, x):
        return float(np.trace(np.linalg.solve(metric.matrix(x), f_now(x))))

    r_vol = r_grad = r_field = r_div = 0.0
    for i in range(n_points):
        x = pts[i]
        f = f_now(x)
        g = g_m.matrix(x)
        ginv = np.linalg.inv(g)
        tr = float(np.einsum("ij,ij->", ginv, f))

        sd = sqrtdet(g_m, x)
        fd = (sqrtdet(g_p, x) - sqrtdet(g_mm, x)) / (2.0 * h)
        r_vol = max(r_vol, abs(fd - 0.5 * tr * sd))

        du = covecs[i]
        fd = (du @ np.linalg.inv(g_p.matrix(x)) @ du - du @ np.linalg.inv(g_mm.matrix(x)) @ du) / (2.0 * h)
        grad = ginv @ du
        r_grad = max(r_grad, abs(fd + grad @ f @ grad))

        v = vecs[i]
        fd = (v @ g_p.matrix(x) @ v - v @ g_mm.matrix(x) @ v) / (2.0 * h)
        r_field = max(r_field, abs(fd - v @ f @ v))

        fd = (div(g_p, x) - div(g_mm, x)) / (2.0 * h)
        xv = field(x)
        dtr = 0.0
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = hx
            dtr += xv[j] * (trace_rate(g_m, x + e) - trace_rate(g_m, x - e)) / (2.0 * hx)
        r_div = max(r_div, abs(fd - 0.5 * dtr))

    return IdentityResiduals(vol_rate=r_vol, grad_rate=r_grad, field_rate=r_field, div_rate=r_div)
