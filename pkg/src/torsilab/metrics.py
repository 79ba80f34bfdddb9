"""Coordinate-chart metric models and curvature evaluation.

Supported families: constant-coefficient (Euclidean and conformal scalings),
left-invariant Heisenberg (Nil3) metrics realized on a global chart of R^3,
rotationally symmetric warped metrics in polar coordinates, and round-sphere
metrics in angular coordinates.  Squashed SU(2) metrics are handled purely
parametrically (Ricci eigenvalues); no chart is built for them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ChartDomainError, UsageError

NIL3 = "nil3"
SU2 = "su2"


@dataclass(frozen=True)
class MetricField:
    """Pointwise symmetric positive-definite metric in a coordinate chart.

    ``matrix`` maps a chart point (shape ``(dim,)``) to the metric matrix;
    ``matrix_many`` is the vectorized form used by assembly, mapping
    ``(m, dim)`` points to ``(m, dim, dim)`` matrices.  ``chart_lo`` and
    ``chart_hi`` bound the open chart domain (``None`` means unbounded).
    """

    dim: int
    matrix: Callable[[np.ndarray], np.ndarray]
    matrix_many: Callable[[np.ndarray], np.ndarray]
    chart_lo: Optional[np.ndarray] = None
    chart_hi: Optional[np.ndarray] = None
    name: str = ""

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            return False
        if self.chart_lo is not None and not np.all(x > self.chart_lo):
            return False
        if self.chart_hi is not None and not np.all(x < self.chart_hi):
            return False
        return True


@dataclass(frozen=True)
class HomogeneousParams3:
    """Coefficients of a diagonal left-invariant 3-metric in a Milnor coframe.

    ``D`` multiplies the fiber form (the one that couples the chart
    coordinates in the Nil3 realization), ``B`` and ``C`` the remaining two.
    """

    group: str
    D: float
    B: float
    C: float

    def __post_init__(self):
        if self.group not in (NIL3, SU2):
            raise UsageError(f"unknown group tag {self.group!r}")
        if not (self.D > 0 and self.B > 0 and self.C > 0):
            raise UsageError("metric coefficients must be strictly positive")

    @property
    def delta(self) -> float:
        """Pinching parameter (B - D) / D of the initial data."""
        return (self.B - self.D) / self.D

    @property
    def is_ordered(self) -> bool:
        """Whether D <= C <= B, the ordering required for certified runs."""
        return self.D <= self.C <= self.B


@dataclass(frozen=True)
class ScalingParams:
    """A metric rescaled by a constant conformal factor c > 0."""

    base: MetricField
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise UsageError("scaling factor must be strictly positive")


@dataclass(frozen=True)
class RadialWarp:
    """Rotationally symmetric metric dr^2 + f(r)^2 dS^2 on a ball of radius R.

    ``f`` must satisfy f(0) = 0, f'(0) = 1 and stay positive on (0, R].
    """

    n: int
    f: Callable[[float], float]
    R: float

    def __post_init__(self):
        if self.n < 1:
            raise UsageError("dimension must be >= 1")
        if not self.R > 0:
            raise UsageError("domain radius must be positive")
        eps = 1e-7
        if abs(self.f(eps) / eps - 1.0) > 1e-4:
            raise UsageError("warping function must satisfy f(0)=0, f'(0)=1")
        for r in np.linspace(self.R / 7, self.R, 7):
            if not self.f(float(r)) > 0:
                raise UsageError("warping function must be positive on (0, R]")


def flat_warp(n: int, R: float = 1.0) -> RadialWarp:
    """Euclidean ball of radius R as a radial warp (f(r) = r)."""
    return RadialWarp(n=n, f=lambda r: r, R=R)


def sphere_warp(n: int, radius: float, cap: float) -> RadialWarp:
    """Geodesic cap of radius ``cap`` on the round n-sphere of given radius."""
    if not 0 < cap < np.pi * radius:
        raise UsageError("cap radius must lie in (0, pi * radius)")
    rho = float(radius)
    return RadialWarp(n=n, f=lambda r: rho * np.sin(r / rho), R=float(cap))


def scale_warp(w: RadialWarp, c: float) -> RadialWarp:
    """The warp of the same domain after rescaling the metric by c.

    Geodesic radii scale by sqrt(c), so f_c(r) = sqrt(c) f(r / sqrt(c)) and
    the domain radius becomes sqrt(c) R.
    """
    if not c > 0:
        raise UsageError("scaling factor must be strictly positive")
    s = float(np.sqrt(c))
    return RadialWarp(n=w.n, f=lambda r: s * w.f(r / s), R=s * w.R)


# ---------------------------------------------------------------------------
# Metric constructors
# ---------------------------------------------------------------------------


def euclidean(dim: int) -> MetricField:
    ident = np.eye(dim)

    def one(x):
        return ident.copy()

    def many(xs):
        xs = np.asarray(xs, dtype=float)
        return np.broadcast_to(ident, (xs.shape[0], dim, dim)).copy()

    return MetricField(dim=dim, matrix=one, matrix_many=many, name="euclidean")


def scaled_metric(sp: ScalingParams) -> MetricField:
    base, c = sp.base, float(sp.c)

    def one(x):
        return c * base.matrix(x)

    def many(xs):
        return c * base.matrix_many(xs)

    return MetricField(
        dim=base.dim,
        matrix=one,
        matrix_many=many,
        chart_lo=base.chart_lo,
        chart_hi=base.chart_hi,
        name=f"{c:g}*{base.name}",
    )


def _nil3_coframe_chart(c1: float, c2: float, c3: float):
    """Chart expansion of c1*th1 (x) th1 + c2*th2 (x) th2 + c3*th3 (x) th3.

    Coframe realization on the global chart (x, y, z) of the Heisenberg
    group: th1 = dz - 2x dy, th2 = dx, th3 = dy, so that d th1 =
    -2 th2 ^ th3 and the frame bracket carries the doubled structure
    constant that the closed-form curvature and flow coefficients assume.
    """

    def one(x):
        xc = float(x[0])
        return np.array(
            [
                [c2, 0.0, 0.0],
                [0.0, c3 + 4.0 * c1 * xc * xc, -2.0 * c1 * xc],
                [0.0, -2.0 * c1 * xc, c1],
            ]
        )

    def many(xs):
        xs = np.asarray(xs, dtype=float)
        m = xs.shape[0]
        xc = xs[:, 0]
        out = np.zeros((m, 3, 3))
        out[:, 0, 0] = c2
        out[:, 1, 1] = c3 + 4.0 * c1 * xc * xc
        out[:, 1, 2] = -2.0 * c1 * xc
        out[:, 2, 1] = -2.0 * c1 * xc
        out[:, 2, 2] = c1
        return out

    return one, many


def nil3_chart_metric(p: HomogeneousParams3) -> MetricField:
    """Left-invariant Heisenberg metric on the global chart (x, y, z)."""
    if p.group != NIL3:
        raise UsageError("nil3_chart_metric requires the nil3 group tag")
    one, many = _nil3_coframe_chart(p.D, p.B, p.C)
    return MetricField(dim=3, matrix=one, matrix_many=many, name="nil3")


def nil3_ricci_chart(p: HomogeneousParams3) -> Callable[[np.ndarray], np.ndarray]:
    """Ricci tensor of the Nil3 metric as a chart matrix field.

    Coframe coefficients: 2D^2/(BC) on th1, -2D/C on th2, -2D/B on th3.
    """
    if p.group != NIL3:
        raise UsageError("nil3_ricci_chart requires the nil3 group tag")
    D, B, C = p.D, p.B, p.C
    one, _ = _nil3_coframe_chart(2 * D * D / (B * C), -2 * D / C, -2 * D / B)
    return one


def radial_warp_metric(w: RadialWarp) -> MetricField:
    """Polar-coordinate chart metric of a radial warp (away from the origin).

    Coordinates are (r,), (r, phi) or (r, theta, phi); the chart excludes the
    coordinate singularities at r = 0 and at the poles.
    """
    n, f = w.n, w.f

    def one(x):
        g = np.zeros((n, n))
        g[0, 0] = 1.0
        if n >= 2:
            g[1, 1] = f(float(x[0])) ** 2
        if n >= 3:
            g[2, 2] = g[1, 1] * np.sin(float(x[1])) ** 2
        return g

    def many(xs):
        xs = np.asarray(xs, dtype=float)
        m = xs.shape[0]
        g = np.zeros((m, n, n))
        g[:, 0, 0] = 1.0
        if n >= 2:
            fr = np.array([f(float(r)) for r in xs[:, 0]])
            g[:, 1, 1] = fr**2
        if n >= 3:
            g[:, 2, 2] = g[:, 1, 1] * np.sin(xs[:, 1]) ** 2
        return g

    lo = np.zeros(n)
    hi = np.array([w.R, np.pi, 2 * np.pi][:n])
    return MetricField(dim=n, matrix=one, matrix_many=many, chart_lo=lo, chart_hi=hi, name="radial-warp")


def sphere_angular_metric(n: int, radius: float) -> MetricField:
    """Round n-sphere of the given radius in angular coordinates.

    For n = 2 the chart is (psi, phi) with metric diag(r^2, r^2 sin^2 psi);
    for n = 3 one more azimuthal angle is appended.  Used as the induced
    hypersurface metric for sphere flows, where time enters as a constant
    conformal factor on this fixed chart.
    """
    if n not in (2, 3):
        raise UsageError("angular sphere chart supports n in {2, 3}")
    r2 = float(radius) ** 2

    def one(x):
        g = np.zeros((n, n))
        g[0, 0] = r2
        g[1, 1] = r2 * np.sin(float(x[0])) ** 2
        if n == 3:
            g[2, 2] = g[1, 1] * np.sin(float(x[1])) ** 2
        return g

    def many(xs):
        xs = np.asarray(xs, dtype=float)
        m = xs.shape[0]
        g = np.zeros((m, n, n))
        g[:, 0, 0] = r2
        g[:, 1, 1] = r2 * np.sin(xs[:, 0]) ** 2
        if n == 3:
            g[:, 2, 2] = g[:, 1, 1] * np.sin(xs[:, 1]) ** 2
        return g

    lo = np.zeros(n)
    hi = np.array([np.pi, np.pi, 2 * np.pi][:n])
    hi[-1] = 2 * np.pi
    return MetricField(dim=n, matrix=one, matrix_many=many, chart_lo=lo, chart_hi=hi, name="sphere-angular")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def metric_at(m: MetricField, x) -> np.ndarray:
    """Metric matrix at a chart point; raises if the point leaves the chart."""
    x = np.asarray(x, dtype=float)
    if x.shape != (m.dim,):
        raise UsageError(f"point has shape {x.shape}, expected ({m.dim},)")
    if not m.contains(x):
        raise ChartDomainError(f"point {x} outside chart domain of {m.name or 'metric'}")
    return m.matrix(x)


def volume_density(m: MetricField, x) -> float:
    """sqrt(det g(x)), the Riemannian volume density in chart coordinates."""
    g = metric_at(m, x)
    return float(np.sqrt(np.linalg.det(g)))


def nil3_curvature_closed_form(p: HomogeneousParams3):
    """Ricci eigenvalues relative to g and scalar curvature of the Nil3 metric.

    Returns ``((2D/(BC), -2D/(BC), -2D/(BC)), -2D/(BC))``.
    """
    if p.group != NIL3:
        raise UsageError("nil3_curvature_closed_form requires the nil3 group tag")
    k = 2.0 * p.D / (p.B * p.C)
    return (k, -k, -k), -k


def su2_ricci_eigenvalues(p: HomogeneousParams3):
    """Ricci eigenvalues of a diagonal left-invariant SU(2) metric.

    Computed in the Milnor frame orthonormalized by (B, C, D); the values are
    therefore already relative to the metric.
    """
    if p.group != SU2:
        raise UsageError("su2_ricci_eigenvalues requires the su2 group tag")
    D, B, C = p.D, p.B, p.C
    s = 2.0 / (B * C * D)
    r2 = s * (B * B - (D - C) ** 2)
    r3 = s * (C * C - (D - B) ** 2)
    r4 = s * (D * D - (B - C) ** 2)
    return r2, r3, r4


DEFAULT_CURVATURE_STEP = 0.01


def _christoffel_fd(m: MetricField, x: np.ndarray, h: float) -> np.ndarray:
    """Christoffel symbols Gamma[a, i, j] from central differences of g."""
    d = m.dim
    ginv = np.linalg.inv(m.matrix(x))
    dg = np.empty((d, d, d))  # dg[k, i, j] = d_k g_ij
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        dg[k] = (m.matrix(x + e) - m.matrix(x - e)) / (2.0 * h)
    # t[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    t = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    return 0.5 * np.einsum("al,lij->aij", ginv, t)


def scalar_curvature_numeric(m: MetricField, x, h: float = DEFAULT_CURVATURE_STEP) -> float:
    """Scalar curvature from second-order central finite differences of g.

    Requires the full stencil (offsets up to 2h along coordinate pairs) to
    stay inside the chart; O(h^2) accurate for smooth metrics.
    """
    x = np.asarray(x, dtype=float)
    if not h > 0:
        raise UsageError("finite-difference step must be positive")
    d = m.dim
    for k in range(d):
        for l in range(d):
            for sk in (-1, 0, 1):
                for sl in (-1, 0, 1):
                    p = x.copy()
                    p[k] += sk * h
                    p[l] += sl * h
                    if not m.contains(p):
                        raise ChartDomainError(
                            f"finite-difference stencil leaves the chart near {x}"
                        )
    gamma0 = _christoffel_fd(m, x, h)
    dgamma = np.empty((d, d, d, d))  # dgamma[k, a, i, j] = d_k Gamma^a_ij
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        dgamma[k] = (_christoffel_fd(m, x + e, h) - _christoffel_fd(m, x - e, h)) / (2.0 * h)
    # R_ij = d_a Gamma^a_ij - d_i Gamma^a_aj + Gamma^a_ab Gamma^b_ij - Gamma^a_ib Gamma^b_aj
    ric = (
        np.einsum("aaij->ij", dgamma)
        - np.einsum("iaaj->ij", dgamma)
        + np.einsum("aab,bij->ij", gamma0, gamma0)
        - np.einsum("aib,baj->ij", gamma0, gamma0)
    )
    ginv = np.linalg.inv(m.matrix(x))
    return float(np.einsum("ij,ij->", ginv, ric))
