"""Closed-form bound envelopes and monotonic functionals for rigidity series.

This module never computes rigidity itself; it consumes measured (t, T, V)
series and produces certified lower/upper envelopes (exponential integrals
of curvature rate bounds, or closed forms where the flow admits them) and
monotonicity verdicts for the rigidity/volume functionals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NumericError, RangeError, UsageError
from .flows import CurvatureBounds
from .radial import unit_sphere_volume

QUAD_TOL = 1e-10
_MAX_DEPTH = 50


@dataclass(frozen=True)
class RigiditySeries:
    """Sampled rigidity and volume along one flow path."""

    t: np.ndarray
    T: np.ndarray
    V: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        object.__setattr__(self, "T", np.asarray(self.T, dtype=float))
        object.__setattr__(self, "V", np.asarray(self.V, dtype=float))
        if not (len(self.t) == len(self.T) == len(self.V)):
            raise UsageError("series arrays must have equal length")
        if len(self.t) == 0 or self.t[0] != 0.0:
            raise UsageError("series must start at t = 0")
        if np.any(np.diff(self.t) <= 0):
            raise UsageError("series times must be strictly increasing")
        if np.any(self.T <= 0) or np.any(self.V <= 0):
            raise UsageError("rigidity and volume must be positive")

    @property
    def T0(self) -> float:
        return float(self.T[0])

    @property
    def V0(self) -> float:
        return float(self.V[0])


@dataclass(frozen=True)
class BoundEnvelope:
    """Certified lower/upper bounds for T(t)/T(0) scaled by the measured T0."""

    grid: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    tag: str

    def __post_init__(self):
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if np.any(self.lower > self.upper * (1 + 1e-12)):
            raise UsageError(f"envelope {self.tag!r} has lower > upper")


def _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0:
        raise NumericError(f"adaptive quadrature failed to converge on [{a:g}, {b:g}]")
    if abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return _adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + _adaptive_simpson(
        f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
    )


def integrate_rate(f: Callable[[float], float], a: float, b: float, tol: float = QUAD_TOL) -> float:
    """Adaptive Simpson integral of a smooth rate function."""
    if b == a:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    scale = max(1.0, abs(whole))
    return _adaptive_simpson(f, a, b, fa, fm, fb, whole, tol * scale, _MAX_DEPTH)


def _exp_envelope(exponent_rate, T0, grid, tag_side):
    """exp(int_0^t rate) * T0 on the grid, accumulated segment by segment."""
    grid = np.asarray(grid, dtype=float)
    if len(grid) == 0 or grid[0] != 0.0:
        raise UsageError("grid must start at 0")
    if np.any(np.diff(grid) <= 0):
        raise UsageError("grid must be strictly increasing")
    out = np.empty(len(grid))
    acc = 0.0
    out[0] = T0
    for i in range(1, len(grid)):
        acc += integrate_rate(exponent_rate, grid[i - 1], grid[i])
        out[i] = math.exp(acc) * T0
    return out


def general_envelope(l, u, L, U, T0: float, grid) -> BoundEnvelope:
    """Envelope from trace bounds l <= tr f <= u and rate bounds L <= f/g <= U.

    Lower exponent rate l - u/2 + L, upper exponent rate U + u/2.  The upper
    side additionally assumes tr f is spatially constant (equal to u), which
    the caller certifies by choosing u.
    """
    lower = _exp_envelope(lambda s: l(s) - 0.5 * u(s) + L(s), T0, grid, "lower")
    upper = _exp_envelope(lambda s: U(s) + 0.5 * u(s), T0, grid, "upper")
    return BoundEnvelope(grid=np.asarray(grid, float), lower=lower, upper=upper, tag="general")


def ricci_envelope(cb: CurvatureBounds, T0: float, grid) -> BoundEnvelope:
    """Envelope exp(int -b - 2B) * T0 <= T(t) <= exp(int -2A - b) * T0.

    Requires the path's scalar curvature to be spatially constant (true for
    every supported path; the caller certifies it by supplying b).
    """
    lower = _exp_envelope(lambda s: -cb.b(s) - 2.0 * cb.B(s), T0, grid, "lower")
    upper = _exp_envelope(lambda s: -2.0 * cb.A(s) - cb.b(s), T0, grid, "upper")
    return BoundEnvelope(grid=np.asarray(grid, float), lower=lower, upper=upper, tag="ricci")


def su2_delta_envelope(B0: float, delta: float, T0: float, grid) -> BoundEnvelope:
    """Closed-form pinched-sphere envelope.

    [1 - 4(1+6d)t/B0]^(5(1+d)^3 / (2(1+6d))) * T0 below,
    [1 - 4t/B0]^(5(1-d) / (2(1+d))) * T0 above, certified for
    t < B0 / (4(1+6d)).
    """
    if not 0 <= delta < 1:
        raise UsageError("pinching parameter must lie in [0, 1)")
    grid = np.asarray(grid, dtype=float)
    horizon = B0 / (4.0 * (1.0 + 6.0 * delta))
    if len(grid) == 0 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise UsageError("grid must start at 0 and increase strictly")
    if not grid[-1] < horizon:
        raise RangeError(f"grid exceeds certified horizon {horizon:g}")
    p_lo = 5.0 * (1.0 + delta) ** 3 / (2.0 * (1.0 + 6.0 * delta))
    p_hi = 5.0 * (1.0 - delta) / (2.0 * (1.0 + delta))
    lower = (1.0 - 4.0 * (1.0 + 6.0 * delta) * grid / B0) ** p_lo * T0
    upper = (1.0 - 4.0 * grid / B0) ** p_hi * T0
    return BoundEnvelope(grid=grid, lower=lower, upper=upper, tag="su2_delta")


def imcf_envelope(T0: float, grid) -> BoundEnvelope:
    """e^t * T0 <= T(t) <= e^(3t) * T0 within the mean-convexity horizon."""
    grid = np.asarray(grid, dtype=float)
    if len(grid) == 0 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise UsageError("grid must start at 0 and increase strictly")
    return BoundEnvelope(grid=grid, lower=np.exp(grid) * T0, upper=np.exp(3.0 * grid) * T0, tag="imcf")


def normalized_ricci_envelope(A, B, T0: float, grid) -> BoundEnvelope:
    """exp(-2 int B) * T0 <= T(t) <= exp(-2 int A) * T0.

    A and B bound the trace-free Ricci tensor eigenvalues (relative to g)
    along a normalized Ricci flow; the caller supplies them.
    """
    lower = _exp_envelope(lambda s: -2.0 * B(s), T0, grid, "lower")
    upper = _exp_envelope(lambda s: -2.0 * A(s), T0, grid, "upper")
    return BoundEnvelope(grid=np.asarray(grid, float), lower=lower, upper=upper, tag="normalized_ricci")


def envelope_contains(env: BoundEnvelope, series: RigiditySeries, rel_slack: float = 0.0):
    """Whether the measured T stays inside the envelope, with relative slack.

    Returns ``(ok, worst)`` where worst is the most negative signed margin
    (positive margins mean strictly inside).
    """
    if len(env.grid) != len(series.t) or np.any(env.grid != series.t):
        raise UsageError("envelope grid must equal the series time grid")
    lo_margin = (series.T - env.lower) / env.lower
    hi_margin = (env.upper - series.T) / env.upper
    worst = float(min(lo_margin.min(), hi_margin.min()))
    return worst >= -rel_slack, worst


# ---------------------------------------------------------------------------
# Monotonic functionals
# ---------------------------------------------------------------------------

NONDECREASING = "nondecreasing"
NONINCREASING = "nonincreasing"
CONSTANT = "constant"

# directions claimed by the evolution theorems, per flow kind
EXPECTED_DIRECTIONS = {
    "einstein": {"T/V^((n+2)/2)": CONSTANT},
    "nil3": {"V*T": NONDECREASING, "T/V^3": NONINCREASING},
    "su2": {"T/V": NONINCREASING, "T/V^3": NONDECREASING},  # positive Ricci
    "imcf": {"T/V": NONDECREASING, "T/V^3": NONINCREASING},
}

FUNCTIONAL_NAMES = ("T/V", "T/V^3", "V*T", "T/V^((n+2)/2)")


def _functional_values(series: RigiditySeries, name: str) -> np.ndarray:
    T, V = series.T, series.V
    if name == "T/V":
        return T / V
    if name == "T/V^3":
        return T / V**3
    if name == "V*T":
        return V * T
    if name == "T/V^((n+2)/2)":
        return T / V ** ((series.n + 2) / 2.0)
    raise UsageError(f"unknown functional {name!r}")


@dataclass(frozen=True)
class FunctionalVerdict:
    functional: str
    direction: Optional[str]  # None when the kind's theorems claim nothing
    passed: Optional[bool]
    worst_pair: Optional[tuple]  # (t_i, t_{i+1}) of the worst violation
    worst_violation: float  # relative size of the worst violation (0 if none)
    values: np.ndarray = field(repr=False, default=None)


def _check_direction(t, vals, direction, slack):
    rel = np.diff(vals) / np.abs(vals[:-1])
    if direction == NONDECREASING:
        viol = -rel
    elif direction == NONINCREASING:
        viol = rel
    elif direction == CONSTANT:
        viol = np.abs(vals - vals[0]) / abs(vals[0])
        worst_i = int(np.argmax(viol))
        worst = float(viol[worst_i])
        return worst <= slack, (float(t[0]), float(t[worst_i])), max(0.0, worst)
    else:
        raise UsageError(f"unknown direction {direction!r}")
    worst_i = int(np.argmax(viol))
    worst = float(viol[worst_i])
    return worst <= slack, (float(t[worst_i]), float(t[worst_i + 1])), max(0.0, worst)


def functional_checks(
    series: RigiditySeries, kind: str, rel_slack: float = 1e-8, budget: float = 0.0
) -> list[FunctionalVerdict]:
    """Monotonicity verdicts for the four rigidity/volume functionals.

    ``kind`` selects which directions the theorems claim; functionals with
    no claim are reported with direction None and vacuously pass.  The slack
    is ``rel_slack + budget`` (budget = per-sample discretization budget of
    the measured series), so solver noise cannot produce false violations.
    """
    if kind not in EXPECTED_DIRECTIONS:
        raise UsageError(f"unknown flow kind {kind!r}")
    if len(series.t) < 3:
        raise UsageError("series must be sampled at >= 3 times")
    slack = rel_slack + budget
    expected = EXPECTED_DIRECTIONS[kind]
    verdicts = []
    for name in FUNCTIONAL_NAMES:
        vals = _functional_values(series, name)
        direction = expected.get(name)
        if direction is None:
            verdicts.append(
                FunctionalVerdict(name, None, None, None, 0.0, values=vals)
            )
            continue
        ok, pair, worst = _check_direction(series.t, vals, direction, slack)
        verdicts.append(FunctionalVerdict(name, direction, ok, pair, worst, values=vals))
    return verdicts


def verdicts_pass(verdicts: Sequence[FunctionalVerdict]) -> bool:
    return all(v.passed for v in verdicts if v.passed is not None)


# ---------------------------------------------------------------------------
# Flat-disk reference
# ---------------------------------------------------------------------------


def disk_reference(n: int):
    """Closed-form rigidity and volume of the flat unit n-disk.

    T = omega_{n-1} / (n^2 (n+2)), V = omega_{n-1} / n.
    """
    if n < 1:
        raise UsageError("dimension must be >= 1")
    omega = unit_sphere_volume(n)
    return omega / (n * n * (n + 2.0)), omega / n


def compare_with_disk(n: int, T: float, V: float, rel_slack: float = 1e-9) -> dict:
    """The four flat-disk comparison checks for a supplied (T, V) pair.

    Returns named ``(ok, margin)`` pairs; margins are signed and relative,
    positive meaning the inequality holds strictly.
    """
    T_d, V_d = disk_reference(n)
    checks = {
        "V_le_disk": (V_d - V) / V_d,
        "T_le_disk": (T_d - T) / T_d,
        "TV3_ge_disk": (T / V**3 - T_d / V_d**3) / (T_d / V_d**3),
        "TV_le_disk": (T_d / V_d - T / V) / (T_d / V_d),
    }
    return {name: (margin >= -rel_slack, float(margin)) for name, margin in checks.items()}
