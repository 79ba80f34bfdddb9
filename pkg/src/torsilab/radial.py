"""Exact exit-time solver for rotationally symmetric domains.

Independent oracle for the finite-element solver: on a warped ball
dr^2 + f(r)^2 dS^2 the unit-source Dirichlet problem reduces to quadrature,

    E(r) = int_r^R f(s)^(1-n) * (int_0^s f(tau)^(n-1) dtau) ds,
    T    = omega_{n-1} * int_0^R Phi(s)^2 / f(s)^(n-1) ds,
    V    = omega_{n-1} * int_0^R f(r)^(n-1) dr,

with Phi the inner primitive and omega_{n-1} the unit-sphere volume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from .errors import NumericError
from .metrics import RadialWarp

_EPSABS = 1e-13
_EPSREL = 1e-12
_QUAD_LIMIT = 200


def unit_sphere_volume(n: int) -> float:
    """omega_{n-1} = 2 pi^(n/2) / Gamma(n/2), the volume of the unit (n-1)-sphere."""
    return float(2.0 * np.pi ** (n / 2.0) / gamma(n / 2.0))


def _quad(fn, a, b) -> float:
    val, err = quad(fn, a, b, epsabs=_EPSABS, epsrel=_EPSREL, limit=_QUAD_LIMIT)
    if not np.isfinite(val) or (err > 1e-8 * max(1.0, abs(val))):
        raise NumericError(f"quadrature failed on [{a:g}, {b:g}] (err={err:.2e})")
    return val


@dataclass(frozen=True)
class RadialRigidity:
    """Exit time profile and rigidity integrals of a warped ball."""

    E: Callable[[float], float]
    T: float
    V: float


def radial_rigidity(w: RadialWarp) -> RadialRigidity:
    n, f, R = w.n, w.f, w.R
    omega = unit_sphere_volume(n)

    def fn1(r):
        return f(r) ** (n - 1)

    def phi(s):
        return _quad(fn1, 0.0, s)

    def exit_time(r):
        if r >= R:
            return 0.0
        return _quad(lambda s: phi(s) / fn1(s), r, R)

    T = omega * _quad(lambda s: phi(s) ** 2 / fn1(s), 0.0, R)
    V = omega * _quad(fn1, 0.0, R)
    return RadialRigidity(E=exit_time, T=T, V=V)
