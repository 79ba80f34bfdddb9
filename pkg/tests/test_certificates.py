import numpy as np
import pytest

from torsilab.certificates import (
    BoundEnvelope,
    RigiditySeries,
    compare_with_disk,
    disk_reference,
    envelope_contains,
    functional_checks,
    general_envelope,
    imcf_envelope,
    integrate_rate,
    normalized_ricci_envelope,
    ricci_envelope,
    su2_delta_envelope,
    verdicts_pass,
)
from torsilab.errors import RangeError, UsageError
from torsilab.flows import curvature_bounds, einstein_path, nil3_path, su2_path
from torsilab.metrics import NIL3, SU2, HomogeneousParams3


def test_general_envelope_static():
    zero = lambda s: 0.0
    env = general_envelope(zero, zero, zero, zero, 2.5, [0.0, 1.0, 2.0])
    assert np.array_equal(env.lower, [2.5, 2.5, 2.5])
    assert np.array_equal(env.upper, [2.5, 2.5, 2.5])


def test_general_envelope_einstein_reduction():
    lam, n = 1.0, 2
    tr = lambda s: -2 * n * lam / (1 - 2 * lam * s)
    rate = lambda s: -2 * lam / (1 - 2 * lam * s)
    grid = np.linspace(0.0, 0.45, 10)
    env = general_envelope(tr, tr, rate, rate, 1.0, grid)
    exact = (1 - 2 * lam * grid) ** ((n + 2) / 2)
    assert np.allclose(env.lower, exact, rtol=1e-9)
    assert np.allclose(env.upper, exact, rtol=1e-9)


def test_general_envelope_nil3_reduction():
    # f = -2 Ric on the Heisenberg flow: tr f = 4/w, f/g in [-4/w, 4/w],
    # w = 12s + B0 C0 / D0
    k0 = 1.0
    w = lambda s: 12 * s + k0
    tr = lambda s: 4.0 / w(s)
    grid = np.array([0.0, 0.25, 0.5, 1.0, 2.0])
    env = general_envelope(tr, tr, lambda s: -4.0 / w(s), lambda s: 4.0 / w(s), 1.0, grid)
    assert np.allclose(env.lower, (1 + 12 * grid) ** (-1 / 6), rtol=1e-9)
    assert np.allclose(env.upper, (1 + 12 * grid) ** (1 / 2), rtol=1e-9)


def test_ricci_envelope_einstein_degenerates():
    grid = np.linspace(0.0, 0.45, 10)
    env = ricci_envelope(curvature_bounds(einstein_path(1.0, 2)), 2.0, grid)
    exact = 2.0 * (1 - 2 * grid) ** 2
    assert np.allclose(env.lower, exact, rtol=1e-9)
    assert np.allclose(env.upper, exact, rtol=1e-9)


def test_ricci_envelope_nil3_closed_forms():
    grid = np.array([0.0, 0.25, 0.5, 1.0, 2.0])
    p0 = HomogeneousParams3(group=NIL3, D=1, B=1, C=1)
    env = ricci_envelope(curvature_bounds(nil3_path(p0)), 1.0, grid)
    assert np.allclose(env.lower, (1 + 12 * grid) ** (-1 / 6), rtol=1e-9)
    assert np.allclose(env.upper, (1 + 12 * grid) ** (1 / 2), rtol=1e-9)


def test_ricci_envelope_su2_round_equals_einstein_law():
    grid = np.array([0.0, 0.05, 0.1, 0.2])
    path = su2_path(HomogeneousParams3(group=SU2, D=1, B=1, C=1))
    env = ricci_envelope(curvature_bounds(path), 1.0, grid)
    exact = (1 - 4 * grid) ** 2.5
    assert np.allclose(env.lower, exact, rtol=1e-8)
    assert np.allclose(env.upper, exact, rtol=1e-8)


def test_su2_delta_envelope_values():
    env = su2_delta_envelope(1.0, 0.0, 1.0, [0.0, 0.125])
    assert np.isclose(env.lower[1], 0.5**2.5, rtol=1e-14)
    assert np.isclose(env.upper[1], 0.5**2.5, rtol=1e-14)
    env = su2_delta_envelope(1.0, 0.5, 1.0, [0.0])
    assert env.lower[0] == env.upper[0] == 1.0


def test_su2_delta_envelope_horizon():
    # certified horizon for delta = 0.5 is B0/16
    with pytest.raises(RangeError):
        su2_delta_envelope(1.0, 0.5, 1.0, [0.0, 1.0 / 16.0])
    env = su2_delta_envelope(1.0, 0.5, 1.0, [0.0, 1.0 / 16.0 - 1e-6])
    assert env.lower[-1] < env.upper[-1]


def test_su2_delta_envelope_ordering():
    for delta in (0.1, 0.5, 0.9):
        horizon = 1.0 / (4 * (1 + 6 * delta))
        grid = np.linspace(0.0, 0.98 * horizon, 40)
        env = su2_delta_envelope(1.0, delta, 1.0, grid)
        assert np.all(env.lower <= env.upper * (1 + 1e-12))


def test_imcf_envelope_values():
    env = imcf_envelope(2.0, [0.0, 1.0])
    assert np.isclose(env.lower[1], 2.0 * np.e, rtol=1e-15)
    assert np.isclose(env.upper[1], 2.0 * np.e**3, rtol=1e-15)


def test_imcf_round_sphere_rate_inside_envelope():
    # measured round-sphere growth e^((n+2)t/n) lies inside [e^t, e^3t]
    grid = np.linspace(0.0, 1.5, 7)
    env = imcf_envelope(1.0, grid)
    for n in (1, 2, 3, 5):
        series = RigiditySeries(t=grid, T=np.exp((n + 2) * grid / n), V=np.exp(grid), n=n)
        ok, _ = envelope_contains(env, series, rel_slack=1e-12)
        assert ok


def test_normalized_ricci_envelope():
    env = normalized_ricci_envelope(lambda s: 0.0, lambda s: 0.0, 1.5, [0.0, 1.0])
    assert np.allclose(env.lower, [1.5, 1.5]) and np.allclose(env.upper, [1.5, 1.5])
    kappa = 0.3
    env = normalized_ricci_envelope(lambda s: kappa, lambda s: kappa, 1.0, [0.0, 1.0, 2.0])
    assert np.allclose(env.lower, np.exp(-2 * kappa * np.array([0, 1, 2])), rtol=1e-10)
    assert np.allclose(env.lower, env.upper, rtol=1e-12)
    env = normalized_ricci_envelope(lambda s: 0.1, lambda s: 0.4, 1.0, [0.0, 1.0])
    assert env.lower[1] < env.upper[1]


def test_envelope_invariants():
    grid = np.linspace(0.0, 2.0, 9)
    p0 = HomogeneousParams3(group=NIL3, D=1.3, B=0.9, C=1.7)
    env = ricci_envelope(curvature_bounds(nil3_path(p0)), 3.3, grid)
    assert np.all(env.lower <= env.upper)
    assert env.lower[0] == env.upper[0] == 3.3
    with pytest.raises(UsageError):
        BoundEnvelope(grid=[0.0, 1.0], lower=[1.0, 2.0], upper=[1.0, 1.0], tag="bad")


def test_quadrature_grid_halving_stability():
    cb = curvature_bounds(einstein_path(1.0, 2))
    g1 = np.linspace(0.0, 0.45, 10)
    g2 = np.linspace(0.0, 0.45, 19)
    e1 = ricci_envelope(cb, 1.0, g1)
    e2 = ricci_envelope(cb, 1.0, g2)
    assert np.max(np.abs(e1.lower - e2.lower[::2]) / e1.lower) <= 1e-9


def test_integrate_rate_exact_polynomial():
    assert abs(integrate_rate(lambda s: 3 * s * s, 0.0, 2.0) - 8.0) < 1e-10


def test_series_validation():
    with pytest.raises(UsageError):
        RigiditySeries(t=[0.5, 1.0], T=[1.0, 1.0], V=[1.0, 1.0], n=2)
    with pytest.raises(UsageError):
        RigiditySeries(t=[0.0, 0.0], T=[1.0, 1.0], V=[1.0, 1.0], n=2)
    with pytest.raises(UsageError):
        RigiditySeries(t=[0.0, 1.0], T=[1.0, -1.0], V=[1.0, 1.0], n=2)


def test_functional_checks_einstein_exact():
    t = np.linspace(0.0, 0.4, 5)
    c = 1 - 2 * t
    s = RigiditySeries(t=t, T=0.39 * c**2, V=3.14 * c, n=2)
    verdicts = functional_checks(s, "einstein")
    const = [v for v in verdicts if v.functional == "T/V^((n+2)/2)"][0]
    assert const.passed and const.worst_violation < 1e-12
    assert verdicts_pass(verdicts)


def test_functional_checks_report_worst_pair():
    s = RigiditySeries(t=[0.0, 1.0, 2.0], T=[1.0, 0.5, 1.0], V=[1.0, 1.0, 1.0], n=2)
    verdicts = functional_checks(s, "imcf")
    tv = [v for v in verdicts if v.functional == "T/V"][0]
    assert not tv.passed and tv.worst_pair == (0.0, 1.0) and tv.worst_violation == 0.5
    tv3 = [v for v in verdicts if v.functional == "T/V^3"][0]
    assert not tv3.passed and tv3.worst_pair == (1.0, 2.0)
    assert not verdicts_pass(verdicts)


def test_functional_checks_require_three_samples():
    s = RigiditySeries(t=[0.0, 1.0], T=[1.0, 1.0], V=[1.0, 1.0], n=2)
    with pytest.raises(UsageError):
        functional_checks(s, "imcf")


def test_disk_reference_values():
    T2, V2 = disk_reference(2)
    assert np.isclose(T2, np.pi / 8, rtol=1e-15) and np.isclose(V2, np.pi, rtol=1e-15)
    T3, V3 = disk_reference(3)
    assert np.isclose(T3, 4 * np.pi / 45, rtol=1e-14) and np.isclose(V3, 4 * np.pi / 3, rtol=1e-14)


def test_disk_comparisons_equality_and_subdisk():
    T_d, V_d = disk_reference(2)
    checks = compare_with_disk(2, T_d, V_d)
    assert all(ok for ok, _ in checks.values())
    # a scaled sub-disk of radius R < 1: T = R^4 T_d, V = R^2 V_d
    R = 0.5
    checks = compare_with_disk(2, R**4 * T_d, R**2 * V_d)
    assert all(ok for ok, _ in checks.values())
    assert checks["TV3_ge_disk"][1] > 1.0  # strict with margin R^-2 - 1 = 3
