import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from boostpareto import oracle
from boostpareto.errors import NoOrbitError, TypeMismatchError
from boostpareto.objectives import (
    average_power,
    average_power_type1,
    average_power_type2,
    evaluate,
    evaluate_arrays,
)
from boostpareto.orbit import OrbitType, orbit_value, solve_orbit
from boostpareto.pv_model import DimensionlessParams, pv_curve


def quad_power(o):
    """Mean of x * y over one period by adaptive quadrature with switch breakpoints."""
    p = o.params

    def integrand(t):
        x = orbit_value(o, t)
        return x * pv_curve(p, x)

    return quad(integrand, 0.0, p.T_p, points=o.switching_times, epsabs=1e-12, epsrel=1e-12,
                limit=200)[0] / p.T_p


@pytest.mark.parametrize("point,F1,F2", [
    ("orbit_a", 0.342, 0.937),
    ("orbit_b", 0.853, 0.842),
    ("orbit_c", 0.528, 0.761),
])
def test_reference_points(point, F1, F2, request):
    e = evaluate(request.getfixturevalue(point))
    assert e.F1 == pytest.approx(F1, abs=1e-3)
    assert e.F2 == pytest.approx(F2, abs=1e-3)


@pytest.mark.parametrize("point", ["orbit_a", "orbit_b", "orbit_c"])
def test_power_matches_quadrature(point, request):
    o = solve_orbit(request.getfixturevalue(point))
    assert average_power(o) == pytest.approx(quad_power(o), abs=1e-9)


def test_power_matches_quadrature_on_random_points():
    worst = 0.0
    for p in oracle.draw_stable_points(100, 21):
        o = solve_orbit(p)
        worst = max(worst, abs(average_power(o) - quad_power(o)))
    assert worst < 1e-6


def test_type_mismatch(orbit_a, orbit_c):
    with pytest.raises(TypeMismatchError):
        average_power_type2(solve_orbit(orbit_a))
    with pytest.raises(TypeMismatchError):
        average_power_type1(solve_orbit(orbit_c))


def test_infeasible_point_raises():
    with pytest.raises(NoOrbitError):
        evaluate(DimensionlessParams.defaults(1.05, 0.05))


def test_arrays_match_scalar():
    rng = np.random.default_rng(8)
    q = rng.uniform(1.0, 4.0, 2000)
    x = rng.uniform(0.0, 0.9, 2000)
    arr = evaluate_arrays(q, x, 1.0, 0.875, 3.5)
    for i in range(len(q)):
        try:
            e = evaluate(DimensionlessParams.defaults(q[i], x[i]))
        except NoOrbitError:
            assert not arr.feasible[i] and np.isnan(arr.F1[i]) and np.isnan(arr.F2[i])
            continue
        assert arr.F1[i] == pytest.approx(e.F1, abs=1e-12)
        assert arr.F2[i] == pytest.approx(e.F2, abs=1e-12)
        assert arr.stable[i] == e.stable


@settings(max_examples=200, deadline=None)
@given(st.floats(1.001, 3.999), st.floats(0.001, 0.899))
def test_objectives_bounded_above_by_one(q, x):
    try:
        e = evaluate(DimensionlessParams.defaults(q, x))
    except NoOrbitError:
        return
    # the PV power x * y peaks at 1 on the knee
    assert e.F1 <= 1.0 and e.F2 < 1.0
    assert e.F2 > 0.0


def test_positive_F1_iff_simulated_contraction():
    rng = np.random.default_rng(13)
    checked = 0
    while checked < 60:
        p = DimensionlessParams.defaults(rng.uniform(1.0, 4.0), rng.uniform(0.01, 0.9))
        try:
            e = evaluate(p)
        except NoOrbitError:
            continue
        if abs(e.F1) < 1e-3:
            continue
        slope = oracle.return_map_slope(p, e.orbit.x_f)
        assert (e.F1 > 0) == (abs(slope) < 1)
        checked += 1


def test_type_labels(orbit_a, orbit_c):
    assert evaluate(orbit_a).orbit_type is OrbitType.TYPE1
    assert evaluate(orbit_c).orbit_type is OrbitType.TYPE2
