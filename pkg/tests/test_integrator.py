import math

import numpy as np
import pytest

import madelung_maxent as mm
from madelung_maxent.integrator import OdeSystem, StepControl, StopReason, integrate, series_start


def sine_system():
    return OdeSystem(dimension=2, rhs=lambda t, y: np.array([y[1], -y[0]]))


def test_sine_endpoint():
    traj = integrate(sine_system(), [0.0, 1.0], (0.0, math.pi))
    assert traj.stop_reason is StopReason.REACHED_END
    assert abs(traj.nodes[-1] - math.pi) < 1e-12
    assert abs(traj.states[-1, 0]) < 1e-8


def test_tolerance_halving_monotone_error():
    errors = []
    for k in range(6):
        rtol = 1e-6 * 0.5**k
        traj = integrate(sine_system(), [0.0, 1.0], (0.0, math.pi),
                         StepControl(rel_tol=rtol, abs_tol=rtol * 1e-2))
        errors.append(abs(traj.states[-1, 0]))
    assert all(e2 < e1 for e1, e2 in zip(errors, errors[1:])), errors


def test_blowup_riccati():
    # y' = y^2, y(0) = 1 blows up at t = 1; y = 1e6 at t = 1 - 1e-6
    sys_ = OdeSystem(dimension=1, rhs=lambda t, y: np.array([y[0] ** 2]))
    traj = integrate(sys_, [1.0], (0.0, 2.0),
                     StepControl(blowup_threshold=1e6), monitor_index=0)
    assert traj.stop_reason is StopReason.BLOWUP_DETECTED
    assert abs(traj.nodes[-1] - (1.0 - 1e-6)) < 1e-4
    assert np.all(traj.states[:, 0] <= 1e6)


def test_blowup_never_overshoots(params1):
    from madelung_maxent.integrator import madelung_system

    threshold = 1.0 + 40.0
    system = madelung_system(1.0, 4.0, 2.0)
    a = 4.0 / 6.0
    y0 = series_start(system, [1.0, 0.0], lambda t: [1.0 + a * t * t, 2 * a * t], 1e-4)
    traj = integrate(system, y0, (1e-4, 50.0),
                     StepControl(blowup_threshold=threshold))
    assert traj.stop_reason is StopReason.BLOWUP_DETECTED
    assert math.isfinite(traj.nodes[-1])
    assert np.all(traj.states[:, 0] <= threshold)


def test_determinism_bitwise():
    t1 = integrate(sine_system(), [0.0, 1.0], (0.0, math.pi))
    t2 = integrate(sine_system(), [0.0, 1.0], (0.0, math.pi))
    assert np.array_equal(t1.nodes, t2.nodes)
    assert np.array_equal(t1.states, t2.states)


def test_step_underflow_reported():
    # infinite-slope wall with no threshold: the step dies, caller decides
    sys_ = OdeSystem(dimension=1, rhs=lambda t, y: np.array([y[0] ** 2]))
    traj = integrate(sys_, [1.0], (0.0, 2.0), StepControl())
    assert traj.stop_reason in (StopReason.STEP_UNDERFLOW, StopReason.BLOWUP_DETECTED)
    assert traj.nodes[-1] < 1.0 + 1e-9


def test_max_steps_stop():
    traj = integrate(sine_system(), [0.0, 1.0], (0.0, math.pi),
                     StepControl(max_steps=10))
    assert traj.stop_reason is StopReason.MAX_STEPS


def test_validation():
    with pytest.raises(mm.ValidationError, match="y0"):
        integrate(sine_system(), [0.0], (0.0, 1.0))
    with pytest.raises(mm.ValidationError, match="t_span"):
        integrate(sine_system(), [0.0, 1.0], (1.0, 1.0))
    with pytest.raises(mm.ValidationError, match="rel_tol"):
        StepControl(rel_tol=0.0)


def test_series_start_radial():
    from madelung_maxent.integrator import madelung_system

    system = madelung_system(1.0, 4.0, 2.0)  # beta=1, m=hbar=1: a = 2/3
    a = 4.0 * 1.0 / 6.0
    state = series_start(system, [1.0, 0.0],
                         lambda t: [1.0 + a * t * t, 2 * a * t], 1e-4)
    assert state[0] == pytest.approx(1.0 + (2.0 / 3.0) * 1e-8, rel=1e-12)
    assert state[1] == pytest.approx((4.0 / 3.0) * 1e-4, rel=1e-12)


def test_series_start_planar():
    a = mm.series_coefficient(mm.make_params(1, 1, 1, "planar-radial"), 1.0, 1.0)
    assert a == pytest.approx(1.0, rel=1e-15)  # lambda^2 U0 / 4 = 1


def test_series_start_zero_state():
    from madelung_maxent.integrator import madelung_system

    system = madelung_system(1.0, 4.0, 2.0)
    state = series_start(system, [0.0, 0.0], lambda t: [0.0, 0.0], 1e-4)
    assert np.array_equal(state, [0.0, 0.0])


def test_series_start_validation():
    from madelung_maxent.integrator import madelung_system

    system = madelung_system(1.0, 4.0, 2.0)
    with pytest.raises(mm.ValidationError, match="t_switch"):
        series_start(system, [1.0, 0.0], lambda t: [1.0, 0.0], 0.0)
    regular = OdeSystem(dimension=1, rhs=lambda t, y: y)
    with pytest.raises(mm.ValidationError, match="singular_origin"):
        series_start(regular, [1.0], lambda t: [1.0], 1e-4)


def test_generic_loop_matches_kernel(params1):
    """The vector loop and the compiled scalar loop implement one algorithm."""
    from madelung_maxent.integrator import _generic_loop, madelung_system

    system = madelung_system(1.0, 4.0, 2.0)
    a = 2.0 / 3.0
    y0 = np.array([1.0 + a * 1e-8, 2 * a * 1e-4])
    control = StepControl(blowup_threshold=41.0, h_init=1e-4)
    fast = integrate(system, y0, (1e-4, 50.0), control)
    ts, ys, stop = _generic_loop(system.rhs, y0, 1e-4, 50.0, control.rel_tol,
                                 control.abs_tol, control.h_init, control.h_min,
                                 control.blowup_threshold, 0, control.max_steps)
    assert stop is StopReason.BLOWUP_DETECTED
    assert ts.size == fast.nodes.size
    np.testing.assert_allclose(ts, fast.nodes, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(ys[:, 0], fast.states[:, 0], rtol=1e-12, atol=1e-12)
