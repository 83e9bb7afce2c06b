from __future__ import annotations

import numpy as np
import pytest

from mgp import (
    AntennaLayout,
    ConfigurationError,
    FixSolution,
    FixStatus,
    PositionSolution,
    UnitQuaternion,
    ValidationError,
    Vec3,
    euler_to_quat,
    hexagon_layout,
    hybrid_position,
    rotate,
)

LAYOUT = hexagon_layout(0.9)


def _fix(ant: int, p: Vec3, status: FixStatus = FixStatus.FIXED) -> FixSolution:
    return FixSolution(antenna_id=ant, status=status, p=p, sats_used=8)


def _antenna_world(p: Vec3, q: UnitQuaternion, ant: int) -> Vec3:
    return p + rotate(q, LAYOUT.position_of(ant))


def test_fix_solution_validation() -> None:
    with pytest.raises(ValidationError):
        FixSolution(antenna_id=0, status=FixStatus.FIXED, p=Vec3(0.0, 0.0, 0.0))
    with pytest.raises(ValidationError):
        FixSolution(antenna_id=1, status=FixStatus.NONE, p=Vec3(0.0, 0.0, 0.0))
    with pytest.raises(ValidationError):
        FixSolution(antenna_id=1, status=FixStatus.FIXED, p=None)
    with pytest.raises(ValidationError):
        FixSolution(antenna_id=1, status=FixStatus.FLOAT, p=None)
    with pytest.raises(ValidationError):
        FixSolution(antenna_id=1, status=FixStatus.FIXED, p=Vec3(0.0, 0.0, 0.0), sats_used=-1)


def test_position_solution_validation() -> None:
    with pytest.raises(ValidationError):
        PositionSolution(available=True, p=None)
    with pytest.raises(ValidationError):
        PositionSolution(available=False, p=Vec3(0.0, 0.0, 0.0))
    with pytest.raises(ValidationError):
        PositionSolution(available=True, p=Vec3(0.0, 0.0, 0.0), n_used=0)
    with pytest.raises(ValidationError):
        PositionSolution(
            available=True, p=Vec3(0.0, 0.0, 0.0), n_used=2, contributing_antennas=frozenset({1})
        )


def test_exact_recovery_noise_free() -> None:
    rng = np.random.default_rng(91)
    for _ in range(50):
        p_true = Vec3.from_array(rng.normal(scale=20.0, size=3))
        q_true = UnitQuaternion.from_array(rng.normal(size=4))
        fixes = [_fix(a, _antenna_world(p_true, q_true, a)) for a in range(1, 7)]
        sol = hybrid_position(fixes, q_true, LAYOUT)
        assert sol.available
        assert sol.n_used == 6
        assert sol.contributing_antennas == frozenset(range(1, 7))
        assert np.allclose(sol.p.as_array(), p_true.as_array(), atol=1e-12)


def test_exact_recovery_every_single_antenna() -> None:
    p_true = Vec3(3.0, -4.0, 12.0)
    q_true = euler_to_quat(5.0, -10.0, 120.0)
    for a in range(1, 7):
        sol = hybrid_position([_fix(a, _antenna_world(p_true, q_true, a))], q_true, LAYOUT)
        assert sol.n_used == 1
        assert np.allclose(sol.p.as_array(), p_true.as_array(), atol=1e-12)


def test_hand_worked_yaw_ninety() -> None:
    # yaw +90: antenna 1 body (0.9, 0, 0) lands at world (0, 0.9, 0)
    q = euler_to_quat(0.0, 0.0, 90.0)
    fixes = [_fix(1, Vec3(10.0, 10.9, 5.0))]
    sol = hybrid_position(fixes, q, LAYOUT)
    assert np.allclose(sol.p.as_array(), [10.0, 10.0, 5.0], atol=1e-12)


def test_average_splits_disagreement_evenly() -> None:
    # two antennas whose implied origins disagree by 2d: the mean sits between
    q = UnitQuaternion.identity()
    d = Vec3(0.0, 0.0, 0.1)
    f1 = _fix(1, LAYOUT.position_of(1) + d)
    f4 = _fix(4, LAYOUT.position_of(4) - d)
    sol = hybrid_position([f1, f4], q, LAYOUT)
    assert np.allclose(sol.p.as_array(), [0.0, 0.0, 0.0], atol=1e-15)


def test_float_and_none_never_contribute() -> None:
    p_true = Vec3(1.0, 2.0, 3.0)
    q = UnitQuaternion.identity()
    fixes = [
        _fix(1, _antenna_world(p_true, q, 1)),
        _fix(2, Vec3(99.0, 99.0, 99.0), status=FixStatus.FLOAT),
        FixSolution(antenna_id=3, status=FixStatus.NONE),
    ]
    sol = hybrid_position(fixes, q, LAYOUT)
    assert sol.n_used == 1
    assert sol.contributing_antennas == frozenset({1})
    assert np.allclose(sol.p.as_array(), p_true.as_array(), atol=1e-12)


def test_no_fixed_antennas_unavailable() -> None:
    fixes = [
        _fix(1, Vec3(0.0, 0.0, 0.0), status=FixStatus.FLOAT),
        FixSolution(antenna_id=2, status=FixStatus.NONE),
    ]
    sol = hybrid_position(fixes, UnitQuaternion.identity(), LAYOUT)
    assert not sol.available
    assert sol.p is None
    assert sol.n_used == 0


def test_missing_attitude_blocks_lever_arm_removal() -> None:
    p_true = Vec3(5.0, 6.0, 7.0)
    fixes = [_fix(a, _antenna_world(p_true, UnitQuaternion.identity(), a)) for a in range(1, 7)]
    sol = hybrid_position(fixes, None, LAYOUT)
    assert not sol.available


def test_missing_attitude_origin_antenna_still_contributes() -> None:
    # an antenna mounted exactly at the body origin needs no attitude
    layout = AntennaLayout((Vec3(0.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0)))
    p_true = Vec3(-2.0, 8.0, 1.5)
    fixes = [
        _fix(1, p_true),
        _fix(2, Vec3(99.0, 0.0, 0.0)),  # lever arm unknown without attitude
    ]
    sol = hybrid_position(fixes, None, layout)
    assert sol.available
    assert sol.contributing_antennas == frozenset({1})
    assert np.array_equal(sol.p.as_array(), p_true.as_array())


def test_duplicate_antenna_rejected() -> None:
    fixes = [_fix(1, Vec3(0.0, 0.0, 0.0)), _fix(1, Vec3(1.0, 0.0, 0.0))]
    with pytest.raises(ValidationError):
        hybrid_position(fixes, UnitQuaternion.identity(), LAYOUT)


def test_unknown_antenna_id_rejected() -> None:
    fixes = [_fix(7, Vec3(0.0, 0.0, 0.0))]
    with pytest.raises(ConfigurationError):
        hybrid_position(fixes, UnitQuaternion.identity(), LAYOUT)


def test_unknown_id_tolerated_when_not_fixed() -> None:
    # only fixed antennas need a layout entry
    fixes = [
        _fix(1, Vec3(0.9, 0.0, 0.0)),
        FixSolution(antenna_id=9, status=FixStatus.NONE),
    ]
    sol = hybrid_position(fixes, UnitQuaternion.identity(), LAYOUT)
    assert sol.available
    assert sol.contributing_antennas == frozenset({1})


def test_empty_input_unavailable() -> None:
    sol = hybrid_position([], UnitQuaternion.identity(), LAYOUT)
    assert not sol.available


def test_translation_equivariance() -> None:
    rng = np.random.default_rng(97)
    q = UnitQuaternion.from_array(rng.normal(size=4))
    p0 = Vec3(1.0, 2.0, 3.0)
    noise = [Vec3.from_array(rng.normal(scale=0.01, size=3)) for _ in range(6)]
    fixes = [_fix(a, _antenna_world(p0, q, a) + noise[a - 1]) for a in range(1, 7)]
    base = hybrid_position(fixes, q, LAYOUT).p.as_array()

    shift = Vec3(-10.0, 4.0, 2.0)
    shifted = [_fix(a, _antenna_world(p0 + shift, q, a) + noise[a - 1]) for a in range(1, 7)]
    moved = hybrid_position(shifted, q, LAYOUT).p.as_array()
    assert np.allclose(moved - base, shift.as_array(), atol=1e-12)
