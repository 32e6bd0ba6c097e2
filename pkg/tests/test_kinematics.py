"""Kinematics oracle tests.

The forward-kinematics oracle here is built from first principles: each
joint's transform is composed from primitive rotation/translation matrices
multiplied together with explicit pure-Python loops.  It shares no code with
the package implementation (which uses a closed-form row matrix), so
agreement is meaningful evidence of correctness.
"""

import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinbench import (
    DEFAULT_WORKSPACE,
    JointLimits,
    KinematicChain,
    N_JOINTS,
    Workspace,
    default_chain,
    discretize_joint,
    forward_kinematics,
    load_chain,
    workspace_contains,
)

# --- Independent reference data (written out literally, not imported) -------

# Per-joint (a, d, alpha) of the 7-dof arm, hand plate folded into the last
# link offset.
ORACLE_DH = [
    (0.0, 0.333, 0.0),
    (0.0, 0.0, -math.pi / 2),
    (0.0, 0.316, math.pi / 2),
    (0.0825, 0.0, math.pi / 2),
    (-0.0825, 0.384, -math.pi / 2),
    (0.0, 0.0, math.pi / 2),
    (0.088, 0.107, math.pi / 2),
]

ORACLE_LIMITS_MIN = [-2.897, -1.763, -2.897, -3.072, -2.897, -0.017, -2.897]
ORACLE_LIMITS_MAX = [2.897, 1.763, 2.897, -0.069, 2.897, 3.752, 2.897]

# End-effector position at the joint-range midpoints, frozen once from the
# oracle below and never recomputed from package code.
GOLDEN_MIDPOINT_POSITION = (
    0.5819366433948372,
    -2.9694511061129464e-17,
    0.6550518323845873,
)


def _mat_mul(a, b):
    """4x4 matrix product with explicit loops (no numpy)."""
    return [
        [sum(a[i][k] * b[k][j] for k in range(4)) for j in range(4)]
        for i in range(4)
    ]


def _rot_x(angle):
    c, s = math.cos(angle), math.sin(angle)
    return [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c, -s, 0.0],
        [0.0, s, c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]


def _rot_z(angle):
    c, s = math.cos(angle), math.sin(angle)
    return [
        [c, -s, 0.0, 0.0],
        [s, c, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]


def _trans(x, y, z):
    return [
        [1.0, 0.0, 0.0, x],
        [0.0, 1.0, 0.0, y],
        [0.0, 0.0, 1.0, z],
        [0.0, 0.0, 0.0, 1.0],
    ]


def oracle_forward_kinematics(joint_angles):
    """Position of the hand point by composing primitive transforms.

    Each link applies, in order: rotate about the previous x axis by alpha,
    translate along it by a, rotate about the new z axis by theta, translate
    along it by d.
    """
    total = _trans(0.0, 0.0, 0.0)
    for (a, d, alpha), theta in zip(ORACLE_DH, joint_angles):
        link = _mat_mul(
            _mat_mul(_rot_x(alpha), _trans(a, 0.0, 0.0)),
            _mat_mul(_rot_z(theta), _trans(0.0, 0.0, d)),
        )
        total = _mat_mul(total, link)
    return [total[0][3], total[1][3], total[2][3]]


def oracle_midpoints():
    return [
        (lo + hi) / 2.0
        for lo, hi in zip(ORACLE_LIMITS_MIN, ORACLE_LIMITS_MAX)
    ]


# --- Forward kinematics ------------------------------------------------------


class TestForwardKinematics:
    def test_matches_oracle_on_100_random_configurations(self):
        """Acceptance criterion 1 core: max abs error < 1e-9 on 100 draws."""
        chain = default_chain()
        rng = np.random.default_rng(123)
        worst = 0.0
        for _ in range(100):
            q = rng.uniform(ORACLE_LIMITS_MIN, ORACLE_LIMITS_MAX)
            got = forward_kinematics(chain, q)
            want = oracle_forward_kinematics(q)
            worst = max(worst, float(np.max(np.abs(np.asarray(got) - want))))
        assert worst < 1e-9

    def test_golden_midpoint_position(self):
        chain = default_chain()
        pos = forward_kinematics(chain, chain.limits.midpoints())
        assert pos == pytest.approx(GOLDEN_MIDPOINT_POSITION, abs=1e-12)

    def test_golden_midpoint_position_from_oracle(self):
        pos = oracle_forward_kinematics(oracle_midpoints())
        assert pos == pytest.approx(GOLDEN_MIDPOINT_POSITION, abs=1e-12)

    def test_last_joint_does_not_move_the_hand_point(self):
        """The hand point sits on the last joint axis, so spinning that
        joint must leave its position unchanged."""
        chain = default_chain()
        rng = np.random.default_rng(7)
        for _ in range(20):
            q = rng.uniform(ORACLE_LIMITS_MIN, ORACLE_LIMITS_MAX)
            base = forward_kinematics(chain, q)
            q2 = np.array(q)
            q2[6] = rng.uniform(ORACLE_LIMITS_MIN[6], ORACLE_LIMITS_MAX[6])
            moved = forward_kinematics(chain, q2)
            assert np.allclose(base, moved, atol=1e-12)

    def test_zero_pose_height_is_sum_of_link_offsets(self):
        chain = default_chain()
        pos = forward_kinematics(chain, [0.0] * N_JOINTS)
        # With every angle zero the x offsets cancel pairwise except the
        # final two links; verify against the oracle rather than intuition.
        assert pos == pytest.approx(
            oracle_forward_kinematics([0.0] * N_JOINTS), abs=1e-12
        )

    def test_rejects_wrong_length(self):
        chain = default_chain()
        with pytest.raises(ValueError):
            forward_kinematics(chain, [0.0] * 6)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.floats(-3.0, 3.0, allow_nan=False), min_size=7, max_size=7
        )
    )
    def test_oracle_agreement_property(self, q):
        chain = default_chain()
        got = forward_kinematics(chain, q)
        want = oracle_forward_kinematics(q)
        assert np.allclose(got, want, atol=1e-9)

    def test_runtime_under_one_second(self):
        chain = default_chain()
        rng = np.random.default_rng(0)
        qs = rng.uniform(ORACLE_LIMITS_MIN, ORACLE_LIMITS_MAX, size=(100, 7))
        start = time.perf_counter()
        for q in qs:
            forward_kinematics(chain, q)
        assert time.perf_counter() - start < 1.0


# --- Joint limits and discretization ----------------------------------------


class TestJointLimits:
    def test_default_chain_limits_match_reference_table(self):
        chain = default_chain()
        assert list(chain.limits.minimum) == ORACLE_LIMITS_MIN
        assert list(chain.limits.maximum) == ORACLE_LIMITS_MAX

    def test_midpoints(self):
        chain = default_chain()
        assert list(chain.limits.midpoints()) == pytest.approx(
            oracle_midpoints(), abs=0
        )

    def test_contains_and_clamp(self):
        limits = default_chain().limits
        inside = oracle_midpoints()
        assert limits.contains(inside)
        outside = list(inside)
        outside[3] = 10.0
        assert not limits.contains(outside)
        clamped = limits.clamp(outside)
        assert clamped[3] == ORACLE_LIMITS_MAX[3]
        assert limits.contains(clamped)

    def test_invalid_limits_rejected(self):
        with pytest.raises(ValueError):
            JointLimits(minimum=(1.0,) * 7, maximum=(0.0,) * 7)
        with pytest.raises(ValueError):
            JointLimits(minimum=(0.0,) * 6, maximum=(1.0,) * 6)


class TestDiscretization:
    @pytest.mark.parametrize("n_actions", [2, 3, 5, 9])
    @pytest.mark.parametrize("joint", range(N_JOINTS))
    def test_endpoints_exact_and_monotone(self, joint, n_actions):
        """Acceptance criterion 2: endpoints equal the table limits exactly
        (no floating-point slack) and values increase strictly."""
        limits = default_chain().limits
        values = [
            discretize_joint(limits, joint, n_actions, k)
            for k in range(n_actions)
        ]
        assert values[0] == ORACLE_LIMITS_MIN[joint]
        assert values[-1] == ORACLE_LIMITS_MAX[joint]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_interior_points_evenly_spaced(self):
        limits = default_chain().limits
        lo, hi = ORACLE_LIMITS_MIN[0], ORACLE_LIMITS_MAX[0]
        for k in range(5):
            expected = lo + k * (hi - lo) / 4
            assert discretize_joint(limits, 0, 5, k) == pytest.approx(
                expected, abs=1e-15
            )

    def test_rejects_bad_arguments(self):
        limits = default_chain().limits
        with pytest.raises(ValueError):
            discretize_joint(limits, 0, 1, 0)
        with pytest.raises(ValueError):
            discretize_joint(limits, 0, 5, 5)
        with pytest.raises(ValueError):
            discretize_joint(limits, 0, 5, -1)
        with pytest.raises(ValueError):
            discretize_joint(limits, 7, 5, 0)

    @settings(max_examples=100, deadline=None)
    @given(
        joint=st.integers(0, 6),
        n_actions=st.integers(2, 50),
    )
    def test_always_within_limits(self, joint, n_actions):
        limits = default_chain().limits
        for k in range(n_actions):
            v = discretize_joint(limits, joint, n_actions, k)
            assert ORACLE_LIMITS_MIN[joint] <= v <= ORACLE_LIMITS_MAX[joint]


# --- Chain loading -----------------------------------------------------------


class TestChainLoading:
    def test_default_chain_geometry_matches_reference(self):
        chain = default_chain()
        got = list(zip(chain.a, chain.d, chain.alpha))
        assert got == pytest.approx(
            [tuple(row) for row in ORACLE_DH], abs=0
        )
        assert chain.theta_offset == (0.0,) * N_JOINTS

    def test_max_reach(self):
        chain = default_chain()
        expected = sum(abs(a) for a, _, _ in ORACLE_DH) + sum(
            abs(d) for _, d, _ in ORACLE_DH
        )
        assert chain.max_reach() == pytest.approx(expected, abs=1e-12)

    def test_load_chain_round_trip(self, tmp_path):
        chain = default_chain()
        lines = ["joints:"]
        for i in range(N_JOINTS):
            lines.append(
                "  - {a: %r, d: %r, alpha: %r, theta_offset: %r, "
                "min: %r, max: %r}"
                % (
                    chain.a[i],
                    chain.d[i],
                    chain.alpha[i],
                    chain.theta_offset[i],
                    chain.limits.minimum[i],
                    chain.limits.maximum[i],
                )
            )
        path = tmp_path / "chain.yaml"
        path.write_text("\n".join(lines) + "\n")
        loaded = load_chain(path)
        assert loaded == chain

    def test_load_chain_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "chain.yaml"
        path.write_text(
            "joints:\n"
            + "  - {a: 0, d: 0, alpha: 0, theta_offset: 0, min: -1, max: 1,"
            " spurious: 3}\n" * 7
        )
        with pytest.raises(ValueError):
            load_chain(path)

    def test_load_chain_rejects_wrong_joint_count(self, tmp_path):
        path = tmp_path / "chain.yaml"
        row = "  - {a: 0, d: 0, alpha: 0, theta_offset: 0, min: -1, max: 1}\n"
        path.write_text("joints:\n" + row * 6)
        with pytest.raises(ValueError):
            load_chain(path)


# --- Workspace ----------------------------------------------------------------


class TestWorkspace:
    def test_reference_membership_examples(self):
        assert workspace_contains((0.0, 0.0, 0.3))
        assert not workspace_contains((10.0, 0.0, 0.0))
        assert not workspace_contains((0.3, 0.0, -0.1))

    def test_start_position_is_inside(self):
        assert workspace_contains(GOLDEN_MIDPOINT_POSITION)

    def test_defaults(self):
        assert DEFAULT_WORKSPACE.center == (0.0, 0.0, 0.333)
        assert DEFAULT_WORKSPACE.radius == 0.855
        assert DEFAULT_WORKSPACE.z_min == 0.0

    def test_boundary_is_inclusive_on_sphere_exclusive_below_floor(self):
        ws = Workspace(center=(0.0, 0.0, 0.0), radius=1.0, z_min=0.0)
        assert ws.contains((1.0, 0.0, 0.0))
        assert ws.contains((0.0, 0.0, 0.0))
        assert not ws.contains((0.0, 0.0, -1e-9))
        assert not ws.contains((1.0 + 1e-9, 0.0, 0.0))

    @settings(max_examples=100, deadline=None)
    @given(
        x=st.floats(-2, 2, allow_nan=False),
        y=st.floats(-2, 2, allow_nan=False),
        z=st.floats(-2, 2, allow_nan=False),
    )
    def test_membership_matches_inequalities(self, x, y, z):
        ws = DEFAULT_WORKSPACE
        cx, cy, cz = ws.center
        expected = (
            (x - cx) ** 2 + (y - cy) ** 2 + (z - cz) ** 2 <= ws.radius**2
            and z >= ws.z_min
        )
        assert ws.contains((x, y, z)) == expected
