"""Forward kinematics, Jacobians, CoM and configuration integration."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation as ScipyRotation

from taskqp import (
    Configuration,
    ModelError,
    Placement,
    UnknownNameError,
    integrate_config,
    load_urdf,
    skew,
    so3_exp,
    so3_log,
)
from tests.fixtures import (
    joint_xml,
    link_xml,
    random_chain,
    random_configuration,
    single_revolute_arm,
    two_link_arm,
    wrap_robot,
)


def oracle_fk(model, q, frame_name):
    """Naive 4x4 homogeneous-product FK using scipy rotations only."""

    def placement_matrix(placement):
        T = np.eye(4)
        T[:3, :3] = placement.rotation
        T[:3, 3] = placement.translation
        return T

    frame = model.frame(frame_name)
    chain = []
    current = frame.link
    while current != model.root:
        joint = model.parent_joint[current]
        chain.append(joint)
        current = joint.parent
    T = placement_matrix(q.base)
    for joint in reversed(chain):
        T = T @ placement_matrix(joint.origin)
        if joint.kind in ("revolute", "continuous"):
            angle = q.joints[model.joint_index[joint.name]]
            M = np.eye(4)
            M[:3, :3] = ScipyRotation.from_rotvec(joint.axis * angle).as_matrix()
            T = T @ M
        elif joint.kind == "prismatic":
            M = np.eye(4)
            M[:3, 3] = joint.axis * q.joints[model.joint_index[joint.name]]
            T = T @ M
    return T @ placement_matrix(frame.placement)


def fd_point_jacobian(model, q, func, h=1e-6):
    """Central finite differences of a vector quantity over integrate_config."""
    nv = model.nv
    columns = []
    for i in range(nv):
        dq = np.zeros(nv)
        dq[i] = h
        plus = func(integrate_config(q, dq))
        minus = func(integrate_config(q, -dq))
        columns.append((plus - minus) / (2 * h))
    return np.array(columns).T


def fd_rotation_jacobian(model, q, get_rotation, h=1e-6):
    """FD of the angular increment: Log(R+ R-^T) / (2h) per coordinate."""
    nv = model.nv
    columns = []
    for i in range(nv):
        dq = np.zeros(nv)
        dq[i] = h
        R_plus = get_rotation(integrate_config(q, dq))
        R_minus = get_rotation(integrate_config(q, -dq))
        columns.append(so3_log(R_plus @ R_minus.T) / (2 * h))
    return np.array(columns).T


def assert_close_relative(J, J_fd, tol=1e-5):
    scale = max(1.0, float(np.max(np.abs(J))))
    assert np.max(np.abs(J - J_fd)) <= tol * scale


def test_single_arm_tip_at_zero_and_quarter_turn():
    model = load_urdf(single_revolute_arm())
    q = model.neutral_configuration()
    np.testing.assert_allclose(
        model.frame_placement(q, "tip").translation, [1.0, 0.0, 0.0], atol=1e-12
    )
    q.joints[0] = np.pi / 2
    np.testing.assert_allclose(
        model.frame_placement(q, "tip").translation, [0.0, 1.0, 0.0], atol=1e-12
    )


def test_single_arm_joint_column_at_zero():
    model = load_urdf(single_revolute_arm())
    q = model.neutral_configuration()
    Jt, Jr = model.frame_jacobian(q, "tip")
    np.testing.assert_allclose(Jt[:, 6], [0.0, 1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(Jr[:, 6], [0.0, 0.0, 1.0], atol=1e-12)


def test_base_columns_of_translational_jacobian():
    model = load_urdf(single_revolute_arm())
    rng = np.random.default_rng(0)
    q = random_configuration(rng, model)
    placement = model.frame_placement(q, "tip")
    Jt, Jr = model.frame_jacobian(q, "tip")
    np.testing.assert_allclose(Jt[:, 0:3], np.eye(3), atol=1e-12)
    np.testing.assert_allclose(
        Jt[:, 3:6], -skew(placement.translation - q.base.translation), atol=1e-12
    )
    np.testing.assert_allclose(Jr[:, 3:6], np.eye(3), atol=1e-12)


def test_fk_matches_homogeneous_product_oracle():
    rng = np.random.default_rng(42)
    for trial in range(8):
        model = load_urdf(random_chain(rng, n_joints=int(rng.integers(2, 6)),
                                       with_branch=trial % 2 == 0))
        for _ in range(4):
            q = random_configuration(rng, model)
            for frame in ("effector", "link0"):
                T = oracle_fk(model, q, frame)
                placement = model.frame_placement(q, frame)
                np.testing.assert_allclose(placement.translation, T[:3, 3], atol=1e-12)
                np.testing.assert_allclose(placement.rotation, T[:3, :3], atol=1e-12)


def test_unknown_frame_raises():
    model = load_urdf(single_revolute_arm())
    with pytest.raises(UnknownNameError, match="nonexistent"):
        model.frame_placement(model.neutral_configuration(), "nonexistent")


def test_columns_off_the_kinematic_path_are_zero():
    rng = np.random.default_rng(1)
    model = load_urdf(random_chain(rng, n_joints=3, with_branch=True))
    q = random_configuration(rng, model)
    Jt, Jr = model.frame_jacobian(q, "effector")
    col = 6 + model.joint_index["branch_joint"]
    np.testing.assert_array_equal(Jt[:, col], np.zeros(3))
    np.testing.assert_array_equal(Jr[:, col], np.zeros(3))


def test_frame_jacobians_match_finite_differences():
    rng = np.random.default_rng(7)
    checked = 0
    for trial in range(6):
        model = load_urdf(random_chain(rng, n_joints=int(rng.integers(2, 6)),
                                       with_branch=trial % 2 == 1))
        for _ in range(3):
            q = random_configuration(rng, model)
            Jt, Jr = model.frame_jacobian(q, "effector")
            Jt_fd = fd_point_jacobian(
                model, q, lambda qq: model.frame_placement(qq, "effector").translation
            )
            Jr_fd = fd_rotation_jacobian(
                model, q, lambda qq: model.frame_placement(qq, "effector").rotation
            )
            assert_close_relative(Jt, Jt_fd)
            assert_close_relative(Jr, Jr_fd)
            checked += 1
    assert checked >= 18


def test_relative_placement_reduces_to_absolute_for_identity_base_frame():
    model = load_urdf(single_revolute_arm())
    q = model.neutral_configuration()
    q.joints[0] = 0.4
    rel = model.relative_placement(q, "base", "tip")
    absolute = model.frame_placement(q, "tip")
    np.testing.assert_allclose(rel.translation, absolute.translation, atol=1e-12)
    np.testing.assert_allclose(rel.rotation, absolute.rotation, atol=1e-12)


def test_relative_placement_of_frame_with_itself_is_identity():
    rng = np.random.default_rng(3)
    model = load_urdf(random_chain(rng, n_joints=3))
    q = random_configuration(rng, model)
    rel = model.relative_placement(q, "link1", "link1")
    np.testing.assert_allclose(rel.translation, np.zeros(3), atol=1e-12)
    np.testing.assert_allclose(rel.rotation, np.eye(3), atol=1e-12)
    Jt, Jr = model.relative_jacobian(q, "link1", "link1")
    np.testing.assert_allclose(Jt, np.zeros_like(Jt), atol=1e-12)
    np.testing.assert_allclose(Jr, np.zeros_like(Jr), atol=1e-12)


def test_relative_consistency_with_world_composition():
    rng = np.random.default_rng(11)
    model = load_urdf(random_chain(rng, n_joints=4, with_branch=True))
    for _ in range(10):
        q = random_configuration(rng, model)
        T_a = model.frame_placement(q, "branch")
        T_b = model.frame_placement(q, "effector")
        rel = model.relative_placement(q, "branch", "effector")
        recomposed = T_a.compose(rel)
        np.testing.assert_allclose(recomposed.translation, T_b.translation, atol=1e-10)
        np.testing.assert_allclose(recomposed.rotation, T_b.rotation, atol=1e-10)


def test_relative_jacobians_match_finite_differences():
    rng = np.random.default_rng(13)
    for trial in range(5):
        model = load_urdf(random_chain(rng, n_joints=4, with_branch=True))
        q = random_configuration(rng, model)
        Jt, Jr = model.relative_jacobian(q, "branch", "effector")
        Jt_fd = fd_point_jacobian(
            model, q,
            lambda qq: model.relative_placement(qq, "branch", "effector").translation,
        )
        Jr_fd = fd_rotation_jacobian(
            model, q,
            lambda qq: model.relative_placement(qq, "branch", "effector").rotation,
        )
        assert_close_relative(Jt, Jt_fd)
        assert_close_relative(Jr, Jr_fd)


def test_com_of_two_point_masses():
    text = wrap_robot(
        "pair",
        link_xml("base", mass=1.0)
        + link_xml("other", mass=1.0)
        + joint_xml("j", "fixed", "base", "other", xyz=(1, 0, 0)),
    )
    model = load_urdf(text)
    com = model.com(model.neutral_configuration())
    np.testing.assert_allclose(com, [0.5, 0.0, 0.0], atol=1e-12)


def test_com_invariant_to_uniform_mass_scaling():
    rng = np.random.default_rng(17)
    text = random_chain(rng, n_joints=3)
    model = load_urdf(text)
    scaled = load_urdf(text)
    for link in scaled.links.values():
        link.mass *= 10.0
    q = random_configuration(rng, model)
    np.testing.assert_allclose(model.com(q), scaled.com(q), atol=1e-12)


def test_com_jacobian_matches_finite_differences():
    rng = np.random.default_rng(19)
    for _ in range(5):
        model = load_urdf(random_chain(rng, n_joints=4, with_branch=True))
        q = random_configuration(rng, model)
        J = model.com_jacobian(q)
        J_fd = fd_point_jacobian(model, q, model.com)
        assert_close_relative(J, J_fd)


def test_zero_mass_model_rejected_for_com():
    text = wrap_robot("empty", link_xml("base"))
    model = load_urdf(text)
    with pytest.raises(ModelError, match="zero total mass"):
        model.com(model.neutral_configuration())


def test_integrate_config_identity():
    model = load_urdf(two_link_arm())
    rng = np.random.default_rng(2)
    q = random_configuration(rng, model)
    q2 = integrate_config(q, np.zeros(model.nv))
    np.testing.assert_array_equal(q2.joints, q.joints)
    np.testing.assert_array_equal(q2.base.translation, q.base.translation)
    np.testing.assert_array_equal(q2.base.rotation, q.base.rotation)


def test_integrate_config_pure_joint_increment_keeps_base():
    model = load_urdf(two_link_arm())
    q = model.neutral_configuration()
    dq = np.zeros(model.nv)
    dq[6] = 0.3
    q2 = integrate_config(q, dq)
    np.testing.assert_array_equal(q2.base.translation, q.base.translation)
    np.testing.assert_array_equal(q2.base.rotation, q.base.rotation)
    assert q2.joints[0] == pytest.approx(0.3)


def test_half_increments_compose_to_full_rotation():
    model = load_urdf(two_link_arm())
    q = model.neutral_configuration()
    axis = np.array([0.3, -0.5, 0.81])
    axis /= np.linalg.norm(axis)
    angle = 0.8
    half = np.zeros(model.nv)
    half[3:6] = axis * angle / 2
    q_half = integrate_config(integrate_config(q, half), half)
    # Axis-angle composition oracle: same axis, angles add.
    expected = so3_exp(axis * angle)
    np.testing.assert_allclose(q_half.base.rotation, expected, atol=1e-10)


def test_rerooted_chain_gives_same_world_poses():
    # Chain base->arm with a revolute joint at the base origin; the rerooted
    # description arm->base uses the inverse angle and the same axis.
    forward = wrap_robot(
        "fw",
        link_xml("base", mass=1.0)
        + link_xml("arm", mass=1.0)
        + joint_xml("j", "revolute", "base", "arm", axis=(0, 0, 1),
                    lower=-3.0, upper=3.0, velocity=1.0)
        + link_xml("tip")
        + joint_xml("t", "fixed", "arm", "tip", xyz=(0.7, 0.1, 0.0)),
    )
    backward = wrap_robot(
        "bw",
        link_xml("arm", mass=1.0)
        + link_xml("base", mass=1.0)
        + joint_xml("j", "revolute", "arm", "base", axis=(0, 0, 1),
                    lower=-3.0, upper=3.0, velocity=1.0)
        + link_xml("tip")
        + joint_xml("t", "fixed", "arm", "tip", xyz=(0.7, 0.1, 0.0)),
    )
    m_fw = load_urdf(forward)
    m_bw = load_urdf(backward)
    angle = 0.6
    q_fw = m_fw.neutral_configuration()
    q_fw.joints[0] = angle
    arm_world = m_fw.frame_placement(q_fw, "arm")
    q_bw = Configuration(arm_world, np.array([-angle]))
    for frame in ("base", "arm", "tip"):
        a = m_fw.frame_placement(q_fw, frame)
        B = m_bw.frame_placement(q_bw, frame)
        np.testing.assert_allclose(a.translation, B.translation, atol=1e-12)
        np.testing.assert_allclose(a.rotation, B.rotation, atol=1e-12)


def test_added_frames_with_offsets():
    model = load_urdf(single_revolute_arm())
    model.add_frame("probe", "arm", Placement(np.eye(3), np.array([0.5, 0.0, 0.2])))
    q = model.neutral_configuration()
    np.testing.assert_allclose(
        model.frame_placement(q, "probe").translation, [0.5, 0.0, 0.2], atol=1e-12
    )
