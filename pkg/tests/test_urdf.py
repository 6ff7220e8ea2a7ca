"""URDF subset parsing and tree validation."""

import numpy as np
import pytest

from taskqp import ModelError, load_urdf
from tests.fixtures import joint_xml, link_xml, two_link_arm, wrap_robot


def test_minimal_two_link_model():
    model = load_urdf(
        wrap_robot(
            "mini",
            link_xml("base", mass=1.0)
            + link_xml("arm", mass=0.5, com=(0.1, 0, 0))
            + joint_xml("j", "revolute", "base", "arm", axis=(0, 0, 1),
                        lower=-1.0, upper=1.0, velocity=2.0),
        )
    )
    assert model.n_joints == 1
    assert model.root == "base"
    assert set(model.frames) == {"base", "arm"}
    joint = model.joint("j")
    assert joint.lower == -1.0 and joint.upper == 1.0 and joint.velocity == 2.0
    assert model.links["arm"].mass == 0.5
    np.testing.assert_allclose(model.links["arm"].com, [0.1, 0, 0])


def test_larger_arm_fixture_loads():
    model = load_urdf(two_link_arm())
    assert model.actuated_joints == ["shoulder", "elbow"]
    assert model.nv == 8


def test_malformed_xml_is_a_model_error():
    with pytest.raises(ModelError, match="malformed XML"):
        load_urdf("<robot><link name='a'>")


def test_unsupported_joint_type_names_the_joint():
    text = wrap_robot(
        "bad",
        link_xml("a") + link_xml("b")
        + joint_xml("weird", "planar", "a", "b"),
    )
    with pytest.raises(ModelError, match="weird.*unsupported joint type"):
        load_urdf(text)


def test_dangling_link_reference_names_the_path():
    text = wrap_robot(
        "bad",
        link_xml("a") + joint_xml("j", "fixed", "a", "ghost"),
    )
    with pytest.raises(ModelError, match="ghost"):
        load_urdf(text)


def test_cycle_is_rejected_naming_a_joint():
    text = wrap_robot(
        "loop",
        link_xml("a") + link_xml("b")
        + joint_xml("j1", "fixed", "a", "b")
        + joint_xml("j2", "fixed", "b", "a"),
    )
    with pytest.raises(ModelError, match="cycle"):
        load_urdf(text)


def test_two_parents_for_one_link_is_a_cycle_error():
    text = wrap_robot(
        "dual",
        link_xml("a") + link_xml("b") + link_xml("c")
        + joint_xml("j1", "fixed", "a", "c")
        + joint_xml("j2", "fixed", "b", "c"),
    )
    with pytest.raises(ModelError, match="cycle|parent"):
        load_urdf(text)


def test_disconnected_graph_is_rejected():
    text = wrap_robot("forest", link_xml("a") + link_xml("b"))
    with pytest.raises(ModelError, match="disconnected|roots"):
        load_urdf(text)


def test_continuous_joint_has_no_position_limits():
    text = wrap_robot(
        "spinner",
        link_xml("base") + link_xml("wheel", mass=0.1)
        + joint_xml("axle", "continuous", "base", "wheel", axis=(0, 1, 0),
                    velocity=7.0),
    )
    joint = load_urdf(text).joint("axle")
    assert joint.lower is None and joint.upper is None
    assert joint.velocity == 7.0


def test_axis_is_normalized():
    text = wrap_robot(
        "axes",
        link_xml("base") + link_xml("arm")
        + joint_xml("j", "revolute", "base", "arm", axis=(0, 0, 2)),
    )
    joint = load_urdf(text).joint("j")
    np.testing.assert_allclose(np.linalg.norm(joint.axis), 1.0, atol=1e-12)


def test_inverted_limits_rejected():
    text = wrap_robot(
        "bad",
        link_xml("base") + link_xml("arm")
        + joint_xml("j", "revolute", "base", "arm", axis=(0, 0, 1),
                    lower=1.0, upper=-1.0),
    )
    with pytest.raises(ModelError, match="lower > upper"):
        load_urdf(text)
