"""URDF builders shared by the model, IK and acceptance tests."""

import numpy as np


def link_xml(name, mass=0.0, com=(0.0, 0.0, 0.0)):
    if mass == 0.0:
        return f'  <link name="{name}"/>\n'
    cx, cy, cz = com
    return (
        f'  <link name="{name}">\n'
        f'    <inertial>\n'
        f'      <origin xyz="{cx} {cy} {cz}" rpy="0 0 0"/>\n'
        f'      <mass value="{mass}"/>\n'
        f'    </inertial>\n'
        f'  </link>\n'
    )


def joint_xml(name, kind, parent, child, xyz=(0, 0, 0), rpy=(0, 0, 0),
              axis=None, lower=None, upper=None, velocity=None):
    parts = [f'  <joint name="{name}" type="{kind}">\n']
    parts.append(f'    <origin xyz="{xyz[0]} {xyz[1]} {xyz[2]}" rpy="{rpy[0]} {rpy[1]} {rpy[2]}"/>\n')
    parts.append(f'    <parent link="{parent}"/>\n')
    parts.append(f'    <child link="{child}"/>\n')
    if axis is not None:
        parts.append(f'    <axis xyz="{axis[0]} {axis[1]} {axis[2]}"/>\n')
    if lower is not None or upper is not None or velocity is not None:
        attrs = ""
        if lower is not None:
            attrs += f' lower="{lower}"'
        if upper is not None:
            attrs += f' upper="{upper}"'
        if velocity is not None:
            attrs += f' velocity="{velocity}"'
        parts.append(f"    <limit{attrs}/>\n")
    parts.append("  </joint>\n")
    return "".join(parts)


def wrap_robot(name, body):
    return f'<robot name="{name}">\n{body}</robot>\n'


def single_revolute_arm():
    """One revolute joint about z; unit-length link along x, tip frame at the end."""
    body = (
        link_xml("base", mass=1.0)
        + link_xml("arm", mass=0.5, com=(0.5, 0, 0))
        + link_xml("tip")
        + joint_xml("shoulder", "revolute", "base", "arm", axis=(0, 0, 1),
                    lower=-3.0, upper=3.0, velocity=5.0)
        + joint_xml("tip_joint", "fixed", "arm", "tip", xyz=(1, 0, 0))
    )
    return wrap_robot("single_arm", body)


def two_link_arm(l1=0.6, l2=0.4):
    """Planar 2R arm in the xy-plane, both joints about z."""
    body = (
        link_xml("base", mass=1.0)
        + link_xml("upper", mass=0.3, com=(l1 / 2, 0, 0))
        + link_xml("lower", mass=0.2, com=(l2 / 2, 0, 0))
        + link_xml("tip")
        + joint_xml("shoulder", "revolute", "base", "upper", axis=(0, 0, 1),
                    lower=-3.1, upper=3.1, velocity=10.0)
        + joint_xml("elbow", "revolute", "upper", "lower", xyz=(l1, 0, 0),
                    axis=(0, 0, 1), lower=-3.1, upper=3.1, velocity=10.0)
        + joint_xml("tip_joint", "fixed", "lower", "tip", xyz=(l2, 0, 0))
    )
    return wrap_robot("two_link", body)


def random_chain(rng, n_joints=4, prismatic_share=0.3, with_branch=False):
    """Random serial chain (optionally branched) with mixed joint types."""
    body = link_xml("base", mass=float(rng.uniform(0.5, 2.0)),
                    com=tuple(rng.uniform(-0.05, 0.05, 3)))
    parent = "base"
    for i in range(n_joints):
        kind = "prismatic" if rng.random() < prismatic_share else "revolute"
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        name = f"link{i}"
        body += link_xml(name, mass=float(rng.uniform(0.1, 1.0)),
                         com=tuple(rng.uniform(-0.1, 0.1, 3)))
        body += joint_xml(
            f"joint{i}", kind, parent, name,
            xyz=tuple(rng.uniform(-0.3, 0.3, 3)),
            rpy=tuple(rng.uniform(-1.0, 1.0, 3)),
            axis=tuple(axis), lower=-2.5, upper=2.5, velocity=4.0,
        )
        parent = name
    if with_branch and n_joints >= 2:
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        body += link_xml("branch", mass=float(rng.uniform(0.1, 0.6)),
                         com=tuple(rng.uniform(-0.1, 0.1, 3)))
        body += joint_xml(
            "branch_joint", "revolute", "link0", "branch",
            xyz=tuple(rng.uniform(-0.2, 0.2, 3)), axis=tuple(axis),
            lower=-2.5, upper=2.5, velocity=4.0,
        )
    body += link_xml("effector")
    body += joint_xml("effector_joint", "fixed", parent, "effector",
                      xyz=tuple(rng.uniform(-0.2, 0.2, 3)))
    return wrap_robot("random_chain", body)


def random_configuration(rng, model, base_angle_scale=1.0):
    from taskqp import Configuration, Placement, so3_exp

    base = Placement(
        so3_exp(rng.normal(size=3) * base_angle_scale),
        rng.normal(size=3) * 0.5,
    )
    joints = rng.uniform(-1.2, 1.2, model.n_joints)
    return Configuration(base, joints)
