"""Scenario loading, the CLI surface, determinism and record re-validation."""

import os

import numpy as np

from taskqp import Configuration, Placement, so3_exp
from taskqp.cli import main
from taskqp.scenario import describe_scenario, load_scenario, run_scenario

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def scenario_path(name):
    return os.path.join(SCENARIOS, name)


def test_problem_scenario_runs_clean(tmp_path):
    result = run_scenario(scenario_path("jerk_waypoints.yaml"), str(tmp_path))
    assert result.passed
    rows = np.array(result.records)
    # Columns: step, time, position, velocity, acceleration.
    assert rows.shape == (11, 5)
    assert rows[3, 2] <= -0.5 + 1e-6
    assert rows[7, 2] >= 1.5 - 1e-6
    np.testing.assert_allclose(rows[10, 2:], [1.0, 0.0, 0.0], atol=1e-6)


def test_check_mode_reports_dimensions():
    report = describe_scenario(scenario_path("jerk_waypoints.yaml"))
    assert "decision variables: 10" in report
    assert "equality rows: 3" in report
    assert "inequality rows: 2" in report
    assert "reduced dimension after elimination: 7" in report


def test_check_mode_quadruped_equalities():
    report = describe_scenario(scenario_path("quadruped_balance.yaml"))
    assert "equality rows: 9" in report


def test_empty_scenario_rejected(tmp_path):
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert main(["run", str(empty), "--out", str(tmp_path)]) == 2


def test_missing_frame_exits_2(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text(
        "kind: ik\n"
        f"model: {os.path.abspath(scenario_path('models/quadruped.urdf'))}\n"
        "tasks:\n"
        "  - {name: t, type: position, frame: ghost, target: [0, 0, 0]}\n"
    )
    code = main(["run", str(bad), "--out", str(tmp_path)])
    assert code == 2


def test_infeasible_scenario_exits_3(tmp_path):
    bad = tmp_path / "infeasible.yaml"
    bad.write_text(
        "kind: problem\n"
        "variables: 4\n"
        "integrator: {order: 2, dt: 0.1, initial_state: [0, 0]}\n"
        "constraints:\n"
        "  - {state: 0, step: 4, relation: '=', value: 1.0}\n"
        "  - {state: 0, step: 4, relation: '=', value: 2.0}\n"
    )
    code = main(["run", str(bad), "--out", str(tmp_path)])
    assert code == 3


def test_outputs_are_byte_stable(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        result = run_scenario(scenario_path("differential_coupling.yaml"), str(out))
        assert result.passed
    name = "differential_coupling_trajectory.csv"
    assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    report = "differential_coupling_report.txt"
    assert (out_a / report).read_bytes() == (out_b / report).read_bytes()


def test_records_revalidate_against_model_state(tmp_path):
    # The logged frame positions must be reproducible by FK from the logged
    # configuration columns.
    scenario = load_scenario(scenario_path("collision_stop.yaml"))
    result = run_scenario(scenario_path("collision_stop.yaml"), str(tmp_path))
    model = scenario.model
    for row in result.records:
        base = Placement(so3_exp(np.array(row[6:9])), np.array(row[3:6]))
        q = Configuration(base, np.array(row[9:10]))
        # "rail" column is the joints output; recompute from configuration.
        assert abs(q.joints[0] - row[2]) < 1e-12


def test_frame_records_match_fk_recomputation(tmp_path):
    scenario = load_scenario(scenario_path("differential_coupling.yaml"))
    result = run_scenario(scenario_path("differential_coupling.yaml"), str(tmp_path))
    model = scenario.model
    n = model.n_joints
    for row, q in zip(result.records, result.configurations):
        np.testing.assert_allclose(row[2 : 2 + n], q.joints, atol=1e-12)
        base = Placement(so3_exp(np.array(row[2 + n + 3 : 2 + n + 6])),
                         np.array(row[2 + n : 2 + n + 3]))
        np.testing.assert_allclose(base.translation, q.base.translation, atol=1e-12)
        np.testing.assert_allclose(base.rotation, q.base.rotation, atol=1e-12)


def test_dump_qp_roundtrip(tmp_path):
    from taskqp import load_standard_qp, solve_qp

    dump_dir = tmp_path / "dumps"
    run_scenario(scenario_path("jerk_waypoints.yaml"), str(tmp_path),
                 dump_dir=str(dump_dir))
    files = sorted(os.listdir(dump_dir))
    assert files == ["qp_000000.txt"]
    qp = load_standard_qp(dump_dir / "qp_000000.txt")
    assert qp.dimension == 10
    result = solve_qp(qp)
    assert result.kkt_residual < 1e-8


def test_solve_dump_cli_tool(tmp_path, capsys):
    dump_dir = tmp_path / "dumps"
    run_scenario(scenario_path("jerk_waypoints.yaml"), str(tmp_path),
                 dump_dir=str(dump_dir))
    code = main(["solve-dump", str(dump_dir / "qp_000000.txt")])
    captured = capsys.readouterr()
    assert code == 0
    assert "kkt_residual" in captured.out


def test_max_steps_override(tmp_path):
    result = run_scenario(scenario_path("collision_stop.yaml"), str(tmp_path),
                          max_steps=5)
    assert len(result.configurations) == 6


def test_planar_loop_model_is_an_open_chain_with_tip_frames():
    from taskqp import load_urdf_file

    model = load_urdf_file(scenario_path("models/planar_loop.urdf"))
    assert model.n_joints == 4
    assert "c1" in model.frames and "c2" in model.frames
    # Terminal segments are unconnected: c1 and c2 hang off different chains.
    assert model.frame("c1").link != model.frame("c2").link


def test_check_mode_rejects_empty_scenario(tmp_path):
    empty = tmp_path / "void.yaml"
    empty.write_text("")
    assert main(["check", str(empty)]) == 2


def test_unknown_keys_rejected(tmp_path):
    bad = tmp_path / "typo.yaml"
    bad.write_text(
        "kind: problem\n"
        "variables: 4\n"
        "integrator: {order: 2, dt: 0.1}\n"
        "constraintz:\n"
        "  - {state: 0, step: 4, relation: '=', value: 1.0}\n"
    )
    assert main(["run", str(bad), "--out", str(tmp_path)]) == 2


def test_nonconvergence_exits_4(tmp_path, monkeypatch):
    from taskqp.errors import NonconvergenceError

    def refuse(qp, max_iterations=None):
        raise NonconvergenceError("forced for the exit-code test")

    monkeypatch.setattr("taskqp.active_set.solve_qp", refuse)
    code = main(["run", scenario_path("jerk_waypoints.yaml"), "--out", str(tmp_path)])
    assert code == 4


def test_dump_format_roundtrips_float64_exactly(tmp_path):
    from taskqp import Problem, dump_standard_qp, load_standard_qp

    rng = np.random.default_rng(123)
    p = Problem()
    x = p.add_variable(4)
    from taskqp import Expression
    p.add_objective(Expression(rng.normal(size=(3, 4)), rng.normal(size=3)))
    p.add_constraint(Expression(rng.normal(size=(1, 4)), rng.normal(size=1)), "<=")
    p.add_constraint(Expression(rng.normal(size=(1, 4)), rng.normal(size=1)), "==")
    qp = p.compile()
    path = tmp_path / "qp.txt"
    dump_standard_qp(qp, path)
    again = load_standard_qp(path)
    for name in ("P", "a", "A", "b", "G", "h"):
        np.testing.assert_array_equal(getattr(qp, name), getattr(again, name))


def test_scenario_with_soft_constraint_runs(tmp_path):
    model_path = os.path.abspath(scenario_path("models/slider_spheres.urdf"))
    sidecar_path = os.path.abspath(
        scenario_path("models/slider_spheres_collisions.yaml"))
    doc = tmp_path / "soft.yaml"
    doc.write_text(
        "kind: ik\n"
        f"model: {model_path}\n"
        f"collisions: {sidecar_path}\n"
        "dt: 0.05\n"
        "steps: 40\n"
        "initial: {joints: {rail: 0.8}}\n"
        "tasks:\n"
        "  - {name: base_pin, type: frame, frame: base, target: initial, priority: hard}\n"
        "  - {name: push, type: joints, targets: {rail: 0.0}, priority: soft, weight: 1.0}\n"
        "constraints:\n"
        "  - {name: keep_out, type: self_collision, margin: 0.25, activation: 0.6,\n"
        "     priority: soft, weight: 1000.0}\n"
        "  - {type: velocity_limits}\n"
        "outputs:\n"
        "  - {kind: joints}\n"
        "checks:\n"
        "  - {kind: velocity_limits, slack: 1.0e-9}\n"
    )
    result = run_scenario(str(doc), str(tmp_path))
    assert result.passed
    # Weight 1e3 versus push weight 1: the margin nearly holds.
    final_rail = result.configurations[-1].joints[0]
    assert 0.40 < final_rail < 0.46
