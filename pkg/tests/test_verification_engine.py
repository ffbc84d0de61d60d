import math

import numpy as np
import pytest

from models.data_models import CascadeFlowLine, OutputFormat, RunConfig, Trajectory
from models.exceptions import ConfigError, NonTransversalError
from sample_data import PROBLEMS
import verification_engine
from verification_engine import VerificationEngine, jsonable


@pytest.fixture
def engine(cfg):
    return VerificationEngine(cfg, seed=7)


def test_jsonable():
    value = {1: np.array([1.0, math.inf]), "flag": np.bool_(True), "n": np.int64(3), "t": (np.float64(0.5),)}
    assert jsonable(value) == {"1": [1.0, None], "flag": True, "n": 3, "t": [0.5]}


def test_search_overrides_reach_the_search(cfg):
    engine = VerificationEngine(cfg, seed=3, search_overrides={"scan_points": 8})
    assert engine.search.scan_points == 8
    assert engine.search.seed == 3


def test_homology_report(engine):
    body = engine.run_homology("s2-height")
    assert body["passed"]
    assert body["betti"] == [1, 0, 1]
    assert body["euler_ok"] and body["unlisted_critical_points"] == []
    assert engine.get_run_statistics()["homology"]["passed"]


def test_morse_bott_report(engine):
    assert engine.run_morse_bott("t2-cos")["passed"]
    assert not engine.run_morse_bott("r1-x4")["passed"]


def test_flow_report_on_the_sphere(engine):
    body = engine.run_flow("s2-height", seeds=3)
    assert body["passed"]
    assert body["checked"] == 3
    assert len(engine.trajectories) == 3
    work = engine.get_run_statistics()["flow"]["work"]
    assert work["flow_integrations"] == 3 and work["flow_steps"] > 3


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(PROBLEMS))
def test_flow_decay_on_every_example(engine, name):
    body = engine.run_flow(name, seeds=10)
    assert body["passed"], [r for r in body["runs"] if not r["passed"]]
    assert len(body["runs"]) == 10
    if name == "r1-x4":
        # degenerate minimum: every checked run must fail the exponential fit
        assert not body["morse_bott"]
        assert all(not r["fit"]["passed"] for r in body["runs"] if r["checked"])


def test_flow_starts_on_the_stable_set_of_a_saddle_line(engine):
    body = engine.run_flow("model-x1sq-x2sq", seeds=10)
    assert body["passed"]
    assert body["checked"] == 10
    assert all(r["termination"] == "speed" and r["start"][2] == 0.0 for r in body["runs"])
    assert all(r["expected_rate"] == pytest.approx(2.0, rel=1e-3) for r in body["runs"])


def test_unknown_generator(engine):
    with pytest.raises(ConfigError):
        engine.run_cascades("s2-z2", "N", "Q", 1)


def test_moment_and_novikov(engine):
    assert engine.run_moment("s1-c2", points=5)["passed"]
    assert not engine.run_moment("s1-c2", tau=[0.0], points=5)["passed"]
    assert engine.run_novikov(samples=20)["passed"]
    assert set(engine.get_run_statistics()) == {"moment", "novikov"}


def test_report_is_plain_json(engine):
    body = engine.run_involutions(2, 16)
    report = engine.export_report(RunConfig(command="involutions", seed=7), body)
    assert report["schema"] == "1"
    assert report["run"]["format"] == OutputFormat.JSON.value
    assert set(report["lemma"]["spectra"]) == {"1", "2"}
    table = engine.report_table("involutions", body)
    assert list(table.columns) == ["check", "residual"]


def stub_line(source, target, m):
    points = np.zeros((2, 3))
    trajectory = Trajectory(times=np.array([0.0, 1.0]), points=points, speeds=np.ones(2), f_values=np.zeros(2))
    return CascadeFlowLine(source=source, target=target, m=m, cascades=[trajectory], times=[],
                           source_witness=points[0], target_witness=points[-1], morse_segments=[],
                           shooting_parameter=0.0, branch=(1,), miss=0.0)


def test_cascade_report_without_lines_passes(engine):
    body = engine.run_cascades("s2-z2", "N", "E:s", 0)
    assert body["passed"] and body["trusted"]
    assert body["class"] == "positive_cascades_only"
    assert body["count"] == 0
    assert engine.get_run_statistics()["cascades"]["passed"]


def test_untrusted_cascade_search_fails(engine, monkeypatch):
    def refuse(*args):
        raise NonTransversalError("tangency at parameter 0.25")

    monkeypatch.setattr(verification_engine, "find_cascades", refuse)
    body = engine.run_cascades("s2-z2", "N", "E:s", 1)
    assert not body["passed"] and not body["trusted"]
    assert "tangency" in body["reason"]
    assert body["lines"] == []


def test_lines_against_the_pair_class_fail(engine, monkeypatch):
    monkeypatch.setattr(verification_engine, "find_cascades",
                        lambda problem, c1, c2, m, search: [stub_line(c1.label, c2.label, m)])
    body = engine.run_cascades("s2-z2", "N", "E:s", 0)
    assert body["contradicts_class"] and not body["passed"]
    assert engine.run_cascades("s2-z2", "N", "E:s", 1)["passed"]
