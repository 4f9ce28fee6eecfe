import csv
import json

import pytest

from argnet.engine import SimConfig, run_config
from argnet.harness import ExperimentSpec, SpecError, case_study, classify_runs, read_aggregate, run_labels, run_sweep
from argnet.harness.cli import main
from argnet.telemetry import write_outputs


def spec_file(tmp_path, **overrides):
    doc = {
        "name": "t",
        "base": {"causal-structure": "small-net", "max-ticks": 6, "number-of-agents": 8},
        "grid": {"social-network": ["complete", "wheel"], "share": ["random", "impact"]},
        "repetitions": 3,
        "master-seed": 4,
    }
    doc.update(overrides)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(doc))
    return path


def test_cli_run_is_deterministic(tmp_path, capsys):
    args = ["run", "--causal-structure", "big-net", "--number-of-agents", "50", "--social-network", "complete",
            "--share", "random", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("beliefs.csv", "transmissions.csv", "summary.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", "--causal-structure", str(tmp_path / "missing.bif")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--chattiness", "1.5"])
    assert exc.value.code == 2
    assert main(["run", "--initial-draws", "3", "--max-draws", "1", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.bif"
    bad.write_text("network x { }\nvariable A { type discrete [ 2 ] { a, b }; }\n")
    assert main(["validate-net", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_cli_validate_and_presets(asia_path, capsys):
    assert main(["validate-net", asia_path]) == 0
    assert "8 nodes, 8 arcs" in capsys.readouterr().out
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "big-net: 13 nodes, 12 arcs" in out and "small-net: 7 nodes, 6 arcs" in out


def test_custom_roles_from_cli(tmp_path, asia_path):
    out = tmp_path / "o"
    assert main(["run", "--causal-structure", asia_path, "--hypothesis-node", "tub", "--evidence-nodes",
                 "xray,dysp", "--max-ticks", "2", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["world"]["hypothesis"] == "tub"
    assert manifest["world"]["evidence_nodes"] == ["xray", "dysp"]


def test_single_cell_sweep_equals_single_run(tmp_path):
    cfg = SimConfig(causal_structure="small-net", max_ticks=5, seed=13, number_of_agents=9)
    spec = ExperimentSpec(base=cfg, repetitions=1, master_seed=13)
    sweep = run_sweep(spec, tmp_path / "sweep")
    _, result = run_config(cfg)
    write_outputs(result, tmp_path / "single")
    run_dir = tmp_path / "sweep" / "runs" / result.run_id
    for name in ("beliefs.csv", "transmissions.csv", "summary.csv", "manifest.json"):
        assert (run_dir / name).read_bytes() == (tmp_path / "single" / name).read_bytes()
    assert [row[4] for row in sweep.aggregate_rows()] == [
        pytest.approx(r.mean, abs=1e-15) for r in result.ticks
    ]


def test_sweep_parallelism_independent(tmp_path):
    path = spec_file(tmp_path, reuse={"world": True, "initial-evidence": True})
    assert main(["sweep", str(path), "--out", str(tmp_path / "p1"), "--parallelism", "1"]) == 0
    assert main(["sweep", str(path), "--out", str(tmp_path / "p3"), "--parallelism", "3"]) == 0
    assert (tmp_path / "p1" / "aggregate.csv").read_bytes() == (tmp_path / "p3" / "aggregate.csv").read_bytes()


def test_sweep_world_reuse_shares_evidence(tmp_path):
    spec = ExperimentSpec.load(spec_file(tmp_path, reuse={"world": True}))
    result = run_sweep(spec, tmp_path / "out")
    by_cell = {}
    for row in result.aggregate_rows():
        by_cell.setdefault(row[1], set()).add(row[-3])
    assert all(len(v) == 1 for v in by_cell.values())
    manifests = [json.loads(p.read_text()) for p in (tmp_path / "out" / "runs").glob("*-c0-*/manifest.json")]
    assert len({tuple(m["world"]["evidence_list"]) for m in manifests}) == 1


def test_sweep_rerun_of_one_run_reproduces_it(tmp_path):
    from argnet.harness.experiment import run_cell_repetition

    spec = ExperimentSpec.load(spec_file(tmp_path, reuse={"world": True, "social-network": True}))
    full = run_sweep(spec)
    alone = run_cell_repetition(spec, 2, 2)
    match = [o for o in full.outcomes if (o.cell, o.repetition) == (2, 2)][0]
    assert alone.rows == match.rows


def test_aggregate_columns(tmp_path):
    spec = ExperimentSpec.load(spec_file(tmp_path))
    run_sweep(spec, tmp_path / "out")
    rows = read_aggregate(tmp_path / "out" / "aggregate.csv")
    assert len(rows) == 4 * 3 * 7
    assert list(rows[0])[:6] == ["run_id", "cell", "repetition", "social-network", "share", "tick"]
    assert rows[0]["evidence_list"].count(";") == 3
    assert float(rows[0]["neutral_point"]) == 0.5


def test_failed_runs_are_recorded(tmp_path, capsys):
    from argnet.bayesnet import serialize_network_json

    from conftest import contradiction_net

    net_path = tmp_path / "c.json"
    net_path.write_text(serialize_network_json(contradiction_net()))
    path = spec_file(tmp_path, base={"causal-structure": str(net_path), "number-of-agents": 6, "chattiness": 1.0},
                     grid={}, repetitions=30)
    assert main(["sweep", str(path), "--out", str(tmp_path / "out")]) == 1
    with open(tmp_path / "out" / "failures.csv", newline="") as fh:
        failures = list(csv.DictReader(fh))
    assert failures and "probability zero" in failures[0]["error"]


def test_spec_errors(tmp_path):
    with pytest.raises(SpecError):
        ExperimentSpec.from_dict({"base": {}, "repetitions": 0})
    with pytest.raises(SpecError):
        ExperimentSpec.from_dict({"base": {"chattiness": 2.0}})
    with pytest.raises(SpecError):
        ExperimentSpec.from_dict({"base": {}, "grid": {"share": []}})
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    assert main(["sweep", str(bad)]) == 2


def test_case1_definitions_match_published_parameters():
    spec = case_study("case1-bignet")
    assert spec.grid == {"number-of-agents": [10, 50, 100, 500], "social-network": ["complete", "small-world"]}
    assert spec.repetitions == 100 and spec.run_count == 800 and spec.master_seed == 2
    b = spec.base
    assert (b.causal_structure, b.initial_draws, b.max_draws, b.share, b.chattiness, b.conviction_threshold,
            b.curiosity, b.k, b.rewiring_probability, b.hypothesis_probability, b.verbose,
            b.stop_at_full_information, b.max_ticks) == (
        "big-net", 1, 1, "random", 0.5, 0.5, 0.0, 2, 0.2, 0.5, False, False, 25)
    asia = case_study("case1-asia", "asia.bif")
    assert asia.base.causal_structure == "asia.bif" and asia.grid == spec.grid


def test_case2_definitions():
    for name, topology in (("case2-vole-complete", "complete"), ("case2-vole-smallworld", "small-world")):
        spec = case_study(name, "vole.bif")
        b = spec.base
        assert spec.grid == {"share": ["random", "recent", "impact"]} and spec.repetitions == 100
        assert (b.chattiness, b.conviction_threshold, b.curiosity, b.initial_draws, b.max_draws,
                b.number_of_agents, b.social_network, b.stop_at_full_information, b.max_ticks) == (
            0.5, 0.0, 0.0, 1, 1, 50, topology, True, 500)
    with pytest.raises(ValueError, match="network file"):
        case_study("case2-vole-complete")


def test_case_study_spec_serializes():
    spec = case_study("case1-bignet")
    again = ExperimentSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert again.to_dict() == spec.to_dict()


def _rows(**runs):
    rows = []
    for run_id, (mean0, optimal, neutral) in runs.items():
        rows.append({"run_id": run_id, "tick": "0", "mean_belief": str(mean0), "optimal_posterior": optimal,
                     "neutral_point": str(neutral)})
        rows.append({"run_id": run_id, "tick": "1", "mean_belief": "0.9", "optimal_posterior": optimal,
                     "neutral_point": str(neutral)})
    return rows


def test_classify_initial_lean():
    labels = run_labels(_rows(a=(0.62, "0.3", 0.5), b=(0.41, "0.9", 0.5), c=(0.5, "0.5", 0.5)), "initial-lean")
    assert labels == {"a": "for", "b": "against", "c": "neutral"}


def test_classify_valence_excludes_neutral_and_undefined():
    rows = _rows(a=(0.62, "0.3", 0.055), b=(0.41, "0.055", 0.055), c=(0.5, "", 0.055))
    assert run_labels(rows, "valence") == {"a": "for"}
    labeled = classify_runs(rows, "valence")
    assert {r["run_id"] for r in labeled} == {"a"} and all(r["label"] == "for" for r in labeled)


def test_classify_errors():
    with pytest.raises(ValueError):
        run_labels([{"run_id": "a", "tick": "0"}], "initial-lean")
    with pytest.raises(ValueError):
        run_labels([], "mood")


def test_cli_classify(tmp_path, capsys):
    spec = ExperimentSpec.load(spec_file(tmp_path))
    run_sweep(spec, tmp_path / "out")
    out = tmp_path / "labeled.csv"
    assert main(["classify", str(tmp_path / "out" / "aggregate.csv"), "--rule", "initial-lean", "--out", str(out)]) == 0
    assert "label" in out.read_text().splitlines()[0]
