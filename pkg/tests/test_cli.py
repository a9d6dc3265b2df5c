import json
from importlib import resources

import jsonschema
import pytest

from wardflow.cli import main

LOG = """admission_id,location,timestamp
a1,ED,2016-03-01T08:00
a1,ward1,2016-03-01T10:00
a1,CT,2016-03-01T11:00
a1,ward1,2016-03-01T12:00
a2,ED,2016-03-01T09:00
a2,ward2,2016-03-01T13:00
a3,ED,2016-03-02T08:00
a3,ward1,2016-03-02T09:00
"""

CATEGORIES = """location,category
ward1,medical
ward2,medical
"""


@pytest.fixture()
def log_file(tmp_path):
    path = tmp_path / "events.csv"
    path.write_text(LOG)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_build_edge_list_with_hand_counted_weights(log_file, tmp_path, capsys):
    out = tmp_path / "net.csv"
    code, _, err = run(capsys, "build", log_file, "--format", "edgelist", "-o", out)
    assert code == 0
    assert "rows read: 8" in err
    lines = out.read_text().splitlines()
    assert lines[0] == "from,to,weight"
    assert set(lines[1:]) == {"CT,ward1,1", "ED,ward1,2", "ED,ward2,1", "ward1,CT,1"}


def test_build_with_categories_merges_wards(log_file, tmp_path, capsys):
    categories = tmp_path / "map.csv"
    categories.write_text(CATEGORIES)
    raw = tmp_path / "raw.csv"
    merged = tmp_path / "merged.csv"
    assert run(capsys, "build", log_file, "--format", "edgelist", "-o", raw)[0] == 0
    assert run(capsys, "build", log_file, "--categories", categories,
               "--format", "edgelist", "-o", merged)[0] == 0
    raw_nodes = {line.split(",")[0] for line in raw.read_text().splitlines()[1:]}
    merged_nodes = {line.split(",")[0] for line in merged.read_text().splitlines()[1:]}
    assert "ward1" in raw_nodes
    assert "ward1" not in merged_nodes
    assert "medical" in merged_nodes


def test_build_empty_log_is_ok(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("admission_id,location,timestamp\n")
    out = tmp_path / "net.csv"
    code, _, _ = run(capsys, "build", path, "--format", "edgelist", "-o", out)
    assert code == 0
    assert out.read_text() == "from,to,weight\n"


def test_build_missing_file_is_input_error(tmp_path, capsys):
    code, _, err = run(capsys, "build", tmp_path / "nope.csv")
    assert code == 2
    assert "input error" in err


def test_build_schema_error_is_input_error(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("id,where,when\n1,ED,2016-01-01\n")
    code, _, err = run(capsys, "build", path)
    assert code == 2


def test_usage_errors_exit_one(capsys):
    assert main(["build"]) == 1
    assert main(["analyze", "x", "--format", "nope"]) == 1
    assert main([]) == 1


def analyze_args(log_file, *extra):
    return ["analyze", str(log_file), "--from-log", "--boot", "10",
            "--sw-samples", "2", "--seed", "3", *extra]


def test_analyze_report_is_deterministic_and_valid(log_file, capsys):
    code, out1, _ = run(capsys, *analyze_args(log_file))
    assert code == 0
    code, out2, _ = run(capsys, *analyze_args(log_file))
    assert code == 0
    assert out1 == out2

    report = json.loads(out1)
    schema = json.loads(resources.files("wardflow").joinpath("report_schema.json").read_text())
    jsonschema.validate(report, schema)
    assert report["tool"]["name"] == "wardflow"
    assert report["config"]["seed"] == 3
    assert report["ingest"]["rows_read"] == 8
    assert len(report["input"]["digest"]) == 64
    labels = [row["label"] for row in report["node_metrics"]]
    assert labels == sorted(labels)


def test_analyze_skip_removes_section(log_file, capsys):
    code, out, _ = run(capsys, *analyze_args(log_file, "--skip", "resilience"))
    assert code == 0
    report = json.loads(out)
    assert "resilience" not in report
    assert "small_world" in report


def test_analyze_unknown_skip_is_usage_error(log_file, capsys):
    code, _, err = run(capsys, *analyze_args(log_file, "--skip", "nonsense"))
    assert code == 1


def test_analyze_network_file_round_trip(log_file, tmp_path, capsys):
    net_file = tmp_path / "net.graphml"
    assert run(capsys, "build", log_file, "-o", net_file)[0] == 0
    code, out, _ = run(capsys, "analyze", net_file, "--boot", "5", "--sw-samples", "1", "--seed", "1")
    assert code == 0
    report = json.loads(out)
    assert report["ingest"] is None
    assert report["ingest_reason"]
    assert report["network_summary"]["nodes"] == 4


def test_analyze_sidecars(log_file, tmp_path, capsys):
    sidecars = tmp_path / "curves"
    code, _, _ = run(capsys, *analyze_args(log_file, "--sidecar-dir", sidecars))
    assert code == 0
    names = {p.name for p in sidecars.iterdir()}
    assert {"degree_distribution.csv", "knn_curve.csv", "attack_degree.csv", "attack_random.csv"} <= names
    header = (sidecars / "attack_degree.csv").read_text().splitlines()[0]
    assert header == "fraction_removed,wcc_fraction,scc_fraction,efficiency"


def test_synth_deterministic_and_closes_pipeline(tmp_path, capsys):
    first = tmp_path / "one.csv"
    second = tmp_path / "two.csv"
    argv = ["synth", "--model", "ws", "--n", "40", "--k", "4", "--p", "0.1",
            "--journeys", "200", "--seed", "7"]
    assert run(capsys, *argv, "-o", first)[0] == 0
    assert run(capsys, *argv, "-o", second)[0] == 0
    assert first.read_bytes() == second.read_bytes()

    code, _, err = run(capsys, "build", first, "--format", "edgelist", "-o", tmp_path / "net.csv")
    assert code == 0
    assert "rejected: 0" in err


def test_synth_degree_distribution_matches_generator(tmp_path, capsys):
    from wardflow.metrics import degrees
    from wardflow.network import build_network, undirected_projection
    from wardflow.synth import ModelSpec, generate_network
    import io as _io

    from wardflow.eventlog import parse_event_log, reconstruct_journeys

    log = tmp_path / "log.csv"
    argv = ["synth", "--model", "er", "--n", "12", "--p", "0.6",
            "--journeys", "4000", "--seed", "5", "-o", log]
    assert run(capsys, *argv)[0] == 0
    events, _ = parse_event_log(_io.StringIO(log.read_text()))
    rebuilt = undirected_projection(build_network(reconstruct_journeys(events)))
    generated = generate_network(ModelSpec("uniform-random", n=12, p=0.6, seed=5))
    assert set(rebuilt.edges) == set(generated.edges)


def test_synth_invalid_model_params_exit_two(capsys):
    code, _, err = run(capsys, "synth", "--model", "ws", "--n", "10", "--k", "3",
                       "--p", "0.1", "--journeys", "5")
    assert code == 2


def test_export_graphml_to_dot(log_file, tmp_path, capsys):
    net_file = tmp_path / "net.graphml"
    assert run(capsys, "build", log_file, "-o", net_file)[0] == 0
    code, out, _ = run(capsys, "export", net_file, "--to", "dot")
    assert code == 0
    assert out.startswith("digraph")


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    out = capsys.readouterr().out
    assert "wardflow" in out


@pytest.mark.parametrize("argv", [
    ["--model", "ba", "--n", "30", "--m", "2"],
    ["--model", "ws", "--n", "30", "--k", "4", "--p", "0.2"],
    ["--model", "er", "--n", "30", "--p", "0.2"],
    ["--model", "config", "--n", "6", "--degrees", "3,3,2,2,1,1"],
])
def test_pipeline_closure_for_every_model_family(tmp_path, capsys, argv):
    log = tmp_path / "log.csv"
    net = tmp_path / "net.graphml"
    assert run(capsys, "synth", *argv, "--journeys", "100", "--seed", "4", "-o", log)[0] == 0
    assert run(capsys, "build", log, "-o", net)[0] == 0
    code, out, _ = run(capsys, "analyze", net, "--boot", "5", "--sw-samples", "1", "--seed", "2")
    assert code == 0
    report = json.loads(out)
    assert report["network_summary"]["nodes"] > 0


def test_report_format_carries_published_style_values(capsys):
    # the report layout must be able to carry tail fits of the shape seen in
    # published analyses: gamma with a bootstrap CI and a goodness-of-fit p
    from wardflow.powerlaw import PowerLawFit
    from wardflow.report import _serialize_power_fit

    fit = PowerLawFit(gamma=6.18, xmin=14, n_tail=37, ks_stat=0.08,
                      p_value=0.46, ci_low=6.14, ci_high=6.26, n_bootstrap=500, seed=1)
    payload = _serialize_power_fit(fit)
    assert payload["gamma"] == 6.18
    assert (payload["ci_low"], payload["ci_high"]) == (6.14, 6.26)
    assert payload["p_value"] == 0.46
    assert json.dumps(payload)
