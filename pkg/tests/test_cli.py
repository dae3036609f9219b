# tests/test_cli.py
import pandas as pd
import pytest

from src.core.errors import UsageError
from src.main import main, parse_args

SMALL = ["--mean", "10", "--kmax", "60", "--t-end", "10", "--sample-dt", "1"]


def _manifest(path):
    lines = (path.parent / (path.name + ".manifest")).read_text().splitlines()
    return dict(line.split("=", 1) for line in lines)


def _stable_manifest_lines(path):
    text = (path.parent / (path.name + ".manifest")).read_text()
    return [line for line in text.splitlines() if not line.startswith("wall_clock_seconds=")]


# --- parsing ---
def test_ode_reduced_defaults():
    cmd = parse_args(["ode-reduced", "--dist", "poisson", "--mean", "25", "--t-end", "150"])
    assert cmd.subcommand == "ode-reduced"
    p = cmd.params
    assert (p["alpha"], p["beta"], p["gamma"], p["gamma1"], p["eta"]) == (0.4, 0.15, 0.1, 0.1, 0.5)
    assert p["t_end"] == 150.0 and p["mean"] == 25.0
    assert cmd.output.endswith("ode-reduced.csv")


def test_simulate_policy_lists():
    cmd = parse_args([
        "simulate", "--graph", "dolphin.txt", "--eta", "0.9", "--period", "14",
        "--h-overlap", "0.75", "--runs", "200",
    ])
    assert cmd.params["eta"] == [0.9]
    assert cmd.params["period"] == [14]
    assert cmd.params["h_overlap"] == [0.75]
    assert cmd.params["runs"] == 200
    assert parse_args(["simulate", "--nodes", "50", "--eta", "0.3,0.6,0.9"]).params["eta"] == [0.3, 0.6, 0.9]


@pytest.mark.parametrize("argv, flag", [
    (["early-time", "--eta", "2.0"], "--eta"),
    (["ode-full", "--gamma", "-1"], "--gamma"),
    (["ode-full", "--bogus", "1"], "--bogus"),
    (["ode-full", "--t-end", "0"], "--t-end"),
    (["netstat"], "--graph"),
    (["simulate", "--nodes", "10", "--period", "3.5"], "--period"),
    (["simulate", "--nodes", "10", "--runs", "0"], "--runs"),
    (["simulate", "--nodes", "10", "--beta-close", "0.1"], "--beta-close"),
    (["simulate", "--eta", "0.5"], "--graph"),
    (["stability", "--xi", "1.5"], "--xi"),
])
def test_usage_errors_name_the_flag(argv, flag):
    with pytest.raises(UsageError) as excinfo:
        parse_args(argv)
    assert excinfo.value.flag == flag


def test_usage_error_exit_code():
    assert main(["early-time", "--eta", "2.0"]) == 2


# --- execution ---
def test_ode_full_writes_conserving_table_and_manifest(tmp_path):
    out = tmp_path / "full.csv"
    assert main(["ode-full", *SMALL, "--output", str(out)]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["t", "s", "qS", "x", "qI", "r"]
    assert (frame[["s", "qS", "x", "qI", "r"]].sum(axis=1) - 1).abs().max() < 1e-6
    manifest = _manifest(out)
    assert manifest["subcommand"] == "ode-full"
    assert manifest["param.alpha"] == "0.4"
    assert manifest["outputs"] == "full.csv"
    assert "wall_clock_seconds" in manifest


def test_ode_reduced_compare_writes_ratio(tmp_path):
    out = tmp_path / "reduced.csv"
    assert main(["ode-reduced", *SMALL, "--compare", "--output", str(out)]) == 0
    assert list(pd.read_csv(out).columns) == ["t", "u", "qS", "v", "qI", "r"]
    ratio = pd.read_csv(tmp_path / "reduced_ratio.csv")
    assert list(ratio.columns) == ["t", "s", "qS", "x", "qI", "r"]
    assert ratio["s"].iloc[0] == pytest.approx(1.0, abs=1e-6)


def test_early_time_tables(tmp_path):
    out = tmp_path / "early.csv"
    assert main(["early-time", *SMALL, "--output", str(out)]) == 0
    assert list(pd.read_csv(out).columns) == ["t", "v_early"]
    assert main(["early-time", *SMALL, "--compare", "--output", str(out)]) == 0
    assert list(pd.read_csv(out).columns) == ["t", "v_early", "v_full", "ratio"]


def test_sweep_table(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", *SMALL, "--parameter", "eta", "--values", "0.2,0.8", "--output", str(out)]) == 0
    frame = pd.read_csv(out)
    assert sorted(frame["value"].unique()) == [0.2, 0.8]
    assert set(frame["parameter"]) == {"eta"}


def test_stability_tables(tmp_path):
    out = tmp_path / "stab.csv"
    argv = ["stability", "--mean", "25", "--kmax", "100", "--xi", "0.8,0.95", "--t-end", "100",
            "--perturbation", "--verify", "--output", str(out)]
    assert main(argv) == 0
    report = pd.read_csv(out)
    assert report["classification"].tolist() == ["stable", "unstable"]
    check = pd.read_csv(tmp_path / "stab_check.csv")
    assert bool(check["in_interval"].iloc[0])
    assert check["escape_time"].iloc[1] < 10
    perturbation = pd.read_csv(tmp_path / "stab_perturbation.csv")
    assert set(perturbation["xi"]) == {0.8, 0.95}


def test_netstat_and_mapping(tmp_path):
    graph = tmp_path / "g.txt"
    graph.write_text("5 6\n6 7\n7 5\n7 8\n")
    out = tmp_path / "net.csv"
    mapping = tmp_path / "map.csv"
    argv = ["netstat", "--graph", str(graph), "--h-overlap", "0.75", "--mapping-output", str(mapping),
            "--output", str(out)]
    assert main(argv) == 0
    stats = pd.read_csv(out)
    assert list(stats.columns) == ["n", "m", "K0", "rho", "C", "C_local"]
    assert (stats["n"].iloc[0], stats["m"].iloc[0]) == (4, 4)
    assert pd.read_csv(mapping)["label"].tolist() == [5, 6, 7, 8]
    assert pd.read_csv(tmp_path / "net_edges.csv")["kind"].tolist() == ["close", "normal", "normal", "normal"]


def test_missing_graph_file_is_a_data_error(tmp_path):
    assert main(["netstat", "--graph", str(tmp_path / "none.txt"), "--output", str(tmp_path / "n.csv")]) == 3


def test_gen_graph_is_deterministic(tmp_path):
    first, second = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (first, second):
        assert main(["gen-graph", "--dist", "poisson", "--mean", "25", "--nodes", "1000",
                     "--seed", "7", "--output", str(path)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert _manifest(first)["param.seed"] == "7"


def test_simulate_is_deterministic(tmp_path):
    graph = tmp_path / "g.txt"
    assert main(["gen-graph", "--mean", "6", "--kmax", "40", "--nodes", "300", "--seed", "2",
                 "--output", str(graph)]) == 0
    outputs = []
    for name in ("one", "two"):
        out = tmp_path / name / "sim.csv"
        argv = ["simulate", "--graph", str(graph), "--eta", "0.3,0.9", "--period", "7",
                "--h-overlap", "0.3", "--runs", "3", "--seed", "5", "--initial-infected", "3",
                "--timeseries", "--output", str(out)]
        assert main(argv) == 0
        outputs.append(out)

    for suffix in ("", "_runs", "_timeseries"):
        a = outputs[0].with_name(f"sim{suffix}.csv")
        b = outputs[1].with_name(f"sim{suffix}.csv")
        assert a.read_bytes() == b.read_bytes()
    assert _stable_manifest_lines(outputs[0]) == _stable_manifest_lines(outputs[1])

    ensemble = pd.read_csv(outputs[0])
    assert ensemble["eta"].tolist() == [0.3, 0.9]
    assert ensemble["runs"].tolist() == [3, 3]
    runs = pd.read_csv(outputs[0].with_name("sim_runs.csv"))
    assert runs["seed"].tolist() == [5, 6, 7, 5, 6, 7]
    series = pd.read_csv(outputs[0].with_name("sim_timeseries.csv"))
    assert (series[["S", "I", "SQ", "IQ", "R"]].sum(axis=1) - 1).abs().max() < 1e-9


def test_simulate_on_generated_graph(tmp_path):
    out = tmp_path / "sim.csv"
    argv = ["simulate", "--nodes", "200", "--mean", "5", "--kmax", "30", "--graph-seed", "4",
            "--uniform-edges", "--eta", "0", "--runs", "2", "--output", str(out)]
    assert main(argv) == 0
    assert pd.read_csv(out)["Q_max_mean"].iloc[0] == 0.0
