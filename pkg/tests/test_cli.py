import json
import subprocess
import sys

from conftest import TWO_NODE_DOC
from plif import load_network


def test_validate_ok(cli, chain_file):
    code, out, _ = cli("validate", chain_file)
    assert code == 0
    assert out.strip() == "OK: 4 nodes"


def test_validate_reports_reversed_pl_edge(cli, tmp_path):
    doc = json.loads(json.dumps(TWO_NODE_DOC))
    doc["nodes"][1]["pl"] = -1.0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, _, err = cli("validate", str(path))
    assert code == 2
    assert "temporal-precedence" in err
    assert "'c'" in err and "'e'" in err


def test_validate_truncated_json_exits_1(cli, tmp_path):
    path = tmp_path / "trunc.json"
    path.write_text(json.dumps(TWO_NODE_DOC)[:40])
    code, _, err = cli("validate", str(path))
    assert code == 1
    assert "error" in err


def test_query_chain_exact_via_frontier_evidence(cli, chain_file):
    code, out, _ = cli(
        "query", chain_file, "--target", "x=1", "--obs", "y=1", "--threshold", "2.0"
    )
    assert code == 0
    assert "exactness=frontier_subset_of_evidence" in out
    assert "lower=0.627000000" in out
    assert "upper=0.627000000" in out


def test_query_at_pl_of_matches_raw_threshold(cli, chain_file):
    _, by_node, _ = cli("query", chain_file, "--target", "x=1", "--obs", "y=1", "--at-pl-of", "t2")
    _, by_value, _ = cli("query", chain_file, "--target", "x=1", "--obs", "y=1", "--threshold", "2.0")
    assert by_node == by_value


def test_query_exact_two_node(cli, two_node_file):
    code, out, _ = cli("query", two_node_file, "--target", "e=1", "--exact")
    assert code == 0
    assert out.strip() == "exact=0.310000000"


def test_query_threshold_above_cpl_exits_3_quoting_level(cli, chain_file):
    code, _, err = cli("query", chain_file, "--target", "x=1", "--threshold", "4.5")
    assert code == 3
    assert "4" in err


def test_query_zero_probability_evidence_exits_4(cli, tmp_path):
    doc = {
        "t0": 0.0,
        "open_past": False,
        "nodes": [
            {"name": "s", "states": ["0", "1"], "pl": 0.0, "parents": [], "cpt": [[1.0, 0.0]]},
            {"name": "k", "states": ["0", "1"], "pl": 1.0, "parents": ["s"],
             "cpt": [[1.0, 0.0], [0.0, 1.0]]},
        ],
    }
    path = tmp_path / "det.json"
    path.write_text(json.dumps(doc))
    code, _, err = cli("query", str(path), "--target", "s=0", "--obs", "k=1", "--exact")
    assert code == 4
    assert "probability zero" in err


def test_query_formats_agree_on_numbers(cli, chain_file):
    _, human, _ = cli("query", chain_file, "--target", "x=1", "--threshold", "4.0")
    _, csv, _ = cli("query", chain_file, "--target", "x=1", "--threshold", "4.0", "--format", "csv")
    human_numbers = [line.split("=")[1] for line in human.strip().splitlines()[:2]]
    csv_numbers = csv.strip().splitlines()[1].split(",")[:2]
    assert human_numbers == csv_numbers


def test_query_json_format_is_machine_readable(cli, chain_file):
    _, out, _ = cli("query", chain_file, "--target", "x=1", "--threshold", "4.0", "--format", "json")
    payload = json.loads(out)
    assert payload["exactness"] == "not_exact"
    assert 0.0 <= payload["lower"] <= payload["upper"] <= 1.0


def test_query_dump_submodel(cli, chain_file, tmp_path):
    out_path = tmp_path / "sub.json"
    code, _, _ = cli(
        "query", chain_file, "--target", "x=1", "--obs", "y=1",
        "--threshold", "3.0", "--dump-submodel", str(out_path),
    )
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["frontier"] == ["t2"]
    names = {n["name"] for n in doc["nodes"]}
    assert names == {"x", "t1", "t2"}
    # the dump is itself a loadable open-past document (extra key ignored)
    reloaded = load_network(out_path.read_text())
    assert reloaded.open_past
    assert reloaded.spec("t2").is_stub


def test_query_bad_pair_is_usage_error(cli, chain_file):
    code, _, err = cli("query", chain_file, "--target", "x", "--threshold", "4.0")
    assert code == 2
    assert "usage error" in err


def test_query_unknown_node_exits_1(cli, chain_file):
    code, _, _ = cli("query", chain_file, "--target", "zz=1", "--threshold=-inf")
    assert code == 1


def test_sweep_hmm_csv_rows(cli):
    code, out, _ = cli("sweep", "--hmm", "--depth", "10", "--window", "10", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "threshold,lower,upper,frontier_size,interior_size"
    assert len(lines) == 11
    rows = {line.split(",")[0]: line.split(",") for line in lines[1:]}
    assert float(rows["-3"][1]) > 0.5
    assert float(rows["-1"][1]) < 0.5 and float(rows["-2"][1]) < 0.5


def test_sweep_depth_one_reads_transition_column(cli):
    code, out, _ = cli("sweep", "--hmm", "--depth", "1", "--format", "csv")
    assert code == 0
    assert out.strip().splitlines()[1] == "-1,0.100000000,0.900000000,1,1"


def test_sweep_csv_and_human_numbers_match(cli):
    _, human, _ = cli("sweep", "--hmm", "--depth", "4")
    _, csv, _ = cli("sweep", "--hmm", "--depth", "4", "--format", "csv")
    human_rows = [line.split() for line in human.strip().splitlines()[1:]]
    csv_rows = [line.split(",") for line in csv.strip().splitlines()[1:]]
    for h, c in zip(human_rows, csv_rows):
        assert h[:3] == c[:3]


def test_sweep_on_file_stops_early_and_full_sweep_overrides(cli, chain_file):
    _, short, _ = cli("sweep", chain_file, "--target", "x=1", "--obs", "y=1", "--format", "csv")
    _, full, _ = cli(
        "sweep", chain_file, "--target", "x=1", "--obs", "y=1", "--format", "csv", "--full-sweep"
    )
    assert len(short.strip().splitlines()) == 4   # header + 3 rows
    assert len(full.strip().splitlines()) == 5    # sentinel row included
    assert full.strip().splitlines()[-1].startswith("-inf,")


def test_sweep_needs_path_or_hmm(cli):
    code, _, err = cli("sweep", "--target", "x=1")
    assert code == 2
    assert "usage error" in err


def test_sweep_frontier_cap_env_var(cli, chain_file):
    code, _, err = cli(
        "sweep", chain_file, "--target", "x=1", "--format", "csv",
        env={"PLIF_MAX_FRONTIER": "1"},
    )
    assert code == 5
    assert "frontier too wide" in err


def test_dsep_chain_separated(cli, chain_file):
    code, out, _ = cli("dsep", chain_file, "-A", "x", "-B", "y", "-C", "t1")
    assert code == 0
    assert out.strip() == "true"


def test_dsep_collider_conditioned_not_separated(cli, tmp_path):
    from conftest import COLLIDER_DOC

    path = tmp_path / "collider.json"
    path.write_text(json.dumps(COLLIDER_DOC))
    code, out, _ = cli("dsep", str(path), "-A", "a", "-B", "b", "-C", "c")
    assert code == 6
    assert out.strip() == "false"


def test_dsep_overlapping_sets_usage_error(cli, chain_file):
    code, _, err = cli("dsep", chain_file, "-A", "x", "-B", "y", "-C", "x")
    assert code == 2
    assert "usage error" in err


def test_dsep_unknown_node_exits_1(cli, chain_file):
    code, _, _ = cli("dsep", chain_file, "-A", "x", "-B", "nope")
    assert code == 1


def test_gen_random_emits_loadable_deterministic_document(cli):
    code, out1, _ = cli("gen-random", "--seed", "4", "--nodes", "6")
    code2, out2, _ = cli("gen-random", "--seed", "4", "--nodes", "6")
    assert code == code2 == 0
    assert out1 == out2
    net = load_network(out1)
    assert len(net) == 6


def test_gen_random_rejects_oversized(cli):
    code, _, err = cli("gen-random", "--seed", "1", "--nodes", "40")
    assert code == 2
    assert "usage error" in err


def test_gen_hmm_fragment_is_queryable(cli, tmp_path):
    out_path = tmp_path / "frag.json"
    code, _, _ = cli("gen-hmm", "--depth", "3", "--window", "2", "--out", str(out_path))
    assert code == 0
    net = load_network(out_path.read_text())
    assert net.open_past
    code, out, _ = cli(
        "query", str(out_path), "--target", "x_t+1=1",
        "--obs", "y_t=1", "--obs", "y_t-1=1", "--threshold", "-3",
    )
    assert code == 0
    assert "lower=0.643396226" in out
    assert "upper=0.873234201" in out


def test_cli_outputs_are_byte_identical_across_runs(cli, chain_file):
    first = cli("sweep", chain_file, "--target", "x=1", "--obs", "y=1", "--format", "csv")
    second = cli("sweep", chain_file, "--target", "x=1", "--obs", "y=1", "--format", "csv")
    assert first == second


def test_module_entry_point_runs_as_subprocess(two_node_file):
    proc = subprocess.run(
        [sys.executable, "-m", "plif", "query", two_node_file, "--target", "e=1", "--exact"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "exact=0.310000000"
