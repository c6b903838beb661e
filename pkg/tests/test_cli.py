"""End-to-end CLI runs: exit codes, report plumbing, reruns, seeds."""

import json

import pytest

from ringbreak.cli import main


def run(tmp_path, *argv, name="report.json"):
    """Invoke the CLI writing the report to a temp file; return (code, report)."""
    path = tmp_path / name
    code = main([*argv, "--report", str(path)])
    report = json.loads(path.read_bytes()) if path.exists() else None
    return code, report


class TestValidate:
    def test_zoo_protocol_passes(self, tmp_path):
        code, rep = run(tmp_path, "validate", "--protocol", "xor_exchange",
                        "--trials", "10", "--seed", "1")
        assert code == 0
        assert rep["kind"] == "validate" and rep["ok"] is True
        assert rep["config"]["protocol"] == "xor_exchange"
        assert rep["declared_rounds"] == {"kind": "strict", "q": 1}

    def test_unknown_protocol_is_usage_error(self, tmp_path):
        code, rep = run(tmp_path, "validate", "--protocol", "wat", "--seed", "1")
        assert code == 2 and rep is None

    def test_protocol_required(self, tmp_path):
        code, _ = run(tmp_path, "validate", "--seed", "1")
        assert code == 2


class TestAttack:
    def test_constant_protocol_is_fully_forced(self, tmp_path):
        code, rep = run(tmp_path, "attack", "--protocol", "const:5", "--t", "1",
                        "--trials", "50", "--seed", "7")
        assert code == 0
        assert rep["success_rate"] == 1.0 and rep["y_star"] == "05"
        assert rep["delta_hat"] == 0.0
        assert rep["bound_holds"] and not rep["inconclusive"]
        assert rep["corrupted"] == [2]  # default: the last s parties

    def test_stdout_report_when_no_file(self, capsys):
        code = main(["attack", "--protocol", "const:0", "--t", "1",
                     "--trials", "20", "--seed", "1"])
        assert code == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["kind"] == "attack" and rep["success"] == 20

    def test_jobs_do_not_change_the_report(self, tmp_path):
        args = ["attack", "--protocol", "echo_xor:2", "--t", "1",
                "--trials", "40", "--seed", "3", "--delta-trials", "100"]
        code1, _ = run(tmp_path, *args, "--jobs", "1", name="j1.json")
        code2, _ = run(tmp_path, *args, "--jobs", "2", name="j2.json")
        assert code1 == code2
        assert (tmp_path / "j1.json").read_bytes() == (tmp_path / "j2.json").read_bytes()

    def test_rerun_is_byte_identical(self, tmp_path):
        code, _ = run(tmp_path, "attack", "--protocol", "const:1", "--t", "1",
                      "--trials", "30", "--seed", "9", name="first.json")
        assert code == 0
        code2, _ = run(tmp_path, "rerun", "--from", str(tmp_path / "first.json"),
                       name="second.json")
        assert code2 == 0
        assert (tmp_path / "first.json").read_bytes() == (tmp_path / "second.json").read_bytes()

    def test_rerun_rejects_non_report(self, tmp_path):
        bogus = tmp_path / "x.json"
        bogus.write_text("{}")
        assert main(["rerun", "--from", str(bogus)]) == 2
        assert main(["rerun", "--from", str(tmp_path / "missing.json")]) == 2


class TestConfigPlumbing:
    def test_flags_override_config_file(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps(
            {"protocol": "const:1", "trials": 30, "seed": 5}))
        code, rep = run(tmp_path, "validate", "--config", str(cfgfile),
                        "--protocol", "const:0")
        assert code == 0
        assert rep["config"]["protocol"] == "const:0"
        assert rep["config"]["trials"] == 30 and rep["config"]["seed"] == 5

    def test_unknown_config_key_rejected(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({"protocol": "const:1", "trails": 9}))
        code, _ = run(tmp_path, "validate", "--config", str(cfgfile))
        assert code == 2

    def test_malformed_config_file(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text("not json")
        assert main(["validate", "--config", str(cfgfile)]) == 2
        cfgfile.write_text("[1,2]")
        assert main(["validate", "--config", str(cfgfile)]) == 2

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("RINGBREAK_SEED", "77")
        code, rep = run(tmp_path, "validate", "--protocol", "const:0",
                        "--trials", "5")
        assert code == 0 and rep["config"]["seed"] == 77
        monkeypatch.setenv("RINGBREAK_SEED", "abc")
        code, _ = run(tmp_path, "validate", "--protocol", "const:0", name="r2.json")
        assert code == 2

    def test_csv_output(self, tmp_path):
        csv_path = tmp_path / "out.csv"
        code = main(["dominance", "--builtin", "or:3",
                     "--report", str(tmp_path / "r.json"), "--csv", str(csv_path)])
        assert code == 0
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "k,weak,strong,y_star"
        assert len(lines) == 4  # one row per k


class TestDominanceCommand:
    def test_profile_and_classification(self, tmp_path):
        code, rep = run(tmp_path, "dominance", "--builtin", "pairs")
        assert code == 0 and rep["minimal_strong_k"] == 3
        code, rep = run(tmp_path, "dominance", "--builtin", "or:4", "--t", "2")
        assert code == 0
        assert rep["classification"]["verdict"] == "CONDITIONAL"
        assert rep["classification"]["y_star"] == 1

    def test_collapse_check(self, tmp_path):
        code, rep = run(tmp_path, "dominance", "--builtin", "xor:6",
                        "--collapse-m", "2")
        assert code == 0 and rep["collapse"]["holds"] is True

    def test_table_file_roundtrip(self, tmp_path):
        from ringbreak.dominance import threshold_table
        tfile = tmp_path / "t.json"
        tfile.write_text(threshold_table(4, 2).to_json())
        code, rep = run(tmp_path, "dominance", "--table", str(tfile))
        assert code == 0 and rep["minimal_strong_k"] == 2
        # the table itself is embedded so the report reruns without the file
        assert rep["config"]["table_data"]["n"] == 4

    def test_rerun_after_table_file_vanishes(self, tmp_path):
        from ringbreak.dominance import or_table
        tfile = tmp_path / "t.json"
        tfile.write_text(or_table(3).to_json())
        code, _ = run(tmp_path, "dominance", "--table", str(tfile), name="a.json")
        assert code == 0
        tfile.unlink()
        code, _ = run(tmp_path, "rerun", "--from", str(tmp_path / "a.json"),
                      name="b.json")
        assert code == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_missing_and_malformed_table(self, tmp_path):
        assert main(["dominance", "--table", str(tmp_path / "nope.json")]) == 2
        bad = tmp_path / "bad.json"
        bad.write_text("{\"n\": 2}")
        assert main(["dominance", "--table", str(bad)]) == 2
        assert main(["dominance", "--builtin", "wat:3"]) == 2
        assert main(["dominance"]) == 2  # neither table nor builtin


class TestCompileCommand:
    def test_wrapper_ok_with_coin_adversary(self, tmp_path):
        code, rep = run(tmp_path, "compile", "--builtin", "thresh:2:6", "--t", "2",
                        "--adv", "coin:1/2", "--seed", "1")
        assert code == 0
        assert rep["no_bot"] and rep["abort_forces_y_star"]
        assert rep["exact_zero"] is True and rep["distance_exhaustive"] == 0.0
        assert rep["t1"] == 1 and rep["t2"] == 2 and rep["y_star"] == 1

    def test_monte_carlo_extra(self, tmp_path):
        code, rep = run(tmp_path, "compile", "--builtin", "thresh:2:6", "--t", "2",
                        "--adv", "coin:1/3", "--mc-trials", "800", "--seed", "2")
        assert code == 0
        assert rep["mc_trials"] == 800 and rep["distance_mc"] < 0.1

    def test_not_dominated_is_usage_error(self, tmp_path):
        assert main(["compile", "--builtin", "xor:6", "--t", "2", "--seed", "1"]) == 2

    def test_unsupported_subcase(self, tmp_path):
        assert main(["compile", "--builtin", "thresh:2:5", "--t", "2",
                     "--seed", "1"]) == 2

    def test_bad_adversary_selector(self, tmp_path):
        assert main(["compile", "--builtin", "thresh:2:6", "--t", "2",
                     "--adv", "sometimes", "--seed", "1"]) == 2


class TestCoinflipCommand:
    def test_honest_mode(self, tmp_path):
        code, rep = run(tmp_path, "coinflip", "--protocol", "fair_coin",
                        "--mode", "honest", "--trials", "1000", "--seed", "2")
        assert code == 0
        assert rep["bias"]["distance"] <= 0.1

    def test_attack_mode_forces_constant(self, tmp_path):
        code, rep = run(tmp_path, "coinflip", "--protocol", "const:1",
                        "--mode", "attack", "--trials", "1000", "--seed", "2")
        assert code == 0
        assert rep["y_star"] == "01" and rep["forced"]["counts"]["1"] == 1000

    def test_verify_mode_reports_verdict(self, tmp_path):
        code, rep = run(tmp_path, "coinflip", "--protocol", "const:0",
                        "--mode", "verify", "--trials", "1000", "--seed", "2",
                        "--delta-trials", "100")
        assert code == 0
        assert rep["verdict"]["holds"] is True


class TestConsistencyCommand:
    def test_constant_protocol_is_perfectly_consistent(self, tmp_path):
        code, rep = run(tmp_path, "consistency", "--protocol", "const:0",
                        "--trials", "100", "--seed", "1")
        assert code == 0
        assert rep["delta_hat"] == 0.0
        assert rep["m"] == 4 and len(rep["per_adversary"]) == 4
        assert all(a["failures"] == 0 for a in rep["per_adversary"])

    def test_three_party_only(self, tmp_path):
        assert main(["consistency", "--protocol", "xor_exchange", "--n", "4",
                     "--seed", "1"]) == 2
