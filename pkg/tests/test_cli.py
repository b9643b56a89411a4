import json

import pytest

from dtiling import (
    DriverParams,
    complete_3graph,
    construct_G1,
    main,
    parse_certificate,
    parse_instance,
    perfect_tiling_exact,
    planted_extremal,
    random_codegree_instance,
    solve_driver,
    validate_tiling,
    write_instance,
)


def run(argv):
    """main() returns exit codes; argparse errors raise SystemExit instead."""
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


class TestGen:
    def test_g1_matches_library(self, capsys):
        assert run(["gen", "--kind", "g1", "--n", "8"]) == 0
        G = parse_instance(capsys.readouterr().out)
        assert G.edges == construct_G1(8).edges

    def test_random_gets_default_codegree(self, capsys):
        assert run(["gen", "--kind", "random", "--n", "16", "--seed", "2"]) == 0
        G = parse_instance(capsys.readouterr().out)
        assert G.edges == random_codegree_instance(16, 4, seed=2).edges

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "inst.txt"
        assert run(["gen", "--kind", "complete", "--n", "8", "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        assert parse_instance(out.read_text()).n == 8

    def test_sts_needs_admissible_order(self, capsys):
        assert run(["gen", "--kind", "sts", "--n", "8"]) == 64

    def test_unknown_kind_rejected(self):
        assert run(["gen", "--kind", "complete3p", "--n", "9"]) == 64


class TestSolve:
    def write(self, tmp_path, G):
        path = tmp_path / "inst.txt"
        write_instance(G, path)
        return str(path)

    def test_complete_12_tiles(self, tmp_path, capsys):
        G = complete_3graph(12)
        path = self.write(tmp_path, G)
        assert run(["solve", path]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["verdict"] == "tiled"
        cert = parse_certificate(report["certificate_text"])
        assert validate_tiling(G, cert.tiling, require_perfect=True).ok

    def test_g1_8_infeasible(self, tmp_path, capsys):
        path = self.write(tmp_path, construct_G1(8))
        assert run(["solve", path, "--mode", "exact"]) == 2
        report = json.loads(capsys.readouterr().out)
        assert report["verdict"] == "infeasible"
        assert report["certificate"] is None

    def test_planted_uses_extremal_branch(self, tmp_path, capsys):
        path = self.write(tmp_path, planted_extremal(16))
        assert run(["solve", path]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["branch"] == "extremal"

    def test_forced_extremal_stalls_elsewhere(self, tmp_path, capsys):
        G = random_codegree_instance(16, 4, seed=0)
        path = self.write(tmp_path, G)
        code = run(["solve", path, "--mode", "extremal"])
        report = json.loads(capsys.readouterr().out)
        if code == 0:
            assert report["branch"] == "extremal"
        else:
            assert code == 3 and report["verdict"] == "exhausted"

    def test_forced_absorb_small_n_stalls(self, tmp_path, capsys):
        path = self.write(tmp_path, complete_3graph(12))
        assert run(["solve", path, "--mode", "absorb"]) == 3
        report = json.loads(capsys.readouterr().out)
        assert report["verdict"] == "exhausted"
        assert report["attempts"]

    def test_cert_file_and_determinism(self, tmp_path, capsys):
        path = self.write(tmp_path, planted_extremal(16))
        c1 = tmp_path / "a.cert"
        c2 = tmp_path / "b.cert"
        assert run(["solve", path, "--no-timings", "--cert", str(c1)]) == 0
        out1 = capsys.readouterr().out
        assert run(["solve", path, "--no-timings", "--cert", str(c2)]) == 0
        out2 = capsys.readouterr().out
        assert c1.read_text() == c2.read_text()
        assert out1.replace(str(c1), "X") == out2.replace(str(c2), "X")
        assert "timings_ms" not in json.loads(out1)

    def test_paper_constants_warns(self, tmp_path, capsys):
        path = self.write(tmp_path, complete_3graph(12))
        assert run(["solve", path, "--paper-constants"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["warnings"]

    def test_missing_file_is_usage_error(self, capsys):
        assert run(["solve", "/nonexistent/inst.txt"]) == 64

    def test_bad_mode_rejected(self, tmp_path):
        assert run(["solve", "x", "--mode", "psychic"]) == 64


class TestVerify:
    def test_round_trip_ok(self, tmp_path, capsys):
        G = complete_3graph(12)
        inst = tmp_path / "inst.txt"
        write_instance(G, inst)
        cert = tmp_path / "out.cert"
        assert run(["solve", str(inst), "--cert", str(cert)]) == 0
        capsys.readouterr()
        assert run(["verify", str(inst), "--cert", str(cert), "--perfect"]) == 0
        assert "ok:" in capsys.readouterr().out

    def test_corrupted_cert_names_violation(self, tmp_path, capsys):
        G = complete_3graph(12)
        inst = tmp_path / "inst.txt"
        write_instance(G, inst)
        cert = tmp_path / "bad.cert"
        cert.write_text("perfect 1\n0 1 2 3 | 0 1 2 | 0 1 3\n")
        assert run(["verify", str(inst), "--cert", str(cert)]) == 1
        assert "not perfect" in capsys.readouterr().out

    def test_unreadable_cert(self, tmp_path, capsys):
        G = complete_3graph(8)
        inst = tmp_path / "inst.txt"
        write_instance(G, inst)
        cert = tmp_path / "bad.cert"
        cert.write_text("perfect xyz\n")
        assert run(["verify", str(inst), "--cert", str(cert)]) == 1
        assert "unreadable" in capsys.readouterr().out


class TestOracle:
    def test_writes_certificate(self, tmp_path, capsys):
        G = complete_3graph(8)
        inst = tmp_path / "inst.txt"
        write_instance(G, inst)
        cert = tmp_path / "o.cert"
        assert run(["oracle", str(inst), "--cert", str(cert)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["status"] == "found" and report["copies"] == 2
        assert parse_certificate(cert.read_text()).kind == "perfect"

    def test_infeasible_exit(self, tmp_path, capsys):
        inst = tmp_path / "inst.txt"
        write_instance(construct_G1(8), inst)
        assert run(["oracle", str(inst)]) == 2


class TestScan:
    def test_json_lines(self, capsys):
        assert run(["scan", "--n-range", "8:12:4", "--trials", "2", "--no-timings"]) == 0
        lines = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
        assert [l["n"] for l in lines] == [8, 12]
        for line in lines:
            assert set(line) == {"n", "d", "trials", "solved", "fraction"}
            assert 0 <= line["solved"] <= 2

    def test_timings_included_by_default(self, capsys):
        assert run(["scan", "--n-range", "8:8:4", "--trials", "1"]) == 0
        (line,) = [json.loads(l) for l in capsys.readouterr().out.splitlines()]
        assert "mean_ms" in line

    def test_parallel_matches_serial(self, capsys):
        assert run(["scan", "--n-range", "8:8:4", "--trials", "2", "--no-timings"]) == 0
        serial = capsys.readouterr().out
        assert run(["scan", "--n-range", "8:8:4", "--trials", "2", "--no-timings", "--jobs", "2"]) == 0
        assert capsys.readouterr().out == serial

    @pytest.mark.parametrize(
        "spec", ["8:12", "a:b:4", "12:8:4", "0:8:4", "8:12:0", "9:13:4"]
    )
    def test_bad_ranges(self, spec, capsys):
        assert run(["scan", "--n-range", spec]) == 64


class TestUsage:
    def test_no_command(self):
        assert run([]) == 64

    def test_unknown_flag(self):
        assert run(["solve", "x", "--badflag"]) == 64

    def test_driver_params_validated(self):
        from dtiling import InputError

        G = complete_3graph(8)

        with pytest.raises(InputError):
            solve_driver(G, DriverParams(mode="telepathy"))
