import json

import pytest
import yaml

from pdrc import expr as ex
from pdrc.benchmarks import gen_cmt, gen_edp, gen_fig1
from pdrc.cli import main
from pdrc.io import ModelFormatError, dump_model, load_model, save_model, system_from_dict


@pytest.mark.parametrize("make", [gen_fig1, lambda: gen_edp(2, 1), lambda: gen_cmt(1, 1)])
def test_model_roundtrip(tmp_path, make):
    sys = make()
    p = tmp_path / "m.yaml"
    save_model(sys, p)
    assert load_model(p) == sys


def test_bad_model_documents():
    with pytest.raises(ModelFormatError):
        system_from_dict([1, 2])
    with pytest.raises(ModelFormatError):
        system_from_dict({"automata": [{"name": "A"}]})
    with pytest.raises(ModelFormatError):
        system_from_dict({"bogus": 1})


def test_synth_fig1_writes_artifacts(tmp_path, capsys):
    out, cert, rep = tmp_path / "c.yaml", tmp_path / "cert.json", tmp_path / "r.txt"
    assert main(["synth", "--model", "fig1", "--out", str(out), "--certificate", str(cert), "--report", str(rep)]) == 0
    ctl = load_model(out)
    guards = {(t.source, t.event): t.guard for t in ctl.automata[0].transitions}
    for x in range(4):
        for y in range(4):
            expect = y != 2 or x <= 2
            assert ex.evaluate(guards["l1", "a"], {"x": x, "y": y}) == expect
            assert ex.evaluate(guards["l2", "b"], {"x": x, "y": y}) == expect
    assert main(["verify", "--model", str(out), "--certificate", str(cert)]) == 0
    # certificate against the wrong model
    assert main(["verify", "--model", "fig1", "--certificate", str(cert)]) == 5
    assert "verdict: controlled" in rep.read_text()


def test_synth_forbidden_initial(tmp_path):
    m = tmp_path / "m.yaml"
    m.write_text(yaml.safe_dump({
        "events": [{"name": "e"}],
        "automata": [{"name": "A", "locations": ["p", "q"], "initial": "p", "forbidden": ["p"],
                      "transitions": [{"from": "p", "event": "e", "to": "q"}]}],
    }))
    cex = tmp_path / "cex.json"
    assert main(["synth", "--model", str(m), "--cex", str(cex)]) == 1
    assert json.loads(cex.read_text())["length"] == 0


def test_invalid_input(tmp_path, capsys):
    m = tmp_path / "m.yaml"
    m.write_text(yaml.safe_dump({"automata": [{"name": "A", "locations": ["p"], "initial": "z"}]}))
    assert main(["synth", "--model", str(m)]) == 2
    assert "initial location" in capsys.readouterr().err
    assert main(["synth", "--model", str(tmp_path / "missing.yaml")]) == 2
    (tmp_path / "g.yaml").write_text("events: [{name: e}]\nautomata: [{name: A, locations: [p], initial: p, "
                                     "transitions: [{from: p, event: e, to: p, guard: 'x >'}]}]\n")
    assert main(["synth", "--model", str(tmp_path / "g.yaml")]) == 2


def test_zero_time_budget():
    assert main(["synth", "--family", "cmt", "--params", "3,3", "--max-seconds", "0"]) == 3


def test_oracle_and_bench(capsys):
    assert main(["oracle", "--model", "fig1"]) == 0
    assert main(["oracle", "--family", "edp", "--params", "2,1"]) == 0
    assert main(["oracle", "--random", "20", "--seed", "42"]) == 0
    assert main(["bench", "--family", "edp", "--params", "2,1", "--oracle-check"]) == 0
    out = capsys.readouterr().out
    assert "EDP(2,1)" in out and "agreement" in out


def test_reports_are_deterministic(tmp_path):
    texts = []
    for i in range(2):
        rep = tmp_path / f"r{i}.txt"
        assert main(["synth", "--model", "cmt:1,2", "--report", str(rep), "--debug-invariants"]) == 0
        texts.append(rep.read_bytes())
    assert texts[0] == texts[1]


def test_run_log_and_dimacs(tmp_path):
    log, dim = tmp_path / "log.jsonl", tmp_path / "db.cnf"
    assert main(["synth", "--model", "fig1", "--run-log", str(log), "--dimacs", str(dim), "--no-ind-gen"]) == 0
    recs = [json.loads(l) for l in log.read_text().splitlines()]
    assert all(set(r) == {"frame", "cone", "verdict", "cube"} for r in recs)
    assert dim.read_text().startswith("p cnf ")


def test_distinct_output_paths(tmp_path):
    p = str(tmp_path / "x")
    assert main(["synth", "--model", "fig1", "--out", p, "--certificate", p]) == 2


def test_bench_oracle_check_skips_large_instances(capsys):
    assert main(["bench", "--model", "edp:5,10", "--oracle-check"]) == 0
    assert "oracle skipped" in capsys.readouterr().out
