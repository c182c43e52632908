from __future__ import annotations

import json

import pytest
from hypothesis import given, settings, strategies as st

from heckegraph import cli
from heckegraph.cli import ConfigError, JobConfig, main, parse_config

POINTS = {2: ["t", "t+1", "t^2+t+1"], 3: ["t", "t-1", "t-2", "t^2+1"], 4: ["t", "t+1", "t+a"]}
KINDS = ["1", "U", "U-", "T", "B", "B-", "G", "Z.U"]


@st.composite
def configs(draw):
    q = draw(st.sampled_from(sorted(POINTS)))
    pts = draw(st.lists(st.sampled_from(POINTS[q]), unique=True, max_size=3))
    ram = [{"point": p, "depth": draw(st.integers(1, 2)), "subgroup": draw(st.sampled_from(KINDS))} for p in pts]
    return JobConfig(q, draw(st.sampled_from(["PGL2", "GL2"])), draw(st.sampled_from(POINTS[q][:2])), ram,
                     draw(st.integers(0, 9)))


@settings(max_examples=80, deadline=None)
@given(configs())
def test_config_roundtrip(cfg):
    again = parse_config(cfg.dumps())
    assert again == cfg
    assert again.dumps() == cfg.dumps()


def _write(tmp_path, text, name="job.json"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


BAD = [
    ('{\n  "q": 6\n}\n', 2, "not a prime power"),
    ('{\n  "q": 11\n}\n', 2, "exceeds"),
    ('{\n  "q": 3,\n  "mode": "SL2"\n}\n', 3, "mode"),
    ('{\n  "q": 3,\n  "ramification": [\n    {"point": "t", "depth": 0, "subgroup": "B"}\n  ]\n}\n', 4, "depth"),
    ('{\n  "q": 3,\n  "ramification": [\n    {"point": "t", "depth": 1, "subgroup": "Q"}\n  ]\n}\n', 4, "subgroup"),
    ('{\n  "q": 3,\n  "ramification": [\n    {"point": "t", "depth": 1, "subgroup": "B"},\n'
     '    {"point": "t", "depth": 1, "subgroup": "U"}\n  ]\n}\n', 5, "first at line 4"),
    ('{\n  "q": 3,\n  "x": "t^2"\n}\n', 3, "Hecke point"),
    ('{\n  "q": 3,\n  "window": 2,\n}\n', 4, ""),
]


@pytest.mark.parametrize("text,line,fragment", BAD)
def test_config_errors_name_the_line(text, line, fragment):
    with pytest.raises(ConfigError) as err:
        parse_config(text, "job.json")
    assert err.value.line == line
    assert str(err.value).startswith(f"job.json:{line}: ")
    assert fragment in str(err.value)


def test_bad_config_exit_code(tmp_path, capsys):
    path = _write(tmp_path, '{\n  "q": 6\n}\n')
    assert main(["build", "--config", path]) == 2
    assert f"{path}:2:" in capsys.readouterr().err
    assert main(["build", "--config", str(tmp_path / "missing.json")]) == 2


UNIP = {"q": 3, "x": "t", "window": 6,
        "ramification": [{"point": "t", "depth": 1, "subgroup": "B"},
                         {"point": "t-1", "depth": 1, "subgroup": "U"},
                         {"point": "t-2", "depth": 1, "subgroup": "B"}],
        "forget": ["t-2"], "coarser": [{"point": "t-1", "subgroup": "B"}]}


def test_build_is_byte_identical(tmp_path):
    path = _write(tmp_path, json.dumps(UNIP))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["build", "--config", path, "--out", str(a)]) == 0
    assert main(["build", "--config", path, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    d1, d2 = tmp_path / "a.dot", tmp_path / "b.dot"
    assert main(["export", "--graph", str(a), "--out", str(d1)]) == 0
    assert main(["build", "--config", path, "--format", "dot", "--out", str(d2)]) == 0
    assert d1.read_bytes() == d2.read_bytes()


def test_check_commands(tmp_path, capsys):
    path = _write(tmp_path, json.dumps(UNIP))
    for cmd in (["check-covering"], ["check-pgl"], ["check-change"], ["check", "--check", "out-degree"],
                ["check", "--check", "fibers"], ["check", "--check", "monodromy"]):
        assert main(cmd + ["--config", path]) == 0, cmd
    capsys.readouterr()
    torus = dict(UNIP, ramification=[{"point": "t", "depth": 1, "subgroup": "T"},
                                     {"point": "t-1", "depth": 1, "subgroup": "U"}],
                 forget=["t-1"], window=8)
    tpath = _write(tmp_path, json.dumps(torus), "torus.json")
    assert main(["check-covering", "--config", tpath]) == 1
    rep = json.loads(capsys.readouterr().out)
    assert rep["violations"]
    # the torus level alone is not regular; the unipotent level forces T_D to the scalars
    assert main(["check-regularity", "--config", tpath]) == 0
    alone = _write(tmp_path, json.dumps(dict(torus, points=["t"])), "alone.json")
    assert main(["check-regularity", "--config", alone]) == 1


def test_local_cosets(capsys):
    assert main(["local-cosets", "--q", "3", "--subgroup", "B"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["ok"] and rep["count"] == len(rep["representatives"]) == 3
    assert main(["local-cosets", "--q", "2", "--n", "3", "--r", "2", "--subgroup", "P-(2)"]) == 0
    # block label that does not match the Hecke operator's block type
    assert main(["local-cosets", "--q", "2", "--n", "3", "--subgroup", "P-(2)"]) == 2


def test_eig_dim(tmp_path, capsys):
    cfg = {"q": 2, "x": "t", "window": 6, "ramification": [{"point": "t", "depth": 2, "subgroup": "U"}]}
    assert main(["eig-dim", "--config", _write(tmp_path, json.dumps(cfg)), "--seed", "3"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["generic_dim"] == rep["formula_dim"] == 2
    assert len(rep["samples"]) == 5
    small = dict(cfg, window=2)
    assert main(["eig-dim", "--config", _write(tmp_path, json.dumps(small), "s.json")]) == 2


def test_repro_all(capsys):
    assert main(["repro", "all"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == len(cli.catalogue()) >= 6
    assert all(line.endswith(": match") for line in out)


def test_repro_detects_perturbed_golden(monkeypatch, capsys):
    real = cli.load_golden

    def perturbed(fig):
        g = json.loads(json.dumps(real(fig)))
        e = g["edges"][0]["out"][0]
        e[1] += 1
        return g

    monkeypatch.setattr(cli, "load_golden", perturbed)
    assert main(["repro", "g1"]) == 1
    cap = capsys.readouterr()
    assert "MISMATCH" in cap.out
    assert "@@" in cap.err
    assert main(["repro", "nonexistent"]) == 2
