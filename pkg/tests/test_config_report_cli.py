import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from levy_spde import checks, cli
from levy_spde.config import (
    ChaosConfig,
    KernelConfig,
    LevyConfig,
    RunConfig,
    config_hash,
    load,
    parse,
    resolve_workers,
    save,
    serialize,
)
from levy_spde.errors import ConfigError
from levy_spde.report import Check, Report, write_table

GOLDEN = Path(__file__).parent / "golden"

finite = st.floats(-1e6, 1e6, allow_nan=False)
pos = st.floats(0.01, 100.0)
names = st.text("abcdefghij_0123456789", min_size=1, max_size=12)


@st.composite
def run_configs(draw):
    fam = draw(st.sampled_from(["heat", "riesz", "bessel"]))
    dim = draw(st.integers(1, 3))
    density = draw(st.booleans())
    levy = (LevyConfig(atoms=None, density="exp(-abs(z))", support=[0.01, 5.0]) if density
            else LevyConfig(atoms=draw(st.lists(st.lists(pos, min_size=2, max_size=2), min_size=1, max_size=3))))
    return RunConfig(
        operator=draw(st.sampled_from(["heat", "wave"])),
        kernel=KernelConfig(fam, draw(pos), dim),
        levy=levy,
        chaos=ChaosConfig(draw(st.lists(st.integers(1, 8), min_size=1, max_size=4)),
                          draw(st.one_of(st.none(), pos)), draw(pos), draw(st.integers(1, 10**6))),
        ts=draw(st.lists(pos, min_size=1, max_size=4)),
        xs=draw(st.lists(finite, min_size=1, max_size=3)),
        ps=draw(st.lists(st.floats(2.0, 8.0), min_size=1, max_size=3)),
        box=draw(st.one_of(st.none(), pos)),
        trials=draw(st.integers(0, 10**7)),
        seed=draw(st.integers(0, 2**62)),
        workers=draw(st.integers(1, 64)),
        out=draw(names),
        format=draw(st.sampled_from(["csv", "json"])),
        tolerances=draw(st.dictionaries(names, pos, max_size=3)),
        bp_table=draw(st.dictionaries(st.sampled_from(["2", "4", "6"]), pos, max_size=2)),
    )


@given(run_configs())
def test_config_round_trip(cfg):
    assert parse(serialize(cfg)) == cfg
    assert config_hash(parse(serialize(cfg))) == config_hash(cfg)


def test_empty_config_is_default(tmp_path):
    assert parse("") == RunConfig()
    path = tmp_path / "c.toml"
    save(RunConfig(seed=3), path)
    assert load(path).seed == 3
    assert load(None) == RunConfig()


@pytest.mark.parametrize("text", [
    "bogus = 1",
    "[kernel]\nshape = 2",
    "kernel = 3",
    "schema_version = 7",
    "format = 'xml'",
    "[kernel]\nfamily = 'riesz'\nalpha = 2.0\ndim = 1",
    "[levy]\ndensity = 'exp(-abs(z))'",
    "not toml ===",
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse(text).validate()


def test_density_block_drops_default_atoms():
    cfg = parse("[levy]\ndensity = 'exp(-abs(z))'\nsupport = [0.01, 5.0]")
    assert cfg.levy.atoms is None
    assert cfg.validate().levy.build().support == (0.01, 5.0)


def test_worker_resolution(monkeypatch):
    cfg = RunConfig(workers=3)
    monkeypatch.delenv("LEVY_SPDE_WORKERS", raising=False)
    assert resolve_workers(None, cfg) == 3
    monkeypatch.setenv("LEVY_SPDE_WORKERS", "5")
    assert resolve_workers(None, cfg) == 5
    assert resolve_workers(2, cfg) == 2
    monkeypatch.setenv("LEVY_SPDE_WORKERS", "many")
    with pytest.raises(ConfigError):
        resolve_workers(None, cfg)


def test_report_schema_and_exit_codes():
    assert Report().exit_code == 0
    assert Report().to_csv() == "check_id,status,estimate,reference,se_or_tol,inputs,detail\n"
    r = Report([Check("a", "pass", 1.5, 1, 0.1, {"n": 3}), Check("b", "inconclusive"), Check("c", "unsupported")])
    assert r.exit_code == 0
    r.add(Check("d", "fail", float("inf")))
    assert r.exit_code == 1
    lines = r.to_csv().splitlines()
    assert lines[1] == 'a,pass,1.5,1,0.1,"{""n"": 3}",'
    assert lines[4].startswith("d,fail,inf,")
    body = json.loads(r.to_json())
    assert set(body) == {"checks", "provenance"}
    assert set(body["checks"][0]) == {"check_id", "status", "estimate", "reference", "se_or_tol", "inputs", "detail"}
    with pytest.raises(ValueError):
        Check("x", "maybe")


def test_write_table_formats(tmp_path):
    rows = [{"t": 1.0, "n": 2, "ok": True, "note": "x"}]
    text = write_table(rows, ["t", "n", "ok", "note"], tmp_path / "a.csv")
    assert text == "t,n,ok,note\n1.0,2,True,x\n"
    data = json.loads(write_table(rows, ["t", "n"], None, "json"))
    assert data == [{"t": 1.0, "n": 2}]


def test_empty_check_list():
    report = checks.run_checks(RunConfig(), [])
    assert report.checks == [] and report.exit_code == 0


def test_check_selection():
    assert [c[0] for c in checks.select(["c05", "c09_admissibility"])] == ["c05_h_transform", "c09_admissibility"]
    with pytest.raises(KeyError):
        checks.select(["c99"])


def test_golden_report(tmp_path):
    out = tmp_path / "acc.csv"
    assert cli.run(["acceptance", "--only", "c04,c09", "--out", str(out)]) == 0
    assert out.read_text() == (GOLDEN / "acceptance_c04_c09.csv").read_text()


def test_zero_tolerance_fails_with_exit_one(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('[tolerances]\nc05_h_transform = 0.0\n')
    out = tmp_path / "r.json"
    assert cli.run(["acceptance", "--config", str(cfg), "--only", "c05", "--out", str(out)]) == 1
    body = json.loads(out.read_text())
    assert body["checks"][0]["status"] == "fail"
    assert body["provenance"]["seed"] == RunConfig().seed


def test_reduced_trials_still_coherent(tmp_path):
    out = tmp_path / "r.csv"
    code = cli.run(["acceptance", "--trials", "1000", "--only", "c01,c06", "--out", str(out)])
    statuses = [line.split(",")[1] for line in out.read_text().splitlines()[1:]]
    assert len(statuses) == 2 and set(statuses) <= {"pass", "fail"}
    assert code == (1 if "fail" in statuses else 0)


def test_riesz_simulation_is_unsupported(tmp_path):
    out = tmp_path / "sim.json"
    code = cli.run(["simulate", "--op", "heat", "--kernel", "riesz", "--alpha", "0.5", "--dim", "1",
                    "--t", "1", "--trials", "100", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["checks"][0]["status"] == "unsupported"


def test_config_error_exit_two(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("unknown_key = 1\n")
    assert cli.run(["dalang", "--config", str(cfg), "--out", str(tmp_path / "d.csv")]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_same_seed_byte_identical(tmp_path):
    args = ["simulate", "--op", "heat", "--kernel", "heat", "--alpha", "1", "--dim", "1", "--t", "0.5,1",
            "--x", "0", "--p", "2", "--trials", "5000", "--seed", "7"]
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert cli.run(args + ["--out", str(a)]) == 0
    assert cli.run(args + ["--out", str(b)]) == 0
    assert cli.run(args + ["--workers", "4", "--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_dalang_sweep_cli(tmp_path):
    out = tmp_path / "d.csv"
    assert cli.run(["dalang", "--kernel", "riesz", "--dim", "3", "--alphas", "0.5,1.5,2.5", "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()]
    assert rows[0][:4] == ["family", "alpha", "dim", "dalang_check"]
    assert [r[3] for r in rows[1:]] == ["False", "True", "True"]
    assert all(r[2] == "3" for r in rows[1:])


def test_jp_cli_reports_fitted_constant(tmp_path):
    out = tmp_path / "jp.csv"
    assert cli.run(["jp", "--op", "heat", "--kernel", "riesz", "--alpha", "0.5", "--dim", "1",
                    "--t-grid", "0.1:4:5:log", "--p", "2", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "t,p,jp_norm,jp_bound,ratio,note"
    ratios = [float(r.split(",")[4]) for r in rows[1:]]
    assert max(ratios) / min(ratios) == pytest.approx(1.0, rel=1e-9)


def test_chaos_cli(tmp_path):
    out = tmp_path / "chaos.csv"
    code = cli.run(["chaos", "--op", "wave", "--kernel", "heat", "--alpha", "1", "--dim", "2", "--t", "1",
                    "--m2", "1", "--orders", "1,2,3", "--tail-tol", "1e-8", "--samples", "20000", "--out", str(out)])
    assert code == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "n,jn_mc,jn_se,jn_bound,term_bound,cumulative,certificate"
    assert all("certified:factorial" in r for r in rows[1:])


def test_noise_check_json_schema(tmp_path):
    out = tmp_path / "report.json"
    assert cli.run(["noise-check", "--trials", "5000", "--seed", "42", "--out", str(out)]) in (0, 1)
    rows = json.loads(out.read_text())
    assert all(set(r) == {"test", "estimate", "exact", "se", "pass"} for r in rows)
    assert len(rows) == 25
