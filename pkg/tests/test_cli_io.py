import json

import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from lle_pinning import cli
from lle_pinning.config import ConfigError, RunConfig, echo, parse_config
from lle_pinning.evolution import DecayFit
from lle_pinning.field import Field, TorusGrid
from lle_pinning.io import (
    BRANCH_COLUMNS,
    ZEROS_COLUMNS,
    read_csv,
    read_state,
    sha256,
    state_from_dict,
    state_to_dict,
    write_csv,
    write_json,
    write_state,
)
from lle_pinning.stationary import l2_norm, residual

FAST = {"field": {"n": 256}, "output": {"plots": True}}


def run_cli(tmp_path, name, cfg, *args):
    path = tmp_path / f"{name}.yaml"
    path.write_text(yaml.safe_dump(cfg))
    out = tmp_path / name
    code = cli.main([*args, "--config", str(path), "--output", str(out), "--quiet"])
    return code, out


# -- configuration ---------------------------------------------------------------------


def test_defaults_and_echo_round_trip():
    cfg = parse_config("")
    assert cfg == RunConfig()
    assert parse_config(echo(cfg)) == cfg
    again = parse_config("params: {zeta: 3.5}\nfield: {n: 64}\n")
    assert parse_config(echo(again)) == again
    assert yaml.safe_load(echo(again))["params"]["zeta"] == 3.5


@pytest.mark.parametrize("text,prefix", [
    ("params: {d: 0.0}", "params.d"),
    ("params: {mu: -1}", "params.mu"),
    ("params: {foo: 1}", "params.foo: unknown key"),
    ("field: {n: abc}", "field.n: expected int"),
    ("field: {n: 255}", "field.n"),
    ("params: {zeta: true}", "params.zeta: expected float"),
    ("params: {potential: {cosine: [a]}}", "params.potential.cosine"),
    ("params: {potential: {period: 5.0}}", "params.potential"),
    ("command: draw", "command"),
    ("continuation: {ds: 1.0}", "continuation.ds"),
    ("evolution: {perturbation: noise}", "evolution.perturbation"),
    ("reductions: {dual_pump: {f1: 3.0}}", "reductions.dual_pump.f1"),
    ("reductions: {asymptotics: {mus: [0.1]}}", "reductions.asymptotics.mus"),
    ("[1, 2", "<document>"),
])
def test_invalid_configs_name_the_key(text, prefix):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert str(exc.value).startswith(prefix)


def test_validation_exit_code(tmp_path, capsys):
    code, out = run_cli(tmp_path, "bad", {"params": {"d": 0.0}}, "solve")
    assert code == cli.EXIT_VALIDATION
    assert "params.d" in capsys.readouterr().err
    assert not out.exists()


# -- files -----------------------------------------------------------------------------


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([16, 32, 64]), st.floats(0.5, 50.0))
def test_state_round_trip_is_exact(seed, n, length):
    rng = np.random.default_rng(seed)
    g = TorusGrid(n, length)
    u = Field(g, coeffs=rng.standard_normal(n) + 1j * rng.standard_normal(n))
    back = state_from_dict(json.loads(json.dumps(state_to_dict(u))))
    assert np.array_equal(back.coeffs, u.coeffs)
    assert back.grid.same_as(g)


def test_state_file_layout(tmp_path):
    g = TorusGrid(16)
    u = Field.from_function(g, lambda x: np.exp(1j * x))
    write_state(tmp_path / "s.json", u)
    data = json.loads((tmp_path / "s.json").read_text())
    assert data["ordering"] == "fft" and data["grid"]["n"] == 16
    assert data["coefficients"][2:4] == pytest.approx([1.0, 0.0])
    assert np.array_equal(read_state(tmp_path / "s.json").coeffs, u.coeffs)
    with pytest.raises(ValueError):
        state_from_dict({**data, "coefficients": data["coefficients"][:-2]})


def test_csv_and_json_encoding(tmp_path):
    write_csv(tmp_path / "a.csv", ZEROS_COLUMNS, [(0.1, -2.5, "stable_for_negative_eps")])
    header, rows = read_csv(tmp_path / "a.csv")
    assert tuple(header) == ZEROS_COLUMNS and rows == [["0.1", "-2.5", "stable_for_negative_eps"]]
    write_csv(tmp_path / "b.csv", BRANCH_COLUMNS, [(0.0, 1.0, -1e-3, 0.0, np.bool_(True), 0.5)])
    assert read_csv(tmp_path / "b.csv")[1][0][4] == "true"
    with pytest.raises(ValueError):
        write_csv(tmp_path / "c.csv", ZEROS_COLUMNS, [(1.0,)])
    write_json(tmp_path / "d.json", {"z": 1 + 2j, "bad": float("nan"), "arr": np.arange(2)})
    assert json.loads((tmp_path / "d.json").read_text()) == {"arr": [0, 1], "bad": None,
                                                             "z": {"im": 2.0, "re": 1.0}}


# -- commands --------------------------------------------------------------------------


def test_veff_run_and_manifest(tmp_path):
    code, out = run_cli(tmp_path, "veff", FAST, "veff")
    assert code == cli.EXIT_OK
    names = {p.name for p in out.iterdir()}
    assert {"veff.csv", "zeros.csv", "veff.svg", "summary.json", "config.yaml", "MANIFEST.json"} <= names
    _, rows = read_csv(out / "zeros.csv")
    slopes = [float(r[1]) for r in rows]
    assert len(rows) == 2 and slopes[0] * slopes[1] < 0
    manifest = json.loads((out / "MANIFEST.json").read_text())
    assert manifest["complete"] and manifest["status"] == "ok"
    for entry in manifest["files"]:
        assert sha256(out / entry["file"]) == entry["sha256"]
    assert (out / "veff.svg").read_text().lstrip().startswith("<?xml")


def test_runs_are_byte_identical(tmp_path):
    _, out = run_cli(tmp_path, "again", FAST, "veff")
    first = json.loads((out / "MANIFEST.json").read_text())
    _, out = run_cli(tmp_path, "again", FAST, "veff")
    assert json.loads((out / "MANIFEST.json").read_text()) == first


def test_solve_and_spectrum_at_nonzero_eps(tmp_path):
    cfg = {**FAST, "params": {"eps": 0.05}}
    code, out = run_cli(tmp_path, "solve", cfg, "solve")
    assert code == cli.EXIT_OK
    u = read_state(out / "state.json")
    p = parse_config(yaml.safe_dump(cfg)).model_params()
    assert l2_norm(residual(u, p)) < 1e-9
    summary = json.loads((out / "summary.json").read_text())
    assert summary["localized_extrema"] == 1 and summary["extremum_kind"] == "max"
    code, out = run_cli(tmp_path, "spec", cfg, "spectrum")
    summary = json.loads((out / "summary.json").read_text())
    assert code == cli.EXIT_OK and summary["classification"] == "stable"
    assert summary["trace"] == pytest.approx(-512.0, rel=1e-9)


def test_continue_writes_both_branches(tmp_path):
    cfg = {**FAST, "pinning": {"zero": "all"}, "continuation": {"half_width": 0.02}}
    code, out = run_cli(tmp_path, "cont", cfg, "continue")
    assert code == cli.EXIT_OK
    for label in ("negative", "positive"):
        header, rows = read_csv(out / f"branch_{label}.csv")
        assert tuple(header) == BRANCH_COLUMNS and len(rows) >= 3
    assert (out / "branches.svg").exists()


def test_solve_failure_exit_code(tmp_path):
    code, out = run_cli(tmp_path, "fail", {**FAST, "stationary": {"maxiter": 1}}, "solve")
    assert code == cli.EXIT_SOLVE
    manifest = json.loads((out / "MANIFEST.json").read_text())
    assert manifest == {**manifest, "complete": False, "status": "solve_failure"}
    assert json.loads((out / "summary.json").read_text())["status"] == "solve_failure"


def test_blow_up_exit_code(tmp_path, monkeypatch):
    class Point:
        critical_eig = complex(-0.1, 0.0)

    def fake_simulate(analysis, zero, cfg, eps):
        t = np.array([0.0, 1.0])
        return Point(), DecayFit(t, t, t, np.nan, np.nan, 0.0, (np.nan, np.nan), "inconclusive",
                                 "non-finite field at t = 1", blow_up_t=1.0)

    monkeypatch.setattr(cli, "simulate", fake_simulate)
    code, out = run_cli(tmp_path, "blow", FAST, "simulate")
    assert code == cli.EXIT_BLOWUP
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "blow_up" and summary["eps"] == 0.05
    assert not json.loads((out / "MANIFEST.json").read_text())["complete"]


def test_reduce_writes_states(tmp_path):
    cfg = {**FAST, "reductions": {"halve_f1": False}}
    code, out = run_cli(tmp_path, "red", cfg, "reduce")
    assert code == cli.EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["full"]["reduced_residual"] < 1e-9
    assert summary["full"]["potential"]["cosine"] == [pytest.approx(-0.01)]
    mapped = read_state(out / "mapped_state.json")
    assert np.allclose(np.abs(mapped.values), np.abs(read_state(out / "reduced_state.json").values))


def test_simulate_unstable_side_reports_growth(tmp_path):
    cfg = {**FAST, "evolution": {"eps": -0.05, "t_end": 20.0}}
    code, out = run_cli(tmp_path, "sim", cfg, "simulate")
    assert code == cli.EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["verdict"] == "grows"
    assert summary["rate"] == pytest.approx(summary["re_lambda0"], rel=0.2)
    header, rows = read_csv(out / "trajectory.csv")
    assert header == ["t", "dev_h1", "dev_l2"] and len(rows) > 10
