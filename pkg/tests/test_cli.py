"""End-to-end command-line checks through click's test runner."""

from __future__ import annotations

import json

import numpy as np
import pytest
from click.testing import CliRunner

from sysbath.cli import main
from sysbath.fcidump import IntegralSet, emit_fcidump
from sysbath.pauli import PauliTermSum

from conftest import random_integral_set, stable_context


@pytest.fixture(scope="module")
def dumps(tmp_path_factory):
    d = tmp_path_factory.mktemp("dumps")
    rng = np.random.default_rng(424242)
    pair = d / "pair.fcidump"
    pair.write_text(emit_fcidump(random_integral_set(rng, 2)))
    _, s6 = stable_context(rng, 6)
    mol = d / "mol.fcidump"
    mol.write_text(emit_fcidump(s6))
    # instance with two negative-frequency singlet modes
    t = np.diag([0.0, 0.3, 0.6, 1.0])
    h = np.zeros((4,) * 4)
    h[0, 0, 0, 0] = 1.6
    bad = d / "unstable.fcidump"
    bad.write_text(emit_fcidump(
        IntegralSet(norb=4, nelec=4, ms2=0, one_body=t, two_body=h)))
    return {"pair": str(pair), "mol": str(mol), "unstable": str(bad)}


def _run(args, **kw):
    return CliRunner().invoke(main, args, catch_exceptions=False, **kw)


def _json_out(res):
    # error paths append a plain-text note on stderr, which this click
    # version mixes into .output; clip to the JSON document
    text = res.output
    return json.loads(text[: text.rindex("}") + 1])


def test_inspect_isolated_pair(dumps):
    res = _run(["inspect", dumps["pair"]])
    assert res.exit_code == 0
    assert "environment absent" in res.output
    assert "norb: 2   nelec: 2" in res.output
    assert "N_RPA: 0" in res.output


def test_inspect_molecule(dumps):
    res = _run(["inspect", dumps["mol"]])
    assert res.exit_code == 0
    assert "five lowest normal frequencies" in res.output
    assert "Markovian diagnostic" in res.output
    assert "ground-state class:" in res.output


def test_solve_static_json_schema(dumps):
    res = _run(["solve", "static", dumps["mol"]])
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["schema_version"] == 1
    assert data["command"] == "solve-static"
    assert data["model"] in ("sg", "tr")
    assert set(data["gaps_ev"]) == {"triplet_gap", "singlet_gap"}
    assert set(data["screened_params_hartree"]) == {
        "u1_hartree", "u2_hartree", "j12_hartree", "k12_hartree",
        "tau1_hartree", "tau2_hartree"}
    assert data["n_rpa"] == len(data["excluded_modes"])
    assert data["gaps_ev"]["triplet_gap"] > 0


def test_solve_static_hartree_unit(dumps):
    ev = json.loads(_run(["solve", "static", dumps["mol"]]).output)
    ha = json.loads(_run(["solve", "static", dumps["mol"],
                          "--unit", "hartree"]).output)
    from sysbath.constants import HARTREE_TO_EV
    assert ev["gaps_ev"]["triplet_gap"] == pytest.approx(
        ha["gaps_hartree"]["triplet_gap"] * HARTREE_TO_EV, rel=1e-12)


def test_solve_mixed_nq0_matches_static(dumps):
    st = json.loads(_run(["solve", "static", dumps["mol"]]).output)
    mx = json.loads(_run(["solve", "mixed", dumps["mol"], "--nq", "0"]).output)
    assert mx["command"] == "solve-mixed"
    assert mx["n_q"] == 0
    assert mx["subspace_dim"] == 4
    assert mx["state_labels"] == ["static"] * 4
    assert mx["gaps_ev"]["triplet_gap"] == st["gaps_ev"]["triplet_gap"]
    assert mx["gaps_ev"]["singlet_gap"] == st["gaps_ev"]["singlet_gap"]


def test_solve_mixed_explicit_modes(dumps):
    res = _run(["solve", "mixed", dumps["mol"], "--nq", "2",
                "--max-exc", "3"])
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["n_q"] == 2
    assert len(data["explicit_modes"]) == 2
    levs = [m["leverage_hartree"] for m in data["explicit_modes"]]
    assert levs == sorted(levs, reverse=True)
    assert data["convergence"]["converged"] is True
    assert set(data["state_labels"]) <= {"singlet", "triplet"}
    assert len(data["energies_ev"]) == len(data["state_labels"])


def test_malformed_body_reports_line(dumps, tmp_path):
    bad = tmp_path / "broken.fcidump"
    bad.write_text(" &FCI NORB=2,NELEC=2,MS2=0, &END\n"
                   " 0.5 1 1 0 1\n")
    res = _run(["solve", "static", str(bad)])
    assert res.exit_code == 2
    data = _json_out(res)
    assert data["error"]["type"] == "FcidumpError"
    assert "line 2" in data["error"]["message"]


def test_missing_file_is_input_error():
    res = _run(["inspect", "/nonexistent/thing.fcidump"])
    assert res.exit_code == 2
    assert _json_out(res)["error"]["type"] in ("FileNotFoundError", "OSError")


def test_unknown_model_rejected(dumps):
    res = _run(["solve", "static", dumps["mol"], "--model", "quintet"])
    assert res.exit_code == 2


def test_negative_nq_rejected(dumps):
    res = _run(["solve", "mixed", dumps["mol"], "--nq", "-3"])
    assert res.exit_code == 2
    assert "nonnegative" in _json_out(res)["error"]["message"]


def test_unstable_modes_exit_code(dumps):
    res = _run(["inspect", dumps["unstable"]])
    assert res.exit_code == 3
    data = _json_out(res)
    assert data["error"]["type"] == "UnstableModeError"
    ok = _run(["inspect", dumps["unstable"], "--drop-unstable-modes"])
    assert ok.exit_code == 0


def test_sweep_csv_first_row_is_static(dumps):
    res = _run(["sweep", dumps["mol"], "--nq-list", "0,1"])
    assert res.exit_code == 0
    lines = res.output.strip().splitlines()
    assert lines[0] == ("n_q,k,triplet_gap_ev,singlet_gap_ev,"
                        "n_matvecs,wall_time_s,converged,error")
    assert len(lines) == 3
    row0 = lines[1].split(",")
    assert row0[0] == "0"
    st = json.loads(_run(["solve", "static", dumps["mol"]]).output)
    assert float(row0[2]) == pytest.approx(st["gaps_ev"]["triplet_gap"],
                                           rel=1e-9)
    assert float(row0[3]) == pytest.approx(st["gaps_ev"]["singlet_gap"],
                                           rel=1e-9)
    assert row0[6] == "true"


def test_sweep_json_format(dumps):
    res = _run(["sweep", dumps["mol"], "--nq-list", "0,2",
                "--k-schedule", "3", "--format", "json"])
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["command"] == "sweep"
    assert [r["n_q"] for r in data["rows"]] == [0, 2]
    assert data["rows"][1]["k"] == 3


def test_spectrum_grid_and_header(dumps):
    res = _run(["spectrum", dumps["mol"], "--points", "11"])
    assert res.exit_code == 0
    lines = res.output.strip().splitlines()
    assert lines[0] == "energy_ev,spectral_density_ev"
    assert len(lines) == 12
    assert float(lines[1].split(",")[0]) == 0.0
    assert all(float(line.split(",")[1]) >= 0.0 for line in lines[1:])


def test_spectrum_without_modes_is_flat_zero(dumps):
    res = _run(["spectrum", dumps["pair"], "--points", "5"])
    assert res.exit_code == 0
    rows = [line.split(",") for line in res.output.strip().splitlines()[1:]]
    assert all(float(v) == 0.0 for _, v in rows)


def test_export_pauli_compact_and_reloadable(dumps):
    res = _run(["export-pauli", dumps["mol"], "--nq", "0"])
    assert res.exit_code == 0
    data = json.loads(res.output)
    assert data["command"] == "export-pauli"
    assert data["n_qubits"] == 2
    assert data["explicit_modes"] == []
    assert len(data["terms"]) <= 16
    back = PauliTermSum.from_json_dict(data)
    assert back.n_terms() == len(data["terms"])
    assert back.constant_offset == data["constant_offset_hartree"]


def test_export_pauli_with_explicit_modes(dumps):
    res = _run(["export-pauli", dumps["mol"], "--nq", "3"])
    data = json.loads(res.output)
    assert data["n_qubits"] == 5
    assert len(data["explicit_modes"]) == 3
    assert all(len(t["string"]) == 5 for t in data["terms"])


def test_output_file_option(dumps, tmp_path):
    out = tmp_path / "static.json"
    res = _run(["solve", "static", dumps["mol"], "-o", str(out)])
    assert res.exit_code == 0
    assert res.output == ""
    data = json.loads(out.read_text())
    assert data["command"] == "solve-static"


def test_stdin_input(dumps):
    text = open(dumps["pair"]).read()
    res = _run(["inspect", "-"], input=text)
    assert res.exit_code == 0
    assert "environment absent" in res.output


def test_verify_passes_on_clean_instance(dumps):
    res = _run(["verify", dumps["mol"]])
    assert res.exit_code == 0
    assert "[FAIL]" not in res.output
    assert res.output.count("[OK]") >= 5
    assert "verification passed" in res.output


def test_verify_isolated_pair(dumps):
    # no environment: only the round-trip, consistency, and FCI rows run
    res = _run(["verify", dumps["pair"]])
    assert res.exit_code == 0
    assert "[FAIL]" not in res.output
