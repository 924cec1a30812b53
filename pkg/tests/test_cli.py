"""Command-line front end: verbs, reports, exit codes, determinism."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from entprop.cli import run
from entprop.core import (
    PureState,
    Sector,
    SeparableEnsemble,
    basis_vector,
    pure_state,
    save_ensemble,
    save_state,
)
from entprop.distinguishable import singlet_state
from entprop.permsym import slater_state


@pytest.fixture()
def files(tmp_path):
    e5 = np.eye(5, dtype=complex)
    paths = {
        "singlet": tmp_path / "singlet.json",
        "pi": tmp_path / "pi.json",
        "phi": tmp_path / "phi.json",
        "fpair": tmp_path / "fpair.json",
        "ens1": tmp_path / "ens1.json",
        "ens2": tmp_path / "ens2.json",
        "out": tmp_path / "out.json",
    }
    save_state(singlet_state(), paths["singlet"])
    save_state(slater_state([e5[:, 0], e5[:, 1]]), paths["pi"])
    save_state(pure_state(e5[:, 2], Sector.FERMIONIC), paths["phi"])
    amps = np.zeros((2, 2), dtype=complex)
    amps[0, 1], amps[1, 0] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    save_state(PureState((2, 2), amps, Sector.FERMIONIC), paths["fpair"])
    up, dn = basis_vector(0, 2), basis_vector(1, 2)
    save_ensemble(SeparableEnsemble(((0.5, (up, dn)), (0.5, (dn, up)))), paths["ens1"])
    save_ensemble(
        SeparableEnsemble(((0.5, (up, up)), (0.5, (dn, dn)))), paths["ens2"]
    )
    return {k: str(v) for k, v in paths.items()}


def test_classify_report_line(files, capsys):
    assert run(["classify", files["singlet"], "--cut", "1|2"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("kind=totally_entangled maximal=true range_dim=2")


def test_schmidt_report(files, capsys):
    assert run(["schmidt", files["singlet"], "--cut", "1|2"]) == 0
    out = capsys.readouterr().out
    assert "rank=2" in out and "0.707106781187" in out


def test_pair_report(files, capsys):
    assert run(["pair", files["fpair"]]) == 0
    out = capsys.readouterr().out
    assert "non_entangled=true" in out and "form=fermion_slater" in out


def test_assemble_round_trip(files, capsys):
    assert run(["assemble", files["pi"], files["phi"], "--out", files["out"]]) == 0
    capsys.readouterr()
    assert run(["subset", files["out"], "--pi", files["pi"]]) == 0
    out = capsys.readouterr().out
    assert "value=1 holds=true recovered=true" in out


def test_local_fact(files, tmp_path, capsys):
    e4 = np.eye(4, dtype=complex)
    pi1 = tmp_path / "pi1.json"
    phi1 = tmp_path / "phi1.json"
    save_state(pure_state(e4[:, 0], Sector.FERMIONIC), pi1)
    save_state(pure_state(e4[:, 2], Sector.FERMIONIC), phi1)
    assert run(["local-fact", str(pi1), str(phi1), "--p-idx", "0", "--q-idx", "2"]) == 0
    out = capsys.readouterr().out
    assert "factorizes=true" in out


def test_chsh_and_equiv(files, capsys):
    assert run(["chsh", files["ens1"]]) == 0
    out = capsys.readouterr().out
    assert "within_bound=true" in out
    assert run(["equiv", files["ens1"], files["ens2"]]) == 0
    out = capsys.readouterr().out
    assert "equivalent=false" in out


def test_demo_reports(capsys):
    assert run(["demo", "boson-bins", "--bins", "10", "--d1", "2", "--d2", "3"]) == 0
    out = capsys.readouterr().out
    assert "conditional=0.285714285714 unconditional=0.32" in out
    assert run(["demo", "ghz", "--measure", "z"]) == 0
    out = capsys.readouterr().out
    assert "outcome=+1 p=0.5 remainder=product" in out
    assert run(["demo", "outcome-dep"]) == 0
    out = capsys.readouterr().out
    assert "schmidt_rank=1" in out and "schmidt_rank=2" in out


def test_json_mode(files, capsys):
    assert run(["--json", "pair", files["fpair"]]) == 0
    out = capsys.readouterr().out.strip()
    record = json.loads(out)
    assert record["non_entangled"] is True
    assert record["form"] == "fermion_slater"


def test_report_determinism(files, capsys):
    run(["classify", files["singlet"], "--cut", "1|2"])
    first = capsys.readouterr().out
    run(["classify", files["singlet"], "--cut", "1|2"])
    second = capsys.readouterr().out
    assert first == second
    run(["demo", "approx-orth", "--eps", "0.1,0.01"])
    first = capsys.readouterr().out
    run(["demo", "approx-orth", "--eps", "0.1,0.01"])
    second = capsys.readouterr().out
    assert first == second


def test_exit_code_validation_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"dims": [2], "amps": []}))
    assert run(["schmidt", str(bad), "--cut", "1|2"]) == 2
    err = capsys.readouterr().err
    assert "sector" in err


def test_exit_code_tolerance_error(tmp_path, capsys):
    off = tmp_path / "off.json"
    off.write_text(
        json.dumps(
            {
                "sector": "distinguishable",
                "dims": [2, 2],
                "amps": [{"idx": [0, 1], "re": 0.9, "im": 0.0}],
            }
        )
    )
    assert run(["schmidt", str(off), "--cut", "1|2"]) == 3
    err = capsys.readouterr().err
    assert "residual" in err
    # the auto-normalization flag rescues the same file
    assert run(["--normalize", "schmidt", str(off), "--cut", "1|2"]) == 0


def test_exit_code_missing_file(capsys):
    assert run(["schmidt", "/nonexistent/state.json", "--cut", "1|2"]) == 2


def test_tol_flag_threads_through(files, capsys):
    assert run(["--tol", "1e-6", "classify", files["singlet"], "--cut", "1|2"]) == 0
