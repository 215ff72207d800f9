"""Command-line interface: schemas, reproducibility, exit codes."""

import json

import numpy as np
import pytest

from qndtradeoff import cli, verify
from qndtradeoff.tradeoff import qubit_minerror_point


def _run(capsys, argv):
    rc = cli.main(argv)
    return rc, capsys.readouterr().out


def _rows(text):
    lines = text.strip().split("\n")
    header = lines[0].split(",")
    return header, [
        dict(zip(header, (float(x) for x in line.split(",")))) for line in lines[1:]
    ]


def test_sweep_alpha_schema_and_endpoints(capsys):
    rc, out = _run(
        capsys,
        ["sweep-alpha", "--d", "2", "--alpha-grid", "0:1:3", "--samples", "1000", "--seed", "11"],
    )
    assert rc == 0
    header, rows = _rows(out)
    assert header == list(cli.ALPHA_COLUMNS)
    assert len(rows) == 3
    assert rows[0]["F_analytic"] == 1.0
    assert rows[0]["G_analytic"] == 0.5
    assert rows[-1]["F_analytic"] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert rows[-1]["G_analytic"] == pytest.approx(2.0 / 3.0, abs=1e-12)
    for row in rows:
        assert abs(row["saturation_gap"]) <= 1e-12
        assert abs(row["F_mc"] - row["F_analytic"]) <= 5.0 * max(row["se_F"], 1e-6)


def test_sweep_alpha_d3_weak_coupling_row(capsys):
    rc, out = _run(
        capsys,
        ["sweep-alpha", "--d", "3", "--alpha-grid", "0:0:1", "--samples", "1000", "--seed", "12"],
    )
    assert rc == 0
    _, rows = _rows(out)
    assert rows[0]["F_analytic"] == 1.0
    assert rows[0]["G_analytic"] == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_sweep_alpha_csv_formatting(capsys):
    rc, out = _run(
        capsys,
        ["sweep-alpha", "--alpha-grid", "0.5:0.5:1", "--samples", "1000", "--seed", "13"],
    )
    assert rc == 0
    beta_cell = out.strip().split("\n")[1].split(",")[1]
    assert beta_cell == f"{0.5818609561002116:.12g}"


def test_sweep_alpha_reproducible(capsys):
    argv = ["sweep-alpha", "--alpha-grid", "0:1:3", "--samples", "1000", "--seed", "14"]
    _, first = _run(capsys, argv)
    _, second = _run(capsys, argv)
    assert first == second


def test_seed_env_var_with_flag_precedence(capsys, monkeypatch):
    argv = ["sweep-alpha", "--alpha-grid", "0:0:1", "--samples", "1000"]
    monkeypatch.setenv(cli.SEED_ENV, "15")
    _, via_env = _run(capsys, argv)
    monkeypatch.delenv(cli.SEED_ENV)
    _, via_flag = _run(capsys, argv + ["--seed", "15"])
    assert via_env == via_flag
    monkeypatch.setenv(cli.SEED_ENV, "999")
    _, flag_wins = _run(capsys, argv + ["--seed", "15"])
    assert flag_wins == via_flag


def test_sweep_overlap_schema_and_rows(capsys):
    rc, out = _run(
        capsys,
        ["sweep-overlap", "--overlap-grid", "0:1:3", "--samples", "1000", "--seed", "16"],
    )
    assert rc == 0
    header, rows = _rows(out)
    assert header == list(cli.OVERLAP_COLUMNS)
    zero, half, one = rows
    assert zero["F_minerror"] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert zero["G_minerror"] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert zero["P_e"] == pytest.approx(0.0, abs=1e-12)
    assert zero["P_I"] == pytest.approx(0.0, abs=1e-12)
    expect = qubit_minerror_point(np.sqrt(0.5))
    assert half["F_minerror"] == pytest.approx(expect.F, abs=1e-12)
    assert half["G_minerror"] == pytest.approx(expect.G, abs=1e-12)
    assert half["P_e"] == pytest.approx(0.1464466094067262, abs=1e-10)
    assert half["P_I"] == pytest.approx(np.sqrt(0.5), abs=1e-12)
    assert one["F_minerror"] == 1.0
    assert one["G_minerror"] == 0.5
    assert one["P_I"] == 1.0
    assert np.isnan(one["F_C_mc"])
    assert np.isnan(one["G_C_mc"])
    for row in rows:
        assert abs(row["saturation_gap"]) <= 1e-12


def test_sweep_overlap_json_uses_null_for_nan(capsys):
    rc, out = _run(
        capsys,
        [
            "sweep-overlap",
            "--overlap-grid",
            "1:1:1",
            "--samples",
            "1000",
            "--seed",
            "17",
            "--format",
            "json",
        ],
    )
    assert rc == 0
    body = json.loads(out)
    assert body["command"] == "sweep-overlap"
    assert body["rows"][0]["F_C_mc"] is None
    assert body["rows"][0]["P_I"] == 1.0


def test_bound_table(capsys):
    rc, out = _run(capsys, ["bound", "--d", "2"])
    assert rc == 0
    header, rows = _rows(out)
    assert header == list(cli.BOUND_COLUMNS)
    assert rows[0]["G"] == 0.5
    assert rows[0]["F_bound"] == pytest.approx(1.0, abs=1e-12)
    assert rows[-1]["G"] == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert rows[-1]["F_bound"] == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_bound_rejects_out_of_domain_grid(capsys):
    rc = cli.main(["bound", "--d", "2", "--g-grid", "0:1:5"])
    capsys.readouterr()
    assert rc == 2


def test_simulate_ideal_json(capsys):
    rc, out = _run(
        capsys,
        ["simulate", "--d", "2", "--alpha", "0.5", "--samples", "1000", "--seed", "18", "--format", "json"],
    )
    assert rc == 0
    body = json.loads(out)
    assert body["mode"] == "ideal"
    assert body["F_analytic"] == 0.9166666666666666
    assert abs(body["F_mc"] - body["F_analytic"]) <= 5.0 * body["se_F"]


def test_simulate_unambiguous_json(capsys):
    rc, out = _run(
        capsys,
        ["simulate", "--overlap", "0.5", "--strategy", "unambiguous", "--samples", "1000", "--seed", "19", "--format", "json"],
    )
    assert rc == 0
    body = json.loads(out)
    assert body["strategy"] == "unambiguous"
    assert body["misidentified"] == 0
    assert abs(body["conclusive_fraction"] - 0.2928932188134524) <= 4.0 * body["se_fraction"]


def test_simulate_custom_povm_file(capsys, tmp_path):
    from qndtradeoff.channel import qubit_pointer_spec
    from qndtradeoff.discrimination import helstrom_povm
    from qndtradeoff.states import PureState

    spec = qubit_pointer_spec(np.sqrt(0.5))
    pov = helstrom_povm(
        PureState(2, spec.pointer_states[:, 0]),
        PureState(2, spec.pointer_states[:, 1]),
    )
    payload = {
        "elements": [
            [[[x.real, x.imag] for x in row] for row in np.asarray(e)]
            for e in pov.elements
        ],
        "labels": list(pov.labels),
    }
    povm_file = tmp_path / "povm.json"
    povm_file.write_text(json.dumps(payload))
    common = ["--overlap", "0.5", "--samples", "1000", "--seed", "20", "--format", "json"]
    rc, custom = _run(
        capsys,
        ["simulate", *common, "--strategy", "custom", "--povm-file", str(povm_file)],
    )
    assert rc == 0
    rc, minerror = _run(capsys, ["simulate", *common, "--strategy", "minerror"])
    assert rc == 0
    a, b = json.loads(custom), json.loads(minerror)
    assert abs(a["F_mc"] - b["F_mc"]) <= 1e-12
    assert abs(a["G_mc"] - b["G_mc"]) <= 1e-12


def test_out_flag_writes_file(capsys, tmp_path):
    path = tmp_path / "table.csv"
    rc, out = _run(
        capsys,
        ["sweep-alpha", "--alpha-grid", "0:0:1", "--samples", "1000", "--seed", "21", "--out", str(path)],
    )
    assert rc == 0
    assert out == ""
    assert path.read_text().startswith("alpha,beta,")


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["sweep-alpha", "--alpha-grid", "junk", "--seed", "1"])
    assert exc.value.code == 2
    capsys.readouterr()
    cases = [
        ["sweep-alpha", "--alpha-grid", "0:2:3", "--samples", "1000", "--seed", "1"],
        ["sweep-alpha", "--samples", "10", "--seed", "1"],
        ["sweep-alpha", "--samples", "1000"],  # no seed anywhere
        ["sweep-overlap", "--d", "3", "--samples", "1000", "--seed", "1"],
        ["simulate", "--samples", "1000", "--seed", "1"],  # neither alpha nor overlap
        ["simulate", "--alpha", "0.5", "--overlap", "0.5", "--samples", "1000", "--seed", "1"],
        ["simulate", "--alpha", "1.5", "--samples", "1000", "--seed", "1"],
        ["simulate", "--overlap", "0.5", "--strategy", "custom", "--samples", "1000", "--seed", "1"],
    ]
    for argv in cases:
        rc = cli.main(argv)
        capsys.readouterr()
        assert rc == 2, argv


def test_verify_command_clean(capsys, tmp_path):
    path = tmp_path / "report.json"
    rc = cli.main(["verify", "--seed", "12345", "--out", str(path)])
    assert rc == 0
    body = json.loads(path.read_text())
    assert body["passed"] is True
    assert body["n_failed"] == 0


def test_verify_command_fails_on_injected_fault(capsys, monkeypatch):
    original = verify.qnd_channel_fixture

    def corrupted(d, alpha):
        mats = original(d, alpha)
        mats[0] = mats[0] * (1.0 + 5e-4)
        return mats

    monkeypatch.setattr(verify, "qnd_channel_fixture", corrupted)
    rc, out = _run(capsys, ["verify", "--seed", "12345"])
    assert rc == 1
    body = json.loads(out)
    assert body["passed"] is False
    failed = [c["name"] for c in body["checks"] if not c["passed"]]
    assert failed == ["channel_completeness"]
