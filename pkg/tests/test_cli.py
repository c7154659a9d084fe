import json
import subprocess
import sys

import numpy as np
import pytest

from weightlab import __version__
from weightlab.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_VIOLATION, main
from weightlab.grid import Grid, GridFn, load_json, save_json

TINY = json.dumps({"n_1d": 32, "n_2d": 8, "weights": 4, "symbols": 3, "weights_2d": 2, "symbols_2d": 2})


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    assert code == EXIT_OK
    return json.loads(out)


@pytest.fixture
def files(tmp_path):
    save_json(GridFn(Grid(1, 8), np.ones(8)), tmp_path / "ones.json")
    save_json(GridFn(Grid(1, 2), [1.0, 4.0]), tmp_path / "twovalue_1_4.json")
    return tmp_path


def test_constant_examples(capsys, files):
    d = run_json(capsys, "constant", "--class", "a_p", "--p", 2, "--weight", files / "ones.json")
    assert d["result"]["value"] == 1.0
    d = run_json(capsys, "constant", "--class", "a_p", "--p", 2, "--weight", files / "twovalue_1_4.json", "--family", "all_intervals", "--n", 2)
    assert d["result"]["value"] == pytest.approx(1.5625, rel=1e-14)
    assert d["artifact"] == "weightlab" and d["version"] == __version__ and d["config"]["p"] == 2.0
    d = run_json(capsys, "constant", "--class", "a_vector", "--weight", files / "ones.json", "--weight", "gen:ones", "--n", 8)
    assert d["result"]["value"] == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize(
    "cls, extra, key",
    [
        ("rh", ["--q", "2"], "value"),
        ("a_pq", ["--p", "2", "--q", "4"], "value"),
        ("restricted", ["--p", "3", "--r-minus", "1.5", "--r-plus", "6"], "member"),
    ],
)
def test_constant_classes_on_generated_weights(capsys, cls, extra, key):
    d = run_json(capsys, "constant", "--class", cls, "--weight", "gen:exp_martingale:seed=3,depth=4,lam=0.5", "--n", 64, *extra)
    assert key in d["result"]


def test_norms(capsys):
    d = run_json(capsys, "norm", "--kind", "bmo", "--symbol", "gen:step:a=3", "--n", 2)
    assert d["result"]["value"] == pytest.approx(1.5)
    d = run_json(capsys, "norm", "--kind", "script_bmo", "--symbol", "gen:constant:c=2", "--n", 16)
    assert d["result"]["value"] == 0.0
    d = run_json(capsys, "norm", "--kind", "little_bmo", "--symbol", "gen:random:seed=1", "--n", 8, "--dim", 2)
    assert d["result"]["value"] > 0


def test_operator_application_and_kernel_dump(capsys, tmp_path):
    save_json(GridFn(Grid(1, 2), [1.0, 0.0]), tmp_path / "e0.json")
    run_json(capsys, "operator", "--op", "hilbert", "--input", tmp_path / "e0.json", "--result", tmp_path / "h.json",
             "--dump-kernel", tmp_path / "k.csv")
    assert load_json(tmp_path / "h.json").values.tolist() == [0.0, 1.0]
    assert np.loadtxt(tmp_path / "k.csv", delimiter=",").tolist() == [[0.0, -1.0], [1.0, 0.0]]
    d = run_json(capsys, "operator", "--op", "hilbert", "--n", 16, "--weight", "gen:ones")
    assert d["result"]["weighted_norm"]["method"] == "exact_spectral_p2"
    d = run_json(capsys, "operator", "--op", "bht", "--input", "gen:constant:c=1", "--input2", "gen:constant:c=1", "--n", 16,
                 "--result", tmp_path / "b.json")
    assert np.all(load_json(tmp_path / "b.json").values == 0)
    d = run_json(capsys, "operator", "--op", "maximal", "--input", "gen:constant:c=-3", "--n", 8)
    assert d["result"]["output_max"] == 3.0


def test_commutator_examples(capsys, tmp_path):
    d = run_json(capsys, "commutator", "--op", "hilbert", "--order", 1, "--symbol", "gen:constant:c=5", "--input", "gen:random:seed=2",
                 "--n", 32, "--result", tmp_path / "z.json")
    assert np.all(load_json(tmp_path / "z.json").values == 0)
    d = run_json(capsys, "commutator", "--op", "hilbert", "--order", 2, "--method", "both", "--symbol", "gen:dyadic_martingale:seed=4,depth=5",
                 "--input", "gen:random:seed=3", "--n", 128)
    assert d["result"]["relative_error"] <= 1e-8
    assert d["result"]["delta"] > 0 and d["config"]["m_nodes"] == 64
    run_json(capsys, "commutator", "--op", "hilbert", "--order", 0, "--symbol", "gen:random:seed=1", "--input", "gen:random:seed=3",
             "--n", 16, "--result", tmp_path / "k0.json")
    plain = run_json(capsys, "operator", "--op", "hilbert", "--input", "gen:random:seed=3", "--n", 16, "--result", tmp_path / "h.json")
    assert plain and load_json(tmp_path / "k0.json").values.tobytes() == load_json(tmp_path / "h.json").values.tobytes()
    d = run_json(capsys, "commutator", "--op", "bht", "--multi-index", "1,1", "--method", "both", "--symbol", "gen:random:seed=1",
                 "--symbol", "gen:random:seed=2", "--input", "gen:random:seed=3", "--input2", "gen:random:seed=4", "--n", 32)
    assert d["result"]["relative_error"] <= 1e-8


def test_generate_round_trip(tmp_path, capsys):
    assert main(["generate", "exp_martingale:seed=9,depth=6,lam=0.4", str(tmp_path / "w.json"), "--n", "64"]) == EXIT_OK
    w = load_json(tmp_path / "w.json")
    save_json(w, tmp_path / "w2.json")
    assert load_json(tmp_path / "w2.json").values.tobytes() == w.values.tobytes()


def test_verify_exit_code_and_bit_identical_reports(tmp_path, capsys):
    paths = []
    for name in ("a", "b"):
        js = tmp_path / f"{name}.json"
        code, out = run(capsys, "verify", "--suite", "exact", "--seed", 7, "--json", js, "--overrides", TINY,
                        "--instances", tmp_path / f"{name}_inst.csv")
        assert code == EXIT_OK and "exact violations: 0" in out
        paths.append(js)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a_inst.csv").read_bytes() == (tmp_path / "b_inst.csv").read_bytes()
    rep = json.loads(paths[0].read_text())
    assert rep["config"]["seed"] == 7 and rep["version"] == __version__
    code, out = run(capsys, "report", paths[0], "--csv", tmp_path / "summary.csv")
    assert code == EXIT_OK and "seed=7" in out
    assert (tmp_path / "summary.csv").read_text().startswith("check_id,")


def test_verify_reports_violations_with_exit_one(tmp_path, capsys, monkeypatch):
    import weightlab.cli as cli
    from weightlab.verify import EXACT, CheckOutcome, SuiteReport

    def fake(*a, **k):
        bad = CheckOutcome("demo", EXACT)
        bad.observe(2.0, 1.0, {})
        return SuiteReport({"suite": "exact", "seed": 0}, [bad])

    monkeypatch.setattr(cli, "run_suite", fake)
    code, _ = run(capsys, "verify", "--json", tmp_path / "r.json")
    assert code == EXIT_VIOLATION
    assert (tmp_path / "r.json").exists()
    assert main(["report", str(tmp_path / "r.json")]) == EXIT_VIOLATION


def test_config_errors(tmp_path, capsys):
    empty = json.dumps({"weights": 0})
    assert main(["verify", "--json", str(tmp_path / "r.json"), "--overrides", empty]) == EXIT_CONFIG
    assert main(["constant", "--class", "a_p", "--weight", "gen:ones", "--n", "8"]) == EXIT_CONFIG  # missing --p
    assert main(["constant", "--class", "a_p", "--p", "2", "--weight", "gen:ones"]) == EXIT_CONFIG  # gen: without --n
    (tmp_path / "bad.json").write_text('{"dim": 1,\n "n_points": 2,\n "values": [1, }')
    assert main(["norm", "--kind", "bmo", "--symbol", str(tmp_path / "bad.json")]) == EXIT_CONFIG
    assert "line 3" in capsys.readouterr().err
    assert main(["report", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    with pytest.raises(SystemExit) as exc:
        main(["operator", "--op", "fourier", "--n", "8"])
    assert exc.value.code == EXIT_CONFIG


def test_numerical_errors_exit_three(capsys, monkeypatch):
    import weightlab.cli as cli

    def boom(*a, **k):
        raise FloatingPointError("did not converge")

    monkeypatch.setattr(cli, "weighted_norm", boom)
    assert main(["operator", "--op", "hilbert", "--n", "8", "--weight", "gen:ones"]) == EXIT_NUMERIC


def test_console_entry_point_and_thread_cap(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "weightlab.cli", "--threads", "1", "constant", "--class", "a_p", "--p", "2",
         "--weight", "gen:two_value:a=4", "--n", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    d = json.loads(proc.stdout)
    assert d["result"]["value"] == pytest.approx(1.5625)
    assert d["config"]["threads"] == 1
