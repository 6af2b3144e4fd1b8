import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from vspc import graph as gr
from vspc.cli import CSV_VERSION, SWEEP_COLUMNS, SpecError, main, parse_sweep_spec, run_sweep
from vspc.game import OwnershipProfile, format_ownership

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def read_sweep(text):
    lines = text.splitlines()
    assert lines[0] == CSV_VERSION
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_solve_complete_graph(capsys):
    code, out, _ = run(capsys, "solve", DATA / "k4.txt", "--tau", 1)
    assert code == 0
    lines = out.splitlines()
    assert lines[:4] == ["0.666667"] * 4
    assert any(ln.startswith("# tau_c = 0.333333") for ln in lines)


def test_solve_below_threshold(capsys):
    code, out, _ = run(capsys, "solve", DATA / "k3.txt", "--tau", 0.4)
    assert code == 0
    assert out.splitlines()[:3] == ["0.000000"] * 3
    assert "below threshold" in out


def test_solve_bad_file_exits_2(capsys, tmp_path):
    bad = write(tmp_path, "bad.txt", "3\n0 x\n")
    code, _, err = run(capsys, "solve", bad, "--tau", 1)
    assert code == 2 and "line 2" in err
    code, _, _ = run(capsys, "solve", tmp_path / "missing.txt", "--tau", 1)
    assert code == 2


def test_solve_writes_out_file(capsys, tmp_path):
    out = tmp_path / "v.txt"
    assert run(capsys, "solve", DATA / "k4.txt", "--tau", 1, "--out", out)[0] == 0
    assert out.read_text().startswith("0.666667")


def test_equilibrium_star_center(capsys):
    code, out, _ = run(capsys, "equilibrium", DATA / "star6.txt", DATA / "star6_center.own",
                       "--alpha", 1, "--tau", 5, "--zero-gamma")
    rep = json.loads(out)
    assert code == 0 and rep["exact_ne"] and rep["ad_stable"] and rep["best_deviation"] is None


def _files(tmp_path, g, own):
    gp = write(tmp_path, "g.txt", gr.format_edge_list(g))
    op = write(tmp_path, "g.own", format_ownership(own))
    return gp, op


def test_equilibrium_cycle_drop(capsys, tmp_path):
    g = gr.cycle(6)
    gp, op = _files(tmp_path, g, OwnershipProfile.by_rule(g))
    rep = json.loads(run(capsys, "equilibrium", gp, op, "--alpha", 1, "--tau", 5, "--zero-gamma")[1])
    assert not rep["exact_ne"]
    dev = rep["best_deviation"]
    i = dev["player"]
    owned_before = OwnershipProfile.by_rule(g).k(i)
    # the best move keeps fewer links than the player had: a drop
    assert len(dev["strategy"]) < owned_before and dev["delta"] < 0


def test_equilibrium_complete_graph_cheap_links(capsys, tmp_path):
    g = gr.complete(6)
    gp, op = _files(tmp_path, g, OwnershipProfile.by_rule(g))
    rep = json.loads(run(capsys, "equilibrium", gp, op, "--alpha", 0.05, "--gamma", 1, "--tau", 5)[1])
    assert rep["exact_ne"]


def test_equilibrium_bad_ownership_exits_2(capsys, tmp_path):
    g = gr.path(3)
    gp = write(tmp_path, "g.txt", gr.format_edge_list(g))
    op = write(tmp_path, "g.own", "0 1 0\n")
    assert run(capsys, "equilibrium", gp, op, "--alpha", 1, "--tau", 5)[0] == 2


def test_equilibrium_budget_exit_code(capsys, tmp_path, monkeypatch):
    import vspc.game
    g = gr.complete(7)
    gp, op = _files(tmp_path, g, OwnershipProfile.by_rule(g))
    monkeypatch.setattr(vspc.game.is_nash_exact, "__defaults__", (None, 10))
    assert run(capsys, "equilibrium", gp, op, "--alpha", 1, "--gamma", 1, "--tau", 5)[0] == 4


def test_negative_alpha_exits_2(capsys):
    assert run(capsys, "dynamics", "--n", 4, "--alpha", -1, "--tau", 1)[0] == 2


def test_dynamics_json_and_trace(capsys, tmp_path):
    trace = tmp_path / "trace.txt"
    code, out, _ = run(capsys, "dynamics", "--n", 6, "--alpha", 0.5, "--gamma", 1, "--tau", 1.4,
                       "--seed", 3, "--trace", trace)
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "converged" and rep["ad_stable"]
    assert rep["L"] == len(rep["edges"]) == len(rep["owners"])
    lines = trace.read_text().splitlines()
    assert lines[0].startswith("t, node, action")
    assert len(lines) - 1 == 2 * 6 * rep["slots"]


def _spec(tmp_path, **over):
    keys = dict(n=6, alpha="0.1,1", gamma="1", tau="1.4", seeds="0-2")
    keys.update(over)
    return write(tmp_path, "sweep.cfg", "".join(f"{k} = {v}\n" for k, v in keys.items()))


def test_sweep_is_byte_identical(capsys, tmp_path):
    spec = _spec(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "sweep", spec, "--out", a)
    run(capsys, "sweep", spec, "--out", b, "--workers", 2)
    assert a.read_bytes() == b.read_bytes()


def test_sweep_columns_and_exact_poa(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", _spec(tmp_path))
    rows = read_sweep(out)
    assert code == 0 and list(rows[0]) == SWEEP_COLUMNS
    assert len(rows) == 2 * (3 + 1)
    for r in rows:
        assert r["poa_kind"] == "exact"
        assert float(r["poa"]) >= 1 - 1e-9
        assert float(r["audit_delta"]) < 1e-9
    assert [r["seed"] for r in rows[:4]] == ["0", "1", "2", "mean"]


def test_sweep_no_virus_zero_infection(capsys, tmp_path):
    out = run(capsys, "sweep", _spec(tmp_path), "--no-virus")[1]
    assert "no_virus" in out
    assert all(float(r["sum_infection"]) == 0.0 for r in read_sweep(out))


def test_sweep_single_seed_override(capsys, tmp_path):
    rows = read_sweep(run(capsys, "sweep", _spec(tmp_path), "--seed", 7)[1])
    assert [r["seed"] for r in rows[:2]] == ["7", "mean"]


def test_sweep_reference_poa_for_larger_n(capsys, tmp_path):
    rows = read_sweep(run(capsys, "sweep", _spec(tmp_path, n=9, alpha="1", seeds="0"))[1])
    assert rows[0]["poa_kind"] == "reference"


def test_sweep_links_fall_with_alpha(capsys, tmp_path):
    spec = _spec(tmp_path, n=10, alpha="0.01,1,100", gamma="1", tau="1.4", seeds="0-4")
    rows = [r for r in read_sweep(run(capsys, "sweep", spec)[1]) if r["seed"] == "mean"]
    links = [float(r["L"]) for r in rows]
    assert links == sorted(links, reverse=True) and links[-1] == 9


@pytest.mark.parametrize("text", ["n = 4\n", "n = 4\nalpha = 1\ngamma = 1\ntau = 0\nseeds = 0\n",
                                  "bogus = 1\n", "n = 4\nalpha = x\n", "no equals sign\n"])
def test_bad_sweep_specs(text):
    with pytest.raises(SpecError):
        parse_sweep_spec(text)


def test_zero_gamma_spec_defaults_gamma():
    spec = parse_sweep_spec("n=4\nalpha=1\ntau=5\nseeds=0,3-4\nzero_gamma=yes\n")
    assert spec.gamma_grid == [0.0] and spec.seeds == [0, 3, 4] and spec.zero_gamma


def test_run_sweep_api_matches_cli(capsys, tmp_path):
    path = _spec(tmp_path, alpha="1", seeds="0")
    assert run(capsys, "sweep", path)[1] == run_sweep(parse_sweep_spec(path.read_text()))


def test_poa_curve(capsys):
    code, out, _ = run(capsys, "poa-curve", "--n", 10, "--alpha", 0, "--zero-gamma",
                       "--tau-min", 3, "--tau-max", 4, "--tau-step", 0.5)
    rows = read_sweep(out)
    assert code == 0 and [float(r["tau"]) for r in rows] == [3.0, 3.5, 4.0]
    for r in rows:
        assert 1 <= float(r["poa"]) < float(r["poa_bound"])


@pytest.mark.parametrize("kind,n,count", [("trees", 5, 125), ("trees", 6, 1296),
                                          ("connected", 4, 38), ("connected", 5, 728)])
def test_enumerate_counts(capsys, kind, n, count):
    assert run(capsys, "enumerate", "--n", n, "--kind", kind)[1].strip() == f"# count={count}"


def test_enumerate_list_and_non_ne(capsys):
    out = run(capsys, "enumerate", "--n", 3, "--list")[1].splitlines()
    assert len(out) == 4 and out[-1] == "# count=3"
    assert run(capsys, "enumerate", "--n", 6, "--non-ne")[1].strip().endswith("# count=90")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "vspc", "solve", str(DATA / "k4.txt"), "--tau", "1"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("0.666667")
