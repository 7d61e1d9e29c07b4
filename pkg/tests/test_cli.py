import json
import subprocess
import sys

import numpy as np
import pytest

from qframe import serialize as io
from qframe.cli import EXIT_FALSE, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, load_config, main
from qframe.frames import build_frame, canonical_dual, random_frame, represent
from qframe.quasiprob import rep_state
from qframe.serialize import state_from_json
from qframe.star_algebra import star_kernel, star_product


@pytest.fixture
def d3(fixtures_dir):
    return fixtures_dir / "d3"


def run(*argv):
    return main([str(a) for a in argv])


def build_w3(tmp_path):
    path = tmp_path / "frame.json"
    assert run("frame", "build", "--kind", "wootters", "--dim", 3, "--convention", "standard", "-o", path) == EXIT_OK
    return path


def test_pipeline_build_then_check(tmp_path, capsys):
    path = build_w3(tmp_path)
    assert run("frame", "check", "--frame", path) == EXIT_OK
    out = capsys.readouterr().out
    residual = float(next(line for line in out.splitlines() if line.startswith("duality_residual")).split()[1])
    assert residual <= 1e-10
    assert "is_dual True" in out and "covariant True" in out


def test_pipeline_prob_deformed_vs_trace(tmp_path, d3, capsys):
    f = build_w3(tmp_path)
    e = tmp_path / "dual.json"
    assert run("frame", "duals", "--frame", f, "-o", e) == EXIT_OK
    tables = {}
    for mode in ("trace", "deformed", "total"):
        capsys.readouterr()
        code = run("prob", "--mode", mode, "--state", d3 / "state.json", "--povm", d3 / "povm.json",
                   "--frame", f, "--dual", e)
        assert code == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert float(lines[-1].split()[1]) <= 1e-10
        tables[mode] = np.array([float(x.split()[1]) for x in lines[1:-1]])
    assert len(tables["trace"]) == 4
    assert np.max(np.abs(tables["deformed"] - tables["trace"])) <= 1e-10
    assert np.max(np.abs(tables["total"] - tables["trace"])) <= 1e-10


def test_pipeline_wootters_d2_rejected(tmp_path, capsys):
    assert run("frame", "build", "--kind", "wootters", "--dim", 2, "-o", tmp_path / "x.json") == EXIT_USAGE
    assert "degenera" in capsys.readouterr().err
    assert not (tmp_path / "x.json").exists()


def test_frame_roundtrip_bit_exact(tmp_path):
    path = tmp_path / "r.json"
    assert run("frame", "build", "--kind", "random", "--dim", 3, "--n", 11, "--seed", 5, "-o", path) == EXIT_OK
    loaded = io.frame_from_json(io.load(path))
    ref = build_frame("random", 3, "raw", n=11, seed=5)
    np.testing.assert_array_equal(loaded.elements, ref.elements)
    np.testing.assert_array_equal(loaded.weights, ref.weights)
    assert loaded.labels == ref.labels and loaded.fingerprint == ref.fingerprint
    again = tmp_path / "r2.json"
    io.dump(io.frame_to_json(loaded), again)
    assert again.read_bytes() == path.read_bytes()


def test_every_output_artifact_roundtrips(tmp_path, d3):
    f = build_w3(tmp_path)
    e, rep, reps, prod, wit = (tmp_path / n for n in ("e.json", "rep.json", "reps.json", "prod.json", "w.json"))
    assert run("frame", "duals", "--frame", f, "-o", e) == EXIT_OK
    assert run("rep", "state", "--frame", f, "--state", d3 / "state.json", "-o", rep) == EXIT_OK
    assert run("rep", "povm", "--frame-or-dual", e, "--povm", d3 / "povm.json", "--via", "E", "-o", reps) == EXIT_OK
    assert run("star", "--frame", f, "--dual", e, "--a", rep, "--b", rep, "-o", prod) == EXIT_OK
    assert run("nogo", "witness", "--dim", 2, "--seeds", 3, "-o", wit) == EXIT_OK
    for path in (f, e, rep, reps, prod, wit):
        io.dump(io.load(path), tmp_path / "again.json")
        assert (tmp_path / "again.json").read_bytes() == path.read_bytes()

    frame = io.frame_from_json(io.load(f))
    values, frame_ref, via = io.rep_from_json(io.load(rep))
    expected = rep_state(frame, state_from_json(io.load(d3 / "state.json"))).values
    np.testing.assert_array_equal(values, expected)
    assert via == "F"
    dual = io.frame_from_json(io.load(e))
    np.testing.assert_array_equal(dual.elements, canonical_dual(frame).elements)
    r = represent(frame, state_from_json(io.load(d3 / "state.json")))
    np.testing.assert_array_equal(io.kernel_from_json(io.load(prod)),
                                  star_product(r, r, star_kernel(frame, dual), frame.weights))


def test_float_encoding_is_lossless():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(1000) * 10.0 ** rng.integers(-300, 300, 1000)
    back = np.array(json.loads(io.dumps(x.tolist())))
    np.testing.assert_array_equal(back, x)


def test_determinism(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert run("nogo", "witness", "--dim", 3, "--seeds", 2, "--seed", 9, "-o", p) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    report = json.loads(paths[0].read_text())
    assert [r["frame_seed"] for r in report] == [9, 10]
    assert {"dim", "frame_seed", "min_dual_eig", "choi_pt_min_eig", "verdict"} <= set(report[0])


def test_seed_precedence(tmp_path, monkeypatch):
    def built(*extra):
        p = tmp_path / "s.json"
        assert run(*extra, "frame", "build", "--kind", "random", "--dim", 2, "--n", 5, "-o", p) == EXIT_OK
        return io.frame_from_json(io.load(p)).fingerprint

    fp = {s: build_frame("random", 2, "raw", n=5, seed=s).fingerprint for s in (0, 3, 4)}
    assert built() == fp[0]
    monkeypatch.setenv("QFRAME_SEED", "3")
    assert built() == fp[3]
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 4}))
    assert built("--config", cfg) == fp[4]
    monkeypatch.setenv("QFRAME_SEED", "abc")
    assert run("frame", "build", "--kind", "random", "--dim", 2, "--n", 5) == EXIT_USAGE


@pytest.mark.parametrize("cfg", [
    {"bogus": 1},
    {"tolerances": {"dual": 0}},
    {"tolerances": {"dual": -1e-3}},
    {"tolerances": {"nope": 1e-3}},
    {"convention": "weird"},
    {"output": {"format": "xml"}},
])
def test_config_rejects(tmp_path, cfg):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg))
    with pytest.raises(io.FormatError):
        load_config(p)
    assert run("--config", p, "nogo", "witness", "--dim", 2, "--seeds", 1) == EXIT_USAGE


def test_config_applies_convention_and_output(tmp_path):
    out = tmp_path / "out.json"
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"convention": "standard", "output": {"path": str(out)}}))
    assert run("--config", p, "frame", "build", "--kind", "wootters", "--dim", 3) == EXIT_OK
    assert io.frame_from_json(io.load(out)).convention == "standard"


def test_malformed_json_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "wootters",\n  "dim": 3,, }')
    assert run("frame", "check", "--frame", bad) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "bad.json:2:" in err


def test_dimension_mismatch_exits_2(tmp_path, d3):
    f = tmp_path / "f.json"
    assert run("frame", "build", "--kind", "leonhardt", "--dim", 2, "-o", f) == EXIT_OK
    assert run("rep", "state", "--frame", f, "--state", d3 / "state.json") == EXIT_USAGE


def test_singular_frame_exits_3(tmp_path):
    f = random_frame(2, 4, 0)
    obj = io.frame_to_json(f)
    obj["elements"][3] = obj["elements"][2]  # two identical elements: no longer spanning
    path = tmp_path / "sing.json"
    io.dump(obj, path)
    assert run("frame", "check", "--frame", path) == EXIT_NUMERIC


def test_usage_errors():
    assert run("frame") == EXIT_USAGE
    assert run("frame", "build", "--kind", "nope", "--dim", 3) == EXIT_USAGE
    assert run("frame", "build", "--kind", "wootters", "--dim", 4) == EXIT_USAGE


def test_check_with_non_dual_exits_1(tmp_path):
    # the standard Wootters frame is self-dual; the raw one is not
    f = tmp_path / "raw.json"
    assert run("frame", "build", "--kind", "wootters", "--dim", 3, "-o", f) == EXIT_OK
    assert run("frame", "check", "--frame", f, "--dual", f) == EXIT_FALSE


def test_paper_dual_prints_scalar(tmp_path, capsys):
    f = tmp_path / "f.json"
    assert run("frame", "build", "--kind", "wootters", "--dim", 3, "-o", f) == EXIT_OK
    capsys.readouterr()
    assert run("frame", "duals", "--frame", f, "--paper", "-o", tmp_path / "e.json") == EXIT_OK
    out = capsys.readouterr().out
    assert float(out.split("fitted_scalar")[1].split()[0]) == pytest.approx(9, rel=1e-12)


def test_classical_check_exit_codes(tmp_path, d3):
    f = build_w3(tmp_path)
    e = tmp_path / "e.json"
    assert run("frame", "duals", "--frame", f, "-o", e) == EXIT_OK
    assert run("classical-check", "--frame", f, "--dual", e, "--states", d3 / "basis_states",
               "--povms", d3 / "povms") == EXIT_OK
    states = tmp_path / "states"
    states.mkdir()
    for src in list((d3 / "basis_states").glob("*.json")) + [d3 / "negative_state.json"]:
        (states / src.name).write_bytes(src.read_bytes())
    out = tmp_path / "report.json"
    assert run("classical-check", "--frame", f, "--dual", e, "--states", states,
               "--povms", d3 / "povms", "-o", out) == EXIT_FALSE
    report = io.load(out)
    assert report["violations"] and report["violations"][0]["condition"] == "state-negative"


def test_negativity_and_csv(tmp_path, d3):
    f = build_w3(tmp_path)
    rep = tmp_path / "rep.json"
    assert run("rep", "state", "--frame", f, "--state", d3 / "negative_state.json", "-o", rep) == EXIT_OK
    out = tmp_path / "neg.json"
    assert run("negativity", "--rep", rep, "-o", out) == EXIT_OK
    assert io.load(out)["min_value"] < -0.9
    csv = tmp_path / "rep.csv"
    assert run("rep", "state", "--frame", f, "--state", d3 / "state.json", "--format", "csv", "-o", csv) == EXIT_OK
    lines = csv.read_text().splitlines()
    assert lines[0] == "q,p,value" and len(lines) == 10


def test_star_check_pure(tmp_path, d3):
    f = build_w3(tmp_path)
    e = tmp_path / "e.json"
    assert run("frame", "duals", "--frame", f, "-o", e) == EXIT_OK
    assert run("star", "check-pure", "--frame", f, "--dual", e, "--rep", d3 / "basis_states" / "k1.json") == EXIT_OK
    assert run("star", "check-pure", "--frame", f, "--dual", e, "--rep", d3 / "state.json") == EXIT_FALSE


def test_console_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "qframe", "frame", "build", "--kind", "wootters", "--dim", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
    assert "degenera" in proc.stderr
