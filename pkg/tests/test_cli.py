import json
import math

import numpy as np
import pytest

from ep3topo.cli import COMMANDS, ConfigError, RunConfig, main, parse_loop_spec, run
from ep3topo.spectra import locate_ep3
from ep3topo.topology import LoopKind, Orientation


def test_parse_loop_spec_examples():
    loop = parse_loop_spec("square:6.2832")
    assert loop.kind is LoopKind.SQUARE and loop.lambda_m == 6.2832
    assert loop.orientation is Orientation.FORWARD
    loop = parse_loop_spec("polyline:[[0,0],[1,0],[1,1],[0,1],[0,0]]")
    assert loop.kind is LoopKind.POLYLINE and loop.n_edges == 4
    assert parse_loop_spec("theta:2:64").kind is LoopKind.THETA
    for bad in ("square:-1", "square:x", "square", "circle:1", "theta:1",
                "theta:1:0", "polyline:[[0,0],[1,0],[1,1]]", "polyline:/no/such/file.json"):
        with pytest.raises(ConfigError):
            parse_loop_spec(bad)


def test_polyline_from_file(tmp_path):
    f = tmp_path / "loop.json"
    f.write_text("[[0,0],[7,0],[7,7],[0,7],[0,0]]")
    assert parse_loop_spec(f"polyline:{f}").n_edges == 4


def test_winding_summary(capsys):
    assert main(["winding", "--kappa", "5", "--loop", "square:6.2832"]) == 0
    out = capsys.readouterr().out.strip()
    assert out.startswith("W_raw=1.0") and out.endswith("W=1")


def test_eps_summary(capsys):
    assert main(["eps", "--kappa", "1"]) == 0
    out = capsys.readouterr().out
    assert out.count("0.272166") == 4 and out.count("0.096225") == 4


def test_winding_through_ep3_fails_with_status_3(tmp_path, capsys):
    k = 5.0
    l1, l2 = locate_ep3(k)[0]
    f = tmp_path / "through_ep3.json"
    f.write_text(json.dumps([[0, 0], [l1, l2], [2, 0], [2, 2], [0, 2], [0, 0]]))
    assert main(["winding", "--kappa", "5", "--loop", f"polyline:{f}"]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["status"] == 3
    assert "resultant zero on loop" in err["error"]["message"]


def test_invalid_inputs_give_status_2(capsys):
    assert main(["winding", "--kappa", "5", "--loop", "square:-1"]) == 2
    assert main(["spectrum", "--kappa", "1", "--lambda1-range", "1", "0", "5",
                 "--lambda2-range", "0", "1", "5"]) == 2
    assert main(["spectrum", "--kappa", "1", "--lambda1-range", "0", "1", "1",
                 "--lambda2-range", "0", "1", "5"]) == 2
    assert main(["nosuch"]) == 2
    assert main([]) == 2
    err = capsys.readouterr().err
    assert '"status": 2' in err


def test_json_envelope_and_determinism(tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    args = ["spectrum", "--kappa", "5", "--lambda1-range", "0", "4", "5",
            "--lambda2-range", "0", "1", "3", "--format", "json"]
    assert main(args + ["-o", str(out1)]) == 0
    assert main(args + ["-o", str(out2)]) == 0
    a = out1.read_bytes()
    assert a == out2.read_bytes()
    doc = json.loads(a)
    assert set(doc) == {"meta", "rows"} and len(doc["rows"]) == 15
    assert doc["meta"]["command"] == "spectrum"
    assert set(doc["rows"][0]) == {"lambda1", "lambda2", "max_re_gap", "max_im_gap", "min_gap",
                                   "isofrequency", "ifermi"}


def test_threaded_scan_matches_serial(tmp_path, monkeypatch):
    args = ["spectrum", "--kappa", "2", "--lambda1-range", "-2", "2", "9",
            "--lambda2-range", "-2", "2", "9"]
    assert main(args + ["-o", str(tmp_path / "serial.csv")]) == 0
    monkeypatch.setenv("EP3TOPO_WORKERS", "4")
    assert main(args + ["-o", str(tmp_path / "threads.csv")]) == 0
    assert (tmp_path / "serial.csv").read_bytes() == (tmp_path / "threads.csv").read_bytes()
    monkeypatch.setenv("EP3TOPO_WORKERS", "many")
    assert main(args) == 2


def test_arcs_keeps_flagged_points(tmp_path):
    out = tmp_path / "arcs.csv"
    assert main(["arcs", "--kappa", "5", "--lambda1-range", "0", "2", "21",
                 "--lambda2-range", "0", "0.5", "6", "-o", str(out)]) == 0
    rows = out.read_text().splitlines()[1:]
    assert rows and all(r.endswith((",1,0", ",0,1", ",1,1")) for r in rows)


def test_mhz2pi_scales_rates(capsys):
    # kappa = 5/(2 pi) MHz and lambda_m = 1 MHz is the standard square loop
    assert main(["winding", "--kappa", repr(5 / (2 * math.pi)), "--loop", "square:1",
                 "--mhz2pi"]) == 0
    assert "W=1" in capsys.readouterr().out
    assert main(["eps", "--kappa", "1", "--mhz2pi"]) == 0
    out = capsys.readouterr().out
    assert f"{math.sqrt(2) * 2 * math.pi / (3 * math.sqrt(3)):.6f}" in out
    assert "2pi" in out


def test_config_round_trip(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    out = tmp_path / "trace.csv"
    assert main(["evolve", "--kappa", "5", "--lambda1", "1", "--lambda2", "0.1",
                 "--t-final", "0.5", "--stride", "10", "-o", str(out),
                 "--save-config", str(cfg_path)]) == 0
    cfg = RunConfig.from_json(cfg_path.read_text())
    assert RunConfig.from_json(cfg.to_json()) == cfg
    assert main(["--config", str(cfg_path)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3,norm2,p1,p2,p3"
    assert len(lines) == 52


@pytest.mark.parametrize("text", [
    '{"command": "bogus"}', '{"command": "eps", "format": "xml"}', '[1, 2]', 'not json',
    '{"command": "eps", "params": {"kappa": Infinity}}', '{"command": "eps", "extra": 1}',
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        RunConfig.from_json(text)


def test_every_command_runs(tmp_path, capsys):
    configs = {
        "spectrum": {"kappa": 1, "lambda1_min": 0, "lambda1_max": 1, "lambda1_points": 3,
                     "lambda2_min": 0, "lambda2_max": 1, "lambda2_points": 3},
        "arcs": {"kappa": 1, "lambda1_min": 0, "lambda1_max": 1, "lambda1_points": 3,
                 "lambda2_min": 0, "lambda2_max": 1, "lambda2_points": 3},
        "eps": {"kappa": 1},
        "winding": {"kappa": 5, "loop": "theta:6.2832:64"},
        "evolve": {"kappa": 5, "lambda1": 1, "lambda2": 1, "t_final": 0.1},
        "modulated": {"t_final": 0.05, "compare": True},
        "extract": {"kappa": 5, "lambda1": 6.2832, "lambda2": 6.2832},
        "concurrence": {"state": "1,1j,0"},
    }
    assert set(configs) == set(COMMANDS)
    for cmd, params in configs.items():
        for fmt in ("csv", "json"):
            path = tmp_path / f"{cmd}.{fmt}"
            assert run(RunConfig(cmd, params, str(path), fmt)) == 0, cmd
            assert path.stat().st_size > 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 2 * len(configs)


def test_concurrence_command(capsys):
    assert main(["concurrence", "--kappa", "1"]) == 0
    out = capsys.readouterr().out
    assert "C12=0.8164966" in out and "C23=0.5773503" in out and "C13=0.4714045" in out


def test_extract_command_output(tmp_path, capsys):
    out = tmp_path / "ex.csv"
    pts = json.dumps([[2 * math.pi, 2 * math.pi], [2 * math.pi, 0.0]])
    assert main(["extract", "--kappa", "5", "--points", pts, "-o", str(out)]) == 0
    rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
    assert float(rows[0][8]) == pytest.approx(8.776101265, rel=1e-6)
    assert rows[1][2:] == [""] * 10
    assert "failed=1" in capsys.readouterr().out
