import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

from allee4.cli import main, parse_config

FIG5A_FLAGS = ["--K", "20", "--A", "2", "--a", "0.004905", "--b", "-0.10891",
               "--d", "24.28"]


def run_cli(args, check=True):
    proc = subprocess.run([sys.executable, "-m", "allee4", *args],
                          capture_output=True, text=True)
    if check:
        assert proc.returncode == 0, proc.stderr
    return proc


def test_parse_flags_into_params():
    cfg = parse_config([*FIG5A_FLAGS, "region"])
    assert cfg.params.K == 20.0
    assert cfg.command == "region"
    assert cfg.output_format == "json"


def test_invalid_params_exit_3(tmp_path):
    proc = run_cli(["--K", "20", "--A", "2", "--a", "0.2", "--b", "-1",
                    "--d", "24.28", "equilibria"], check=False)
    assert proc.returncode == 3
    assert "b" in proc.stderr


def test_unknown_option_exit_2():
    proc = run_cli([*FIG5A_FLAGS, "cycles", "zz=1"], check=False)
    assert proc.returncode == 2
    assert "zz" in proc.stderr


def test_unknown_config_key_rejected(tmp_path):
    cfgf = tmp_path / "c.json"
    cfgf.write_text(json.dumps({"params": {"K": 20, "A": 2, "a": 0.004905,
                                           "b": -0.10891, "d": 24.28},
                                "bogus": 1}))
    proc = run_cli(["--config", str(cfgf), "region"], check=False)
    assert proc.returncode == 2
    assert "bogus" in proc.stderr


def test_command_from_config_file(tmp_path):
    cfgf = tmp_path / "c.json"
    cfgf.write_text(json.dumps({"params": {"K": 20, "A": 2, "a": 0.004905,
                                           "b": -0.10891, "d": 24.28},
                                "command": "region"}))
    proc = run_cli(["--config", str(cfgf)])
    assert json.loads(proc.stdout)["result"]["region"] == "Valpha"
    proc2 = run_cli([], check=False)
    assert proc2.returncode == 2


def test_hopf3_needs_no_model_params():
    proc = run_cli(["hopf3", "n_edge=21"])
    doc = json.loads(proc.stdout)["result"]
    assert doc["certified"] is True
    assert doc["J_value"] < 0


def test_flag_overrides_config(tmp_path):
    cfgf = tmp_path / "c.json"
    cfgf.write_text(json.dumps({"params": {"K": 20, "A": 2, "a": 0.004905,
                                           "b": -0.10891, "d": 10.0}}))
    proc = run_cli(["--config", str(cfgf), "--d", "24.28", "region"])
    doc = json.loads(proc.stdout)
    assert doc["manifest"]["params"]["d"] == 24.28
    assert doc["result"]["region"] == "Valpha"


def test_json_roundtrip_bit_identical():
    proc = run_cli([*FIG5A_FLAGS, "equilibria"])
    doc = json.loads(proc.stdout)
    again = json.loads(json.dumps(doc))
    assert again == doc
    # numerals survive the round trip exactly
    x = doc["result"][3]["location"][0]
    assert json.loads(json.dumps({"x": x}))["x"] == x


def test_manifest_reproducibility_fields():
    proc = run_cli([*FIG5A_FLAGS, "region"])
    man = json.loads(proc.stdout)["manifest"]
    assert man["package"] == "allee4"
    assert set(man["params"]) == {"K", "A", "a", "b", "d"}
    assert "tolerances" in man and "version" in man


def test_simulate_csv(tmp_path):
    out = tmp_path / "traj.csv"
    run_cli([*FIG5A_FLAGS, "--format", "csv", "--out", str(out),
             "simulate", "x0=11", "y0=35", "t_end=0.5"])
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,x,y"
    first = [float(v) for v in lines[1].split(",")]
    assert first == [0.0, 11.0, 35.0]
    # sidecar manifest for non-JSON outputs
    man = json.loads((tmp_path / "traj.csv.manifest.json").read_text())
    assert man["manifest"]["command"] == "simulate"


def test_portrait_svg_well_formed(tmp_path):
    out = tmp_path / "p.svg"
    run_cli([*FIG5A_FLAGS, "--format", "svg", "--out", str(out),
             "portrait", "orbits=11,35", "t_end=1.0"])
    root = ET.fromstring(out.read_text())
    assert root.tag.endswith("svg")
    tags = {el.tag.split('}')[-1] for el in root.iter()}
    assert "polyline" in tags and "circle" in tags


def test_portrait_svg_deterministic(tmp_path):
    a1 = tmp_path / "a1.svg"
    a2 = tmp_path / "a2.svg"
    for out in (a1, a2):
        run_cli([*FIG5A_FLAGS, "--format", "svg", "--out", str(out),
                 "portrait", "orbits=11,35", "t_end=0.5"])
    assert a1.read_text() == a2.read_text()


def test_sweep_csv_columns(tmp_path):
    out = tmp_path / "s.csv"
    run_cli([*FIG5A_FLAGS, "--format", "csv", "--out", str(out),
             "sweep", "n_d=6", "n_A=6", "workers=2"])
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "d,A,region"
    assert len(lines) == 1 + 36


def test_sweep_worker_count_does_not_change_output(tmp_path):
    outs = []
    for w in ("1", "3"):
        out = tmp_path / f"s{w}.csv"
        run_cli([*FIG5A_FLAGS, "--format", "csv", "--out", str(out),
                 "sweep", "n_d=5", "n_A=5", f"workers={w}"])
        outs.append(out.read_text())
    assert outs[0] == outs[1]


def test_sweep_region_boundaries_visible():
    # the sweep must reproduce the region transitions across d = p(K), d_m
    proc = run_cli([*FIG5A_FLAGS, "sweep", "n_d=40", "n_A=3",
                    "d_min=20", "d_max=34", "A_min=2", "A_max=3"])
    doc = json.loads(proc.stdout)["result"]
    row_regions = [doc["region"][i][0] for i in range(len(doc["d"]))]
    assert "Valpha" in row_regions       # below p(K)
    assert "ValphaBeta" in row_regions   # between p(K) and d_m
    assert "V0_4" in row_regions         # beyond the fold


def test_bt_command():
    proc = run_cli(["--a", "1.0", "--K", "1.2", "bt"])
    doc = json.loads(proc.stdout)["result"]
    assert math.isclose(doc["point"]["d_m"], 21.0, rel_tol=1e-9)
    assert doc["cusp"]["order"] == 3


def test_unfold_command():
    proc = run_cli(["--a", "1.0", "--K", "1.2", "unfold", "fd_step=1e-6"])
    doc = json.loads(proc.stdout)["result"]
    assert doc["fd_max_rel_err"] < 1e-5


def test_ns_command():
    proc = run_cli(["--a", "0.01", "--K", "5.0", "--b", "0.1", "ns"])
    doc = json.loads(proc.stdout)["result"]
    assert doc["point_type"] == "saddle"
    assert doc["gamma1"] < 0


def test_certify_command():
    proc = run_cli(["--K", "16", "--A", "12.2", "--a", "0.01", "--b", "0.0",
                    "--d", "1.0", "certify"])
    doc = json.loads(proc.stdout)["result"]
    assert doc["no_cycle_certificate"] == "A >= 1/sqrt(a)"


def test_cycles_command_json(fig5a):
    # in-process (subprocess would re-JIT); count and section reported
    import io
    from contextlib import redirect_stdout
    buf = io.StringIO()
    with redirect_stdout(buf):
        rc = main([*FIG5A_FLAGS, "cycles", "n_seed=80"])
    assert rc == 0
    doc = json.loads(buf.getvalue())
    assert doc["result"]["count"] == 2
    assert doc["manifest"]["n_seed"] == 80


def test_unwritable_path_exit_4(tmp_path):
    proc = run_cli([*FIG5A_FLAGS, "--out", "/nonexistent-dir/x.json", "region"],
                   check=False)
    assert proc.returncode == 4


def test_portrait_with_three_nested_cycles(tmp_path, three_cycle_params):
    # the portrait renderer highlights every detected cycle as a closed curve
    import io
    from contextlib import redirect_stdout
    p = three_cycle_params
    out = tmp_path / "three.svg"
    rc = main(["--K", repr(p.K), "--A", repr(p.A), "--a", repr(p.a),
               "--b", repr(p.b), "--d", repr(p.d),
               "--format", "svg", "--out", str(out),
               "portrait", "with_cycles=1", "n_seed=200"])
    assert rc == 0
    text = out.read_text()
    assert text.count('stroke-width="2.2"') == 3
    doc = json.loads((tmp_path / "three.svg.manifest.json").read_text())
    assert doc["manifest"]["command"] == "portrait"
