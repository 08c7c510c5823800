import hashlib
import json

import numpy as np
import pytest

from nnlslab.harness import ComparisonReport, RunConfig, emit_report, run
from nnlslab.scattering import InitialProfile
from nnlslab.simulator import SimGrid

CFG = {
    "schema": 1,
    "A": 0.5,
    "profile": {"preset": "gaussian_bump", "amplitude": -0.2, "width": 1.0,
                "chirp": 0.3, "center": 0.8},
    "rays": [1.2, 0.35],
    "t_list": [4.0, 8.0],
    "grid": {"L_box": 48.0, "N": 2048, "dt": 0.0025, "t_max": 8.0},
    "out_dir": "out",
    "seed": 0,
}


@pytest.fixture(scope="module")
def report():
    return run(RunConfig.from_json(json.dumps(CFG)))


class TestRunConfig:
    def test_schema_guard(self):
        bad = dict(CFG)
        bad["schema"] = 2
        with pytest.raises(ValueError):
            RunConfig.from_json(json.dumps(bad))

    def test_rays_nonempty(self):
        bad = dict(CFG)
        bad["rays"] = []
        with pytest.raises(ValueError):
            RunConfig.from_json(json.dumps(bad))

    def test_t_list_increasing(self):
        bad = dict(CFG)
        bad["t_list"] = [3.0, 1.0]
        with pytest.raises(ValueError):
            RunConfig.from_json(json.dumps(bad))


class TestRun:
    def test_both_regions_computed(self, report):
        regions = {r.xi: (r.region, r.skipped) for r in report.rays}
        assert regions[1.2] == ("plane_wave", False)
        assert regions[0.35] == ("elliptic_wave", False)

    def test_errors_finite(self, report):
        for r in report.rays:
            for (t, s, a) in r.rows:
                assert np.isfinite(s) and np.isfinite(a)

    def test_constants_present(self, report):
        pw = next(r for r in report.rays if r.region == "plane_wave")
        el = next(r for r in report.rays if r.region == "elliptic_wave")
        assert {"k1", "nu", "F_inf"} <= set(pw.constants)
        assert {"k0", "Omega", "omega", "G_inf", "H_inf"} <= set(el.constants)

    def test_pure_background_rays(self):
        cfg = RunConfig(
            profile=InitialProfile.pure_background(0.5, L=2.0), A=0.5,
            rays=[1.2], t_list=[2.0, 4.0],
            grid=SimGrid(L_box=40.0, N=1024, dt=0.005, t_max=4.0),
        )
        rep = run(cfg)
        assert not rep.rays[0].skipped
        for (t, s, a) in rep.rays[0].rows:
            assert abs(s - 0.5) < 1e-8
            assert abs(a - 0.5) < 1e-8

    def test_skip_safety_transition_ray(self):
        cfg = RunConfig(
            profile=InitialProfile.pure_background(0.5, L=2.0), A=0.5,
            rays=[0.0, 1.2], t_list=[2.0],
            grid=SimGrid(L_box=40.0, N=1024, dt=0.005, t_max=2.0),
        )
        rep = run(cfg)
        by_xi = {r.xi: r for r in rep.rays}
        assert by_xi[0.0].skipped
        assert not by_xi[1.2].skipped


class TestEmitReport:
    def test_deterministic_bytes(self, report, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        files1 = emit_report(report, str(d1))
        files2 = emit_report(report, str(d2))
        for f1, f2 in zip(files1, files2):
            h1 = hashlib.sha256(open(f1, "rb").read()).hexdigest()
            h2 = hashlib.sha256(open(f2, "rb").read()).hexdigest()
            assert h1 == h2

    def test_csv_row_count(self, report, tmp_path):
        files = emit_report(report, str(tmp_path / "c"))
        lines = open(files[0]).read().splitlines()
        nrows = sum(len(r.rows) for r in report.rays)
        assert len(lines) == 1 + nrows
        assert lines[0] == "xi,t,abs_q_sim,abs_q_asym,abs_err,rel_err"

    def test_empty_rays_header_only(self, tmp_path):
        rep = ComparisonReport(config_summary={}, assumptions={}, rays=[])
        files = emit_report(rep, str(tmp_path / "d"), formats=("csv",))
        assert open(files[0]).read() == "xi,t,abs_q_sim,abs_q_asym,abs_err,rel_err\n"

    def test_json_round_trip_stable(self, report, tmp_path):
        files = emit_report(report, str(tmp_path / "e"))
        blob1 = open(files[1]).read()
        parsed = json.loads(blob1)
        blob2 = json.dumps(parsed, sort_keys=True, indent=1, default=float) + "\n"
        assert blob1 == blob2


class TestCli:
    def test_validate_subcommand(self, tmp_path, capsys):
        from nnlslab.cli import main

        cfg_path = tmp_path / "cfg.json"
        cfg = dict(CFG)
        cfg["rays"] = [1.2]
        cfg_path.write_text(json.dumps(cfg))
        rc = main(["validate", "--config", str(cfg_path)])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["1.2"]["zero_count_upper"] == 0
        assert out["1.2"]["winding_ok"] is True

    def test_planewave_subcommand(self, tmp_path, capsys):
        from nnlslab.cli import main

        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(CFG))
        rc = main(["planewave", "--config", str(cfg_path), "--ray", "1.2"])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert "F_inf" in out["1.2"]
