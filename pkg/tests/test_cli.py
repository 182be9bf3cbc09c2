import csv
import json
from pathlib import Path

import pytest

from pucci_lab.cli import ConfigError, load_config, main, validate_config
from pucci_lab.harness import ProblemSpec

HOPF = {"scenario": "hopf", "domain": {"kind": "half_ball"},
        "operator": {"tag": "pucci_minus", "lambda": 1, "Lambda": 2},
        "numerics": {"h": 1 / 32}, "probe": {"K": 4}}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


class TestDini:
    @pytest.mark.parametrize("mod, verdict", [('{"family": "power", "alpha": 0.5}', "true"),
                                              ('{"family": "log_inverse", "p": 1}', "false")])
    def test_output(self, capsys, mod, verdict):
        assert main(["dini", mod]) == 0
        out = capsys.readouterr().out
        assert out.startswith(f"is_dini={verdict} ") and "method=" in out

    def test_power_integral(self, capsys):
        main(["dini", '{"family": "power", "alpha": 0.5}'])
        out = capsys.readouterr().out
        assert float(out.split("integral=")[1].split()[0]) == pytest.approx(2.0, rel=1e-6)

    def test_bad_modulus(self, capsys):
        assert main(["dini", '{"family": "cubic"}']) == 1
        assert "config error" in capsys.readouterr().err


class TestConfig:
    def test_schema_error_has_pointer(self, tmp_path, capsys):
        cfg = write(tmp_path, {"scenario": "hopf", "domain": {"kind": "half_ball", "R": -1}})
        assert main(["solve", cfg]) == 1
        assert "/domain/R" in capsys.readouterr().err

    def test_validate(self):
        with pytest.raises(ConfigError) as exc:
            validate_config({"numerics": {"W": 0}})
        assert exc.value.pointer == "/numerics/W"
        validate_config(HOPF)

    def test_overrides(self, tmp_path):
        cfg = load_config(write(tmp_path, HOPF), {"h": 1 / 16, "W": 2, "tol": None})
        assert cfg["numerics"]["h"] == 1 / 16 and cfg["numerics"]["W"] == 2

    def test_incompatible_scenario(self, tmp_path, capsys):
        bad = {**HOPF, "domain": {"kind": "notch", "a": 0.1}}
        assert main(["measure", write(tmp_path, bad)]) == 1


class TestCommands:
    def test_certify(self, tmp_path, capsys):
        cfg = {"certify": {"omega": {"family": "zero"}, "c0": 0.25, "eta": 0.25,
                           "alpha0": 0.5, "K": 40}}
        assert main(["certify", write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "smallness: fails" in out
        d = json.loads((tmp_path / "o" / "certify.json").read_text())
        assert d["partial_sum"] == pytest.approx(0.5, rel=1e-11)

    def test_measure(self, tmp_path, capsys):
        assert main(["measure", write(tmp_path, HOPF), "--out", str(tmp_path / "m")]) == 0
        rep = json.loads((tmp_path / "m" / "report.json").read_text())
        assert all(rep["report"]["verdicts"].values())
        assert ProblemSpec.from_dict(rep["config"]).scenario == "hopf"
        rows = list(csv.reader(open(tmp_path / "m" / "growth.csv")))
        assert len(rows) == 4 and rows[0][0] == "k"

    def test_solve_round_trip(self, tmp_path):
        out = tmp_path / "s"
        assert main(["solve", write(tmp_path, HOPF), "--out", str(out), "--W", "2"]) == 0
        meta = json.loads((out / "metadata.json").read_text())
        assert meta["W"] == 2 and meta["residual_inf"] <= 1e-8
        spec = ProblemSpec.from_dict(meta["config"])
        assert spec.W == 2 and spec.scenario == "hopf"
        assert main(["solve", write(tmp_path, meta["config"], "again.json"), "--out",
                     str(tmp_path / "t")]) == 0
        assert (out / "field.csv").read_bytes() == (tmp_path / "t" / "field.csv").read_bytes()

    def test_solve_without_scenario(self, tmp_path):
        cfg = {"domain": {"kind": "half_ball"}, "operator": {"tag": "laplace"},
               "data": {"g": {"kind": "product"}}, "numerics": {"h": 1 / 32}}
        assert main(["solve", write(tmp_path, cfg), "--out", str(tmp_path / "p")]) == 0
        rows = list(csv.DictReader(open(tmp_path / "p" / "field.csv")))
        for r in rows:
            assert float(r["u"]) == pytest.approx(float(r["x1"]) * float(r["x2"]), abs=1e-9)

    def test_output_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PUCCI_LAB_OUTPUT", str(tmp_path / "env"))
        assert main(["measure", write(tmp_path, {**HOPF, "output": "run"})]) == 0
        assert (tmp_path / "env" / "run" / "growth.csv").exists()

    def test_sweep(self, tmp_path, capsys):
        cfg = {**HOPF, "sweep": {"axis": "W", "values": [1, 2]}}
        assert main(["sweep", write(tmp_path, cfg), "--out", str(tmp_path / "w")]) == 0
        rows = list(csv.DictReader(open(tmp_path / "w" / "sweep.csv")))
        assert {r["value"] for r in rows} == {"1.0", "2.0"}


@pytest.mark.parametrize("path", sorted((Path(__file__).parent.parent / "configs").glob("*.json")))
def test_shipped_configs_validate(path):
    validate_config(json.loads(path.read_text()))
