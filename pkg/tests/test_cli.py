import json
from fractions import Fraction as F

import pytest

from bakerfr.cli import ExperimentConfig, main


def run(args):
    return main(args)


class TestConfig:
    def test_round_trip(self):
        cfg = ExperimentConfig(command="fr", family="map2", l=F(1, 8), n=15,
                               ensemble=1000, transient=50, seed=7, mode="exact",
                               x_tilde=F(7, 32), eps=F(3, 64),
                               b_values=(F(1, 100), F(1, 10)), delta=F(1, 3))
        assert ExperimentConfig.from_text(cfg.to_text()) == cfg

    def test_rational_parsing_is_exact(self):
        cfg = ExperimentConfig.from_text("command=density\nl=1/3\n")
        assert cfg.l == F(1, 3)


class TestDensityCommand:
    def test_exact_values_in_output(self, tmp_path):
        out = tmp_path / "d"
        assert run(["density", "--family", "map2", "--l", "1/8",
                    "--out", str(out)]) == 0
        text = (tmp_path / "d.csv").read_text()
        assert "4/3" in text and "2/3" in text

    def test_equilibrium_uniform(self, tmp_path):
        out = tmp_path / "d"
        assert run(["density", "--family", "map2", "--l", "1/4",
                    "--out", str(out)]) == 0
        payload = json.loads((tmp_path / "d.json").read_text())
        assert payload["density"] == [["0/1", "1/1"]]

    def test_simple_family_uniform(self, tmp_path):
        out = tmp_path / "d"
        assert run(["density", "--family", "map1", "--l", "2/3",
                    "--out", str(out)]) == 0
        payload = json.loads((tmp_path / "d.json").read_text())
        assert payload["agree"] is True


class TestFRCommand:
    def test_exact_generalized(self, tmp_path):
        out = tmp_path / "fr"
        assert run(["fr", "--family", "map2", "--l", "1/8", "--n", "15",
                    "--mode", "exact", "--out", str(out)]) == 0
        payload = json.loads((tmp_path / "fr.json").read_text())
        assert payload["all_pass"] is True
        assert payload["alpha_max"] == "2"

    def test_exact_with_interval_binning(self, tmp_path):
        out = tmp_path / "frb"
        assert run(["fr", "--family", "map2", "--l", "1/8", "--n", "12",
                    "--mode", "exact", "--delta", "1/2", "--out", str(out)]) == 0
        payload = json.loads((tmp_path / "frb.json").read_text())
        assert payload["binned"]["all_pass"] is True

    def test_exact_simple_zero_band(self, tmp_path):
        out = tmp_path / "fr"
        assert run(["fr", "--family", "map1", "--l", "2/3", "--n", "12",
                    "--mode", "exact", "--out", str(out)]) == 0
        payload = json.loads((tmp_path / "fr.json").read_text())
        assert all(row["alpha"] == "1" for row in payload["rows"])

    def test_montecarlo_composite(self, tmp_path):
        out = tmp_path / "frmc"
        assert run(["fr", "--family", "composite", "--l", "1/8", "--n", "6",
                    "--mode", "montecarlo", "--ensemble", "50000",
                    "--transient", "40", "--seed", "5", "--out", str(out)]) == 0
        payload = json.loads((tmp_path / "frmc.json").read_text())
        assert payload["all_pass"] is True


class TestOtherCommands:
    def test_upo(self, tmp_path):
        out = tmp_path / "u"
        assert run(["upo", "--n", "8", "--out", str(out)]) == 0
        payload = json.loads((tmp_path / "u.json").read_text())
        assert payload["agree"] is True and payload["orbits"] == 256

    def test_upo_generalized_diagnostic(self, tmp_path):
        out = tmp_path / "u2"
        assert run(["upo", "--family", "map2", "--l", "1/8", "--n", "6",
                    "--out", str(out)]) == 0

    def test_multibaker(self, tmp_path):
        out = tmp_path / "mb"
        assert run(["multibaker", "--l", "1/8", "--ensemble", "20000",
                    "--n", "300", "--seed", "9", "--out", str(out)]) == 0
        payload = json.loads((tmp_path / "mb.json").read_text())
        assert payload["within_4_stderr"] is True

    def test_multibaker_sweep(self, tmp_path):
        out = tmp_path / "lr"
        assert run(["multibaker", "--b-values", "1/20,1/10",
                    "--ensemble", "15000", "--n", "300", "--seed", "10",
                    "--out", str(out)]) == 0
        text = (tmp_path / "lr.csv").read_text()
        assert text.startswith("b,l,psi_analytic")

    def test_reversibility(self, tmp_path):
        out = tmp_path / "rev"
        assert run(["reversibility", "--family", "map2", "--l", "1/8",
                    "--ensemble", "200", "--seed", "4", "--out", str(out)]) == 0

    def test_reversibility_composite_expects_breakage(self, tmp_path):
        out = tmp_path / "revk"
        assert run(["reversibility", "--family", "composite", "--l", "1/8",
                    "--ensemble", "300", "--seed", "4", "--out", str(out)]) == 0
        payload = json.loads((tmp_path / "revk.json").read_text())
        assert payload["irreversible_as_expected"] is True
        assert payload["ok"] is False


class TestSweepFile:
    def test_fans_out_configs(self, tmp_path):
        sweep = tmp_path / "sweep.txt"
        sweep.write_text("l=1/8,1/6\nn=4,6\n")
        out = tmp_path / "fr"
        assert run(["fr", "--family", "map2", "--mode", "exact",
                    "--sweep", str(sweep), "--out", str(out)]) == 0
        produced = sorted(p.name for p in tmp_path.glob("fr-*.json"))
        assert produced == ["fr-000.json", "fr-001.json",
                            "fr-002.json", "fr-003.json"]


class TestDeterminism:
    @pytest.mark.parametrize("args", [
        ["density", "--family", "map2", "--l", "1/8"],
        ["fr", "--family", "map2", "--l", "1/8", "--n", "10", "--mode", "exact"],
        ["fr", "--family", "map2", "--l", "1/8", "--n", "5",
         "--mode", "montecarlo", "--ensemble", "20000", "--transient", "20",
         "--seed", "3"],
        ["upo", "--n", "6"],
        ["multibaker", "--l", "1/8", "--ensemble", "5000", "--n", "100",
         "--seed", "2"],
        ["reversibility", "--family", "map2", "--l", "1/8",
         "--ensemble", "100", "--seed", "1"],
    ])
    def test_byte_identical_reruns(self, tmp_path, args):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert run(args + ["--out", str(out_a)]) == 0
        assert run(args + ["--out", str(out_b)]) == 0
        for suffix in (".json", ".csv"):
            fa, fb = out_a.with_suffix(suffix), out_b.with_suffix(suffix)
            if fa.exists() or fb.exists():
                content_a = fa.read_bytes().replace(str(out_a).encode(), b"OUT")
                content_b = fb.read_bytes().replace(str(out_b).encode(), b"OUT")
                assert content_a == content_b


class TestErrorHandling:
    def test_equilibrium_gives_explanatory_error(self, tmp_path, capsys):
        out = tmp_path / "bad"
        rc = run(["fr", "--family", "map2", "--l", "1/4", "--n", "5",
                  "--mode", "exact", "--out", str(out)])
        assert rc == 2
        assert "mean contraction vanishes" in capsys.readouterr().out

    def test_bad_family_parameter(self, tmp_path):
        rc = run(["density", "--family", "map2", "--l", "1/3",
                  "--out", str(tmp_path / "x")])
        assert rc == 2
