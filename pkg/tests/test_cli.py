import csv
import io
import math
import subprocess
import sys
from pathlib import Path

import pytest

from algocool.cli import main

GOLDEN = Path(__file__).parent / "golden"


def cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "algocool", *args], capture_output=True,
                          text=True, cwd=cwd)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSimulate:
    def test_ppa3_cop_column(self):
        res = cli("simulate", "--protocol", "PPA3", "--beta-omega", "1", "--rounds", "20")
        assert res.returncode == 0
        table = rows(res.stdout)
        assert len(table) == 20
        assert list(table[0])[:11] == ["round", "p_t", "beta_final_omega", "work", "dE_t", "dE_m",
                                       "dE_b", "S_t", "W_cum", "K", "R_L"]
        assert all(abs(float(r["K"]) - 1.0) < 1e-12 for r in table)

    def test_xhbac1_single_round(self):
        res = cli("simulate", "--protocol", "xHBAC1", "--beta-omega", "1", "--rounds", "1")
        p_b = 1 / (1 + math.exp(-1))
        assert float(rows(res.stdout)[0]["p_t"]) == pytest.approx(1 - math.exp(-1) * (1 - p_b), abs=1e-15)

    def test_extra_metrics(self, tmp_path):
        out = tmp_path / "ppa4.csv"
        assert main(["simulate", "--protocol", "PPA", "--qubits", "4", "--beta-omega", "1",
                     "--rounds", "5", "--metric", "cop", "--metric", "lr_comp", "--out", str(out)]) == 0
        table = rows(out.read_text())
        assert "k" in table[0] and "r_L_comp" in table[0]

    def test_multiple_temperatures_write_one_file_each(self, tmp_path):
        out = tmp_path / "noe.csv"
        assert main(["simulate", "--protocol", "NOE2", "--beta-omega", "0.5", "--beta-omega", "2",
                     "--rounds", "3", "--out", str(out)]) == 0
        assert sorted(p.name for p in tmp_path.iterdir()) == ["noe_bw0.5.csv", "noe_bw2.0.csv"]

    def test_deterministic_bytes(self):
        args = ("simulate", "--protocol", "SR2", "--beta-omega", "0.7", "--rounds", "15")
        assert cli(*args).stdout == cli(*args).stdout

    @pytest.mark.parametrize("args", [
        ("simulate", "--protocol", "NOE2", "--beta-omega", "1", "--rounds", "0"),
        ("simulate", "--protocol", "Carnot", "--beta-omega", "1"),
        ("simulate", "--protocol", "PPA", "--qubits", "2", "--beta-omega", "1"),
        ("simulate", "--protocol", "NOE2", "--beta-omega", "1", "--beta-omega", "2"),
        ("figure", "fig3"),
    ])
    def test_usage_errors_exit_2(self, args):
        res = cli(*args)
        assert res.returncode == 2 and res.stderr

    def test_non_convergence_exits_3(self):
        res = cli("cooling-limit", "--protocol", "PPA", "--qubits", "5", "--beta-omega", "1",
                  "--max-rounds", "2")
        assert res.returncode == 3


class TestFigures:
    @pytest.mark.parametrize("fig", ["fig2", "fig7"])
    def test_golden(self, fig, tmp_path):
        res = cli("figure", fig, "--out", str(tmp_path))
        assert res.returncode == 0
        produced = sorted(p.name for p in tmp_path.iterdir())
        expected = sorted(p.name for p in GOLDEN.glob(f"{fig}_*.csv"))
        assert produced == expected
        for name in produced:
            assert (tmp_path / name).read_bytes() == (GOLDEN / name).read_bytes(), name

    def test_fig2_contains_worked_values(self):
        for n in (3, 4):
            table = rows((GOLDEN / f"fig2_n{n}.csv").read_text())
            row = next(r for r in table if float(r["p"]) == pytest.approx(0.6))
            assert float(row["q_max"]) == pytest.approx(0.648, abs=1e-12)

    def test_fig7_ppa4_asymptote(self):
        table = rows((GOLDEN / "fig7_PPA4.csv").read_text())
        assert float(table[-1]["beta_final_omega"]) == pytest.approx(24.0, abs=1e-4)

    def test_fig6_endpoints(self, tmp_path):
        assert main(["figure", "fig6", "--out", str(tmp_path)]) == 0
        files = sorted(tmp_path.glob("fig6_*.csv"))
        assert files
        for f in files:
            last = rows(f.read_text())[-1]
            assert 1.0 < float(last["r_L_comp"]) < 1.1

    @pytest.mark.parametrize("fig", ["fig4", "fig5", "fig8", "fig9"])
    def test_other_figures_write_csv(self, fig, tmp_path):
        assert main(["figure", fig, "--out", str(tmp_path), "--rounds", "5"]) == 0
        files = list(tmp_path.glob(f"{fig}_*.csv"))
        assert files and all(f.read_text().count("\n") == 6 for f in files)

    def test_no_nan_in_output(self, tmp_path):
        main(["figure", "fig8", "--out", str(tmp_path), "--rounds", "5"])
        assert all("nan" not in f.read_text().lower() for f in tmp_path.iterdir())


class TestCoolingLimit:
    def parse(self, line):
        return dict(tok.split("=", 1) for tok in line.split())

    def test_ppa5(self):
        res = cli("cooling-limit", "--protocol", "PPA", "--qubits", "5", "--beta-omega", "1")
        rep = self.parse(res.stdout)
        assert float(rep["alpha"]) == 8
        assert abs(float(rep["delta"])) < 1e-8

    def test_xhbac1(self):
        rep = self.parse(cli("cooling-limit", "--protocol", "xHBAC1", "--beta-omega", "1").stdout)
        assert float(rep["eps_inf"]) == 1.0

    def test_improved_ppa(self):
        rep = self.parse(cli("cooling-limit", "--protocol", "ImprovedPPA", "--qubits", "5",
                             "--beta-omega", "0.5").stdout)
        assert float(rep["beta_t_inf_omega"]) == pytest.approx(2.0)

    def test_unknown_protocol(self):
        assert cli("cooling-limit", "--protocol", "Otto", "--beta-omega", "1").returncode == 2
