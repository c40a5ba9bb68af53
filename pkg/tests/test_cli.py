import csv
import io
import json

import numpy as np
import pytest

from priorquant.cli import EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_OK, EXIT_VERIFY, load_config, main
from priorquant.design import Quantizer


def run(argv):
    out = io.StringIO()
    code = main(argv, stdout=out)
    return code, out.getvalue()


def table(text, name=None):
    """Parse one CSV table from stdout (sections marked with '# name')."""
    if name is not None:
        section = text.split(f"# {name}\n", 1)[1]
        text = section.split("\n\n", 1)[0] + "\n"
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


class TestDesign:
    def test_default_k2(self):
        code, out = run(["design", "--k", "2"])
        assert code == EXIT_OK
        cols, rows = table(out, "quantizer")
        reps = [float(r[cols.index("rep")]) for r in rows]
        np.testing.assert_allclose(reps, [0.25, 0.75], atol=1e-10)

    def test_k0_is_config_error(self, capsys):
        code, _ = run(["design", "--k", "0"])
        assert code == EXIT_CONFIG
        assert "k:" in capsys.readouterr().err

    def test_nonconvergence_exit(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"k": 6, "prior": "beta:5,2"}))
        # a one-step budget cannot converge
        from priorquant import cli

        orig = cli.RunConfig.options
        cli.RunConfig.options = lambda self: cli.DesignOptions(max_iter=1, restarts=0, accelerate=False)
        try:
            code, out = run(["design", "--config", str(cfg)])
        finally:
            cli.RunConfig.options = orig
        assert code == EXIT_NONCONVERGED
        assert "false" in out

    def test_files_are_byte_identical(self, tmp_path):
        paths = []
        for i in range(2):
            p = tmp_path / f"run{i}.csv"
            assert run(["design", "--k", "4", "--preset", "beta52-equal", "--seed", "7", "--out", str(p)])[0] == 0
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()
        side = [tmp_path / f"run{i}_summary.csv" for i in range(2)]
        assert side[0].read_bytes() == side[1].read_bytes()

    def test_save_quantizer(self, tmp_path):
        p = tmp_path / "q.txt"
        run(["design", "--k", "3", "--save-quantizer", str(p)])
        q = Quantizer.loads(p.read_text())
        assert q.k == 3


class TestSweep:
    def test_columns(self):
        code, out = run(["sweep", "--k-range", "1..8"])
        assert code == EXIT_OK
        cols, rows = table(out)
        opt = np.array([float(r[cols.index("mbre_opt")]) for r in rows])
        mae = np.array([float(r[cols.index("mbre_mae")]) for r in rows])
        assert cols[:3] == ["K", "mbre_opt", "mbre_mae"]
        assert np.all(np.diff(opt) <= 1e-10)
        assert np.all(opt <= mae + 1e-12)

    def test_unequal_costs_gap(self):
        gaps = []
        for preset in ("uniform-equal", "uniform-c4"):
            cols, rows = table(run(["sweep", "--k-range", "4..4", "--preset", preset])[1])
            gaps.append(float(rows[0][2]) - float(rows[0][1]))
        assert gaps[1] > gaps[0]


class TestHighrate:
    def test_normalization_and_gap(self):
        code, out = run(["highrate", "--format", "json"])
        assert code == EXIT_OK
        doc = json.loads(out)
        x, lam = np.array(doc["density"]["p0"]), np.array(doc["density"]["lambda_mbre"])
        assert x.size == 512
        assert np.trapezoid(lam, x) == pytest.approx(1.0, abs=1e-6)
        assert doc["gap"]["rate_gap_bits"][0] <= 0.0

    def test_beta_right_half(self):
        doc = json.loads(run(["highrate", "--preset", "beta52-equal", "--format", "json"])[1])
        x, lam = np.array(doc["density"]["p0"]), np.array(doc["density"]["lambda_mbre"])
        right = x >= 0.5
        assert np.trapezoid(lam[right], x[right]) > 0.5


class TestPopulations:
    def test_uniform(self):
        code, out = run(["populations", "--format", "json"])
        assert code == EXIT_OK
        s = json.loads(out)["summary"]
        assert s["crossing_ratio"][0] == pytest.approx(1.0, abs=1e-3)
        assert s["k_w"][0] >= s["k_b"][0]

    def test_beta(self):
        s = json.loads(run(["populations", "--prior", "beta:5,2", "--format", "json"])[1])["summary"]
        assert s["crossing_ratio"][0] > 1.0

    def test_bad_grid(self):
        assert run(["populations", "--ratio-grid", "8..1:5"])[0] == EXIT_CONFIG


class TestVerify:
    def test_passes(self):
        code, out = run(["verify"])
        assert code == EXIT_OK
        cols, rows = table(out)
        assert cols == ["quantity", "analytic", "empirical", "std_error", "z", "pass"]
        assert [r[0] for r in rows] == ["p_I", "p_II", "mbre", "decision_rate"]
        assert all(r[-1] == "true" for r in rows)

    def test_tampered(self):
        code, out = run(["verify", "--n", "100000", "--tamper", "mbre=0.01"])
        assert code == EXIT_VERIFY
        assert "false" in out


class TestConfig:
    def test_precedence(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"preset": "uniform-c4", "c01": 2.0, "k": 5}))
        cfg = load_config(str(p), None, {"k": 7})
        assert (cfg.c10, cfg.c01, cfg.k) == (1.0, 2.0, 7)

    def test_unknown_key(self, tmp_path, capsys):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"kk": 3}))
        assert run(["design", "--config", str(p)])[0] == EXIT_CONFIG
        assert "kk" in capsys.readouterr().err

    @pytest.mark.parametrize("argv", [
        ["design", "--sigma", "0"],
        ["design", "--prior", "beta:1"],
        ["design", "--format", "xml"],
        ["sweep", "--k-range", "a..b"],
        ["design", "--config", "/nonexistent.json"],
        ["nosuch"],
    ])
    def test_config_errors(self, argv):
        with pytest.raises(SystemExit) as exc:
            raise SystemExit(run(argv)[0])
        assert exc.value.code == EXIT_CONFIG

    def test_csv_format(self):
        out = run(["design", "--k", "3"])[1]
        assert out.endswith("\n")
        cols, rows = table(out, "quantizer")
        assert len(rows) == 3 and all(len(r) == len(cols) for r in rows)
        # 17 significant digits round-trip exactly
        assert float(rows[0][2]) == pytest.approx(0.3452000731569215, abs=0)


@pytest.mark.parametrize("argv", [
    ["design", "--k", "5", "--preset", "uniform-c4"],
    ["sweep", "--k-range", "1..4"],
    ["highrate"],
    ["populations"],
    ["verify", "--n", "200000", "--seed", "3"],
])
def test_deterministic(argv):
    assert run(argv) == run(argv)
