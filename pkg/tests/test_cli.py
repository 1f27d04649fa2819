"""End-to-end runs of the command line driver against temp directories."""
import json
import math
import re

import pytest
import yaml

from gibbsdim import cli

LOG2 = math.log(2.0)

# %.11e: sign, one lead digit, 11 decimals, two-or-three digit exponent
FLOAT_RE = re.compile(r"-?\d\.\d{11}e[+-]\d{2,3}$")


def write_cfg(tmp_path, name, mapping):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(mapping), encoding="utf-8")
    return str(path)


def read_csv(path):
    comments, header, rows = [], None, []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            comments.append(line)
        elif header is None:
            header = line.split(",")
        else:
            rows.append(dict(zip(header, line.split(","))))
    return comments, header, rows


def load_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_fmt_contract():
    assert cli._fmt(0.5) == "5.00000000000e-01"
    assert cli._fmt(-math.pi) == "-3.14159265359e+00"
    assert cli._fmt(float("nan")) == ""
    assert cli._fmt(None) == ""
    assert cli._fmt(True) == "1"
    assert cli._fmt(7) == "7"


def test_pressure_default_config(tmp_path):
    out = tmp_path / "runs" / "p"
    code = cli.main(["pressure", "--out", str(out), "--no-plot"])
    assert code == 0
    comments, header, rows = read_csv(out / "pressure.csv")
    assert comments and all(c.startswith("# ") for c in comments)
    assert header == ["n", "P_n", "gap"]
    assert rows[0]["n"] == "2" and rows[0]["gap"] == ""
    final = float(rows[-1]["P_n"])
    assert final == pytest.approx(math.log(2.0 ** 18 - 1) / 18, abs=1e-12)
    assert abs(final - LOG2) < 1e-5
    for row in rows:
        assert FLOAT_RE.fullmatch(row["P_n"])
        assert row["gap"] == "" or FLOAT_RE.fullmatch(row["gap"])
    summary = load_json(out / "pressure_summary.json")
    assert summary["pressure"] == pytest.approx(final, abs=1e-12)
    assert summary["transfer_pressure"] == pytest.approx(LOG2, abs=1e-9)
    manifest = load_json(out / "manifest.json")
    assert manifest["command"] == "pressure"
    assert manifest["seed"] == 0
    assert manifest["outputs"] == ["pressure.csv", "pressure_summary.json"]
    assert not (out / "pressure.png").exists()


def test_pressure_renders_figure(tmp_path):
    out = tmp_path / "fig"
    assert cli.main(["pressure", "--out", str(out)]) == 0
    assert (out / "pressure.png").exists()
    manifest = load_json(out / "manifest.json")
    assert "pressure.png" in manifest["outputs"]


def test_classify_product_contract(tmp_path):
    out = tmp_path / "cls"
    code = cli.main(["classify", "--out", str(out), "--seed", "3",
                     "--no-plot"])
    assert code == 0
    summary = load_json(out / "classify_summary.json")
    assert summary["d_prime"] == 2
    assert summary["regime"] == "expanding"
    assert summary["delta"] == summary["delta_formula"]
    assert abs(summary["delta"] - 1.0) < 5e-4
    assert summary["hausdorff_dimension"] == summary["delta_formula"]
    _, header, rows = read_csv(out / "classify.csv")
    assert header == ["sample", "count_strict", "count_loose",
                      "ambiguous"]
    assert len(rows) == 100
    assert all(r["count_strict"] == "2" for r in rows)
    assert all(r["ambiguous"] == "0" for r in rows)


DIM_CFG = {
    "map": {"family": "product", "c": 0.1},
    "dimension": {"d_prime": 2, "n_min": 1, "n_max": 5},
    "sampling": {"samples": 8_000_000},
}


def run_dimension(tmp_path, sub, seed):
    cfg = write_cfg(tmp_path, "dim.yaml", DIM_CFG)
    out = tmp_path / sub
    code = cli.main(["dimension", "--config", cfg, "--out", str(out),
                     "--seed", str(seed), "--no-plot"])
    assert code == 0
    return out


def test_dimension_run_and_determinism(tmp_path):
    a = run_dimension(tmp_path, "a", 12)
    b = run_dimension(tmp_path, "b", 12)
    assert (a / "dimension.csv").read_bytes() \
        == (b / "dimension.csv").read_bytes()
    assert (a / "dimension_summary.json").read_bytes() \
        == (b / "dimension_summary.json").read_bytes()
    ma = load_json(a / "manifest.json")
    mb = load_json(b / "manifest.json")
    ma.pop("timestamp"), mb.pop("timestamp")
    assert ma == mb

    comments, header, rows = read_csv(a / "dimension.csv")
    assert header == ["n", "k", "rho", "log_mu_formula", "log_mu_mc",
                      "slope_partial"]
    assert [r["n"] for r in rows] == ["1", "2", "3", "4", "5"]
    assert rows[0]["slope_partial"] == ""
    for r in rows:
        for col in ("rho", "log_mu_formula", "log_mu_mc"):
            assert FLOAT_RE.fullmatch(r[col]), (col, r[col])
    summary = load_json(a / "dimension_summary.json")
    assert summary["d_prime"] == 2
    assert summary["regime"] == "expanding"
    assert abs(summary["delta_formula"] - 1.0) < 5e-4
    assert abs(summary["delta_empirical"] - 1.0) < 0.1
    assert summary["half_width"] > 0
    for key in ("chi_s", "chi_u", "entropy", "k_ratio", "pressure"):
        assert key in summary


def test_dimension_seed_changes_samples(tmp_path):
    a = run_dimension(tmp_path, "a", 12)
    c = run_dimension(tmp_path, "c", 13)
    assert (a / "dimension.csv").read_bytes() \
        != (c / "dimension.csv").read_bytes()


def test_ball_measure_table(tmp_path):
    cfg = write_cfg(tmp_path, "bm.yaml", {
        "map": {"family": "product", "c": 0.1},
        "ball_measure": {"n_max": 4, "k_max": 6, "d_prime": 2},
    })
    out = tmp_path / "bm"
    code = cli.main(["ball-measure", "--config", cfg, "--out", str(out),
                     "--seed", "2", "--no-plot"])
    assert code == 0
    _, header, rows = read_csv(out / "ball_measure.csv")
    assert header == ["n", "k", "log_mu", "mu"]
    assert len(rows) == 24
    for r in rows:
        assert float(r["mu"]) == pytest.approx(
            math.exp(float(r["log_mu"])), rel=1e-11)


def test_jacobian_summary(tmp_path):
    cfg = write_cfg(tmp_path, "jac.yaml", {
        "map": {"family": "product", "c": 0.1},
        "jacobian": {"m_values": [1, 2], "trials": 10, "d_prime": 2},
    })
    out = tmp_path / "jac"
    code = cli.main(["jacobian", "--config", cfg, "--out", str(out),
                     "--seed", "5", "--no-plot"])
    assert code == 0
    summary = load_json(out / "jacobian_summary.json")
    assert summary["estimates"]["m=1"]["expected"] == 2
    assert summary["estimates"]["m=2"]["expected"] == 4
    assert summary["estimates"]["m=1"]["geo_mean"] \
        == pytest.approx(2.0, rel=1e-9)
    assert summary["estimates"]["m=2"]["geo_mean"] \
        == pytest.approx(4.0, rel=1e-9)
    _, _, rows = read_csv(out / "jacobian.csv")
    assert len(rows) == 20


def test_bowen_root_run(tmp_path):
    cfg = write_cfg(tmp_path, "br.yaml", {
        "map": {"family": "product", "c": 0.1},
        "bowen_root": {"d_prime": 1, "order": 14},
    })
    out = tmp_path / "br"
    code = cli.main(["bowen-root", "--config", cfg, "--out", str(out),
                     "--no-plot"])
    assert code == 0
    summary = load_json(out / "bowen_root_summary.json")
    assert summary["flag"] == "bracketed"
    assert 0.4 < summary["root"] < 0.5


# -- exit taxonomy ---------------------------------------------------------


def test_exit_2_unknown_key(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "bad.yaml",
                    {"map": {"family": "product", "zz": 1.0}})
    assert cli.main(["pressure", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_exit_2_missing_seed(tmp_path):
    assert cli.main(["dimension", "--out", str(tmp_path / "o"),
                     "--no-plot"]) == 2


def test_exit_2_missing_config_file(tmp_path):
    assert cli.main(["pressure", "--config",
                     str(tmp_path / "nope.yaml"),
                     "--out", str(tmp_path / "o")]) == 2


def test_exit_2_no_attracting_fixed_point(tmp_path):
    cfg = write_cfg(tmp_path, "c9.yaml",
                    {"map": {"family": "product", "c": 0.9}})
    assert cli.main(["pressure", "--config", cfg,
                     "--out", str(tmp_path / "o"), "--no-plot"]) == 2


def test_exit_3_inadmissible_potential(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "adm.yaml", {
        "map": {"family": "perturbed", "c": 0.1, "b": 1.0,
                "eps": 1.0e-3},
        "potential": {"variant": "stable_log",
                      "parameters": {"t": -150.0}},
    })
    assert cli.main(["lyapunov", "--config", cfg,
                     "--out", str(tmp_path / "o"), "--no-plot"]) == 3
    assert "admissibility failure" in capsys.readouterr().err


def test_exit_4_unsettled_branch_count(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "fat.yaml", {
        "map": {"family": "perturbed", "c": 0.1, "b": 1.0,
                "eps": 1.0e-3},
        "basic_set": {"tol": 0.009},
        "dimension": {"d_prime": "auto"},
    })
    assert cli.main(["dimension", "--config", cfg,
                     "--out", str(tmp_path / "o"), "--seed", "11",
                     "--no-plot"]) == 4
    assert "non-convergence" in capsys.readouterr().err
