"""命令行端到端测试: 生成数据、重构、验证、精化和配置优先级"""

from __future__ import annotations

import json
import logging
import os
import re
import sys

import numpy as np
import pandas as pd
import pytest
import yaml

from src.cli.commands import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, config_overrides, main
from src.cli.config import ConfigError, load_run_config
from src.cli.pipelines import ReconstructionService, create_engine
from src.recon.basis import MonomialBasis
from src.recon.model import RecoveredModel

RESIDUAL_LINE = re.compile(r"LSQ: \|\|residual/sqrt\(n\)\|\|_2 = (\S+)")

PENDULUM_RECONSTRUCT = [
    "--degree", "4", "--nodes", "80", "--truncation", "62",
    "--grid-size", "250", "--threshold", "5",
]


def _load_model(path):
    with open(path, "r", encoding="utf-8") as f:
        return RecoveredModel.from_dict(yaml.safe_load(f))


def _active_terms(model, k):
    return {
        idx.exponents: model.coeffs[k, j]
        for j, idx in enumerate(model.basis.indices)
        if model.active[k, j]
    }


@pytest.fixture
def pendulum_files(tmp_path):
    data = tmp_path / "pendulum.csv"
    model = tmp_path / "pendulum_model.yaml"
    assert main(["gen-pendulum", "--out", str(data)]) == EXIT_OK
    assert main(["reconstruct", str(data), *PENDULUM_RECONSTRUCT, "--model-out", str(model)]) == EXIT_OK
    return data, model


# ======================================================================
# Data generation
# ======================================================================

class TestGenerate:

    def test_pendulum_csv(self, tmp_path, capsys):
        out = tmp_path / "pendulum.csv"
        assert main(["gen-pendulum", "--out", str(out)]) == EXIT_OK
        assert f"wrote {out}" in capsys.readouterr().out
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "t,theta1,theta2"
        assert len(lines) == 50
        assert lines[1] == "0,1,0"

    def test_predator_prey_csv_with_plot_script(self, tmp_path):
        out = tmp_path / "lv.csv"
        script = tmp_path / "lv.gp"
        assert main(["gen-lotka-volterra", "--out", str(out), "--plot-script", str(script)]) == EXIT_OK
        frame = pd.read_csv(out)
        assert list(frame.columns) == ["t", "hare", "lynx"]
        assert len(frame) == 21
        text = script.read_text(encoding="utf-8")
        assert '"lv.csv" using 1:2 with points' in text
        assert 'title "lynx"' in text
        assert "set output" not in text
        assert text.rstrip().endswith('pause -1 "按回车键退出"')


# ======================================================================
# approx
# ======================================================================

def test_approx_table(tmp_path, pendulum_csv):
    out = tmp_path / "approx.csv"
    assert main(["approx", str(pendulum_csv), "--out", str(out), "--points", "50", "--truncation", "62"]) == EXIT_OK
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["t", "theta1", "dtheta1", "theta2", "dtheta2"]
    assert len(frame) == 50
    # θ1' = θ2
    assert np.sqrt(np.mean((frame["dtheta1"] - frame["theta2"]) ** 2)) <= 0.1


# ======================================================================
# reconstruct + verify on the damped pendulum
# ======================================================================

class TestPendulumReconstruction:

    def test_recovered_equations(self, tmp_path, pendulum_csv, capsys):
        model_path = tmp_path / "model.yaml"
        report_path = tmp_path / "protocol.txt"
        code = main([
            "reconstruct", str(pendulum_csv), *PENDULUM_RECONSTRUCT,
            "--model-out", str(model_path), "--report", str(report_path),
        ])
        assert code == EXIT_OK
        protocol = capsys.readouterr().out
        assert protocol == report_path.read_text(encoding="utf-8")
        assert protocol.startswith("#total = 25   (max. deg. 4)")

        model = _load_model(model_path)
        assert model.component_names == ["theta1", "theta2"]

        theta1 = _active_terms(model, 0)
        assert theta1[(0, 1)] == pytest.approx(1.0, abs=0.05)
        assert max(theta1.values(), key=abs) == theta1[(0, 1)]
        for exponents, value in theta1.items():
            if exponents != (0, 1):
                assert abs(value) < 0.2 * theta1[(0, 1)]

        # 49 个样本线性重采样到 80 个节点，θ2' 的活跃集除了阻尼、线性和三次项外可能多出小项
        theta2 = _active_terms(model, 1)
        assert {(0, 1), (1, 0), (3, 0)} <= set(theta2)
        assert theta2[(0, 1)] == pytest.approx(-0.25, rel=0.15)
        assert theta2[(1, 0)] == pytest.approx(-4.9, rel=0.15)
        assert theta2[(3, 0)] == pytest.approx(9.81 / 12.0, rel=0.25)

        residuals = [float(v) for v in RESIDUAL_LINE.findall(protocol)]
        assert len(residuals) == 2
        for found, reference in zip(residuals, (0.0356, 0.0453)):
            assert reference / 3 <= found <= reference * 3

    def test_verify_writes_comparison(self, tmp_path, pendulum_files, capsys):
        data, model = pendulum_files
        out = tmp_path / "compare.csv"
        script = tmp_path / "compare.gp"
        code = main([
            "verify", str(data), str(model), "--out", str(out),
            "--rms-tol", "0.05", "--plot-script", str(script),
        ])
        assert code == EXIT_OK
        assert "verdict: verified" in capsys.readouterr().out
        frame = pd.read_csv(out)
        assert list(frame.columns) == ["t", "theta1", "theta2", "theta1_model", "theta2_model"]
        assert len(frame) == 49
        for name in ("theta1", "theta2"):
            rms = np.sqrt(np.mean((frame[name] - frame[f"{name}_model"]) ** 2))
            assert rms <= 0.05
        assert '"compare.csv"' in script.read_text(encoding="utf-8")

    def test_verify_unchecked_without_tolerance(self, tmp_path, pendulum_files, capsys):
        data, model = pendulum_files
        assert main(["verify", str(data), str(model), "--out", str(tmp_path / "c.csv")]) == EXIT_OK
        assert "verdict: unchecked" in capsys.readouterr().out


# ======================================================================
# Failure modes
# ======================================================================

class TestFailures:

    def test_explosive_model_not_integrable(self, tmp_path, capsys):
        data = tmp_path / "flat.csv"
        data.write_text("t,y\n" + "".join(f"{t},1\n" for t in range(11)), encoding="utf-8")
        basis = MonomialBasis(1, 3, include_constant=False)
        coeffs = np.array([[0.0, 0.0, 1.0]])
        model = RecoveredModel(basis, coeffs, 0.0, coeffs != 0.0, (0.0, 10.0), ["y"])
        model_path = tmp_path / "cubic.yaml"
        model_path.write_text(yaml.safe_dump(model.to_dict()), encoding="utf-8")
        out = tmp_path / "compare.csv"

        code = main(["verify", str(data), str(model_path), "--out", str(out)])
        assert code == EXIT_USAGE
        assert "model not integrable" in capsys.readouterr().out
        assert not out.exists()

    def test_missing_data_file(self, tmp_path, capsys):
        code = main(["reconstruct", str(tmp_path / "missing.csv")])
        assert code == EXIT_FAILURE
        assert capsys.readouterr().err.strip().splitlines()[-1].startswith("load: ")

    def test_model_dimension_mismatch(self, tmp_path, pendulum_files, capsys):
        _, model = pendulum_files
        data = tmp_path / "single.csv"
        data.write_text("t,y\n0,1\n1,2\n2,3\n", encoding="utf-8")
        code = main(["verify", str(data), str(model), "--out", str(tmp_path / "c.csv")])
        assert code == EXIT_FAILURE
        assert capsys.readouterr().err.strip().splitlines()[-1].startswith("model: ")

    @pytest.mark.parametrize("command", ["verify", "refine"])
    def test_reordered_columns_rejected(self, tmp_path, pendulum_files, command, capsys):
        data, model = pendulum_files
        swapped = tmp_path / "swapped.csv"
        pd.read_csv(data)[["t", "theta2", "theta1"]].to_csv(swapped, index=False)
        out = tmp_path / "c.csv"
        capsys.readouterr()

        args = [command, str(swapped), str(model)]
        if command == "verify":
            args += ["--out", str(out)]
        assert main(args) == EXIT_FAILURE
        assert capsys.readouterr().err.strip().splitlines()[-1].startswith("model: ")
        assert not out.exists()

    def test_invalid_truncation_is_a_usage_error(self, pendulum_csv, capsys):
        code = main(["reconstruct", str(pendulum_csv), "--nodes", "10", "--truncation", "20"])
        assert code == EXIT_USAGE
        assert "config: " in capsys.readouterr().err

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["smooth"])
        assert excinfo.value.code == EXIT_USAGE


# ======================================================================
# Logging
# ======================================================================

def _console_handlers():
    return [h for h in logging.getLogger().handlers if type(h) is logging.StreamHandler]


class TestLogging:

    def test_console_handler_writes_to_stderr(self, tmp_path, capsys):
        assert main(["--log-level", "INFO", "gen-pendulum", "--out", str(tmp_path / "p.csv")]) == EXIT_OK
        handlers = _console_handlers()
        assert len(handlers) == 1
        assert handlers[0].stream is sys.stderr
        captured = capsys.readouterr()
        assert "生成单摆数据" in captured.err
        assert "生成单摆数据" not in captured.out

    def test_no_console_handler_left_by_previous_run(self):
        assert _console_handlers() == []


# ======================================================================
# refine
# ======================================================================

def test_refine_predator_prey(tmp_path, capsys):
    data = tmp_path / "lv.csv"
    model = tmp_path / "lv_model.yaml"
    report = tmp_path / "lv_refine.txt"
    payload = tmp_path / "lv_refine.json"
    assert main(["gen-lotka-volterra", "--out", str(data)]) == EXIT_OK
    assert main([
        "reconstruct", str(data), "--degree", "2", "--no-constant", "--truncation", "11",
        "--grid-size", "150", "--threshold", "0", "--model-out", str(model),
    ]) == EXIT_OK
    capsys.readouterr()

    code = main([
        "refine", str(data), str(model), "--rtol", "1e-7", "--atol", "1e-7",
        "--report", str(report), "--json", str(payload),
    ])
    assert code == EXIT_OK
    text = report.read_text(encoding="utf-8")
    assert "    It       Normf               Normx       Damp.Fct." in text
    assert " Number of parameters to be estimated (N) :   10" in text
    result = json.loads(payload.read_text(encoding="utf-8"))
    assert len(result["parameters"]) == 10
    assert result["parameters"][0] == ["hare", "[0, 1]"]
    assert result["converged"] is True
    assert 0.0 <= result["kappa"] < 1.0
    assert result["normf"] <= result["iterations"][0]["normf"]


@pytest.mark.skipif(not os.getenv("HARE_LYNX_CSV"), reason="需要用户提供 Hudson Bay 野兔-猞猁数据 (HARE_LYNX_CSV)")
def test_hare_lynx_refinement(tmp_path):
    config = load_run_config(overrides={
        "max_degree": 2, "include_constant": False, "cheb_nodes": 80, "cheb_truncation": 11,
        "solve_grid_size": 150, "threshold_pct": 0.0,
    })
    service = ReconstructionService(create_engine(), config)
    model_path = tmp_path / "model.yaml"
    outputs = service.reconstruct(os.environ["HARE_LYNX_CSV"], model_out=str(model_path))
    assert outputs["threshold"]["model"].active.sum() == 10

    refined = service.refine(os.environ["HARE_LYNX_CSV"], str(model_path))["refine"]["result"]
    assert refined.converged
    assert refined.normf == pytest.approx(3.071, rel=0.10)


# ======================================================================
# Configuration
# ======================================================================

class TestConfiguration:

    def test_precedence_env_file_flags(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MAX_DEGREE", "1")
        monkeypatch.setenv("THRESHOLD_PCT", "2.5")
        config_file = tmp_path / "run.yaml"
        config_file.write_text("max_degree: 2\ngn:\n  ptol: 0.01\n", encoding="utf-8")

        assert load_run_config().max_degree == 1
        from_file = load_run_config(config_file)
        assert from_file.max_degree == 2
        assert from_file.threshold_pct == 2.5
        assert from_file.gn.ptol == 0.01
        assert from_file.gn.max_iter == 40

        args = build_parser().parse_args(["--config", str(config_file), "reconstruct", "x.csv", "--degree", "3"])
        assert load_run_config(args.config, config_overrides(args)).max_degree == 3

    def test_unknown_key(self, tmp_path):
        config_file = tmp_path / "run.yaml"
        config_file.write_text("max_degre: 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_run_config(config_file)

    def test_invalid_value(self, tmp_path):
        config_file = tmp_path / "run.yaml"
        config_file.write_text("gn:\n  fc_start: 0.001\n  fc_min: 0.01\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_run_config(config_file)

    def test_bad_config_file_exit_code(self, tmp_path, pendulum_csv, capsys):
        config_file = tmp_path / "run.yaml"
        config_file.write_text("- not\n- a mapping\n", encoding="utf-8")
        assert main(["--config", str(config_file), "reconstruct", str(pendulum_csv)]) == EXIT_USAGE
        assert "config:" in capsys.readouterr().err


def test_stages_command(capsys):
    assert main(["stages"]) == EXIT_OK
    out = capsys.readouterr().out
    for stage_type in ("load_dataset", "cheb_approx", "refine_model", "plot_script"):
        assert f"Type: {stage_type}" in out
