"""命令行入口

退出码: 0 成功; 1 阶段失败或 Gauss-Newton 未收敛; 2 用法/配置错误或模型不可积。
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from ..core.models import PipelineError
from ..core.node_config import StageConfigManager
from ..recon.errors import ConvergenceError
from ..recon.integrate import Verdict
from ..utils.logger import setup_logger
from .config import ConfigError, RunConfig, load_run_config
from .pipelines import ReconstructionService, create_engine

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def build_parser(defaults: Optional[RunConfig] = None) -> argparse.ArgumentParser:
    """构建解析器；帮助文本中的默认值取自当前环境"""
    d = defaults or RunConfig()
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="由采样轨迹重构常微分方程 y' = f(y) 的右端",
    )
    parser.add_argument("--config", help="YAML 运行配置文件，覆盖环境变量")
    parser.add_argument("--log-file", default=os.getenv("LOG_FILE_PATH"),
                        help="日志文件路径 (默认: 环境变量 LOG_FILE_PATH，未设置则不写文件)")
    parser.add_argument("--log-level", default=os.getenv("LOG_LEVEL", "INFO").upper(),
                        choices=LOG_LEVELS, help="日志级别 (默认: %(default)s)")
    commands = parser.add_subparsers(dest="command", required=True, metavar="<command>")

    def cheb_options(p: argparse.ArgumentParser):
        p.add_argument("--nodes", type=int, help=f"Chebyshev节点个数 M+1 (默认: {d.cheb_nodes})")
        p.add_argument("--truncation", type=int,
                       help=f"保留的Chebyshev系数个数 (默认: {d.cheb_truncation or '不截断'})")

    def integrator_options(p: argparse.ArgumentParser):
        p.add_argument("--rtol", type=float, help=f"积分相对容差 (默认: {d.integrator.rtol})")
        p.add_argument("--atol", type=float, help=f"积分绝对容差 (默认: {d.integrator.atol})")

    p = commands.add_parser("approx", help="Chebyshev拟合并输出级数与导数")
    p.add_argument("data", help="数据 CSV")
    p.add_argument("--out", required=True, help="输出 CSV")
    cheb_options(p)
    p.add_argument("--points", type=int, default=200, help="输出的等距点个数 (默认: %(default)s)")
    p.add_argument("--plot-script", help="gnuplot 脚本输出路径")

    p = commands.add_parser("reconstruct", help="完整重构流程，输出运行协议")
    p.add_argument("data", help="数据 CSV")
    p.add_argument("--degree", type=int, help=f"单项式最高总次数 (默认: {d.max_degree})")
    p.add_argument("--no-constant", action="store_true", default=None, help="去掉常数项")
    cheb_options(p)
    p.add_argument("--grid-size", type=int, help=f"Gram方程组采样点数 m (默认: {d.solve_grid_size})")
    p.add_argument("--grid", choices=("equidistant", "chebyshev"), help=f"采样网格 (默认: {d.solve_grid})")
    p.add_argument("--threshold", type=float, help=f"百分比阈值 (默认: {d.threshold_pct})")
    p.add_argument("--refit", action="store_true", default=None, help="阈值化后在活跃项上重新拟合")
    p.add_argument("--model-out", help="模型 YAML 输出路径")
    p.add_argument("--report", help="协议文本输出路径")

    p = commands.add_parser("verify", help="积分重构模型并与数据比较")
    p.add_argument("data", help="数据 CSV")
    p.add_argument("model", help="模型 YAML")
    p.add_argument("--out", required=True, help="对比 CSV (t, 数据列, 模型列)")
    p.add_argument("--report", help="验证摘要输出路径")
    p.add_argument("--rms-tol", type=float,
                   help=f"验证通过的RMS上限 (默认: {d.verify_rms_tolerance or '不判定'})")
    integrator_options(p)
    p.add_argument("--plot-script", help="gnuplot 脚本输出路径")

    p = commands.add_parser("refine", help="Gauss-Newton 精化活跃系数")
    p.add_argument("data", help="数据 CSV")
    p.add_argument("model", help="模型 YAML")
    p.add_argument("--ptol", type=float, help=f"要求的相对精度 (默认: {d.gn.ptol})")
    p.add_argument("--max-iter", type=int, help=f"最大迭代步数 (默认: {d.gn.max_iter})")
    p.add_argument("--fc-start", type=float, help=f"初始阻尼因子 (默认: {d.gn.fc_start})")
    p.add_argument("--fc-min", type=float, help=f"最小阻尼因子 (默认: {d.gn.fc_min})")
    p.add_argument("--fd-step", type=float, help=f"有限差分相对步长 (默认: {d.gn.fd_step})")
    integrator_options(p)
    p.add_argument("--model-out", help="精化后模型 YAML 输出路径")
    p.add_argument("--report", help="迭代报告输出路径")
    p.add_argument("--json", help="机器可读结果 JSON 输出路径")

    p = commands.add_parser("gen-pendulum", help="生成阻尼单摆数据")
    p.add_argument("--out", required=True, help="输出 CSV")
    p.add_argument("--u", type=float, default=0.25, help="阻尼系数 (默认: %(default)s)")
    p.add_argument("--l", type=float, default=2.0, help="摆长 (默认: %(default)s)")
    p.add_argument("--g", type=float, default=9.81, help="重力加速度 (默认: %(default)s)")
    p.add_argument("--theta0", type=float, default=1.0, help="初始角度 (默认: %(default)s)")
    p.add_argument("--omega0", type=float, default=0.0, help="初始角速度 (默认: %(default)s)")
    p.add_argument("--t-end", type=float, default=10.0, help="终止时间 (默认: %(default)s)")
    p.add_argument("--samples", type=int, default=49, help="等距样本数 (默认: %(default)s)")
    p.add_argument("--plot-script", help="gnuplot 脚本输出路径")

    p = commands.add_parser("gen-lotka-volterra", help="生成捕食者-猎物数据")
    p.add_argument("--out", required=True, help="输出 CSV")
    p.add_argument("--alpha", type=float, default=0.5475337, help="猎物增长率 (默认: %(default)s)")
    p.add_argument("--beta", type=float, default=0.02811932, help="捕食率 (默认: %(default)s)")
    p.add_argument("--gamma", type=float, default=0.843175, help="捕食者死亡率 (默认: %(default)s)")
    p.add_argument("--delta", type=float, default=0.02655759, help="捕食者增长率 (默认: %(default)s)")
    p.add_argument("--prey0", type=float, default=30.0, help="初始猎物数 (默认: %(default)s)")
    p.add_argument("--pred0", type=float, default=4.0, help="初始捕食者数 (默认: %(default)s)")
    p.add_argument("--t0", type=float, default=1900.0, help="起始时间 (默认: %(default)s)")
    p.add_argument("--t-end", type=float, default=1920.0, help="终止时间 (默认: %(default)s)")
    p.add_argument("--samples", type=int, default=21, help="等距样本数 (默认: %(default)s)")
    p.add_argument("--plot-script", help="gnuplot 脚本输出路径")

    commands.add_parser("stages", help="列出已注册的流水线阶段")
    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """把命令行参数映射到 RunConfig 的键；未给出的参数为 None，由 load_run_config 忽略"""
    def get(name: str):
        return getattr(args, name, None)

    no_constant = get("no_constant")
    return {
        "cheb_nodes": get("nodes"),
        "cheb_truncation": get("truncation"),
        "max_degree": get("degree"),
        "include_constant": False if no_constant else None,
        "solve_grid_size": get("grid_size"),
        "solve_grid": get("grid"),
        "threshold_pct": get("threshold"),
        "refit_after_threshold": get("refit"),
        "verify_rms_tolerance": get("rms_tol"),
        "integrator": {"rtol": get("rtol"), "atol": get("atol")},
        "gn": {
            "ptol": get("ptol"),
            "max_iter": get("max_iter"),
            "fc_start": get("fc_start"),
            "fc_min": get("fc_min"),
            "fd_step": get("fd_step"),
        },
    }


def dispatch(args: argparse.Namespace, service: ReconstructionService) -> int:
    command = args.command
    if command == "approx":
        outputs = service.approx(args.data, args.out, args.points, args.plot_script)
        print(f"wrote {outputs['write_csv']['path']}")
    elif command == "reconstruct":
        outputs = service.reconstruct(args.data, args.model_out, args.report)
        sys.stdout.write(outputs["threshold"]["protocol"])
    elif command == "verify":
        outputs = service.verify(args.data, args.model, args.out, args.report, args.plot_script)
        sys.stdout.write(outputs["verify"]["summary"])
        if outputs["verify"]["report"].verdict is Verdict.NOT_INTEGRABLE:
            return EXIT_USAGE
    elif command == "refine":
        outputs = service.refine(args.data, args.model, args.model_out, args.report, args.json)
        sys.stdout.write(outputs["refine"]["report"])
        try:
            outputs["refine"]["result"].raise_for_failure()
        except ConvergenceError as e:
            print(f"refine: {e}", file=sys.stderr)
            return EXIT_FAILURE
    elif command == "gen-pendulum":
        outputs = service.generate("pendulum", args.out, {
            "u": args.u, "l": args.l, "g": args.g, "y0": (args.theta0, args.omega0),
            "t_end": args.t_end, "n_samples": args.samples,
        }, args.plot_script)
        print(f"wrote {outputs['write_csv']['path']}")
    elif command == "gen-lotka-volterra":
        outputs = service.generate("lotka_volterra", args.out, {
            "alpha": args.alpha, "beta": args.beta, "gamma": args.gamma, "delta": args.delta,
            "y0": (args.prey0, args.pred0), "t0": args.t0, "t_end": args.t_end,
            "n_samples": args.samples,
        }, args.plot_script)
        print(f"wrote {outputs['write_csv']['path']}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    try:
        parser = build_parser()
    except ValueError as e:
        print(f"config: 环境变量中的默认值不合法: {e}", file=sys.stderr)
        return EXIT_USAGE
    args = parser.parse_args(argv)
    setup_logger(args.log_file, getattr(logging, args.log_level))

    if args.command == "stages":
        print(StageConfigManager().get_stages_description())
        return EXIT_OK

    try:
        config = load_run_config(args.config, config_overrides(args))
    except ConfigError as e:
        print(f"config: {e}", file=sys.stderr)
        return EXIT_USAGE

    service = ReconstructionService(create_engine(), config)
    try:
        return dispatch(args, service)
    except PipelineError as e:
        print(f"{e.stage}: {e.message}", file=sys.stderr)
        return EXIT_FAILURE
