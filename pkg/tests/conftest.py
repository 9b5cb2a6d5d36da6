"""共享测试夹具"""

from __future__ import annotations

import logging

import numpy as np
import pytest

from src.cli.dataset import write_dataset
from src.cli.pipelines import create_engine
from src.recon.basis import MonomialBasis
from src.recon.chebapprox import SampledSignal, chebyshev_nodes, fit
from src.recon.integrate import generate_pendulum_data
from src.recon.lsq import assemble, solve
from src.recon.model import threshold


# ======================================================================
# Helpers
# ======================================================================

def signal_at_nodes(func, count, t_min=-1.0, t_max=1.0, name="g"):
    """在 count 个Chebyshev节点和两个端点上采样 func

    fit 在这些节点上插值时恰好落在样本点上，不引入线性插值误差。
    """
    nodes = np.sort(chebyshev_nodes(count, t_min, t_max))
    times = np.concatenate(([t_min], nodes, [t_max]))
    return SampledSignal(times, func(times), name)


def pendulum_reconstruction(signals):
    """d=4, 80 个节点截断到 62, m=250, 阈值 5%"""
    series = [fit(s, 80).truncate(62) for s in signals]
    basis = MonomialBasis(2, 4, include_constant=True)
    system = assemble(series, basis, 250)
    solution = solve(system)
    model = threshold(
        solution, basis, 5.0, (signals[0].t_min, signals[0].t_max), [s.name for s in signals]
    )
    return system, solution, model


# ======================================================================
# Fixtures
# ======================================================================

@pytest.fixture(scope="session")
def pendulum_signals():
    return generate_pendulum_data()


@pytest.fixture(scope="session")
def pendulum_result(pendulum_signals):
    return pendulum_reconstruction(pendulum_signals)


@pytest.fixture
def pendulum_csv(tmp_path, pendulum_signals):
    return write_dataset(tmp_path / "pendulum.csv", pendulum_signals)


@pytest.fixture
def engine():
    return create_engine()


@pytest.fixture(autouse=True)
def reset_root_logger():
    """main() 给根logger装上指向当前 stderr 的处理器，测试结束后移除"""
    root = logging.getLogger()
    level = root.level
    yield
    for handler in root.handlers[:]:
        if not type(handler).__module__.startswith("_pytest"):
            root.removeHandler(handler)
            handler.close()
    root.setLevel(level)
