"""由采样轨迹重构显式常微分方程右端的数值库"""

from .basis import MonomialBasis, MultiIndex
from .chebapprox import ChebSeries, SampledSignal
from .errors import (
    ConvergenceError,
    DatasetError,
    DimensionError,
    DomainError,
    IntegrationError,
    InvalidSignalError,
    RankDeficiencyError,
    ReconstructionError,
)
from .gaussnewton import FitProblem, GnConfig, GnResult
from .integrate import IvpProblem, Trajectory, VerificationReport, Verdict
from .lsq import GramSystem, LsqSolution
from .model import RecoveredModel

__all__ = [
    "ChebSeries",
    "ConvergenceError",
    "DatasetError",
    "DimensionError",
    "DomainError",
    "FitProblem",
    "GnConfig",
    "GnResult",
    "GramSystem",
    "IntegrationError",
    "InvalidSignalError",
    "IvpProblem",
    "LsqSolution",
    "MonomialBasis",
    "MultiIndex",
    "RankDeficiencyError",
    "RecoveredModel",
    "ReconstructionError",
    "SampledSignal",
    "Trajectory",
    "VerificationReport",
    "Verdict",
]
