"""ODE Recon - 由采样轨迹重构常微分方程右端"""

__version__ = "1.0.0"
