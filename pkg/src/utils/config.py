"""配置管理模块"""

import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import BaseModel, field_validator

from .exceptions import ConfigError

THREADS_ENV = "SEMIGROUP_LAB_THREADS"


class LoggingConfig(BaseModel):
    level: str = "INFO"
    file: Optional[str] = "logs/semigroup_lab.log"
    format: str = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} | {message}"
    rotation: str = "10 MB"
    retention: str = "7 days"

    @field_validator("level")
    @classmethod
    def level_validation(cls, v: str) -> str:
        allowed = {"TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"}
        if v.upper() not in allowed:
            raise ValueError(f"未知日志级别: {v}")
        return v.upper()


class GridConfig(BaseModel):
    max_nodes: int = 1_000_000
    min_nodes_per_axis: int = 3

    @field_validator("min_nodes_per_axis")
    @classmethod
    def min_nodes_validation(cls, v: int) -> int:
        if v < 3:
            raise ValueError("每个方向至少需要3个节点")
        return v


class NumericsConfig(BaseModel):
    eig_tol: float = 1e-12
    floor: float = 1e-30
    reconstruction_tol: float = 1e-14


class ProbesConfig(BaseModel):
    n_random: int = 100
    n_modes: int = 6
    safety: float = 1.05
    slope_budget: float = 0.25
    offset_cap: float = 1e8
    seed: int = 42

    @field_validator("safety")
    @classmethod
    def safety_validation(cls, v: float) -> float:
        if v < 1.0:
            raise ValueError("安全系数必须不小于1")
        return v


class PropagatorConfig(BaseModel):
    method: str = "auto"
    dense_cap: int = 2000
    dt: float = 1e-3
    max_halvings: int = 8
    scheme_tol: float = 1e-4

    @field_validator("method")
    @classmethod
    def method_validation(cls, v: str) -> str:
        if v not in {"auto", "expm", "crank_nicolson", "implicit_euler"}:
            raise ValueError(f"未知传播子方法: {v}")
        return v


class PowerIterationConfig(BaseModel):
    restarts: int = 8
    max_iter: int = 500
    tol: float = 1e-12


class AuditConfig(BaseModel):
    tol_discr: float = 1e-3


class PerformanceConfig(BaseModel):
    threads: int = 4
    show_progress: bool = True

    @field_validator("threads")
    @classmethod
    def threads_validation(cls, v: int) -> int:
        if v < 1:
            raise ValueError("线程数必须为正")
        return v


class Config:
    """配置管理类"""

    def __init__(self, config_path: Optional[str] = None, data: Optional[Dict[str, Any]] = None):
        self.config_path = config_path or "config/settings.yaml"
        self._config_data: Dict[str, Any] = {}
        if data is not None:
            self._config_data = data
        else:
            self.load_config()

        try:
            self.logging = LoggingConfig(**self._config_data.get("logging", {}))
            self.grid = GridConfig(**self._config_data.get("grid", {}))
            self.numerics = NumericsConfig(**self._config_data.get("numerics", {}))
            self.probes = ProbesConfig(**self._config_data.get("probes", {}))
            self.propagator = PropagatorConfig(**self._config_data.get("propagator", {}))
            self.power_iteration = PowerIterationConfig(**self._config_data.get("power_iteration", {}))
            self.audit = AuditConfig(**self._config_data.get("audit", {}))
            self.performance = PerformanceConfig(**self._config_data.get("performance", {}))
        except ValueError as e:
            raise ConfigError(f"配置字段无效: {e}")

        env_threads = os.environ.get(THREADS_ENV)
        if env_threads:
            try:
                self.performance.threads = max(1, int(env_threads))
            except ValueError:
                raise ConfigError(f"{THREADS_ENV} 必须是整数: {env_threads}")

    @classmethod
    def default(cls) -> "Config":
        """不读取文件，使用内置默认值"""
        return cls(data={})

    def load_config(self) -> None:
        """加载配置文件"""
        config_file = Path(self.config_path)

        if not config_file.exists():
            raise ConfigError(f"配置文件不存在: {self.config_path}")

        try:
            with open(config_file, "r", encoding="utf-8") as f:
                self._config_data = yaml.safe_load(f) or {}
        except Exception as e:
            raise ConfigError(f"加载配置文件失败: {e}")

    def get(self, key: str, default: Any = None) -> Any:
        """获取配置值"""
        keys = key.split(".")
        value: Any = self._config_data

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    @property
    def log_level(self) -> str:
        """获取日志级别"""
        return self.logging.level

    @property
    def log_file(self) -> Optional[str]:
        """获取日志文件路径"""
        return self.logging.file

    def validate(self) -> bool:
        """验证配置完整性"""
        if self.propagator.dense_cap > self.grid.max_nodes:
            raise ConfigError(
                f"dense_cap ({self.propagator.dense_cap}) 不能超过 max_nodes ({self.grid.max_nodes})"
            )
        if self.propagator.dt <= 0 or self.propagator.scheme_tol <= 0:
            raise ConfigError("时间步长与格式容差必须为正")
        if self.probes.slope_budget <= 0:
            raise ConfigError(f"斜率预算必须为正: {self.probes.slope_budget}")
        return True
