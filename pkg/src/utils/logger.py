"""日志系统模块"""

import sys
import warnings
from pathlib import Path
from typing import Any, Optional, TextIO, Type, Union

from loguru import logger

from .config import LoggingConfig

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{line}</cyan> | <level>{message}</level>"
)


def _warning_to_log(
    message: Union[Warning, str],
    category: Type[Warning],
    filename: str,
    lineno: int,
    file: Optional[TextIO] = None,
    line: Optional[str] = None,
) -> None:
    # numpy 的 RuntimeWarning、scipy 的 SparseEfficiencyWarning 等
    logger.opt(depth=2).warning(f"{category.__name__}: {message} ({Path(filename).name}:{lineno})")


def setup_logger(settings: LoggingConfig) -> Any:
    """按 logging 配置段安装控制台与文件 sink

    Args:
        settings: 日志配置

    Returns:
        logger对象
    """
    logger.remove()
    logger.add(sys.stderr, level=settings.level, format=CONSOLE_FORMAT, colorize=True)

    target = settings.file
    if target:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            target,
            level=settings.level,
            format=settings.format,
            rotation=settings.rotation,
            retention=settings.retention,
            compression="zip",
            encoding="utf-8",
        )

    warnings.showwarning = _warning_to_log
    logger.debug(f"日志系统初始化完成 (级别 {settings.level}, 文件 {target or '无'})")
    return logger
