"""日志配置模块"""

import os
import sys
import logging
from typing import Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - [%(process)d:%(threadName)s] - [%(filename)s:%(lineno)d] - %(message)s'

def setup_logger(
    log_file_path: Optional[str] = None,
    log_level: int = logging.INFO,
    logger_name: Optional[str] = None
) -> logging.Logger:
    """配置并返回带控制台和文件处理器的logger

    控制台输出到标准错误，标准输出只留给协议和报告文本。

    Args:
        log_file_path: 日志文件路径，为None时只输出到控制台
        log_level: 日志级别 (默认: logging.INFO)
        logger_name: logger名称 (默认: None 表示根logger)

    Returns:
        logging.Logger: 配置好的logger
    """
    logger = logging.getLogger(logger_name) if logger_name else logging.getLogger()
    logger.setLevel(log_level)
    formatter = logging.Formatter(LOG_FORMAT, datefmt='%Y-%m-%d %H:%M:%S')

    # 移除现有的处理器
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file_path:
        # 确保日志目录存在
        directory = os.path.dirname(log_file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        file_handler = logging.FileHandler(log_file_path, encoding='utf-8')
        file_handler.setLevel(log_level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger
