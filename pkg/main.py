"""命令行主模块

用法: python main.py [--config FILE] [--log-file PATH] [--log-level LEVEL] <command> ...
"""

import sys

# 加载环境变量，须在读取配置默认值之前
from dotenv import load_dotenv
load_dotenv()

from src.cli.commands import main


if __name__ == "__main__":
    sys.exit(main())
