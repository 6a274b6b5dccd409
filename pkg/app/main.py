"""
预算约束多臂赌博机仿真引擎主应用入口
"""

import argparse
import logging
import sys
from typing import List, Optional

from app import __version__
from app.commands import COMMANDS
from app.config import get_settings
from app.core.exceptions import BanditEngineError

# I/O 错误的退出码
EXIT_IO_ERROR = 4

logger = logging.getLogger(__name__)


def setup_logging(level: Optional[str] = None) -> None:
    """配置日志"""
    logging.basicConfig(
        level=getattr(logging, (level or get_settings().log_level).upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    """创建命令行解析器并注册子命令"""
    parser = argparse.ArgumentParser(
        prog="bandit-engine",
        description="边缘服务器选择的预算约束分段平稳多臂赌博机仿真引擎",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="日志级别（覆盖 LOG_LEVEL）")
    subparsers = parser.add_subparsers(dest="command", metavar="{simulate,sweep,validate,analytic,bound}")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令行入口

    Returns:
        int: 退出码，0 成功；1 内部错误；2 场景错误；3 校验超出容差；4 I/O 错误
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    logger.info(f"🚀 bandit-engine {__version__}: {args.command} {args.scenario}")
    try:
        return args.handler(args) or 0
    except BanditEngineError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_IO_ERROR
    except Exception as e:
        logger.exception(f"❌ 运行失败: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
