#!/usr/bin/env python3
"""
启动脚本 - 运行预算约束多臂赌博机仿真引擎

示例:
    python run.py simulate table2 --reps 100 --parallelism 4
    python run.py bound table2 --tau-grid 500,1000,2000
"""

import os
import sys

# 添加项目根目录到Python路径
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


def main() -> int:
    """主函数"""
    from app.main import main as cli_main

    return cli_main()


if __name__ == "__main__":
    sys.exit(main())
