# app/main.py：命令列程式的主要入口
# 子命令定義在 app/cli/commands/；領域例外在此統一轉換為結束碼。

import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.cli.commands import cells, deodhar, fibre, verify
from app.exceptions import BottSamelsonError, InvalidInput
from app.logging_config import get_logger, setup_logging
from app.schemas import RunConfig

logger = get_logger("cli")

COMMANDS = {
    "cells": cells,
    "fibre": fibre,
    "verify": verify,
    "deodhar": deodhar,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bott-samelson",
        description="Bott-Samelson 簇的胞腔分解與解消映射纖維的計算工具",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in COMMANDS.values():
        module.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    執行一次命令並回傳結束碼。報告完整建立後才寫到 stdout，失敗時 stdout 不會有任何輸出。

    結束碼：0 成功、2 輸入錯誤、3 非約化字、4 點不在簇中、5 驗證不一致、
    6 超過上限、7 不支援的類型、8 符號未決定、9 結構或不變量錯誤。
    """
    setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse 在參數錯誤時以 2 結束，--help 時以 0 結束
        return exc.code if isinstance(exc.code, int) else InvalidInput.exit_code

    try:
        config = RunConfig(**vars(args))
        output = COMMANDS[config.command].run(config)
    except ValidationError as exc:
        print(f"輸入錯誤：{exc.errors()[0]['msg']}", file=sys.stderr)
        return InvalidInput.exit_code
    except BottSamelsonError as exc:
        logger.info("%s: %s", type(exc).__name__, exc.detail)
        print(f"錯誤：{exc.detail}", file=sys.stderr)
        return exc.exit_code

    print(output)
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
