import json
import logging
import sys

from ..core.config import settings
from ..core.errors import ErrorCode, MorseLinkError
from .args_parser import parse_arguments
from .commands import COMMANDS
from .run_config import build_run_config

logger = logging.getLogger(__name__)


def _print_error(exc: MorseLinkError) -> None:
    print(json.dumps(exc.to_dict(), ensure_ascii=False))


def main(argv=None) -> int:
    """
    主程序入口

    Returns:
        int: 退出码；0 全部通过，1 有失败报告或运行错误，2 配置错误（UNKNOWN_MODEL / INVALID_CONFIG）
    """
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    try:
        # 解析命令行参数
        args = parse_arguments(argv)
    except ValueError as e:
        _print_error(MorseLinkError(ErrorCode.INVALID_CONFIG, str(e)))
        return 2

    try:
        config = build_run_config(args)
        return COMMANDS[args.command](config)
    except MorseLinkError as e:
        logger.error("%s 失败: %s", args.command, e)
        _print_error(e)
        return e.exit_code
    except KeyboardInterrupt:
        print("\n\n操作被用户中断。")
        return 1


if __name__ == "__main__":
    sys.exit(main())
