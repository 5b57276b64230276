import argparse

from .run_config import SUITES, STRATEGIES


def _common_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)

    parent.add_argument(
        '--config',
        type=str,
        default=None,
        help='TOML 配置文件，键名与命令行参数一致；命令行参数优先'
    )

    parent.add_argument(
        '-m', '--model',
        type=str,
        default=None,
        help='内置模型：CIRCLE-A / CIRCLE-RANDOM / TORUS-C / SPHERE-B / ROUND-SPHERE（默认 CIRCLE-A）'
    )

    parent.add_argument(
        '-p', '--param',
        action='append',
        default=None,
        metavar='KEY=VALUE',
        help='模型参数，可重复，例如 --param seed=3 --param m=5'
    )

    parent.add_argument(
        '-r', '--ring',
        type=str,
        default=None,
        help='系数环：Z | Q | Zp:<p>（默认 Z）'
    )

    parent.add_argument(
        '-k', '--degree',
        type=int,
        action='append',
        default=None,
        help='待测度数，可重复（默认 0..n-1）'
    )

    parent.add_argument(
        '--tol',
        type=float,
        default=None,
        help='数值比较容差（默认取配置 DEFAULT_TOL）'
    )

    parent.add_argument(
        '--seed',
        type=int,
        default=None,
        help='随机种子，写入每份报告'
    )

    parent.add_argument(
        '-o', '--out',
        type=str,
        default=None,
        help='输出目录（默认取配置 OUTPUT_DIR）'
    )
    return parent


def parse_arguments(argv=None):
    """
    解析命令行参数

    Args:
        argv: 参数列表，缺省读取 sys.argv

    Returns:
        argparse.Namespace: 解析后的参数对象
    """
    parent = _common_parser()
    parser = argparse.ArgumentParser(
        prog='morselink',
        description='Morse 复形、链接恒等式与链接分离度的校验工具',
        formatter_class=argparse.RawTextHelpFormatter
    )
    commands = parser.add_subparsers(dest='command', required=True)

    verify = commands.add_parser(
        'verify',
        parents=[parent],
        formatter_class=argparse.RawTextHelpFormatter,
        help='运行校验套件并写出 JSON 报告'
    )
    verify.add_argument(
        '-s', '--suite',
        action='append',
        default=None,
        choices=SUITES,
        help='校验套件，可重复（默认 all）：\n'
             '  identities  链层面恒等式\n'
             '  dualm       对偶复形的逐项符号\n'
             '  linklink    链接恒等式\n'
             '  alggeom     β^alg = β^geom\n'
             '  main2       链接矩阵的秩'
    )

    beta = commands.add_parser(
        'beta',
        parents=[parent],
        formatter_class=argparse.RawTextHelpFormatter,
        help='按度数输出 q_k、β^alg、β^geom 下界（表格与 CSV）'
    )
    beta.add_argument(
        '--strategy',
        type=str,
        default=None,
        choices=STRATEGIES,
        help='β^geom 的搜索策略（默认 witness）'
    )

    commands.add_parser(
        'export',
        parents=[parent],
        formatter_class=argparse.RawTextHelpFormatter,
        help='导出复形 JSON、临界点与轨道 CSV、伪边界链 JSON'
    )

    oracle = commands.add_parser(
        'oracle',
        parents=[parent],
        formatter_class=argparse.RawTextHelpFormatter,
        help='圆周组合配置的精确计算'
    )
    oracle.add_argument(
        '-c', '--circle',
        required=True,
        type=str,
        help='圆周配置 TOML（[[components]] points = [{tag, value, mult}]）'
    )

    args = parser.parse_args(argv)

    # 验证数值参数
    if args.tol is not None and args.tol < 0:
        raise ValueError(f"容差不能为负: {args.tol}")
    if args.degree is not None and any(k < 0 for k in args.degree):
        raise ValueError(f"度数不能为负: {args.degree}")

    return args
