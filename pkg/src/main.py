"""
Command-line entry point for molopt.
"""
import sys
from typing import Optional, Sequence

from loguru import logger

from src.cli.commands import build_parser, dispatch
from src.config.settings import validate_config
from src.core.errors import MoloptError
from src.core.logger import setup_logging


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parses argv, runs the subcommand and maps failures to exit codes.

    Returns:
        int: 0 on success, 1 on validation errors, 2 on numeric failures
    """
    is_valid, error_message = validate_config()
    if not is_valid:
        logger.error(error_message)
        return 1

    try:
        args = build_parser().parse_args(argv)
        setup_logging(level=args.log_level, log_dir=args.log_dir)
        return dispatch(args)
    except MoloptError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return 1
    except SystemExit as e:
        # --help / --version
        return e.code if isinstance(e.code, int) else 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
