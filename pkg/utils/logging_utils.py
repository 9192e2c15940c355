"""
Logging utility for TopoHopf.

One named logger ("TopoHopf") owns the handlers; every module logs through a
child of it obtained with `get_module_logger()`. Records carry a short run
tag (the experiment config hash) so interleaved logs from several result
directories can be told apart.
"""

import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional, Union

NO_RUN = "-"

CONSOLE_FORMAT = "%(asctime)s [%(levelname)s] %(run)s %(name)s: %(message)s"
FILE_FORMAT = "%(asctime)s [%(levelname)s] %(run)s %(name)s (%(filename)s:%(lineno)d): %(message)s"


def to_level(level: Union[str, int], fallback: int = logging.INFO) -> int:
    """Accept 'debug', 'INFO', 20 and friends; unknown names give `fallback`."""
    if isinstance(level, int):
        return level
    value = logging.getLevelName(str(level).upper())
    return value if isinstance(value, int) else fallback


class _RunTag(logging.Filter):
    def __init__(self):
        super().__init__()
        self.tag = NO_RUN

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = self.tag
        return True


class TopoHopfLogger:
    """
    Centralized logger for TopoHopf.

    Modules may ask for a logger before the command line has configured
    anything; they get the console-only default. A later explicit
    `initialize()` swaps the handlers in place, so module loggers pick up the
    requested levels and log file without being recreated.
    """

    _logger: Optional[logging.Logger] = None
    _log_file: Optional[Path] = None
    _run = _RunTag()
    _console_level = logging.WARNING
    _file_level = logging.DEBUG

    @classmethod
    def initialize(cls,
                   app_name: str = "TopoHopf",
                   console_level: Union[str, int] = "WARNING",
                   file_level: Union[str, int] = "DEBUG",
                   log_dir: Optional[Path] = None,
                   log_to_file: bool = False,
                   command: Optional[str] = None) -> logging.Logger:
        """
        Configure (or reconfigure) the console and file handlers.

        Args:
            app_name: Root logger name
            console_level: Minimum level on stderr
            file_level: Minimum level in the log file
            log_dir: Directory for log files (default: ./logs)
            log_to_file: Whether to write a log file
            command: CLI subcommand, used in the log file name

        Returns:
            The root TopoHopf logger
        """
        cls._drop_handlers()
        logger = logging.getLogger(app_name)
        logger.setLevel(logging.DEBUG)
        logger.propagate = False

        cls._console_level = to_level(console_level, logging.WARNING)
        cls._file_level = to_level(file_level, logging.DEBUG)

        # stderr keeps stdout free for tables printed by the CLI
        console = logging.StreamHandler(sys.stderr)
        console.setLevel(cls._console_level)
        console.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt="%H:%M:%S"))
        console.addFilter(cls._run)
        logger.addHandler(console)

        if log_to_file:
            log_dir = Path(log_dir) if log_dir is not None else Path("logs")
            log_dir.mkdir(parents=True, exist_ok=True)
            stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            name = f"{app_name.lower()}_{command}_{stamp}.log" if command else f"{app_name.lower()}_{stamp}.log"
            cls._log_file = log_dir / name

            file_handler = logging.FileHandler(cls._log_file, encoding="utf-8")
            file_handler.setLevel(cls._file_level)
            file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
            file_handler.addFilter(cls._run)
            logger.addHandler(file_handler)

        cls._logger = logger
        logger.debug(f"Logging ready: console {logging.getLevelName(cls._console_level)}, "
                     f"file {logging.getLevelName(cls._file_level) if log_to_file else 'off'}")
        if cls._log_file is not None:
            logger.info(f"Log file: {cls._log_file}")
        return logger

    @classmethod
    def _drop_handlers(cls) -> None:
        if cls._logger is not None:
            for handler in list(cls._logger.handlers):
                handler.close()
                cls._logger.removeHandler(handler)
        cls._log_file = None

    @classmethod
    def reset(cls) -> None:
        """Remove all handlers and the run tag; the next logger request starts from defaults."""
        cls._drop_handlers()
        cls._logger = None
        cls._run.tag = NO_RUN

    @classmethod
    def set_run(cls, config_hash: Optional[str]) -> None:
        """Tag subsequent records with the first 8 hex digits of the config hash."""
        cls._run.tag = config_hash[:8] if config_hash else NO_RUN

    @classmethod
    def get_logger(cls, name: Optional[str] = None) -> logging.Logger:
        if cls._logger is None:
            cls.initialize()
        if name:
            return logging.getLogger(f"{cls._logger.name}.{name}")
        return cls._logger

    @classmethod
    def set_console_level(cls, level: Union[str, int]) -> None:
        if cls._logger is None:
            cls.initialize()
        cls._console_level = to_level(level)
        for handler in cls._logger.handlers:
            if not isinstance(handler, logging.FileHandler):
                handler.setLevel(cls._console_level)

    @classmethod
    def get_log_file(cls) -> Optional[Path]:
        return cls._log_file


def get_module_logger(module_name: Optional[str] = None) -> logging.Logger:
    """
    Get a child logger for the calling module.

    Args:
        module_name: Explicit name (defaults to the caller's __name__)

    Returns:
        Logger named "TopoHopf.<module>"
    """
    if module_name is None:
        module_name = sys._getframe(1).f_globals.get("__name__", "__main__")
    if module_name.startswith("__main__."):
        module_name = module_name[len("__main__."):]
    return TopoHopfLogger.get_logger(module_name)
